"""Synthetic clustered-stream generator for testing and benchmarking.

Records are drawn around scheduled cluster centers with Gaussian noise,
clamped at zero, then max-normalized, so generated streams satisfy every
feature-vector invariant. Generation is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np

from .core import FeatureVector, FrameRecord, StreamHeader, max_normalize
from .errors import MalformedInputError
from .featstream import StreamFile


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters.

    ``schedule`` is a sequence of (cluster_id, run_length) runs; the stream
    emits run_length consecutive records around that cluster's center.
    """

    dim: int
    cluster_centers: Tuple[FeatureVector, ...]
    intra_sd: float
    schedule: Tuple[Tuple[int, int], ...]
    seed: int
    fps: float = 30.0

    def __post_init__(self):
        if not self.cluster_centers:
            raise MalformedInputError("cluster_centers must be non-empty")
        for c in self.cluster_centers:
            if c.dim != self.dim:
                raise MalformedInputError(
                    f"cluster center has dim {c.dim}, spec declares {self.dim}"
                )
        if not (np.isfinite(self.intra_sd) and self.intra_sd >= 0.0):
            raise MalformedInputError(f"intra_sd must be >= 0, got {self.intra_sd}")
        if not self.schedule:
            raise MalformedInputError("schedule must be non-empty")
        for cid, run in self.schedule:
            if not (0 <= cid < len(self.cluster_centers)):
                raise MalformedInputError(f"schedule references unknown cluster {cid}")
            if run < 1:
                raise MalformedInputError(f"run lengths must be >= 1, got {run}")

    @classmethod
    def from_mapping(cls, obj: Mapping) -> "SyntheticSpec":
        try:
            return cls(
                dim=int(obj["dim"]),
                cluster_centers=tuple(
                    FeatureVector.of(np.asarray(c, dtype=np.float64))
                    for c in obj["centers"]
                ),
                intra_sd=float(obj["intra_sd"]),
                schedule=tuple((int(c), int(r)) for c, r in obj["schedule"]),
                seed=int(obj["seed"]),
                fps=float(obj.get("fps", 30.0)),
            )
        except KeyError as e:
            raise MalformedInputError(f"synthetic spec is missing key {e}") from None

    def to_mapping(self) -> dict:
        return {
            "dim": self.dim,
            "centers": [list(map(float, c.values)) for c in self.cluster_centers],
            "intra_sd": self.intra_sd,
            "schedule": [list(run) for run in self.schedule],
            "seed": self.seed,
            "fps": self.fps,
        }


def generate_synthetic(spec: SyntheticSpec) -> StreamFile:
    """Deterministically generate the scheduled stream."""
    rng = np.random.default_rng(spec.seed)
    records = []
    t = 0
    for cid, run in spec.schedule:
        center = spec.cluster_centers[cid].values
        for _ in range(run):
            noise = rng.normal(0.0, spec.intra_sd, spec.dim) if spec.intra_sd > 0 else 0.0
            raw = np.maximum(center + noise, 0.0)
            records.append(
                FrameRecord(t, max_normalize(raw), timestamp_s=t / spec.fps)
            )
            t += 1
    header = StreamHeader(dim=spec.dim, fps=spec.fps, record_count_hint=len(records))
    return StreamFile(header=header, records=tuple(records))


def block_centers(
    n_clusters: int, dim: int, baseline: float = 0.1, peak: float = 1.0
) -> Tuple[FeatureVector, ...]:
    """Well-separated centers: a flat baseline with one high block per cluster.

    Block patterns survive max-normalization distinctly, unlike centers that
    differ only by scale. Requires dim >= n_clusters.
    """
    if n_clusters < 1 or dim < n_clusters:
        raise MalformedInputError(
            f"need dim >= n_clusters >= 1, got dim={dim}, n_clusters={n_clusters}"
        )
    block = dim // n_clusters
    centers = []
    for c in range(n_clusters):
        v = np.full(dim, baseline)
        lo = c * block
        hi = dim if c == n_clusters - 1 else lo + block
        v[lo:hi] = peak
        centers.append(FeatureVector.of(v))
    return tuple(centers)
