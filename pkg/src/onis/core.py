"""Shared domain types and the feature normalization contract.

Feature vectors are non-negative and max-normalized: every value is divided
by the vector's maximum, so the largest entry of a nonzero vector is exactly
1.0 and an all-zero vector stays all-zero. Values are computed in float64;
file formats store them as float32 (see :mod:`onis.featstream`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MalformedInputError


def _as_readonly_f64(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Fixed-width non-negative feature vector, one per stream record.

    Construct through :func:`max_normalize` (raw activations) or
    :meth:`FeatureVector.of` (already non-negative values).
    """

    values: np.ndarray

    @classmethod
    def of(cls, values: Sequence[float]) -> "FeatureVector":
        arr = _as_readonly_f64(values)
        if arr.ndim != 1 or arr.size == 0:
            raise MalformedInputError(
                f"feature vector must be a non-empty 1-D sequence, got shape {arr.shape}"
            )
        _check_finite(arr)
        if np.any(arr < 0.0):
            pos = int(np.argmax(arr < 0.0))
            raise MalformedInputError(
                f"negative value {arr[pos]} at position {pos}; feature vectors are non-negative"
            )
        return cls(arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"FeatureVector(dim={self.dim})"


@dataclass(frozen=True)
class FrameRecord:
    """One stream element: frame index, optional timestamp, features."""

    frame_index: int
    features: FeatureVector
    timestamp_s: Optional[float] = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise MalformedInputError(f"frame_index must be >= 0, got {self.frame_index}")
        if self.timestamp_s is not None and not (
            np.isfinite(self.timestamp_s) and self.timestamp_s >= 0.0
        ):
            raise MalformedInputError(
                f"timestamp_s must be a finite non-negative value, got {self.timestamp_s}"
            )


@dataclass(frozen=True)
class StreamHeader:
    """Stream metadata.

    ``record_count_hint`` is advisory and absent in true online operation;
    nothing downstream may rely on it.
    """

    dim: int
    fps: float
    record_count_hint: Optional[int] = field(default=None)

    def __post_init__(self):
        if self.dim < 1:
            raise MalformedInputError(f"dim must be a positive integer, got {self.dim}")
        if not (np.isfinite(self.fps) and self.fps > 0.0):
            raise MalformedInputError(f"fps must be positive and finite, got {self.fps}")
        if self.record_count_hint is not None and self.record_count_hint < 0:
            raise MalformedInputError(
                f"record_count_hint must be >= 0 when present, got {self.record_count_hint}"
            )


def _check_finite(arr: np.ndarray) -> None:
    finite = np.isfinite(arr)
    if not finite.all():
        pos = int(np.argmin(finite))
        raise MalformedInputError(
            f"non-finite value {arr.flat[pos]} at position {pos}"
        )


def max_normalize(raw: Sequence[float]) -> FeatureVector:
    """Scale raw activations into [0, 1] by dividing by the maximum value.

    Negative inputs are clamped to 0 before normalization (downstream
    divergence measures require non-negative vectors). An all-zero vector is
    returned unchanged; otherwise the maximum of the result is exactly 1.0.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise MalformedInputError(
            f"max_normalize expects a non-empty 1-D sequence, got shape {arr.shape}"
        )
    _check_finite(arr)
    arr = np.maximum(arr, 0.0)
    peak = arr.max()
    if peak > 0.0:
        arr = arr / peak
    return FeatureVector(_as_readonly_f64(arr))


def average_pool(feature_map) -> np.ndarray:
    """Collapse the spatial extent of a feature map to one value per channel.

    Accepts either a ``(positions, channels)`` grid (any flattening of the
    m x n extent; pooling is permutation-invariant over positions) or a
    ``(channels, m, n)`` map. Returns a float64 vector of length ``channels``.
    """
    arr = np.asarray(feature_map, dtype=np.float64)
    if arr.size == 0:
        raise MalformedInputError("average_pool: empty feature map")
    if arr.ndim == 2:
        return arr.mean(axis=0)
    if arr.ndim == 3:
        return arr.mean(axis=(1, 2))
    raise MalformedInputError(
        f"average_pool expects a 2-D (positions, channels) or 3-D (channels, m, n) "
        f"array, got shape {arr.shape}"
    )
