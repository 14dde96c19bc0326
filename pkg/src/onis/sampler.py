"""Online informative sampler.

Maintains a bounded working set of the most distinctive records seen so far.
The first ``k`` records fill the set unconditionally (warm-up prior). After
that, each record's surprise is its minimum distance to the current members;
the admission threshold is the mean of every member's nearest-neighbor
distance within the set ("picking above the mean"). Records whose surprise
strictly exceeds the threshold are admitted, and the set is trimmed back to
``k`` members by re-running greedy k-center selection, evicting whichever
member the selection leaves out.

``observe`` is a pure function from (state, record) to (state, outcome), so
the set is safe to hand between threads as long as calls stay serialized in
stream order; :class:`OnlineSampler` wraps it with stream-order enforcement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import FrameRecord
from .distances import DistanceKind, distances_to_set, pairwise_matrix
from .errors import InvariantError, MalformedInputError, NonMonotoneIndexError


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler parameters. ``k`` is the fixed sample size (at least 2:
    the admission threshold is undefined for fewer than two members).
    Admission is strict: surprise must exceed, not merely reach, the mean."""

    k: int
    distance: DistanceKind = DistanceKind()

    def __post_init__(self):
        if self.k < 2:
            raise MalformedInputError(f"k must be at least 2, got {self.k}")


@dataclass(frozen=True)
class StepOutcome:
    """Result of observing one record.

    ``surprise`` is +inf for the very first record (nothing to compare
    against) and ``threshold`` is 0.0 while the set has fewer than two
    members; both are diagnostic during warm-up, when records are admitted
    unconditionally. ``evicted_frame_index`` is set only when an admission
    overflowed the set; it can equal the admitted record's own index when
    trimming drops the newcomer straight away.
    """

    surprise: float
    threshold: float
    admitted: bool
    evicted_frame_index: Optional[int] = None


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Bounded working set: members in ascending frame order plus a cached
    symmetric matrix of member-pair distances (coherent with the config's
    distance at all times, provided every observe call uses the same config).
    """

    members: Tuple[FrameRecord, ...]
    pair_dist: np.ndarray
    features: np.ndarray

    @classmethod
    def empty(cls) -> "SampleSet":
        return cls(
            members=(),
            pair_dist=_readonly(np.zeros((0, 0))),
            features=_readonly(np.zeros((0, 0))),
        )

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def frame_indices(self) -> Tuple[int, ...]:
        return tuple(m.frame_index for m in self.members)


def nearest_neighbor_mean(pair_dist: np.ndarray) -> float:
    """Mean over members of the distance to their closest other member."""
    n = pair_dist.shape[0]
    if n < 2:
        return 0.0
    masked = pair_dist + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
    return float(masked.min(axis=1).mean())


def greedy_k_centers(pair_dist: np.ndarray, k: int) -> List[int]:
    """Greedy k-center selection over a precomputed distance matrix.

    The first center is position 0 (the lowest frame index, given members in
    ascending order); each subsequent center maximizes its minimum distance
    to the centers chosen so far. All ties break toward the lowest position.
    Returns the chosen positions in ascending order.
    """
    n = pair_dist.shape[0]
    if k < 1:
        raise MalformedInputError(f"k must be at least 1, got {k}")
    if k >= n:
        return list(range(n))
    chosen = [0]
    min_dist = pair_dist[0].astype(np.float64, copy=True)
    min_dist[0] = -1.0
    for _ in range(k - 1):
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        np.minimum(min_dist, pair_dist[nxt], out=min_dist)
        min_dist[nxt] = -1.0
    return sorted(chosen)


def trim_to_k(
    members: Sequence[FrameRecord],
    config: SamplerConfig,
    pair_dist: Optional[np.ndarray] = None,
) -> Tuple[List[FrameRecord], FrameRecord]:
    """Evict the one member greedy k-center selection leaves out.

    Takes exactly k+1 members in ascending frame order; returns the k kept
    members (order preserved) and the evicted one.
    """
    members = list(members)
    if len(members) != config.k + 1:
        raise MalformedInputError(
            f"trim_to_k requires exactly k+1={config.k + 1} members, got {len(members)}"
        )
    indices = [m.frame_index for m in members]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise NonMonotoneIndexError(
            f"members must be in strictly ascending frame order, got {indices}"
        )
    if pair_dist is None:
        feats = np.ascontiguousarray([m.features.values for m in members])
        pair_dist = pairwise_matrix(config.distance, feats)
    kept_pos = greedy_k_centers(pair_dist, config.k)
    (evicted_pos,) = set(range(len(members))) - set(kept_pos)
    kept = [members[i] for i in kept_pos]
    return kept, members[evicted_pos]


def _appended(state: SampleSet, frame: FrameRecord, dists: np.ndarray) -> SampleSet:
    """Extend members, the feature matrix, and the cached pair distances."""
    n = state.size
    feats = np.empty((n + 1, frame.features.dim))
    if n:
        feats[:n] = state.features
    feats[n] = frame.features.values
    pd = np.zeros((n + 1, n + 1))
    pd[:n, :n] = state.pair_dist
    pd[n, :n] = dists
    pd[:n, n] = dists
    return SampleSet(
        members=state.members + (frame,),
        pair_dist=_readonly(pd),
        features=_readonly(feats),
    )


def _dropped(state: SampleSet, pos: int) -> SampleSet:
    keep = [i for i in range(state.size) if i != pos]
    return SampleSet(
        members=tuple(m for i, m in enumerate(state.members) if i != pos),
        pair_dist=_readonly(state.pair_dist[np.ix_(keep, keep)].copy()),
        features=_readonly(state.features[keep].copy()),
    )


def observe(
    state: SampleSet, frame: FrameRecord, config: SamplerConfig
) -> Tuple[SampleSet, StepOutcome]:
    """Consume one record and return the updated set plus the step outcome.

    The threshold reflects the set before the record is considered and is
    recomputed from the cached pair distances on every call.
    """
    if state.size:
        if frame.features.dim != state.features.shape[1]:
            raise MalformedInputError(
                f"dimension mismatch: record has {frame.features.dim}, "
                f"set has {state.features.shape[1]}"
            )
        if frame.frame_index <= state.members[-1].frame_index:
            raise NonMonotoneIndexError(
                f"frame_index {frame.frame_index} is not greater than "
                f"{state.members[-1].frame_index} already in the set"
            )

    dists = distances_to_set(config.distance, frame.features, state.features)
    surprise = float(dists.min()) if state.size else math.inf
    threshold = nearest_neighbor_mean(state.pair_dist)

    if state.size < config.k:
        return _appended(state, frame, dists), StepOutcome(surprise, threshold, True)

    if not surprise > threshold:
        return state, StepOutcome(surprise, threshold, False)

    extended = _appended(state, frame, dists)
    kept_pos = greedy_k_centers(extended.pair_dist, config.k)
    (evicted_pos,) = set(range(extended.size)) - set(kept_pos)
    evicted = extended.members[evicted_pos]
    new_state = _dropped(extended, evicted_pos)
    if new_state.size != config.k:
        raise InvariantError(
            f"trim left {new_state.size} members, expected {config.k}"
        )
    return new_state, StepOutcome(surprise, threshold, True, evicted.frame_index)


def finalize(state: SampleSet) -> List[FrameRecord]:
    """Members in ascending frame order; valid at any point in the stream."""
    return list(state.members)


class OnlineSampler:
    """Stateful wrapper enforcing stream order across all observed records,
    including rejected ones."""

    def __init__(self, config: SamplerConfig):
        self.config = config
        self._state = SampleSet.empty()
        self._last_index: Optional[int] = None

    @property
    def state(self) -> SampleSet:
        return self._state

    def observe(self, frame: FrameRecord) -> StepOutcome:
        if self._last_index is not None and frame.frame_index <= self._last_index:
            raise NonMonotoneIndexError(
                f"frame_index {frame.frame_index} observed after {self._last_index}"
            )
        self._last_index = frame.frame_index
        self._state, outcome = observe(self._state, frame, self.config)
        return outcome

    def finalize(self) -> List[FrameRecord]:
        return finalize(self._state)
