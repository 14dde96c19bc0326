"""Pluggable distance measures between feature vectors.

The default measure is the symmetric KL divergence. Feature vectors are not
probability distributions (they are max-normalized and contain zeros), so
both arguments are first smoothed by adding ``epsilon`` to every element and
sum-normalizing; the result is KL(p||q) + KL(q||p) with natural logarithms.
Euclidean and cosine distances are provided as alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FeatureVector
from .errors import MalformedInputError

_TAGS = {
    "symmetric_kl": _kernels.SYMMETRIC_KL,
    "euclidean": _kernels.EUCLIDEAN,
    "cosine": _kernels.COSINE,
}

_CLI_NAMES = {
    "symmetric-kl": "symmetric_kl",
    "euclidean": "euclidean",
    "cosine": "cosine",
}


@dataclass(frozen=True)
class DistanceKind:
    """Distance selector. ``epsilon`` is used only by ``symmetric_kl``."""

    tag: str = "symmetric_kl"
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise MalformedInputError(
                f"unknown distance tag {self.tag!r}; expected one of {sorted(_TAGS)}"
            )
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise MalformedInputError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def from_cli_name(cls, name: str, epsilon: float = 1e-10) -> "DistanceKind":
        try:
            return cls(_CLI_NAMES[name], epsilon)
        except KeyError:
            raise MalformedInputError(
                f"unknown distance {name!r}; expected one of {sorted(_CLI_NAMES)}"
            ) from None

    @property
    def cli_name(self) -> str:
        return self.tag.replace("_", "-")

    @property
    def code(self) -> int:
        return _TAGS[self.tag]


def _as_vector(v, kind: DistanceKind) -> np.ndarray:
    """Coerce to a validated contiguous float64 vector.

    FeatureVector inputs are trusted (validated at construction); raw
    sequences are checked for finiteness and, for symmetric KL, for
    non-negativity (the smoothing repair assumes non-negative inputs).
    """
    if isinstance(v, FeatureVector):
        return v.values
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise MalformedInputError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        pos = int(np.argmin(np.isfinite(arr)))
        raise MalformedInputError(f"non-finite value {arr[pos]} at position {pos}")
    if kind.tag == "symmetric_kl" and np.any(arr < 0.0):
        pos = int(np.argmax(arr < 0.0))
        raise MalformedInputError(
            f"symmetric_kl requires non-negative inputs; got {arr[pos]} at position {pos}"
        )
    return arr


def distance(kind: DistanceKind, a, b) -> float:
    """Distance between two vectors. Symmetric, non-negative, zero on identity."""
    av = _as_vector(a, kind)
    bv = _as_vector(b, kind)
    if av.shape[0] != bv.shape[0]:
        raise MalformedInputError(
            f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}"
        )
    return float(_kernels.scalar_distance(kind.code, av, bv, kind.epsilon))


def distances_to_set(kind: DistanceKind, x, members: np.ndarray) -> np.ndarray:
    """Distances from one vector to every row of a (n, dim) member matrix."""
    xv = _as_vector(x, kind)
    members = np.ascontiguousarray(members, dtype=np.float64)
    if members.ndim != 2:
        raise MalformedInputError(f"member matrix must be 2-D, got shape {members.shape}")
    if members.shape[0] and members.shape[1] != xv.shape[0]:
        raise MalformedInputError(
            f"dimension mismatch: query has {xv.shape[0]}, members have {members.shape[1]}"
        )
    return _kernels.distances_to_set(kind.code, xv, members, kind.epsilon)


def pairwise_matrix(kind: DistanceKind, members: np.ndarray) -> np.ndarray:
    """Symmetric matrix of pairwise distances between rows of (n, dim)."""
    members = np.ascontiguousarray(members, dtype=np.float64)
    if members.ndim != 2:
        raise MalformedInputError(f"member matrix must be 2-D, got shape {members.shape}")
    return _kernels.pairwise(kind.code, members, kind.epsilon)
