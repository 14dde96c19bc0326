"""Hot numeric kernels: record-to-set distances and pairwise matrices.

Two interchangeable implementations exist for every kernel: a numba
``@njit``-compiled one and a pure-numpy one. The active backend is chosen at
import time via the ``ONIS_BACKEND`` environment variable:

    ONIS_BACKEND=numba   require numba (error if unavailable)
    ONIS_BACKEND=numpy   force the pure-numpy fallback
    unset / "auto"       numba when importable, numpy otherwise

Both variants of each kernel are always importable (``*_numpy`` and, when
numba is present, ``*_numba``) so they can be benchmarked against each other;
see ``benchmarks/bench_kernels.py``.

Kernels expect C-contiguous float64 arrays and perform no validation; the
symmetric KL form used here, sum((p - q) * (log p - log q)), is bitwise
symmetric in its arguments. Distance kinds are dispatched by integer code.
"""

from __future__ import annotations

import os

import numpy as np

ENV_BACKEND = "ONIS_BACKEND"

SYMMETRIC_KL = 0
EUCLIDEAN = 1
COSINE = 2


# -- pure-numpy variants ------------------------------------------------------


def _symmetric_kl_py(a, b, eps):
    p = a + eps
    p = p / p.sum()
    q = b + eps
    q = q / q.sum()
    return float(np.sum((p - q) * (np.log(p) - np.log(q))))


def _euclidean_py(a, b):
    d = a - b
    return float(np.sqrt(np.sum(d * d)))


def _cosine_py(a, b):
    dot = float(np.dot(a, b))
    na = float(np.dot(a, a))
    nb = float(np.dot(b, b))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    v = 1.0 - dot / np.sqrt(na * nb)
    return v if v > 0.0 else 0.0


def scalar_distance_numpy(code, a, b, eps):
    if code == SYMMETRIC_KL:
        return _symmetric_kl_py(a, b, eps)
    if code == EUCLIDEAN:
        return _euclidean_py(a, b)
    return _cosine_py(a, b)


def distances_to_set_numpy(code, x, members, eps):
    n = members.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = scalar_distance_numpy(code, x, members[i], eps)
    return out


def pairwise_numpy(code, members, eps):
    n = members.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = scalar_distance_numpy(code, members[i], members[j], eps)
            out[i, j] = d
            out[j, i] = d
    return out


# -- numba variants -----------------------------------------------------------

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def _symmetric_kl_nb(a, b, eps):
        n = a.shape[0]
        sa = 0.0
        sb = 0.0
        for i in range(n):
            sa += a[i] + eps
            sb += b[i] + eps
        acc = 0.0
        for i in range(n):
            p = (a[i] + eps) / sa
            q = (b[i] + eps) / sb
            acc += (p - q) * (np.log(p) - np.log(q))
        return acc

    @njit(cache=True)
    def _euclidean_nb(a, b):
        acc = 0.0
        for i in range(a.shape[0]):
            d = a[i] - b[i]
            acc += d * d
        return np.sqrt(acc)

    @njit(cache=True)
    def _cosine_nb(a, b):
        dot = 0.0
        na = 0.0
        nb = 0.0
        for i in range(a.shape[0]):
            dot += a[i] * b[i]
            na += a[i] * a[i]
            nb += b[i] * b[i]
        if na == 0.0 and nb == 0.0:
            return 0.0
        if na == 0.0 or nb == 0.0:
            return 1.0
        v = 1.0 - dot / np.sqrt(na * nb)
        return v if v > 0.0 else 0.0

    @njit(cache=True)
    def scalar_distance_numba(code, a, b, eps):
        if code == SYMMETRIC_KL:
            return _symmetric_kl_nb(a, b, eps)
        if code == EUCLIDEAN:
            return _euclidean_nb(a, b)
        return _cosine_nb(a, b)

    @njit(cache=True)
    def distances_to_set_numba(code, x, members, eps):
        n = members.shape[0]
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = scalar_distance_numba(code, x, members[i], eps)
        return out

    @njit(cache=True)
    def pairwise_numba(code, members, eps):
        n = members.shape[0]
        out = np.zeros((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i + 1, n):
                d = scalar_distance_numba(code, members[i], members[j], eps)
                out[i, j] = d
                out[j, i] = d
        return out

else:
    scalar_distance_numba = None
    distances_to_set_numba = None
    pairwise_numba = None


# -- backend selection ---------------------------------------------------------


def _select_backend() -> str:
    requested = os.environ.get(ENV_BACKEND, "").strip().lower() or "auto"
    if requested not in ("auto", "numba", "numpy"):
        raise RuntimeError(
            f"{ENV_BACKEND} must be 'numba' or 'numpy' (or unset), got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(f"{ENV_BACKEND}=numba but numba is not importable")
        return "numba"
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _select_backend()

if BACKEND == "numba":
    scalar_distance = scalar_distance_numba
    distances_to_set = distances_to_set_numba
    pairwise = pairwise_numba
else:
    scalar_distance = scalar_distance_numpy
    distances_to_set = distances_to_set_numpy
    pairwise = pairwise_numpy
