#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the scalar distance, record-to-set, and pairwise-matrix kernels on
stream-realistic shapes, plus a full sampler pass over a synthetic stream
under each backend. Run from a checkout:

    python3 benchmarks/bench_kernels.py [--records 20000] [--dim 256]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from onis import _kernels
from onis.core import FeatureVector, FrameRecord
from onis.distances import DistanceKind
from onis.sampler import OnlineSampler, SamplerConfig
from onis.synthetic import SyntheticSpec, block_centers, generate_synthetic

KINDS = [
    ("symmetric_kl", _kernels.SYMMETRIC_KL),
    ("euclidean", _kernels.EUCLIDEAN),
    ("cosine", _kernels.COSINE),
]


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up (and JIT compilation for numba)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(dim: int, set_size: int, batch: int) -> None:
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.uniform(0, 1, dim))
    members = np.ascontiguousarray(rng.uniform(0, 1, (set_size, dim)))
    queries = np.ascontiguousarray(rng.uniform(0, 1, (batch, dim)))
    eps = 1e-10

    print(f"\nkernels: dim={dim} set_size={set_size} batch={batch}")
    print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, code in KINDS:

        def batch_to_set(impl):
            def run():
                for q in queries:
                    impl(code, q, members, eps)

            return run

        t_np = timeit(batch_to_set(_kernels.distances_to_set_numpy))
        t_nb = timeit(batch_to_set(_kernels.distances_to_set_numba))
        print(
            f"{name + ' to-set x' + str(batch):<28}"
            f"{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x"
        )

    big = np.ascontiguousarray(rng.uniform(0, 1, (128, dim)))
    for name, code in KINDS:
        t_np = timeit(lambda: _kernels.pairwise_numpy(code, big, eps))
        t_nb = timeit(lambda: _kernels.pairwise_numba(code, big, eps))
        print(
            f"{name + ' pairwise 128':<28}"
            f"{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x"
        )


def bench_sampler(records: int, dim: int, k: int) -> None:
    runs = max(1, records // 1000)
    spec = SyntheticSpec(
        dim=dim,
        cluster_centers=block_centers(4, dim),
        intra_sd=0.1,
        schedule=tuple((i % 4, 1000) for i in range(runs)),
        seed=3,
    )
    stream = generate_synthetic(spec)
    frames = list(stream.records)

    print(f"\nsampler pass: {len(frames)} records, dim={dim}, k={k}, symmetric-kl")
    results = {}
    for label, to_set, pairwise in (
        ("numpy", _kernels.distances_to_set_numpy, _kernels.pairwise_numpy),
        ("numba", _kernels.distances_to_set_numba, _kernels.pairwise_numba),
    ):
        saved = (_kernels.distances_to_set, _kernels.pairwise)
        _kernels.distances_to_set, _kernels.pairwise = to_set, pairwise
        try:
            sampler = OnlineSampler(SamplerConfig(k=k, distance=DistanceKind()))
            sampler.observe(frames[0])  # warm-up record outside the timer
            t0 = time.perf_counter()
            for record in frames[1:]:
                sampler.observe(record)
            elapsed = time.perf_counter() - t0
        finally:
            _kernels.distances_to_set, _kernels.pairwise = saved
        results[label] = elapsed
        picked = [r.frame_index for r in sampler.finalize()]
        rate = (len(frames) - 1) / elapsed
        print(f"  {label:<6} {elapsed:8.3f}s  ({rate:,.0f} records/s)  sample={picked}")
    print(f"  speedup: {results['numpy'] / results['numba']:.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--k", type=int, default=6)
    args = parser.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    bench_kernels(args.dim, args.k, batch=1000)
    bench_sampler(args.records, args.dim, args.k)


if __name__ == "__main__":
    main()
