import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onis import (
    DistanceKind,
    FeatureVector,
    FrameRecord,
    MalformedInputError,
    NonMonotoneIndexError,
    OnlineSampler,
    SamplerConfig,
    SampleSet,
    distance,
    finalize,
    greedy_k_centers,
    observe,
    trim_to_k,
)

from .oracles import (
    brute_force_k_center_radius,
    coverage_radius,
    independent_greedy_k_centers,
)

EUCLID = DistanceKind("euclidean")


def rec(i, *values):
    return FrameRecord(i, FeatureVector.of(list(values)))


def run_stream(values, k=2, kind=EUCLID):
    sampler = OnlineSampler(SamplerConfig(k=k, distance=kind))
    outcomes = [sampler.observe(rec(i, *np.atleast_1d(v))) for i, v in enumerate(values)]
    return sampler, outcomes


class TestHandTrace:
    def test_full_trace(self):
        sampler, outcomes = run_stream([0.0, 1.0, 0.5, 3.0], k=2)

        assert outcomes[0].admitted and outcomes[0].surprise == math.inf
        assert outcomes[0].threshold == 0.0
        assert outcomes[1].admitted and outcomes[1].surprise == 1.0

        # set {0.0, 1.0}: threshold = mean(1, 1) = 1
        assert outcomes[2].surprise == 0.5
        assert outcomes[2].threshold == 1.0
        assert not outcomes[2].admitted
        assert outcomes[2].evicted_frame_index is None

        assert outcomes[3].surprise == 2.0
        assert outcomes[3].threshold == 1.0
        assert outcomes[3].admitted
        assert outcomes[3].evicted_frame_index == 1

        final = sampler.finalize()
        assert [r.frame_index for r in final] == [0, 3]
        assert [r.features.values[0] for r in final] == [0.0, 3.0]

    def test_duplicate_of_member_never_admitted(self):
        sampler, outcomes = run_stream([0.0, 1.0, 0.0 + 0.0, 1.0], k=2)
        assert not outcomes[2].admitted and outcomes[2].surprise == 0.0
        assert not outcomes[3].admitted and outcomes[3].surprise == 0.0


class TestTrim:
    def test_hand_trace_eviction(self):
        members = [rec(0, 0.0), rec(1, 1.0), rec(2, 3.0)]
        kept, evicted = trim_to_k(members, SamplerConfig(k=2, distance=EUCLID))
        assert [m.frame_index for m in kept] == [0, 2]
        assert evicted.frame_index == 1

    def test_duplicate_members_evict_higher_index(self):
        members = [rec(0, 1.0, 0.0), rec(1, 1.0, 0.0), rec(2, 0.0, 1.0)]
        kept, evicted = trim_to_k(members, SamplerConfig(k=2, distance=EUCLID))
        assert evicted.frame_index == 1
        assert [m.frame_index for m in kept] == [0, 2]

    def test_requires_exactly_k_plus_one(self):
        with pytest.raises(MalformedInputError):
            trim_to_k([rec(0, 1.0), rec(1, 2.0)], SamplerConfig(k=2, distance=EUCLID))

    def test_kept_members_stay_ascending(self):
        rng = np.random.default_rng(5)
        config = SamplerConfig(k=4, distance=EUCLID)
        members = [rec(i * 3, *rng.uniform(0, 1, 3)) for i in range(5)]
        kept, evicted = trim_to_k(members, config)
        indices = [m.frame_index for m in kept]
        assert indices == sorted(indices)
        assert len(kept) == 4
        assert evicted.frame_index not in indices


class TestGreedyKCenters:
    @pytest.mark.parametrize("kind", [EUCLID, DistanceKind("symmetric_kl")],
                             ids=lambda k: k.tag)
    def test_matches_independent_reimplementation(self, kind):
        from onis.distances import pairwise_matrix

        rng = np.random.default_rng(17)
        for trial in range(50):
            n = int(rng.integers(2, 9))
            k = int(rng.integers(1, n + 1))
            points = rng.uniform(0.0, 1.0, (n, 4))
            dist = pairwise_matrix(kind, points)
            assert greedy_k_centers(dist, k) == independent_greedy_k_centers(
                dist.tolist(), k
            )

    def test_two_approximation_small_instances(self):
        rng = np.random.default_rng(23)
        for trial in range(100):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(2, min(4, n - 1) + 1))
            points = rng.uniform(0.0, 1.0, (n, 3))
            dist = np.sqrt(
                ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
            )
            greedy_radius = coverage_radius(dist.tolist(), greedy_k_centers(dist, k))
            optimal = brute_force_k_center_radius(dist.tolist(), k)
            assert greedy_radius <= 2.0 * optimal + 1e-12


@st.composite
def small_streams(draw):
    dim = draw(st.integers(min_value=1, max_value=4))
    n = draw(st.integers(min_value=0, max_value=30))
    elems = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, width=32)
    rows = draw(
        st.lists(
            st.lists(elems, min_size=dim, max_size=dim), min_size=n, max_size=n
        )
    )
    return rows


class TestStreamingInvariants:
    @settings(max_examples=60, deadline=None)
    @given(rows=small_streams(), k=st.integers(min_value=2, max_value=5))
    def test_bounded_and_deterministic(self, rows, k):
        config = SamplerConfig(k=k, distance=DistanceKind("symmetric_kl"))
        results = []
        for _ in range(2):
            sampler = OnlineSampler(config)
            for i, row in enumerate(rows):
                sampler.observe(rec(i, *row))
                assert sampler.state.size <= k
            results.append(
                (
                    sampler.state.frame_indices,
                    sampler.state.pair_dist.tobytes(),
                    sampler.state.features.tobytes(),
                )
            )
        assert results[0] == results[1]

    def test_stream_shorter_than_k_returns_all(self):
        sampler, _ = run_stream([0.3, 0.9], k=4)
        assert [r.frame_index for r in sampler.finalize()] == [0, 1]

    def test_empty_stream(self):
        sampler = OnlineSampler(SamplerConfig(k=3, distance=EUCLID))
        assert sampler.finalize() == []
        assert finalize(SampleSet.empty()) == []

    def test_prefix_kept_until_first_admission(self):
        # all steady-state surprises stay at/below the threshold
        sampler, outcomes = run_stream([0.0, 10.0, 5.0, 4.0, 6.0], k=2)
        assert all(not o.admitted for o in outcomes[2:])
        assert sampler.state.frame_indices == (0, 1)

    def test_chunked_feeding_equivalent(self):
        rng = np.random.default_rng(31)
        rows = rng.uniform(0, 1, (40, 3))
        config = SamplerConfig(k=3, distance=DistanceKind("symmetric_kl"))

        def run(chunks):
            sampler = OnlineSampler(config)
            outcomes = []
            i = 0
            for size in chunks:
                for row in rows[i : i + size]:
                    outcomes.append(sampler.observe(rec(i, *row)))
                    i += 1
            return sampler.state.frame_indices, outcomes

        one_by_one = run([1] * 40)
        chunked = run([7, 13, 1, 19])
        assert one_by_one == chunked

    def test_pair_dist_cache_coherent(self):
        rng = np.random.default_rng(41)
        kind = DistanceKind("symmetric_kl")
        sampler = OnlineSampler(SamplerConfig(k=4, distance=kind))
        for i, row in enumerate(rng.uniform(0, 1, (60, 3))):
            sampler.observe(rec(i, *row))
        state = sampler.state
        assert state.pair_dist.shape == (state.size, state.size)
        for i, mi in enumerate(state.members):
            for j, mj in enumerate(state.members):
                assert state.pair_dist[i, j] == distance(kind, mi.features, mj.features)

    def test_eviction_only_when_full_and_admitted(self):
        rng = np.random.default_rng(43)
        sampler = OnlineSampler(SamplerConfig(k=3, distance=EUCLID))
        for i, row in enumerate(rng.uniform(0, 1, (50, 2))):
            out = sampler.observe(rec(i, *row))
            if out.evicted_frame_index is not None:
                assert out.admitted
            if not out.admitted:
                assert out.evicted_frame_index is None

    def test_warm_up_admits_duplicates(self):
        sampler, outcomes = run_stream([0.5, 0.5, 0.5], k=3)
        assert all(o.admitted for o in outcomes)
        assert sampler.state.size == 3


class TestValidation:
    def test_k_must_be_at_least_two(self):
        with pytest.raises(MalformedInputError):
            SamplerConfig(k=1)

    def test_dimension_mismatch(self):
        sampler = OnlineSampler(SamplerConfig(k=2, distance=EUCLID))
        sampler.observe(rec(0, 1.0, 2.0))
        with pytest.raises(MalformedInputError, match="dimension mismatch"):
            sampler.observe(rec(1, 1.0))

    def test_non_monotone_rejected_by_observe(self):
        config = SamplerConfig(k=2, distance=EUCLID)
        state, _ = observe(SampleSet.empty(), rec(5, 1.0), config)
        with pytest.raises(NonMonotoneIndexError):
            observe(state, rec(5, 2.0), config)
        with pytest.raises(NonMonotoneIndexError):
            observe(state, rec(3, 2.0), config)

    def test_online_sampler_tracks_rejected_indices_too(self):
        sampler, _ = run_stream([0.0, 1.0, 0.5], k=2)  # frame 2 rejected
        with pytest.raises(NonMonotoneIndexError):
            sampler.observe(rec(2, 9.0))
