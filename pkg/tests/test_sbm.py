import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resolvekit import (
    CollisionBound,
    DegenerateCommunityError,
    LabeledGraph,
    MalformedInputError,
    SbmParams,
    build_graph,
    diam2_condition,
    diam_gt2_condition,
    dump_params,
    er_any_set_size,
    er_beta_upper,
    estimate_params,
    expected_collisions,
    expected_long_pairs,
    load_params,
    modified_adjacency,
    pair_agreement_prob,
    read_labels,
    sample,
    scale_communities,
    write_labels,
)
from resolvekit.graph import count_pairs_distance_gt2


def f_direct(sizes, P, k):
    """Independent collision-bound evaluation with plain power products."""
    c = len(sizes)
    total = 0.0
    for i in range(c):
        for j in range(i, c):
            s = sizes[i] * (sizes[i] - 1) // 2 if i == j else sizes[i] * sizes[j]
            term = float(s)
            for l in range(c):
                r = P[i][l] * P[j][l] + (1 - P[i][l]) * (1 - P[j][l])
                term *= r ** k[l]
            total += term
    return total


def symmetric_params(rng, c, size_hi=20, p_lo=0.0, p_hi=1.0):
    sizes = tuple(int(s) for s in rng.integers(1, size_hi + 1, size=c))
    M = rng.uniform(p_lo, p_hi, size=(c, c))
    return SbmParams(sizes, (M + M.T) / 2)


class TestSbmParamsValidation:
    def test_asymmetric_rejected_naming_entry(self):
        with pytest.raises(MalformedInputError, match=r"P\[0\]\[1\]"):
            SbmParams((2, 2), np.array([[0.5, 0.3], [0.2, 0.5]]))

    def test_out_of_range_rejected(self):
        with pytest.raises(MalformedInputError, match="1.2"):
            SbmParams((2, 2), np.array([[1.2, 0.0], [0.0, 1.0]]))

    def test_empty_or_zero_sizes_rejected(self):
        with pytest.raises(MalformedInputError):
            SbmParams((), np.zeros((0, 0)))
        with pytest.raises(MalformedInputError):
            SbmParams((0,), np.array([[0.5]]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(MalformedInputError):
            SbmParams((2, 2), np.array([[0.5]]))

    def test_pair_counts(self):
        p = SbmParams((3, 2), np.full((2, 2), 0.5))
        assert p.pair_count(0, 0) == 3
        assert p.pair_count(1, 1) == 1
        assert p.pair_count(0, 1) == 6
        assert p.n == 5 and p.c == 2

    def test_labels_contiguous(self):
        p = SbmParams((2, 3), np.full((2, 2), 0.5))
        assert p.labels().tolist() == [0, 0, 1, 1, 1]


class TestSample:
    def test_probability_one_gives_complete_graph(self):
        g = sample(SbmParams((3, 2), np.ones((2, 2))), seed=1)
        assert g.n == 5
        assert g.edge_count == 10

    def test_probability_zero_gives_empty_graph(self):
        g = sample(SbmParams((3, 2), np.zeros((2, 2))), seed=1)
        assert g.edge_count == 0

    def test_edge_count_within_binomial_noise(self):
        params = SbmParams((1000, 1000), np.full((2, 2), 0.5))
        g = sample(params, seed=42)
        pairs = 2000 * 1999 // 2
        mean = pairs * 0.5
        sigma = math.sqrt(pairs * 0.25)
        assert abs(g.edge_count - mean) < 5 * sigma

    def test_same_seed_bit_identical(self):
        params = SbmParams((40, 60), np.array([[0.3, 0.1], [0.1, 0.4]]))
        a = sample(params, seed=9)
        b = sample(params, seed=9)
        assert np.array_equal(a.edges, b.edges)

    def test_different_seed_differs(self):
        params = SbmParams((40, 60), np.array([[0.3, 0.1], [0.1, 0.4]]))
        a = sample(params, seed=9)
        b = sample(params, seed=10)
        assert not np.array_equal(a.edges, b.edges)

    def test_block_membership_respects_probabilities(self):
        # zero cross-block probability => no edge leaves its community
        params = SbmParams((30, 30), np.array([[0.8, 0.0], [0.0, 0.8]]))
        g = sample(params, seed=3)
        labels = params.labels()
        assert (labels[g.edges[:, 0]] == labels[g.edges[:, 1]]).all()


class TestEstimateParams:
    def test_complete_graph_two_blocks(self):
        g = build_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        est = estimate_params(LabeledGraph(g, np.array([0, 0, 1, 1])))
        assert np.array_equal(est.P, np.ones((2, 2)))
        assert est.community_sizes == (2, 2)

    def test_path_with_singleton_community_warns(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        with pytest.warns(UserWarning, match="single member"):
            est = estimate_params(LabeledGraph(g, np.array([0, 0, 1])))
        assert est.P.tolist() == [[1.0, 0.5], [0.5, 0.0]]

    def test_empty_graph_all_zero(self):
        g = build_graph(4, [])
        est = estimate_params(LabeledGraph(g, np.array([0, 0, 1, 1])))
        assert np.array_equal(est.P, np.zeros((2, 2)))

    def test_round_trip_recovers_sampling_probabilities(self, rng):
        P = np.array([[0.30, 0.10], [0.10, 0.60]])
        params = SbmParams((500, 500), P)
        g = sample(params, seed=11)
        est = estimate_params(LabeledGraph(g, params.labels()))
        for i in range(2):
            for j in range(2):
                s = params.pair_count(i, j)
                sigma = math.sqrt(P[i, j] * (1 - P[i, j]) / s)
                assert abs(est.P[i, j] - P[i, j]) < 5 * sigma

    def test_label_gap_rejected(self):
        g = build_graph(2, [(0, 1)])
        with pytest.raises(MalformedInputError):
            LabeledGraph(g, np.array([0, 2]))


class TestScaleCommunities:
    def test_political_books_sizes(self):
        p = scale_communities(SbmParams((49, 43, 13), np.full((3, 3), 0.1)), 10000)
        assert p.community_sizes == (4667, 4095, 1238)

    def test_symmetric_split(self):
        p = scale_communities(SbmParams((17, 17), np.full((2, 2), 0.1)), 10000)
        assert p.community_sizes == (5000, 5000)

    def test_primary_school_sizes(self):
        p = scale_communities(SbmParams((110, 112, 14), np.full((3, 3), 0.1)), 10000)
        assert p.community_sizes == (4661, 4746, 593)

    def test_rounding_repair_goes_to_largest(self):
        p = scale_communities(SbmParams((1, 1, 1), np.full((3, 3), 0.1)), 4)
        assert p.community_sizes == (2, 1, 1)
        assert p.n == 4

    def test_degenerate_community_rejected(self):
        with pytest.raises(DegenerateCommunityError):
            scale_communities(SbmParams((1000, 1), np.full((2, 2), 0.1)), 10)

    def test_target_below_community_count_rejected(self):
        with pytest.raises(MalformedInputError):
            scale_communities(SbmParams((5, 5, 5), np.full((3, 3), 0.1)), 2)

    def test_totals_always_exact(self, rng):
        for _ in range(50):
            c = int(rng.integers(1, 5))
            params = symmetric_params(rng, c, size_hi=300)
            target = int(rng.integers(c * 10, 5000))
            assert scale_communities(params, target).n == target


class TestPairAgreement:
    def test_half_half(self):
        p = SbmParams((2, 2), np.full((2, 2), 0.5))
        assert pair_agreement_prob(p, 0, 1, 0) == pytest.approx(0.5)

    def test_perfect_discriminator(self):
        p = SbmParams((2, 2), np.array([[1.0, 0.3], [0.3, 0.0]]))
        # witness in community 0 sees community 0 always, community 1 never
        assert pair_agreement_prob(p, 0, 1, 0) == pytest.approx(0.3)
        p2 = SbmParams((2, 2), np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert pair_agreement_prob(p2, 0, 1, 0) == 0.0

    def test_blogs_cross_value(self):
        p = SbmParams((586, 636), np.array([[0.043, 0.004], [0.004, 0.039]]))
        assert pair_agreement_prob(p, 0, 1, 0) == pytest.approx(0.043 * 0.004 + 0.957 * 0.996)
        assert pair_agreement_prob(p, 0, 1, 0) == pytest.approx(0.953344, abs=1e-9)

    def test_range_and_degenerate_one(self, rng):
        for _ in range(100):
            params = symmetric_params(rng, int(rng.integers(1, 4)))
            c = params.c
            i, j, l = rng.integers(0, c, size=3)
            r = pair_agreement_prob(params, int(i), int(j), int(l))
            assert 0.0 <= r <= 1.0
            if r == 1.0:
                assert params.P[i, l] == params.P[j, l]
                assert params.P[i, l] in (0.0, 1.0)

    def test_index_validation(self):
        p = SbmParams((2,), np.array([[0.5]]))
        with pytest.raises(MalformedInputError):
            pair_agreement_prob(p, 0, 0, 1)


class TestExpectedCollisions:
    def test_zero_allocation_counts_all_pairs(self):
        p = SbmParams((4,), np.array([[0.9]]))
        assert expected_collisions(p, (0,)) == pytest.approx(6.0)

    def test_single_community_hand_value(self):
        p = SbmParams((4,), np.array([[0.5]]))
        assert expected_collisions(p, (2,)) == pytest.approx(1.5)

    def test_cross_term_vanishes_with_zero_agreement(self):
        p = SbmParams((2, 2), np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert expected_collisions(p, (1, 0)) == pytest.approx(2.0)

    def test_zero_allocation_equals_total_pairs(self, rng):
        for _ in range(30):
            params = symmetric_params(rng, int(rng.integers(1, 4)), size_hi=40)
            n = params.n
            assert expected_collisions(params, (0,) * params.c) == pytest.approx(
                n * (n - 1) / 2
            )

    def test_matches_direct_power_products(self, rng):
        for _ in range(50):
            c = int(rng.integers(1, 4))
            params = symmetric_params(rng, c, size_hi=30)
            k = tuple(int(x) for x in rng.integers(0, 8, size=c))
            expect = f_direct(params.community_sizes, params.P, k)
            got = expected_collisions(params, k)
            assert got == pytest.approx(expect, rel=1e-10, abs=1e-280)

    def test_large_allocation_underflows_to_zero_not_nan(self):
        p = SbmParams((1000, 1000), np.array([[0.5, 0.5], [0.5, 0.5]]))
        v = expected_collisions(p, (1000, 1000))
        assert v == 0.0

    def test_batch_matches_scalar(self, rng):
        params = symmetric_params(rng, 3, size_hi=25)
        bound = CollisionBound(params)
        K = rng.integers(0, 6, size=(20, 3))
        batch = bound.batch(K)
        for row, val in zip(K, batch):
            assert bound(tuple(row)) == pytest.approx(val, rel=1e-12, abs=0)

    def test_negative_allocation_rejected(self):
        p = SbmParams((4,), np.array([[0.5]]))
        with pytest.raises(MalformedInputError):
            CollisionBound(p).batch(np.array([[-1]]))

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_decreasing_in_every_coordinate(self, data):
        c = data.draw(st.integers(1, 3))
        sizes = tuple(data.draw(st.integers(1, 25)) for _ in range(c))
        tri = [[data.draw(st.floats(0, 1)) for _ in range(c)] for _ in range(c)]
        P = np.array(tri)
        P = (P + P.T) / 2
        params = SbmParams(sizes, P)
        x = tuple(data.draw(st.integers(0, 12)) for _ in range(c))
        extra = tuple(data.draw(st.integers(0, 12)) for _ in range(c))
        y = tuple(a + b for a, b in zip(x, extra))
        fx = expected_collisions(params, x)
        fy = expected_collisions(params, y)
        assert fy <= fx * (1 + 1e-12) + 1e-300

    def test_monte_carlo_collisions_below_bound(self, rng):
        # mean observed collisions of random column draws stays under the bound
        params = SbmParams((30, 30), np.array([[0.5, 0.2], [0.2, 0.5]]))
        k = (4, 3)
        f_val = expected_collisions(params, k)
        offs = params.offsets()
        counts = []
        for t in range(2000):
            g = sample(params, seed=t)
            astar = modified_adjacency(g).dense()
            cols = []
            for i, ki in enumerate(k):
                picks = rng.choice(params.community_sizes[i], size=ki, replace=False)
                cols.extend(offs[i] + picks)
            sub = astar[:, cols]
            _, cnt = np.unique(sub, axis=0, return_counts=True)
            counts.append(int((cnt * (cnt - 1) // 2).sum()))
        mean = float(np.mean(counts))
        sem = float(np.std(counts)) / math.sqrt(len(counts))
        assert mean <= f_val + 3 * sem


class TestExpectedLongPairs:
    def test_all_ones_gives_zero(self):
        res = expected_long_pairs(SbmParams((5, 5), np.ones((2, 2))))
        assert res.total == 0.0
        assert res.fraction == 0.0

    def test_all_zeros_gives_pair_counts(self):
        params = SbmParams((2, 2), np.zeros((2, 2)))
        res = expected_long_pairs(params)
        assert res.per_pair[0, 0] == pytest.approx(1.0)
        assert res.per_pair[1, 1] == pytest.approx(1.0)
        assert res.per_pair[0, 1] == pytest.approx(4.0)
        assert res.total == pytest.approx(6.0)

    def test_matches_direct_product_formula(self, rng):
        for _ in range(30):
            params = symmetric_params(rng, int(rng.integers(1, 4)), size_hi=40)
            res = expected_long_pairs(params)
            sizes = params.community_sizes
            P = params.P
            for i in range(params.c):
                for j in range(i, params.c):
                    s = params.pair_count(i, j)
                    expect = s * (1 - P[i, j])
                    for k in range(params.c):
                        e = sizes[k] - (i == k) - (j == k)
                        expect *= (1 - P[i, k] * P[k, j]) ** e
                    assert res.per_pair[i, j] == pytest.approx(expect, rel=1e-9, abs=1e-280)

    def test_monte_carlo_agreement_when_observable(self):
        # E(W) must sit in an observable range for the statistic to be testable
        params = SbmParams((300, 300), np.full((2, 2), 0.12))
        res = expected_long_pairs(params)
        assert 1.0 <= res.total <= 100.0
        counts = [
            count_pairs_distance_gt2(sample(params, seed=s)) for s in range(40)
        ]
        mean = float(np.mean(counts))
        sem = float(np.std(counts)) / math.sqrt(len(counts))
        assert abs(mean - res.total) <= 3 * sem + 1e-9


class TestDiameterConditions:
    def test_all_ones_vacuously_true(self):
        rep = diam2_condition(SbmParams((5, 5), np.ones((2, 2))), 1.5)
        assert rep.all_hold
        assert not any(p.in_scope for p in rep.pairs)

    def test_figure_like_dense_params_hold(self):
        P = np.where(np.eye(4) > 0, 0.7, 0.3)
        rep = diam2_condition(SbmParams((1000, 500, 250, 250), P), 1.5)
        assert rep.all_hold
        assert all(p.holds for p in rep.pairs if p.in_scope)

    def test_sparse_params_fail(self):
        rep = diam2_condition(SbmParams((100, 100), np.full((2, 2), 0.01)), 2.0)
        assert not rep.all_hold
        lhs = rep.pairs[0].lhs
        assert lhs == pytest.approx(200 * 0.01 * 0.01)

    def test_c_const_validation(self):
        with pytest.raises(MalformedInputError):
            diam2_condition(SbmParams((5,), np.array([[0.5]])), 1.0)

    def test_gt2_all_ones_false(self):
        rep = diam_gt2_condition(SbmParams((5, 5), np.ones((2, 2))), 0.5)
        assert not rep.holds

    def test_gt2_sparse_single_community(self):
        rep = diam_gt2_condition(SbmParams((1000,), np.array([[0.01]])), 0.9)
        assert rep.holds
        assert rep.via == "sparse-row"
        assert rep.witness == (0, 0)

    def test_gt2_dense_fig_params_false(self):
        P = np.where(np.eye(4) > 0, 0.7, 0.3)
        rep = diam_gt2_condition(SbmParams((1000, 500, 250, 250), P), 0.5)
        assert not rep.holds

    def test_gt2_c_const_validation(self):
        p = SbmParams((5,), np.array([[0.5]]))
        for bad in (0.0, 1.0, 1.5):
            with pytest.raises(MalformedInputError):
                diam_gt2_condition(p, bad)


class TestErBounds:
    def test_reference_values(self):
        assert er_beta_upper(500, 0.5) == 18
        assert er_any_set_size(500, 0.5) == 27
        assert er_beta_upper(2, 0.5) == 2

    def test_symmetric_in_p(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 10_000))
            p = float(rng.uniform(0.01, 0.99))
            assert er_beta_upper(n, p) == er_beta_upper(n, 1 - p)
            assert er_any_set_size(n, p) == er_any_set_size(n, 1 - p)

    def test_any_set_dominates_beta_upper(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 10_000))
            p = float(rng.uniform(0.01, 0.99))
            assert er_any_set_size(n, p) >= er_beta_upper(n, p)

    def test_half_matches_log2_formula(self, rng):
        for n in (2, 10, 500, 4321):
            assert er_any_set_size(n, 0.5) == math.ceil(3 * math.log(n) / math.log(2))

    def test_degenerate_probability_rejected(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(MalformedInputError):
                er_beta_upper(10, p)
            with pytest.raises(MalformedInputError):
                er_any_set_size(10, p)


class TestParamsIO:
    def test_json_round_trip(self):
        params = SbmParams((3, 4), np.array([[0.25, 0.5], [0.5, 0.75]]))
        buf = io.StringIO()
        dump_params(params, buf)
        back = load_params(io.StringIO(buf.getvalue()))
        assert back == params

    def test_asymmetric_json_rejected_exactly(self):
        text = json.dumps(
            {"community_sizes": [2, 2], "P": [[0.5, 0.3000000001], [0.3, 0.5]]}
        )
        with pytest.raises(MalformedInputError):
            load_params(io.StringIO(text))

    def test_missing_keys_rejected(self):
        with pytest.raises(MalformedInputError):
            load_params(io.StringIO('{"P": [[0.5]]}'))
        with pytest.raises(MalformedInputError):
            load_params(io.StringIO("not json"))

    def test_labels_round_trip(self):
        labels = np.array([0, 0, 1, 2, 1])
        buf = io.StringIO()
        write_labels(buf, labels)
        assert np.array_equal(read_labels(io.StringIO(buf.getvalue())), labels)
