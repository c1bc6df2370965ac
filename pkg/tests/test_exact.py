import math

import numpy as np
import pytest

import glauberlab as gl
from glauberlab.exact import _cheeger_from_epsilon
from glauberlab.zoo import partitioned_cases, skeleton_block_cases


def path3():
    return gl.Graph(3, [(0, 1), (1, 2)])


def triangle():
    return gl.Graph(3, [(0, 1), (0, 2), (1, 2)])


def edge():
    return gl.Graph(2, [(0, 1)])


def built(model, g, lazy=True, **kw):
    return gl.transition_matrix(gl.enumerate_states(model, g, **kw),
                                lazy=lazy)


class TestEnumeration:
    def test_path_coloring_count(self):
        ch = gl.enumerate_states(gl.coloring_model(3), path3())
        # 3 * 2 * 2 proper colorings
        assert len(ch.states) == 12

    def test_states_sorted_and_feasible(self):
        m = gl.hardcore_model(0.5)
        ch = gl.enumerate_states(m, path3())
        assert ch.states == sorted(ch.states)
        for s in ch.states:
            assert gl.is_feasible(m, path3(), s)

    def test_edge_hardcore_states(self):
        ch = gl.enumerate_states(gl.hardcore_model(0.0), edge())
        assert ch.states == [(0, 0), (0, 1), (1, 0)]

    def test_stationary_law_normalized(self):
        ch = gl.enumerate_states(gl.hardcore_model(1.0), path3())
        assert ch.pi.sum() == pytest.approx(1.0)
        # pi(sigma) proportional to e^{beta * occupied}
        w = [math.exp(sum(s)) for s in ch.states]
        assert ch.pi == pytest.approx(np.array(w) / sum(w))

    def test_budget_enforced(self):
        with pytest.raises(gl.BudgetExceededError):
            gl.enumerate_states(gl.coloring_model(4), triangle(), budget=5)

    def test_sub_block_with_boundary(self):
        m = gl.coloring_model(3)
        ch = gl.enumerate_states(m, path3(), vertices=(0, 1),
                                 boundary={2: 0})
        # vertex 1 avoids both its neighbor in the block and the pin
        for s in ch.states:
            assert s[1] != 0 and s[0] != s[1]

    def test_boundary_must_cover(self):
        with pytest.raises(ValueError):
            gl.enumerate_states(gl.coloring_model(3), path3(),
                                vertices=(0, 1), boundary={})


class TestTransitionMatrix:
    def test_rows_sum_to_one(self):
        for m in [gl.coloring_model(3), gl.hardcore_model(0.5)]:
            ch = built(m, path3())
            assert ch.P.sum(axis=1) == pytest.approx(np.ones(len(ch.states)))

    def test_edge_hardcore_lazy_pin(self):
        # hand-derived: from (0,0) each vertex flips up w.p. 1/2 given
        # the other empty; laziness halves everything off-diagonal
        ch = built(gl.hardcore_model(0.0), edge(), lazy=True)
        want = [[0.75, 0.125, 0.125],
                [0.125, 0.875, 0.0],
                [0.125, 0.0, 0.875]]
        assert ch.P == pytest.approx(np.array(want), abs=1e-15)

    def test_detailed_balance_exact(self):
        ch = built(gl.hardcore_model(0.0), edge())
        assert gl.detailed_balance_gap(ch) == 0.0

    def test_detailed_balance_soft(self):
        m = gl.soft_model([0.1, -0.2], [[0.3, 0.0], [0.0, 0.3]])
        ch = built(m, triangle())
        assert gl.detailed_balance_gap(ch) < 1e-12


class TestSpectral:
    def test_relaxation_pins(self):
        lazy = built(gl.hardcore_model(0.0), edge(), lazy=True)
        nonlazy = built(gl.hardcore_model(0.0), edge(), lazy=False)
        assert gl.relaxation_time(lazy) == pytest.approx(8.0, abs=1e-9)
        assert gl.relaxation_time(nonlazy) == pytest.approx(4.0, abs=1e-9)

    def test_triangle_q4(self):
        ch = built(gl.coloring_model(4), triangle())
        assert len(ch.states) == 24
        assert gl.relaxation_time(ch) == pytest.approx(12.0, abs=1e-8)

    def test_single_state_is_one(self):
        sub = gl.enumerate_states(gl.coloring_model(3), triangle(),
                                  vertices=(0,), boundary={1: 1, 2: 2})
        sub = gl.transition_matrix(sub)
        assert len(sub.states) == 1
        assert gl.relaxation_time(sub) == 1.0

    def test_reducible_raises(self):
        # triangle q=3 is frozen: 6 isolated proper colorings
        ch = built(gl.coloring_model(3), triangle())
        with pytest.raises(gl.DegenerateChainError):
            gl.relaxation_time(ch)

    def test_spectrum_in_unit_interval_for_lazy(self):
        ch = built(gl.coloring_model(4), triangle(), lazy=True)
        eigs = gl.spectrum(ch)
        assert eigs.min() >= -1e-12
        assert eigs.max() == pytest.approx(1.0)


class TestMixingTime:
    def test_edge_hardcore_pin(self):
        ch = built(gl.hardcore_model(0.0), edge())
        assert gl.mixing_time(ch) == 8

    def test_triangle_q4_pin(self):
        ch = built(gl.coloring_model(4), triangle())
        assert gl.mixing_time(ch) == 20

    def test_single_state_zero(self):
        sub = gl.enumerate_states(gl.coloring_model(3), triangle(),
                                  vertices=(0,), boundary={1: 1, 2: 2})
        sub = gl.transition_matrix(sub)
        assert gl.mixing_time(sub) == 0

    def test_horizon_raises(self):
        ch = built(gl.hardcore_model(0.0), edge())
        with pytest.raises(gl.HorizonExceededError):
            gl.mixing_time(ch, horizon=4)

    def test_frozen_chain_never_mixes(self):
        ch = built(gl.coloring_model(3), triangle())
        with pytest.raises(gl.HorizonExceededError):
            gl.mixing_time(ch, horizon=64)


class TestSandwich:
    def test_edge_hardcore_passes(self):
        ch = built(gl.hardcore_model(0.0), edge())
        recs = gl.sandwich_check(ch, instance="edge-hc0")
        assert [r.bound_name for r in recs] == ["sandwich-lower",
                                                "sandwich-upper"]
        assert all(r.passed for r in recs)

    def test_relaxation_below_mixing(self):
        ch = built(gl.coloring_model(4), triangle())
        tau = gl.relaxation_time(ch)
        tmix = gl.mixing_time(ch)
        assert tau <= tmix + 1e-9
        assert tmix <= tau * (1 + 0.5 * math.log(1 / ch.pi.min())) + 1e-9


class TestCheeger:
    def test_single_vertex_pin(self):
        # lazy single-site chain on one vertex, q=2: every transition
        # probability pi(a) P(a,b) is at least 1/8, so the bound is
        # 2 / (1/8)^2 = 128
        ch = built(gl.coloring_model(2), gl.Graph(1, []))
        cb = gl.cheeger_bound(ch)
        assert cb.epsilon == pytest.approx(0.125)
        assert cb.bound == pytest.approx(128.0)
        assert cb.complete and cb.reading == "all-pairs"

    def test_formula(self):
        assert _cheeger_from_epsilon(0.1) == pytest.approx(200.0)

    def test_incomplete_raises_by_default(self):
        # edge hardcore: the two single-occupied states do not talk
        ch = built(gl.hardcore_model(0.0), edge())
        with pytest.raises(gl.CheegerHypothesisError):
            gl.cheeger_bound(ch)

    def test_nonzero_pairs_reading(self):
        ch = built(gl.hardcore_model(0.0), edge())
        cb = gl.cheeger_bound(ch, require_complete=False)
        assert not cb.complete and cb.reading == "nonzero-pairs"
        assert cb.bound >= gl.mixing_time(ch)

    def test_bound_dominates_mixing_when_complete(self):
        ch = built(gl.coloring_model(2), gl.Graph(1, []))
        assert gl.cheeger_bound(ch).bound >= gl.mixing_time(ch)


class TestCanonicalPaths:
    def test_pinned_bound(self):
        cb = gl.canonical_path_bound(gl.hardcore_model(0.5), path3())
        assert cb.bound == pytest.approx(92.549839678931, rel=1e-10)
        assert cb.length == 3

    def test_dominates_relaxation(self):
        for g in [path3(), triangle(), gl.Graph(4, [(0, 1), (1, 2),
                                                    (2, 3), (0, 3)])]:
            for beta in [0.0, 0.5, 1.0]:
                cb = gl.canonical_path_bound(gl.hardcore_model(beta), g)
                ch = built(gl.hardcore_model(beta), g)
                assert cb.bound >= gl.relaxation_time(ch) - 1e-9

    def test_rejects_non_hardcore(self):
        with pytest.raises(ValueError):
            gl.canonical_path_bound(gl.coloring_model(3), path3())


class TestThresholdsAndPsi:
    def test_coloring_threshold(self):
        # max(4e, 8/lambda + 4/lambda^2) at lambda = 1/4 is 32 + 64
        assert gl.coloring_q_threshold(0.25) == 96
        assert gl.coloring_q_threshold(2.0) == math.ceil(4 * math.e)

    def test_hardcore_threshold(self):
        assert gl.hardcore_activity_threshold(0.25) == math.log(0.25)

    def test_soft_threshold(self):
        assert gl.soft_norm_threshold(0.25) == math.asinh(0.25 / 32)

    def test_psi_weight(self):
        # subset {0,1} of the path: boundary vertex 2 at distance 2 from 0
        assert gl.psi_weight(path3(), (0, 1), 0, 0.5) == pytest.approx(0.25)
        assert gl.psi_weight(path3(), (0,), 0, 0.5) == pytest.approx(0.5)
        # whole graph: no boundary
        assert gl.psi_weight(path3(), (0, 1, 2), 0, 0.5) == 0.0


class TestDecay:
    def test_coloring_small_tree(self):
        g = gl.random_tree(5, seed=1)
        q = gl.coloring_q_threshold(0.25)
        chk = gl.tree_decay_check(gl.coloring_model(q), g, tuple(range(5)),
                                  0, 0.25, boundary_samples=50, seed=2)
        assert chk.kind == "ratio"
        assert chk.observed <= chk.bound
        assert chk.margin >= 0.0

    def test_hardcore_exhaustive(self):
        g = gl.random_tree(5, seed=2)
        chk = gl.tree_decay_check(gl.hardcore_model(-1.5), g,
                                  tuple(range(5)), 0, 0.25,
                                  boundary_samples=10 ** 6, seed=0)
        assert chk.exhaustive
        assert chk.observed <= chk.bound


class TestSkeletonJoint:
    def test_k2_uniform(self):
        name, model, graph, block, boundary = next(
            c for c in skeleton_block_cases() if c[0] == "k2-w-q3")
        joint = gl.skeleton_joint(model, graph, block, boundary)
        law = joint.law
        assert len(law) == 6
        assert all(p == pytest.approx(1 / 6) for p in law.values())

    def test_all_cases_match_enumeration(self):
        for name, model, graph, block, boundary in skeleton_block_cases():
            composed = gl.compose_block_law(model, graph, block, boundary)
            full = gl.enumerate_states(model, graph,
                                       vertices=block.vertices,
                                       boundary=boundary)
            exact = {s: p for s, p in zip(full.states, full.pi)}
            assert gl.law_tv(composed, exact) <= 1e-12, name

    def test_sample_matches_law(self):
        name, model, graph, block, boundary = skeleton_block_cases()[0]
        joint = gl.skeleton_joint(model, graph, block, boundary)
        counts = {}
        rng = gl.make_rng(3, "sj")
        for _ in range(20000):
            s = joint.sample(rng)
            counts[s] = counts.get(s, 0) + 1
        tv = 0.5 * sum(abs(counts.get(k, 0) / 20000 - p)
                       for k, p in joint.law.items())
        assert tv < 0.02


class TestBlockComposition:
    def test_one_block_partition_is_tight(self):
        # a single tree block resamples everything: the bound collapses
        # to the exact relaxation time
        name, model, graph, part = next(
            c for c in partitioned_cases() if c[0] == "claw-q4-single")
        rec, details = gl.block_composition_check(model, graph, part,
                                                  instance=name)
        assert rec.passed
        assert rec.bound_value == pytest.approx(rec.exact_value, rel=1e-9)

    def test_all_cases_hold(self):
        for name, model, graph, part in partitioned_cases():
            rec, details = gl.block_composition_check(model, graph, part,
                                                      instance=name)
            assert rec.passed, name
            assert rec.bound_value >= rec.exact_value - 1e-9


class TestPathDensity:
    def test_pins(self):
        star = gl.Graph(4, [(0, 1), (0, 2), (0, 3)])
        assert gl.path_density(path3(), (0, 1, 2), 0) == 4
        assert gl.path_density(star, (0, 1, 2, 3), 0) == 4
        assert gl.path_density(gl.Graph(1, []), (0,), 0) == 0

    def test_ambient_degrees_counted(self):
        # path inside a triangle-with-tail: ambient degrees exceed the
        # induced ones
        g = gl.Graph(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
        assert gl.path_density(g, (2, 3), 2) == 4

    def test_rejects_cyclic_subset(self):
        with pytest.raises(ValueError):
            gl.path_density(triangle(), (0, 1, 2), 0)


class TestChainDump:
    def test_contains_states_and_rows(self):
        ch = built(gl.hardcore_model(0.0), edge())
        text = gl.format_chain_dump(ch)
        assert "(0, 0)" in text or "0 0" in text
        assert str(len(ch.states)) in text
