from collections import Counter

import pytest

import glauberlab as gl
from glauberlab.zoo import (SUITES, connected_graphs, model_grid,
                            partitioned_cases, regular_graphs, run_suite,
                            skeleton_block_cases)


class TestConnectedCensus:
    def test_counts_match_oeis(self):
        # connected graphs up to isomorphism: 1, 1, 2, 6, 21
        cg = connected_graphs()
        by_n = Counter(g.n for _, g in cg)
        assert dict(by_n) == {1: 1, 2: 1, 3: 2, 4: 6, 5: 21}
        assert len(cg) == 31

    def test_all_connected(self):
        for name, g in connected_graphs():
            seen = gl.bfs_distances(g, [0])
            assert len(seen) == g.n, name

    def test_pairwise_distinct_edge_sets(self):
        sigs = [(g.n, g.edges) for _, g in connected_graphs()]
        assert len(set(sigs)) == len(sigs)

    def test_names_stable(self):
        names = [n for n, _ in connected_graphs()[:4]]
        assert names == ["G1.1", "G2.1", "G3.1", "G3.2"]


class TestRegularCensus:
    def test_total_and_table(self):
        rg = regular_graphs()
        assert len(rg) == 48
        tab = Counter((g.n, d) for _, d, g in rg)
        # spot rows against the known counts of regular graphs
        assert tab[(8, 3)] == 6   # cubic graphs on 8 vertices
        assert tab[(6, 3)] == 2   # K_{3,3} and the prism
        assert tab[(8, 2)] == 3   # C8, C3+C5, C4+C4
        assert tab[(5, 2)] == 1   # C5 only

    def test_degrees_are_regular(self):
        for name, d, g in regular_graphs():
            assert all(g.degree(v) == d for v in range(g.n)), name

    def test_complement_symmetry(self):
        # the census of (n, d) matches (n, n-1-d) by complementation
        tab = Counter((g.n, d) for _, d, g in regular_graphs())
        for (n, d), cnt in tab.items():
            assert tab[(n, n - 1 - d)] == cnt


class TestModelGrid:
    def test_names(self):
        assert [n for n, _ in model_grid()] == [
            "coloring-q3", "coloring-q4", "hardcore-b0", "hardcore-b0.5",
            "hardcore-b1", "soft-r"]

    def test_soft_norm_within_half(self):
        soft = dict(model_grid())["soft-r"]
        assert gl.model_norm(soft).value <= 0.5

    def test_deterministic(self):
        a = dict(model_grid())["soft-r"]
        b = dict(model_grid())["soft-r"]
        assert a == b


class TestRandomTree:
    def test_shape(self):
        for k in (2, 5, 9):
            g = gl.random_tree(k, seed=k)
            assert g.n == k and len(g.edges) == k - 1
            assert len(gl.bfs_distances(g, [0])) == k

    def test_pinned_edges(self):
        assert gl.random_tree(8, seed=4).edges == (
            (0, 2), (0, 5), (0, 7), (1, 4), (3, 6), (3, 7), (4, 7))


class TestFixtures:
    def test_skeleton_cases_shape(self):
        cases = skeleton_block_cases()
        assert len(cases) == 10
        for name, model, graph, block, boundary in cases:
            assert block.kind == "skeleton"
            assert set(block.skeleton) <= set(block.vertices)
            for v in block.vertices:
                for w in graph.adj[v]:
                    assert w in set(block.vertices) or w in boundary, name

    def test_partitioned_cases_cover(self):
        cases = partitioned_cases()
        assert len(cases) == 10
        for name, model, graph, part in cases:
            covered = sorted(v for b in part.blocks for v in b.vertices)
            assert covered == list(range(graph.n)), name


class TestSuites:
    def test_registry(self):
        assert sorted(SUITES) == ["block-composition", "canonical",
                                  "cheeger", "decay", "sandwich",
                                  "skeleton-joint"]

    def test_skeleton_joint_all_pass(self):
        report = run_suite("skeleton-joint")
        assert report.passed
        assert len(report.records) == 10

    def test_block_composition_all_pass(self):
        report = run_suite("block-composition")
        assert report.passed
        assert len(report.records) == 10

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            run_suite("nonexistent")
