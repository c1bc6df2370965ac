import hashlib
import json

import pytest

import glauberlab as gl
from glauberlab.cli import main


def payload_digest(path):
    doc = json.loads(path.read_text())
    blob = json.dumps(doc["payload"], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@pytest.fixture()
def er_graph(tmp_path):
    p = tmp_path / "g.edges"
    assert main(["gen", "--n", "1000", "--d", "2.0", "--seed", "3",
                 "--out", str(p)]) == 0
    return p


@pytest.fixture()
def triangle_files(tmp_path):
    gp = tmp_path / "tri.edges"
    gl.write_edge_list(gl.Graph(3, [(0, 1), (0, 2), (1, 2)]), gp)
    mp = tmp_path / "q4.json"
    gl.write_model(gl.coloring_model(4), mp)
    return gp, mp


class TestGen:
    def test_writes_pinned_graph(self, er_graph):
        assert er_graph.read_text().splitlines()[0] == "1000 1025"

    def test_round_trip(self, er_graph):
        g = gl.read_edge_list(er_graph)
        assert g.edges == gl.generate_er(1000, 2.0, 3).edges

    def test_requires_out(self):
        assert main(["gen", "--n", "10", "--d", "1.0"]) == 3


class TestCheck:
    def test_pinned_outcome(self, er_graph, tmp_path):
        # regression pin: this instance violates the excess bound at t=1
        # but satisfies the path-weight clause
        out = tmp_path / "check.json"
        code = main(["check", str(er_graph), "--a", "0.2", "--alpha",
                     "0.25", "--t", "1", "--delta", "1.6", "--out",
                     str(out)])
        assert code == 1
        payload = json.loads(out.read_text())["payload"]
        checks = {r["check"]: r["pass"] for r in payload["records"]}
        assert checks == {"tree-excess": False, "path-weight": True}
        assert payload_digest(out) == "0a787b0e87e313c3"

    def test_tree_passes_at_t0(self, tmp_path):
        gp = tmp_path / "tree.edges"
        gl.write_edge_list(gl.random_tree(50, seed=2), gp)
        code = main(["check", str(gp), "--a", "1.0", "--alpha", "0.5",
                     "--t", "0", "--delta", "10.0"])
        assert code == 0

    def test_k4_fails(self, tmp_path):
        gp = tmp_path / "k4.edges"
        gl.write_edge_list(gl.Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2),
                                        (1, 3), (2, 3)]), gp)
        code = main(["check", str(gp), "--a", "1.0", "--alpha", "0.5",
                     "--t", "1", "--delta", "10.0"])
        assert code == 1

    def test_missing_file_is_invalid_input(self, tmp_path):
        code = main(["check", str(tmp_path / "nope.edges"), "--a", "1",
                     "--alpha", "0.5", "--t", "1", "--delta", "1"])
        assert code == 3


class TestDecompose:
    def test_pipeline_digest(self, er_graph, tmp_path):
        out = tmp_path / "dec.json"
        part = tmp_path / "part.json"
        code = main(["decompose", str(er_graph), "--a", "0.2", "--alpha",
                     "0.25", "--t", "1", "--delta", "1.6", "--out",
                     str(out), "--partition-out", str(part)])
        assert code == 0
        assert payload_digest(out) == "b8ab4efb63b8caa0"
        back = gl.read_partition(part)
        assert sorted(back.owner_map()) == list(range(1000))

    def test_validation_failures_reported(self, tmp_path):
        gp = tmp_path / "tree.edges"
        gl.write_edge_list(gl.random_tree(30, seed=1), gp)
        out = tmp_path / "dec.json"
        code = main(["decompose", str(gp), "--a", "2.0", "--alpha", "0.3",
                     "--t", "1", "--delta", "2.0", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert all(r["pass"] for r in payload["records"])


class TestSample:
    def test_pinned_digest_and_artifacts(self, er_graph, tmp_path):
        mp = tmp_path / "hc.json"
        gl.write_model(gl.hardcore_model(0.5), mp)
        out = tmp_path / "run"
        code = main(["sample", "--model", str(mp), "--graph",
                     str(er_graph), "--steps", "5000", "--seed", "3",
                     "--out", str(out)])
        assert code == 0
        assert payload_digest(out) == "f21c170495c90adc"
        trace = (tmp_path / "run.trace.csv").read_text().splitlines()
        assert trace[0] == "step,hamming,active"
        ck = gl.read_checkpoint(tmp_path / "run.ckpt")
        assert ck.step == 5000

    def test_zero_steps_identity(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        out = tmp_path / "run0"
        code = main(["sample", "--model", str(mp), "--graph", str(gp),
                     "--steps", "0", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["steps"] == 0

    def test_infeasible_graph_rejected(self, tmp_path):
        # coloring on a graph whose peeling never terminates
        gp = tmp_path / "g.edges"
        gl.write_edge_list(gl.generate_er(200, 2.0, seed=5), gp)
        mp = tmp_path / "q5.json"
        gl.write_model(gl.coloring_model(5), mp)
        code = main(["sample", "--model", str(mp), "--graph", str(gp),
                     "--steps", "10", "--out", str(tmp_path / "r")])
        assert code == 3


class TestExact:
    def test_triangle_q4_payload(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        out = tmp_path / "ex.json"
        code = main(["exact", "--model", str(mp), "--graph", str(gp),
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["states"] == 24
        assert payload["mixing"] == 20
        assert payload["relaxation"] == pytest.approx(12.0, abs=1e-8)

    def test_budget_exhaustion_exit_code(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        code = main(["exact", "--model", str(mp), "--graph", str(gp),
                     "--budget", "5", "--out", str(tmp_path / "x.json")])
        assert code == 2

    def test_degenerate_chain_reported(self, tmp_path):
        gp = tmp_path / "tri.edges"
        gl.write_edge_list(gl.Graph(3, [(0, 1), (0, 2), (1, 2)]), gp)
        mp = tmp_path / "q3.json"
        gl.write_model(gl.coloring_model(3), mp)
        out = tmp_path / "ex.json"
        code = main(["exact", "--model", str(mp), "--graph", str(gp),
                     "--out", str(out)])
        assert code == 1
        payload = json.loads(out.read_text())["payload"]
        assert payload["degenerate"]


class TestVerify:
    def test_skeleton_joint_counts(self, tmp_path):
        out = tmp_path / "v.json"
        code = main(["verify", "--suite", "skeleton-joint", "--out",
                     str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["counts"] == {"passed": 10, "failed": 0,
                                     "skipped": 0}

    def test_unknown_suite_is_invalid(self):
        assert main(["verify", "--suite", "bogus"]) == 3

    def test_csv_emission(self, tmp_path):
        out = tmp_path / "v.csv"
        code = main(["verify", "--suite", "skeleton-joint", "--format",
                     "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("check,")
        assert len(lines) == 11


class TestCouple:
    def test_triangle_coalesces(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        out = tmp_path / "c.json"
        code = main(["couple", "--model", str(mp), "--graph", str(gp),
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["coalesced"]
        assert payload["steps"] > 0

    def test_frozen_chain_exits_horizon(self, tmp_path):
        gp = tmp_path / "tri.edges"
        gl.write_edge_list(gl.Graph(3, [(0, 1), (0, 2), (1, 2)]), gp)
        mp = tmp_path / "q3.json"
        gl.write_model(gl.coloring_model(3), mp)
        code = main(["couple", "--model", str(mp), "--graph", str(gp),
                     "--horizon", "1000", "--out", str(tmp_path / "c")])
        assert code == 2


class TestScaling:
    def test_single_size_slope_undefined(self, tmp_path):
        out = tmp_path / "s.json"
        code = main(["scaling", "--d", "2.0", "--q", "20", "--sizes",
                     "100", "--seeds", "2", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["slope"] is None
        assert "undefined" in payload["slope_note"]

    def test_near_linear_regime(self, tmp_path):
        out = tmp_path / "s.json"
        code = main(["scaling", "--d", "2.0", "--q", "20", "--sizes",
                     "100", "200", "400", "--seeds", "2", "--out",
                     str(out)])
        assert code == 0
        payload = json.loads(out.read_text())["payload"]
        assert payload["non_coalesced_fraction"] == 0.0
        assert 0.5 < payload["slope"] < 2.0

    def test_rows_in_deterministic_order(self, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            main(["scaling", "--d", "2.0", "--q", "20", "--sizes", "100",
                  "200", "--seeds", "2", "--out", str(out)])
            outs.append(payload_digest(out))
        assert outs[0] == outs[1]


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert main(["verify", "--suite", "skeleton-joint", "--config",
                     str(cfg)]) == 3

    def test_config_supplies_seed(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9}))
        gp = tmp_path / "g.edges"
        code = main(["gen", "--n", "50", "--d", "1.5", "--config",
                     str(cfg), "--out", str(gp)])
        assert code == 0
        assert gl.read_edge_list(gp).edges == gl.generate_er(
            50, 1.5, 9).edges

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9}))
        gp = tmp_path / "g.edges"
        main(["gen", "--n", "50", "--d", "1.5", "--seed", "4",
              "--config", str(cfg), "--out", str(gp)])
        assert gl.read_edge_list(gp).edges == gl.generate_er(
            50, 1.5, 4).edges


class TestOutputEnvelope:
    def test_meta_separated_from_payload(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        out = tmp_path / "ex.json"
        main(["exact", "--model", str(mp), "--graph", str(gp), "--out",
              str(out)])
        doc = json.loads(out.read_text())
        assert set(doc) == {"meta", "payload"}
        assert "generated_at" in doc["meta"]
        assert "generated_at" not in json.dumps(doc["payload"])

    def test_byte_deterministic_payload(self, triangle_files, tmp_path):
        gp, mp = triangle_files
        digests = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            main(["exact", "--model", str(mp), "--graph", str(gp),
                  "--out", str(out)])
            digests.append(payload_digest(out))
        assert digests[0] == digests[1]
