"""CLI behavior: exit codes, outputs, plans, and reproducible files."""

from __future__ import annotations

import json

import pytest

from flowtrace.cli import main
from flowtrace.experiment import (
    ExperimentPlan,
    aggregate_cells,
    load_plan,
    run_cell,
)
from flowtrace.spec_io import CPU_WRITE_SPEC, PROTOTYPE_SPEC, load_prototype


CYCLIC_SPEC = """\
system cyc
component A B
link ab A -> B
flow loop
  place s0 initial
  place s1 end
  place s2
  transition t0 pre {s0} post {s2} event A:B:m on ab
  transition t1 pre {s2} post {s0} event A:B:m on ab
initiator A flows {loop}
"""


@pytest.fixture
def proto_file(tmp_path):
    path = tmp_path / "proto.spec"
    path.write_text(PROTOTYPE_SPEC, encoding="utf-8")
    return path


class TestValidate:
    def test_valid_spec_exits_zero(self, proto_file, capsys):
        assert main(["validate", str(proto_file)]) == 0
        out = capsys.readouterr().out
        assert "16 flows" in out and "32 links" in out

    def test_cyclic_spec_exits_one(self, tmp_path, capsys):
        path = tmp_path / "cyc.spec"
        path.write_text(CYCLIC_SPEC, encoding="utf-8")
        assert main(["validate", str(path)]) == 1
        assert "cyclic structure" in capsys.readouterr().err

    def test_missing_file_exits_two(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "absent.spec")]) == 2
        assert "error" in capsys.readouterr().err


class TestPaths:
    def test_cpu_write_paths(self, tmp_path, capsys):
        path = tmp_path / "write.spec"
        path.write_text(CPU_WRITE_SPEC, encoding="utf-8")
        assert main(["paths", str(path), "cpu_write"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines == [
            "t1,t10",
            "t1,t2,t3,t9",
            "t1,t2,t3,t4,t5,t6,t7,t8",
        ]

    def test_unknown_flow(self, proto_file, capsys):
        assert main(["paths", str(proto_file), "nope"]) == 1


class TestSelect:
    def test_fic_selection_json(self, capsys):
        assert main(["select", "prototype", "--metric", "fic"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["links"]) == 5
        caps = body["observability"]["queue_capacity"]
        assert sum(caps.values()) == 8 * 32

    def test_fc_selection_writes_file(self, tmp_path):
        out = tmp_path / "sel.json"
        assert main(
            ["select", "prototype", "--metric", "fc", "--k", "16", "--out", str(out)]
        ) == 0
        body = json.loads(out.read_text())
        assert len(body["events"]) == 16
        assert all(item["reason"] == "FC_RANK" for item in body["events"])

    def test_scope_restricts_problem(self, capsys):
        assert main(
            ["select", "prototype", "--metric", "cec", "--scope", "CPU0"]
        ) == 0
        body = json.loads(capsys.readouterr().out)
        reasons = {item["reason"] for item in body["events"]}
        assert reasons <= {"START", "END", "PATH_DISAMBIG"}


class TestSimulate:
    def test_simulate_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "sim"
        code = main(
            [
                "simulate",
                "prototype",
                "--capacity",
                "8",
                "--seed",
                "3",
                "--instances",
                "10",
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        assert (out / "ground_truth.csv").exists()
        assert (out / "observed.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert "coverage" in summary and "drops" in summary

    def test_simulate_with_selection_file(self, tmp_path):
        sel = tmp_path / "sel.json"
        main(["select", "prototype", "--metric", "fic", "--out", str(sel)])
        out = tmp_path / "sim"
        code = main(
            [
                "simulate",
                "prototype",
                "--selection",
                str(sel),
                "--capacity",
                "8",
                "--seed",
                "3",
                "--instances",
                "10",
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert len(summary["drops"]) == 5  # five enabled links

    def test_no_drain_leaves_residual(self, tmp_path):
        out = tmp_path / "sim"
        main(
            [
                "simulate",
                "prototype",
                "--capacity",
                "4",
                "--seed",
                "3",
                "--no-drain",
                "--out-dir",
                str(out),
            ]
        )
        summary = json.loads((out / "summary.json").read_text())
        assert summary["total_residual"] > 0


def plan_body(tmp_path, **overrides):
    body = {
        "spec": "prototype",
        "selection": "none",
        "capacities": [8],
        "seeds": [1, 2],
        "workload": {"instances_per_initiator": 10},
        "out_dir": str(tmp_path / "results"),
    }
    body.update(overrides)
    return body


class TestRunAndCompare:
    def test_run_grid_shape(self, tmp_path, capsys):
        plan = tmp_path / "plan.json"
        plan.write_text(
            json.dumps(plan_body(tmp_path, capacities=[8, 16, 32])), encoding="utf-8"
        )
        assert main(["run", str(plan)]) == 0
        out = capsys.readouterr().out
        results = tmp_path / "results"
        cells = sorted(p.name for p in results.glob("none_*.json"))
        assert len(cells) == 6  # 3 capacities x 2 seeds
        assert (results / "summary.csv").exists()
        assert out.count("none") == 3  # one aggregate row per capacity

    def test_scoped_run_uses_scope_totals(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(
            json.dumps(plan_body(tmp_path, scope=["CPU0"], seeds=[1])),
            encoding="utf-8",
        )
        assert main(["run", str(plan)]) == 0
        cell = json.loads(
            (tmp_path / "results" / "none_8_1.json").read_text()
        )
        assert cell["coverage"]["total"] == 10
        assert set(cell["coverage"]["per_flow"]) == {
            "coh_wr_0",
            "coh_rd_0",
            "nc_wr_0",
            "nc_rd_0",
        }

    def test_empty_scope_is_usage_error(self, tmp_path, capsys):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps(plan_body(tmp_path, scope=[])), encoding="utf-8")
        assert main(["run", str(plan)]) == 2

    def test_compare_table_has_four_methods(self, tmp_path, capsys):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps(plan_body(tmp_path, seeds=[1])), encoding="utf-8")
        assert main(["compare", str(plan)]) == 0
        out = capsys.readouterr().out
        for label in ("none", "fic", "cec", "fc16"):
            assert label in out
        rows = aggregate_cells((tmp_path / "results").glob("*_8_1.json"))
        by_method = {r["method"]: r for r in rows}
        assert by_method["none"]["links"] == 32
        assert by_method["fic"]["links"] == 5
        assert by_method["fc16"]["links"] == 16

    def test_rerun_is_byte_identical(self, tmp_path):
        plan_file = tmp_path / "plan.json"
        plan_file.write_text(json.dumps(plan_body(tmp_path, seeds=[4])), encoding="utf-8")
        assert main(["run", str(plan_file)]) == 0
        cell = tmp_path / "results" / "none_8_4.json"
        first = cell.read_bytes()
        assert main(["run", str(plan_file)]) == 0
        assert cell.read_bytes() == first


class TestPlanParsing:
    def test_defaults(self):
        plan = load_plan({})
        assert plan.spec_source == "prototype"
        assert plan.selection_method == "none"
        assert plan.capacities == (8,)

    def test_seed_env_override(self, monkeypatch):
        monkeypatch.setenv("FLOWTRACE_SEEDS", "7, 8")
        plan = load_plan({})
        assert plan.seeds == (7, 8)

    def test_explicit_seeds_win_over_env(self, monkeypatch):
        monkeypatch.setenv("FLOWTRACE_SEEDS", "7, 8")
        plan = load_plan({"seeds": [1]})
        assert plan.seeds == (1,)

    def test_bad_method_rejected(self):
        with pytest.raises(ValueError):
            load_plan({"selection": "best"})

    def test_cell_error_names_offending_cell(self, tmp_path):
        spec = load_prototype()
        plan = ExperimentPlan(
            seeds=(1,), capacities=(8,), instances_per_initiator=5
        )
        with pytest.raises(ValueError):
            run_cell(spec, plan, "fc:99999", 8, 1)
