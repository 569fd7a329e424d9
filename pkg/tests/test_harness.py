import json
from pathlib import Path

import pytest

from clawbench.cli import main as cli_main
from clawbench.errors import ScenarioError
from clawbench.harness import (
    load_scenario,
    rng_for,
    run,
    scenario_schema,
    suite,
    validate_scenario,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "clawbench" / "scenarios"


def minimal_glimm(tmp_path, cfl=0.45, name="g"):
    obj = {
        "schema_version": 1,
        "name": name,
        "kind": "glimm",
        "seed": 1,
        "flux": {"type": "burgers"},
        "initial_data": {"breakpoints": [0.0], "values": [1.0, 0.0]},
        "params": {"h": 0.05, "cfl": cfl, "t_max": 0.5,
                   "sampling": "van-der-corput"},
    }
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(obj))
    return path


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ScenarioError, match="unknown keys"):
            validate_scenario({"schema_version": 1, "name": "x", "kind": "dlm",
                               "params": {}, "bogus": 1})

    def test_bad_kind(self):
        with pytest.raises(ScenarioError, match="kind"):
            validate_scenario({"schema_version": 1, "name": "x",
                               "kind": "nonsense", "params": {}})

    def test_cfl_range(self, tmp_path):
        path = minimal_glimm(tmp_path, cfl=0.9)
        with pytest.raises(ScenarioError, match="cfl"):
            load_scenario(path)

    def test_json_error_is_line_anchored(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"schema_version": 1,\n  "name": ]')
        with pytest.raises(ScenarioError, match=r":2:"):
            load_scenario(path)

    def test_schema_lists_kinds(self):
        schema = scenario_schema()
        assert "glimm" in schema["kinds"]
        assert schema["schema_version"] == 1


class TestRun:
    def test_glimm_scenario_passes(self, tmp_path):
        path = minimal_glimm(tmp_path)
        report = run(path, tmp_path / "out")
        assert report.passed
        assert (tmp_path / "out" / "report.json").exists()

    def test_deterministic_artifacts(self, tmp_path):
        path = SCENARIO_DIR / "burgers-glimm-shock.json"
        r1 = run(path, tmp_path / "a")
        r2 = run(path, tmp_path / "b")
        assert r1.passed and r2.passed
        csv1 = (tmp_path / "a" / "snapshots.csv").read_bytes()
        csv2 = (tmp_path / "b" / "snapshots.csv").read_bytes()
        assert csv1 == csv2

    def test_exit_codes(self, tmp_path, capsys):
        ok = minimal_glimm(tmp_path)
        assert cli_main(["run", str(ok), "--out", str(tmp_path / "o1")]) == 0
        bad = minimal_glimm(tmp_path, cfl=0.9, name="bad")
        assert cli_main(["run", str(bad), "--out", str(tmp_path / "o2")]) == 2

    def test_schema_command(self, capsys):
        assert cli_main(["schema"]) == 0
        out = capsys.readouterr().out
        assert "glimm" in out


class TestSuite:
    def make_manifest(self, tmp_path, names):
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({"scenarios": names}))
        return manifest

    def test_empty_manifest(self, tmp_path):
        manifest = self.make_manifest(tmp_path, [])
        agg = suite(manifest, out_dir=tmp_path / "out")
        assert agg["passed"] and agg["results"] == []

    def test_missing_scenario_recorded(self, tmp_path):
        minimal_glimm(tmp_path, name="ok")
        manifest = self.make_manifest(tmp_path, ["ok.json", "ghost.json"])
        agg = suite(manifest, out_dir=tmp_path / "out")
        assert not agg["passed"]
        by_name = {e["name"]: e for e in agg["results"]}
        assert by_name["ok"]["passed"]
        assert not by_name["ghost"]["passed"]

    def test_parallelism_does_not_change_results(self, tmp_path):
        for name in ("a", "b", "c"):
            minimal_glimm(tmp_path, name=name)
        manifest = self.make_manifest(tmp_path, ["a.json", "b.json", "c.json"])
        serial = suite(manifest, jobs=1, out_dir=tmp_path / "s")
        parallel = suite(manifest, jobs=3, out_dir=tmp_path / "p")
        assert [e["name"] for e in serial["results"]] == \
            [e["name"] for e in parallel["results"]]
        assert [e["passed"] for e in serial["results"]] == \
            [e["passed"] for e in parallel["results"]]

    def test_bundled_scenarios_validate(self):
        manifest = json.loads((SCENARIO_DIR / "manifest.json").read_text())
        for name in manifest["scenarios"]:
            load_scenario(SCENARIO_DIR / name)


class TestRngPlumbing:
    def test_named_streams_differ_and_reproduce(self):
        a1 = rng_for(7, "alpha").uniform(size=4)
        a2 = rng_for(7, "alpha").uniform(size=4)
        b = rng_for(7, "beta").uniform(size=4)
        assert (a1 == a2).all()
        assert not (a1 == b).all()
