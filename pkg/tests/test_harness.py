import csv
import json

import pytest
import yaml

from spinqtm import closedform
from spinqtm.harness import acceptance
from spinqtm.harness.acceptance import CRITERIA, SUITES, recipe_path, run_acceptance, select
from spinqtm.harness.cli import main
from spinqtm.harness.config import ConfigError, load_config, parse_config, spec_hash
from spinqtm.harness.sweep import COLUMNS, EXIT_FLAGGED, EXIT_OK, FLAGGED, OK, format_value, output_dir, run_sweep

SMALL = {
    "name": "small",
    "spec": {"N": 3, "E": 1.0, "J": 0.8, "K": 0.2, "F": 0.1},
    "config": {"beta1": 0.5, "beta2": 1.0, "tau1": 1.0, "tau2": 0.7},
    "axes": [{"field": "ratio", "start": -0.5, "stop": 1.5, "step": 0.5},
             {"field": "tau1", "values": [0.4, 1.3]}],
    "analyses": ["thermo", "regime", "ansatz", "mixing"],
}


def _write(tmp_path, raw, name="small.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(raw))
    return p


def test_parse_grid_order():
    cfg = parse_config(SMALL)
    pts = list(cfg.points())
    assert cfg.n_points == len(pts) == 10
    assert pts[0] == {"ratio": -0.5, "tau1": 0.4}
    assert pts[1] == {"ratio": -0.5, "tau1": 1.3}
    spec, c = cfg.resolve(pts[-1])
    assert spec.EN == 1.5 and c.tau1 == 1.3


def test_tuple_axis_and_nosym():
    raw = yaml.safe_load(recipe_path("fig4").read_text())
    cfg = parse_config(raw)
    assert cfg.model == "nosym"
    assert cfg.axes[0].fields == ("tau1", "tau2")
    spec, c = cfg.resolve(next(cfg.points()))
    assert (c.tau1, c.tau2) == (1.0, 1.0)
    assert spec.E2 == -2.0


@pytest.mark.parametrize("patch, match", [
    ({"model": "ising"}, "model"),
    ({"axes": [{"field": "gamma", "values": [1]}]}, "unknown field"),
    ({"axes": [{"field": "tau1", "values": []}]}, "non-empty"),
    ({"axes": [{"field": "tau1", "start": 0, "stop": 1}]}, "step or num"),
    ({"axes": [{"field": "tau1", "start": 0, "stop": 1, "step": -1}]}, "positive"),
    ({"axes": [{"field": "tau1", "values": [float("inf")]}]}, "non-finite"),
    ({"analyses": ["thermo", "magic"]}, "unknown analysis"),
    ({"analyses": ["lowtemp"]}, "two-stroke"),
    ({"config": {"beta1": -1, "beta2": 1, "tau1": 1}}, "config"),
    ({"seed": -3}, "seed"),
])
def test_config_errors(patch, match):
    raw = {**SMALL, **patch}
    with pytest.raises((ConfigError, ValueError), match=match):
        parse_config(raw)


def test_load_config_bad_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("spec: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_random_spec_seeded():
    raw = {**SMALL, "spec": {"random": {"N": 4, "low": 0.2}}, "seed": 11}
    a, b = parse_config(raw), parse_config(raw)
    assert spec_hash(a.spec) == spec_hash(b.spec)
    assert spec_hash(parse_config({**raw, "seed": 12}).spec) != spec_hash(a.spec)


def test_shipped_recipes_parse():
    for name in ("fig2", "fig3", "fig4", "fig5"):
        cfg = load_config(recipe_path(name))
        assert cfg.n_points > 0


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert float(format_value(1 / 3)) == 1 / 3
    assert format_value(None) == ""
    assert format_value(True) == "true"


def test_output_dir_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("SPINQTM_OUT", str(tmp_path / "env"))
    assert output_dir() == tmp_path / "env"
    assert output_dir(str(tmp_path / "cli")) == tmp_path / "cli"
    monkeypatch.delenv("SPINQTM_OUT")
    assert str(output_dir()) == "."


def test_sweep_deterministic_across_jobs(tmp_path):
    cfg = parse_config(SMALL)
    a = run_sweep(cfg, tmp_path / "a", jobs=1)
    b = run_sweep(cfg, tmp_path / "b", jobs=2)
    c = run_sweep(cfg, tmp_path / "c", jobs=1)
    assert a.table.read_bytes() == b.table.read_bytes() == c.table.read_bytes()
    assert a.sidecar.read_bytes() == b.sidecar.read_bytes()
    assert a.exit_code == EXIT_OK


def test_sweep_table_contents(tmp_path):
    res = run_sweep(parse_config(SMALL), tmp_path)
    with open(res.table) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COLUMNS
    assert len(rows) == 11
    body = [dict(zip(COLUMNS, r)) for r in rows[1:]]
    assert all(r["status"] == OK for r in body)
    for r in body:
        assert float(r["first_law"]) < 1e-10
        assert float(r["clausius"]) > -1e-10
        assert r["gap"] != ""
    assert body[0]["regime"] == "H" and body[0]["predicted_regime"] == "H"
    side = json.loads(res.sidecar.read_text())
    assert side["columns"] == list(COLUMNS)
    assert side["rows"] == 10
    assert side["spec_hash"] == spec_hash(parse_config(SMALL).spec)
    assert "version" in side


def test_flagged_points_exit_code(tmp_path):
    # ends decoupled from C: the fixed point is not unique, so the point is flagged
    raw = {**SMALL, "spec": {"N": 4, "E": 1.0, "J": [0.0, 1.0, 0.0]}, "axes": [{"field": "tau1", "values": [1.0]}]}
    res = run_sweep(parse_config(raw), tmp_path)
    assert res.rows[0]["status"] == FLAGGED
    assert res.exit_code == EXIT_FLAGGED


def test_cli_sweep_and_env(tmp_path, monkeypatch):
    cfg = _write(tmp_path, SMALL)
    monkeypatch.setenv("SPINQTM_OUT", str(tmp_path / "env"))
    assert main(["sweep", str(cfg)]) == 0
    assert (tmp_path / "env" / "small.csv").exists()
    assert main(["sweep", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "2", "--tol", "1e-11"]) == 0
    assert (tmp_path / "o" / "small.csv").exists()


def test_cli_errors(tmp_path):
    assert main(["sweep", str(tmp_path / "missing.yaml")]) == 1
    assert main(["accept", "nonsense"]) == 1
    assert main(["sweep", str(_write(tmp_path, SMALL)), "--seed", "-1"]) == 1
    with pytest.raises(SystemExit):
        main(["figure", "fig9"])


def test_cli_figure_fig4(tmp_path):
    assert main(["figure", "fig4", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "fig4.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 3 * 101


def test_select():
    assert select(None) == list(CRITERIA)
    assert select("") == list(CRITERIA)
    assert select("oracle") == ["c1", "c2", "c10"]
    assert select("c7,c1") == ["c1", "c7"]
    assert set(sum(SUITES.values(), ())) == set(CRITERIA)
    with pytest.raises(KeyError):
        select("c99")


def test_accept_writes_report(tmp_path):
    lines = []
    res = run_acceptance("c1", tmp_path, echo=lines.append)
    assert res[0].passed
    assert lines[0].startswith("PASS  c1")
    rep = json.loads((tmp_path / "acceptance_report.json").read_text())
    assert rep["passed"] and rep["criteria"][0]["id"] == "c1"


def test_corrupted_coupling_scale_fails_oracle(tmp_path, monkeypatch):
    monkeypatch.setattr(closedform, "COUPLING_SCALE", 1.0)
    res = run_acceptance("c1", tmp_path, echo=None)
    assert not res[0].passed
    monkeypatch.undo()
    assert acceptance.cf.COUPLING_SCALE == 4.0
