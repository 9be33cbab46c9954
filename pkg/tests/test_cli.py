"""Command-line interface: subcommands and exit codes."""

import json

import numpy as np
import pytest
import yaml

from weinstein.cli import main
from weinstein.halfspace import read_grid_function_csv
from weinstein.harness import RunConfig


def test_transform(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["transform", "--function", "gaussian", "--grid", "64", "--half-width", "6",
                 "--spectral-grid", "16", "--spectral-half-width", "2", "--out", str(out)]) == 0
    F = read_grid_function_csv(out)
    lam = F.grid.points()
    np.testing.assert_allclose(F.values.real, np.exp(-0.5 * np.sum(lam ** 2, axis=-1)), atol=5e-3)


def test_translate(tmp_path, capsys):
    out = tmp_path / "tr.csv"
    assert main(["translate", "--function", "bump", "--grid", "32", "--point", "0.5,1.0",
                 "--check-normalization", "--out", str(out)]) == 0
    res = json.loads(capsys.readouterr().out.splitlines()[0])
    assert res["theta"] < 1e-10 and res["rho"] < 1e-6 and res["pairs"] == 100
    header = out.read_text().splitlines()[0]
    assert header == "x1,x2,value,f"


def test_translate_errors(tmp_path, capsys):
    assert main(["translate", "--grid", "32"]) == 2
    assert main(["translate", "--grid", "32", "--point", "1,2,3"]) == 2
    assert main(["translate", "--grid", "32", "--point", "9,1", "--out", str(tmp_path / "x.csv")]) == 2
    with pytest.raises(SystemExit):
        main(["translate", "--point", "a,b"])


def test_maximal(tmp_path):
    out = tmp_path / "m"
    assert main(["maximal", "--function", "indicator", "--grid", "32", "--radii", "4", "--z-samples", "8",
                 "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["sup_M"] <= summary["sup_f"]
    assert summary["exclusion_zone"] == summary["radii"][0]
    assert 0 < summary["weak_type_constant"] < np.inf
    assert set(summary["lp_ratios"]) == {"1.5", "2", "4"}
    assert read_grid_function_csv(out / "maximal.csv").grid.counts == (32, 32)


def test_maximal_signed_has_no_weak_constant(tmp_path):
    out = tmp_path / "m"
    assert main(["maximal", "--function", "bump_signed", "--grid", "32", "--radii", "4", "--out", str(out)]) == 0
    assert "weak_type_constant" not in json.loads((out / "summary.json").read_text())


def test_verify_config_errors(tmp_path):
    assert main(["verify", "--grid", "30", "--out", str(tmp_path)]) == 2
    assert main(["verify", "--alpha", "-1", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "c.yaml"
    bad.write_text(yaml.safe_dump({"tolerances": {"plancherel": 0}}))
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_verify_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["verify", "--grid", "48", "--out", str(blocker / "sub")]) == 2


def test_verify_exit_code_tracks_report(tmp_path, capsys):
    # a coarse grid fails some checks: exit 1, reports still written
    code = main(["verify", "--grid", "48", "--out", str(tmp_path)])
    assert code == 1
    assert (tmp_path / "report.json").exists()
    assert "failed" in capsys.readouterr().out


def test_verify_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "c.yaml"
    d = RunConfig(grid_n=48, seed=5).to_dict()
    cfg.write_text(yaml.safe_dump(d))
    out = tmp_path / "o"
    main(["verify", "--config", str(cfg), "--seed", "6", "--out", str(out)])
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["seed"] == 6 and rep["config"]["grid"]["n"] == 48
