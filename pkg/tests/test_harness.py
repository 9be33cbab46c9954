"""Run configuration, report plumbing and plot output."""

import json
import math

import numpy as np
import pytest
import yaml

from weinstein.harness import (
    DEFAULT_TOLERANCES, ConfigError, ReportEntry, RunConfig, VerificationReport, criterion_8, criterion_9,
    criterion_10_11, emit_plot_data, entry, info, lemma33_sup, lint_report, run_verify, skipped,
)
from weinstein.halfspace import WeinsteinParams, box_measure, ball_measure
from weinstein.corpus import make_corpus


def test_defaults():
    cfg = RunConfig()
    assert cfg.grid_n == 512 and cfg.refinement_ns == (128, 256, 512)
    assert RunConfig(d=3).grid_n == 96
    assert cfg.tolerances == DEFAULT_TOLERANCES
    assert cfg.schedule().radii[0] == pytest.approx(2.0)


@pytest.mark.parametrize("kwargs", [
    dict(alpha=-0.5), dict(d=1), dict(grid_n=30), dict(grid_n=8), dict(grid_half_width=0),
    dict(corpus=("nope",)), dict(corpus=()), dict(tolerances={"plancherel": 0}),
    dict(tolerances={"plancherel": -1}), dict(tolerances={"made_up": 1e-3}),
    dict(tolerances={"plancherel": "x"}), dict(n_radii=2), dict(grid_n=32),
])
def test_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_yaml_round_trip(tmp_path):
    cfg = RunConfig(alpha=1.5, d=2, grid_n=64, seed=3, tolerances={"plancherel": 2e-4})
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict()))
    back = RunConfig.from_yaml(path)
    assert back == cfg


def test_yaml_errors(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("alpha: 1\nbogus: 2\n")
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(p)
    p.write_text("[1, 2\n")
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(p)
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(tmp_path / "missing.yaml")


def test_entry_status_and_serialization():
    e = entry("x", "Eq. (2.11)", 1e-12, 1e-10)
    assert e.status == "PASS" and e.consistent()
    e = entry("x", "Eq. (2.11)", math.nan, 1e-10)
    assert e.status == "FAIL"
    assert e.to_dict()["observed"] == "nan"
    assert entry("y", "Lemma 3.2", 2.0, 1.8, ">=").status == "PASS"
    assert info("z", "Lemma 3.4", 1.0).status == "INFO"
    assert skipped("w", "Lemma 3.3", "gated").status == "SKIPPED"


def test_lint_flags_bad_references():
    rep = VerificationReport(config={}, entries=[entry("a", "somewhere", 0.0, 1.0),
                                                 entry("b", "Eq. (2.11)", 0.0, 1.0)])
    problems = lint_report(rep)
    assert len(problems) == 1 and "a" in problems[0]


def test_lemma33_sup_is_box_over_ball():
    # the sup is the left limit at x_d = eps, where the kernel is 1 and the ratio is box/ball
    for a, d, ref in [(1.0, 2, 30.0), (1.5, 3, 112.0)]:
        p = WeinsteinParams(a, d)
        exact = box_measure(p, np.r_[np.zeros(d - 1), 1.0], 1.0) / ball_measure(p, 1.0)
        assert exact == pytest.approx(ref, rel=1e-12)
        assert lemma33_sup(p) == pytest.approx(exact, rel=1e-12)


def test_weak_regime_is_skipped():
    p = WeinsteinParams(-0.4, 2)
    assert criterion_8(p)[0].status == "SKIPPED"
    assert criterion_9(p)[0].status == "SKIPPED"
    entries, studies = criterion_10_11(p, make_corpus(p), (16, 32, 64))
    assert {e.status for e in entries} == {"SKIPPED"} and studies == []


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    rep = run_verify(RunConfig(grid_n=48, out=str(out)))
    return rep, out


def test_report_files(small_run):
    rep, out = small_run
    data = json.loads((out / "report.json").read_text())
    assert data["summary"] == rep.summary()
    assert len(data["entries"]) == len(rep.entries)
    assert rep.exit_code in (0, 1)
    assert (out / "report.csv").read_text().count("\n") == len(rep.entries) + 1
    for name in ("checks.csv", "distribution.csv", "field_indicator.csv", "field_bump_signed.csv"):
        assert (out / name).stat().st_size > 0
    assert [e for e in rep.entries if e.check == "report_lint"][0].status == "PASS"
    # every entry agrees with its own bound
    assert all(e.consistent() for e in rep.entries)


def test_report_deterministic(small_run, tmp_path):
    rep, out = small_run
    again = run_verify(RunConfig(grid_n=48, out=str(out)), write=False)
    assert again.to_json() == rep.to_json()


def test_weak_regime_run(tmp_path):
    rep = run_verify(RunConfig(alpha=-0.4, grid_n=48, out=str(tmp_path)))
    skipped_checks = {e.check for e in rep.entries if e.status == "SKIPPED"}
    assert {"lemma32_sweep_d2_a-0.4", "lemma33_sweep_d2_a-0.4", "weak_type_refinement",
            "lp_ratio_refinement"} <= skipped_checks
    # no study: summary plot files carry headers only
    assert (tmp_path / "distribution.csv").read_text() == "function,level,nu_M,nu_Mtilde\n"
    assert not list(tmp_path.glob("field_*.csv"))


def test_emit_plot_data_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="plot data"):
        emit_plot_data(VerificationReport(config={}), None, blocker / "sub")
