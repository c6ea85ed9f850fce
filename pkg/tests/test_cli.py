import json
from pathlib import Path

import pytest

from gremdyn.cli import load_config, main, run, validate_config
from gremdyn.env import ParameterError

BASE = {"N": 10, "p": 0.5, "a": 0.2, "beta": 1.4, "seed": 7}


def cfg(**extra):
    out = dict(BASE)
    out.update(extra)
    return out


def write_cfg(tmp_path, c, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(c))
    return p


def test_validate_rejects_bad_configs():
    with pytest.raises(ParameterError):
        validate_config(cfg())  # no experiment
    with pytest.raises(ParameterError):
        validate_config(cfg(experiment="bogus"))
    with pytest.raises(ParameterError):
        validate_config(cfg(experiment="params", a=0.7))  # cascading
    with pytest.raises(ParameterError):
        validate_config({"experiment": "params", "N": 10})  # missing keys
    # boundary case with nonnegative threshold is rejected up front
    with pytest.raises(ParameterError):
        validate_config(cfg(experiment="simulate", a=0.5, L=0.5))


def test_params_experiment(tmp_path):
    code, manifest = run(cfg(experiment="params", L=1.0), tmp_path / "o")
    assert code == 0
    assert manifest["summary"]["bar_beta_FT"] == pytest.approx(1.4717625281443434)
    assert manifest["summary"]["theta"] == pytest.approx(2.7950849718747371)
    assert (tmp_path / "o" / "params.csv").exists()
    assert (tmp_path / "o" / "manifest.json").exists()


def test_cli_main_and_exit_codes(tmp_path, capsys):
    p = write_cfg(tmp_path, cfg(experiment="params"))
    assert main(["--config", str(p), "--out", str(tmp_path / "o"),
                 "--no-figures"]) == 0
    out = capsys.readouterr().out
    assert "1.1774100" in out and "1.4717625" in out
    bad = write_cfg(tmp_path, cfg(experiment="params", a=0.9), "bad.json")
    assert main(["--config", str(bad), "--out", str(tmp_path / "o2")]) == 1
    assert main(["--config", str(tmp_path / "missing.json")]) == 1


def test_env_topk_csv_schema_and_figure(tmp_path):
    code, manifest = run(cfg(experiment="env-topk", k=4), tmp_path / "o")
    assert code == 0
    header = (tmp_path / "o" / "records.csv").read_text().splitlines()[0]
    assert header == "rank,sigma1,sigma2,xi_total,xi1,xi2,u_inv,w"
    assert (tmp_path / "o" / "records.png").exists()


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    c = cfg(experiment="env-topk", k=3, replicas=2)
    code, _ = run(c, tmp_path / "a", render=False)
    assert code == 0
    manifest_path = tmp_path / "a" / "manifest.json"
    replay = load_config(manifest_path)
    code, _ = run(replay, tmp_path / "b", render=False)
    assert code == 0
    for name in ("records_r0.csv", "records_r1.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_env_bins_experiment(tmp_path):
    code, manifest = run(cfg(experiment="env-bins", delta=0.1, eps=0.25),
                         tmp_path / "o", render=False)
    assert code == 0
    lines = (tmp_path / "o" / "bins.csv").read_text().splitlines()
    assert lines[0] == "j,count,bin_max,delta,eps"
    assert manifest["summary"]["states_in_range"] <= 32


def test_thm1_experiment(tmp_path):
    code, manifest = run(cfg(experiment="thm1", N=12, replicas=40),
                         tmp_path / "o", render=False, workers=1)
    assert code == 0
    assert manifest["summary"]["n"] == 40
    assert len(manifest["replica_seeds"]) == 40
    assert (tmp_path / "o" / "law_report.json").exists()


def test_gibbs_check_experiment(tmp_path):
    code, manifest = run(cfg(experiment="gibbs-check", N=8), tmp_path / "o",
                         render=False)
    assert code == 0
    assert manifest["summary"]["max_rel_error"] <= 1e-8


def test_simulate_experiment_and_budget_exit(tmp_path):
    c = cfg(experiment="simulate", N=10, horizon=2e4, scale="raw", k=4, L=0.0)
    code, manifest = run(c, tmp_path / "o", render=False)
    assert code == 0
    assert (tmp_path / "o" / "visits.csv").exists()
    header = (tmp_path / "o" / "visits.csv").read_text().splitlines()[0]
    assert header == "rank,visit_index,psi,upsilon,gamma_vis"
    # starved budget: exit code 2 and the incomplete flag
    far = dict(c, horizon=1e12)
    code, manifest = run(far, tmp_path / "p", render=False, budget=500)
    assert code == 2
    assert manifest["incomplete"]


def test_visits_experiment(tmp_path):
    c = cfg(experiment="visits", N=10, scale="cbar", k=4, rank=1, visits=120,
            trajectories=2, beta=1.9)
    code, manifest = run(c, tmp_path / "o", render=False)
    assert code == 0
    assert manifest["summary"]["n_visits"] >= 120
    assert 0.0 <= manifest["summary"]["ups_zero_fraction"] <= 1.0


def test_renewal_experiment_cli(tmp_path):
    c = cfg(experiment="renewal", N=10, k=6, L=0.0, M=2, excursions=150,
            beta=1.25, seed=13)
    code, manifest = run(c, tmp_path / "o", render=False)
    assert code == 0
    assert manifest["summary"]["n_excursions"] >= 150


def test_kproc_experiment(tmp_path):
    c = {"experiment": "kproc", "seed": 3, "gamma": [2, 1, 1],
         "horizon": 2e4, "levels": [2, 3]}
    code, manifest = run(c, tmp_path / "o", render=False)
    assert code == 0
    assert manifest["summary"]["max_abs_err"] < 0.05
    assert (tmp_path / "o" / "truncation.json").exists()


def test_kemperman_experiment(tmp_path):
    c = {"experiment": "kemperman", "seed": 0, "n_max": 6}
    code, manifest = run(c, tmp_path / "o", render=False, fmt="json")
    assert code == 0
    assert manifest["summary"]["max_rel_err"] < 1e-6
    assert (tmp_path / "o" / "kemperman.json").exists()


def test_occupation_experiment_cli(tmp_path):
    c = cfg(experiment="occupation", N=10, beta=1.3, horizon=5.0, scale="c",
            k=10, L=-1.0, M=2, replicas=3, trajectories=2, seed=23)
    code, manifest = run(c, tmp_path / "o", render=False)
    assert code == 0
    assert len(manifest["summary"]["mean_share"]) == 2
