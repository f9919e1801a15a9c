import json
import math
import os

import numpy as np
import pytest

from qwgrowth import cli, harness
from qwgrowth.harness import (EnsembleStats, ensemble_run, load_config,
                              run_experiment, split_seed, splitmix64)


def brownian_task(seed, dim=3):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(dim)


def test_splitmix_determinism_and_spread():
    assert splitmix64(42) == splitmix64(42)
    seeds = {split_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert split_seed(7, 0) != split_seed(8, 0)


def test_ensemble_stats_merge_matches_single_pass():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((100, 3))
    whole = EnsembleStats()
    for x in data:
        whole.push(x)
    left, right = EnsembleStats(), EnsembleStats()
    for x in data[:37]:
        left.push(x)
    for x in data[37:]:
        right.push(x)
    left.merge(right)
    assert np.allclose(left.mean, whole.mean, atol=1e-13)
    assert np.allclose(left.m2, whole.m2, atol=1e-12)
    assert np.allclose(whole.cov, np.cov(data.T, ddof=1), atol=1e-12)


def test_ensemble_run_worker_invariance():
    s1 = ensemble_run(brownian_task, 350, 1, 123)
    s2 = ensemble_run(brownian_task, 350, 2, 123)
    assert np.array_equal(s1.mean, s2.mean)
    assert np.array_equal(s1.m2, s2.m2)
    assert s1.n == 350


def test_ensemble_run_needs_replicas():
    with pytest.raises(ValueError):
        ensemble_run(brownian_task, 1, 1, 0)


def test_se_scaling_slope():
    ses = []
    ns = (200, 800, 3200)
    for n in ns:
        ses.append(ensemble_run(brownian_task, n, 2, 5).se_mean[0])
    slope = (math.log(ses[-1]) - math.log(ses[0])) \
        / (math.log(ns[-1]) - math.log(ns[0]))
    assert abs(slope + 0.5) < 0.05


def test_config_schema_validation():
    with pytest.raises(Exception):
        load_config({"experiment": "simulate"})  # missing seed
    with pytest.raises(Exception):
        load_config({"experiment": "nope", "seed": 1})
    cfg = load_config({"experiment": "lln", "seed": 1})
    assert cfg["workers"] == 1


def test_lln_experiment_and_export(tmp_path):
    cfg = {"experiment": "lln", "seed": 0,
           "params": {"N": 3, "tau_grid": [0.5, 1.0]}, "out": str(tmp_path)}
    report = run_experiment(cfg)
    assert report.passed
    rundir = os.path.join(tmp_path, "run-%s" % harness.run_id(
        load_config(cfg)))
    assert os.path.exists(os.path.join(rundir, "report.json"))
    table = open(os.path.join(rundir, "lln_profile.csv")).read().splitlines()
    assert table[0] == "tau,n,k,x"
    assert len(table) == 1 + 2 * 6


def test_byte_identical_reruns(tmp_path):
    cfg = {"experiment": "simulate", "seed": 99,
           "params": {"N": 3, "eps": 0.2, "horizon": 5.0,
                      "sample_times": [2.0, 5.0]}}
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run_experiment(dict(cfg), outdir=str(out1))
    run_experiment(dict(cfg), outdir=str(out2))
    rid = "run-%s" % harness.run_id(load_config(cfg))
    c1 = open(out1 / rid / "trajectory.csv", "rb").read()
    c2 = open(out2 / rid / "trajectory.csv", "rb").read()
    assert c1 == c2
    r1 = open(out1 / rid / "report.csv", "rb").read()
    assert r1 == open(out2 / rid / "report.csv", "rb").read()
    b1 = open(out1 / rid / "trajectory.bin", "rb").read()
    assert b1 == open(out2 / rid / "trajectory.bin", "rb").read()


def test_report_json_roundtrip(tmp_path):
    cfg = {"experiment": "verify", "seed": 3,
           "params": {"checks": ["ew-matching"]}}
    report = run_experiment(cfg, outdir=str(tmp_path))
    rundir = tmp_path / ("run-%s" % harness.run_id(load_config(cfg)))
    blob = json.loads(open(rundir / "report.json").read())
    assert blob["passed"] is True
    assert blob["rows"][0]["quantity"] == report.rows[0].quantity
    assert blob["rows"][0]["estimate"] == report.rows[0].estimate
    assert "python" in blob["environment"]


def test_cov_experiment_with_mc(tmp_path):
    cfg = {"experiment": "cov", "seed": 17, "workers": 2,
           "params": {"N": 2, "tau": 1.0, "eps": 0.05, "replicas": 300}}
    report = run_experiment(cfg, outdir=str(tmp_path))
    assert report.passed
    rundir = tmp_path / ("run-%s" % harness.run_id(load_config(cfg)))
    rows = open(rundir / "covariance.csv").read().splitlines()
    assert rows[0] == "n1,k1,n2,k2,value,se"
    # formula rows (9) plus MC rows (9)
    assert len(rows) == 1 + 9 + 9


def test_sde_experiment(tmp_path):
    cfg = {"experiment": "sde", "seed": 2,
           "params": {"system": "diffusive", "N": 2, "t0": 1.0, "t1": 1.5,
                      "dt": 0.005, "replicas": 500}}
    report = run_experiment(cfg, outdir=str(tmp_path))
    assert report.passed


def test_asympt_experiment(tmp_path):
    cfg = {"experiment": "asympt", "seed": 0,
           "params": {"grid": [[1.0, 0.3, 0.7, 0.6]], "finite_N": [50]}}
    report = run_experiment(cfg, outdir=str(tmp_path))
    assert report.passed


def test_cli_verify_subcommand(capsys):
    rc = cli.main(["verify", "--seed", "11", "--checks", "ew-matching",
                   "log-law"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS]" in out and "[FAIL]" not in out


def test_cli_config_kind_mismatch(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "lln", "seed": 0}))
    rc = cli.main(["cov", "--config", str(path)])
    assert rc == 2


def test_shipped_configs_load():
    root = os.path.join(os.path.dirname(__file__), "..", "configs")
    names = []
    for sub in ("", "verify"):
        d = os.path.join(root, sub)
        for f in sorted(os.listdir(d)):
            if f.endswith(".json"):
                cfg = load_config(os.path.join(d, f))
                names.append(cfg["experiment"])
    assert "verify" in names and "simulate" in names
