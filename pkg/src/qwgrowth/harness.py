"""Experiment harness: seed splitting, shared-nothing parallel ensembles,
Welford-merged statistics, config validation, and CSV/JSON report export.

Determinism contract: a (config, seed) pair produces byte-identical CSV
artifacts across runs and across worker counts. Replica seeds come from a
documented splitmix64-based mix of (master seed, replica index); partial
statistics are always merged in a fixed chunk order, so the reduction tree
does not depend on the worker count.
"""

import hashlib
import json
import math
import os
import platform
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import jsonschema
import numpy as np

from . import dynamics, moments
from .qcore import InterlacingArray, ModelParams, Plancherel, coordinate_order

GOLDEN_64 = 0x9E3779B97F4A7C15
MASK_64 = (1 << 64) - 1
STATS_CHUNK = 100  # fixed merge granularity; keeps stats worker-count invariant


def splitmix64(x):
    """One splitmix64 step; the documented 64-bit mixer."""
    x = (x + GOLDEN_64) & MASK_64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK_64
    return z ^ (z >> 31)


def split_seed(master, index):
    """Per-replica seed: splitmix64 applied to master xor (index+1)*golden."""
    return splitmix64((int(master) ^ (((index + 1) * GOLDEN_64) & MASK_64)) & MASK_64)


@dataclass
class EnsembleStats:
    """Vector mean/covariance accumulator with exact pairwise merging."""

    n: int = 0
    mean: np.ndarray = None
    m2: np.ndarray = None

    def push(self, x):
        x = np.asarray(x, dtype=float)
        if self.mean is None:
            self.mean = np.zeros_like(x)
            self.m2 = np.zeros((x.size, x.size))
        self.n += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.n
        self.m2 = self.m2 + np.outer(delta, x - self.mean)

    def merge(self, other):
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean.copy(), other.m2.copy()
            return self
        n = self.n + other.n
        d = other.mean - self.mean
        self.mean = self.mean + d * (other.n / n)
        self.m2 = self.m2 + other.m2 + np.outer(d, d) * (self.n * other.n / n)
        self.n = n
        return self

    @property
    def cov(self):
        if self.n < 2:
            raise ValueError("need at least 2 replicas for a covariance")
        return self.m2 / (self.n - 1)

    @property
    def se_mean(self):
        return np.sqrt(np.diag(self.cov) / self.n)


def _run_chunk(fn, master_seed, index_range):
    stats = EnsembleStats()
    for i in index_range:
        stats.push(fn(split_seed(master_seed, i)))
    return stats


def ensemble_run(fn, replicas, workers, master_seed, fn_kwargs=None):
    """Shared-nothing ensemble of fn(seed, **kwargs) -> observation vector.

    Replicas are processed in fixed chunks of STATS_CHUNK and merged in chunk
    order, so results are bit-identical for any worker count. A failing
    replica aborts the whole run.
    """
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    task = partial(fn, **(fn_kwargs or {}))
    ranges = [range(s, min(s + STATS_CHUNK, replicas))
              for s in range(0, replicas, STATS_CHUNK)]
    total = EnsembleStats()
    if workers <= 1 or len(ranges) == 1:
        for r in ranges:
            total.merge(_run_chunk(task, master_seed, r))
        return total
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk_stats in pool.map(partial(_run_chunk, task, master_seed), ranges):
            total.merge(chunk_stats)
    return total


# ---------------------------------------------------------------------------
# replica tasks (top level so they cross process boundaries)
# ---------------------------------------------------------------------------

def pushblock_final_state(seed, N, q, gamma, a=None, sample_times=None):
    """Final (or sampled) flattened push-block state as a float vector."""
    params = ModelParams.from_q(q, a or (1.0,) * N, Plancherel(gamma))
    rng = random.Random(seed)
    traj = dynamics.simulate_pushblock_continuous(
        InterlacingArray.packed(N), params, gamma, sample_times or [gamma], rng)
    return np.array([v for st in traj.states for v in st.flatten()], dtype=float)


def rsk_final_state(seed, N, q, gamma, a=None):
    params = ModelParams.from_q(q, a or (1.0,) * N, Plancherel(gamma))
    rng = random.Random(seed)
    traj = dynamics.simulate_rsk_continuous(
        InterlacingArray.packed(N), params, gamma, [gamma], rng)
    return np.array(traj.states[-1].flatten(), dtype=float)


def rightpush_final_state(seed, N, q, gamma, a=None):
    params = ModelParams.from_q(q, a or (1.0,) * N, Plancherel(gamma))
    rng = random.Random(seed)
    traj = dynamics.simulate_rightpush_continuous(
        InterlacingArray.packed(N), params, gamma, [gamma], rng)
    return np.array(traj.states[-1].flatten(), dtype=float)


def alpha_pushblock_final_state(seed, N, q, alphas, a=None):
    params = ModelParams.from_q(q, a or (1.0,) * N)
    rng = random.Random(seed)
    st = dynamics.run_alpha_chain(N, params, alphas, rng,
                                  step=dynamics.step_pushblock_alpha)
    return np.array(st.flatten(), dtype=float)


def alpha_rsk_final_state(seed, N, q, alphas, a=None):
    params = ModelParams.from_q(q, a or (1.0,) * N)
    rng = random.Random(seed)
    st = dynamics.run_alpha_chain(N, params, alphas, rng,
                                  step=dynamics.step_rsk_alpha)
    return np.array(st.flatten(), dtype=float)


def poisson_corner_observables(seed, q, gamma):
    """[q^lam, q^-lam] for the one-particle system at time gamma."""
    lam = pushblock_final_state(seed, 1, q, gamma)[0]
    return np.array([q ** lam, q ** (-lam)])


def moment_observables(seed, N, q, gamma, pairs):
    """q^(edge sums) for the requested (n, r) pairs from one trajectory."""
    flat = pushblock_final_state(seed, N, q, gamma)
    coords = coordinate_order(N)
    index = {c: i for i, c in enumerate(coords)}
    out = []
    for n, r in pairs:
        s = sum(flat[index[(k, n)]] for k in range(n - r + 1, n + 1))
        out.append(q ** s)
    return np.array(out)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class CheckRow:
    quantity: str
    expected: float
    estimate: float
    se: float = None
    z: float = None
    tol: float = None
    passed: bool = True

    def as_list(self):
        fmt = lambda v: "" if v is None else "%.17g" % v
        return [self.quantity, fmt(self.expected), fmt(self.estimate),
                fmt(self.se), fmt(self.z), fmt(self.tol), str(self.passed)]


def row_exact(quantity, expected, estimate, tol):
    """Deterministic comparison row."""
    return CheckRow(quantity=quantity, expected=expected, estimate=estimate,
                    tol=tol, passed=abs(estimate - expected) <= tol)


def row_stochastic(quantity, expected, estimate, se, z_max=4.0):
    """Monte Carlo comparison row; SE must be positive."""
    z = (estimate - expected) / se if se > 0 else math.inf
    return CheckRow(quantity=quantity, expected=expected, estimate=estimate,
                    se=se, z=z, tol=z_max, passed=abs(z) <= z_max)


@dataclass
class Report:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    environment: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def extend(self, rows):
        self.rows.extend(rows)

    def to_dict(self):
        return {
            "schema_version": 1,
            "passed": self.passed,
            "rows": [{"quantity": r.quantity, "expected": r.expected,
                      "estimate": r.estimate, "se": r.se, "z": r.z,
                      "tol": r.tol, "passed": r.passed} for r in self.rows],
            "config": self.config,
            "environment": self.environment,
        }


REPORT_CSV_HEADER = "quantity,expected,estimate,se,z,tol,passed"


def environment_fingerprint():
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "machine": platform.machine(),
    }


def export_report(report, outdir, formats=("csv", "json")):
    os.makedirs(outdir, exist_ok=True)
    paths = []
    if "csv" in formats:
        path = os.path.join(outdir, "report.csv")
        with open(path, "w") as fh:
            fh.write(REPORT_CSV_HEADER + "\n")
            for r in report.rows:
                fh.write(",".join(r.as_list()) + "\n")
        paths.append(path)
    if "json" in formats:
        path = os.path.join(outdir, "report.json")
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        paths.append(path)
    return paths


def write_table_csv(path, header, rows):
    """Generic CSV with floats at 17 significant digits, fixed column order."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % v if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    return path


# ---------------------------------------------------------------------------
# experiment configs
# ---------------------------------------------------------------------------

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment", "seed"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer", "enum": [1]},
        "experiment": {"enum": ["simulate", "lln", "cov", "sde", "asympt",
                                "verify"]},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "params": {"type": "object"},
        "tolerances": {"type": "object"},
    },
}

DEFAULTS = {"workers": 1, "params": {}, "tolerances": {}, "schema_version": 1}


def load_config(path_or_dict):
    if isinstance(path_or_dict, dict):
        cfg = dict(path_or_dict)
    else:
        with open(path_or_dict) as fh:
            cfg = json.load(fh)
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    out = dict(DEFAULTS)
    out.update(cfg)
    return out


def run_id(config):
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def run_experiment(config, outdir=None):
    """Executes the configured pipeline; returns the Report. Artifacts land
    under <out>/run-<id> where the id is a hash of the config."""
    from . import verify as verify_mod  # local import to avoid a cycle
    config = load_config(config)
    kind = config["experiment"]
    seed = config["seed"]
    workers = config["workers"]
    params = config["params"]
    report = Report(config=config, environment=environment_fingerprint())
    tables = {}

    if kind == "verify":
        checks = params.get("checks", "all")
        names = verify_mod.check_names() if checks == "all" else checks
        for name in names:
            report.extend(verify_mod.run_check(
                name, seed=seed, workers=workers,
                overrides=params.get("overrides", {}).get(name, {}),
                tolerances=config["tolerances"]))
    elif kind == "simulate":
        tables.update(_experiment_simulate(params, seed, report))
    elif kind == "lln":
        tables.update(_experiment_lln(params, report))
    elif kind == "cov":
        tables.update(_experiment_cov(params, seed, workers, report))
    elif kind == "sde":
        tables.update(_experiment_sde(params, seed, report))
    elif kind == "asympt":
        tables.update(_experiment_asympt(params, report))

    base = outdir or config.get("out")
    if base:
        rundir = os.path.join(base, "run-%s" % run_id(config))
        export_report(report, rundir)
        for name, (header, rows) in tables.items():
            write_table_csv(os.path.join(rundir, name + ".csv"), header, rows)
        if "trajectory" in tables and hasattr(report, "_trajectory"):
            report._trajectory.to_binary(os.path.join(rundir, "trajectory.bin"))
    return report


def _experiment_simulate(params, seed, report):
    N = params.get("N", 5)
    eps = params.get("eps", 0.05)
    horizon = params.get("horizon", 1.0 / eps)
    sample_times = params.get("sample_times", [horizon])
    dynamic = params.get("dynamic", "pushblock")
    a = tuple(params.get("a", (1.0,) * N))
    mp_ = ModelParams(eps=eps, a=a, spec=Plancherel(horizon))
    rng = random.Random(seed)
    sim = {"pushblock": dynamics.simulate_pushblock_continuous,
           "rsk": dynamics.simulate_rsk_continuous,
           "rightpush": dynamics.simulate_rightpush_continuous}[dynamic]
    traj = sim(InterlacingArray.packed(N), mp_, horizon, sample_times, rng)
    rows = []
    for t, st in zip(traj.times, traj.states):
        for n in range(1, N + 1):
            for k in range(1, n + 1):
                rows.append((float(t), n, k, st.get(n, k)))
    report._trajectory = traj
    ok = all(st.validate() for st in traj.states)
    report.rows.append(CheckRow(quantity="samples-interlace", expected=1.0,
                                estimate=1.0 if ok else 0.0, tol=0.0, passed=ok))
    return {"trajectory": (("time", "n", "k", "value"), rows)}


def _experiment_lln(params, report):
    N = params.get("N", 5)
    grid = params.get("tau_grid", [0.5, 1.0, 2.0])
    a = params.get("a")
    rows = []
    for tau in grid:
        prof = moments.lln_profile(N, tau=tau, a=tuple(a) if a else None)
        for n in range(1, N + 1):
            for k in range(1, n + 1):
                rows.append((float(tau), n, k, prof.x(n, k)))
        report.rows.append(CheckRow(
            quantity="lln-interlaces-tau-%g" % tau, expected=1.0,
            estimate=1.0 if prof.interlaces_strictly() else 0.0,
            tol=0.0, passed=prof.interlaces_strictly()))
    return {"lln_profile": (("tau", "n", "k", "x"), rows)}


def _experiment_cov(params, seed, workers, report):
    from . import fluctuations
    N = params.get("N", 3)
    tau = params.get("tau", 1.0)
    table = fluctuations.covariance_matrix(N, tau)
    coords = table.coords
    rows = []
    for i, (k1, n1) in enumerate(coords):
        for j, (k2, n2) in enumerate(coords):
            rows.append((n1, k1, n2, k2, float(table.values[i, j]), 0.0))
    replicas = params.get("replicas")
    if replicas:
        eps = params.get("eps", 0.01)
        stats = ensemble_run(pushblock_final_state, replicas, workers, seed,
                             fn_kwargs={"N": N, "q": math.exp(-eps),
                                        "gamma": tau / eps})
        prof = moments.lln_profile(N, tau=tau)
        xs = np.array([prof.x(n, k) for (k, n) in coords])
        sample_cov = stats.cov * eps  # cov(eps^{-1/2}(eps lam - x)) = eps cov(lam)
        d = np.diag(sample_cov)
        for i, (k1, n1) in enumerate(coords):
            for j, (k2, n2) in enumerate(coords):
                se = math.sqrt((d[i] * d[j] + sample_cov[i, j] ** 2)
                               / (stats.n - 1))
                rows.append((n1, k1, n2, k2, float(sample_cov[i, j]), se))
        bias = np.abs(eps * stats.mean - xs).max()
        report.rows.append(CheckRow(quantity="cov-mc-centering", expected=0.0,
                                    estimate=float(bias), tol=5 * math.sqrt(eps),
                                    passed=bias <= 5 * math.sqrt(eps)))
    report.rows.append(CheckRow(quantity="cov-psd", expected=1.0,
                                estimate=1.0 if table.is_psd() else 0.0,
                                tol=0.0, passed=table.is_psd()))
    return {"covariance": (("n1", "k1", "n2", "k2", "value", "se"), rows)}


def _experiment_sde(params, seed, report):
    from . import fluctuations, largetime
    system = params.get("system", "diffusive")
    N = params.get("N", 3)
    t0 = params.get("t0", 1.0)
    t1 = params.get("t1", 2.0)
    dt = params.get("dt", 1e-3)
    replicas = params.get("replicas", 2000)
    rng = np.random.default_rng(seed)
    if system == "diffusive":
        cov0 = largetime.covariance_matrix(N, t0)
        times, snaps = largetime.simulate_diffusive_sde(
            N, t0, t1, dt, replicas, rng, init_cov=cov0)
    else:
        times, snaps = fluctuations.simulate_fluctuation_sde(
            N, t0, t1, dt, replicas, rng)
    coords = coordinate_order(N)
    rows = []
    for t, X in zip(times, snaps):
        C = np.cov(X.T, ddof=1)
        d = np.diag(C)
        for i, (k1, n1) in enumerate(coords):
            for j, (k2, n2) in enumerate(coords):
                se = math.sqrt((d[i] * d[j] + C[i, j] ** 2) / (replicas - 1))
                rows.append((float(t), n1, k1, n2, k2, float(C[i, j]), se))
        ev = np.linalg.eigvalsh(C).min()
        report.rows.append(CheckRow(
            quantity="sde-cov-psd-t-%g" % t, expected=1.0,
            estimate=1.0 if ev >= -1e-8 * np.trace(C) else 0.0,
            tol=0.0, passed=ev >= -1e-8 * np.trace(C)))
    return {"sde_covariance": (("time", "n1", "k1", "n2", "k2", "value", "se"),
                               rows)}


def _experiment_asympt(params, report):
    from . import asymptotics, largetime
    grid = params.get("grid", [[1.0, 0.3, 0.7, 0.6]])
    rows = []
    for d, a, c, b in grid:
        ell = asymptotics.limit_covariance_elliptic(d, a, c, b)
        integ = asymptotics.limit_covariance_integral(d, a, c, b)
        rows.append((d, a, c, b, ell, integ))
        report.rows.append(row_exact("asympt-%g-%g-%g-%g" % (d, a, c, b),
                                     ell, integ, 1e-6))
    fin_rows = []
    for N in params.get("finite_N", []):
        for d, a, c, b in grid:
            k1, n1 = round((1 - a) * d * N), round(d * N)
            k2, n2 = round((1 - b) * c * N), round(c * N)
            v = N * largetime.covariance_single(k1, n1, k2, n2, 1.0)
            fin_rows.append((N, d, a, c, b, v))
    out = {"limit_covariance": (("d", "a", "c", "b", "elliptic", "integral"), rows)}
    if fin_rows:
        out["finite_N"] = (("N", "d", "a", "c", "b", "scaled_cov"), fin_rows)
    return out
