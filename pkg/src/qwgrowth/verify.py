"""Named verification checks tying simulation to formula.

Each check returns a list of CheckRow objects; a check passes when every row
does. The acceptance suite and the `verify` CLI subcommand both dispatch
through run_check, so every criterion is reproducible from a shipped config.
"""

import math
import random
import time

import numpy as np

from . import asymptotics, dynamics, fluctuations, largetime, moments
from .harness import (CheckRow, ensemble_run, moment_observables,
                      poisson_corner_observables, pushblock_final_state,
                      row_exact, row_stochastic, split_seed)
from .qcore import InterlacingArray, ModelParams, Plancherel, coordinate_order


def _runtime_row(name, elapsed, budget):
    return CheckRow(quantity=name + "-runtime-sec", expected=0.0,
                    estimate=elapsed, tol=budget, passed=elapsed <= budget)


def dynamics_observable(seed, N, q, gamma, dynamic):
    """q^(lam^(N)_N(gamma)) under the chosen continuous dynamic."""
    params = ModelParams.from_q(q, (1.0,) * N, Plancherel(gamma))
    rng = random.Random(seed)
    sim = {"pushblock": dynamics.simulate_pushblock_continuous,
           "rsk": dynamics.simulate_rsk_continuous,
           "rightpush": dynamics.simulate_rightpush_continuous}[dynamic]
    traj = sim(InterlacingArray.packed(N), params, gamma, [gamma], rng)
    return np.array([q ** traj.states[-1].get(N, N)])


def scaled_abs_error(seed, N, eps, tau, xs):
    """Mean over coordinates of |eps*lam - x(tau)| for one replica."""
    flat = pushblock_final_state(seed, N, math.exp(-eps), tau / eps)
    return np.array([np.mean(np.abs(eps * flat - np.asarray(xs)))])


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def check_poisson_corner(seed, workers=1, replicas=100_000, z_max=4.0):
    t0 = time.time()
    params = ModelParams.from_q(0.5, (1.0,), Plancherel(2.0))
    rows = [
        row_exact("poisson-moment-formula", math.exp(-1.0),
                  moments.q_moment([1], [1], params), 1e-10),
        row_exact("poisson-inverse-formula", math.exp(2.0),
                  moments.q_inverse_moment([1], [1], params), 1e-10),
    ]
    stats = ensemble_run(poisson_corner_observables, replicas, workers, seed,
                         fn_kwargs={"q": 0.5, "gamma": 2.0})
    se = stats.se_mean
    rows.append(row_stochastic("poisson-moment-mc", math.exp(-1.0),
                               stats.mean[0], se[0], z_max))
    rows.append(row_stochastic("poisson-inverse-mc", math.exp(2.0),
                               stats.mean[1], se[1], z_max))
    rows.append(_runtime_row("poisson-corner", time.time() - t0, 60.0))
    return rows


def check_moment_cross(seed, workers=1, replicas=100_000, z_max=4.0):
    t0 = time.time()
    pairs = [(1, 1), (2, 1), (2, 2), (3, 2)]
    params = ModelParams.from_q(0.5, (1.0,) * 3, Plancherel(1.0))
    stats = ensemble_run(moment_observables, replicas, workers, seed,
                         fn_kwargs={"N": 3, "q": 0.5, "gamma": 1.0,
                                    "pairs": pairs})
    rows = []
    for i, (n, r) in enumerate(pairs):
        formula = moments.q_moment([n], [r], params)
        rows.append(row_stochastic("moment-mc-n%d-r%d" % (n, r), formula,
                                   stats.mean[i], stats.se_mean[i], z_max))
    rows.append(_runtime_row("moment-cross-check", time.time() - t0, 600.0))
    return rows


def check_dynamics_equivalence(seed, workers=1, replicas=100_000, z_max=4.0):
    results = {}
    for i, dyn in enumerate(("pushblock", "rsk", "rightpush")):
        stats = ensemble_run(dynamics_observable, replicas, workers,
                             split_seed(seed, 1000 + i),
                             fn_kwargs={"N": 2, "q": 0.5, "gamma": 1.0,
                                        "dynamic": dyn})
        results[dyn] = (stats.mean[0], stats.se_mean[0])
    rows = []
    names = list(results)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            mi, si = results[names[i]]
            mj, sj = results[names[j]]
            rows.append(row_stochastic("equiv-%s-vs-%s" % (names[i], names[j]),
                                       mj, mi, math.hypot(si, sj), z_max))
    params = ModelParams.from_q(0.5, (1.0,) * 2, Plancherel(1.0))
    formula = moments.q_moment([2], [1], params)
    m, s = results["pushblock"]
    rows.append(row_stochastic("equiv-pushblock-vs-formula", formula, m, s, z_max))
    return rows


def check_lln_triple(seed=0, workers=1, tol=1e-8):
    rows = []
    for tau in (0.5, 1.0, 2.0):
        worst_c = worst_t = 0.0
        for n in range(1, 7):
            for r in range(1, n + 1):
                e = moments.lln_exp_sum(n, r, tau=tau, method="explicit")
                t = moments.lln_exp_sum(n, r, tau=tau, method="toeplitz")
                c = moments.lln_exp_sum(n, r, tau=tau, method="contour")
                worst_c = max(worst_c, abs(c - e))
                worst_t = max(worst_t, abs(t - e))
        rows.append(row_exact("lln-contour-vs-explicit-tau%g" % tau, 0.0,
                              worst_c, tol))
        rows.append(row_exact("lln-toeplitz-vs-explicit-tau%g" % tau, 0.0,
                              worst_t, tol))
    return rows


def check_lln_ode(seed=0, workers=1, res_tol=1e-6, alpha_tol=1e-8,
                  ratio_min=3.5):
    tau, h = 1.0, 1e-4
    x_eval = lambda n, k, t: moments.lln_x_explicit(n, k, t, dps=40)
    worst = 0.0
    worst_ratio = math.inf
    for n in range(1, 5):
        for k in range(1, n + 1):
            r_h = float(moments.pushblock_ode_residual(x_eval, n, k, tau, h,
                                                       use_mp=True))
            r_h2 = float(moments.pushblock_ode_residual(x_eval, n, k, tau, h / 2,
                                                        use_mp=True))
            worst = max(worst, abs(r_h))
            if abs(r_h) > 1e-12:  # below that the residual is analytically 0
                worst_ratio = min(worst_ratio, abs(r_h) / max(abs(r_h2), 1e-300))
    rows = [row_exact("pushblock-ode-residual", 0.0, worst, res_tol),
            CheckRow(quantity="pushblock-ode-halving-ratio", expected=ratio_min,
                     estimate=worst_ratio, tol=ratio_min,
                     passed=worst_ratio >= ratio_min)]
    alphas = (0.3, 0.45, 0.35, 0.4, 0.25)  # t > N so every coordinate has moved
    prof_prev = moments.lln_profile(4, alphas=alphas[:-1])
    prof_curr = moments.lln_profile(4, alphas=alphas)
    worst_a = 0.0
    for n in range(1, 5):
        for k in range(1, n + 1):
            res = moments.alpha_ode_residual(prof_prev.y, prof_curr.y, n, k,
                                             1.0, alphas[-1])
            worst_a = max(worst_a, abs(res))
    rows.append(row_exact("alpha-critical-point-residual", 0.0, worst_a,
                          alpha_tol))
    return rows


def check_scaled_convergence(seed, workers=1, replicas=200):
    N, tau = 5, 1.0
    prof = moments.lln_profile(N, tau=tau)
    xs = tuple(prof.x(n, k) for (k, n) in coordinate_order(N))
    errs = []
    for i, eps in enumerate((0.1, 0.05, 0.02)):
        stats = ensemble_run(scaled_abs_error, replicas, workers,
                             split_seed(seed, 2000 + i),
                             fn_kwargs={"N": N, "eps": eps, "tau": tau,
                                        "xs": xs})
        errs.append(stats.mean[0])
    rows = [CheckRow(quantity="scaled-error-monotone", expected=1.0,
                     estimate=1.0 if errs[0] > errs[1] > errs[2] else 0.0,
                     tol=0.0, passed=errs[0] > errs[1] > errs[2])]
    bound = 5.0 * math.sqrt(0.02)
    rows.append(row_exact("scaled-error-at-eps-0.02", 0.0, errs[2], bound))
    return rows


def check_fluctuation_covariance(seed, workers=1, replicas=10_000, z_max=4.0,
                                 eps=0.005):
    N, tau = 3, 1.0
    formula = fluctuations.covariance_matrix(N, tau)
    rows = [row_exact("fluct-var11-formula", tau,
                      fluctuations.covariance(1, 1, 1, 1, tau), 1e-8)]
    stats = ensemble_run(pushblock_final_state, replicas, workers, seed,
                         fn_kwargs={"N": N, "q": math.exp(-eps),
                                    "gamma": tau / eps})
    C = eps * stats.cov
    d = np.diag(C)
    worst = 0.0
    M = C.shape[0]
    for i in range(M):
        for j in range(i + 1):
            se = math.sqrt((d[i] * d[j] + C[i, j] ** 2) / (stats.n - 1))
            worst = max(worst, abs(C[i, j] - formula.values[i, j]) / se)
    rows.append(CheckRow(quantity="fluct-cov-mc-max-z", expected=0.0,
                         estimate=worst, tol=z_max, passed=worst <= z_max))
    return rows


def check_orthogonal_polynomials(seed=0, workers=1, tol=1e-10):
    rows = []
    for T in (0.5, 1.0, 2.0):
        worst_off = worst_norm = 0.0
        for n in range(2, 9):
            norms = [largetime.laguerre_norm(n, k, T) for k in range(n)]
            for j in range(n):
                for k in range(j, n):
                    val = largetime.laguerre_inner(n, j, k, T)
                    if j == k:
                        worst_norm = max(worst_norm,
                                         abs(val - norms[k]) / abs(norms[k]))
                    else:
                        worst_off = max(worst_off, abs(val)
                                        / math.sqrt(abs(norms[j] * norms[k])))
        rows.append(row_exact("laguerre-orthogonality-T%g" % T, 0.0,
                              worst_off, tol))
        rows.append(row_exact("laguerre-norms-T%g" % T, 0.0, worst_norm, tol))
    return rows


def check_diffusive_covariance(seed=0, workers=1, tol=1e-6):
    rows = []
    for T in (0.5, 1.0, 2.0):
        rows.append(row_exact("diffusive-var11-T%g" % T, T,
                              largetime.covariance_single(1, 1, 1, 1, T), 1e-10))
    worst_pq = worst_ps = 0.0
    for n1 in range(1, 7):
        for r1 in range(1, min(3, n1) + 1):
            for n2 in range(1, n1 + 1):
                for r2 in range(1, min(3, n2) + 1):
                    k1, k2 = n1 + 1 - r1, n2 + 1 - r2
                    s = largetime.covariance_single(k1, n1, k2, n2, 1.0,
                                                    method="series")
                    p = largetime.covariance_single(k1, n1, k2, n2, 1.0,
                                                    method="polynomial")
                    qd = largetime.covariance_single(k1, n1, k2, n2, 1.0,
                                                     method="quadruple")
                    worst_ps = max(worst_ps, abs(p - s))
                    worst_pq = max(worst_pq, abs(qd - p))
    rows.append(row_exact("diffusive-polynomial-vs-series", 0.0, worst_ps, tol))
    rows.append(row_exact("diffusive-quadruple-vs-polynomial", 0.0, worst_pq,
                          tol))
    worst_mc = 0.0
    for n1 in range(1, 7):
        for r1 in (1, 2):
            for n2 in range(1, n1 + 1):
                for r2 in (1, 2):
                    if r1 + r2 > 4 or r1 > n1 or r2 > n2:
                        continue
                    m = largetime.covariance_block(n1, r1, n2, r2, 1.0,
                                                   method="multicontour")
                    p = largetime.covariance_block(n1, r1, n2, r2, 1.0,
                                                   method="polynomial")
                    worst_mc = max(worst_mc, abs(m - p))
    rows.append(row_exact("diffusive-multicontour-vs-polynomial", 0.0,
                          worst_mc, tol))
    scale = largetime.covariance_single(2, 3, 1, 2, 2.5) \
        - 2.5 * largetime.covariance_single(2, 3, 1, 2, 1.0)
    rows.append(row_exact("diffusive-scaling-T-vs-1", 0.0, abs(scale), 1e-8))
    return rows


def check_propagator(seed=0, workers=1):
    N, T0, T = 6, 1.0, 2.5
    closed = largetime.propagator_matrix(T0, T, N)
    numeric = largetime.propagator_numeric(T0, T, N)
    rows = [row_exact("propagator-closed-vs-ode", 0.0,
                      float(np.abs(closed - numeric).max()), 1e-6)]
    ident = largetime.propagator_matrix(T0, T0, N)
    rows.append(row_exact("propagator-identity-at-T0", 0.0,
                          float(np.abs(ident - np.eye(ident.shape[0])).max()),
                          1e-12))
    rows.append(row_exact("propagator-row-sums", 0.0,
                          float(np.abs(closed.sum(axis=1) - 1.0).max()), 1e-10))
    rows.append(CheckRow(quantity="propagator-nonnegative", expected=1.0,
                         estimate=1.0 if closed.min() >= 0 else 0.0, tol=0.0,
                         passed=closed.min() >= 0))
    # flow property: propagate T0 -> 1.7, then 1.7 -> T
    semi = largetime.propagator_matrix(1.7, T, N) @ \
        largetime.propagator_matrix(T0, 1.7, N)
    rows.append(row_exact("propagator-semigroup", 0.0,
                          float(np.abs(semi - closed).max()), 1e-8))
    return rows


def check_two_time(seed, workers=1, replicas=10_000, z_max=4.0):
    N, T0, T, dt = 6, 1.0, 2.0, 1e-3
    cov0 = largetime.covariance_matrix(N, T0)
    Y = largetime.propagator_matrix(T0, T, N)
    target = Y @ cov0
    rows = [row_exact("two-time-brownian-coordinate", T0,
                      float(target[0, 0]), 1e-12)]
    rng = np.random.default_rng(seed)
    X0 = fluctuations.sample_gaussian(cov0, replicas, rng)
    _, snaps = largetime.simulate_diffusive_sde(N, T0, T, dt, replicas, rng,
                                                init_state=X0)
    X1 = snaps[-1]
    X0c = X0 - X0.mean(axis=0)
    X1c = X1 - X1.mean(axis=0)
    C = X1c.T @ X0c / (replicas - 1)
    v1 = X1c.var(axis=0, ddof=1)
    v0 = X0c.var(axis=0, ddof=1)
    worst = 0.0
    for i in range(C.shape[0]):
        for j in range(C.shape[1]):
            se = math.sqrt((v1[i] * v0[j] + C[i, j] ** 2) / (replicas - 1))
            worst = max(worst, abs(C[i, j] - target[i, j]) / se)
    rows.append(CheckRow(quantity="two-time-mc-max-z", expected=0.0,
                         estimate=worst, tol=z_max, passed=worst <= z_max))
    return rows


TREND_GRID = [
    (1.0, 0.3, 0.7, 0.6), (1.0, 0.2, 0.8, 0.5), (1.0, 0.4, 0.6, 0.7),
    (1.0, 0.5, 0.9, 0.8), (1.0, 0.3, 0.5, 0.4), (1.0, 0.6, 0.8, 0.7),
    (1.0, 0.4, 1.0, 0.6), (1.0, 0.2, 0.6, 0.3), (1.0, 0.5, 0.8, 0.5),
    (1.0, 0.7, 0.9, 0.4),
]


def check_limit_trend(seed=0, workers=1, agree_tol=1e-6):
    rows = []
    worst = 0.0
    for d, a, c, b in TREND_GRID:
        ell = asymptotics.limit_covariance_elliptic(d, a, c, b)
        integ = asymptotics.limit_covariance_integral(d, a, c, b)
        worst = max(worst, abs(ell - integ))
    rows.append(row_exact("limit-integral-vs-elliptic", 0.0, worst, agree_tol))
    # trend against the proof-derived normalization (the statement's prefactor
    # carries a documented factor-2-per-block slip; see
    # asymptotics.fast_manifold_block_constant)
    improving = 0
    ratios = []
    for d, a, c, b in TREND_GRID:
        derived = asymptotics.limit_covariance_derived(d, a, c, b)
        errs = []
        v = None
        for N in (50, 100, 200):
            k1, n1 = round((1 - a) * d * N), round(d * N)
            k2, n2 = round((1 - b) * c * N), round(c * N)
            v = N * largetime.covariance_single(k1, n1, k2, n2, 1.0)
            errs.append(abs(v - derived))
        ratios.append(asymptotics.limit_covariance_elliptic(d, a, c, b) / v)
        if errs[0] > errs[1] > errs[2]:
            improving += 1
    rows.append(CheckRow(quantity="finite-N-trend-improving", expected=8.0,
                         estimate=float(improving), tol=8.0,
                         passed=improving >= 8))
    # document, do not hide, the statement-vs-derived normalization gap:
    # exact finite-N values sit a factor ~4 under the printed limit, matching
    # the per-block identity value 2 (printed as 4)
    mean_ratio = float(np.mean(ratios))
    rows.append(CheckRow(quantity="statement-over-finite-N-ratio", expected=4.0,
                         estimate=mean_ratio, tol=0.2,
                         passed=abs(mean_ratio - 4.0) <= 0.2))
    block = asymptotics.fast_manifold_block_constant(0.35, 0.4 + 0.5j)
    rows.append(row_exact("fast-manifold-block-constant", 2.0,
                          float(block.real), 1e-10))
    rows.append(row_exact("fast-manifold-block-constant-imag", 0.0,
                          float(block.imag), 1e-10))
    return rows


def check_log_law(seed=0, workers=1, variation=0.25):
    d, a = 1.0, 0.3
    vals = [asymptotics.log_remainder(d, a, gap) for gap in (1e-1, 1e-2, 1e-3)]
    spread = (max(vals) - min(vals)) / abs(np.mean(vals))
    return [CheckRow(quantity="log-law-remainder-variation", expected=0.0,
                     estimate=spread, tol=variation, passed=spread <= variation)]


def check_ew_matching(seed=0, workers=1):
    rows = [row_exact("c-function-at-0", math.log(2.0) - asymptotics.EULER_GAMMA,
                      asymptotics.c_function(0.0), 1e-10)]
    tau, r = 0.5, 1.0
    closed = asymptotics.g_tau(tau, r)
    quadr = asymptotics.g_tau_heat_average(tau, (r, 0.0))
    rows.append(row_exact("g-tau-closed-vs-quadrature", closed, quadr, 1e-6))
    R = 1.5
    c_quad = -asymptotics.g_tau_heat_average(1.0, (R, 0.0))
    rows.append(row_exact("c-function-vs-quadrature", asymptotics.c_function(R),
                          c_quad, 1e-6))
    d, a = 1.0, 0.3
    S = d * math.sqrt(a * (1 - a)) / 4.0
    T = S / (1.0 - 0.6)  # tau = 0.6
    frame = asymptotics.CharacteristicFrame(
        d=d, a=a, T=T, S=S, eta=(0.3, 0.1), lam=(-0.5, 0.4),
        mu=(0.9, -0.2), nu=(-0.1, -0.7))
    char = asymptotics.characteristic_covariance(frame)
    ew = asymptotics.ew_covariance(frame.tau, 0.0, frame.eta, frame.lam,
                                   frame.mu, frame.nu)
    rows.append(row_exact("characteristic-vs-ew", ew, char, 1e-8))
    return rows


def check_propagator_asymptotics(seed=0, workers=1, rel_tol=0.05):
    d, a, T, N = 1.0, 0.5, 2.0, 2000
    # sigma grid chosen on the exact index lattice (m / sqrt(adN)) so the
    # comparison is free of integer-rounding noise in the indices
    scale = math.sqrt(a * d * N)
    offsets = (-31, -16, 0, 16, 31)
    worst = 0.0
    for m1 in offsets:
        for m2 in offsets:
            s1, s2 = m1 / scale, m2 / scale
            log_exact = asymptotics.propagator_exact_log(d, a, T, s1, s2, N)
            asym = asymptotics.propagator_gaussian_asymptotic(d, a, T, s1, s2, N)
            ratio = math.exp(log_exact - math.log(asym))
            worst = max(worst, abs(ratio - 1.0))
    rows = [CheckRow(quantity="propagator-asymptotic-ratio", expected=0.0,
                     estimate=worst, tol=rel_tol, passed=worst <= rel_tol)]
    # total sigma-mass of the Gaussian limit (times the index-change volume)
    from numpy.polynomial.legendre import leggauss
    xs, ws = leggauss(60)
    xs, ws = 6.0 * xs, 6.0 * ws
    tau = (T - 1.0) / T
    dens = np.exp(-(xs[:, None] ** 2 + xs[None, :] ** 2) / (2 * tau)) \
        / (2 * math.pi * tau)
    mass = float(ws @ dens @ ws)
    rows.append(row_exact("propagator-asymptotic-mass", 1.0, mass, 1e-6))
    center = asymptotics.propagator_gaussian_asymptotic(d, a, T, 0.0, 0.0, N)
    off = asymptotics.propagator_gaussian_asymptotic(d, a, T, 0.7, -0.4, N)
    rows.append(CheckRow(quantity="propagator-asymptotic-peak", expected=1.0,
                         estimate=1.0 if center > off else 0.0, tol=0.0,
                         passed=center > off))
    return rows


def check_positivity_oracle(seed=0, workers=1):
    rows = []
    worst_mismatch = 0
    neg = 0
    for n in range(1, 7):
        for r in range(1, n + 1):
            dp = moments.lattice_path_partition(n, r, tau=1.0)
            det = moments.lattice_path_determinant(n, r)
            L = max(len(dp), len(det))
            dp = dp + [0] * (L - len(dp))
            det = det + [0] * (L - len(det))
            if dp != det:
                worst_mismatch += 1
            if any(c < 0 for c in det):
                neg += 1
    rows.append(CheckRow(quantity="lgv-dp-equals-determinant", expected=0.0,
                         estimate=float(worst_mismatch), tol=0.0,
                         passed=worst_mismatch == 0))
    rows.append(CheckRow(quantity="lgv-coefficients-nonnegative", expected=0.0,
                         estimate=float(neg), tol=0.0, passed=neg == 0))
    from fractions import Fraction
    alphas = (Fraction(1, 4), Fraction(1, 3))
    dp_a = moments.lattice_path_partition(4, 2, alphas=alphas)
    det_a = moments.lattice_path_determinant(4, 2, alphas=alphas)
    rows.append(CheckRow(quantity="lgv-alpha-dp-equals-determinant",
                         expected=float(det_a), estimate=float(dp_a), tol=0.0,
                         passed=dp_a == det_a))
    return rows


def check_figure_scale(seed, workers=1):
    N, eps = 20, 0.01
    params = ModelParams(eps=eps, a=(1.0,) * N, spec=Plancherel(10.0 / eps))
    rng = random.Random(seed)
    t0 = time.time()
    traj = dynamics.simulate_pushblock_continuous(
        InterlacingArray.packed(N), params, 10.0 / eps,
        [1.0 / eps, 10.0 / eps], rng)
    elapsed = time.time() - t0
    prof = moments.lln_profile(N, tau=1.0)
    st = traj.states[0]
    worst = max(abs(eps * st.get(n, k) - prof.x(n, k))
                for n in range(1, N + 1) for k in range(1, n + 1))
    bound = 5.0 * math.sqrt(eps)
    rows = [row_exact("figure-scale-lln-uniform", 0.0, worst, bound),
            CheckRow(quantity="figure-scale-interlaces", expected=1.0,
                     estimate=1.0 if all(s.validate() for s in traj.states)
                     else 0.0, tol=0.0,
                     passed=all(s.validate() for s in traj.states)),
            _runtime_row("figure-scale", elapsed, 300.0)]
    return rows


CHECKS = {
    "poisson-corner": check_poisson_corner,
    "moment-cross-check": check_moment_cross,
    "dynamics-equivalence": check_dynamics_equivalence,
    "lln-triple": check_lln_triple,
    "lln-ode": check_lln_ode,
    "scaled-convergence": check_scaled_convergence,
    "fluctuation-covariance": check_fluctuation_covariance,
    "orthogonal-polynomials": check_orthogonal_polynomials,
    "diffusive-covariance-methods": check_diffusive_covariance,
    "propagator": check_propagator,
    "two-time": check_two_time,
    "limit-trend": check_limit_trend,
    "log-law": check_log_law,
    "ew-matching": check_ew_matching,
    "propagator-asymptotics": check_propagator_asymptotics,
    "positivity-oracle": check_positivity_oracle,
    "figure-scale": check_figure_scale,
}


def check_names():
    return list(CHECKS)


def run_check(name, seed=0, workers=1, overrides=None, tolerances=None):
    if name not in CHECKS:
        raise KeyError("unknown check %r (have: %s)" % (name, ", ".join(CHECKS)))
    kwargs = {"seed": seed, "workers": workers}
    kwargs.update(overrides or {})
    if tolerances:
        for key, val in tolerances.items():
            if key in CHECKS[name].__code__.co_varnames:
                kwargs[key] = val
    return CHECKS[name](**kwargs)
