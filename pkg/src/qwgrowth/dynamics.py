"""Event-driven simulation of the interlacing-array dynamics.

Continuous time (Plancherel): push-block, RSK, and right-push variants, all
next-event schemes over exponential clocks. Discrete time (alpha): push-block
and RSK steps. Every dynamic preserves interlacing; simulators assert it on
sampled states. One trajectory is single threaded; ensembles are run as
shared-nothing replicas by the harness.
"""

import struct
from dataclasses import dataclass, field

from .qcore import (InterlacingArray, ModelParams, Plancherel,
                    phi_psi_weights, q_hahn_weights, sample_q_geometric)

SNAPSHOT_MAGIC = b"QWGT"
SNAPSHOT_VERSION = 1


@dataclass
class Trajectory:
    """States of one run recorded at the requested sample times."""

    times: list
    states: list
    seed: object = None
    params: ModelParams = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        """Rows (time, n, k, value), one per coordinate per sample time."""
        with open(path, "w") as fh:
            fh.write("time,n,k,value\n")
            for t, st in zip(self.times, self.states):
                for n in range(1, st.N + 1):
                    for k in range(1, n + 1):
                        fh.write("%.17g,%d,%d,%d\n" % (t, n, k, st.get(n, k)))

    def to_binary(self, path):
        """Compact snapshot: magic, u32 version, u64 N, u64 sample count,
        then per sample a little-endian f64 time and N(N+1)/2 i64 entries in
        level-major order."""
        N = self.states[0].N if self.states else 0
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack("<I", SNAPSHOT_VERSION))
            fh.write(struct.pack("<QQ", N, len(self.times)))
            for t, st in zip(self.times, self.states):
                fh.write(struct.pack("<d", float(t)))
                flat = st.flatten()
                fh.write(struct.pack("<%dq" % len(flat), *flat))

    @classmethod
    def from_binary(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != SNAPSHOT_MAGIC:
                raise ValueError("bad snapshot magic %r" % magic)
            (version,) = struct.unpack("<I", fh.read(4))
            if version != SNAPSHOT_VERSION:
                raise ValueError("unsupported snapshot version %d" % version)
            N, count = struct.unpack("<QQ", fh.read(16))
            M = N * (N + 1) // 2
            times, states = [], []
            for _ in range(count):
                (t,) = struct.unpack("<d", fh.read(8))
                flat = struct.unpack("<%dq" % M, fh.read(8 * M))
                levels, pos = [], 0
                for n in range(1, N + 1):
                    levels.append(list(flat[pos:pos + n]))
                    pos += n
                times.append(t)
                states.append(InterlacingArray(levels))
        return cls(times=times, states=states)


def _require_plancherel(params):
    if not isinstance(params.spec, Plancherel):
        raise ValueError("continuous dynamics need a Plancherel specialization")


def pushblock_rates(state, params):
    """Jump rates R^(n)_k; zero exactly at blocked coordinates."""
    q, a = params.q, params.a
    rates = []
    for n in range(1, state.N + 1):
        row = []
        for k in range(1, n + 1):
            row.append(_rate(state, q, a, n, k))
        rates.append(row)
    return rates


def _rate(lam, q, a, n, k):
    v = lam.levels[n - 1][k - 1]
    below_left = lam.get(n - 1, k - 1)
    e1 = 0.0 if below_left == float("inf") else q ** (below_left - v)
    e2 = q ** (v - lam.get(n, k + 1) + 1)
    e3 = q ** (v - lam.get(n - 1, k) + 1)
    return a[n - 1] * (1.0 - e1) * (1.0 - e2) / (1.0 - e3)


class _Recorder:
    """Emits state copies at the requested sample times as time advances."""

    def __init__(self, sample_times):
        self.sample_times = sorted(float(t) for t in sample_times)
        self.idx = 0
        self.times = []
        self.states = []

    def advance(self, t_new, state):
        while self.idx < len(self.sample_times) and self.sample_times[self.idx] <= t_new:
            st = state.copy()
            assert st.validate(), "sampled state broke interlacing"
            self.times.append(self.sample_times[self.idx])
            self.states.append(st)
            self.idx += 1


def simulate_pushblock_continuous(init, params, horizon, sample_times, rng):
    """Exact next-event simulation of the continuous push-block dynamic."""
    _require_plancherel(params)
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if not init.validate():
        raise ValueError("initial state does not interlace")
    lam = init.copy()
    N = lam.N
    q, a = params.q, params.a
    rates = [[_rate(lam, q, a, n, k) for k in range(1, n + 1)] for n in range(1, N + 1)]
    rec = _Recorder(sample_times)
    t = 0.0
    while True:
        total = sum(sum(row) for row in rates)
        if total <= 0.0:
            rec.advance(horizon, lam)
            break
        dt = rng.expovariate(total)
        t_next = t + dt
        rec.advance(min(t_next, horizon), lam)
        if t_next >= horizon:
            break
        t = t_next
        u = rng.random() * total
        acc = 0.0
        n_j = k_j = None
        for n in range(1, N + 1):
            row = rates[n - 1]
            s = sum(row)
            if acc + s >= u:
                for k in range(1, n + 1):
                    acc += row[k - 1]
                    if acc >= u:
                        n_j, k_j = n, k
                        break
                break
            acc += s
        if n_j is None:  # fp roundoff at the top of the cumulative scan
            n_j = N
            k_j = max(k for k in range(1, N + 1) if rates[N - 1][k - 1] > 0)
        # push the longest equal string above
        v = lam.levels[n_j - 1][k_j - 1]
        top = n_j
        while top + 1 <= N and k_j <= top + 1 and lam.levels[top][k_j - 1] == v:
            top += 1
        for m in range(n_j, top + 1):
            lam.levels[m - 1][k_j - 1] += 1
        # refresh the rates that can see the changed coordinates
        for m in range(max(1, n_j - 1), min(N, top + 1) + 1):
            for kk in (k_j - 1, k_j, k_j + 1):
                if 1 <= kk <= m:
                    rates[m - 1][kk - 1] = _rate(lam, q, a, m, kk)
    return Trajectory(times=rec.times, states=rec.states, params=params)


def simulate_rightpush_continuous(init, params, horizon, sample_times, rng):
    """Right-push variant: k = 1 jumps at rate a_n q^(lam^(n-1)_1 - lam^(n)_2)
    and drags the whole first column above; k >= 2 behaves as push-block."""
    _require_plancherel(params)
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    lam = init.copy()
    N = lam.N
    q, a = params.q, params.a

    def rate(n, k):
        if k == 1:
            return a[n - 1] * q ** (lam.get(n - 1, 1) - lam.get(n, 2))
        return _rate(lam, q, a, n, k)

    rates = [[rate(n, k) for k in range(1, n + 1)] for n in range(1, N + 1)]
    rec = _Recorder(sample_times)
    t = 0.0
    while True:
        total = sum(sum(row) for row in rates)
        if total <= 0.0:
            rec.advance(horizon, lam)
            break
        dt = rng.expovariate(total)
        t_next = t + dt
        rec.advance(min(t_next, horizon), lam)
        if t_next >= horizon:
            break
        t = t_next
        u = rng.random() * total
        acc = 0.0
        n_j = k_j = None
        for n in range(1, N + 1):
            for k in range(1, n + 1):
                acc += rates[n - 1][k - 1]
                if acc >= u:
                    n_j, k_j = n, k
                    break
            if n_j:
                break
        if n_j is None:
            n_j, k_j = N, 1
        if k_j == 1:
            for m in range(n_j, N + 1):
                lam.levels[m - 1][0] += 1
            lo, hi = max(1, n_j - 1), N
        else:
            v = lam.levels[n_j - 1][k_j - 1]
            top = n_j
            while top + 1 <= N and lam.levels[top][k_j - 1] == v:
                top += 1
            for m in range(n_j, top + 1):
                lam.levels[m - 1][k_j - 1] += 1
            lo, hi = max(1, n_j - 1), min(N, top + 1)
        for m in range(lo, hi + 1):
            for kk in (k_j - 1, k_j, k_j + 1):
                if 1 <= kk <= m:
                    rates[m - 1][kk - 1] = rate(m, kk)
    return Trajectory(times=rec.times, states=rec.states, params=params)


def _rsk_cascade(lam, n_from, k_from, q, rng):
    """Propagate a jump at (n_from, k_from) upward level by level."""
    N = lam.N
    n = n_from
    k = k_from
    while n + 1 <= N:
        target_level = n + 1
        cur = lam.levels[n - 1][k - 1]          # post-jump value at level n
        prev = cur - 1                           # pre-jump value
        upper = lam.levels[target_level - 1]
        below_left = lam.get(n, k - 1)           # pre-jump; k-1 < k unchanged
        if below_left == float("inf"):
            p = q ** (upper[k - 1] - prev)
        else:
            p = q ** (upper[k - 1] - prev) * (1 - q ** (below_left - upper[k - 1])) \
                / (1 - q ** (below_left - prev))
        if rng.random() < p:
            # push the largest index <= k that can move against the new level n
            j = None
            for cand in range(k, 0, -1):
                if upper[cand - 1] < lam.get(n, cand - 1):
                    j = cand
                    break
            assert j is not None, "RSK transfer found no pushable index"
        else:
            j = k + 1
            # always admissible: lam^(n+1)_(k+1) <= pre-jump lam^(n)_k < cur
            assert upper[j - 1] < cur, "RSK insertion target blocked"
        upper[j - 1] += 1
        n, k = target_level, j


def simulate_rsk_continuous(init, params, horizon, sample_times, rng):
    """RSK variant: only the first column carries independent clocks (rate
    a_n); each ring triggers a single stochastic transfer at every level
    above."""
    _require_plancherel(params)
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    lam = init.copy()
    N = lam.N
    q, a = params.q, params.a
    total = sum(a[:N])
    rec = _Recorder(sample_times)
    t = 0.0
    while True:
        dt = rng.expovariate(total)
        t_next = t + dt
        rec.advance(min(t_next, horizon), lam)
        if t_next >= horizon:
            break
        t = t_next
        u = rng.random() * total
        acc = 0.0
        n0 = N
        for n in range(1, N + 1):
            acc += a[n - 1]
            if acc >= u:
                n0 = n
                break
        lam.levels[n0 - 1][0] += 1
        _rsk_cascade(lam, n0, 1, q, rng)
    return Trajectory(times=rec.times, states=rec.states, params=params)


# ---------------------------------------------------------------------------
# discrete-time alpha dynamics
# ---------------------------------------------------------------------------

ALPHA_TAIL_MASS = 1e-12


def _alpha_level_weights(lower_new, level_old, a_n, alpha_t, q):
    """Support and weights of the level update given the refreshed lower level.

    Weight of nu is phi_{nu/level_old} psi_{nu/lower_new} (a alpha)^{|nu|}
    over nu interlacing above both; the unbounded first part is truncated
    once the residual geometric tail is below ALPHA_TAIL_MASS.
    """
    mu = level_old                      # old level n, length n
    lam = lower_new                     # refreshed level n-1, length n-1
    n = len(mu)
    lo = [max(mu[k], lam[k] if k < n - 1 else 0) for k in range(n)]
    hi = [None] + [min(mu[k - 1], lam[k - 1]) for k in range(1, n)]
    x = a_n * alpha_t

    def weight(nu):
        phi, _ = phi_psi_weights(nu, mu, q)
        _, psi = phi_psi_weights(nu, lam, q)
        return phi * psi * x ** (sum(nu) - sum(mu))

    support, weights = [], []

    def scan_first_part(prefix):
        # prefix holds (nu_2, ..., nu_n); extend nu_1 until the tail is dead
        lo1 = max(lo[0], prefix[0] if prefix else 0)
        w_prev = None
        total_here = 0.0
        j = lo1
        while True:
            nu = (j,) + prefix
            w = weight(nu)
            support.append(nu)
            weights.append(w)
            total_here += w
            if w_prev is not None and w <= w_prev \
                    and w < ALPHA_TAIL_MASS * max(total_here, 1e-300):
                return
            if j - lo1 > 500:
                raise RuntimeError("alpha-step support truncation ran away")
            w_prev = w
            j += 1

    def rec(k, prefix):
        # choose nu_k for k from n down to 2, largest parts last
        if k == 1:
            scan_first_part(prefix)
            return
        cap = hi[k - 1]
        if prefix:
            cap = min(cap, prefix[0])
        for v in range(lo[k - 1], cap + 1):
            rec(k - 1, (v,) + prefix)

    rec(n, ())
    return support, weights


def step_pushblock_alpha(state, params, alpha_t, rng):
    """One discrete push-block step with parameter alpha_t, level by level."""
    q, a = params.q, params.a
    for a_n in a[: state.N]:
        if not a_n * alpha_t < 1:
            raise ValueError("inadmissible alpha step: a_n * alpha_t >= 1")
    new_levels = []
    lower = []
    for n in range(1, state.N + 1):
        support, weights = _alpha_level_weights(lower, state.levels[n - 1],
                                                a[n - 1], alpha_t, q)
        total = sum(weights)
        u = rng.random() * total
        acc = 0.0
        pick = support[-1]
        for nu, w in zip(support, weights):
            acc += w
            if acc >= u:
                pick = nu
                break
        lower = list(pick)
        new_levels.append(lower)
    out = InterlacingArray(new_levels)
    assert out.validate(), "alpha push-block step broke interlacing"
    return out


def step_rsk_alpha(state, params, alpha_t, rng):
    """One discrete RSK step: q-geometric inputs at the first parts and
    inverse-parameter q-Hahn transfers of the lower-level increments."""
    q, a = params.q, params.a
    N = state.N
    for a_n in a[:N]:
        if not a_n * alpha_t < 1:
            raise ValueError("inadmissible alpha step: a_n * alpha_t >= 1")
    new_levels = []
    for n in range(1, N + 1):
        lam_n = state.levels[n - 1]
        v_n = sample_q_geometric(q, alpha_t * a[n - 1], rng)
        if n == 1:
            new_levels.append([lam_n[0] + v_n])
            continue
        lam_low = state.levels[n - 2]
        nu_low = new_levels[n - 2]
        c = [nu_low[k] - lam_low[k] for k in range(n - 1)]
        w = []
        for k in range(1, n):
            ck = c[k - 1]
            if ck == 0:
                w.append(0)
                continue
            a_exp = lam_n[k - 1] - lam_low[k - 1]
            b_exp = (lam_low[k - 2] - lam_low[k - 1]) if k >= 2 else None
            xi = q ** a_exp
            eta = 0.0 if b_exp is None else q ** b_exp
            weights = q_hahn_weights(1.0 / q, xi, eta, ck)
            u = rng.random()
            cum = 0.0
            pick = ck
            for s, p in enumerate(weights):
                cum += p
                if u <= cum:
                    pick = s
                    break
            w.append(pick)
        nu = [0] * n
        nu[0] = lam_n[0] + w[0] + v_n
        for k in range(2, n + 1):
            wk = w[k - 1] if k <= n - 1 else 0
            nu[k - 1] = lam_n[k - 1] + wk + c[k - 2] - w[k - 2]
        new_levels.append(nu)
    out = InterlacingArray(new_levels)
    assert out.validate(), "alpha RSK step broke interlacing"
    return out


def run_alpha_chain(N, params, alphas, rng, step=step_pushblock_alpha):
    """Apply the discrete steps for each alpha_t in order, from packed."""
    state = InterlacingArray.packed(N)
    for al in alphas:
        state = step(state, params, al, rng)
    return state
