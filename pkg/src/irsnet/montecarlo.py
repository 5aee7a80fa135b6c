"""
Monte-Carlo oracle for the analytic pipeline.

Every snapshot places the typical user at the origin and evaluates the
received powers from exact 3-D geometry. Two simulators are provided:

* ``simulate_snapshot`` draws every complex element channel and applies the
  actual IRS phase shifts. It is slow and meant for small checks.
* ``simulate_batch`` is the workhorse. It draws the same distributions but
  uses exact reductions of the cascaded gains (see ``_irs_field``) and can
  replace the weakest IRS-BS pairs by their conditional mean.

Interfering IRSs use phases chosen for their own users. Toward the typical
user these act as independent uniform phases, so the "random" interferer
mode draws them that way. The "aligned" mode zeroes every residual phase
(the worst case).
"""

import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import geometry, signal
from .channel import sample_cn
from .interference import worst_case_ir_bound
from .metrics import Conditioning, median_conditioning
from .rng import as_generator, stream

COLUMNS = ("S_R0", "S_D0", "I_B", "I_R", "I_B_hat", "I_R_hat")
PHASE_MODES = ("aligned", "random")
_MAGIC = b"IRSNETB1"


def thread_count(default=1):
    """Worker threads for batch simulation; IRSNET_THREADS overrides."""
    v = os.environ.get("IRSNET_THREADS")
    if v is None:
        return default
    try:
        n = int(v)
    except ValueError:
        raise ValueError(f"IRSNET_THREADS must be an integer, got {v!r}") from None
    return max(1, n)


# ---------------------------------------------------------------------------
# full-channel snapshot
# ---------------------------------------------------------------------------

@dataclass
class NetworkRealization:
    bs_points: np.ndarray           # (B, 2) planar positions
    irs_points: np.ndarray          # (M, 2)
    direct_fading: np.ndarray       # (B,) complex BS-user channels
    irs_user: np.ndarray            # (M, N) complex IRS-user channels
    phases: list                    # PhaseConfig per IRS
    serving_bs_index: int
    nearest_irs_index: int
    powers: dict = field(default_factory=dict)


def _place_conditioned(cfg, cond, rng, irs_inner):
    """BS field beyond ell0 plus BS0 at ell0; IRS field beyond irs_inner plus one IRS on it."""
    ell0 = cond.ell0(cfg)
    a = rng.random() * 2 * math.pi
    bs0 = np.array([[ell0 * math.cos(a), ell0 * math.sin(a)]])
    bs = np.vstack([bs0, geometry.sample_ppp_disk(cfg.lambda_B, cfg.R, rng, r_in=ell0)])
    if irs_inner is None:
        irs = geometry.sample_bpp_disk(cfg.M, cfg.R, rng)
    else:
        b = rng.random() * 2 * math.pi
        irs0 = np.array([[irs_inner * math.cos(b), irs_inner * math.sin(b)]])
        irs = np.vstack([irs0, geometry.sample_annulus(cfg.M - 1, irs_inner, cfg.R, rng)])
    return bs, irs


def simulate_snapshot(cfg, rng, cond=None, bs_points=None, irs_points=None):
    """One network draw with explicit element channels and phases.

    Powers (W) land in ``powers``: S_R0, S_D0, I_B, I_R, I_B_hat, I_R_hat
    and I_R_bound (the worst-case value on the same channels). The direct
    user shares this geometry. Point sets may be given explicitly; an empty
    IRS set yields zero IRS interference.
    """
    rng = as_generator(rng)
    dp = cfg.deployment
    if bs_points is None or irs_points is None:
        if cond is not None:
            bs, irs = _place_conditioned(cfg, cond, rng, cond.ell00(cfg))
        else:
            bs = geometry.sample_ppp_disk(cfg.lambda_B, cfg.R, rng)
            irs = geometry.sample_bpp_disk(cfg.M, cfg.R, rng)
        bs_points = bs if bs_points is None else bs_points
        irs_points = irs if irs_points is None else irs_points
    bs = np.asarray(bs_points, dtype=float).reshape(-1, 2)
    irs = np.asarray(irs_points, dtype=float).reshape(-1, 2)
    if len(bs) == 0:
        raise ValueError("snapshot needs at least one BS")
    N, a = cfg.N, cfg.alpha
    d = np.hypot(bs[:, 0], bs[:, 1]) ** 2 + cfg.H_B ** 2
    j0 = int(np.argmin(d))
    d = np.sqrt(d)
    h = sample_cn(rng, len(bs))
    gain = cfg.beta_gain ** 2
    hp = np.abs(h) ** 2 * d ** (-a)
    others = np.arange(len(bs)) != j0
    pw = {
        "S_D0": cfg.P_hat * gain * hp[j0],
        "I_B": cfg.P * gain * hp[others].sum(),
        "I_B_hat": cfg.P_hat * gain * hp[others].sum(),
    }
    M = len(irs)
    g = sample_cn(rng, (M, N))
    if M == 0:
        pw.update(S_R0=0.0, I_R=0.0, I_R_hat=0.0, I_R_bound=0.0)
        return NetworkRealization(bs, irs, h, g, [], j0, -1, pw)
    r = np.sqrt(np.hypot(irs[:, 0], irs[:, 1]) ** 2 + cfg.H_R ** 2)
    m0 = int(np.argmin(r))
    t = geometry.cascade_distance(irs, bs, dp)
    phases = []
    f0 = sample_cn(rng, N)
    ph0 = signal.optimal_phases(-np.angle(g[m0]), -np.angle(f0))
    geo = signal.CascadeGeometry(float(r[m0]), float(t[m0, j0]), a, cfg.P, cfg.beta_gain)
    s_r0 = float(signal.signal_power(g[m0], f0, ph0, geo))
    # interference: random-phase (own-user optimal) powers and the aligned bound
    ir = 0.0
    ir_direct_m0 = 0.0
    g_abs = np.abs(g)
    f_abs = np.empty((M, len(bs), N))
    for m in range(M):
        f = sample_cn(rng, (len(bs), N))
        w = r[m] ** (-a) * t[m] ** (-a)
        if m == m0:
            f[j0] = f0
            phases.append(ph0)
            # a direct user sees the nearest IRS with phases not aimed at it
            th = signal.random_phases(N, rng).thetas
            ir_direct_m0 = float(np.sum(w * np.abs(f @ (g[m] * np.exp(1j * th))) ** 2))
        else:
            phases.append(signal.random_phases(N, rng))
            ir += float(np.sum(w * np.abs(f @ (g[m] * np.exp(1j * phases[m].thetas))) ** 2))
        f_abs[m] = np.abs(f)
    keep = np.arange(M) != m0
    bound = worst_case_ir_bound(r[keep], t[keep], g_abs[keep], f_abs[keep], cfg.P, a, cfg.beta_gain)
    pw.update(S_R0=s_r0, I_R=cfg.P * gain * ir, I_R_bound=bound,
              I_R_hat=cfg.P_hat * gain * (ir + ir_direct_m0))
    return NetworkRealization(bs, irs, h, g, phases, j0, m0, pw)


# ---------------------------------------------------------------------------
# fast batch simulator
# ---------------------------------------------------------------------------

@dataclass
class TrialBatch:
    n_trials: int
    seed: int
    scenario_hash: str
    columns: dict                   # name -> float64 array of length n_trials
    tail_fraction: float = 0.0      # mean share of IRS interference taken at its mean
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in COLUMNS:
            v = np.asarray(self.columns.get(k, np.zeros(self.n_trials)), dtype=float)
            if v.shape != (self.n_trials,):
                raise ValueError(f"column {k} has shape {v.shape}")
            if np.any(v < 0):
                raise ValueError(f"column {k} has negative powers")
            self.columns[k] = v

    def __getitem__(self, k):
        return self.columns[k]

    def sinr(self, mode, noise, scale=1.0):
        if mode == "indirect":
            return self["S_R0"] / (self["I_B"] + self["I_R"] + noise)
        if mode == "direct":
            return scale * self["S_D0"] / (self["I_B_hat"] + self["I_R_hat"] + noise)
        raise ValueError(f"unknown mode {mode!r}")

    # little-endian layout: magic, u32 version, u64 seed, 16-byte scenario
    # hash, u64 n_trials, f64 tail_fraction, u32 length + UTF-8 JSON of meta,
    # then six float64 columns in COLUMNS order
    _HEAD = "<IQ16sQdI"

    def save(self, path):
        h = self.scenario_hash.encode("ascii")[:16].ljust(16, b"\0")
        m = json.dumps(self.meta).encode()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack(self._HEAD, 2, self.seed, h, self.n_trials, self.tail_fraction, len(m)))
            fh.write(m)
            for k in COLUMNS:
                fh.write(self.columns[k].astype("<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                raise ValueError(f"{path}: not a trial batch file")
            head = fh.read(struct.calcsize(cls._HEAD))
            if len(head) != struct.calcsize(cls._HEAD):
                raise ValueError(f"{path}: truncated header")
            ver, seed, h, n, tail, mlen = struct.unpack(cls._HEAD, head)
            if ver != 2:
                raise ValueError(f"{path}: unsupported version {ver}")
            meta = json.loads(fh.read(mlen).decode())
            cols = {}
            for k in COLUMNS:
                buf = fh.read(8 * n)
                if len(buf) != 8 * n:
                    raise ValueError(f"{path}: truncated column {k}")
                cols[k] = np.frombuffer(buf, dtype="<f8").astype(float)
        return cls(n, seed, h.rstrip(b"\0").decode("ascii"), cols, tail, meta)


def _irs_field(w, N, rng, phase_mode, tol):
    """sum_{m,j} w[m, j] Y[m, j] for one snapshot.

    Rows are IRSs. All pairs of one IRS share its channel to the user, so
    the draw keeps that dependence. Aligned: Y = (sum_n |g_n||f_n|)^2.
    Random: given g, sum_n g_n f_n e^{j theta_n} is CN(0, sum|g|^2), so
    Y = sum|g|^2 Exp(1) exactly. Pairs with w below tol * max(w) enter
    through E[Y | g]. Returns (value, tail mean share).
    """
    if w.size == 0:
        return 0.0, 0.0
    M, B = w.shape
    if phase_mode == "aligned":
        g = np.sqrt(rng.standard_exponential((M, N)))
        A, Bsq = g.sum(1), (g * g).sum(1)
        cmean = (math.pi / 4) * A * A + (1 - math.pi / 4) * Bsq
    elif phase_mode == "random":
        cmean = rng.standard_gamma(N, M)
    else:
        raise ValueError(f"unknown phase mode {phase_mode!r}")
    exact = w >= tol * w.max() if tol > 0 else np.ones_like(w, dtype=bool)
    mi, _ = np.nonzero(exact)
    we = w[exact]
    if phase_mode == "aligned":
        f = np.sqrt(rng.standard_exponential((len(mi), N)))
        y = np.einsum("kn,kn->k", g[mi], f) ** 2
    else:
        y = cmean[mi] * rng.standard_exponential(len(mi))
    tail_w = np.where(exact, 0.0, w).sum(1)
    tail = float(np.dot(cmean, tail_w))
    val = float(np.dot(we, y)) + tail
    total_mean = float(np.dot(cmean, w.sum(1)))
    return val, (tail / total_mean if total_mean > 0 else 0.0)


def _pair_weights(user_r, irs, bs, cfg):
    """r^-alpha t^-alpha for every (IRS, BS) pair; t from the Gram identity."""
    a = cfg.alpha
    gap2 = (cfg.H_B - cfg.H_R) ** 2
    t2 = (irs * irs).sum(1)[:, None] + (bs * bs).sum(1)[None, :] - 2 * irs @ bs.T + gap2
    np.maximum(t2, gap2, out=t2)
    return user_r[:, None] ** (-a) * t2 ** (-a / 2)


def _one_trial(cfg, cond, rng, phase_mode, tol, modes, t0_rule):
    a, N = cfg.alpha, cfg.N
    gain = cfg.beta_gain ** 2
    out = dict.fromkeys(COLUMNS, 0.0)
    tails = []
    if cond is None:
        bs = geometry.sample_ppp_disk(cfg.lambda_B, cfg.R, rng)
        while len(bs) == 0:
            bs = geometry.sample_ppp_disk(cfg.lambda_B, cfg.R, rng)
        d = np.sqrt((bs * bs).sum(1) + cfg.H_B ** 2)
        j0 = int(np.argmin(d))
        bs = np.vstack([bs[j0:j0 + 1], np.delete(bs, j0, axis=0)])
        d = np.concatenate([d[j0:j0 + 1], np.delete(d, j0)])
        irs = geometry.sample_bpp_disk(cfg.M, cfg.R, rng)
        r = np.sqrt((irs * irs).sum(1) + cfg.H_R ** 2)
        m0 = int(np.argmin(r))
        irs = np.vstack([irs[m0:m0 + 1], np.delete(irs, m0, axis=0)])
        r = np.concatenate([r[m0:m0 + 1], np.delete(r, m0)])
        t0 = float(np.sqrt(((irs[0] - bs[0]) ** 2).sum() + (cfg.H_B - cfg.H_R) ** 2))
        irs_direct, r_direct = irs, r
    else:
        bs, irs = _place_conditioned(cfg, cond, rng, cond.ell00(cfg))
        d = np.sqrt((bs * bs).sum(1) + cfg.H_B ** 2)
        r = np.sqrt((irs * irs).sum(1) + cfg.H_R ** 2)
        if t0_rule == "conditioned":
            t0 = cond.t0
        else:
            t0 = float(np.sqrt(((irs[0] - bs[0]) ** 2).sum() + (cfg.H_B - cfg.H_R) ** 2))
        irs_direct = r_direct = None
    pl = d ** (-a)
    if "indirect" in modes:
        amp = float(np.sqrt(rng.standard_exponential(N)) @ np.sqrt(rng.standard_exponential(N)))
        out["S_R0"] = cfg.P * gain * (r[0] * t0) ** (-a) * amp * amp
        h = rng.standard_exponential(len(bs) - 1)
        out["I_B"] = cfg.P * gain * float(np.dot(h, pl[1:]))
        if cfg.M > 1:
            val, tf = _irs_field(_pair_weights(r[1:], irs[1:], bs, cfg), N, rng, phase_mode, tol)
            out["I_R"] = cfg.P * gain * val
            tails.append(tf)
    if "direct" in modes:
        if irs_direct is None:
            irs_direct = geometry.sample_bpp_disk(cfg.M, cfg.R, rng)
            r_direct = np.sqrt((irs_direct * irs_direct).sum(1) + cfg.H_R ** 2)
        h = rng.standard_exponential(len(bs))
        out["S_D0"] = cfg.P_hat * gain * h[0] * pl[0]
        out["I_B_hat"] = cfg.P_hat * gain * float(np.dot(h[1:], pl[1:]))
        val, tf = _irs_field(_pair_weights(r_direct, irs_direct, bs, cfg), N, rng, phase_mode, tol)
        out["I_R_hat"] = cfg.P_hat * gain * val
        tails.append(tf)
    return out, tails


def _resolve_cond(cfg, cond):
    if isinstance(cond, str):
        if cond == "median":
            return median_conditioning(cfg)
        if cond == "marginal":
            return None
        raise ValueError(f"unknown conditioning {cond!r}")
    if cond is not None and not isinstance(cond, Conditioning):
        raise TypeError("cond must be a Conditioning, 'median', 'marginal' or None")
    return cond


def simulate_batch(cfg, n_trials=None, seed=None, cond="median", phase_mode="aligned",
                   pair_tolerance=None, modes=("indirect", "direct"), t0_rule="conditioned",
                   block=500, workers=None):
    """Draw n_trials independent snapshots and keep the six power columns.

    cond: a Conditioning, "median" (default) or "marginal"/None (no
    conditioning: nearest nodes found per draw). Under conditioning the
    direct user is conditioned on d0 only and sees a fresh IRS field.
    t0_rule="conditioned" fixes the serving IRS-BS distance to cond.t0;
    "exact" measures it from the drawn positions.

    Block k always uses stream (seed, k), so results do not depend on the
    worker count.
    """
    n_trials = int(cfg.n_trials if n_trials is None else n_trials)
    seed = int(cfg.seed if seed is None else seed)
    tol = cfg.pair_tolerance if pair_tolerance is None else pair_tolerance
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if phase_mode not in PHASE_MODES:
        raise ValueError(f"unknown phase mode {phase_mode!r}")
    if t0_rule not in ("conditioned", "exact"):
        raise ValueError(f"unknown t0 rule {t0_rule!r}")
    cond = _resolve_cond(cfg, cond)
    n_blocks = -(-n_trials // block)

    def run_block(k):
        rng = stream(seed, k)
        n = min(block, n_trials - k * block)
        cols = {c: np.empty(n) for c in COLUMNS}
        tails = []
        for i in range(n):
            out, tf = _one_trial(cfg, cond, rng, phase_mode, tol, modes, t0_rule)
            for c in COLUMNS:
                cols[c][i] = out[c]
            tails.extend(tf)
        return cols, tails

    workers = thread_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(k) for k in range(n_blocks)]
    cols = {c: np.concatenate([p[0][c] for p in parts]) for c in COLUMNS}
    tails = [x for p in parts for x in p[1]]
    meta = {"phase_mode": phase_mode, "pair_tolerance": tol, "t0_rule": t0_rule,
            "conditioning": "marginal" if cond is None else
            f"r00={cond.r00:.6g},d0={cond.d0:.6g},t0={cond.t0:.6g}"}
    return TrialBatch(n_trials, seed, cfg.digest(), cols,
                      math.fsum(tails) / len(tails) if tails else 0.0, meta)


# ---------------------------------------------------------------------------
# empirical statistics
# ---------------------------------------------------------------------------

def _fsum_mean(x):
    return math.fsum(x.tolist()) / len(x)


def empirical_lt(batch, quantity, s_grid):
    """Mean of exp(-s X) per s with its standard error.

    ``quantity`` is a column name, a callable batch -> array, or an array.
    """
    if isinstance(quantity, str):
        x = batch[quantity]
    elif callable(quantity):
        x = np.asarray(quantity(batch), dtype=float)
    else:
        x = np.asarray(quantity, dtype=float)
    if x.size < 1:
        raise ValueError("empty sample")
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    mean = np.empty(len(s))
    se = np.empty(len(s))
    for i, si in enumerate(s):
        e = np.exp(-si * x)
        mean[i] = _fsum_mean(e)
        se[i] = e.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0
    return mean, se


@dataclass
class CoverageCurve:
    tau: np.ndarray
    p: np.ndarray
    stderr: np.ndarray
    lo: np.ndarray          # Wilson 95% interval
    hi: np.ndarray


def coverage_from_sinr(sinr, tau_grid):
    sinr = np.sort(np.asarray(sinr, dtype=float))
    tau = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    n = sinr.size
    k = n - np.searchsorted(sinr, tau, side="left")      # count of SINR >= tau
    p = k / n
    lo, hi = np.empty(len(tau)), np.empty(len(tau))
    for i, ki in enumerate(k):
        ci = stats.binomtest(int(ki), n).proportion_ci(0.95, method="wilson")
        lo[i], hi[i] = ci.low, ci.high
    return CoverageCurve(tau, p, np.sqrt(p * (1 - p) / n), lo, hi)


def empirical_coverage(cfg, tau_grid, n_trials=None, mode="indirect", batch=None, **kw):
    """Fraction of draws with SINR >= tau (linear tau) and Wilson intervals."""
    n = cfg.n_trials if n_trials is None else n_trials
    if batch is None:
        if n < 100:
            raise ValueError("n_trials must be >= 100")
        batch = simulate_batch(cfg, n, modes=(mode,), **kw)
    scale = 1.0
    if mode == "direct" and cfg.blockage_scaling:
        from .metrics import user_fraction
        scale = user_fraction(cfg.mix_source, cfg, d0=median_conditioning(cfg).d0).A
    return coverage_from_sinr(batch.sinr(mode, cfg.noise, scale), tau_grid)


def empirical_rate(batch, mode, noise, units="bits"):
    r = _fsum_mean(np.log1p(batch.sinr(mode, noise)))
    return r / math.log(2) if units == "bits" else r


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    grid: np.ndarray
    analytic: object        # grid -> array
    empirical: object       # (batch, grid) -> (values, stderr)
    tol: float


@dataclass
class CheckResult:
    name: str
    grid: list
    analytic: list
    empirical: list
    stderr: list
    max_abs_gap: float
    mean_gap: float
    tol: float
    passed: bool


@dataclass
class ValidationReport:
    results: list
    n_trials: int
    seed: int
    scenario_hash: str
    tail_fraction: float = 0.0

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def to_dict(self):
        return {"passed": self.passed, "n_trials": self.n_trials, "seed": self.seed,
                "scenario_hash": self.scenario_hash, "tail_fraction": self.tail_fraction,
                "checks": [r.__dict__ for r in self.results]}


def compare(name, grid, analytic, empirical, stderr, tol):
    analytic = np.asarray(analytic, dtype=float)
    empirical = np.asarray(empirical, dtype=float)
    gap = analytic - empirical
    mx = float(np.max(np.abs(gap))) if gap.size else 0.0
    return CheckResult(name, np.asarray(grid, dtype=float).tolist(), analytic.tolist(),
                       empirical.tolist(), np.asarray(stderr, dtype=float).tolist(),
                       mx, float(np.mean(gap)) if gap.size else 0.0, tol, mx <= tol)


def validation_report(cfg, checks, n_trials=None, batch=None, **kw):
    """Run (or reuse) a batch and score every check by its max absolute gap."""
    if batch is None:
        batch = simulate_batch(cfg, n_trials, **kw)
    res = []
    for c in checks:
        grid = np.asarray(c.grid, dtype=float)
        emp, se = c.empirical(batch, grid)
        res.append(compare(c.name, grid, c.analytic(grid), emp, se, c.tol))
    return ValidationReport(res, batch.n_trials, batch.seed, batch.scenario_hash, batch.tail_fraction)


def default_checks(cfg, cond=None, tau_db=None, lt_tol=0.02, ir_tol=0.05, cov_tol=0.03):
    """LT and coverage checks of the analytic pipeline at one conditioning."""
    from . import metrics
    cond = cond or median_conditioning(cfg)
    tau_db = np.asarray(cfg.tau_grid_db if tau_db is None else tau_db, dtype=float)

    def lt_check(name, col, fn, mean, tol):
        grid = np.logspace(-2, 2, 17) / mean
        return Check(name, grid, fn, lambda b, g, col=col: empirical_lt(b, col, g), tol)

    ib = metrics.mean_interference(cfg.replace(M=1), "direct", cond)
    out = [
        lt_check("lt_I_B", "I_B", lambda s: metrics.lt_ib(cfg, "indirect", cond, s),
                 ib * cfg.P / cfg.P_hat, lt_tol),
        lt_check("lt_I_B_hat", "I_B_hat", lambda s: metrics.lt_ib(cfg, "direct", cond, s), ib, lt_tol),
        lt_check("lt_S_R0", "S_R0", lambda s: metrics.lt_s_indirect(cfg, cond, s),
                 metrics.indirect_mean_power(cfg, cond), lt_tol),
    ]
    if cfg.M > 1:
        out.append(lt_check("lt_I_R", "I_R", lambda s: metrics.lt_ir(cfg, "indirect", cond, s),
                            metrics.mean_ir(cfg, "indirect", cond), ir_tol))
    def cov_emp(mode):
        def f(b, g):
            c = empirical_coverage(cfg, 10 ** (g / 10), mode=mode, batch=b)
            return c.p, c.stderr
        return f
    out.append(Check("coverage_ID", tau_db,
                     lambda g: [metrics.coverage_indirect(cfg, t, cond) for t in 10 ** (g / 10)],
                     cov_emp("indirect"), cov_tol))
    out.append(Check("coverage_D", tau_db,
                     lambda g: [metrics.coverage_direct(cfg, t, cond) for t in 10 ** (g / 10)],
                     cov_emp("direct"), cov_tol))
    return out
