"""Monte Carlo checks of the risk decomposition, oracle behaviour, convergence
rate and discretization asymptotics, plus the PPE-LSE versus MLE spacing study.

Replication r always draws from ``RngStream(master_seed, r)`` and results
are reduced in replication order, so every table is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .discrete import IntegrandSpec, approx_select
from .errors import InvalidArgumentError, LevyEstError
from .fitting import lse_gamma_log, mle_gamma
from .levy_sim import (
    GammaParams,
    IncrementSeries,
    JumpSet,
    RngStream,
    VGParams,
    gamma_pair_to_vg,
    jumps_to_increments,
    simulate_gamma_jumps,
    simulate_gamma_skeleton,
    simulate_vg_difference,
    simulate_vg_timechange,
    vg_to_gamma_pair,
)
from .model_selection import (
    DEFAULT_PENALTY,
    PenaltyForm,
    _select_sizes,
    default_m_max,
    regular_histograms,
    regularized_histograms,
)
from .projection import (
    INVERSE_SQUARE,
    LEBESGUE,
    DensitySpec,
    LinearModel,
    coefficients_and_vhat,
    density_norm_sq,
    gamma_density,
    orthogonal_projection,
    uniform_density,
    variance_weights,
    vg_density,
)


# --------------------------------------------------------------------------
# processes and configs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessSpec:
    """A parametric Levy model used both to simulate and as ground truth.

    kind 'gamma' (GammaParams), 'vg' (VGParams) or 'uniform' (compound
    Poisson with constant Levy density ``level`` on [lo, hi]; params is the
    tuple (level, lo, hi)).
    """

    kind: str
    params: object

    @classmethod
    def gamma(cls, alpha=1.0, beta=1.0):
        return cls("gamma", GammaParams(alpha, beta))

    @classmethod
    def vg(cls, theta, sigma, nu):
        return cls("vg", VGParams(theta, sigma, nu))

    @classmethod
    def uniform(cls, level, lo, hi):
        if not (level > 0 and lo < hi) or lo <= 0.0 <= hi:
            raise InvalidArgumentError("uniform process needs level > 0 and an interval away from 0")
        return cls("uniform", (float(level), float(lo), float(hi)))

    @classmethod
    def parse(cls, text: str) -> "ProcessSpec":
        """'gamma:1,1', 'vg:theta,sigma,nu', 'uniform:level,lo,hi'."""
        kind, _, rest = text.partition(":")
        vals = [float(v) for v in rest.split(",")] if rest else []
        try:
            return {"gamma": cls.gamma, "vg": cls.vg, "uniform": cls.uniform}[kind.strip().lower()](*vals)
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"cannot parse process spec {text!r}") from exc

    def density(self) -> DensitySpec:
        if self.kind == "gamma":
            return gamma_density(self.params)
        if self.kind == "vg":
            return vg_density(self.params)
        return uniform_density(*self.params)

    def default_n_terms(self, horizon, window) -> int:
        """Series length so that jumps of size >= min|window| are essentially all kept.

        Term i has size beta*V*exp(-G_i/(alpha*T)); past n = alpha*T*log(40*beta/a)
        a jump above a needs V > 40.
        """
        if self.kind == "uniform":
            return 1
        if self.kind == "gamma":
            alpha, beta = self.params.alpha, self.params.beta
        else:
            alpha, bp, bm = vg_to_gamma_pair(self.params)
            beta = max(bp, bm)
        edge = min(abs(window[0]), abs(window[1]))
        if edge == 0.0:
            return int(math.ceil(100 * alpha * horizon))
        return int(math.ceil(alpha * horizon * max(math.log(40 * beta / edge), 1.0)))

    def simulate_jumps(self, horizon, n_terms, rng: RngStream) -> JumpSet:
        if self.kind == "gamma":
            return simulate_gamma_jumps(self.params, horizon, n_terms, rng)
        if self.kind == "vg":
            return simulate_vg_difference(self.params, horizon, n_terms, rng)
        level, lo, hi = self.params
        gen = rng.generator()
        count = gen.poisson(level * (hi - lo) * horizon)
        sizes = gen.uniform(lo, hi, count)
        times = gen.random(count) * horizon
        return JumpSet(horizon, times, sizes)

    def simulate_increments(self, horizon, n, rng: RngStream) -> IncrementSeries:
        if self.kind == "gamma":
            return simulate_gamma_skeleton(self.params, horizon, n, rng)
        if self.kind == "vg":
            return simulate_vg_timechange(self.params, horizon, n, rng)
        return jumps_to_increments(self.simulate_jumps(horizon, 1, rng), n)

    def __str__(self):
        if self.kind == "gamma":
            return f"gamma:{self.params.alpha:g},{self.params.beta:g}"
        if self.kind == "vg":
            return f"vg:{self.params.theta:g},{self.params.sigma:g},{self.params.nu:g}"
        return "uniform:" + ",".join(f"{v:g}" for v in self.params)


@dataclass(frozen=True)
class ExperimentConfig:
    process: ProcessSpec = field(default_factory=ProcessSpec.gamma)
    window: tuple = (0.1, 1.0)
    measure: str = "lebesgue"
    family: str = "regular"  # or "regularized"
    m_values: tuple = tuple(range(1, 41))
    penalty: PenaltyForm = DEFAULT_PENALTY
    horizon: float = 365.0
    replications: int = 500
    n_terms: int | None = None
    master_seed: int = 20240101

    def __post_init__(self):
        if self.replications < 2:
            raise InvalidArgumentError("at least 2 replications are needed for standard errors")
        if self.family not in ("regular", "regularized"):
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        if not self.m_values:
            raise InvalidArgumentError("empty model family")

    def collection(self) -> list[LinearModel]:
        if self.family == "regularized":
            return regularized_histograms(self.window[1], self.m_values)
        measure = {"lebesgue": LEBESGUE, "inverse_square": INVERSE_SQUARE}[self.measure]
        return regular_histograms(self.window, self.m_values, measure)

    @property
    def terms(self) -> int:
        return self.n_terms or self.process.default_n_terms(self.horizon, self.window)

    def to_dict(self):
        return {
            "process": str(self.process),
            "window": list(self.window),
            "measure": self.measure,
            "family": self.family,
            "m_values": [int(m) for m in self.m_values],
            "penalty": str(self.penalty),
            "horizon": self.horizon,
            "replications": self.replications,
            "n_terms": self.terms,
            "master_seed": self.master_seed,
        }


# --------------------------------------------------------------------------
# risk tables
# --------------------------------------------------------------------------

class _ModelIntegrals:
    """Per-model quantities of the truth that do not depend on the data."""

    def __init__(self, truth: DensitySpec, model: LinearModel, norm_sq: float):
        self.model = model
        self.proj = orthogonal_projection(truth, model)
        self.var_weights = variance_weights(truth, model)
        self.norm_sq = norm_sq
        self.bias_sq = max(norm_sq - float(np.dot(self.proj, self.proj)), 0.0)

    def risk(self, beta_hat):
        """||s - s_hat||^2 as bias + chi^2, cross-checked against the direct expansion."""
        chi2 = float(np.sum((beta_hat - self.proj) ** 2))
        direct = self.norm_sq - 2.0 * float(np.dot(beta_hat, self.proj)) + float(np.dot(beta_hat, beta_hat))
        total = self.bias_sq + chi2
        if abs(direct - total) > 1e-8 * max(1.0, abs(total)) + 1e-8:
            raise ArithmeticError(f"Pythagorean split violated: {direct} vs {total}")
        return total, chi2


@dataclass(frozen=True)
class RiskRow:
    m: str
    dim: int
    bias_sq: float
    var_analytic: float
    var_mc: float
    risk_mc: float
    risk_se: float
    vhat_mc: float = math.nan
    vhat_se: float = math.nan
    vhat_expected: float = math.nan


@dataclass(eq=False)
class RiskTable:
    config: ExperimentConfig
    rows: list[RiskRow]
    ppe: RiskRow
    chosen_dims: np.ndarray
    failed_replications: int = 0
    coefficient_means: dict = field(default_factory=dict)
    coefficient_ses: dict = field(default_factory=dict)
    projections: dict = field(default_factory=dict)

    @property
    def best(self) -> RiskRow:
        return min(self.rows, key=lambda r: r.risk_mc)

    def csv_rows(self):
        return [(r.m, r.bias_sq, r.var_analytic, r.var_mc, r.risk_mc, r.risk_se) for r in self.rows + [self.ppe]]


def _window_filter(sizes, models):
    lo = min(m.window[0] for m in models)
    hi = max(m.window[1] for m in models)
    return sizes[(sizes >= lo) & (sizes <= hi)]


def mc_risk(config: ExperimentConfig) -> RiskTable:
    """Monte Carlo risk of every model and of the penalized selection."""
    truth = config.process.density()
    models = config.collection()
    T = config.horizon
    norm_sq = density_norm_sq(truth, models[-1])
    ints = [_ModelIntegrals(truth, m, norm_sq) for m in models]
    n_terms = config.terms
    R = config.replications

    risks = np.full((R, len(models)), np.nan)
    chis = np.full((R, len(models)), np.nan)
    vhats = np.full((R, len(models)), np.nan)
    coeffs = [np.full((R, m.dim), np.nan) for m in models]
    ppe_risk = np.full(R, np.nan)
    chosen = np.zeros(R, dtype=int)
    failed = 0
    for r in range(R):
        try:
            jumps = config.process.simulate_jumps(T, n_terms, RngStream(config.master_seed, r))
            sizes = np.sort(_window_filter(jumps.sizes, models))
            for j, (model, mi) in enumerate(zip(models, ints)):
                bh, vhats[r, j] = coefficients_and_vhat(sizes, T, model)
                coeffs[j][r] = bh
                risks[r, j], chis[r, j] = mi.risk(bh)
            sel = _select_sizes(sizes, T, models, config.penalty)
            chosen[r] = models[sel.chosen_index].dim
            ppe_risk[r] = risks[r, sel.chosen_index]
        except (LevyEstError, ArithmeticError):
            failed += 1
            risks[r] = np.nan
            ppe_risk[r] = np.nan
    ok = ~np.isnan(ppe_risk)
    if np.count_nonzero(ok) < 2:
        raise LevyEstError(f"only {np.count_nonzero(ok)} replications succeeded")

    def mean_se(a):
        a = a[ok]
        return float(a.mean()), float(a.std(ddof=1) / math.sqrt(a.size))

    rows = []
    for j, (model, mi) in enumerate(zip(models, ints)):
        risk_mean, risk_se = mean_se(risks[:, j])
        vh_mean, vh_se = mean_se(vhats[:, j])
        rows.append(
            RiskRow(
                m=str(model.dim),
                dim=model.dim,
                bias_sq=mi.bias_sq,
                var_analytic=float(mi.var_weights.sum() / T),
                var_mc=float(chis[ok, j].mean()),
                risk_mc=risk_mean,
                risk_se=risk_se,
                vhat_mc=vh_mean,
                vhat_se=vh_se,
                vhat_expected=float(mi.var_weights.sum()),
            )
        )
    ppe_mean, ppe_se = mean_se(ppe_risk)
    ppe_row = RiskRow("ppe", 0, math.nan, math.nan, math.nan, ppe_mean, ppe_se)
    table = RiskTable(config, rows, ppe_row, chosen[ok], failed)
    for model, mi, c in zip(models, ints, coeffs):
        c = c[ok]
        table.coefficient_means[model.dim] = c.mean(axis=0)
        table.coefficient_ses[model.dim] = c.std(axis=0, ddof=1) / math.sqrt(c.shape[0])
        table.projections[model.dim] = mi.proj
    return table


@dataclass(frozen=True)
class RateReport:
    horizons: np.ndarray
    risk_mc: np.ndarray
    risk_se: np.ndarray
    slope: float
    slope_se: float
    intercept: float

    def csv_rows(self):
        return list(zip(self.horizons.tolist(), self.risk_mc.tolist(), self.risk_se.tolist()))


def loglog_slope(horizons, risks):
    """OLS of log(risk) on log(T): (slope, slope standard error, intercept)."""
    x = np.log(np.asarray(horizons, dtype=float))
    y = np.log(np.asarray(risks, dtype=float))
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    slope = float(np.dot(xc, y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    dof = max(x.size - 2, 1)
    return slope, float(math.sqrt(np.dot(resid, resid) / dof / sxx)), intercept


def ppe_risk(config: ExperimentConfig):
    """MC mean and SE of the penalized estimator's risk only (cheaper than mc_risk)."""
    truth = config.process.density()
    models = config.collection()
    T = config.horizon
    norm_sq = density_norm_sq(truth, models[-1])
    cache = {}
    out = np.empty(config.replications)
    for r in range(config.replications):
        jumps = config.process.simulate_jumps(T, config.terms, RngStream(config.master_seed, r))
        sizes = _window_filter(jumps.sizes, models)
        sel = _select_sizes(sizes, T, models, config.penalty)
        k = sel.chosen_index
        if k not in cache:
            cache[k] = _ModelIntegrals(truth, models[k], norm_sq)
        out[r] = cache[k].risk(sel.estimate.coefficients)[0]
    return float(out.mean()), float(out.std(ddof=1) / math.sqrt(out.size))


def rate_experiment(config: ExperimentConfig, horizons) -> RateReport:
    """PPE risk over a geometric grid of horizons; the family at each T is
    regular histograms with m = 1..floor(T (b - a)) and the series length
    scales with T."""
    horizons = np.asarray(sorted(horizons), dtype=float)
    if horizons.size < 4:
        raise InvalidArgumentError("the rate experiment needs at least 4 horizons")
    means, ses = [], []
    for T in horizons:
        cfg = replace(
            config,
            horizon=float(T),
            m_values=tuple(range(1, default_m_max(T, config.window) + 1)),
            n_terms=None if config.n_terms is None else int(math.ceil(config.n_terms * T / config.horizon)),
        )
        mean, se = ppe_risk(cfg)
        means.append(mean)
        ses.append(se)
    slope, slope_se, intercept = loglog_slope(horizons, means)
    return RateReport(horizons, np.array(means), np.array(ses), slope, slope_se, intercept)


# --------------------------------------------------------------------------
# discretization and regularized-origin checks
# --------------------------------------------------------------------------

def levy_integral(truth: DensitySpec, f, support=None) -> float:
    """int f(x) p(x) dx over ``support`` (or the whole punctured line)."""
    def g(x):
        xa = np.array([x])
        return float(f(xa)[0] * truth(xa)[0])

    pieces = [support] if support is not None else [(-np.inf, 0.0), (0.0, np.inf)]
    total = 0.0
    for lo, hi in pieces:
        val, _ = integrate.quad(g, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=400)
        total += val
    return total


@dataclass(frozen=True)
class SweepRow:
    n: int
    mean: float
    mean_se: float
    target_mean: float
    variance: float
    target_variance: float

    @property
    def bias(self):
        return self.mean - self.target_mean


def approx_bias_sweep(process: ProcessSpec, f: IntegrandSpec, horizon: float, n_grid, replications=2000,
                      master_seed=20240101, support=None) -> list[SweepRow]:
    """Mean and variance of I_n(f) against T int f dnu and T int f^2 dnu."""
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise InvalidArgumentError("n_grid must be increasing")
    truth = process.density()
    target_mean = horizon * levy_integral(truth, f, support)
    target_var = horizon * levy_integral(truth, lambda x: f(x) ** 2, support)
    rows = []
    for k, n in enumerate(n_grid):
        vals = np.empty(replications)
        for r in range(replications):
            inc = process.simulate_increments(horizon, n, RngStream(master_seed, r).child(k))
            vals[r] = float(np.sum(f(inc.increments)))
        rows.append(
            SweepRow(n, float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replications)), target_mean,
                     float(vals.var(ddof=1)), target_var)
        )
    return rows


@dataclass(frozen=True)
class AlphaRow:
    x1: float
    mean: float
    mean_se: float
    variance: float
    limit_variance: float
    exact_mean: float
    exact_variance: float


def regularized_alpha(jumps: JumpSet, x1: float) -> float:
    """alpha-hat = (1/(T x1)) * sum of the positive jumps below x1."""
    s = jumps.sizes
    return float(np.sum(s[(s > 0) & (s < x1)]) / (jumps.horizon * x1))


def regularized_alpha_check(params: GammaParams, horizon: float, x1_grid, replications=1000, n_terms=None,
                            master_seed=20240101) -> list[AlphaRow]:
    """MC mean and variance of alpha-hat at each x1, with alpha/(2T) and the
    exact finite-x1 moments of the untruncated process for reference."""
    x1_grid = sorted(float(x) for x in x1_grid)
    if any(not 0 < x < params.beta for x in x1_grid):
        raise InvalidArgumentError("x1 values must lie in (0, beta)")
    n_terms = n_terms or int(math.ceil(100 * params.alpha * horizon))
    est = np.empty((replications, len(x1_grid)))
    for r in range(replications):
        jumps = simulate_gamma_jumps(params, horizon, n_terms, RngStream(master_seed, r))
        est[r] = [regularized_alpha(jumps, x1) for x1 in x1_grid]
    a, b, T = params.alpha, params.beta, horizon
    rows = []
    for j, x1 in enumerate(x1_grid):
        u = x1 / b
        rows.append(
            AlphaRow(
                x1=x1,
                mean=float(est[:, j].mean()),
                mean_se=float(est[:, j].std(ddof=1) / math.sqrt(replications)),
                variance=float(est[:, j].var(ddof=1)),
                limit_variance=a / (2 * T),
                exact_mean=a * b * (-math.expm1(-u)) / x1,
                exact_variance=a * b * b * (1 - math.exp(-u) * (1 + u)) / (T * x1 * x1),
            )
        )
    return rows


# --------------------------------------------------------------------------
# PPE-LSE versus MLE across observation spacings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Table1Row:
    dt: float
    sim_mode: str
    stats: dict  # name -> (median, q25, q75)
    lse_failures: int
    mle_failures: int
    mean_dropped: float


def _positive_part(inc: IncrementSeries):
    """Positive increments only, keeping the original spacing dt."""
    x = inc.increments
    keep = x > 0
    if inc.log_increments is not None:
        keep &= np.isfinite(inc.log_increments)
    dropped = int(x.size - np.count_nonzero(keep))
    if dropped == 0:
        return inc, 0
    if not np.any(keep):
        return None, dropped
    logs = None if inc.log_increments is None else inc.log_increments[keep]
    return IncrementSeries(inc.dt * np.count_nonzero(keep), x[keep], logs), dropped


def _lse(estimate):
    try:
        fit = lse_gamma_log(estimate)
    except LevyEstError:
        return math.nan, math.nan
    if not fit.converged:
        return math.nan, math.nan
    return fit.params["alpha"], fit.params["beta"]


def table1(dts=(1.0, 0.5, 0.1, 0.01), replications=50, modes=("jump", "increment"), params=GammaParams(1.0, 1.0),
           horizon=365.0, n_jumps=36500, window=(0.1, 1.0), c=2.0, master_seed=20240101) -> list[Table1Row]:
    """PPE-LSE and MLE estimates of (alpha, beta) across observation spacings.

    jump mode: series with ``n_jumps`` terms.  The PPE is computed from the
    simulated jumps themselves (the point of this mode is jump access); the
    MLE uses the binned increments at each dt, with empty bins dropped.
    increment mode: exact Gamma skeleton at spacing dt; the PPE is the
    increment-based estimator and the MLE uses the skeleton.
    """
    collection = regular_histograms(window, range(1, default_m_max(horizon, window) + 1))
    form = PenaltyForm("B", c)
    rows = []
    for mode in modes:
        if mode not in ("jump", "increment"):
            raise InvalidArgumentError(f"unknown simulation mode {mode!r}")
        est = {dt: np.full((replications, 4), np.nan) for dt in dts}
        dropped = {dt: np.zeros(replications) for dt in dts}
        for r in range(replications):
            stream = RngStream(master_seed, r)
            if mode == "jump":
                jumps = simulate_gamma_jumps(params, horizon, n_jumps, stream)
                sel = _select_sizes(_window_filter(jumps.sizes, collection), horizon, collection, form)
                ppe = _lse(sel.estimate)
            for k, dt in enumerate(dts):
                n = int(round(horizon / dt))
                if mode == "jump":
                    inc = jumps_to_increments(jumps, n)
                else:
                    inc = simulate_gamma_skeleton(params, horizon, n, stream.child(k))
                    ppe = _lse(approx_select(inc, collection, c).estimate)
                pos, dropped[dt][r] = _positive_part(inc)
                try:
                    fit = mle_gamma(pos) if pos is not None else None
                    mle = (fit.params["alpha"], fit.params["beta"]) if fit else (math.nan, math.nan)
                except LevyEstError:
                    mle = (math.nan, math.nan)
                est[dt][r] = (*ppe, *mle)
        for dt in dts:
            e = est[dt]
            stats = {}
            for j, name in enumerate(("ppe_lse_alpha", "ppe_lse_beta", "mle_alpha", "mle_beta")):
                col = e[:, j]
                col = col[~np.isnan(col)]
                stats[name] = tuple(float(v) for v in np.percentile(col, [50, 25, 75])) if col.size else (math.nan,) * 3
            rows.append(
                Table1Row(dt, mode, stats, int(np.isnan(e[:, 0]).sum()), int(np.isnan(e[:, 2]).sum()),
                          float(dropped[dt].mean()))
            )
    return rows


# --------------------------------------------------------------------------
# named checks (driven by the CLI)
# --------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    header: tuple
    rows: list
    details: list[str]
    config: dict


def check_variance_term(replications=1000, master_seed=20240101, **_):
    cfg = ExperimentConfig(m_values=(10,), replications=replications, n_terms=2000, master_seed=master_seed)
    row = mc_risk(cfg).rows[0]
    rel = abs(row.var_mc - row.var_analytic) / row.var_analytic
    passed = rel <= 0.05
    return CheckResult(
        "variance-term", passed, ("m", "bias_sq", "var_analytic", "var_mc", "risk_mc", "risk_se"),
        [(row.m, row.bias_sq, row.var_analytic, row.var_mc, row.risk_mc, row.risk_se)],
        [f"relative error of MC chi^2 mean: {rel:.4f} (band 0.05)"], cfg.to_dict(),
    )


def check_oracle(replications=500, master_seed=20240101, **_):
    cfg = ExperimentConfig(replications=replications, n_terms=2000, master_seed=master_seed)
    table = mc_risk(cfg)
    best = table.best
    bound = 3 * best.risk_mc + 50 / cfg.horizon
    passed = table.ppe.risk_mc <= bound
    return CheckResult(
        "oracle", passed, ("m", "bias_sq", "var_analytic", "var_mc", "risk_mc", "risk_se"), table.csv_rows(),
        [f"PPE risk {table.ppe.risk_mc:.5g} vs 3*min risk (m={best.m}) + 50/T = {bound:.5g}"], cfg.to_dict(),
    )


def check_rate(replications=100, master_seed=20240101, horizons=(100, 200, 400, 800, 1600), **_):
    cfg = ExperimentConfig(replications=replications, master_seed=master_seed)
    rep = rate_experiment(cfg, horizons)
    passed = rep.slope <= -0.55
    return CheckResult(
        "rate", passed, ("T", "risk_mc", "risk_se"), rep.csv_rows(),
        [f"log-log slope {rep.slope:.4f} (SE {rep.slope_se:.4f}); band slope <= -0.55"],
        {**cfg.to_dict(), "horizons": [float(h) for h in horizons]},
    )


def check_approx_bias(replications=2000, master_seed=20240101, **_):
    from .discrete import indicator

    f = indicator(0.5, 1.0)
    n_grid = (2**8, 2**11, 2**14)
    rows = approx_bias_sweep(ProcessSpec.gamma(), f, 365.0, n_grid, replications, master_seed, support=(0.5, 1.0))
    shrinks = abs(rows[-1].bias) < abs(rows[0].bias)
    var_rel = abs(rows[-1].variance - rows[-1].target_variance) / rows[-1].target_variance
    passed = shrinks and var_rel <= 0.10
    return CheckResult(
        "approx-bias", passed, ("n", "mean", "mean_se", "target_mean", "variance", "target_variance"),
        [(r.n, r.mean, r.mean_se, r.target_mean, r.variance, r.target_variance) for r in rows],
        [f"|bias| n={n_grid[0]}: {abs(rows[0].bias):.4g}, n={n_grid[-1]}: {abs(rows[-1].bias):.4g}",
         f"variance relative error at n={n_grid[-1]}: {var_rel:.4f} (band 0.10)"],
        {"process": "gamma:1,1", "f": f.name, "T": 365.0, "replications": replications, "master_seed": master_seed},
    )


def check_regularized_alpha(replications=1000, master_seed=20240101, **_):
    params = GammaParams(1.0, 1.0)
    rows = regularized_alpha_check(params, 365.0, (0.05, 0.1, 0.2, 0.4), replications, master_seed=master_seed)
    r = rows[0]
    var_ok = abs(r.variance - r.limit_variance) <= 0.2 * r.limit_variance
    mean_ok = abs(r.mean - params.alpha) <= 3 * r.mean_se
    return CheckResult(
        "regularized-alpha", var_ok and mean_ok,
        ("x1", "mean", "mean_se", "variance", "limit_variance", "exact_mean", "exact_variance"),
        [(a.x1, a.mean, a.mean_se, a.variance, a.limit_variance, a.exact_mean, a.exact_variance) for a in rows],
        [f"x1={r.x1}: variance {r.variance:.4g} vs alpha/(2T) {r.limit_variance:.4g} -> {'ok' if var_ok else 'FAIL'}",
         f"x1={r.x1}: mean {r.mean:.5f} vs alpha {params.alpha} (3 SE = {3 * r.mean_se:.5f}) -> {'ok' if mean_ok else 'FAIL'}",
         f"exact mean at this x1 is {r.exact_mean:.5f}: the bias vanishes only as x1 -> 0"],
        {"process": "gamma:1,1", "T": 365.0, "replications": replications, "master_seed": master_seed},
    )


def check_vg_roundtrip(replications=1000, master_seed=20240101, **_):
    gen = RngStream(master_seed).generator()
    worst = 0.0
    rows = []
    for _ in range(replications):
        p = VGParams(gen.normal(0, 1), math.exp(gen.normal(-1, 1)), math.exp(gen.normal(-1, 1)))
        back = gamma_pair_to_vg(*vg_to_gamma_pair(p))
        err = max(abs(back.theta - p.theta), abs(back.sigma - p.sigma) / p.sigma, abs(back.nu - p.nu) / p.nu)
        worst = max(worst, err)
    sp = VGParams.from_sigma2(-0.00056256, 0.01373584, 0.002)
    alpha, bp, bm = vg_to_gamma_pair(sp)
    ref = (500.0, 0.0037056, 0.0037067)
    rel = max(abs(v - t) / t for v, t in zip((alpha, bp, bm), ref))
    rows.append(("s&p", alpha, bp, bm, rel))
    passed = worst <= 1e-10 and rel <= 1e-3
    return CheckResult(
        "vg-roundtrip", passed, ("case", "alpha", "beta_plus", "beta_minus", "rel_err"), rows,
        [f"worst round-trip error over {replications} random parameter sets: {worst:.3g} (band 1e-10)",
         f"S&P conversion relative error {rel:.3g} (band 1e-3)"],
        {"replications": replications, "master_seed": master_seed},
    )


CHECKS = {
    "variance-term": check_variance_term,
    "oracle": check_oracle,
    "rate": check_rate,
    "approx-bias": check_approx_bias,
    "regularized-alpha": check_regularized_alpha,
    "vg-roundtrip": check_vg_roundtrip,
}
