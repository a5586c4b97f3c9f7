"""Simulation of Gamma and variance Gamma Levy processes.

Two kinds of output are produced:

* ``JumpSet`` -- the (time, size) marks of the jump measure, from a truncated
  series representation.  Only these give direct access to the jumps.
* ``IncrementSeries`` -- equally spaced increments X(t_k) - X(t_{k-1}) of a
  discrete skeleton, either simulated exactly from the marginal laws or
  obtained by binning a ``JumpSet``.

Randomness is drawn from ``RngStream`` objects.  A stream is a (master_seed,
stream_id) pair mapped onto numpy's PCG64 through ``SeedSequence`` spawn keys,
so distinct stream ids give independent substreams and the same pair always
gives the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# exp(-x) underflows to a subnormal around x = 708; keep jump sizes normal.
_MAX_SERIES_EXPONENT = 700.0


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream, ``PCG64`` seeded by ``SeedSequence``.

    ``path`` extends the spawn key for derived child streams, so
    ``RngStream(7, 3).child(1)`` never collides with another replication.
    """

    master_seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0:
            raise InvalidArgumentError("seeds and stream ids must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_id), *self.path)
        )
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id, self.path + (int(k),))


@dataclass(frozen=True)
class GammaParams:
    """Gamma Levy process: Levy density (alpha/x) exp(-x/beta) on x > 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidArgumentError(
                f"Gamma parameters must be positive, got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass(frozen=True)
class VGParams:
    """Variance Gamma process X(t) = theta U(t) + sigma W(U(t)), with U a Gamma
    clock of mean rate one and variance rate nu."""

    theta: float
    sigma: float
    nu: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.nu > 0):
            raise InvalidArgumentError(
                f"VG requires sigma > 0 and nu > 0, got sigma={self.sigma}, nu={self.nu}"
            )

    @classmethod
    def from_sigma2(cls, theta: float, sigma2: float, nu: float) -> "VGParams":
        if not sigma2 > 0:
            raise InvalidArgumentError("sigma2 must be positive")
        return cls(theta, math.sqrt(sigma2), nu)


@dataclass(frozen=True)
class JumpSet:
    """Marks (time, size) of the jumps of a path on [0, horizon].

    Order is arbitrary; nothing downstream relies on the jumps being sorted.
    """

    horizon: float
    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        sizes = np.asarray(self.sizes, dtype=float).reshape(-1)
        if not self.horizon > 0:
            raise InvalidArgumentError("horizon must be positive")
        if times.shape != sizes.shape:
            raise InvalidArgumentError("times and sizes must have the same length")
        if np.any((times < 0) | (times > self.horizon)):
            raise InvalidArgumentError("jump times must lie in [0, horizon]")
        if np.any(sizes == 0) or not np.all(np.isfinite(sizes)):
            raise InvalidArgumentError("jump sizes must be finite and nonzero")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    def __len__(self):
        return self.sizes.size

    @classmethod
    def empty(cls, horizon: float) -> "JumpSet":
        return cls(horizon, np.empty(0), np.empty(0))


@dataclass(frozen=True)
class IncrementSeries:
    """Increments of a skeleton observed at t_k = k * horizon / n.

    ``log_increments`` is only set by samplers that can produce it exactly
    (Gamma skeletons).  For small shapes a Gamma increment can underflow to
    0.0 while its logarithm is still a perfectly good finite number, and the
    Gamma likelihood only needs the logs.
    """

    horizon: float
    increments: np.ndarray
    log_increments: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float).reshape(-1)
        if not self.horizon > 0:
            raise InvalidArgumentError("horizon must be positive")
        if inc.size < 1:
            raise InvalidArgumentError("an increment series needs n >= 1")
        object.__setattr__(self, "increments", inc)
        if self.log_increments is not None:
            logs = np.asarray(self.log_increments, dtype=float).reshape(-1)
            if logs.shape != inc.shape:
                raise InvalidArgumentError("log_increments must match increments")
            object.__setattr__(self, "log_increments", logs)

    @property
    def n(self) -> int:
        return self.increments.size

    @property
    def dt(self) -> float:
        return self.horizon / self.n

    @property
    def times(self) -> np.ndarray:
        """Right endpoints t_1, ..., t_n."""
        return self.horizon * np.arange(1, self.n + 1) / self.n


def _check_horizon(horizon, count, what):
    if not horizon > 0:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    if int(count) != count or count < 1:
        raise InvalidArgumentError(f"{what} must be a positive integer, got {count}")


def gamma_variates(gen: np.random.Generator, shape: float, size: int):
    """Standard Gamma(shape) draws together with their logarithms.

    Shapes >= 1 use numpy's Marsaglia-Tsang rejection sampler.  Shapes < 1 use
    the boost X = G * U**(1/shape) with G ~ Gamma(shape + 1), evaluated in log
    space so that log X stays exact when X itself underflows.
    """
    if shape >= 1.0:
        x = gen.standard_gamma(shape, size)
        with np.errstate(divide="ignore"):
            return x, np.log(x)
    g = gen.standard_gamma(shape + 1.0, size)
    u = 1.0 - gen.random(size)  # in (0, 1]
    logx = np.log(g) + np.log(u) / shape
    return np.exp(logx), logx


def simulate_gamma_jumps(params: GammaParams, horizon: float, n_terms: int, rng: RngStream) -> JumpSet:
    """First ``n_terms`` terms of the series representation of a Gamma process.

    Jump i has size beta * V_i * exp(-G_i / (alpha * T)) and time U_i, with G_i
    the arrival times of a unit-rate Poisson process, V_i ~ Exp(1) and
    U_i ~ Uniform[0, T].  The alpha * T scale makes the mean measure of the
    marks T * nu(dx) dt / T, i.e. a Gamma(alpha, beta) process on [0, T].

    Draw order from the stream: n exponential gaps, n V's, n uniforms.
    """
    _check_horizon(horizon, n_terms, "n_terms")
    n_terms = int(n_terms)
    rate_scale = params.alpha * horizon
    gen = rng.generator()
    arrivals = np.cumsum(gen.standard_exponential(n_terms))
    marks = gen.standard_exponential(n_terms)
    times = gen.random(n_terms) * horizon
    if arrivals[-1] / rate_scale > _MAX_SERIES_EXPONENT:
        raise InvalidArgumentError(
            f"n_terms={n_terms} is far beyond the resolvable series range for alpha*T={rate_scale}"
        )
    sizes = params.beta * marks * np.exp(-arrivals / rate_scale)
    return JumpSet(horizon, times, sizes)


def gamma_series_residual_mass(params: GammaParams, horizon: float, n_terms: int) -> float:
    """Expected total size of the discarded terms, sum_{i > n} E[J_i].

    E[J_i] = beta * (aT / (aT + 1))**i with aT = alpha * T, so the tail is a
    geometric series.
    """
    at = params.alpha * horizon
    return params.beta * at * (at / (at + 1.0)) ** n_terms


def simulate_gamma_skeleton(params: GammaParams, horizon: float, n: int, rng: RngStream) -> IncrementSeries:
    """n i.i.d. Gamma(alpha * T / n, beta) increments; exact in law."""
    _check_horizon(horizon, n, "n")
    n = int(n)
    shape = params.alpha * horizon / n
    x, logx = gamma_variates(rng.generator(), shape, n)
    return IncrementSeries(horizon, params.beta * x, logx + math.log(params.beta))


def vg_to_gamma_pair(params: VGParams) -> tuple[float, float, float]:
    """(alpha, beta_plus, beta_minus) of the difference-of-Gammas representation."""
    theta, nu = params.theta, params.nu
    product = params.sigma**2 * nu / 2.0  # beta_plus * beta_minus
    half = theta * nu / 2.0
    if half == 0.0:
        root = math.sqrt(product)
        return 1.0 / nu, root, root
    big = math.sqrt(half**2 + product) + abs(half)
    small = product / big  # avoids cancellation in root - |half|
    return (1.0 / nu, big, small) if theta >= 0 else (1.0 / nu, small, big)


def gamma_pair_to_vg(alpha: float, beta_plus: float, beta_minus: float) -> VGParams:
    """Inverse of :func:`vg_to_gamma_pair`."""
    if not (alpha > 0 and beta_plus > 0 and beta_minus > 0):
        raise InvalidArgumentError("alpha and both tail scales must be positive")
    nu = 1.0 / alpha
    return VGParams.from_sigma2(
        (beta_plus - beta_minus) / nu, 2.0 * beta_plus * beta_minus / nu, nu
    )


def simulate_vg_difference(params: VGParams, horizon: float, n_terms: int, rng: RngStream) -> JumpSet:
    """Jumps of X+ - X-, each side from its own series on child streams 0 and 1."""
    alpha, beta_plus, beta_minus = vg_to_gamma_pair(params)
    up = simulate_gamma_jumps(GammaParams(alpha, beta_plus), horizon, n_terms, rng.child(0))
    down = simulate_gamma_jumps(GammaParams(alpha, beta_minus), horizon, n_terms, rng.child(1))
    return JumpSet(
        horizon,
        np.concatenate([up.times, down.times]),
        np.concatenate([up.sizes, -down.sizes]),
    )


def simulate_vg_timechange(params: VGParams, horizon: float, n: int, rng: RngStream) -> IncrementSeries:
    """Skeleton increments theta*dU + sigma*sqrt(dU)*Z, dU ~ Gamma(dt/nu, scale nu)."""
    _check_horizon(horizon, n, "n")
    n = int(n)
    gen = rng.generator()
    du, _ = gamma_variates(gen, (horizon / n) / params.nu, n)
    du = du * params.nu
    z = gen.standard_normal(n)
    return IncrementSeries(horizon, params.theta * du + params.sigma * np.sqrt(du) * z)


def jumps_to_increments(jumps: JumpSet, n: int) -> IncrementSeries:
    """Bin jumps into the right-closed intervals (t_{k-1}, t_k].

    A jump at time 0 goes to the first interval.  Within an interval the sizes
    are summed in the order they appear in ``jumps``.
    """
    _check_horizon(jumps.horizon, n, "n")
    n = int(n)
    k = np.ceil(jumps.times * n / jumps.horizon).astype(np.int64) - 1
    np.clip(k, 0, n - 1, out=k)
    return IncrementSeries(jumps.horizon, np.bincount(k, weights=jumps.sizes, minlength=n))
