"""Histogram-type linear models and projection estimators of Levy densities.

A model is a partition x_0 < ... < x_m of the window D = [a, b] together with
a reference measure eta.  The basis is orthonormal in L2(D, eta) and is kept
in the form phi_i(x) = scale_i * g_i(x) * 1[x_{i-1} <= x < x_i], where g_i is
1 except for the first bin of the regularized basis, where g_1(x) = x.  All
estimators only need phi evaluated at jump sizes, so every basis shares one
evaluation path.

The Levy density p = dnu/dx and the regularized density s = dnu/deta are
related by p = s * w with w = deta/dx; :class:`DensitySpec` holds p, and
integrals against eta are written as integrals against dx to keep the
integrands regular near the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .errors import InvalidArgumentError, NumericFailureError
from .levy_sim import GammaParams, IncrementSeries, JumpSet, VGParams, vg_to_gamma_pair

QUAD_TOL = 1e-10


# --------------------------------------------------------------------------
# reference measures and bases
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceMeasure:
    """eta(dx) = w(x) dx.  ``kind`` is 'lebesgue', 'inverse_square' or 'weight'."""

    kind: str
    weight: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("lebesgue", "inverse_square", "weight"):
            raise InvalidArgumentError(f"unknown measure kind {self.kind!r}")
        if self.kind == "weight" and self.weight is None:
            raise InvalidArgumentError("a weight-function measure needs a weight callable")

    @classmethod
    def weighted(cls, w, name="weight"):
        return cls("weight", w, name)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "lebesgue":
            return np.ones_like(x)
        if self.kind == "inverse_square":
            with np.errstate(divide="ignore"):
                return 1.0 / (x * x)
        return np.asarray(self.weight(x), dtype=float)

    @property
    def label(self):
        return {"lebesgue": "lebesgue", "inverse_square": "inv-square"}.get(self.kind, self.name)


LEBESGUE = ReferenceMeasure("lebesgue")
INVERSE_SQUARE = ReferenceMeasure("inverse_square")


@dataclass(frozen=True)
class RegularHistogram:
    m: int


@dataclass(frozen=True)
class Histogram:
    cutpoints: tuple


@dataclass(frozen=True)
class RegularizedHistogram:
    """Partition 0 = x_0 < x_1 < ... < x_m = b; first basis function x / sqrt(x_1)."""

    cutpoints: tuple

    @classmethod
    def regular(cls, b: float, m: int) -> "RegularizedHistogram":
        return cls(tuple(np.linspace(0.0, b, m + 1)))


BasisKind = Union[RegularHistogram, Histogram, RegularizedHistogram]


@dataclass(frozen=True, eq=False)
class LinearModel:
    window: tuple[float, float]
    measure: ReferenceMeasure
    cutpoints: np.ndarray
    scales: np.ndarray
    linear_first: bool
    label: str

    @property
    def dim(self) -> int:
        return self.scales.size

    @property
    def sup_constant(self) -> float:
        """D_m = sup_x sum_i phi_i(x)**2; bins are disjoint so it is the max over bins."""
        sq = self.scales**2
        if self.linear_first:
            sq = sq.copy()
            sq[0] *= self.cutpoints[1] ** 2
        return float(sq.max())

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.cutpoints[:-1], self.cutpoints[1:]

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.cutpoints[:-1] + self.cutpoints[1:])

    def bin_index(self, x) -> np.ndarray:
        """Bin of each x for [x_{i-1}, x_i) bins, last bin closed; -1 outside D."""
        x = np.asarray(x, dtype=float)
        a, b = self.window
        idx = np.searchsorted(self.cutpoints, x, side="right") - 1
        idx[x == b] = self.dim - 1
        idx[~((x >= a) & (x <= b))] = -1
        return idx

    def _phi_at(self, x, idx):
        inside = idx >= 0
        vals = np.zeros(x.shape)
        vals[inside] = self.scales[idx[inside]]
        if self.linear_first:
            first = idx == 0
            vals[first] *= x[first]
        return vals

    def phi(self, x) -> np.ndarray:
        """Value of the (unique) basis function supported at each x."""
        x = np.asarray(x, dtype=float)
        return self._phi_at(x, self.bin_index(x))

    def basis_matrix(self, x) -> np.ndarray:
        """Full len(x) by d matrix [phi_j(x_k)]; for tests and small inputs."""
        x = np.asarray(x, dtype=float).reshape(-1)
        idx = self.bin_index(x)
        out = np.zeros((x.size, self.dim))
        rows = np.nonzero(idx >= 0)[0]
        out[rows, idx[rows]] = self._phi_at(x, idx)[rows]
        return out

    def evaluate(self, coefficients, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        coefficients = np.asarray(coefficients, dtype=float)
        idx = self.bin_index(x)
        out = self._phi_at(x, idx)
        inside = idx >= 0
        out[inside] *= coefficients[idx[inside]]
        return out

    def sum_phi_sq(self, x) -> np.ndarray:
        return self.phi(x) ** 2

    def __repr__(self):
        return f"LinearModel({self.label}, d={self.dim}, D={self.sup_constant:.6g})"


def build_model(window, measure: ReferenceMeasure, basis_kind: BasisKind) -> LinearModel:
    a, b = float(window[0]), float(window[1])
    if not a < b:
        raise InvalidArgumentError(f"window must satisfy a < b, got [{a}, {b}]")

    if isinstance(basis_kind, RegularHistogram):
        if int(basis_kind.m) != basis_kind.m or basis_kind.m < 1:
            raise InvalidArgumentError(f"number of bins must be a positive integer, got {basis_kind.m}")
        cuts = np.linspace(a, b, int(basis_kind.m) + 1)
        label = f"regular:{int(basis_kind.m)}"
    elif isinstance(basis_kind, (Histogram, RegularizedHistogram)):
        cuts = np.asarray(basis_kind.cutpoints, dtype=float)
        label = ("regularized:" if isinstance(basis_kind, RegularizedHistogram) else "cuts:") + str(cuts.size - 1)
    else:
        raise InvalidArgumentError(f"unknown basis kind {basis_kind!r}")

    if cuts.size < 2 or np.any(np.diff(cuts) <= 0) or not np.all(np.isfinite(cuts)):
        raise InvalidArgumentError("cutpoints must be finite and strictly increasing")
    if cuts[0] != a or cuts[-1] != b:
        raise InvalidArgumentError("cutpoints must span the window exactly")
    widths = np.diff(cuts)

    if isinstance(basis_kind, RegularizedHistogram):
        if measure.kind != "inverse_square":
            raise InvalidArgumentError("the regularized basis requires the inverse-square measure")
        if a != 0.0:
            raise InvalidArgumentError("the regularized basis requires x_0 = 0")
        lo, hi = cuts[:-1], cuts[1:]
        scales = np.empty(widths.size)
        scales[0] = 1.0 / np.sqrt(hi[0])
        scales[1:] = np.sqrt(lo[1:] * hi[1:] / widths[1:])
        return LinearModel((a, b), measure, cuts, scales, True, label)

    if a < 0.0 < b:
        raise InvalidArgumentError("window straddles the origin; estimate each side separately")
    if measure.kind != "lebesgue" and a <= 0.0 <= b:
        raise InvalidArgumentError("window touches the origin; use the regularized basis")
    if measure.kind == "lebesgue":
        scales = 1.0 / np.sqrt(widths)
    elif measure.kind == "inverse_square":
        scales = np.sqrt(cuts[:-1] * cuts[1:] / widths)
    else:
        masses = np.array([_quad(measure.weight, lo, hi)[0] for lo, hi in zip(cuts[:-1], cuts[1:])])
        if np.any(masses <= 0):
            raise InvalidArgumentError("weight function must be positive on the window")
        scales = 1.0 / np.sqrt(masses)
    return LinearModel((a, b), measure, cuts, scales, False, label)


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------

def _sizes(data):
    """Sizes and horizon of a JumpSet, or of increments used as pseudo-jumps."""
    if isinstance(data, JumpSet):
        return data.sizes, data.horizon
    if isinstance(data, IncrementSeries):
        return data.increments, data.horizon
    raise InvalidArgumentError(f"expected JumpSet or IncrementSeries, got {type(data).__name__}")


@dataclass(frozen=True, eq=False)
class ProjectionEstimate:
    model: LinearModel
    coefficients: np.ndarray
    horizon: float

    def __call__(self, x):
        return self.model.evaluate(self.coefficients, x)

    def levy_density(self, x):
        """Estimate of p = s * deta/dx."""
        x = np.asarray(x, dtype=float)
        vals = self(x)
        nz = vals != 0
        vals[nz] *= self.model.measure.density(x[nz])
        return vals

    @property
    def norm_sq(self) -> float:
        return float(np.dot(self.coefficients, self.coefficients))

    def table(self):
        """Rows (x_left, x_right, coeff, value_at_mid)."""
        lo, hi = self.model.edges
        mid = self(self.model.midpoints)
        return list(zip(lo.tolist(), hi.tolist(), self.coefficients.tolist(), mid.tolist()))


def coefficients_from_sizes(sizes, horizon, model: LinearModel) -> np.ndarray:
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    sizes = np.asarray(sizes, dtype=float)
    idx = model.bin_index(sizes)
    inside = idx >= 0
    vals = model._phi_at(sizes, idx)
    return np.bincount(idx[inside], weights=vals[inside], minlength=model.dim) / horizon


def coefficients_and_vhat(sizes, horizon, model: LinearModel):
    """(beta-hat, V-hat) from a single binning pass over the sizes."""
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    sizes = np.asarray(sizes, dtype=float)
    idx = model.bin_index(sizes)
    inside = idx >= 0
    vals = model._phi_at(sizes, idx)[inside]
    beta = np.bincount(idx[inside], weights=vals, minlength=model.dim) / horizon
    return beta, float(np.sum(vals**2) / horizon)


def project(jumps, model: LinearModel) -> ProjectionEstimate:
    """beta_i = (1/T) * sum over jumps in D of phi_i(size)."""
    sizes, horizon = _sizes(jumps)
    return ProjectionEstimate(model, coefficients_from_sizes(sizes, horizon, model), horizon)


def contrast(coefficients, model: LinearModel, jumps) -> float:
    """-(2/T) sum_jumps f(size) + ||f||^2 for f = sum_i c_i phi_i.

    Evaluated from f at the jump sizes directly, not through beta-hat.
    """
    c = np.asarray(coefficients, dtype=float).reshape(-1)
    if c.size != model.dim:
        raise InvalidArgumentError(f"expected {model.dim} coefficients, got {c.size}")
    sizes, horizon = _sizes(jumps)
    return float(-2.0 / horizon * np.sum(model.evaluate(c, sizes)) + np.dot(c, c))


def vhat_from_sizes(sizes, horizon, model: LinearModel) -> float:
    return float(np.sum(model.sum_phi_sq(sizes)) / horizon)


def vhat(jumps, model: LinearModel) -> float:
    """(1/T) * sum over jumps of sum_i phi_i(size)**2."""
    sizes, horizon = _sizes(jumps)
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    return vhat_from_sizes(sizes, horizon, model)


# --------------------------------------------------------------------------
# analytic densities and quadrature
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensitySpec:
    """A Levy density p(x) = dnu/dx, with optional closed-form interval masses.

    ``mass(lo, hi)`` should return nu([lo, hi]) when provided; it replaces
    quadrature for bins where the basis function is constant.
    """

    levy_density: Callable[[np.ndarray], np.ndarray]
    mass: Callable[[float, float], float] | None = None
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.levy_density(np.asarray(x, dtype=float)), dtype=float)

    def regularized(self, x, measure: ReferenceMeasure):
        """s = p / w under eta(dx) = w(x) dx."""
        x = np.asarray(x, dtype=float)
        return self(x) / measure.density(x)


def gamma_density(params: GammaParams) -> DensitySpec:
    alpha, beta = params.alpha, params.beta

    def p(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = alpha / x[pos] * np.exp(-x[pos] / beta)
        return out

    def mass(lo, hi):
        lo, hi = max(lo, 0.0), max(hi, 0.0)
        if hi <= lo:
            return 0.0
        upper = special.exp1(lo / beta) if lo > 0 else np.inf
        return float(alpha * (upper - special.exp1(hi / beta)))

    return DensitySpec(p, mass, f"gamma(alpha={alpha:g}, beta={beta:g})")


def vg_density(params: VGParams) -> DensitySpec:
    alpha, bp, bm = vg_to_gamma_pair(params)

    def p(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos, neg = x > 0, x < 0
        out[pos] = alpha / x[pos] * np.exp(-x[pos] / bp)
        out[neg] = alpha / -x[neg] * np.exp(x[neg] / bm)
        return out

    def one_side(lo, hi, beta):
        if hi <= lo:
            return 0.0
        upper = special.exp1(lo / beta) if lo > 0 else np.inf
        return alpha * (upper - special.exp1(hi / beta))

    def mass(lo, hi):
        return float(one_side(max(lo, 0.0), max(hi, 0.0), bp) + one_side(max(-hi, 0.0), max(-lo, 0.0), bm))

    return DensitySpec(p, mass, f"vg(theta={params.theta:g}, sigma={params.sigma:g}, nu={params.nu:g})")


def uniform_density(level: float, lo: float, hi: float) -> DensitySpec:
    """Compound Poisson jumps of rate level*(hi-lo), sizes uniform on [lo, hi]."""

    def p(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), level, 0.0)

    def mass(a, b):
        return float(level * max(0.0, min(b, hi) - max(a, lo)))

    return DensitySpec(p, mass, f"uniform(level={level:g}, [{lo:g}, {hi:g}])")


def _quad(func, lo, hi, tol=QUAD_TOL):
    val, err, *rest = integrate.quad(func, lo, hi, epsabs=tol, epsrel=1e-12, limit=200, full_output=1)
    if not (np.isfinite(val) and err <= max(tol, 1e-11 * abs(val))):
        raise NumericFailureError(
            f"quadrature on [{lo:g}, {hi:g}] did not converge",
            {"value": val, "abserr": err, "interval": (lo, hi), "info": rest[1] if len(rest) > 1 else None},
        )
    return val, err


def _bin_phi(model: LinearModel, i: int):
    scale = model.scales[i]
    if model.linear_first and i == 0:
        return lambda x: scale * x
    return lambda x: scale


def _scalar(f):
    return lambda x: float(f(np.array([x]))[0])


def orthogonal_projection(truth: DensitySpec, model: LinearModel, use_mass: bool = True) -> np.ndarray:
    """beta_i = int_D phi_i s deta = int_D phi_i p dx.

    Constant-phi bins use ``truth.mass`` when available and ``use_mass`` is
    set; everything else goes through adaptive Gauss-Kronrod quadrature.
    """
    p = _scalar(truth)
    out = np.empty(model.dim)
    for i, (lo, hi) in enumerate(zip(*model.edges)):
        if use_mass and truth.mass is not None and not (model.linear_first and i == 0):
            out[i] = model.scales[i] * truth.mass(lo, hi)
        else:
            phi = _bin_phi(model, i)
            out[i] = _quad(lambda x: phi(x) * p(x), lo, hi)[0]
    return out


def variance_weights(truth: DensitySpec, model: LinearModel) -> np.ndarray:
    """int phi_i**2 s deta = int phi_i**2 p dx, per basis function."""
    p = _scalar(truth)
    out = np.empty(model.dim)
    for i, (lo, hi) in enumerate(zip(*model.edges)):
        if truth.mass is not None and not (model.linear_first and i == 0):
            out[i] = model.scales[i] ** 2 * truth.mass(lo, hi)
        else:
            phi = _bin_phi(model, i)
            out[i] = _quad(lambda x: phi(x) ** 2 * p(x), lo, hi)[0]
    return out


def variance_term(truth: DensitySpec, model: LinearModel, horizon: float) -> float:
    """E[chi^2] = (1/T) sum_i int phi_i**2 s deta."""
    return float(variance_weights(truth, model).sum() / horizon)


def density_norm_sq(truth: DensitySpec, model: LinearModel) -> float:
    """||s||^2 = int_D s**2 deta = int_D p**2 / w dx, split at the cutpoints."""
    w = model.measure.density
    f = _scalar(lambda x: truth(x) ** 2 / w(x))
    return float(sum(_quad(f, lo, hi)[0] for lo, hi in zip(*model.edges)))


def l2_distance_sq(estimate_or_coeffs, truth: DensitySpec, model: LinearModel | None = None) -> float:
    """||s - f||^2 under eta, by quadrature bin by bin.

    The integrand (p - f w)**2 / w equals (s - f)**2 w and stays finite at the
    origin for the regularized basis.
    """
    if isinstance(estimate_or_coeffs, ProjectionEstimate):
        model = estimate_or_coeffs.model if model is None else model
        coeffs = estimate_or_coeffs.coefficients
    else:
        coeffs = np.asarray(estimate_or_coeffs, dtype=float)
    if model is None:
        raise InvalidArgumentError("a model is required with raw coefficients")
    if coeffs.size != model.dim:
        raise InvalidArgumentError(f"expected {model.dim} coefficients, got {coeffs.size}")
    w = model.measure.density
    total = 0.0
    for i, (lo, hi) in enumerate(zip(*model.edges)):
        phi, c = _bin_phi(model, i), coeffs[i]

        def integrand(x, phi=phi, c=c):
            wx = float(w(np.array([x]))[0])
            px = float(truth(np.array([x]))[0])
            return (px - c * phi(x) * wx) ** 2 / wx

        total += _quad(integrand, lo, hi)[0]
    return total
