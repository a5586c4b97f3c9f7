"""Estimators from equally spaced observations, with increments standing in for jumps.

Every statistic of the jump-based estimators depends on the jump sizes only,
so the approximate versions call the same code with the increments
X(t_k) - X(t_{k-1}) as pseudo-jump sizes.  When each increment holds at most
one jump, the two coincide exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .levy_sim import IncrementSeries, JumpSet
from .model_selection import PenaltyForm, SelectionResult, _select_sizes
from .projection import LinearModel, ProjectionEstimate, coefficients_from_sizes, vhat_from_sizes

AWAY_FROM_ORIGIN = "away_from_origin"
SMALL_AT_ORIGIN = "small_at_origin"

OUTSIDE_SCOPE_NOTE = (
    "regularized basis: x/sqrt(x1) is O(x) at the origin, not o(x^2), so the "
    "small-time convergence of the increment-based estimator is not covered"
)


@dataclass(frozen=True)
class IntegrandSpec:
    """f on the nonzero reals, with the condition under which I_n(f) -> I(f).

    ``condition`` is AWAY_FROM_ORIGIN (f = 1_(a,b] h with [a,b] away from 0) or
    SMALL_AT_ORIGIN (f continuous and f(x)/x^2 -> 0).  f(0) is always 0.
    """

    func: Callable[[np.ndarray], np.ndarray]
    condition: str = AWAY_FROM_ORIGIN
    name: str = ""

    def __post_init__(self):
        if self.condition not in (AWAY_FROM_ORIGIN, SMALL_AT_ORIGIN):
            raise InvalidArgumentError(f"unknown integrand condition {self.condition!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.func(x), dtype=float) * np.ones_like(x)
        return np.where(x == 0.0, 0.0, out)


def indicator(lo: float, hi: float) -> IntegrandSpec:
    """1[lo <= x <= hi] on an interval excluding the origin."""
    if lo <= 0.0 <= hi:
        raise InvalidArgumentError("indicator interval must exclude the origin")
    return IntegrandSpec(lambda x: ((x >= lo) & (x <= hi)).astype(float), AWAY_FROM_ORIGIN, f"1[{lo:g},{hi:g}]")


ZERO = IntegrandSpec(lambda x: np.zeros_like(x), SMALL_AT_ORIGIN, "zero")


def poisson_integral(jumps: JumpSet, f: IntegrandSpec) -> float:
    """I(f) = sum over jumps of f(size)."""
    return float(np.sum(f(jumps.sizes)))


def poisson_integral_approx(increments: IncrementSeries, f: IntegrandSpec) -> float:
    """I_n(f) = sum_k f(X(t_k) - X(t_{k-1}))."""
    return float(np.sum(f(increments.increments)))


def _nonzero(increments: IncrementSeries) -> np.ndarray:
    # a zero increment carries no jump; every integrand vanishes there
    x = increments.increments
    return x[x != 0.0]


def approx_project(increments: IncrementSeries, model: LinearModel) -> ProjectionEstimate:
    if not isinstance(increments, IncrementSeries):
        raise InvalidArgumentError("approx_project expects an IncrementSeries")
    coeffs = coefficients_from_sizes(_nonzero(increments), increments.horizon, model)
    return ProjectionEstimate(model, coeffs, increments.horizon)


def approx_penalty(increments: IncrementSeries, model: LinearModel, c: float = 2.0) -> float:
    """c * pen^n(m), pen^n(m) = (1/T^2) sum_k sum_i phi_i(increment_k)**2."""
    T = increments.horizon
    return float(c * vhat_from_sizes(_nonzero(increments), T, model) / T)


def approx_select(increments: IncrementSeries, collection, c: float = 2.0,
                  admissible_only: bool = True) -> SelectionResult:
    """Minimize -||s^n_m||^2 + c * pen^n(m) over models with D_m <= T."""
    if not isinstance(increments, IncrementSeries):
        raise InvalidArgumentError("approx_select expects an IncrementSeries")
    collection = list(collection)
    if not collection:
        raise InvalidArgumentError("empty model collection")
    result = _select_sizes(_nonzero(increments), increments.horizon, collection, PenaltyForm("B", c),
                           admissible_only)
    if any(m.linear_first for m in collection):
        result.notes.append(OUTSIDE_SCOPE_NOTE)
    return result
