"""Penalized projection estimators: penalties, admissible models and selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyAdmissibleError, InvalidArgumentError
from .projection import (
    LEBESGUE,
    INVERSE_SQUARE,
    LinearModel,
    ProjectionEstimate,
    RegularHistogram,
    RegularizedHistogram,
    _sizes,
    build_model,
    coefficients_and_vhat,
    vhat_from_sizes,
)


@dataclass(frozen=True)
class PenaltyForm:
    """pen(m), taken at equality in their lower bounds.

    A: c * D_m * N / T^2 + c1 * d_m / T, N the number of jumps in D
    B: c * Vhat_m / T
    C: c * Vhat_m / T + c1 * D_m / T + c2 * d_m / T
    """

    kind: str = "B"
    c: float = 2.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ("A", "B", "C"):
            raise InvalidArgumentError(f"penalty kind must be A, B or C, got {self.kind!r}")
        if not self.c > 1:
            raise InvalidArgumentError(f"penalty constant c must exceed 1, got {self.c}")
        if kind in ("A", "C") and not self.c1 > 0:
            raise InvalidArgumentError(f"form {kind} needs c1 > 0")
        if kind == "C" and not self.c2 > 0:
            raise InvalidArgumentError("form C needs c2 > 0")

    @classmethod
    def parse(cls, text: str) -> "PenaltyForm":
        """'b:2', 'a:2,1', 'c:2,1,1'."""
        kind, _, consts = text.partition(":")
        values = [float(v) for v in consts.split(",") if v.strip()] if consts else []
        return cls(kind, *values)

    def __str__(self):
        consts = {"A": (self.c, self.c1), "B": (self.c,), "C": (self.c, self.c1, self.c2)}[self.kind]
        return f"{self.kind.lower()}:" + ",".join(f"{v:g}" for v in consts)


DEFAULT_PENALTY = PenaltyForm("B", 2.0)


def _penalty_value(form, sizes, horizon, model, vhat_value=None):
    T = horizon
    if form.kind == "A":
        a, b = model.window
        n_in = int(np.count_nonzero((sizes >= a) & (sizes <= b)))
        return form.c * model.sup_constant * n_in / T**2 + form.c1 * model.dim / T
    v = vhat_from_sizes(sizes, T, model) if vhat_value is None else vhat_value
    pen = form.c * v / T
    if form.kind == "C":
        pen += form.c1 * model.sup_constant / T + form.c2 * model.dim / T
    return pen


def penalty(form: PenaltyForm, jumps, model: LinearModel) -> float:
    sizes, horizon = _sizes(jumps)
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    return float(_penalty_value(form, np.asarray(sizes), horizon, model))


def _is_admissible(model, horizon) -> bool:
    # D_m = m/(b-a) carries round-off from the bin edges
    return model.sup_constant <= horizon * (1.0 + 1e-12)


def admissible(collection, horizon: float) -> list[LinearModel]:
    """Models with D_m <= T, in collection order."""
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    kept = [m for m in collection if _is_admissible(m, horizon)]
    if not kept:
        smallest = min((m.sup_constant for m in collection), default=float("nan"))
        raise EmptyAdmissibleError(
            f"no model has D_m <= T={horizon:g} (smallest D_m is {smallest:g}); "
            "increase T or use coarser models"
        )
    return kept


def regular_histograms(window, m_values, measure=LEBESGUE) -> list[LinearModel]:
    return [build_model(window, measure, RegularHistogram(int(m))) for m in m_values]


def regularized_histograms(b: float, m_values) -> list[LinearModel]:
    return [build_model((0.0, b), INVERSE_SQUARE, RegularizedHistogram.regular(b, int(m))) for m in m_values]


def default_m_max(horizon: float, window) -> int:
    """floor(T * (b - a)): the largest regular histogram with D_m <= T."""
    return max(1, int(np.floor(horizon * (window[1] - window[0]))))


@dataclass(frozen=True)
class ModelScore:
    index: int
    label: str
    dim: int
    sup_constant: float
    contrast: float
    penalty: float

    @property
    def score(self) -> float:
        return self.contrast + self.penalty


@dataclass(eq=False)
class SelectionResult:
    chosen_index: int
    estimate: ProjectionEstimate
    table: list[ModelScore]
    notes: list[str] = field(default_factory=list)

    @property
    def chosen(self) -> ModelScore:
        return next(row for row in self.table if row.index == self.chosen_index)

    def rows(self):
        """Rows for the selection report CSV."""
        return [
            (_m_of(r.label), r.dim, r.sup_constant, r.contrast, r.penalty, r.score, int(r.index == self.chosen_index))
            for r in self.table
        ]


def _m_of(label: str) -> str:
    """The bin count m of a model label such as 'regular:10'."""
    return label.rpartition(":")[2]


def _select_sizes(sizes, horizon, collection, form, admissible_only=True):
    sizes = np.asarray(sizes, dtype=float)
    if collection:
        # points outside every window never enter any statistic
        lo = min(m.window[0] for m in collection)
        hi = max(m.window[1] for m in collection)
        sizes = sizes[(sizes >= lo) & (sizes <= hi)]
    if admissible_only:
        kept_idx = [i for i, m in enumerate(collection) if _is_admissible(m, horizon)]
    else:
        kept_idx = list(range(len(collection)))
    if not kept_idx:
        admissible(collection, horizon)  # raises with the diagnostic message
    # sorted sizes make the per-model binning cache friendly
    sizes = np.sort(sizes)
    table, coeffs = [], {}
    for i in kept_idx:
        model = collection[i]
        beta, v = coefficients_and_vhat(sizes, horizon, model)
        coeffs[i] = beta
        table.append(
            ModelScore(
                index=i,
                label=model.label,
                dim=model.dim,
                sup_constant=model.sup_constant,
                contrast=-float(np.dot(beta, beta)),
                penalty=float(_penalty_value(form, sizes, horizon, model, v)),
            )
        )
    best = min(table, key=lambda r: (r.score, r.dim, r.index))
    estimate = ProjectionEstimate(collection[best.index], coeffs[best.index], horizon)
    return SelectionResult(best.index, estimate, table)


def select(jumps, collection, form: PenaltyForm = DEFAULT_PENALTY, admissible_only: bool = True) -> SelectionResult:
    """Minimize contrast(beta-hat_m) + pen(m) = -||beta-hat_m||^2 + pen(m) over
    the admissible models.  Ties go to the smaller dimension, then the earlier
    model.  ``admissible_only=False`` scores every model regardless of D_m,
    which is useful for small worked examples."""
    sizes, horizon = _sizes(jumps)
    if not horizon > 0:
        raise InvalidArgumentError("horizon must be positive")
    collection = list(collection)
    if not collection:
        raise InvalidArgumentError("empty model collection")
    return _select_sizes(sizes, horizon, collection, form, admissible_only)
