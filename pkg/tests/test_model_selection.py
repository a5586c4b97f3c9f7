import numpy as np
import pytest

from levyest.errors import EmptyAdmissibleError, InvalidArgumentError
from levyest.levy_sim import GammaParams, JumpSet, RngStream, simulate_gamma_jumps
from levyest.model_selection import (
    DEFAULT_PENALTY,
    PenaltyForm,
    admissible,
    default_m_max,
    penalty,
    regular_histograms,
    regularized_histograms,
    select,
)
from levyest.projection import LEBESGUE, RegularHistogram, build_model, contrast, project

THREE = JumpSet(1.0, [0.1, 0.5, 0.9], [0.2, 0.3, 0.7])
M2 = build_model((0.0, 1.0), LEBESGUE, RegularHistogram(2))


def test_penalty_examples():
    assert penalty(PenaltyForm("B", 2.0), JumpSet.empty(1.0), M2) == 0.0
    assert penalty(PenaltyForm("B", 2.0), THREE, M2) == pytest.approx(12.0, rel=1e-14)
    assert penalty(PenaltyForm("A", 2.0, 1.0), THREE, M2) == pytest.approx(14.0, rel=1e-14)
    # C = B + c1 D/T + c2 d/T = 12 + 1*2 + 0.5*2
    assert penalty(PenaltyForm("C", 2.0, 1.0, 0.5), THREE, M2) == pytest.approx(15.0, rel=1e-14)


def test_form_a_counts_only_window_jumps():
    jumps = JumpSet(1.0, [0.1, 0.2, 0.3], [0.2, 1.5, -0.4])
    assert penalty(PenaltyForm("A", 2.0, 1.0), jumps, M2) == pytest.approx(2 * 2 * 1 + 2, rel=1e-14)


@pytest.mark.parametrize("args", [("B", 1.0), ("B", 0.5), ("A", 2.0, 0.0), ("C", 2.0, 1.0, 0.0), ("D", 2.0)])
def test_penalty_constant_validation(args):
    with pytest.raises(InvalidArgumentError):
        PenaltyForm(*args)


def test_penalty_parse_roundtrip():
    for text in ("b:2", "a:3,1", "c:2,1,0.5"):
        assert str(PenaltyForm.parse(text)) == text
    assert PenaltyForm.parse("B:2.5").c == 2.5


def test_admissible_examples():
    coll = regular_histograms((0.0, 1.0), range(1, 41))
    kept = admissible(coll, 20.0)
    assert [m.dim for m in kept] == list(range(1, 21))
    assert len(admissible(coll, 1e6)) == 40
    with pytest.raises(EmptyAdmissibleError):
        admissible(coll, 0.5)


def test_default_m_max():
    assert default_m_max(365.0, (0.1, 1.0)) == 328
    assert default_m_max(20.0, (0.0, 1.0)) == 20


def test_select_single_model():
    res = select(THREE, [M2], admissible_only=False)
    assert res.chosen_index == 0
    assert select(THREE, regular_histograms((0.0, 1.0), [1])).chosen_index == 0


def test_select_hand_example_prefers_m2():
    jumps = JumpSet(1.0, [0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
    coll = regular_histograms((0.0, 1.0), [1, 2])
    # D_2 = 2 > T = 1, so the worked example scores every model
    res = select(jumps, coll, PenaltyForm("B", 2.0), admissible_only=False)
    scores = [r.score for r in res.table]
    assert scores == pytest.approx([-3.0, -6.0], abs=1e-12)
    assert res.chosen.dim == 2


def test_select_penalty_dominates():
    jumps = JumpSet(1.0, [0.1, 0.2], [0.1, 0.7])
    coll = regular_histograms((0.0, 1.0), [1, 2, 4])
    res = select(jumps, coll, PenaltyForm("B", 2.0), admissible_only=False)
    # score(m) = m (c N - sum J_i^2) / T^2 = m (4 - 2) for m >= 2, and 1*(4-4) = 0 for m = 1
    assert [r.score for r in res.table] == pytest.approx([0.0, 4.0, 8.0], abs=1e-12)
    assert res.chosen.dim == 1


def test_reduced_score_formula():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 30.0, 400, RngStream(12))
    a, b, T, c = 0.1, 1.0, 30.0, 2.0
    coll = regular_histograms((a, b), range(1, 28))
    res = select(jumps, coll, PenaltyForm("B", c))
    s = jumps.sizes
    for row, model in zip(res.table, coll):
        counts = np.bincount(model.bin_index(s[(s >= a) & (s <= b)]), minlength=model.dim)
        reduced = model.dim / (T**2 * (b - a)) * (c * counts.sum() - np.sum(counts**2))
        assert row.score == pytest.approx(reduced, abs=1e-11)


def test_score_is_contrast_plus_penalty():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 30.0, 400, RngStream(13))
    coll = regular_histograms((0.1, 1.0), range(1, 20))
    form = PenaltyForm("C", 2.0, 0.5, 0.5)
    res = select(jumps, coll, form)
    for row, model in zip(res.table, coll):
        beta = project(jumps, model).coefficients
        assert row.contrast == pytest.approx(contrast(beta, model, jumps), abs=1e-12)
        assert row.score == row.contrast + row.penalty
        assert row.penalty == pytest.approx(penalty(form, jumps, model), rel=1e-14)


def test_ties_go_to_smaller_dimension():
    res = select(JumpSet.empty(5.0), regular_histograms((0.1, 1.0), [4, 2, 1, 3]))
    assert res.chosen.dim == 1
    # identical models: the earlier index wins
    res = select(JumpSet.empty(5.0), regular_histograms((0.1, 1.0), [2, 2]))
    assert res.chosen_index == 0


def test_inadmissible_models_are_skipped():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 5.0, 200, RngStream(14))
    res = select(jumps, regular_histograms((0.1, 1.0), range(1, 30)))
    assert all(r.sup_constant <= 5.0 for r in res.table)
    with pytest.raises(EmptyAdmissibleError):
        select(jumps, regular_histograms((0.1, 1.0), [10, 20]))


def test_regularized_selection_runs():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 365.0, 20000, RngStream(15))
    res = select(jumps, regularized_histograms(1.0, range(1, 60)))
    assert res.chosen.dim >= 2
    # first-bin estimate of alpha is near 1
    x1 = res.estimate.model.cutpoints[1]
    alpha_hat = res.estimate(np.array([x1 / 2]))[0] / (x1 / 2)
    assert abs(alpha_hat - 1.0) < 0.2


def test_selection_rows_header_order():
    res = select(THREE, regular_histograms((0.0, 1.0), [1, 2]), admissible_only=False)
    rows = res.rows()
    assert rows[0][:2] == ("1", 1)
    assert sum(r[-1] for r in rows) == 1


def test_default_selection_respects_admissibility():
    jumps = JumpSet(1.0, [0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
    res = select(jumps, regular_histograms((0.0, 1.0), [1, 2]))
    assert [r.dim for r in res.table] == [1]


def test_selection_invariant_to_times_and_order():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 30.0, 300, RngStream(16))
    coll = regular_histograms((0.1, 1.0), range(1, 28))
    base = select(jumps, coll)
    moved = select(JumpSet(30.0, jumps.times[::-1] / 2, jumps.sizes[::-1]), coll)
    assert moved.chosen_index == base.chosen_index
    for r0, r1 in zip(base.table, moved.table):
        assert r1.score == pytest.approx(r0.score, rel=1e-12, abs=1e-15)


def test_form_b_penalty_nondecreasing_in_m():
    jumps = simulate_gamma_jumps(GammaParams(1, 1), 365.0, 2000, RngStream(17))
    pens = [penalty(DEFAULT_PENALTY, jumps, m) for m in regular_histograms((0.1, 1.0), range(1, 60))]
    assert np.all(np.diff(pens) >= -1e-12)
