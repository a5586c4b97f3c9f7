"""The ten acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict that is repeated in the
terminal summary.
"""

import math

import numpy as np
import pytest

from levyest.evaluation import (
    ExperimentConfig,
    check_approx_bias,
    check_oracle,
    check_rate,
    check_regularized_alpha,
    check_variance_term,
    mc_risk,
    table1,
)
from levyest.fitting import vg_moments
from levyest.levy_sim import JumpSet, VGParams, vg_to_gamma_pair
from levyest.projection import (
    INVERSE_SQUARE,
    LEBESGUE,
    Histogram,
    RegularHistogram,
    RegularizedHistogram,
    build_model,
    contrast,
    project,
)
from oracles import vg_central_moments

pytestmark = pytest.mark.slow


def test_c01_vg_parameter_conversion(criterion):
    alpha, bp, bm = vg_to_gamma_pair(VGParams.from_sigma2(-0.00056256, 0.01373584, 0.002))
    got = (alpha, bp, bm)
    ref = (500.0, 0.0037056, 0.0037067)
    ok = all(f"{g:.3g}" == f"{r:.3g}" for g, r in zip(got, ref))
    assert criterion(1, ok, f"(alpha, beta+, beta-) = ({alpha:.6g}, {bp:.6g}, {bm:.6g}) vs {ref}")


def _random_model(gen):
    kind = gen.integers(4)
    if kind == 0:
        a = gen.uniform(0.0, 1.0)
        return build_model((a, a + gen.uniform(0.2, 2.0)), LEBESGUE, RegularHistogram(int(gen.integers(1, 30))))
    cuts = np.sort(gen.uniform(0.05, 3.0, int(gen.integers(2, 20))))
    cuts = cuts[np.concatenate([[True], np.diff(cuts) > 1e-3])]
    if cuts.size < 2:
        cuts = np.array([0.1, 1.0])
    if kind == 1:
        return build_model((cuts[0], cuts[-1]), LEBESGUE, Histogram(tuple(cuts)))
    if kind == 2:
        return build_model((cuts[0], cuts[-1]), INVERSE_SQUARE, Histogram(tuple(cuts)))
    cuts = np.concatenate([[0.0], cuts])
    return build_model((0.0, cuts[-1]), INVERSE_SQUARE, RegularizedHistogram(tuple(cuts)))


def test_c02_minimizer_identity(criterion):
    gen = np.random.default_rng(2)
    worst, violations = 0.0, 0
    for _ in range(20):
        model = _random_model(gen)
        a, b = model.window
        n = int(gen.integers(1, 200))
        jumps = JumpSet(10.0, gen.random(n) * 10.0, gen.uniform(max(a, 1e-3), b, n))
        beta = project(jumps, model).coefficients
        best = contrast(beta, model, jumps)
        worst = max(worst, abs(best + float(np.dot(beta, beta))))
        for c in beta + gen.normal(scale=1.0 + np.abs(beta).max(), size=(1000, model.dim)):
            gap = contrast(c, model, jumps) - best
            quad = float(np.sum((c - beta) ** 2))
            worst = max(worst, abs(gap - quad) / max(1.0, quad))
            if not gap > 0:
                violations += 1
    ok = violations == 0 and worst <= 1e-12
    assert criterion(2, ok, f"20 models x 1000 vectors: {violations} violations, "
                            f"max deviation from the quadratic form {worst:.2e} (band 1e-12)")


def test_c03_variance_term(criterion):
    res = check_variance_term(replications=1000)
    assert criterion(3, res.passed, res.details[0])


def test_c04_unbiased_coefficients(criterion):
    cfg = ExperimentConfig(m_values=(10,), replications=1000, n_terms=2000)
    table = mc_risk(cfg)
    z = np.abs(table.coefficient_means[10] - table.projections[10]) / table.coefficient_ses[10]
    ok = bool(np.all(z <= 3.0))
    assert criterion(4, ok, f"m=10, 1000 reps: max |mean - target| / SE = {z.max():.2f} (band 3)")


def test_c05_oracle_inequality(criterion):
    res = check_oracle(replications=500)
    assert criterion(5, res.passed, res.details[0])


def test_c06_rate(criterion):
    res = check_rate(replications=100)
    assert criterion(6, res.passed, res.details[0])


def test_c07_discrete_approximation(criterion):
    res = check_approx_bias(replications=2000)
    assert criterion(7, res.passed, "; ".join(res.details))


def test_c08_table1_band(criterion):
    jump = table1(dts=(0.5,), replications=50, modes=("jump",))[0].stats
    inc = table1(dts=(0.01,), replications=50, modes=("increment",))[0].stats
    lse = (jump["ppe_lse_alpha"][0], jump["ppe_lse_beta"][0])
    mle = (jump["mle_alpha"][0], jump["mle_beta"][0])
    mle_inc = (inc["mle_alpha"][0], inc["mle_beta"][0])
    ok = (all(abs(v - 1.0) <= 0.25 for v in lse) and all(abs(v - 1.0) <= 0.1 for v in mle)
          and all(abs(v - 1.0) <= 0.1 for v in mle_inc))
    assert criterion(8, ok, f"jump dt=0.5: PPE-LSE median ({lse[0]:.3f}, {lse[1]:.3f}) band 0.25, "
                            f"MLE median ({mle[0]:.3f}, {mle[1]:.3f}) band 0.1; "
                            f"increment dt=0.01: MLE median ({mle_inc[0]:.3f}, {mle_inc[1]:.3f}) band 0.1")


def test_c09_regularized_origin(criterion):
    res = check_regularized_alpha(replications=1000)
    assert criterion(9, res.passed, "; ".join(res.details))


def test_c10_vg_moment_oracle(criterion):
    worst = 0.0
    for theta, sigma, nu, dt in ((1.0, 1.0, 0.5, 1.0), (-0.3, 0.8, 0.2, 0.25)):
        ours = vg_moments(VGParams(theta, sigma, nu), dt)
        oracle = vg_central_moments(theta, sigma, nu, dt)
        worst = max(worst, max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(ours, oracle)))
    assert criterion(10, worst <= 1e-6, f"max relative gap to numerical cumulants {worst:.2e} (band 1e-6)")
