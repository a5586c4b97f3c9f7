"""Property-based tests of the exact identities."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from levyest.fitting import lse_gamma_log, mle_gamma
from levyest.levy_sim import (
    GammaParams,
    IncrementSeries,
    JumpSet,
    RngStream,
    VGParams,
    gamma_pair_to_vg,
    jumps_to_increments,
    simulate_gamma_jumps,
    vg_to_gamma_pair,
)
from levyest.model_selection import regular_histograms, select
from levyest.projection import (
    INVERSE_SQUARE,
    LEBESGUE,
    Histogram,
    ProjectionEstimate,
    RegularHistogram,
    RegularizedHistogram,
    build_model,
    contrast,
    project,
)
from oracles import dense_sup

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def cutpoints(draw, lo=0.05, hi=3.0, max_bins=8):
    n = draw(st.integers(min_value=1, max_value=max_bins))
    gaps = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    start = draw(st.floats(lo, 1.0))
    scale = (hi - start) / sum(gaps)
    return tuple(np.concatenate([[start], start + np.cumsum(gaps) * scale]))


@st.composite
def models(draw):
    kind = draw(st.sampled_from(["regular", "hist", "hist-inv", "regularized"]))
    if kind == "regular":
        a = draw(st.floats(0.0, 1.0))
        return build_model((a, a + draw(st.floats(0.2, 2.0))), LEBESGUE, RegularHistogram(draw(st.integers(1, 12))))
    cuts = draw(cutpoints())
    if kind == "hist":
        return build_model((cuts[0], cuts[-1]), LEBESGUE, Histogram(cuts))
    if kind == "hist-inv":
        return build_model((cuts[0], cuts[-1]), INVERSE_SQUARE, Histogram(cuts))
    cuts = (0.0,) + cuts
    return build_model((0.0, cuts[-1]), INVERSE_SQUARE, RegularizedHistogram(cuts))


@settings(max_examples=20, deadline=None)
@given(models(), seeds)
def test_projection_minimizes_the_contrast(model, seed):
    gen = np.random.default_rng(seed)
    a, b = model.window
    jumps = JumpSet(10.0, gen.random(60) * 10.0, gen.uniform(max(a, 1e-3), b, 60))
    beta = project(jumps, model).coefficients
    best = contrast(beta, model, jumps)
    assert best == -float(np.dot(beta, beta)) or math.isclose(best, -np.dot(beta, beta), rel_tol=1e-12, abs_tol=1e-12)
    cands = beta + gen.normal(scale=1.0 + np.abs(beta).max(), size=(50, model.dim))
    for c in cands:
        # the quadratic form: gamma(c) - gamma(beta) = ||c - beta||^2
        gap = contrast(c, model, jumps) - best
        assert gap >= 0
        assert math.isclose(gap, float(np.sum((c - beta) ** 2)), rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=20, deadline=None)
@given(models())
def test_sup_constant_matches_dense_grid(model):
    assert math.isclose(dense_sup(model), model.sup_constant, rel_tol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 300), st.integers(1, 500))
def test_binning_conserves_mass(seed, n_terms, n):
    jumps = simulate_gamma_jumps(GammaParams(1.0, 1.0), 5.0, n_terms, RngStream(seed))
    inc = jumps_to_increments(jumps, n)
    assert inc.n == n
    assert math.isclose(inc.increments.sum(), jumps.sizes.sum(), rel_tol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-3, 5), st.floats(1e-4, 10))
def test_vg_parameter_roundtrip(theta, sigma, nu):
    p = VGParams(theta, sigma, nu)
    q = gamma_pair_to_vg(*vg_to_gamma_pair(p))
    assert math.isclose(q.nu, p.nu, rel_tol=1e-10)
    assert math.isclose(q.sigma, p.sigma, rel_tol=1e-10)
    assert math.isclose(q.theta, p.theta, rel_tol=1e-10, abs_tol=1e-10 * (abs(p.theta) + p.sigma / math.sqrt(p.nu)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 15))
def test_log_lse_invariant_under_grid_order(seed, m):
    gen = np.random.default_rng(seed)
    model = build_model((0.1, 1.0), LEBESGUE, RegularHistogram(m))
    est = ProjectionEstimate(model, gen.uniform(0.1, 3.0, m), 1.0)
    base = lse_gamma_log(est)
    perm = lse_gamma_log(est, gen.permutation(model.midpoints))
    assert perm.params == base.params


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.integers(20, 200))
def test_log_lse_recovers_any_gamma_shape(alpha, beta, seed):
    m = 3 + seed % 10
    model = build_model((0.05, 2.0), LEBESGUE, RegularHistogram(m))
    x = model.midpoints
    est = ProjectionEstimate(model, alpha / x * np.exp(-x / beta) * math.sqrt(1.95 / m), 1.0)
    fit = lse_gamma_log(est)
    assert math.isclose(fit.params["alpha"], alpha, rel_tol=1e-9)
    assert math.isclose(fit.params["beta"], beta, rel_tol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_selection_ignores_times_and_order(seed):
    gen = np.random.default_rng(seed)
    jumps = simulate_gamma_jumps(GammaParams(1.0, 1.0), 20.0, 200, RngStream(seed))
    coll = regular_histograms((0.1, 1.0), range(1, 19))
    base = select(jumps, coll)
    perm = gen.permutation(len(jumps))
    moved = select(JumpSet(20.0, gen.random(len(jumps)) * 20.0, jumps.sizes[perm]), coll)
    assert moved.chosen_index == base.chosen_index
    for r0, r1 in zip(base.table, moved.table):
        assert math.isclose(r0.score, r1.score, rel_tol=1e-12, abs_tol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 100.0))
def test_mle_scale_family(seed, c):
    gen = np.random.default_rng(seed)
    x = gen.gamma(0.7, 1.3, size=200)
    base = mle_gamma(IncrementSeries(100.0, x))
    scaled = mle_gamma(IncrementSeries(100.0, c * x))
    assert math.isclose(scaled.params["alpha"], base.params["alpha"], rel_tol=1e-9)
    assert math.isclose(scaled.params["beta"], c * base.params["beta"], rel_tol=1e-9)
