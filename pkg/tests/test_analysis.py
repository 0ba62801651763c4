import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zml import GridSpec, RealField, lp_norm
from zml.analysis import (
    NormRecord,
    asymptotic_profile,
    carlen_loss_constant,
    fit_decay,
    g_functional,
    holder_interpolation_check,
    linearization_distance,
    profile_distance,
    record_norms,
    scaling_collapse,
    x_weight,
)
from zml.analysis import _resample
from zml.errors import GridMismatch, WindowTooNarrow
from zml.initial_data import make_dipole, make_fractional_bump, smooth_bump
from zml.operators import gauss_kernel, heat_semigroup, self_similar_profile
from zml.oracles import heat_exact

from conftest import band_limited


def test_record_norms_gaussian(grid40):
    r = record_norms(gauss_kernel(grid40, 1.0), 1.0, p_list=(3.0,), q=2.0)
    assert r.l1 == pytest.approx(1.0, abs=1e-12)
    assert r.linf == pytest.approx((4 * np.pi) ** -0.5, rel=1e-12)
    assert r.lq == pytest.approx((8 * np.pi) ** -0.25, rel=1e-10)
    assert r.get(3.0) == r.lp_extra[3.0] and r.get(1) == r.l1 and r.get(np.inf) == r.linf
    assert r.get("lq") == r.get(2.0)


def test_record_norms_zero(grid40):
    r = record_norms(grid40.zeros(), 2.0, p_list=(1.5,))
    assert r.l1 == r.lq == r.linf == r.mass == r.lp_extra[1.5] == 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_record_norms_interpolation(seed):
    g = GridSpec(1, 5.0, 64)
    u = RealField(g, np.random.default_rng(seed).normal(size=g.shape))
    r = record_norms(u, 1.0, q=2.0)
    assert r.lq <= np.sqrt(r.l1 * r.linf) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.1, 2.0), c=st.floats(0.01, 100.0))
def test_fit_decay_exact_power_law(alpha, c):
    t = np.geomspace(1, 1000, 25)
    fit = fit_decay(list(zip(t, c * t**-alpha)), window=(1, 1000))
    assert fit.exponent == pytest.approx(-alpha, abs=1e-10)
    assert fit.prefactor == pytest.approx(c, rel=1e-9)
    assert fit.residual <= 1e-10 and fit.count == 25


def test_fit_decay_default_window_and_errors():
    t = np.geomspace(1, 1000, 31)
    fit = fit_decay(list(zip(t, t**-0.3)))
    assert fit.window == (100.0, 1000.0) and fit.count == 11
    with pytest.raises(WindowTooNarrow):
        fit_decay(list(zip(t, t**-0.3)), window=(1, 5))
    with pytest.raises(WindowTooNarrow):
        fit_decay(list(zip(t[:5], t[:5] ** -0.3)), window=(1, 1000))
    with pytest.raises(WindowTooNarrow):
        fit_decay([])
    with pytest.raises(ValueError):
        fit_decay(list(zip(t, -(t**-0.3))), window=(1, 1000))


def test_fit_decay_norm_records():
    recs = [NormRecord(t, 2 * t**-0.25, t**-0.5, t**-0.7, 0.0) for t in np.geomspace(1, 100, 20)]
    assert fit_decay(recs, "l1", (1, 100)).exponent == pytest.approx(-0.25, abs=1e-12)
    assert fit_decay(recs, "linf", (1, 100)).exponent == pytest.approx(-0.7, abs=1e-12)
    assert fit_decay(recs, lambda r: r.lq, (1, 100)).exponent == pytest.approx(-0.5, abs=1e-12)


def _heat_series(field, ts, t0=1.0):
    # the datum is the state at t0, so ts are effective times
    return [(t, lp_norm(heat_semigroup(field, t - t0), 1, refine=4)) for t in ts]


def test_fit_decay_heat_profile():
    g = GridSpec(1, 200.0, 4096)
    ts = np.geomspace(1, 100, 30)
    fit = fit_decay(_heat_series(self_similar_profile(g, 0.5, 0, 1.0), ts), window=(1, 100))
    assert fit.exponent == pytest.approx(-0.25, abs=0.02)


def test_fit_decay_heat_dipole():
    g = GridSpec(1, 200.0, 4096)
    ts = np.geomspace(1, 100, 30)
    fit = fit_decay(_heat_series(make_dipole(g, 0, 1.0, np.sqrt(2)).field, ts), window=(1, 100))
    assert fit.exponent == pytest.approx(-0.5, abs=0.02)


def test_profile_distance_exact_profile(grid40):
    A = 0.37
    u = asymptotic_profile(grid40, A, 0.5, 3.0)
    assert np.max(np.abs(u.values - A * np.sqrt(2 * np.pi) * self_similar_profile(grid40, 0.5, 0, 3.0).values)) <= 1e-15
    for p in (1, 2, np.inf):
        assert profile_distance(u, 3.0, A, 0.5, p).value <= 1e-14
    # D^b G(., t) itself has amplitude (2 pi)^(-1/2)
    v = self_similar_profile(grid40, 0.5, 0, 3.0)
    assert profile_distance(v, 3.0, (2 * np.pi) ** -0.5, 0.5).value <= 1e-14
    with pytest.raises(ValueError):
        profile_distance(u, 0.0, A, 0.5)


def test_profile_distance_linear_convergence():
    g = GridSpec(1, 200.0, 4096)
    d = make_fractional_bump(g, 0.5, 1.0, 2.0)
    vals = [profile_distance(heat_semigroup(d.field, t), t, d.amplitude_A, 0.5, 1).value for t in (1.0, 100.0)]
    assert vals[1] <= 0.25 * vals[0]


def test_profile_distance_triangle(grid40, rng):
    t, A, beta = 2.0, 0.4, 0.5
    for _ in range(5):
        u = band_limited(grid40, rng)
        v = band_limited(grid40, rng)
        for p in (1, 2):
            du = profile_distance(u, t, A, beta, p).value
            dv = profile_distance(v, t, A, beta, p).value
            assert du <= dv + x_weight(t, 1, p, beta) * lp_norm(u - v, p) + 1e-12


def test_scaling_collapse_whole_line_profile(grid40):
    for t in (1.0, 4.0):
        a = heat_exact("fractional_profile", {"beta": 0.5}, t, grid=grid40)
        b = heat_exact("fractional_profile", {"beta": 0.5}, 4 * t, grid=grid40)
        assert scaling_collapse(a, b, t, 4 * t, 0.5, remove_offset=False) <= 1e-6
        assert scaling_collapse(a, b, t, 4 * t, 0.5) <= 1e-6


def test_scaling_collapse_box_profile_is_small():
    g = GridSpec(1, 200.0, 4096)
    a = self_similar_profile(g, 0.5, 0, 1.0)
    b = self_similar_profile(g, 0.5, 0, 4.0)
    assert scaling_collapse(a, b, 1.0, 4.0, 0.5) <= 0.01


def test_scaling_collapse_detects_non_self_similar(grid40):
    x = grid40.x1d
    u0 = RealField(grid40, smooth_bump((x - 6) / 2) - smooth_bump((x + 3) / 1))
    u0 = u0 - 0.0
    a = heat_semigroup(u0, 0.1)
    b = heat_semigroup(u0, 0.4)
    assert scaling_collapse(a, b, 0.1, 0.4, 0.5) > 0.2


def test_scaling_collapse_identity_and_errors(grid40):
    u = self_similar_profile(grid40, 0.5, 0, 2.0)
    assert scaling_collapse(u, u, 2.0, 2.0, 0.5, lam=1.0) == 0
    with pytest.raises(GridMismatch):
        scaling_collapse(u, self_similar_profile(GridSpec(1, 20.0, 1024), 0.5, 0, 8.0), 2.0, 8.0, 0.5)
    with pytest.raises(ValueError):
        scaling_collapse(u, u, 2.0, 3.0, 0.5)
    v = scaling_collapse(u, -u, 2.0, 2.0, 0.5, lam=1.0)
    assert 0 <= v <= 2


def test_resample_non_integer_matches_trig_interpolant():
    g = GridSpec(1, np.pi, 64)
    f = g.sample(lambda x: np.cos(3 * x) + 0.5 * np.sin(5 * x))
    lam = 1.5
    expect = np.cos(3 * lam * g.x1d) + 0.5 * np.sin(5 * lam * g.x1d)
    assert np.max(np.abs(_resample(f, lam) - expect)) <= 1e-12
    assert np.max(np.abs(_resample(f, 2.0) - (np.cos(6 * g.x1d) + 0.5 * np.sin(10 * g.x1d)))) <= 1e-12


def test_g_functional():
    recs = [NormRecord(t, 0.0, 0.0, 0.0, 0.0, q=1.8) for t in (1.0, 2.0, 3.0)]
    assert np.all(g_functional(recs, 0.25, 1.8) == 0)
    assert g_functional([], 0.5, 5 / 3).size == 0
    with pytest.raises(KeyError):
        g_functional(recs, 0.5, 5 / 3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 10.0), st.floats(0.0, 10.0)), min_size=1, max_size=30))
def test_g_functional_monotone(pairs):
    q = 5 / 3
    recs = [NormRecord(float(i + 1), a, b, 1.0, 0.0, q=q) for i, (a, b) in enumerate(pairs)]
    g = g_functional(recs, 0.5, q)
    assert np.all(np.diff(g) >= 0)


def test_holder_interpolation(grid40, rng):
    x = grid40.x1d
    q, qs = 2.0, 5 / 3
    assert holder_interpolation_check(RealField(grid40, smooth_bump(x / 4)), q, qs) <= 1
    assert holder_interpolation_check(gauss_kernel(grid40, 1.0) * 7.5, q, qs) <= 1 + 1e-10
    g = GridSpec(1, 5.0, 128)
    for _ in range(100):
        u = RealField(g, rng.standard_cauchy(size=g.shape))
        assert holder_interpolation_check(u, rng.uniform(qs, 4), qs) <= 1 + 1e-10
    assert holder_interpolation_check(grid40.zeros(), q, qs) == 0
    with pytest.raises(ValueError):
        holder_interpolation_check(gauss_kernel(grid40, 1.0), 1.5, qs)


def test_linearization_distance_of_heat_flow(grid40):
    d = make_fractional_bump(grid40, 0.5, 1.0, 1.0)
    u = heat_semigroup(d.field, 2.0)
    assert linearization_distance(u, d, 2.0) <= 1e-15
    assert linearization_distance(heat_semigroup(d.field, 1.0), d, 3.0, 1, t0=2.0) <= 1e-15
    with pytest.raises(ValueError):
        linearization_distance(u, d, 0.0)


def test_carlen_loss_constant_heat(grid40):
    G = gauss_kernel(grid40, 0.5)
    recs = [record_norms(heat_semigroup(G, t - 0.5), t) for t in (0.5, 1.0, 4.0, 16.0)]
    # ||G(t)||_inf sqrt(t) = (4 pi)^(-1/2) exactly
    assert carlen_loss_constant(recs, 1.0, 1, t_min=0.5) == pytest.approx((4 * np.pi) ** -0.5, rel=1e-10)
    assert np.isnan(carlen_loss_constant(recs, 1.0, 1, t_min=100.0))
