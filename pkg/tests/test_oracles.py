import numpy as np
import pytest

from zml import GridSpec, RealField, integrate, lp_norm
from zml.analysis import fit_decay
from zml.cli.experiments import burgers_bump
from zml.errors import DenominatorBreach, UnsupportedKind
from zml.initial_data import make_miyakawa, smooth_bump
from zml.operators import (
    fractional_derivative,
    gauss_kernel,
    heat_semigroup,
    partial_derivative,
    riesz_potential,
    self_similar_profile,
)
from zml.oracles import (
    ColeHopfFamily,
    OracleNotConverged,
    QuadratureSpec,
    calibrate_riesz_constant,
    cole_hopf_solution,
    fractional_primitive_1d,
    fractional_profile_1d,
    heat_exact,
    periodized_fractional_profile,
    riesz_constant,
    riesz_kernel_oracle,
)

R = 6.0
SPEC = QuadratureSpec(4096, truncation_radius=R)


def bump(c):
    return (lambda y: burgers_bump(y, R, c)[0]), (lambda y: burgers_bump(y, R, c)[1])


def test_quadrature_spec():
    with pytest.raises(ValueError):
        QuadratureSpec(32)
    with pytest.raises(ValueError):
        QuadratureSpec(rule="simpson")
    assert QuadratureSpec(100).doubled().node_count == 200


def test_cole_hopf_zero_data():
    x = np.linspace(-10, 10, 11)
    assert np.all(cole_hopf_solution(lambda y: 0 * y, 1.0, x, SPEC) == 0)
    with pytest.raises(ValueError):
        cole_hopf_solution(lambda y: 0 * y, 0.0, x, SPEC)


def test_cole_hopf_small_amplitude_is_linear():
    c = 1e-4
    g = GridSpec(1, 60.0, 2048)
    f, F = bump(c)
    lin = heat_semigroup(RealField(g, f(g.x1d)), 1.0).values
    u = cole_hopf_solution(f, 1.0, g.x1d, SPEC, a=0.5, primitive=F)
    assert np.max(np.abs(u - lin)) <= 1e-7


def test_cole_hopf_quadratic_correction():
    g = GridSpec(1, 60.0, 2048)
    c = 1e-3
    dev = []
    for amp in (c, 2 * c):
        f, F = bump(amp)
        lin = heat_semigroup(RealField(g, f(g.x1d)), 1.0).values
        dev.append(np.max(np.abs(cole_hopf_solution(f, 1.0, g.x1d, SPEC, primitive=F) - lin)))
    assert dev[1] / dev[0] == pytest.approx(4.0, rel=0.01)


def test_cole_hopf_from_field_matches_callable():
    g = GridSpec(1, 60.0, 2048)
    f, F = bump(1.0)
    x = np.linspace(-15, 15, 61)
    a = cole_hopf_solution(f, 1.0, x, SPEC, primitive=F)
    b = cole_hopf_solution(RealField(g, f(g.x1d)), 1.0, x, SPEC)
    c = cole_hopf_solution(f, 1.0, x, SPEC)  # primitive by cumulative quadrature
    assert np.max(np.abs(a - b)) <= 1e-8 * np.abs(a).max()
    assert np.max(np.abs(a - c)) <= 1e-8 * np.abs(a).max()


def test_cole_hopf_matches_closed_form_family():
    fam = ColeHopfFamily(eps=2.0, kind="dipole", a=0.5)
    x = np.linspace(-20, 20, 81)
    spec = QuadratureSpec(4096, truncation_radius=40.0)
    u = cole_hopf_solution(fam.initial, 3.0, x, spec, a=0.5, primitive=fam.primitive)
    assert np.max(np.abs(u - fam.solution(x, 3.0))) <= 1e-8 * np.abs(u).max()


def test_cole_hopf_denominator_breach():
    f, F = bump(1.0)
    with pytest.raises(DenominatorBreach):
        cole_hopf_solution(f, 1.0, np.zeros(3), SPEC, primitive=lambda y: 40 * F(y), gate=False)


def test_cole_hopf_gate():
    f, F = bump(3.0)
    # at large t only a handful of nodes land inside the support
    coarse = QuadratureSpec(64, truncation_radius=R, z_max=8.5)
    with pytest.raises(OracleNotConverged):
        cole_hopf_solution(f, 100.0, np.linspace(-5, 5, 41), coarse, primitive=F)


def test_family_solves_burgers():
    for kind in ("fractional", "dipole"):
        fam = ColeHopfFamily(eps=0.5, kind=kind, a=0.5)
        x = np.linspace(-12, 12, 49)
        t, h, k = 2.0, 1e-3, 1e-4
        u = lambda xx, tt: fam.solution(xx, tt)  # noqa: E731
        ut = (u(x, t + k) - u(x, t - k)) / (2 * k)
        uxx = (u(x + h, t) - 2 * u(x, t) + u(x - h, t)) / h**2
        flux = lambda xx: 0.5 * u(xx, t) ** 2  # noqa: E731
        fx = (flux(x + h) - flux(x - h)) / (2 * h)
        assert np.max(np.abs(ut - uxx + fx)) <= 1e-5


def test_family_primitive_and_mass():
    fam = ColeHopfFamily(eps=0.5, beta=0.5)
    x = np.linspace(-5, 5, 11)
    h = 1e-5
    dF = (fam.primitive(x + h) - fam.primitive(x - h)) / (2 * h)
    assert np.max(np.abs(dF - fam.initial(x))) <= 1e-8
    assert abs(fam.primitive(np.array([1e8]))[0]) <= 1e-3  # zero mass: primitive returns to 0
    assert fam.amplitude_A == pytest.approx(-0.5 / 0.5 / np.sqrt(2 * np.pi))
    with pytest.raises(DenominatorBreach):
        ColeHopfFamily(eps=-5.0, kind="dipole")
    with pytest.raises(UnsupportedKind):
        ColeHopfFamily(eps=0.5, kind="tripole")


@pytest.mark.parametrize("kind,expected", [("fractional", -0.25), ("dipole", -0.5)])
def test_family_l1_decay(kind, expected):
    fam = ColeHopfFamily(eps=0.5, beta=0.5, kind=kind)
    ts = np.geomspace(10, 1000, 12)
    fit = fit_decay([(t, fam.l1_norm(t)) for t in ts], window=(10, 1000))
    assert fit.exponent == pytest.approx(expected, abs=0.05)


def test_closed_forms():
    x = np.linspace(-3, 3, 13)
    h = 1e-4
    prim = fractional_primitive_1d(x, 1.0, 0.5)
    d = (fractional_primitive_1d(x + h, 1.0, 0.5) - fractional_primitive_1d(x - h, 1.0, 0.5)) / (2 * h)
    assert np.max(np.abs(d - fractional_profile_1d(x, 1.0, 0.5))) <= 1e-7
    assert np.allclose(prim, -prim[::-1])
    dd = (fractional_profile_1d(x + h, 1.0, 0.5) - fractional_profile_1d(x - h, 1.0, 0.5)) / (2 * h)
    assert np.max(np.abs(dd - fractional_profile_1d(x, 1.0, 0.5, order=1))) <= 1e-7
    G = np.exp(-(x**2) / 4) / np.sqrt(4 * np.pi)
    assert np.max(np.abs(fractional_profile_1d(x, 1.0, 0.0) - G)) <= 1e-14
    with pytest.raises(UnsupportedKind):
        fractional_profile_1d(x, 1.0, 0.5, order=2)


def test_heat_exact_families(grid40):
    G = heat_exact("gaussian", {"s": 1.0}, 2.0, grid=grid40)
    assert np.max(np.abs(G.values - gauss_kernel(grid40, 3.0).values)) <= 1e-15
    dG = heat_exact("gaussian_derivative", {"s": 1.0, "order": 1}, 2.0, grid=grid40)
    ref = heat_semigroup(partial_derivative(gauss_kernel(grid40, 1.0), 1), 2.0)
    assert np.max(np.abs(dG.values - ref.values)) <= 1e-12
    d2 = heat_exact("gaussian_derivative", {"s": 0.5, "order": 2}, 0.5, grid=grid40)
    assert np.max(np.abs(d2.values - partial_derivative(gauss_kernel(grid40, 1.0), 2).values)) <= 1e-10
    P = heat_exact("fractional_profile", {"s": 1.0, "beta": 0.5, "period": True}, 2.0, grid=grid40)
    S = heat_semigroup(self_similar_profile(grid40, 0.5, 0, 1.0), 2.0)
    assert np.max(np.abs(P.values - S.values)) <= 1e-12
    vals = heat_exact("fractional_profile", {"s": 1.0, "beta": 0.5}, 2.0, x=np.array([0.0, 1.0]))
    assert np.allclose(vals, fractional_profile_1d(np.array([0.0, 1.0]), 3.0, 0.5))
    g2 = GridSpec(2, 20.0, 128)
    G2 = heat_exact("gaussian", {"s": 1.0, "mass": 2.0}, 1.0, grid=g2)
    assert integrate(G2) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(UnsupportedKind):
        heat_exact("bessel", {}, 1.0, grid=grid40)
    with pytest.raises(UnsupportedKind):
        heat_exact("gaussian_derivative", {}, 1.0, grid=g2)


def test_periodized_profile_matches_spectral(grid40):
    for beta in (0.25, 0.75):
        S = self_similar_profile(grid40, beta, 0, 2.0)
        P = periodized_fractional_profile(grid40.x1d, 2.0, beta, grid40.half_width)
        assert np.max(np.abs(S.values - P)) <= 1e-12


def test_riesz_constant_calibration():
    for beta in (0.25, 0.5, 0.75):
        assert abs(calibrate_riesz_constant(beta) - 1) <= 1e-3
    assert riesz_constant(0.5) > 0


def test_riesz_oracle_recovers_phi():
    g = GridSpec(1, 60.0, 4096)
    phi = gauss_kernel(g, 1.0)
    u0 = fractional_derivative(phi, 0.5)
    out = riesz_kernel_oracle(u0, 0.5)
    ref = phi.values - phi.values.mean()
    core = np.abs(g.x1d) < g.half_width / 2
    assert np.max(np.abs(out[core] - ref[core])) <= 1e-4 * np.abs(ref).max()


def test_riesz_oracle_odd_in_odd_out(grid40):
    u0 = partial_derivative(gauss_kernel(grid40, 1.0), 1)
    out = riesz_kernel_oracle(u0, 0.5)
    # x_j -> -x_j maps index j to N - j
    mirrored = np.roll(out[::-1], 1)
    assert np.max(np.abs(out + mirrored)) <= 1e-12 * np.abs(out).max()


def test_riesz_oracle_random_compact_data(rng):
    # the cell rule converges like h^(2+beta), so beta = 1/4 needs h ~ 0.03
    g = GridSpec(1, 60.0, 4096)
    x = g.x1d
    for _ in range(10):
        vals = np.zeros(g.shape)
        for _ in range(3):
            c, w = rng.uniform(-10, 10), rng.uniform(1.0, 3.0)
            vals += rng.normal() * smooth_bump((x - c) / w)
        vals -= smooth_bump(x / 4) * (vals.sum() / smooth_bump(x / 4).sum())
        f = RealField(g, vals)
        beta = rng.choice([0.25, 0.5, 0.75])
        spectral = riesz_potential(f, beta)
        kernel = RealField(g, riesz_kernel_oracle(f, beta))
        assert lp_norm(spectral - kernel, 1) / lp_norm(spectral, 1) <= 1e-4


def test_riesz_oracle_validation():
    g2 = GridSpec(2, 5.0, 16)
    with pytest.raises(ValueError):
        riesz_kernel_oracle(g2.zeros(), 0.5)
    g = GridSpec(1, 5.0, 64)
    with pytest.raises(ValueError):
        riesz_kernel_oracle(g.zeros(), 1.0)


def test_riesz_oracle_whole_line_mode():
    g = GridSpec(1, 60.0, 2048)
    d = make_miyakawa(g, 0.5, 1.0, 1.0, 3.0)
    a = riesz_kernel_oracle(d.field, 0.5, periodic=False)
    b = riesz_kernel_oracle(d.field, 0.5, periodic=True)
    core = np.abs(g.x1d) < 10
    # the periodic images of a compact zero-mass datum are weak near the origin
    assert np.max(np.abs(a[core] - b[core])) <= 1e-2 * np.abs(a).max()
