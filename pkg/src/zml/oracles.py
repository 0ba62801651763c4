"""Independent reference solutions.

* Cole-Hopf for the 1D viscous Burgers flux a (u^2)_x: quadrature version for
  compactly supported data, and a closed-form family built from heat-equation
  solutions that needs no truncation at all.
* Closed-form heat flows of Gaussians, their derivatives and the profiles
  d^gamma D^beta G, optionally periodized to compare with the box.
* A real-space Riesz-potential oracle (dense product quadrature of the kernel).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate as spi
from scipy import interpolate, linalg, optimize, signal, special

from .errors import DenominatorBreach, UnsupportedKind, ZmlError
from .spectral import GridSpec, RealField, forward_transform

__all__ = [
    "QuadratureSpec",
    "OracleNotConverged",
    "cole_hopf_solution",
    "ColeHopfFamily",
    "heat_exact",
    "fractional_profile_1d",
    "fractional_primitive_1d",
    "periodized_fractional_profile",
    "fractional_profile_l1",
    "riesz_constant",
    "riesz_kernel_oracle",
    "calibrate_riesz_constant",
]


class OracleNotConverged(ZmlError, RuntimeError):
    """Doubling the quadrature node count changed the oracle output too much."""


RULES = ("trapezoid_refined", "gauss_hermite_like")


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 2048
    rule: str = "trapezoid_refined"
    truncation_radius: float = 20.0
    z_max: float = 8.5

    def __post_init__(self):
        if self.node_count < 64:
            raise ValueError(f"node_count must be >= 64, got {self.node_count}")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        if not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be positive")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.node_count, self.rule, self.truncation_radius, self.z_max)


def _weights(spec: QuadratureSpec):
    """Nodes and weights for int exp(-z^2) f(z) dz / sqrt(pi)."""
    if spec.rule == "gauss_hermite_like":
        z, w = np.polynomial.hermite.hermgauss(min(spec.node_count, 250))
        return z, w / np.sqrt(np.pi)
    z = np.linspace(-spec.z_max, spec.z_max, spec.node_count + 1)
    w = np.full(z.shape, z[1] - z[0])
    w[[0, -1]] *= 0.5
    return z, w * np.exp(-(z**2)) / np.sqrt(np.pi)


def _as_callable(u0, R):
    """Callable u0 and its primitive from a callable or a 1D RealField."""
    if callable(u0):
        return u0, None
    if isinstance(u0, RealField):
        if u0.grid.dim != 1:
            raise ValueError("Cole-Hopf oracle is one-dimensional")
        grid = u0.grid
        # trigonometric interpolant and its periodic primitive, sampled on a
        # 16x refined grid and then read off with quintic splines
        refine = 16
        c = np.fft.rfft(u0.values)
        xi = np.pi * np.arange(c.size) / grid.half_width
        cprim = np.zeros_like(c)
        cprim[1:] = c[1:] / (1j * xi[1:])
        if grid.points % 2 == 0:
            c[-1] *= 0.5
            cprim[-1] = 0.0
        M = refine * grid.points
        yf = -grid.half_width + np.arange(M + 1) * (2 * grid.half_width / M)
        fv = np.fft.irfft(c, M) * refine
        Fv = np.fft.irfft(cprim, M) * refine
        fs = interpolate.make_interp_spline(yf, np.append(fv, fv[0]), k=5)
        Fs = interpolate.make_interp_spline(yf, np.append(Fv, Fv[0]), k=5)
        base = float(Fs(-R))
        return (lambda y: fs(y)), (lambda y: Fs(y) - base)
    raise TypeError("u0 must be a callable or a 1D RealField")


def _primitive_table(u0: Callable, R: float, count: int = 1 << 15):
    y = np.linspace(-R, R, count + 1)
    v = u0(y)
    U = spi.cumulative_simpson(v, x=y, initial=0.0)
    l1 = spi.simpson(np.abs(v), x=y)
    return y, U, l1


def cole_hopf_solution(
    u0,
    t: float,
    x_points,
    spec: QuadratureSpec = QuadratureSpec(),
    a: float = 0.5,
    primitive: Optional[Callable] = None,
    gate: bool = True,
    gate_tol: float = 1e-8,
) -> np.ndarray:
    """Solution at time t of u_t - u_xx + a (u^2)_x = 0 from compactly supported u0.

    With phi0 = exp(-a int_{-inf}^x u0) the solution is u = -(1/a) phi_x / phi,
    phi = e^{t Delta} phi0; for a = 1 this is the classical formula.  Both heat
    integrals use y = x + 2 sqrt(t) z against the standard Gaussian weight.
    ``u0`` is a callable or a 1D RealField (spectrally interpolated).  With
    ``gate`` the result is recomputed with twice the nodes and must change by at
    most ``gate_tol`` relative to max |u|.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    R = spec.truncation_radius
    f, prim = _as_callable(u0, R)
    if primitive is not None:
        prim = primitive
    ty, tU, l1 = _primitive_table(f, R)
    if prim is None:
        def prim(y):
            y = np.clip(y, -R, R)
            return np.interp(y, ty, tU)
    x = np.atleast_1d(np.asarray(x_points, float))

    def solve(sp):
        z, w = _weights(sp)
        num = np.empty(x.shape)
        den = np.empty(x.shape)
        for s in range(0, x.size, 256):
            xs = x.ravel()[s : s + 256]
            y = xs[:, None] + 2 * np.sqrt(t) * z[None, :]
            inside = np.abs(y) <= R
            # phi0 - 1 vanishes outside the support because the mass is zero
            U = np.where(inside, prim(np.clip(y, -R, R)), 0.0)
            phim1 = np.expm1(-a * U)
            dphi = np.where(inside, -a * f(np.clip(y, -R, R)), 0.0) * (1.0 + phim1)
            num.ravel()[s : s + 256] = dphi @ w
            den.ravel()[s : s + 256] = 1.0 + phim1 @ w
        return num, den

    num, den = solve(spec)
    bound = np.exp(-abs(a) * l1)
    if den.min() < bound - 1e-6:
        raise DenominatorBreach(
            f"denominator {den.min():.3e} below exp(-|a| ||u0||_1) = {bound:.3e}"
        )
    u = -num / (a * den)
    if gate:
        num2, den2 = solve(spec.doubled())
        u2 = -num2 / (a * den2)
        scale = max(np.abs(u2).max(), np.finfo(float).tiny)
        change = np.abs(u2 - u).max() / scale
        if change > gate_tol:
            raise OracleNotConverged(
                f"doubling node_count changed the solution by {change:.2e} (> {gate_tol:.0e})"
            )
        u = u2
    return u.reshape(np.shape(x_points)) if np.ndim(x_points) else u[0]


# closed forms in one dimension


def _kummer_cos(beta, x, t):
    """(1/pi) int_0^inf xi^beta e^{-t xi^2} cos(x xi) dxi = D^beta G(x, t)."""
    a = (beta + 1) / 2
    return special.gamma(a) / (2 * np.pi) * t ** (-a) * special.hyp1f1(a, 0.5, -(x**2) / (4 * t))


def _kummer_sin(mu, x, t):
    """(1/pi) int_0^inf xi^(mu-1) e^{-t xi^2} sin(x xi) dxi."""
    a = (mu + 1) / 2
    return x / (2 * np.pi) * t ** (-a) * special.gamma(a) * special.hyp1f1(a, 1.5, -(x**2) / (4 * t))


def fractional_profile_1d(x, t: float, beta: float, order: int = 0) -> np.ndarray:
    """Whole-line d^order D^beta G(x, t) for order 0 or 1 (beta = 0 gives G)."""
    x = np.asarray(x, float)
    if order == 0:
        return _kummer_cos(beta, x, t)
    if order == 1:
        return -_kummer_sin(beta + 2, x, t)
    raise UnsupportedKind(f"derivative order {order} not available in closed form")


def fractional_primitive_1d(x, t: float, beta: float) -> np.ndarray:
    """Odd primitive of D^beta G(., t), vanishing at +-infinity (0 < beta < 1)."""
    return _kummer_sin(beta, np.asarray(x, float), t)


def _tail_coefficients(beta: float, t: float):
    """D^beta G(y, t) ~ c1 |y|^-(1+beta) + c2 |y|^-(3+beta) as |y| -> infinity."""
    a = (beta + 1) / 2
    c1 = special.gamma(a) * np.sqrt(np.pi) * 4**a / (2 * np.pi * special.gamma(-beta / 2))
    c2 = c1 * 4 * t * a * (a + 0.5)
    return c1, c2


def periodized_fractional_profile(x, t: float, beta: float, L: float, images: int = 200) -> np.ndarray:
    """sum over m of D^beta G(x + 2Lm, t), the 2L-periodic counterpart on the box.

    Images beyond ``images`` are summed with the two-term algebraic tail through
    Hurwitz zeta functions.
    """
    if not 0 < beta < 2:
        raise UnsupportedKind("periodization needs 0 < beta < 2")
    x = np.asarray(x, float)
    m = np.arange(-images, images + 1)
    total = np.zeros(x.shape)
    for mm in m:
        total += _kummer_cos(beta, x + 2 * L * mm, t)
    c1, c2 = _tail_coefficients(beta, t)
    q = images + 1
    for c, s in ((c1, 1 + beta), (c2, 3 + beta)):
        total += c * (2 * L) ** (-s) * (special.zeta(s, q + x / (2 * L)) + special.zeta(s, q - x / (2 * L)))
    return total


def fractional_profile_l1(beta: float, t: float = 1.0, half_width: Optional[float] = None) -> float:
    """L1 norm of D^beta G(., t) by adaptive quadrature split at its sign changes.

    ``half_width=None`` integrates over the whole line; otherwise the
    periodized profile is integrated over [-L, L), the quantity a box of
    half-width L approximates.
    """
    if half_width is None:
        f = lambda x: _kummer_cos(beta, x, t)  # noqa: E731
        lo, hi = 0.0, np.inf
        scan_hi = 40.0 * np.sqrt(t)
    else:
        L = float(half_width)
        f = lambda x: periodized_fractional_profile(np.asarray(x, float), t, beta, L)  # noqa: E731
        lo, hi = 0.0, L
        scan_hi = L
    xs = np.linspace(lo, scan_hi, 20001)
    v = f(xs)
    idx = np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]
    zeros = [optimize.brentq(f, xs[i], xs[i + 1], xtol=1e-15) for i in idx]
    pts = [lo, *zeros, hi]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = spi.quad(lambda x: float(f(x)), a, b, limit=400, epsabs=1e-14, epsrel=1e-13)
        total += abs(val)
    return 2.0 * total


def _gaussian_derivative(x, s, order):
    z = x / np.sqrt(4 * s)
    G = np.exp(-(z**2)) / np.sqrt(4 * np.pi * s)
    H = special.eval_hermite(order, z)
    return (-1) ** order * (4 * s) ** (-order / 2) * H * G


def heat_exact(kind: str, params: dict, t: float, grid: Optional[GridSpec] = None, x=None):
    """Closed-form e^{t Delta} u0 for the Gaussian families.

    kinds: ``gaussian`` (u0 = mass G(., s)), ``gaussian_derivative``
    (u0 = d_x^order G(., s), n = 1) and ``fractional_profile``
    (u0 = d^order D^beta G(., s), n = 1; ``period=True`` periodizes on the box).
    Returns a RealField when ``grid`` is given, else values at ``x``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    s = params.get("s", 0.0) + t
    if grid is not None:
        pts = grid.coords
        if grid.dim > 1 and kind != "gaussian":
            raise UnsupportedKind(f"{kind} is one-dimensional")
        xs = pts[0] if grid.dim == 1 else None
    else:
        xs = np.asarray(x, float)
        pts = (xs,)
    if kind == "gaussian":
        n = len(pts)
        r2 = sum(p**2 for p in pts)
        vals = params.get("mass", 1.0) * (4 * np.pi * s) ** (-n / 2) * np.exp(-r2 / (4 * s))
    elif kind == "gaussian_derivative":
        vals = _gaussian_derivative(xs, s, int(params.get("order", 1)))
    elif kind == "fractional_profile":
        beta = float(params["beta"])
        order = int(params.get("order", 0))
        if params.get("period"):
            if grid is None or order != 0:
                raise UnsupportedKind("periodized profile needs a grid and order 0")
            vals = periodized_fractional_profile(xs, s, beta, grid.half_width)
        else:
            vals = fractional_profile_1d(xs, s, beta, order)
    else:
        raise UnsupportedKind(f"unknown kind {kind!r}")
    return RealField(grid, vals) if grid is not None else vals


@dataclass(frozen=True)
class ColeHopfFamily:
    """Exact Burgers solutions u = -(1/a) d_x log(1 + eps Psi(x, s0 + t)).

    ``Psi`` solves the heat equation: the odd primitive of D^beta G for
    ``kind="fractional"`` (zero-mass data of order beta with
    A = -(eps/a)(2 pi)^(-1/2)) or G itself for ``kind="dipole"`` (order 1).
    The data are smooth with algebraic (resp. Gaussian) tails, so the L1 norm
    is evaluated on the whole line with no box at all.
    """

    eps: float
    beta: float = 0.5
    s0: float = 1.0
    a: float = 0.5
    kind: str = "fractional"

    def __post_init__(self):
        if self.kind not in ("fractional", "dipole"):
            raise UnsupportedKind(self.kind)
        # 1 + eps Psi must stay positive
        lo = self._psi_extreme()
        if 1 + lo <= 0:
            raise DenominatorBreach(f"1 + eps Psi reaches {1 + lo:.3e}")

    def _psi_extreme(self):
        s = self.s0
        f = lambda y: self.eps * self._psi(np.array([y]), s)[0]
        if self.kind == "dipole":
            return min(0.0, f(0.0))
        # extremes of the primitive sit at the zeros of D^beta G
        z = self._zero(s)
        return min(f(z), f(-z))

    def _psi(self, x, s):
        if self.kind == "dipole":
            return np.exp(-(x**2) / (4 * s)) / np.sqrt(4 * np.pi * s)
        return fractional_primitive_1d(x, s, self.beta)

    def _dpsi(self, x, s):
        if self.kind == "dipole":
            return -x / (2 * s) * np.exp(-(x**2) / (4 * s)) / np.sqrt(4 * np.pi * s)
        return fractional_profile_1d(x, s, self.beta)

    def _zero(self, s):
        g = lambda y: fractional_profile_1d(y, s, self.beta)
        return optimize.brentq(g, 1e-6 * np.sqrt(s), 20 * np.sqrt(s), xtol=1e-14)

    @property
    def order(self) -> float:
        return 1.0 if self.kind == "dipole" else self.beta

    @property
    def amplitude_A(self) -> Optional[float]:
        if self.kind == "dipole":
            return None
        return -self.eps / self.a / np.sqrt(2 * np.pi)

    def solution(self, x, t: float = 0.0) -> np.ndarray:
        s = self.s0 + t
        x = np.asarray(x, float)
        return -self.eps / self.a * self._dpsi(x, s) / (1 + self.eps * self._psi(x, s))

    def initial(self, x) -> np.ndarray:
        return self.solution(x, 0.0)

    def primitive(self, x, t: float = 0.0) -> np.ndarray:
        """int_{-inf}^x u(y, t) dy = -(1/a) log(1 + eps Psi)."""
        s = self.s0 + t
        return -np.log1p(self.eps * self._psi(np.asarray(x, float), s)) / self.a

    def l1_norm(self, t: float) -> float:
        """Whole-line L1 norm by adaptive quadrature split at the sign changes."""
        s = self.s0 + t
        g = lambda y: abs(float(self.solution(np.array([y]), t)[0]))
        if self.kind == "dipole":
            breaks = [0.0]
        else:
            z = self._zero(s)
            breaks = [-z, 0.0, z]
        pts = [-np.inf] + breaks + [np.inf]
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, _ = spi.quad(g, lo, hi, epsabs=0.0, epsrel=1e-11, limit=400)
            total += val
        return total


# Riesz potential oracle


def riesz_constant(beta: float) -> float:
    """C(beta, 1) with (I_beta f)(x) = C int |x - y|^(beta - 1) f(y) dy."""
    return special.gamma((1 - beta) / 2) / (2**beta * np.sqrt(np.pi) * special.gamma(beta / 2))


def _cell_weights(d: np.ndarray, h: float, beta: float) -> np.ndarray:
    """Exact integrals of |s|^(beta-1) over the cells [d - h/2, d + h/2]."""
    F = lambda s: np.sign(s) * np.abs(s) ** beta / beta
    return F(d + h / 2) - F(d - h / 2)


def _image_sum(d: np.ndarray, L: float, beta: float, images: int = 400) -> np.ndarray:
    """Regularized sum over m != 0 of |d + 2Lm|^(beta-1), up to a constant.

    The constant 2 sum (2Lm)^(beta-1) is subtracted termwise; it is annihilated
    by zero-mass data.  Terms beyond ``images`` use the Taylor tail in d/(2Lm).
    """
    p = beta - 1
    total = np.zeros_like(d)
    for m in range(1, images + 1):
        c = 2 * L * m
        total += (c + d) ** p + (c - d) ** p - 2 * c**p
    e2 = (d / (2 * L)) ** 2
    t1 = p * (p - 1) * special.zeta(2 - p, images + 1)
    t2 = p * (p - 1) * (p - 2) * (p - 3) / 12 * special.zeta(4 - p, images + 1)
    return total + (2 * L) ** p * (t1 * e2 + t2 * e2**2)


def _riesz_dense(values: np.ndarray, h: float, beta: float, C: float, L: Optional[float] = None) -> np.ndarray:
    n = values.size
    if L is None:
        d = h * np.arange(-(n - 1), n)
        w = C * _cell_weights(d, h, beta)
        return signal.fftconvolve(values, w)[n - 1 : 2 * n - 1]
    # periodic box: nearest-image offsets, then all other images smoothly
    d = h * np.arange(n)
    d = np.where(d >= L, d - 2 * L, d)
    w = C * (_cell_weights(d, h, beta) + h * _image_sum(d, L, beta))
    return linalg.circulant(w) @ values


@lru_cache(maxsize=32)
def calibrate_riesz_constant(beta: float, tol: float = 1e-3) -> float:
    """Check C(beta, 1) against the spectral Riesz potential of a smooth datum.

    Returns the measured ratio spectral / kernel on a fine reference problem;
    raises if the analytic constant is off by more than ``tol``.
    """
    from .operators import riesz_potential

    grid = GridSpec(1, 160.0, 16384)
    x = grid.x1d
    # even, zero mass and zero first moment: periodic images are negligible
    f = (1 - x**2 / 2) * np.exp(-(x**2) / 4)
    field = RealField(grid, f)
    spec = riesz_potential(field, beta).values
    kern = _riesz_dense(f, grid.spacing, beta, riesz_constant(beta))
    core = np.abs(x) < 4
    ratio = float(np.dot(spec[core], kern[core]) / np.dot(kern[core], kern[core]))
    if abs(ratio - 1) > tol:
        raise ZmlError(f"Riesz constant for beta={beta} off by ratio {ratio:.6f}")
    return ratio


def riesz_kernel_oracle(u0: RealField, beta: float, periodic: bool = True) -> np.ndarray:
    """I_beta u0 on the grid points by dense real-space product quadrature.

    Data are treated as piecewise constant on cells; the kernel is integrated
    exactly over every cell, which also takes care of the diagonal.  With
    ``periodic`` the kernel is summed over the images of the box so the result
    is comparable with the spectral operator; otherwise the data are taken as
    zero outside the box.
    """
    if u0.grid.dim != 1:
        raise ValueError("riesz_kernel_oracle is one-dimensional")
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    calibrate_riesz_constant(float(beta))
    L = u0.grid.half_width if periodic else None
    v = u0.values
    # cell-rule error is -(h^2/24) I_beta u'' to leading order; remove it
    v = v - (np.roll(v, 1) - 2 * v + np.roll(v, -1)) / 24
    out = _riesz_dense(v, u0.grid.spacing, beta, riesz_constant(beta), L)
    # the image regularization fixes I_beta u0 only up to a constant; pick zero mean
    return out - out.mean() if periodic else out
