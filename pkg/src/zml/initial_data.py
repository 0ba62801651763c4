"""Zero-mass initial data with a prescribed low-frequency order beta.

Generators build fields whose Fourier transform behaves like A |xi|^beta
near the origin, and the measurement helpers estimate A, the Besov-type
norm sup_s s^(beta/2) ||e^{s Delta} v||_1 and the |x|^beta moment.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from .errors import InconsistentShells, SupportTooLarge, WidthTooLarge
from .operators import fractional_derivative, partial_derivative
from .spectral import GridSpec, RealField, forward_transform, integrate, irfft_real, lp_norm, pad_spectrum

__all__ = [
    "InitialDatum",
    "BesovNorm",
    "AmplitudeEstimate",
    "make_fractional_bump",
    "make_dipole",
    "make_miyakawa",
    "custom_datum",
    "compute_A",
    "besov_norm",
    "default_besov_times",
    "moment_beta",
    "smooth_bump",
]

MASS_TOL = 1e-10
CONSTRUCTIONS = ("fractional_bump", "dipole", "compact_miyakawa", "custom")


@dataclass(frozen=True, eq=False)
class InitialDatum:
    """A zero-mass field together with its declared spectral order and amplitude."""

    field: RealField
    beta: float
    amplitude_A: Optional[float] = None
    construction: str = "custom"

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction tag {self.construction!r}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        m = integrate(self.field)
        if abs(m) > MASS_TOL * max(lp_norm(self.field, 1), np.finfo(float).tiny):
            raise ValueError(f"initial datum has nonzero mass {m:.3e}")

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    def scaled(self, c: float) -> "InitialDatum":
        A = None if self.amplitude_A is None else c * self.amplitude_A
        return InitialDatum(self.field * c, self.beta, A, self.construction)

    def __add__(self, other: "InitialDatum") -> "InitialDatum":
        A = None
        if self.amplitude_A is not None:
            # an added datum of higher order contributes nothing to A
            if other.amplitude_A is not None and other.beta == self.beta:
                A = self.amplitude_A + other.amplitude_A
            elif other.beta > self.beta:
                A = self.amplitude_A
        beta = min(self.beta, other.beta)
        return InitialDatum(self.field + other.field, beta, A, "custom")


def smooth_bump(r: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(1 - 1/(1 - r^2)) on |r| < 1, zero outside; peak 1."""
    r = np.asarray(r, float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def _gaussian(grid: GridSpec, mass: float, width: float) -> RealField:
    n = grid.dim
    r2 = grid.radius**2
    return RealField(grid, mass * (2 * np.pi * width**2) ** (-n / 2) * np.exp(-r2 / (2 * width**2)))


def _compact(grid: GridSpec, mass: float, radius: float, center=None) -> RealField:
    if center is None:
        r = grid.radius
    else:
        r = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(grid.coords, center)))
    b = RealField(grid, smooth_bump(r / radius))
    total = integrate(b)
    return b * (mass / total) if total > 0 else b


def make_fractional_bump(
    grid: GridSpec, beta: float, mass_of_phi: float = 1.0, width: float = 1.0, compact: bool = False
) -> InitialDatum:
    """u0 = D^beta phi, so that I_beta u0 = phi and A = (2 pi)^(-n/2) int phi.

    ``phi`` is a Gaussian with standard deviation ``width`` (``G(., 1)`` is
    ``width = sqrt(2)``), or with ``compact=True`` a smooth bump supported in
    |x| < 3 width.  Both are normalized to mass ``mass_of_phi`` on the grid.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if width > grid.half_width / 8:
        raise WidthTooLarge(f"width {width} exceeds L/8 = {grid.half_width / 8}")
    if compact:
        phi = _compact(grid, mass_of_phi, 3.0 * width)
    else:
        g = _gaussian(grid, 1.0, width)
        phi = g * (mass_of_phi / integrate(g))
    u0 = fractional_derivative(phi, beta)
    A = mass_of_phi * (2 * np.pi) ** (-grid.dim / 2)
    return InitialDatum(u0, beta, A, "fractional_bump")


def make_dipole(
    grid: GridSpec, direction: int = 0, mass_of_psi: float = 1.0, width: float = 1.0
) -> InitialDatum:
    """u0 = d_j psi with psi a Gaussian of mass ``mass_of_psi``; spectral order 1."""
    if width > grid.half_width / 8:
        raise WidthTooLarge(f"width {width} exceeds L/8 = {grid.half_width / 8}")
    psi = _gaussian(grid, mass_of_psi, width)
    gamma = [0] * grid.dim
    gamma[direction] = 1
    u0 = partial_derivative(psi, gamma)
    return InitialDatum(u0, 1.0, None, "dipole")


def make_miyakawa(
    grid: GridSpec,
    beta: float,
    mass: float = 1.0,
    width: float = 1.0,
    separation: Optional[float] = None,
) -> InitialDatum:
    """Two opposite compact bumps of equal mass at +-separation along axis 0.

    The datum has compact support, zero mass and finite |x|^beta moment for
    every beta.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    d = 2.0 * width if separation is None else float(separation)
    if d + width > grid.half_width / 4:
        raise SupportTooLarge(
            f"support radius {d + width} exceeds L/4 = {grid.half_width / 4}"
        )
    c = np.zeros(grid.dim)
    c[0] = d
    plus = _compact(grid, mass, width, center=c)
    minus = _compact(grid, mass, width, center=-c)
    # same normalization constant for both halves keeps the mass exactly zero
    return InitialDatum(plus - minus, beta, None, "compact_miyakawa")


def custom_datum(field: RealField, beta: float, amplitude_A: Optional[float] = None) -> InitialDatum:
    return InitialDatum(field, beta, amplitude_A, "custom")


class AmplitudeEstimate(NamedTuple):
    value: float
    error_bar: float
    shell_values: tuple


def _shells(grid: GridSpec, count: int):
    k2 = sum(k.astype(np.int64) ** 2 for k in np.meshgrid(*([grid.k1d] * grid.dim), indexing="ij"))
    levels = np.unique(k2[k2 > 0])[:count]
    return [(k2 == lev) for lev in levels], np.pi / grid.half_width * np.sqrt(levels)


def compute_A(u0, beta: float, shells: int = 3, spread_tol: float = 0.5) -> AmplitudeEstimate:
    """Estimate A = lim u0_hat(xi) / |xi|^beta from the smallest wavevector shells.

    Shell averages are extrapolated linearly in |xi| to the origin; the error
    bar is the spread of the shell values.
    """
    f = u0.field if isinstance(u0, InitialDatum) else u0
    grid = f.grid
    c = forward_transform(f).coeffs
    masks, radii = _shells(grid, shells)
    vals = np.array([np.mean(c[m]).real for m in masks]) / radii**beta
    # shells at round-off level carry no amplitude information
    floor = 1e-11 * np.abs(c).max() / radii[0] ** beta
    vals = np.where(np.abs(vals) < floor, 0.0, vals)
    spread = float(vals.max() - vals.min())
    scale = float(np.max(np.abs(vals)))
    if scale > 0 and spread > spread_tol * scale:
        raise InconsistentShells(
            f"shell values {vals} disagree by {spread / scale:.0%}; beta={beta} looks misdeclared"
        )
    slope, intercept = np.polyfit(radii, vals, 1)
    return AmplitudeEstimate(float(intercept), spread, tuple(float(v) for v in vals))


class BesovNorm(NamedTuple):
    value: float
    argmax: float
    at_endpoint: bool


def default_besov_times(grid: GridSpec, count: int = 40) -> np.ndarray:
    return np.geomspace(1e-2, (grid.half_width / 4) ** 2, count)


def besov_norm(v, beta: float, s_grid=None, warn: bool = True) -> BesovNorm:
    """max over ``s_grid`` of s^(beta/2) ||e^{s Delta} v||_1, with its argmax."""
    f = v.field if isinstance(v, InitialDatum) else v
    grid = f.grid
    s = default_besov_times(grid) if s_grid is None else np.asarray(s_grid, float)
    vh = np.fft.rfftn(f.values)
    r2 = grid.rxi_norm**2
    h = grid.cell_volume
    vals = np.empty(len(s))
    for i, si in enumerate(s):
        w = irfft_real(vh * np.exp(-si * r2), grid.shape)
        vals[i] = si ** (beta / 2) * h * np.abs(w).sum()
    i = int(np.argmax(vals))
    endpoint = vals[i] > 0 and i in (0, len(s) - 1)
    if endpoint and warn:
        warnings.warn(
            f"Besov supremum attained at window endpoint s={s[i]:.3g}; true sup may lie outside",
            RuntimeWarning,
            stacklevel=2,
        )
    return BesovNorm(float(vals[i]), float(s[i]), bool(endpoint))


def moment_beta(u0, beta: float, refine: int = 4) -> float:
    """Quadrature of |x|^beta |u0(x)| over the box.

    u0 is first interpolated spectrally onto a ``refine``-times finer grid,
    which tames the kinks of |u0| at sign changes.  In one dimension the
    rectangle rule error of the weight singularity at the grid point x = 0 is
    removed with the generalized Euler-Maclaurin term
    -2 zeta(-beta) h^(1+beta) |u0(0)|.
    """
    f = u0.field if isinstance(u0, InitialDatum) else u0
    g = f.grid
    refine = int(refine)
    if refine > 1:
        n, m = g.points, g.points * refine
        vals = irfft_real(pad_spectrum(np.fft.rfftn(f.values), n, m), (m,) * g.dim) * float(refine) ** g.dim
        fine = GridSpec(g.dim, g.half_width, m)
    else:
        vals, fine = f.values, g
    a = np.abs(vals)
    total = fine.cell_volume * np.sum(fine.radius**beta * a)
    if g.dim == 1 and beta > 0:
        h = fine.spacing
        total -= 2.0 * special.zeta(-beta) * h ** (1.0 + beta) * a[fine.points // 2]
    return float(total)
