"""Fourier-multiplier operators: heat flow, derivatives, D^beta, I_beta.

Every operator acts on a :class:`~zml.spectral.RealField` by multiplying its
spectrum by a symbol sampled on the wavevector lattice.  Symbols are passed
through :func:`~zml.spectral.hermitian_part` so the unpaired Nyquist modes
stay consistent with a real result.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InvalidBeta,
    NegativeTime,
    NonPositiveTime,
    NonZeroMass,
    OrderTooHigh,
    SymmetryViolation,
)
from .spectral import (
    GridSpec,
    RealField,
    apply_symbol,
    irfft_real,
    check_diffusion_window,
    hermitian_defect,
    hermitian_part,
    integrate,
    lp_norm,
)

__all__ = [
    "MultiIndex",
    "MultiplierSymbol",
    "heat_semigroup",
    "partial_derivative",
    "fractional_derivative",
    "riesz_potential",
    "gauss_kernel",
    "self_similar_profile",
    "multiplier_apply",
    "advection_divergence",
    "derivative_symbol",
    "MAX_DERIVATIVE_ORDER",
]

MAX_DERIVATIVE_ORDER = 8


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index gamma = (gamma_1, ..., gamma_n) of nonnegative integers."""

    components: tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if any(c < 0 for c in comps):
            raise ValueError(f"multi-index components must be >= 0, got {comps}")
        object.__setattr__(self, "components", comps)

    @property
    def order(self) -> int:
        return sum(self.components)

    @classmethod
    def coerce(cls, gamma, dim: int) -> "MultiIndex":
        if isinstance(gamma, MultiIndex):
            mi = gamma
        elif np.isscalar(gamma):
            mi = cls((int(gamma),) + (0,) * (dim - 1))
        else:
            mi = cls(tuple(gamma))
        if len(mi.components) != dim:
            raise ValueError(f"multi-index {mi.components} does not match dimension {dim}")
        return mi


def _full_to_r(grid: GridSpec, symbol: np.ndarray) -> np.ndarray:
    return hermitian_part(symbol)[..., : grid.points // 2 + 1]


@lru_cache(maxsize=64)
def _heat_symbol(grid: GridSpec, t: float) -> np.ndarray:
    return np.exp(-t * grid.rxi_norm**2)


@lru_cache(maxsize=64)
def _power_symbol(grid: GridSpec, beta: float) -> np.ndarray:
    r = grid.rxi_norm
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = r[nz] ** beta
    return out


def derivative_symbol(grid: GridSpec, gamma: MultiIndex) -> np.ndarray:
    """rfft-layout symbol (i xi)^gamma with Nyquist handling."""
    sym = np.ones(grid.shape, complex)
    for xi_j, g in zip(grid.xi, gamma.components):
        if g:
            sym = sym * (1j * xi_j) ** g
    return _full_to_r(grid, sym)


def heat_semigroup(f: RealField, t: float) -> RealField:
    """e^{t Delta} f, i.e. multiplication of the spectrum by exp(-t |xi|^2)."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    if t == 0:
        return f
    return RealField(f.grid, apply_symbol(f.values, _heat_symbol(f.grid, float(t))))


def partial_derivative(f: RealField, gamma) -> RealField:
    gamma = MultiIndex.coerce(gamma, f.grid.dim)
    if gamma.order > MAX_DERIVATIVE_ORDER:
        raise OrderTooHigh(f"|gamma|={gamma.order} exceeds {MAX_DERIVATIVE_ORDER}")
    if gamma.order == 0:
        return f
    return RealField(f.grid, apply_symbol(f.values, derivative_symbol(f.grid, gamma)))


def fractional_derivative(f: RealField, beta: float) -> RealField:
    """D^beta f with symbol |xi|^beta (zero at xi = 0)."""
    if not beta > 0:
        raise InvalidBeta(f"beta must be positive, got {beta}")
    return RealField(f.grid, apply_symbol(f.values, _power_symbol(f.grid, float(beta))))


def riesz_potential(f: RealField, beta: float, mass_tol: float = 1e-10) -> RealField:
    """I_beta f with symbol |xi|^-beta on mean-zero data; the zero mode is set to 0."""
    n = f.grid.dim
    if not 0 < beta < n:
        raise InvalidBeta(f"beta must lie in (0, {n}), got {beta}")
    m = integrate(f)
    l1 = lp_norm(f, 1)
    if abs(m) > mass_tol * l1:
        raise NonZeroMass(f"|mass|={abs(m):.3e} exceeds {mass_tol:.0e} * ||f||_1")
    return RealField(f.grid, apply_symbol(f.values, _power_symbol(f.grid, -float(beta))))


def gauss_kernel(grid: GridSpec, t: float) -> RealField:
    """Samples of G(x, t) = (4 pi t)^(-n/2) exp(-|x|^2 / 4t)."""
    if not t > 0:
        raise NonPositiveTime(f"t must be positive, got {t}")
    check_diffusion_window(grid, t)
    n = grid.dim
    r2 = grid.radius**2
    return RealField(grid, (4 * np.pi * t) ** (-n / 2) * np.exp(-r2 / (4 * t)))


def _synthesize(grid: GridSpec, rspec: np.ndarray) -> np.ndarray:
    """Real field whose symmetric-convention transform is ``rspec`` (rfft layout)."""
    # undo the (-1)^k grid phase and the (2 pi)^(-n/2) h^n normalization
    n = grid.dim
    k = grid.k1d
    ph = np.where(k % 2, -1.0, 1.0)
    phase = ph
    for _ in range(n - 1):
        phase = np.multiply.outer(phase, ph)
    phase = phase[..., : grid.points // 2 + 1]
    scale = (2 * np.pi) ** (n / 2) / grid.cell_volume
    return irfft_real(rspec * phase * scale, grid.shape)


def self_similar_profile(grid: GridSpec, beta: float, gamma, t: float) -> RealField:
    """Sample d^gamma D^beta G(., t) by spectral synthesis.

    The transform is (i xi)^gamma |xi|^beta (2 pi)^(-n/2) exp(-t |xi|^2);
    ``beta = 0`` gives d^gamma G.
    """
    if not t > 0:
        raise NonPositiveTime(f"t must be positive, got {t}")
    if beta < 0:
        raise InvalidBeta(f"beta must be >= 0, got {beta}")
    gamma = MultiIndex.coerce(gamma, grid.dim)
    n = grid.dim
    spec = (2 * np.pi) ** (-n / 2) * _heat_symbol(grid, float(t)).astype(complex)
    if beta > 0:
        spec = spec * _power_symbol(grid, float(beta))
    if gamma.order:
        spec = spec * derivative_symbol(grid, gamma)
    return RealField(grid, _synthesize(grid, spec))


_HOMOGENEITY_TOL = 1e-10


@dataclass(frozen=True)
class MultiplierSymbol:
    """A symbol l(xi) positively homogeneous of degree ``degree``.

    ``func`` receives the wavevector components as arrays and returns complex
    values.  Homogeneity is checked on random samples at construction.
    """

    degree: float
    func: Callable[..., np.ndarray]
    dim: int = 1

    def __post_init__(self):
        if not self.degree > 0:
            raise InvalidBeta(f"degree must be positive, got {self.degree}")
        rng = np.random.default_rng(12345)
        xs = rng.normal(size=(self.dim, 64))
        xs = xs / np.linalg.norm(xs, axis=0) * rng.uniform(0.1, 10.0, size=64)
        l1 = np.asarray(self.func(*xs), complex)
        l2 = np.asarray(self.func(*(2 * xs)), complex)
        bad = np.abs(l2 - 2**self.degree * l1) > _HOMOGENEITY_TOL * np.maximum(np.abs(l1), 1e-300)
        if np.any(bad):
            raise ValueError(f"symbol is not homogeneous of degree {self.degree}")

    def __call__(self, *xi):
        return self.func(*xi)

    @classmethod
    def fractional(cls, beta: float, dim: int = 1) -> "MultiplierSymbol":
        return cls(beta, lambda *xi: np.sqrt(sum(x**2 for x in xi)) ** beta + 0j, dim)

    def scaled(self, c: float) -> "MultiplierSymbol":
        f = self.func
        return MultiplierSymbol(self.degree, lambda *xi: c * f(*xi), self.dim)


def multiplier_apply(f: RealField, ell: MultiplierSymbol, tol: float = 1e-8) -> RealField:
    """Apply the Fourier multiplier with symbol ``ell``; the zero mode maps to 0."""
    grid = f.grid
    if ell.dim != grid.dim:
        raise ValueError(f"symbol dimension {ell.dim} != grid dimension {grid.dim}")
    r = grid.xi_norm
    nz = r > 0
    sym = np.zeros(grid.shape, complex)
    sym[nz] = np.asarray(ell(*(x[nz] for x in grid.xi)), complex)
    # realness requires l(-xi) = conj(l(xi)) away from the unpaired Nyquist modes
    nyq = np.zeros(grid.shape, bool)
    for kj in np.meshgrid(*([grid.k1d] * grid.dim), indexing="ij"):
        nyq |= kj == -grid.points // 2
    inner = np.where(nyq, 0, sym)
    defect = hermitian_defect(inner)
    if defect > tol:
        raise SymmetryViolation(f"symbol fails l(-xi) = conj(l(xi)) (defect {defect:.2e})")
    return RealField(grid, apply_symbol(f.values, _full_to_r(grid, sym)))


def advection_divergence(f: RealField, a: Sequence[float]) -> RealField:
    """a . grad f computed spectrally; exactly mass-free."""
    grid = f.grid
    a = np.atleast_1d(np.asarray(a, float))
    if a.shape != (grid.dim,):
        raise ValueError(f"a must have {grid.dim} components")
    return RealField(grid, apply_symbol(f.values, advection_symbol(grid, a)))


def advection_symbol(grid: GridSpec, a) -> np.ndarray:
    """rfft-layout symbol of a . grad."""
    a = np.atleast_1d(np.asarray(a, float))
    sym = sum(1j * aj * xj for aj, xj in zip(a, grid.xi))
    return _full_to_r(grid, np.asarray(sym, complex))
