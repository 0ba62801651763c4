"""Time integration of u_t - Delta u + a . grad(u |u|^(q-1)) = 0.

``evolve`` advances the spectrum with exact linear propagation and an
integrating-factor RK4 (or ETDRK2) treatment of the flux.  ``picard_iterate``
runs the Duhamel iteration literally on a graded time grid so contraction
ratios can be observed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .analysis import NormRecord, record_norms, x_weight
from .errors import Blowup, NoContraction
from .initial_data import InitialDatum, besov_norm
from .operators import advection_symbol
from .spectral import GridSpec, RealField, irfft_real, lp_norm, pad_spectrum, truncate_spectrum

__all__ = [
    "SimConfig",
    "Trajectory",
    "PicardReport",
    "PairResult",
    "nonlinear_flux_divergence",
    "evolve",
    "picard_iterate",
    "pair_evolve",
    "critical_exponent",
    "default_sample_times",
    "dt_max",
]

SCHEMES = ("IFRK4", "ETDRK2")
FLUXES = ("odd", "power")


def critical_exponent(n: int, beta: float) -> float:
    return 1.0 + 1.0 / (n + beta)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one run.

    ``flux="odd"`` evaluates u |u|^(q-1) = sign(u) |u|^q; ``flux="power"``
    uses u^q for integer q, e.g. the Burgers flux u^2.
    """

    grid: GridSpec
    q: float
    beta: float
    a: tuple
    T: float
    dt: float
    t0: float = 0.0
    scheme: str = "IFRK4"
    pad_factor: int = 2
    blowup_threshold: Optional[float] = None
    flux: str = "odd"
    samples: int = 48
    p_list: tuple = ()
    waive_window: bool = False
    store_snapshots: bool = True

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        if len(a) != self.grid.dim:
            raise ValueError(f"a has {len(a)} components, grid dimension is {self.grid.dim}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.t0 >= 0:
            raise ValueError("t0 must be >= 0")
        if not self.T > self.t0:
            raise ValueError("T must exceed t0")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.flux not in FLUXES:
            raise ValueError(f"flux must be one of {FLUXES}")
        if self.flux == "power" and not float(self.q).is_integer():
            raise ValueError("flux='power' needs an integer q")
        if int(self.pad_factor) != self.pad_factor or self.pad_factor < 2:
            raise ValueError("pad_factor must be an integer >= 2")
        if self.samples < 2:
            raise ValueError("need at least two sample times")
        if math.sqrt(self.T) > self.grid.half_width / 4 and not self.waive_window:
            raise ValueError(
                f"sqrt(T)={math.sqrt(self.T):.3g} exceeds L/4={self.grid.half_width / 4:.3g}; "
                "enlarge the box or set waive_window"
            )

    @property
    def q_star(self) -> float:
        return critical_exponent(self.grid.dim, self.beta)

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


def default_sample_times(config: SimConfig) -> np.ndarray:
    """Log-spaced sample times in [t0, T] (t0 itself included)."""
    if config.t0 > 0:
        return np.geomspace(config.t0, config.T, config.samples)
    return np.concatenate([[0.0], np.geomspace(config.T * 1e-3, config.T, config.samples - 1)])


def dt_max(config: SimConfig, u0: RealField) -> float:
    """Advective step guidance 0.5 h / (q |a| max|u0|^(q-1))."""
    speed = config.q * np.linalg.norm(config.a) * lp_norm(u0, np.inf) ** (config.q - 1)
    return math.inf if speed == 0 else 0.5 * config.grid.spacing / speed


class _Flux:
    """rfft-space map u_hat -> -a . grad F(u) with padded pointwise evaluation."""

    def __init__(self, grid: GridSpec, q: float, a, pad: int, flux: str = "odd"):
        self.grid = grid
        self.q = float(q)
        self.pad = int(pad)
        self.n = grid.points
        self.m = grid.points * self.pad
        self.fine_shape = (self.m,) * grid.dim
        self.scale = float(self.pad) ** grid.dim
        self.adv = advection_symbol(grid, a)
        self.flux = flux
        self.last_max = 0.0

    def pointwise(self, u: np.ndarray) -> np.ndarray:
        if self.flux == "power":
            return u ** int(self.q)
        if self.q == 2.0:
            return u * np.abs(u)
        return np.copysign(np.abs(u) ** self.q, u)

    def transform(self, uh: np.ndarray) -> np.ndarray:
        """rfft spectrum (on the coarse grid) of F(u), dealiased by padding."""
        fine = irfft_real(pad_spectrum(uh, self.n, self.m), self.fine_shape) * self.scale
        self.last_max = float(np.abs(fine).max())
        Fh = truncate_spectrum(np.fft.rfftn(self.pointwise(fine)), self.n, self.m)
        return Fh / self.scale

    def __call__(self, uh: np.ndarray) -> np.ndarray:
        return -self.adv * self.transform(uh)


def nonlinear_flux_divergence(f: RealField, q: float, a, pad: int = 2, flux: str = "odd") -> RealField:
    """a . grad(f |f|^(q-1)) by padded pointwise power and spectral divergence."""
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    op = _Flux(f.grid, q, a, pad, flux)
    out = irfft_real(-op(np.fft.rfftn(f.values)), f.grid.shape)
    return RealField(f.grid, out)


@dataclass
class Trajectory:
    config: SimConfig
    sample_times: np.ndarray
    records: List[NormRecord]
    snapshots: Optional[List[RealField]] = None
    observations: list = field(default_factory=list)
    steps: int = 0

    def snapshot_at(self, t: float) -> RealField:
        if self.snapshots is None:
            raise ValueError("snapshots were not stored")
        i = int(np.argmin(np.abs(self.sample_times - t)))
        if not np.isclose(self.sample_times[i], t, rtol=1e-12, atol=1e-14):
            raise KeyError(f"t={t} is not a sample time")
        return self.snapshots[i]


def _phi_functions(z: np.ndarray):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near 0."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    phi1 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24, np.expm1(zs) / zs)
    phi2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120, (np.expm1(zs) - zs) / zs**2)
    return phi1, phi2


class _Stepper:
    def __init__(self, config: SimConfig, op: _Flux):
        self.cfg = config
        self.op = op
        self.lin = -config.grid.rxi_norm**2
        self._cache = {}

    def _factors(self, h):
        if h not in self._cache:
            if self.cfg.scheme == "IFRK4":
                self._cache[h] = (np.exp(self.lin * h), np.exp(self.lin * h / 2))
            else:
                z = self.lin * h
                p1, p2 = _phi_functions(z)
                self._cache[h] = (np.exp(z), p1 * h, p2 * h)
        return self._cache[h]

    def step(self, uh, h):
        N = self.op
        if self.cfg.scheme == "IFRK4":
            E, E2 = self._factors(h)
            k1 = N(uh)
            k2 = N(E2 * (uh + 0.5 * h * k1))
            k3 = N(E2 * uh + 0.5 * h * k2)
            k4 = N(E * uh + h * E2 * k3)
            return E * uh + h / 6 * (E * k1 + 2 * E2 * (k2 + k3) + k4)
        E, P1, P2 = self._factors(h)
        n0 = N(uh)
        a = E * uh + P1 * n0
        return a + P2 * (N(a) - n0)


def evolve(
    config: SimConfig,
    u0,
    observers: Sequence[Callable] = (),
    sample_times: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Advance u0 from t0 to T; records norms (and snapshots) at the sample times.

    Each observer is called as ``obs(t, field)`` at every sample time and its
    return values are collected in ``Trajectory.observations``.
    """
    f0 = u0.field if isinstance(u0, InitialDatum) else u0
    grid = config.grid
    if f0.grid != grid:
        raise ValueError("initial datum lives on a different grid")
    times = default_sample_times(config) if sample_times is None else np.asarray(sample_times, float)
    if np.any(np.diff(times) <= 0) or times[0] < config.t0 - 1e-12 or times[-1] > config.T + 1e-12:
        raise ValueError("sample times must increase strictly within [t0, T]")
    limit = dt_max(config, f0)
    if config.dt > limit:
        warnings.warn(f"dt={config.dt:g} exceeds advective guidance {limit:.3g}", RuntimeWarning, stacklevel=2)
    threshold = config.blowup_threshold
    if threshold is None:
        threshold = 1e6 * max(lp_norm(f0, np.inf), np.finfo(float).tiny)
    op = _Flux(grid, config.q, config.a, config.pad_factor, config.flux)
    stepper = _Stepper(config, op)
    p_list = config.p_list

    records, snaps, obs_out = [], [] if config.store_snapshots else None, [[] for _ in observers]

    def sample(t, uh):
        u = RealField(grid, irfft_real(uh, grid.shape))
        records.append(record_norms(u, t, p_list, config.q))
        if snaps is not None:
            snaps.append(u)
        for k, obs in enumerate(observers):
            obs_out[k].append(obs(t, u))

    uh = np.fft.rfftn(f0.values)
    t = config.t0
    steps = 0
    for ts in times:
        span = ts - t
        if span > 1e-14 * max(1.0, ts):
            nsteps = max(1, math.ceil(span / config.dt - 1e-9))
            h = span / nsteps
            for _ in range(nsteps):
                uh = stepper.step(uh, h)
                steps += 1
                if not op.last_max <= threshold:
                    raise Blowup(t + h, op.last_max, threshold)
                t += h
        t = ts
        sample(t, uh)
        if records[-1].linf > threshold or not np.isfinite(records[-1].linf):
            raise Blowup(t, records[-1].linf, threshold)
    return Trajectory(config, times, records, snaps, obs_out, steps)


@dataclass
class PicardReport:
    iterates_norms: List[float]
    contraction_ratios: List[float]
    converged: bool
    times: np.ndarray
    solution: List[RealField]

    def solution_at(self, t: float) -> RealField:
        i = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[i], t, rtol=1e-12):
            raise KeyError(f"t={t} is not on the Picard time grid")
        return self.solution[i]


def _graded_grid(config: SimConfig, count: int, extra=()) -> np.ndarray:
    H = config.T - config.t0
    tau = np.geomspace(1e-3 * H, H, count)
    pts = [0.0, *tau, *(e - config.t0 for e in extra if config.t0 < e <= config.T)]
    return np.unique(np.round(pts, 15))


def picard_iterate(
    u0,
    config: SimConfig,
    k_max: int = 12,
    time_grid: Optional[Sequence[float]] = None,
    sigma_nodes: int = 64,
    epsilon: Optional[float] = None,
    waive_balance: bool = False,
    floor: float = 1e-12,
) -> PicardReport:
    """Successive substitution u^{k+1} = N(u^k) for the Duhamel operator.

    N(u)(t) = e^{(t - t0) Delta} u0 - int a . grad e^{(t - s) Delta} F(u(s)) ds,
    with s = t - sigma^2 so that the square-root singularity of the kernel is
    absorbed; sigma runs over a uniform grid with ``sigma_nodes`` intervals and
    F(u) is interpolated linearly in time between grid points.  ``time_grid``
    holds absolute times in [t0, T] (t0 is added if missing).
    """
    f0 = u0.field if isinstance(u0, InitialDatum) else u0
    grid = config.grid
    n = grid.dim
    if not waive_balance and abs(config.q - config.q_star) > 1e-9:
        raise ValueError(f"q={config.q} is not the balanced exponent {config.q_star}")
    if epsilon is not None:
        b = besov_norm(f0, config.beta, warn=False).value
        if b >= epsilon:
            raise NoContraction(f"Besov norm {b:.3e} is not below epsilon={epsilon:.3e}")
    if time_grid is None:
        tau = _graded_grid(config, 40, extra=(1.0,))
    else:
        tau = np.unique(np.concatenate([[0.0], np.asarray(time_grid, float) - config.t0]))
    if np.any(tau < 0) or tau[-1] > config.T - config.t0 + 1e-12:
        raise ValueError("time grid must lie in [t0, T]")
    times = config.t0 + tau
    K = tau.size
    op = _Flux(grid, config.q, config.a, config.pad_factor, config.flux)
    r2 = (grid.rxi_norm**2).ravel()
    adv = op.adv.ravel()
    u0h = np.fft.rfftn(f0.values).ravel()
    lin = np.exp(-np.outer(tau, r2)) * u0h

    s_unit = np.linspace(0.0, 1.0, sigma_nodes + 1)
    w_unit = np.full(sigma_nodes + 1, 1.0 / sigma_nodes)
    w_unit[[0, -1]] *= 0.5
    weights = x_weight(np.where(times > 0, times, 1.0), n, config.q, config.beta) * (times > 0)

    def to_real(U):
        return irfft_real(U.reshape(grid.rshape), grid.shape)

    def duhamel(Fh):
        out = np.zeros_like(Fh)
        for i in range(1, K):
            root = math.sqrt(tau[i])
            sig = s_unit * root
            s = tau[i] - sig**2
            idx = np.clip(np.searchsorted(tau, s, side="right") - 1, 0, K - 2)
            theta = np.clip((s - tau[idx]) / (tau[idx + 1] - tau[idx]), 0.0, 1.0)
            Fs = (1 - theta)[:, None] * Fh[idx] + theta[:, None] * Fh[idx + 1]
            kern = np.exp(-np.outer(sig**2, r2)) * (2 * sig * w_unit * root)[:, None]
            out[i] = adv * np.sum(kern * Fs, axis=0)
        return out

    def xnorm(U):
        return max(
            (weights[i] * lp_norm(RealField(grid, to_real(U[i])), config.q) for i in range(K)),
            default=0.0,
        )

    U = lin.copy()
    norms, ratios = [], []
    for k in range(k_max):
        Fh = np.stack([op.transform(U[i].reshape(grid.rshape)).ravel() for i in range(K)])
        U_new = lin - duhamel(Fh)
        d = xnorm(U_new - U)
        size = xnorm(U_new)
        U = U_new
        if not np.isfinite(d) or not np.isfinite(size):
            raise NoContraction("Picard iterates diverged", ratios)
        if d <= floor * size or size == 0:
            break
        norms.append(d)
        if len(norms) > 1:
            ratios.append(d / norms[-2])
            if len(ratios) >= 2 and ratios[-1] > 1 and ratios[-2] > 1:
                raise NoContraction(
                    f"contraction ratios {ratios[-2]:.3g}, {ratios[-1]:.3g} exceed 1", ratios
                )
    converged = not ratios or ratios[-1] <= 0.9
    sol = [RealField(grid, to_real(U[i])) for i in range(K)]
    return PicardReport(norms, ratios, bool(converged), times, sol)


@dataclass
class DifferenceRecord:
    t: float
    f_q: float
    f_1: float
    lq: float
    l1: float


@dataclass
class PairResult:
    u: Trajectory
    v: Trajectory
    difference: List[DifferenceRecord]


def pair_evolve(u0, v0, config: SimConfig, sample_times=None) -> PairResult:
    """Evolve two data with identical stepping; record f(t) = t^w ||u - v||_q."""
    cfg = config.with_(store_snapshots=True)
    tu = evolve(cfg, u0, sample_times=sample_times)
    tv = evolve(cfg, v0, sample_times=sample_times)
    n = cfg.grid.dim
    diff = []
    for t, a, b in zip(tu.sample_times, tu.snapshots, tv.snapshots):
        d = a - b
        lq, l1 = lp_norm(d, cfg.q), lp_norm(d, 1)
        wq = x_weight(t, n, cfg.q, cfg.beta) if t > 0 else 0.0
        w1 = t ** (cfg.beta / 2)
        diff.append(DifferenceRecord(float(t), wq * lq, w1 * l1, lq, l1))
    return PairResult(tu, tv, diff)
