"""Large-time instrumentation: norm series, decay fits, profile distances.

Decay exponents are plain least-squares slopes in (log t, log norm) over an
explicit window; the residual is always returned alongside the slope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import GridMismatch, WindowTooNarrow
from .operators import heat_semigroup, self_similar_profile
from .spectral import RealField, integrate, lp_norm

__all__ = [
    "NormRecord",
    "DecayFit",
    "ProfileDistance",
    "record_norms",
    "fit_decay",
    "profile_distance",
    "asymptotic_profile",
    "scaling_collapse",
    "g_functional",
    "holder_interpolation_check",
    "linearization_distance",
    "carlen_loss_constant",
    "x_weight",
]


@dataclass(frozen=True)
class NormRecord:
    t: float
    l1: float
    lq: float
    linf: float
    mass: float
    q: float = 2.0
    lp_extra: dict = field(default_factory=dict)

    def get(self, key: Union[str, float]) -> float:
        """Look a norm up by field name (``"l1"``, ``"lq"``...) or by exponent."""
        if isinstance(key, str):
            return getattr(self, key)
        if key == 1:
            return self.l1
        if key == np.inf:
            return self.linf
        if key == self.q:
            return self.lq
        return self.lp_extra[key]


def record_norms(u: RealField, t: float, p_list: Iterable[float] = (), q: float = 2.0) -> NormRecord:
    extra = {float(p): lp_norm(u, p) for p in p_list}
    return NormRecord(
        t=float(t),
        l1=lp_norm(u, 1),
        lq=lp_norm(u, q),
        linf=lp_norm(u, np.inf),
        mass=integrate(u),
        q=float(q),
        lp_extra=extra,
    )


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    prefactor: float
    window: tuple
    residual: float
    count: int = 0


def _series(records, norm_key) -> tuple[np.ndarray, np.ndarray]:
    recs = list(records)
    if recs and isinstance(recs[0], NormRecord):
        t = np.array([r.t for r in recs])
        if callable(norm_key):
            v = np.array([norm_key(r) for r in recs])
        else:
            v = np.array([r.get(norm_key) for r in recs])
    else:
        arr = np.asarray(recs, float).reshape(-1, 2)
        t, v = arr[:, 0], arr[:, 1]
    return t, v


def fit_decay(records, norm_key="l1", window: Optional[Sequence[float]] = None, min_points: int = 8) -> DecayFit:
    """Least-squares slope of log(norm) against log(t) over ``window``.

    ``records`` is a sequence of :class:`NormRecord` or of (t, value) pairs.
    The default window is the last decade of the recorded times.
    """
    t, v = _series(records, norm_key)
    if t.size == 0:
        raise WindowTooNarrow("no records")
    if window is None:
        hi = t.max()
        window = (hi / 10, hi)
    lo, hi = float(window[0]), float(window[1])
    tol = 1e-9 * hi
    sel = (t >= lo - tol) & (t <= hi + tol) & (t > 0)
    if sel.sum() < min_points:
        raise WindowTooNarrow(f"{sel.sum()} records in [{lo:g}, {hi:g}], need {min_points}")
    ts, vs = t[sel], v[sel]
    if ts.max() / ts.min() < 10 * (1 - 1e-9):
        raise WindowTooNarrow(f"records span {ts.max() / ts.min():.3g}x, need one decade")
    if np.any(vs <= 0):
        raise ValueError("cannot fit a power law to nonpositive norms")
    X, Y = np.log(ts), np.log(vs)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = float(np.sqrt(np.mean((Y - (slope * X + intercept)) ** 2)))
    return DecayFit(float(slope), float(np.exp(intercept)), (lo, hi), resid, int(sel.sum()))


def x_weight(t: float, n: int, p: float, beta: float) -> float:
    """t^((n/2)(1 - 1/p) + beta/2), the self-similar weight of an L^p norm."""
    return t ** (n / 2 * (1 - 1 / p) + beta / 2)


@dataclass(frozen=True)
class ProfileDistance:
    t: float
    p: float
    value: float


def asymptotic_profile(grid, A: float, beta: float, t: float, gamma=0) -> RealField:
    """Large-time profile (2 pi)^(n/2) A d^gamma D^beta G(., t) of data with amplitude A.

    With the symmetric transform, e^{t Delta} u0 has coefficients
    u0_hat(xi) e^{-t |xi|^2} ~ A |xi|^beta e^{-t |xi|^2}, while D^beta G(., t)
    has (2 pi)^(-n/2) |xi|^beta e^{-t |xi|^2}; hence the factor (2 pi)^(n/2).
    """
    return self_similar_profile(grid, beta, gamma, t) * (A * (2 * np.pi) ** (grid.dim / 2))


def profile_distance(u: RealField, t: float, A: float, beta: float, p: float = 1, gamma=0) -> ProfileDistance:
    """Scaled distance t^((n/2)(1-1/p) + beta/2 + |gamma|/2) ||u - asymptotic_profile||_p.

    ``A`` is the amplitude lim u0_hat(xi) / |xi|^beta of the datum (see
    :func:`asymptotic_profile` for the profile it selects).
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    n = u.grid.dim
    prof = asymptotic_profile(u.grid, A, beta, t, gamma)
    order = gamma if np.isscalar(gamma) else sum(gamma)
    w = x_weight(t, n, p, beta) * t ** (order / 2)
    return ProfileDistance(float(t), float(p), float(w * lp_norm(u - prof, p)))


def _resample(f: RealField, lam: float) -> np.ndarray:
    """Values of the trigonometric interpolant of f at lam * x_j (x_j on the grid)."""
    g = f.grid
    N = g.points
    if float(lam).is_integer():
        k = int(lam)
        # lam x_j = -lam L + lam j h lands on grid index lam j - (lam - 1) N/2
        idx = (k * np.arange(N) - (k - 1) * N // 2) % N
        vals = f.values
        for ax in range(g.dim):
            vals = np.take(vals, idx, axis=ax)
        return vals
    xi = g.xi1d.copy()
    E = np.exp(1j * np.outer(lam * g.x1d + g.half_width, xi)) / N
    # the unpaired Nyquist mode contributes its cosine part only
    E[:, N // 2] = np.cos(xi[N // 2] * (lam * g.x1d + g.half_width)) / N
    vals = f.values.astype(complex)
    for ax in range(g.dim):
        C = np.fft.fft(vals, axis=ax)
        vals = np.moveaxis(np.tensordot(E, C, axes=([1], [ax])), 0, ax)
    return vals.real


def scaling_collapse(
    u_t1: RealField,
    u_t2: RealField,
    t1: float,
    t2: float,
    beta: float,
    lam: float = 2.0,
    remove_offset: bool = True,
) -> float:
    """Relative L1 distance between lam^(n+beta) u_t2(lam x) and u_t1(x).

    Requires t2 / t1 = lam^2.  The comparison uses the central region
    |x_i| < L / lam where lam x stays inside the box.  Returns a value in [0, 2].

    A periodic field has zero box mean, so a profile with algebraic tails
    carries a nearly constant offset that does not rescale with the profile.
    With ``remove_offset`` both sides lose their mean over the comparison
    region first; an exactly self-similar pair still gives 0.
    """
    if u_t1.grid != u_t2.grid:
        raise GridMismatch("collapse needs both fields on the same grid")
    if not np.isclose(t2 / t1, lam**2, rtol=1e-10):
        raise ValueError(f"t2/t1 = {t2 / t1} is not lam^2 = {lam**2}")
    g = u_t1.grid
    n = g.dim
    scaled = lam ** (n + beta) * _resample(u_t2, lam)
    inside = np.ones(g.shape, bool)
    for c in g.coords:
        inside &= np.abs(c) < g.half_width / lam
    a = u_t1.values[inside]
    b = scaled[inside]
    if remove_offset:
        a = a - a.mean()
        b = b - b.mean()
    den = max(np.abs(a).sum(), np.abs(b).sum())
    return 0.0 if den == 0 else float(np.abs(a - b).sum() / den)


def g_functional(records: Sequence[NormRecord], beta: float, q_star: float, n: int = 1) -> np.ndarray:
    """Running suprema g(t) = sup t^(beta/2) ||u||_1 + sup t^w ||u||_{q*}.

    w = (n/2)(1 - 1/q*) + beta/2, which equals (1/2 + beta/2)/q* for n = 1.
    """
    if not records:
        return np.zeros(0)
    t = np.array([r.t for r in records])
    l1 = np.array([r.l1 for r in records])
    lqs = np.array([r.get(q_star) if (r.q == q_star or q_star in r.lp_extra) else np.nan for r in records])
    if np.any(np.isnan(lqs)):
        raise KeyError(f"records lack the L^{q_star} norm")
    a = np.maximum.accumulate(t ** (beta / 2) * l1)
    b = np.maximum.accumulate(x_weight(t, n, q_star, beta) * lqs)
    return a + b


def holder_interpolation_check(u: RealField, q: float, q_star: float) -> float:
    """||u||_q^q / (||u||_{q*}^{q*} ||u||_inf^{q - q*}); never exceeds 1."""
    if q < q_star:
        raise ValueError("need q >= q_star")
    a = np.abs(u.values)
    m = a.max()
    if m == 0:
        return 0.0
    a = a / m
    return float(np.sum(a**q) / np.sum(a**q_star))


def linearization_distance(u: RealField, u0, t: float, p: float = 1, t0: float = 0.0) -> float:
    """||u(t) - e^{(t - t0) Delta} u0||_p."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    f0 = getattr(u0, "field", u0)
    return lp_norm(u - heat_semigroup(f0, t - t0), p)


def carlen_loss_constant(records: Sequence[NormRecord], u0_l1: float, n: int, t_min: float = 0.1) -> float:
    """max over t >= t_min of ||u(t)||_inf t^(n/2) / ||u0||_1."""
    vals = [r.linf * r.t ** (n / 2) for r in records if r.t >= t_min]
    return float(max(vals) / u0_l1) if vals else float("nan")
