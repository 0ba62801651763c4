"""Commands behind the ``zml`` front end.

Each command reads an :class:`ExperimentConfig`, runs one experiment and
writes CSV files (shortest round-trip float format), ``meta.txt`` and a
gnuplot script into the output directory.  All CSVs carry the seed and a
hash of the normalized configuration in every row.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .. import __version__
from ..analysis import asymptotic_profile, fit_decay, g_functional, profile_distance
from ..errors import Blowup, NoContraction, WindowTooNarrow, ZmlError
from ..evolution import SimConfig, default_sample_times, evolve, pair_evolve, picard_iterate
from ..initial_data import (
    InitialDatum,
    compute_A,
    custom_datum,
    make_dipole,
    make_fractional_bump,
    make_miyakawa,
    smooth_bump,
)
from ..operators import gauss_kernel, partial_derivative, self_similar_profile
from ..oracles import OracleNotConverged, QuadratureSpec, cole_hopf_solution
from ..spectral import GridSpec, RealField, integrate, lp_norm
from .config import ExperimentConfig, dump_config, parse_config

__all__ = [
    "COMMANDS",
    "ExperimentSpec",
    "run_experiment",
    "build_grid",
    "build_sim_config",
    "build_datum",
    "burgers_bump",
    "sweep",
]

COMMANDS = ("simulate", "sweep", "fit", "profile-compare", "oracle-check", "picard", "stability")

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_NOCONTRACTION, EXIT_ORACLE, EXIT_ERROR = 0, 2, 3, 4, 5, 1


class OracleGateFailure(ZmlError, RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    config_path: str
    output_dir: str
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:16]


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], seed: int, chash: str):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(list(header) + ["seed", "config_sha256"])
    for row in rows:
        w.writerow([fmt(v) for v in row] + [str(seed), chash])
    path.write_bytes(buf.getvalue().encode("utf-8"))


def write_meta(out: Path, cfg: ExperimentConfig, spec: ExperimentSpec, wall: float, extra=()):
    lines = [
        f"command: {spec.command}",
        f"seed: {spec.seed}",
        f"threads: {spec.threads}",
        f"code_version: {__version__}",
        f"config_path: {cfg.source}",
        f"config_sha256: {config_hash(cfg)}",
        f"wall_time_s: {wall:.3f}",
    ]
    lines += [f"{k}: {v}" for k, v in extra]
    for line in dump_config(cfg).splitlines():
        if line.strip():
            lines.append(f"config: {line}")
    (out / "meta.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_plot_script(out: Path, files: Sequence[tuple], seed: int, chash: str):
    """gnuplot command file plotting columns of the emitted CSVs on log axes."""
    lines = [
        f"# seed: {seed}",
        f"# config_sha256: {chash}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale xy",
        "set xlabel 't'",
        "set terminal pngcairo size 900,600",
    ]
    for name, cols in files:
        stem = Path(name).stem
        lines.append(f"set output '{stem}.png'")
        plots = [f"'{name}' using 1:{c} with linespoints" for c in cols]
        lines.append("plot " + ", \\\n     ".join(plots))
    (out / "plot.gp").write_text("\n".join(lines) + "\n", encoding="utf-8")


# construction of grids, configs and data


def build_grid(cfg: ExperimentConfig) -> GridSpec:
    g = cfg["grid"]
    return GridSpec(g["dim"], g["L"], g["N"])


def build_sim_config(cfg: ExperimentConfig, grid: Optional[GridSpec] = None) -> SimConfig:
    r = cfg["run"]
    a = cfg["analysis"]
    grid = grid or build_grid(cfg)
    q = cfg.q
    q_star = 1 + 1 / (grid.dim + cfg["data"]["beta"])
    p_list = tuple(sorted(set(a["p_list"]) | {q_star}))
    return SimConfig(
        grid=grid,
        q=q,
        beta=cfg["data"]["beta"],
        a=cfg.a,
        T=r["T"],
        dt=r["dt"],
        t0=r["t0"],
        scheme=r["scheme"],
        pad_factor=r["pad_factor"],
        blowup_threshold=r["blowup_threshold"],
        flux=cfg["pde"]["flux"],
        samples=r["samples"],
        p_list=p_list,
        waive_window=r["waive_window"],
    )


def burgers_bump(x, radius: float = 6.0, amplitude: float = 3.0):
    """u0 = amplitude * d/dx bump(x / radius): smooth, compact, zero mass.

    Returns (values, primitive) with primitive = amplitude * bump(x / radius).
    """
    r = np.asarray(x, float) / radius
    out = np.zeros_like(r)
    m = np.abs(r) < 1
    rm = r[m]
    out[m] = amplitude / radius * np.exp(1 - 1 / (1 - rm**2)) * (-2 * rm / (1 - rm**2) ** 2)
    return out, amplitude * smooth_bump(r)


def _random_compact(grid: GridSpec, count: int, radius: float, seed: int) -> RealField:
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape)
    for _ in range(count):
        c = rng.uniform(-radius / 2, radius / 2, size=grid.dim)
        w = rng.uniform(radius / 8, radius / 4)
        r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(grid.coords, c)))
        vals += rng.normal() * smooth_bump(r / w)
    f = RealField(grid, vals)
    bump = RealField(grid, smooth_bump(grid.radius / radius))
    return f - bump * (integrate(f) / integrate(bump))


def build_datum(cfg: ExperimentConfig, grid: GridSpec, seed: int = 0) -> InitialDatum:
    d = cfg["data"]
    kind, beta, amp = d["kind"], d["beta"], d["amplitude"]
    if kind == "fractional_bump":
        return make_fractional_bump(grid, beta, d["mass"], d["width"], d["compact"]).scaled(amp)
    if kind == "self_similar":
        f = self_similar_profile(grid, beta, 0, d["s"])
        return custom_datum(f * amp, beta, amp * (2 * np.pi) ** (-grid.dim / 2))
    if kind == "dipole":
        return make_dipole(grid, 0, d["mass"], d["width"]).scaled(amp)
    if kind == "miyakawa":
        return make_miyakawa(grid, beta, d["mass"], d["width"], d["separation"]).scaled(amp)
    if kind == "burgers_bump":
        if grid.dim != 1:
            raise ValueError("burgers_bump data are one-dimensional")
        vals, _ = burgers_bump(grid.x1d, d["radius"], amp)
        return custom_datum(RealField(grid, vals), 1.0)
    if kind == "random_compact":
        return custom_datum(_random_compact(grid, d["bumps"], d["radius"], seed) * amp, 1.0)
    raise ValueError(kind)


def _perturbed(cfg: ExperimentConfig, u0: InitialDatum) -> InitialDatum:
    d = cfg["data"]
    eps = d["perturb_eps"]
    if d["perturb_kind"] == "scale":
        return u0.scaled(1 + eps)
    if d["perturb_kind"] == "dipole":
        dip = partial_derivative(gauss_kernel(u0.grid, 1.0), (1,) + (0,) * (u0.grid.dim - 1)) * eps
        return u0 + custom_datum(dip, 1.0)
    return u0


def _amplitude(u0: InitialDatum) -> float:
    if u0.amplitude_A is not None:
        return u0.amplitude_A
    return compute_A(u0, u0.beta).value


# commands


def _sample_times(sim: SimConfig, cfg: ExperimentConfig) -> np.ndarray:
    """Default log-spaced times plus the fit window endpoints."""
    a = cfg["analysis"]
    extra = [t for t in (a["fit_lo"], a["fit_hi"]) if t is not None and sim.t0 < t <= sim.T]
    return np.unique(np.concatenate([default_sample_times(sim), extra]))


def _norm_rows(traj, cfg: ExperimentConfig, u0: InitialDatum):
    sim = traj.config
    beta = sim.beta
    A = _amplitude(u0)
    g = g_functional(traj.records, beta, sim.q_star, sim.grid.dim)
    rows = []
    for i, rec in enumerate(traj.records):
        t = rec.t
        besov = t ** (beta / 2) * rec.l1
        if t > 0 and traj.snapshots is not None:
            pd = profile_distance(traj.snapshots[i], t, A, beta, 1).value
        else:
            pd = math.nan
        rows.append((t, rec.l1, rec.lq, rec.linf, rec.mass, besov, pd, g[i]))
    return rows


NORM_HEADER = ("t", "l1", "lq", "linf", "mass", "besov_proxy", "profile_distance_p1", "g_functional")
FIT_HEADER = ("norm_key", "exponent", "prefactor", "window_lo", "window_hi", "residual")


def _fit_rows(records, cfg: ExperimentConfig):
    a = cfg["analysis"]
    window = None
    if a["fit_lo"] is not None and a["fit_hi"] is not None:
        window = (a["fit_lo"], a["fit_hi"])
    rows = []
    for key in a["fit_keys"]:
        try:
            f = fit_decay(records, key, window)
            rows.append((key, f.exponent, f.prefactor, f.window[0], f.window[1], f.residual))
        except (WindowTooNarrow, ValueError):
            lo, hi = window if window else (math.nan, math.nan)
            rows.append((key, math.nan, math.nan, lo, hi, math.nan))
    return rows


def _cmd_simulate(cfg, spec, out: Path):
    grid = build_grid(cfg)
    sim = build_sim_config(cfg, grid)
    u0 = build_datum(cfg, grid, spec.seed)
    traj = evolve(sim, u0, sample_times=_sample_times(sim, cfg))
    seed, h = spec.seed, config_hash(cfg)
    write_csv(out / "norms.csv", NORM_HEADER, _norm_rows(traj, cfg, u0), seed, h)
    fits = _fit_rows(traj.records, cfg)
    write_csv(out / "fit.csv", FIT_HEADER, fits, seed, h)
    write_plot_script(out, [("norms.csv", (2, 3, 4))], seed, h)
    return {"steps": traj.steps, "fits": fits}


def _read_norm_records(path: Path):
    from ..analysis import NormRecord

    recs = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            recs.append(
                NormRecord(float(row["t"]), float(row["l1"]), float(row["lq"]), float(row["linf"]), float(row["mass"]))
            )
    return recs


def _cmd_fit(cfg, spec, out: Path):
    path = out / "norms.csv"
    if not path.exists():
        _cmd_simulate(cfg, spec, out)
    fits = _fit_rows(_read_norm_records(path), cfg)
    write_csv(out / "fit.csv", FIT_HEADER, fits, spec.seed, config_hash(cfg))
    return {"fits": fits}


def _cmd_profile(cfg, spec, out: Path):
    grid = build_grid(cfg)
    sim = build_sim_config(cfg, grid)
    u0 = build_datum(cfg, grid, spec.seed)
    traj = evolve(sim, u0, sample_times=_sample_times(sim, cfg))
    A = _amplitude(u0)
    T = traj.sample_times[-1]
    uT = traj.snapshots[-1]
    prof = asymptotic_profile(grid, A, sim.beta, T)
    seed, h = spec.seed, config_hash(cfg)
    if grid.dim == 1:
        rows = zip(grid.x1d, uT.values, prof.values)
        write_csv(out / "profile.csv", ("x", "u", "asymptotic_profile"), rows, seed, h)
    rows = []
    for t, f in zip(traj.sample_times, traj.snapshots):
        if t > 0:
            rows.append((t, profile_distance(f, t, A, sim.beta, 1).value, profile_distance(f, t, A, sim.beta, 2).value))
    write_csv(out / "profile_distance.csv", ("t", "distance_p1", "distance_p2"), rows, seed, h)
    write_plot_script(out, [("profile_distance.csv", (2, 3))], seed, h)
    return {"A": A}


def _cmd_oracle(cfg, spec, out: Path):
    grid = build_grid(cfg)
    sim = build_sim_config(cfg, grid)
    d = cfg["data"]
    if grid.dim != 1 or sim.q != 2 or sim.flux != "power" or d["kind"] != "burgers_bump":
        raise ValueError("oracle-check needs n=1, q=2, flux=power and burgers_bump data")
    u0 = build_datum(cfg, grid, spec.seed)
    T = sim.T
    traj = evolve(sim.with_(store_snapshots=True), u0, sample_times=[sim.t0, T])
    R, amp, a = d["radius"], d["amplitude"], sim.a[0]
    ref = cole_hopf_solution(
        lambda y: burgers_bump(y, R, amp)[0],
        T - sim.t0,
        grid.x1d,
        QuadratureSpec(cfg["analysis"]["oracle_nodes"], truncation_radius=R),
        a=a,
        primitive=lambda y: burgers_bump(y, R, amp)[1],
    )
    u = traj.snapshots[-1].values
    err = float(np.abs(u - ref).max() / np.abs(ref).max())
    seed, h = spec.seed, config_hash(cfg)
    write_csv(out / "oracle.csv", ("x", "u", "u_cole_hopf"), zip(grid.x1d, u, ref), seed, h)
    tol = cfg["analysis"]["oracle_tol"]
    report = [
        f"t: {fmt(T)}",
        f"max_relative_linf_error: {fmt(err)}",
        f"tolerance: {fmt(tol)}",
        f"status: {'pass' if err <= tol else 'fail'}",
        f"seed: {seed}",
        f"config_sha256: {h}",
    ]
    (out / "report.txt").write_text("\n".join(report) + "\n", encoding="utf-8")
    if err > tol:
        raise OracleGateFailure(f"evolve vs Cole-Hopf error {err:.3e} exceeds {tol:.0e}")
    return {"error": err}


def _cmd_picard(cfg, spec, out: Path):
    grid = build_grid(cfg)
    sim = build_sim_config(cfg, grid)
    u0 = build_datum(cfg, grid, spec.seed)
    r = cfg["run"]
    seed, h = spec.seed, config_hash(cfg)
    try:
        rep = picard_iterate(
            u0,
            sim,
            k_max=r["picard_k_max"],
            sigma_nodes=r["picard_sigma_nodes"],
            epsilon=r["picard_epsilon"],
            waive_balance=not r["picard_balanced"],
        )
        norms, ratios = rep.iterates_norms, rep.contraction_ratios
    except NoContraction as exc:
        rows = [(k + 2, rr) for k, rr in enumerate(exc.ratios)]
        write_csv(out / "picard.csv", ("iteration", "ratio"), rows, seed, h)
        raise
    rows = [(k + 1, nm, ratios[k - 1] if k > 0 else math.nan) for k, nm in enumerate(norms)]
    write_csv(out / "picard.csv", ("iteration", "x_norm_difference", "ratio"), rows, seed, h)
    return {"converged": rep.converged}


def _cmd_stability(cfg, spec, out: Path):
    grid = build_grid(cfg)
    sim = build_sim_config(cfg, grid)
    u0 = build_datum(cfg, grid, spec.seed)
    v0 = _perturbed(cfg, u0)
    res = pair_evolve(u0, v0, sim, sample_times=_sample_times(sim, cfg))
    rows = [(d.t, d.f_q, d.f_1, d.lq, d.l1) for d in res.difference]
    seed, h = spec.seed, config_hash(cfg)
    write_csv(out / "stability.csv", ("t", "f_q", "f_1", "diff_lq", "diff_l1"), rows, seed, h)
    write_plot_script(out, [("stability.csv", (2, 3))], seed, h)
    return {}


def _sweep_worker(args):
    index, text, source, base_out, seed = args
    from .config import parse_text

    cfg = parse_text(text, source)
    run_dir = Path(base_out) / f"run_{index:03d}"
    run_dir.mkdir(parents=True, exist_ok=True)
    q, beta = cfg.q, cfg["data"]["beta"]
    spec = ExperimentSpec("simulate", source, str(run_dir), seed + index, 1)
    try:
        t = time.perf_counter()
        info = _cmd_simulate(cfg, spec, run_dir)
        write_meta(run_dir, cfg, spec, time.perf_counter() - t)
        fit = next((f for f in info["fits"] if f[0] == "l1"), None)
        exponent, residual = (fit[1], fit[5]) if fit else (math.nan, math.nan)
        return (index, q, beta, exponent, residual, "ok")
    except Exception as exc:  # failures are recorded, not fatal
        (run_dir / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        return (index, q, beta, math.nan, math.nan, type(exc).__name__)


SUMMARY_HEADER = ("index", "q", "beta", "l1_exponent", "residual", "status")


def sweep(cfg: ExperimentConfig, out: Path, threads: int = 1, seed: int = 0):
    """Run the [sweep] grid q_values x beta_values; summary rows in index order."""
    s = cfg["sweep"]
    jobs = []
    index = 0
    for q in s["q_values"]:
        for beta in s["beta_values"]:
            c = cfg.replace("pde", q=q).replace("data", beta=beta)
            jobs.append((index, dump_config(c), cfg.source, str(out), seed))
            index += 1
    if threads == 1 or len(jobs) <= 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    results.sort(key=lambda r: r[0])
    write_csv(out / "summary.csv", SUMMARY_HEADER, results, seed, config_hash(cfg))
    return results


_DISPATCH = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "profile-compare": _cmd_profile,
    "oracle-check": _cmd_oracle,
    "picard": _cmd_picard,
    "stability": _cmd_stability,
}


def run_experiment(spec: ExperimentSpec) -> int:
    """Run one command; returns the process exit status."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = parse_config(spec.config_path)
    except (ZmlError, OSError) as exc:
        (out / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        return EXIT_CONFIG
    t = time.perf_counter()
    try:
        if spec.command == "sweep":
            rows = sweep(cfg, out, spec.threads, spec.seed)
            extra = [("runs", len(rows))]
        else:
            info = _DISPATCH[spec.command](cfg, spec, out)
            extra = [(k, v) for k, v in info.items() if not isinstance(v, list)]
    except Exception as exc:
        write_meta(out, cfg, spec, time.perf_counter() - t, [("status", type(exc).__name__)])
        (out / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        if isinstance(exc, Blowup):
            return EXIT_BLOWUP
        if isinstance(exc, NoContraction):
            return EXIT_NOCONTRACTION
        if isinstance(exc, (OracleGateFailure, OracleNotConverged)):
            return EXIT_ORACLE
        return EXIT_ERROR
    write_meta(out, cfg, spec, time.perf_counter() - t, [("status", "ok"), *extra])
    return EXIT_OK
