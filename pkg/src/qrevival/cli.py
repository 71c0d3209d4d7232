"""Command-line front end.

    qrevival spectrum --config run.toml [--out levels.csv]
    qrevival mathieu  --config run.toml [--threads 4]
    qrevival times    --config run.toml [--threads 4]
    qrevival simulate --config run.toml
    qrevival verify   --config run.toml [--seed 1]

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
flagged sweep rows), 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import __version__
from ._unbounded import UNBOUNDED
from .config import ConfigError, RunConfig, load_config
from .mathieu import MathieuConvergenceError, ResonanceContext, characteristic_grid
from .propagate import (GridTooSmallError, InstabilityError, RotatingFrame, coupling_matrix_element,
                        detect_times, evolve, init_packet, powerlaw_grid)
from .revival import (PerturbationBreakdownError, ResonanceSingularityError, classify_regime,
                      identity_residuals, powerlaw_C, strong_regime, time_scales, weak_regime)
from .spectra import ConvergenceError, powerlaw_energy, powerlaw_numeric_spectrum, powerlaw_spectrum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

NUMERIC_ERRORS = (ConvergenceError, MathieuConvergenceError, InstabilityError, GridTooSmallError,
                  ArithmeticError)


# --------------------------------------------------------------------------
# output


def fmt(value) -> str:
    if value is None:
        return ""
    if value is UNBOUNDED:
        return "unbounded"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(command: str, cfg: RunConfig, columns: list[str], rows: list[list],
               notes: Optional[list[str]] = None) -> str:
    buf = io.StringIO()
    buf.write(f"# qrevival {__version__}\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# config_sha256: {cfg.sha256}\n")
    for note in notes or []:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg: RunConfig, threads: Optional[int] = None):
    """Analytic against numerical levels of the configured well."""
    system = cfg.system()
    n_levels = cfg["spectrum.n_levels"]
    numeric = powerlaw_numeric_spectrum(system, n_levels, n_points=cfg["spectrum.n_points"],
                                        method=cfg["spectrum.method"], rtol=cfg["spectrum.rtol"])
    n = np.arange(n_levels)
    analytic = powerlaw_energy(system, n)
    rows = [[int(i), analytic[i], numeric.levels[i], (analytic[i] - numeric.levels[i]) / numeric.levels[i]]
            for i in n]
    notes = [f"numeric method: {numeric.method}, refinement shift {numeric.refinement_shift:.3g}"]
    return ["n", "E_analytic", "E_numeric", "rel_gap"], rows, notes, EXIT_OK


def cmd_mathieu(cfg: RunConfig, threads: Optional[int] = None):
    """Characteristic values ``a_nu(q)`` on the configured grid."""
    nus = np.linspace(cfg["mathieu.nu_start"], cfg["mathieu.nu_stop"], cfg["mathieu.nu_count"])
    qs = np.linspace(cfg["mathieu.q_start"], cfg["mathieu.q_stop"], cfg["mathieu.q_count"])
    a = characteristic_grid(nus, qs, method=cfg["mathieu.method"], branch=cfg["mathieu.branch"],
                            threads=threads)
    rows = [[nus[i], qs[j], a[i, j]] for i in range(len(nus)) for j in range(len(qs))]
    notes = [f"method: {cfg['mathieu.method']}, branch: {cfg['mathieu.branch']}"]
    return ["nu", "q", "a"], rows, notes, EXIT_OK


TIMES_COLUMNS = ["status", "regime", "V", "delta", "mu", "q", "nu0", "M_cl", "M_Q", "T0_cl", "T0_Q",
                 "Tl_cl", "Tl_Q", "weak_residual", "weak_general_residual", "strong_residual",
                 "strong_general_residual", "C_k"]


def _resonance_context(cfg: RunConfig, overrides: dict):
    values = {**cfg.values, **overrides}
    system = cfg.system(overrides)
    r, N = values["system.r"], values["drive.N"]
    V = values["drive.V"]
    basis = None
    need_numeric = cfg["times.spectrum"] == "numeric"
    if V == "auto" or need_numeric:
        n_levels = max(cfg["spectrum.n_levels"], int(math.ceil(r)) + N + 2)
        basis = powerlaw_numeric_spectrum(system, n_levels, n_points=cfg["spectrum.n_points"],
                                          method=cfg["spectrum.method"], rtol=cfg["spectrum.rtol"])
    if V == "auto":
        V = coupling_matrix_element(basis, r, N, cfg.drive().coupling)
    spectrum = basis.model(r) if need_numeric else powerlaw_spectrum(system, r)
    ctx = ResonanceContext(N=N, lam=values["drive.lambda"], V=V, spectrum=spectrum)
    return system, ctx


def times_row(cfg: RunConfig, value: Optional[float]) -> list:
    """One sweep point; failures become a flagged row rather than an exception."""
    overrides = {} if value is None else {cfg["sweep.axis"]: value}
    try:
        system, ctx = _resonance_context(cfg, overrides)
        ts = time_scales(ctx)
    except ResonanceSingularityError:
        return ["singular"] + [None] * (len(TIMES_COLUMNS) - 1)
    except PerturbationBreakdownError:
        return ["breakdown"] + [None] * (len(TIMES_COLUMNS) - 1)
    except (ValueError, *NUMERIC_ERRORS) as exc:
        return [f"error: {type(exc).__name__}"] + [None] * (len(TIMES_COLUMNS) - 1)

    regime = classify_regime(ctx.spectrum.zeta, ts.mu, ts.q, ts.beta, weak_mu=cfg["regime.weak_mu"],
                             weak_q=cfg["regime.weak_q"], strong_q=cfg["regime.strong_q"],
                             strong_beta_max=cfg["regime.strong_beta"])
    weak = weak_regime(ctx, ts)
    strong = strong_regime(ctx, ts) if ts.T0_Q is not UNBOUNDED else None
    C_k = None if system.is_harmonic else powerlaw_C(system, ctx.spectrum.r, ts.delta)
    return ["ok", regime, ctx.V, ts.delta, ts.mu, ts.q, ts.nu0, ts.M_cl, ts.M_Q, ts.T0_cl, ts.T0_Q,
            ts.Tl_cl, ts.Tl_Q, weak.residual, weak.general_residual,
            strong.residual if strong else None, strong.general_residual if strong else None, C_k]


def cmd_times(cfg: RunConfig, threads: Optional[int] = None):
    """Time scales at every sweep point, in input order."""
    points = cfg.sweep_points()
    if threads and threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda v: times_row(cfg, v), points))
    else:
        rows = [times_row(cfg, v) for v in points]
    axis = cfg["sweep.axis"]
    columns = ([axis] if axis else []) + TIMES_COLUMNS
    if axis:
        rows = [[v] + row for v, row in zip(points, rows)]
    status_col = 1 if axis else 0
    failed = sum(row[status_col] != "ok" for row in rows)
    notes = [f"spectrum: {cfg['times.spectrum']}", f"flagged rows: {failed}"]
    return columns, rows, notes, EXIT_NUMERIC if failed else EXIT_OK


def _simulation(cfg: RunConfig):
    system = cfg.system()
    grid, basis = powerlaw_grid(system, cfg["grid.n_levels"], cfg["grid.n_points"], dt=cfg["grid.dt"],
                                extent=cfg["grid.extent"], cap_factor=cfg["grid.cap_factor"])
    n0 = cfg.n0
    state = init_packet(basis, n0, cfg["packet.width"], grid)
    drive = cfg.drive()
    r = int(round(n0))
    V = cfg["drive.V"]
    if V == "auto":
        V = coupling_matrix_element(basis, r, drive.N, drive.coupling)
    drive.V = V
    # the numeric zeta of a harmonic well is roundoff, not a revival time
    spectrum = powerlaw_spectrum(system, r) if system.is_harmonic else basis.model(r)
    ctx = ResonanceContext(N=drive.N, lam=drive.lam, V=V, spectrum=spectrum)
    return grid, basis, state, drive, ctx


MAX_DEFAULT_STEPS = 10 ** 7


def _default_t_end(cfg: RunConfig, ts, dt: float) -> float:
    if cfg["simulate.t_end"] is not None:
        return cfg["simulate.t_end"]
    t_end = 10 * ts.Tl_cl if ts.Tl_Q is UNBOUNDED else 1.2 * ts.Tl_Q
    if t_end / dt > MAX_DEFAULT_STEPS:
        raise ConfigError(f"simulate.t_end: default run of {t_end:.6g} needs more than {MAX_DEFAULT_STEPS} steps; "
                          "set it explicitly")
    return t_end


def cmd_simulate(cfg: RunConfig, threads: Optional[int] = None):
    """Autocorrelation series of the configured packet."""
    grid, basis, state, drive, ctx = _simulation(cfg)
    ts = time_scales(ctx)
    t_end = _default_t_end(cfg, ts, grid.dt)
    frame = RotatingFrame(basis, int(round(cfg.n0)), drive.N) if cfg["simulate.frame"] == "rotating" else None
    series = evolve(state, drive if drive.lam else None, t_end, cfg["simulate.sample_every"], frame=frame)
    a = series.amplitude
    rows = [[series.times[i], a[i].real, a[i].imag, series.values[i]] for i in range(len(a))]
    notes = [f"frame: {series.frame}", f"dt: {fmt(grid.dt)}", f"steps: {int(round(abs(t_end) / grid.dt))}"]
    return ["t", "reA", "imA", "abs2A"], rows, notes, EXIT_OK


def _check(name, predicted, measured, tol):
    if predicted is UNBOUNDED:
        ok = measured is None
        return [name, predicted, "not_found" if measured is None else measured, None, None,
                "pass" if ok else "fail"]
    if measured is None:
        return [name, predicted, "not_found", None, tol, "fail"]
    err = (measured - predicted) / predicted
    return [name, predicted, measured, err, tol, "pass" if abs(err) <= tol else "fail"]


def cmd_verify(cfg: RunConfig, threads: Optional[int] = None, seed: Optional[int] = None):
    """Predicted time scales against the propagation oracle."""
    grid, basis, state, drive, ctx = _simulation(cfg)
    ts = time_scales(ctx)
    t_end = _default_t_end(cfg, ts, grid.dt)
    frame_cl = cfg["verify.frame_cl"]
    if frame_cl == "auto":
        frame_cl = "rotating" if drive.lam else "lab"
    r = int(round(cfg.n0))
    live = drive if drive.lam else None

    lab = evolve(state, live, t_end, cfg["simulate.sample_every"])
    lab_est = detect_times(lab, revival_threshold=cfg["verify.threshold"])
    if frame_cl == "rotating":
        rot = evolve(state, live, t_end, cfg["simulate.sample_every"], frame=RotatingFrame(basis, r, drive.N))
        cl_est = detect_times(rot, revival_threshold=cfg["verify.threshold"])
        T_cl_pred = ts.Tl_cl
    else:
        # the delta factor is the rotating-frame stretch; lab-frame peaks keep (1 - M_cl) T0_cl
        cl_est = lab_est
        T_cl_pred = ts.Tl_cl / ts.delta

    rows = [
        _check(f"T_cl ({frame_cl} frame)", T_cl_pred, cl_est.T_cl_est, cfg["verify.tol_cl"]),
        _check("T_Q", ts.Tl_Q, lab_est.T_Q_est, cfg["verify.tol_Q"]),
    ]
    draws = cfg["verify.identity_draws"]
    notes = [f"q: {fmt(ts.q)}", f"mu: {fmt(ts.mu)}", f"delta: {fmt(ts.delta)}", f"V: {fmt(ctx.V)}",
             f"dt: {fmt(grid.dt)}", f"revival confidence: {fmt(lab_est.confidence)}"]
    if draws:
        rng = np.random.default_rng(seed)
        weak, strong = identity_residuals(rng, draws)
        for name, res in (("weak_identity", weak), ("strong_identity", strong)):
            worst = float(np.max(np.abs(res)))
            rows.append([name, 0.0, worst, None, 1e-12, "pass" if worst < 1e-12 else "fail"])
        notes.append(f"seed: {seed}")
    failed = any(row[-1] != "pass" for row in rows)
    return (["quantity", "predicted", "measured", "rel_error", "tolerance", "status"], rows, notes,
            EXIT_VERIFY if failed else EXIT_OK)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "mathieu": cmd_mathieu,
    "times": cmd_times,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrevival", description="Recurrence times of driven quantum systems.")
    parser.add_argument("--version", action="version", version=f"qrevival {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.strip().splitlines()[0])
        p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--out", default=None, help="output CSV (default: stdout)")
        p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps and grids")
        p.add_argument("--seed", type=int, default=None, help="seed for the randomized identity harness")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command]
    kwargs = {"threads": args.threads}
    if args.command == "verify":
        kwargs["seed"] = args.seed
    try:
        columns, rows, notes, code = fn(cfg, **kwargs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (*NUMERIC_ERRORS, ValueError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = args.out if args.out is not None else cfg["output.path"]
    emit(render_csv(args.command, cfg, columns, rows, notes), out)
    return code


if __name__ == "__main__":
    sys.exit(main())
