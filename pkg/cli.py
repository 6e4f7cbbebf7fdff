"""
Command-line front end: nanolaser <command> [options]

Tables go to stdout or --out; log lines go to stderr.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from data_exporter import FORMATS, write_table
from errors import ConfigError, NanolaserError
from fluct_solver import FluctSolver, SteadyState
from laser_params import LaserParams, derive
from mc_simulator import SCHEME_NAMES, WINDOWS, MonteCarloSimulator, compare_psd
from nofluct_solver import NoFluctSolver
from presets import get_preset, list_presets
from run_config import RunConfig, build_run_config, load_run_config
from semiclassical import semiclassical_photon_number
from spectrum import SPECTRUM_KINDS, GridSpec, composite_grid
from sweep import steady_sweep
from visualizer import chart_for_table, save_html

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
MC_RMS_LIMIT = 0.10
MC_Z_SHARE = 0.95

Table = Tuple[pd.DataFrame, Dict]


def configure_logging(level: Optional[str] = None) -> None:
    """Send log lines to stderr; level from the flag, else NANOLASER_LOG_LEVEL, else WARNING"""
    level = (level or os.environ.get("NANOLASER_LOG_LEVEL") or "WARNING").upper()
    if level not in LOG_LEVELS:
        level = "WARNING"
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(getattr(logging, level))


# --- table builders ---

def derive_table(cfg: RunConfig) -> Table:
    """Derived parameters per laser, with the splitting boundary and the commutator diagnostic"""
    rows = []
    for params in cfg.lasers:
        params = params.with_pump(cfg.pumps[0])
        d = derive(params)
        nofluct = NoFluctSolver(params)
        Pc = nofluct.solve_Pc()
        n_sc = semiclassical_photon_number(params, d)
        rows.append({
            **params.to_dict(),
            **d.to_dict(),
            "Pc": math.nan if Pc is None else Pc,
            "coupling_ratio": params.coupling_ratio,
            "n_semiclassical": n_sc,
            "commutator_defect": nofluct.commutator_defect(n_sc),
        })
    return pd.DataFrame(rows), {"command": "derive", **cfg.metadata()}


def steady_row(params: LaserParams, state: SteadyState) -> Dict:
    at_pump = params.with_pump(state.P)
    d = derive(at_pump)
    return {
        "gamma_perp": params.gamma_perp,
        "P": state.P, "N": state.N, "Ne": state.Ne, "Ng": state.Ng, "n": state.n,
        "nS": state.nS, "nA": state.nA,
        "nS_minus_quarter": state.nS - 0.25, "nA_minus_quarter": state.nA - 0.25,
        "omega_ro": state.omega_ro, "region": state.region,
        "N_nofluct": state.N_nofluct, "n_nofluct": state.n_nofluct,
        "N_highpump": math.nan if state.N_highpump is None else state.N_highpump,
        "n_semiclassical": semiclassical_photon_number(at_pump, d),
        "commutator_defect": NoFluctSolver(at_pump).commutator_defect(state.n),
        "residual": state.residual,
    }


def steady_table(cfg: RunConfig) -> Table:
    """Stationary state over the pump list, one block of rows per laser"""
    rows = []
    for params in cfg.lasers:
        states = steady_sweep(params, cfg.pumps)
        rows.extend(steady_row(params, state) for state in states)
    return pd.DataFrame(rows), {"command": "steady", **cfg.metadata()}


def linewidth_table(cfg: RunConfig) -> Table:
    """Linewidth at the solved state and its asymptotes over the pump list"""
    rows = []
    for params in cfg.lasers:
        for state in steady_sweep(params, cfg.pumps):
            solver = FluctSolver(params.with_pump(state.P))
            row = {"gamma_perp": params.gamma_perp, **solver.linewidth_summary(state)}
            row.update({"nS": state.nS, "nA": state.nA, "region": state.region})
            rows.append(row)
    return pd.DataFrame(rows), {"command": "linewidth", **cfg.metadata()}


def spectrum_curve(params: LaserParams, kinds: Sequence[str], popfluct: bool = True,
                   grid_spec: Optional[GridSpec] = None, companion: bool = False,
                   state: Optional[SteadyState] = None) -> Table:
    """
    Spectra of the requested kinds at params.P on one shared grid.

    Without popfluct only the no-fluctuation spectrum is emitted. With companion
    the no-fluctuation spectrum is added next to the fluctuation spectra.
    """
    kinds = tuple(kinds) if popfluct else ("nofluct",)
    if companion and "nofluct" not in kinds:
        kinds = kinds + ("nofluct",)
    fluct = FluctSolver(params)
    needs_state = any(kind != "nofluct" for kind in kinds)
    if needs_state and state is None:
        state = fluct.solve_steady()
    omega = composite_grid(params.kappa, params.gamma_perp, state.omega_ro if state else 0.0, grid_spec)

    columns = {"P": np.full(omega.shape, params.P), "omega": omega}
    meta = {"P": params.P, "gamma_perp": params.gamma_perp, "spectra": {}}
    if state is not None:
        meta.update({"N": state.N, "n": state.n, "region": state.region, "omega_ro": state.omega_ro})
    for kind in kinds:
        if kind == "nofluct":
            nf = fluct.nofluct.solve_N()
            spectrum = fluct.nofluct.spectrum(nf.N, omega)
            spectrum.meta.update({"n": nf.n, "two_peak": nf.two_peak})
        elif kind == "A":
            spectrum = fluct.nA_spectrum(state.N, omega)
        elif kind == "S":
            spectrum = fluct.nS_spectrum(state.N, state.n, omega)
        elif kind == "AS":
            spectrum = fluct.nAS_spectrum(state.N, omega)
        elif kind == "full":
            spectrum = fluct.full_spectrum(state, omega)
        elif kind == "rf":
            spectrum = fluct.rf_spectrum(state, omega)
        elif kind == "population":
            spectrum = fluct.population_spectrum(state, omega)
        else:
            raise ConfigError(f"unknown spectrum kind {kind!r}; valid kinds: {', '.join(SPECTRUM_KINDS)}")
        columns[kind] = spectrum.values
        meta["spectra"][kind] = {k: v for k, v in spectrum.meta.items() if k != "params"}
    return pd.DataFrame(columns), meta


def spectrum_tables(cfg: RunConfig, kinds: Sequence[str], companion: bool = False) -> List[Table]:
    """One spectrum table per (laser, pump)"""
    tables = []
    needs_state = cfg.popfluct and any(kind != "nofluct" for kind in kinds)
    for params in cfg.lasers:
        states = steady_sweep(params, cfg.pumps) if needs_state else [None] * len(cfg.pumps)
        for P, state in zip(cfg.pumps, states):
            tables.append(spectrum_curve(params.with_pump(P), kinds, cfg.popfluct, cfg.grid, companion, state))
    return tables


def _concat(tables: List[Table], command: str, cfg: RunConfig) -> Table:
    df = pd.concat([table for table, _ in tables], ignore_index=True)
    return df, {"command": command, **cfg.metadata(), "curves": [meta for _, meta in tables]}


def _dump_path(path: Optional[str], component: str) -> Optional[str]:
    if not path:
        return None
    target = Path(path)
    return str(target.with_name(f"{target.stem}_{component}{target.suffix}"))


def mc_validate_table(cfg: RunConfig, dump_path: Optional[str] = None) -> Table:
    """Monte-Carlo PSDs of a_A and a_S against the analytic spectra, with per-bin z-scores"""
    if len(cfg.pumps) > 1:
        logger.warning("⚠️ mc-validate uses the first pump value only (P=%.4g)", cfg.pumps[0])
    params = cfg.laser.with_pump(cfg.pumps[0])
    solver = FluctSolver(params)
    state = solver.solve_steady()
    simulator = MonteCarloSimulator(solver)

    runs = [
        ("a_A", simulator.simulate_A(state, cfg.mc, dump_path=_dump_path(dump_path, "A")),
         lambda w: solver.nA_density(w, state.N), float(solver.nA_total(state.N))),
        ("a_S", simulator.simulate_S(state, cfg.mc, dump_path=_dump_path(dump_path, "S")),
         lambda w: solver.nS_density(w, state.N, state.n), state.nS),
    ]
    frames, summary = [], {}
    for component, estimate, density, variance in runs:
        analytic = density(estimate.grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(estimate.stderr > 0, (estimate.values - analytic) / estimate.stderr, np.nan)
        frames.append(pd.DataFrame({
            "component": component, "omega": estimate.grid, "mc": estimate.values,
            "stderr": estimate.stderr, "analytic": analytic, "z": z,
        }))
        metrics = compare_psd(estimate, analytic)
        metrics.update({
            "variance": estimate.variance, "variance_stderr": estimate.variance_stderr,
            "analytic_variance": variance,
            "passed": metrics["rms_rel_error"] <= MC_RMS_LIMIT and metrics["z_within_3"] >= MC_Z_SHARE,
            "run": {k: v for k, v in estimate.meta.items() if k != "component"},
        })
        if not metrics["passed"]:
            logger.warning("⚠️ %s: rms error %.3g, |z|<3 share %.3g", component,
                           metrics["rms_rel_error"], metrics["z_within_3"])
        else:
            logger.info("✅ %s matches the analytic spectrum (rms error %.3g)", component, metrics["rms_rel_error"])
        summary[component] = metrics
    meta = {"command": "mc-validate", **cfg.metadata(), "P": params.P, "N": state.N, "n": state.n,
            "comparison": summary}
    return pd.concat(frames, ignore_index=True), meta


def presets_table() -> Table:
    rows = [{
        "id": preset.id, "command": preset.command,
        "gamma_perp": ",".join(f"{p.gamma_perp:g}" for p in preset.lasers),
        "pumps": len(preset.pumps), "kinds": ",".join(preset.kinds),
        "description": preset.description,
    } for preset in list_presets()]
    return pd.DataFrame(rows), {"command": "presets"}


def figure_tables(cfg: RunConfig) -> List[Table]:
    """Curves of a figure preset: one per pump for spectra, one per laser for sweeps"""
    preset = get_preset(cfg.preset)
    if preset.command in ("steady", "linewidth"):
        builder = steady_table if preset.command == "steady" else linewidth_table
        return [builder(replace(cfg, lasers=(params,))) for params in cfg.lasers]
    kinds = ("rf",) if preset.command == "rf" else cfg.kinds
    companion = cfg.popfluct and "full" in kinds
    return [(df, {"command": preset.command, **cfg.metadata(), **meta})
            for df, meta in spectrum_tables(cfg, kinds, companion)]


# --- commands ---

def _resolve(args: argparse.Namespace, preset: Optional[str] = None) -> RunConfig:
    file_config = load_run_config(args.config) if args.config else None
    overrides = {"preset": preset or args.preset, "pumps": args.pump, "format": args.format, "out": args.out}
    if getattr(args, "kind", None):
        overrides["kinds"] = args.kind
    if getattr(args, "grid", None):
        overrides["grid"] = asdict(GridSpec.parse(args.grid))
    if getattr(args, "no_popfluct", False):
        overrides["popfluct"] = False
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    mc = {key: getattr(args, key, None) for key in ("dt", "duration", "segments", "window", "scheme", "seed")}
    mc = {key: value for key, value in mc.items() if value is not None}
    if mc:
        overrides["mc"] = mc
    return build_run_config(file_config, overrides, args.gamma_perp)


def _emit(df: pd.DataFrame, meta: Dict, cfg: RunConfig, command: str, html: Optional[str]) -> None:
    write_table(df, meta, cfg.out, cfg.format)
    if html:
        title = f"{command} ({cfg.preset})" if cfg.preset else command
        path = save_html(chart_for_table(df, command, title), html)
        logger.info("✅ Chart written to %s", path)


def cmd_derive(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    _emit(*derive_table(cfg), cfg, "derive", args.html)
    return 0


def cmd_steady(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    _emit(*steady_table(cfg), cfg, "steady", args.html)
    return 0


def cmd_linewidth(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    _emit(*linewidth_table(cfg), cfg, "linewidth", args.html)
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    df, meta = _concat(spectrum_tables(cfg, cfg.kinds), "spectrum", cfg)
    _emit(df, meta, cfg, "spectrum", args.html)
    return 0


def cmd_rf(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    df, meta = _concat(spectrum_tables(cfg, ("rf",)), "rf", cfg)
    _emit(df, meta, cfg, "rf", args.html)
    return 0


def cmd_mc_validate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    _emit(*mc_validate_table(cfg, args.dump_trajectory), cfg, "mc-validate", args.html)
    return 0


def cmd_figure(args: argparse.Namespace) -> int:
    preset = get_preset(args.id)
    cfg = _resolve(args, preset=preset.id)
    out_dir = Path(cfg.out or ".")
    for k, (df, meta) in enumerate(figure_tables(cfg), start=1):
        stem = f"{preset.id}_curve{k}"
        write_table(df, meta, str(out_dir / f"{stem}.{cfg.format}"), cfg.format)
        if args.html:
            save_html(chart_for_table(df, preset.command, f"{preset.id} curve {k}"), str(Path(args.html) / f"{stem}.html"))
    logger.info("✅ Figure %s written to %s", preset.id, out_dir)
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    df, meta = presets_table()
    write_table(df, meta, args.out, args.format or "csv")
    return 0


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--preset", help="figure preset id (see 'nanolaser presets')")
    common.add_argument("--pump", help="pump values: 2,4,8 or start:stop:num or log:start:stop:num")
    common.add_argument("--gamma-perp", type=float, help="select or override gamma_perp")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--out", help="output file (stdout when omitted); a directory for 'figure'")
    common.add_argument("--html", help="also render the table to an interactive HTML chart (a directory for 'figure')")
    return common


def _spectrum_options(parser: argparse.ArgumentParser, kinds: bool = True) -> None:
    if kinds:
        parser.add_argument("--kind", help=f"comma list of {','.join(SPECTRUM_KINDS)}")
    parser.add_argument("--grid", help="frequency grid WMIN:WMAX:NLOG:NLIN (blank fields keep defaults)")
    parser.add_argument("--no-popfluct", action="store_true",
                        help="emit the spectrum without population fluctuations at the same pump")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanolaser",
        description="Steady states, spectra, linewidths and noise of superradiant nanolasers",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, help="log level (env NANOLASER_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    sub.add_parser("derive", parents=[common], help="derived parameters").set_defaults(handler=cmd_derive)
    sub.add_parser("steady", parents=[common], help="stationary state over pumps").set_defaults(handler=cmd_steady)
    sub.add_parser("linewidth", parents=[common], help="linewidth and asymptotes").set_defaults(handler=cmd_linewidth)

    spectrum = sub.add_parser("spectrum", parents=[common], help="optical spectra")
    _spectrum_options(spectrum)
    spectrum.set_defaults(handler=cmd_spectrum)

    rf = sub.add_parser("rf", parents=[common], help="intensity-noise (RF) spectrum")
    _spectrum_options(rf, kinds=False)
    rf.set_defaults(handler=cmd_rf)

    mc = sub.add_parser("mc-validate", parents=[common], help="Monte-Carlo check of the analytic spectra")
    mc.add_argument("--seed", type=int, help="random seed")
    mc.add_argument("--dt", type=float, help="time step")
    mc.add_argument("--segments", type=int, help="number of Welch segments")
    mc.add_argument("--duration", type=float, help="simulated time including burn-in")
    mc.add_argument("--window", choices=tuple(WINDOWS), help="Welch window")
    mc.add_argument("--scheme", choices=SCHEME_NAMES, help="time step: exact (default) or euler")
    mc.add_argument("--dump-trajectory", help="write raw float64 trajectories next to this path")
    mc.set_defaults(handler=cmd_mc_validate)

    figure = sub.add_parser("figure", parents=[common], help="run a figure preset, one file per curve")
    figure.add_argument("id", help="preset id, e.g. fig2b")
    figure.set_defaults(handler=cmd_figure)

    presets = sub.add_parser("presets", help="list figure presets")
    presets.add_argument("--format", choices=FORMATS)
    presets.add_argument("--out")
    presets.set_defaults(handler=cmd_presets)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except NanolaserError as exc:
        logger.error("❌ %s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
