"""
Fichier: engine/app/cli/commands.py
Objectif: Commandes de la ligne de commande (solve, sweep, scan-freq, scan-ring,
predict, analyze, compare-oracle, overlay).
Responsabilités:
- Charger le fichier de run, déléguer au moteur, écrire les sorties.
- Traduire les erreurs en codes de sortie stables :
  0 succès, 1 entrée/configuration, 2 solveur, 3 échec de vérification.
"""

import asyncio
import functools
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from app.analysis import (
    AnalysisError,
    NoPeaks,
    NoRingsFound,
    detect_nodes,
    extract_rings,
    profile_overlay,
    radial_profile,
    recover_frequency,
    resonance_peaks,
    threshold_trend,
)
from app.analysis.nodes import InsufficientNodes
from app.analysis.rings import grid_spacing
from app.cli.io import build_sidecar, grid_axes, read_grid, to_json, write_csv, write_grid_csv, write_json, write_raw
from app.cli.loader import load_run_config
from app.cli.schemas import ConfigError, InputError, RunConfig
from app.cqrs import SweepCommands, SweepError
from app.cqrs.schemas import FAILED_STATUSES, PointStatus
from app.db.config import get_database_url
from app.db.event_store import get_event_store
from app.physics import derived_params
from app.physics.units import field_to_si, photon_energy_ev, time_to_seconds
from app.semianalytic import PredictionError, min_photon_number, node_positions, node_qx_values, ring_radius
from app.solvers import NotLinearlyPolarized, SolverError, qve_solve_point, solve_point

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SOLVER_ERROR = 2
EXIT_VERIFICATION_FAILED = 3

# Critères de l'oracle QVE
ORACLE_REL_TOL = 1e-2
ORACLE_ABS_TOL = 1e-9
ORACLE_SMALL = 1e-7
ORACLE_REL_FLOOR = 1e-10

# Critère de superposition semi-analytique
OVERLAY_MAX_DEVIATION = 0.3


# ============================================================================
# Utilitaires
# ============================================================================

def handle_errors(func: Callable[..., int]) -> Callable[..., int]:
    """Convertit les exceptions du domaine en message et code de sortie."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except (ConfigError, InputError, ValidationError, NotLinearlyPolarized,
                PredictionError, SweepError, AnalysisError, FileNotFoundError, ValueError) as e:
            click.echo(f"Erreur : {e}", err=True)
            return EXIT_INPUT_ERROR
        except SolverError as e:
            click.echo(f"Erreur du solveur : {e}", err=True)
            return EXIT_SOLVER_ERROR
        except SQLAlchemyError as e:
            logger.error(f"Checkpoint inaccessible : {e}")
            click.echo(f"Erreur : checkpoint inaccessible ({e.__class__.__name__})", err=True)
            return EXIT_INPUT_ERROR

    return wrapper


def config_options(func: Callable) -> Callable:
    """Options communes : fichier de run, surcharges et verbosité."""
    func = click.option("--set", "overrides", multiple=True, metavar="SECTION.CLÉ=VALEUR",
                        help="Surcharge une valeur du fichier de run")(func)
    func = click.argument("config_path", type=click.Path(path_type=Path))(func)
    return func


def workers_option(func: Callable) -> Callable:
    return click.option("--workers", type=int, default=None, help="Nombre de processus (plafonné par l'environnement)")(func)


def load_for(task: Tuple[str, ...], config_path: Path, overrides, workers: Optional[int] = None) -> RunConfig:
    config = load_run_config(config_path, overrides)
    if config.task not in task:
        raise ConfigError(f"Cette commande requiert un bloc {' ou '.join(task)} (trouvé : {config.task})")
    if workers is not None:
        config = config.model_copy(update={"workers": max(1, workers)})
    return config


def sweep_engine(config: RunConfig, persist: bool = True) -> SweepCommands:
    store = None
    if persist and config.output.checkpoint:
        store = get_event_store(get_database_url(config.output.checkpoint))
    return SweepCommands(
        event_store=store,
        workers=config.workers,
        progress=sys.stderr.isatty(),
        checkpoint_every=config.output.checkpoint_every,
    )


def emit_report(path: Path, report: Dict[str, Any]) -> None:
    write_json(path, report)
    click.echo(to_json(report))


def flagged(status: np.ndarray) -> bool:
    return bool(np.any(np.isin(status, [*FAILED_STATUSES, PointStatus.CLIPPED])))


def strict_exit(config: RunConfig, status: np.ndarray) -> int:
    if config.output.strict and flagged(status):
        click.echo("Points signalés présents (--strict)", err=True)
        return EXIT_SOLVER_ERROR
    return EXIT_OK


# ============================================================================
# Commandes
# ============================================================================

@click.command("solve")
@config_options
@click.option("--solver", "solver_kind", type=click.Choice(["dhw", "qve"]), default="dhw")
@handle_errors
def solve_cmd(config_path: Path, overrides, solver_kind: str) -> int:
    """Résout un point d'impulsion (bloc point)."""
    config = load_for(("point",), config_path, overrides)
    solve = solve_point if solver_kind == "dhw" else qve_solve_point
    result = solve(config.point, config.field, config.solver)
    report = {
        "solver": solver_kind,
        "q": config.point.model_dump(),
        "h9_variant": config.solver.h9_variant,
        **result.model_dump(),
    }
    emit_report(config.output.path(".point.json"), report)
    return EXIT_OK


@click.command("sweep")
@config_options
@workers_option
@click.option("--strict", is_flag=True, default=False, help="Code 2 si un point porte un drapeau")
@handle_errors
def sweep_cmd(config_path: Path, overrides, workers: Optional[int], strict: bool) -> int:
    """Balaye une grille d'impulsions (bloc grid) et écrit CSV, brut et sidecar."""
    config = load_for(("grid",), config_path, overrides, workers)
    if strict:
        config = config.model_copy(update={"output": config.output.model_copy(update={"strict": True})})
    grid = asyncio.run(sweep_engine(config).sweep_grid(
        config.field, config.grid, config.solver, run_id=config.output.run_id,
    ))

    out = config.output
    files = {"csv": out.path(".csv").name}
    write_grid_csv(out.path(".csv"), grid)
    if out.raw:
        write_raw(out.path(".f64"), grid.values)
        files["raw"] = out.path(".f64").name
    write_json(out.path(".meta.json"), build_sidecar(
        config, "grid", grid_axes(grid), files, grid.spec_hash, grid.status, grid.solver,
    ))
    counts = grid.status_counts()
    click.echo(f"Grille {grid.spec.n1}×{grid.spec.n2} écrite dans {out.path('.csv')} ; statuts {counts}")
    return strict_exit(config, grid.status)


@click.command("scan-freq")
@config_options
@workers_option
@click.option("--scale", type=click.Choice(["linear", "log"]), default="linear", help="Échelle de détection des pics")
@handle_errors
def scan_freq_cmd(config_path: Path, overrides, workers: Optional[int], scale: str) -> int:
    """Balaye f(+∞) en ω (bloc frequency_scan) et rapporte les résonances."""
    config = load_for(("frequency_scan",), config_path, overrides, workers)
    curve = asyncio.run(sweep_engine(config).sweep_frequency(
        config.field, config.frequency_scan, config.solver, run_id=config.output.run_id,
    ))
    out = config.output
    write_csv(out.path(".csv"), ("omega", "f"), (curve.omegas, curve.values))
    axes = {"omega": {"min": curve.spec.omega_min, "max": curve.spec.omega_max, "n": curve.spec.n_omega},
            "q": curve.spec.q.model_dump()}
    write_json(out.path(".meta.json"), build_sidecar(
        config, "frequency", axes, {"csv": out.path(".csv").name}, curve.spec_hash, curve.status, curve.solver,
    ))

    try:
        peaks = [p.model_dump() for p in resonance_peaks(curve, scale=scale)]
        message = None
    except NoPeaks as e:
        peaks, message = [], str(e)
    report = {"scale": scale, "q": curve.spec.q.model_dump(), "peaks": peaks}
    if message:
        report["message"] = message
    emit_report(out.path(".peaks.json"), report)
    return strict_exit(config, curve.status)


@click.command("scan-ring")
@config_options
@workers_option
@handle_errors
def scan_ring_cmd(config_path: Path, overrides, workers: Optional[int]) -> int:
    """Profil f le long du demi-anneau n-photon (bloc ring_scan)."""
    config = load_for(("ring_scan",), config_path, overrides, workers)
    curve = asyncio.run(sweep_engine(config).sweep_ring(
        config.field, config.ring_scan, config.solver, run_id=config.output.run_id,
    ))
    out = config.output
    write_csv(out.path(".csv"), ("qx", "qy", "f"), (curve.qx, curve.qy, curve.values))
    axes = {"n": curve.n, "radius": curve.radius, "predicted_radius": curve.predicted_radius,
            "n_samples": len(curve.qx)}
    write_json(out.path(".meta.json"), build_sidecar(
        config, "ring", axes, {"csv": out.path(".csv").name}, curve.spec_hash, curve.status, curve.solver,
    ))
    click.echo(f"Anneau n={curve.n} (r={curve.radius:.5f}) écrit dans {out.path('.csv')}")
    return strict_exit(config, curve.status)


@click.command("predict")
@config_options
@handle_errors
def predict_cmd(config_path: Path, overrides) -> int:
    """Rayons et nœuds prédits des anneaux n-photon (bloc predict)."""
    config = load_for(("predict",), config_path, overrides)
    cfg = config.field
    spin = config.semianalytic.spin
    n_threshold = min_photon_number(cfg)
    n_min = config.predict.n_min or n_threshold
    rings = []
    for n in range(n_min, config.predict.n_max + 1):
        ring = ring_radius(n, cfg)
        entry: Dict[str, Any] = {"n": n, "present": ring.present, "radius": ring.radius}
        if ring.present:
            entry["node_qx"] = node_qx_values(n, cfg, spin)
            entry["node_count"] = len(node_positions(n, cfg, spin))
        rings.append(entry)

    derived = derived_params(cfg)
    report = {
        "field": cfg.model_dump(by_alias=True),
        "gamma": derived.gamma if math.isfinite(derived.gamma) else None,
        "mstar": derived.mstar,
        "period": derived.period,
        "si": {
            "field_v_per_m": field_to_si(cfg.e0),
            "photon_energy_ev": photon_energy_ev(cfg.omega),
            "tau_s": time_to_seconds(cfg.tau),
        },
        "spin": spin,
        "min_photon_number": n_threshold,
        "rings": rings,
    }
    emit_report(config.output.path(".predict.json"), report)
    return EXIT_OK


@click.command("analyze")
@click.argument("grid_paths", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option("--output", "output_path", type=click.Path(path_type=Path), default=None,
              help="Rapport JSON (défaut : <stem>.analysis.json à côté de la première grille)")
@handle_errors
def analyze_cmd(grid_paths: Tuple[Path, ...], output_path: Optional[Path]) -> int:
    """Anneaux, nœuds, ω retrouvé et tendance du seuil pour une ou plusieurs grilles."""
    grids = [read_grid(p) for p in grid_paths]

    analyses = []
    for path, grid in zip(grid_paths, grids):
        cfg = grid.field_config
        spacing = grid_spacing(grid)
        entry: Dict[str, Any] = {"grid": str(path), "delta": cfg.delta, "omega": cfg.omega, "spacing": spacing}
        try:
            rings = extract_rings(radial_profile(grid), cfg)
        except NoRingsFound as e:
            entry.update({"rings": [], "message": str(e)})
            analyses.append(entry)
            continue
        ring_reports = []
        for ring in rings:
            ring_entry: Dict[str, Any] = {**ring.model_dump()}
            try:
                nodes = detect_nodes(grid, ring)
            except AnalysisError as e:
                ring_entry["message"] = str(e)
                ring_reports.append(ring_entry)
                continue
            ring_entry.update({"node_count": nodes.count, "node_points": nodes.node_points, "node_qx": nodes.node_qx})
            try:
                omega_hat = recover_frequency(nodes)
                ring_entry.update({"recovered_omega": omega_hat, "omega_deviation": omega_hat - cfg.omega})
            except InsufficientNodes:
                ring_entry["recovered_omega"] = None
            ring_reports.append(ring_entry)
        entry["rings"] = ring_reports
        entry["smallest_ring_radius"] = rings[0].radius
        analyses.append(entry)

    report: Dict[str, Any] = {"grids": analyses}
    if len(grids) > 1:
        try:
            trend = threshold_trend([(g.field_config.delta, g) for g in grids])
            report["threshold_trend"] = trend.model_dump()
        except NoRingsFound as e:
            report["threshold_trend"] = {"message": str(e)}

    first = Path(grid_paths[0])
    target = output_path or first.with_name(first.name.rsplit(".", 1)[0] + ".analysis.json")
    emit_report(target, report)
    return EXIT_OK


@click.command("compare-oracle")
@config_options
@workers_option
@handle_errors
def compare_oracle_cmd(config_path: Path, overrides, workers: Optional[int]) -> int:
    """Compare les solveurs DHW et QVE sur un point ou une grille (δ = 0)."""
    config = load_for(("grid", "point"), config_path, overrides, workers)
    if config.field.delta != 0:
        raise NotLinearlyPolarized(f"compare-oracle exige δ = 0 (reçu δ = {config.field.delta})")

    if config.point is not None:
        dhw = np.array([solve_point(config.point, config.field, config.solver).f_final])
        qve = np.array([qve_solve_point(config.point, config.field, config.solver).f_final])
        failed = False
    else:
        engine = sweep_engine(config, persist=False)
        dhw_grid = asyncio.run(engine.sweep_grid(config.field, config.grid, config.solver, solver="dhw"))
        qve_grid = asyncio.run(engine.sweep_grid(config.field, config.grid, config.solver, solver="qve"))
        dhw, qve = dhw_grid.values.ravel(), qve_grid.values.ravel()
        failed = flagged(np.concatenate((dhw_grid.status.ravel(), qve_grid.status.ravel())))

    report = oracle_deviation(dhw, qve)
    report["n_points"] = int(dhw.size)
    report["solver_flags"] = failed
    emit_report(config.output.path(".oracle.json"), report)
    if failed and config.output.strict:
        return EXIT_SOLVER_ERROR
    return EXIT_OK if report["pass"] else EXIT_VERIFICATION_FAILED


def oracle_deviation(dhw: np.ndarray, qve: np.ndarray) -> Dict[str, Any]:
    """
    Écart relatif |Δ|/max(f_QVE, 1e−10) hors des points où les deux valeurs sont
    < 1e−7 ; sur ces derniers, seul l'écart absolu est contrôlé.
    """
    diff = np.abs(dhw - qve)
    small = (dhw < ORACLE_SMALL) & (qve < ORACLE_SMALL)
    rel = diff / np.maximum(qve, ORACLE_REL_FLOOR)
    max_rel = float(rel[~small].max()) if np.any(~small) else 0.0
    max_abs_small = float(diff[small].max()) if np.any(small) else 0.0
    return {
        "max_relative_deviation": max_rel,
        "max_absolute_deviation_small": max_abs_small,
        "max_absolute_deviation": float(diff.max()) if diff.size else 0.0,
        "relative_tolerance": ORACLE_REL_TOL,
        "absolute_tolerance": ORACLE_ABS_TOL,
        "pass": max_rel <= ORACLE_REL_TOL and max_abs_small <= ORACLE_ABS_TOL,
    }


@click.command("overlay")
@config_options
@workers_option
@handle_errors
def overlay_cmd(config_path: Path, overrides, workers: Optional[int]) -> int:
    """Profil DHW d'un anneau superposé au poids semi-analytique (bloc ring_scan)."""
    config = load_for(("ring_scan",), config_path, overrides, workers)
    curve = asyncio.run(sweep_engine(config).sweep_ring(
        config.field, config.ring_scan, config.solver, run_id=config.output.run_id,
    ))
    out = config.output
    write_csv(out.path(".csv"), ("qx", "qy", "f"), (curve.qx, curve.qy, curve.values))

    overlay = profile_overlay(curve, config.ring_scan.n, config.field, config.semianalytic)
    best = overlay.deviations[overlay.best_variant]
    report = {
        **overlay.model_dump(),
        "q_factor": config.semianalytic.q_factor,
        "max_deviation": OVERLAY_MAX_DEVIATION,
        "pass": overlay.nodes_match and best <= OVERLAY_MAX_DEVIATION,
    }
    emit_report(out.path(".overlay.json"), report)
    return EXIT_OK if report["pass"] else EXIT_VERIFICATION_FAILED


COMMANDS: List[click.Command] = [
    solve_cmd,
    sweep_cmd,
    scan_freq_cmd,
    scan_ring_cmd,
    predict_cmd,
    analyze_cmd,
    compare_oracle_cmd,
    overlay_cmd,
]
