"""
Fichier: engine/app/cli/io.py
Objectif: Formats de fichiers des résultats.
Responsabilités:
- CSV UTF-8 (np.savetxt), fins de ligne LF, en-tête, 17 chiffres significatifs.
- Grille brute <stem>.f64 (float64 little-endian, ordre ligne).
- Sidecar JSON <stem>.meta.json versionné (schema_version 1).
- Relecture d'une grille pour l'analyse (sidecar obligatoire, statuts des points
  en échec restitués depuis flagged_points).
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app import ENGINE_NAME, __version__
from app.cli.schemas import InputError, RunConfig
from app.cqrs.schemas import PointStatus, SpectrumGrid, status_counts

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SIDECAR_SUFFIX = ".meta.json"
# représentation sans perte d'un float64
CSV_FORMAT = "%.17g"


# ============================================================================
# Écriture
# ============================================================================

def write_csv(path: Path, header: Sequence[str], columns: Sequence[Iterable[float]]) -> None:
    table = np.column_stack([np.asarray(c, dtype=np.float64).ravel() for c in columns])
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, table, fmt=CSV_FORMAT, delimiter=",", newline="\n", header=",".join(header), comments="")


def write_grid_csv(path: Path, grid: SpectrumGrid) -> None:
    """Colonnes q1,q2,f ; axe 1 lent (ordre ligne)."""
    q1, q2 = np.meshgrid(grid.axis1, grid.axis2, indexing="ij")
    write_csv(path, ("q1", "q2", "f"), (q1, q2, grid.values))


def write_raw(path: Path, values: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(values, dtype="<f8").tobytes(order="C"))


def write_json(path: Path, payload: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(payload) + "\n")


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, datetime):
        return obj.isoformat()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Type non sérialisable : {type(obj).__name__}")


def build_sidecar(
    config: RunConfig,
    kind: str,
    axes: Dict[str, Any],
    files: Dict[str, str],
    spec_hash: str = "",
    status: Optional[np.ndarray] = None,
    solver: str = "dhw",
) -> Dict[str, Any]:
    counts: Dict[str, int] = {}
    flagged: List[List[int]] = []
    if status is not None:
        counts = status_counts(status)
        flat = np.asarray(status).ravel()
        flagged = [[int(i), int(flat[i])] for i in np.flatnonzero(flat != PointStatus.OK)]
    return {
        "schema_version": SCHEMA_VERSION,
        "engine": {"name": ENGINE_NAME, "version": __version__},
        "created_at": datetime.now(timezone.utc).isoformat(),
        "kind": kind,
        "solver": solver,
        "run_config": config.model_dump(mode="json", by_alias=True),
        "axes": axes,
        "spec_hash": spec_hash,
        "h9_variant": config.solver.h9_variant,
        "status_counts": counts,
        "flagged_points": flagged,
        "files": files,
    }


def grid_axes(grid: SpectrumGrid) -> Dict[str, Any]:
    spec = grid.spec
    name1, name2 = spec.axis_names()
    return {
        "plane": spec.plane,
        "fixed_value": spec.fixed_value,
        "q1": {"name": name1, "min": spec.min1, "max": spec.max1, "n": spec.n1},
        "q2": {"name": name2, "min": spec.min2, "max": spec.max2, "n": spec.n2},
    }


# ============================================================================
# Lecture
# ============================================================================

def sidecar_path(data_path: Path) -> Path:
    data_path = Path(data_path)
    return data_path.with_name(data_path.name.rsplit(".", 1)[0] + SIDECAR_SUFFIX)


def read_sidecar(path: Path) -> Dict[str, Any]:
    """
    Raises:
        InputError: fichier absent, JSON invalide ou version de schéma inconnue
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"Sidecar manquant : {path} (unités inconnues sans métadonnées)")
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Sidecar illisible : {path} ({e})")
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"Version de schéma inconnue : {version!r} (attendue {SCHEMA_VERSION})")
    return meta


def point_status(meta: Dict[str, Any], size: int) -> np.ndarray:
    """
    Statuts par point (ordre ligne) reconstruits depuis flagged_points.

    Raises:
        InputError: indice ou code de statut invalide
    """
    status = np.full(size, PointStatus.OK, dtype=np.uint8)
    for entry in meta.get("flagged_points", []):
        try:
            index, code = int(entry[0]), PointStatus(int(entry[1]))
        except (TypeError, ValueError, IndexError) as e:
            raise InputError(f"flagged_points invalide : {entry!r} ({e})")
        if not 0 <= index < size:
            raise InputError(f"flagged_points : indice {index} hors de la grille ({size} points)")
        status[index] = code
    return status


def read_grid(csv_path: Path) -> SpectrumGrid:
    """
    Relit une grille écrite par la commande sweep.

    Raises:
        InputError: sidecar absent/invalide, CSV tronqué ou incohérent avec les axes
    """
    csv_path = Path(csv_path)
    meta = read_sidecar(sidecar_path(csv_path))
    if meta.get("kind") != "grid":
        raise InputError(f"{csv_path} n'est pas une grille (kind={meta.get('kind')!r})")
    try:
        config = RunConfig.model_validate(meta["run_config"])
    except (KeyError, ValidationError) as e:
        raise InputError(f"run_config invalide dans le sidecar : {e}")
    spec = config.grid
    if spec is None:
        raise InputError("Le sidecar ne décrit pas de grille")

    try:
        with open(csv_path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as e:
        raise InputError(f"CSV illisible : {csv_path} ({e})")
    if header != "q1,q2,f":
        raise InputError(f"En-tête inattendu : {header!r}")
    if data.shape != (spec.n1 * spec.n2, 3):
        raise InputError(f"CSV tronqué : {data.shape[0]} lignes pour {spec.n1 * spec.n2} attendues")

    q1, q2 = np.meshgrid(spec.axis1(), spec.axis2(), indexing="ij")
    if not (np.allclose(data[:, 0], q1.ravel()) and np.allclose(data[:, 1], q2.ravel())):
        raise InputError("Les coordonnées du CSV ne correspondent pas aux axes du sidecar")

    values = data[:, 2].reshape(spec.shape)
    status = point_status(meta, spec.n1 * spec.n2).reshape(spec.shape)
    logger.info(f"Grille relue : {csv_path} ({spec.n1}×{spec.n2}, {int(np.count_nonzero(status))} point(s) signalé(s))")
    return SpectrumGrid(
        values=values,
        status=status,
        spec=spec,
        field_config=config.field,
        solver_options=config.solver,
        solver=meta.get("solver", "dhw"),
        run_id=config.output.run_id,
        spec_hash=meta.get("spec_hash", ""),
        engine_version=meta.get("engine", {}).get("version", ""),
    )
