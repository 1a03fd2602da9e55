"""
Fichier: engine/app/cli/schemas.py
Objectif: Schéma des fichiers de run (YAML) et erreurs de la couche CLI.
Responsabilités:
- RunConfig : champ, options du solveur, un seul bloc de tâche, sorties.
- Les clés portent leurs unités (e0_over_ecr, omega_over_m, tau_times_m, ...).
"""

from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.cqrs.schemas import FrequencyScanSpec, GridSpec, RingScanSpec
from app.physics.field import FieldConfig, Momentum3
from app.semianalytic.predictor import SemianalyticConfig
from app.solvers.base_solver import SolverOptions

TASK_BLOCKS = ("point", "grid", "frequency_scan", "ring_scan", "predict")


# ============================================================================
# Exceptions Personnalisées
# ============================================================================

class ConfigError(Exception):
    """Erreur de fichier de run ; line désigne la ligne YAML fautive si connue"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"ligne {line} : {message}" if line else message)


class InputError(Exception):
    """Fichier de données illisible, tronqué ou sans métadonnées"""
    pass


# ============================================================================
# Blocs de configuration
# ============================================================================

class PredictSpec(BaseModel):
    """Plage de nombres de photons du rapport de prédiction."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_min: Optional[int] = Field(default=None, ge=1, description="Défaut : seuil min_photon_number")
    n_max: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_range(self) -> "PredictSpec":
        if self.n_min is not None and self.n_min > self.n_max:
            raise ValueError("n_min doit être ≤ n_max")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: str = "."
    stem: str = Field(default="run", min_length=1)
    raw: bool = Field(default=False, description="Écrire aussi <stem>.f64 (float64 little-endian)")
    checkpoint: Optional[str] = Field(default=None, description="Fichier SQLite des checkpoints")
    run_id: Optional[str] = Field(default=None, max_length=64)
    strict: bool = Field(default=False, description="Code 2 si un point porte un drapeau")
    checkpoint_every: int = Field(default=256, ge=1)

    def path(self, suffix: str) -> Path:
        return Path(self.directory) / f"{self.stem}{suffix}"


class RunConfig(BaseModel):
    """
    Fichier de run complet.

    Exactement un bloc de tâche parmi point, grid, frequency_scan, ring_scan, predict.
    """
    model_config = ConfigDict(extra="forbid")

    field: FieldConfig
    solver: SolverOptions = Field(default_factory=SolverOptions)
    semianalytic: SemianalyticConfig = Field(default_factory=SemianalyticConfig)

    point: Optional[Momentum3] = None
    grid: Optional[GridSpec] = None
    frequency_scan: Optional[FrequencyScanSpec] = None
    ring_scan: Optional[RingScanSpec] = None
    predict: Optional[PredictSpec] = None

    output: OutputConfig = Field(default_factory=OutputConfig)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_single_task(self) -> "RunConfig":
        present = [name for name in TASK_BLOCKS if getattr(self, name) is not None]
        if len(present) != 1:
            raise ValueError(
                f"Exactement un bloc de tâche requis parmi {', '.join(TASK_BLOCKS)} (trouvé : {present or 'aucun'})"
            )
        return self

    @property
    def task(self) -> str:
        return next(name for name in TASK_BLOCKS if getattr(self, name) is not None)
