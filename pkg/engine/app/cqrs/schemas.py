"""
Fichier: engine/app/cqrs/schemas.py
Objectif: Types du moteur de balayage (spécifications d'entrée, résultats).
Responsabilités:
- Spécifications de grille, de balayage en fréquence et de balayage d'anneau.
- Résultats (SpectrumGrid, FrequencyCurve, RingCurve) avec statuts par point.
- Exceptions du moteur et empreinte canonique (spec hash).
"""

import hashlib
import json
from datetime import datetime
from enum import IntEnum
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.physics.field import FieldConfig, Momentum3
from app.solvers.base_solver import SolverOptions


# ============================================================================
# Exceptions Personnalisées
# ============================================================================

class SweepError(Exception):
    """Exception de base pour le moteur de balayage"""
    pass


class ChecksumMismatch(SweepError):
    """Levée lorsque la spécification a changé entre deux exécutions d'un même run"""
    pass


class CheckpointNotFound(SweepError):
    """Levée lorsqu'aucun événement n'existe pour le run demandé"""
    pass


# ============================================================================
# Statuts et Empreinte
# ============================================================================

SolverKind = Literal["dhw", "qve"]
SweepKind = Literal["grid", "frequency", "ring", "radial"]


class PointStatus(IntEnum):
    """Statut d'un point ; les échecs stockent la valeur 0.0."""
    OK = 0
    STEP_LIMIT = 1
    NON_FINITE = 2
    UNDERFLOW = 3
    SOLVER_ERROR = 4
    CLIPPED = 5
    PENDING = 9


FAILED_STATUSES = (
    PointStatus.STEP_LIMIT,
    PointStatus.NON_FINITE,
    PointStatus.UNDERFLOW,
    PointStatus.SOLVER_ERROR,
)


def status_counts(status: np.ndarray) -> Dict[str, int]:
    """Nombre de points par statut (clés en minuscules)."""
    counts = {s.name.lower(): 0 for s in PointStatus}
    values, occurrences = np.unique(np.asarray(status), return_counts=True)
    for value, count in zip(values, occurrences):
        counts[PointStatus(int(value)).name.lower()] = int(count)
    return counts


def spec_hash(payload: Dict[str, Any]) -> str:
    """SHA-256 du JSON canonique (clés triées, séparateurs compacts)."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ============================================================================
# Spécifications d'entrée
# ============================================================================

class GridSpec(BaseModel):
    """
    Grille 2D de quantités de mouvement canoniques.

    values[i][j] correspond à (axis1[i], axis2[j]) ; la composante hors plan
    vaut fixed_value.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    plane: Literal["xy", "xz", "yz"] = "xy"
    fixed_value: float = 0.0
    min1: float
    max1: float
    n1: int = Field(..., ge=2)
    min2: float
    max2: float
    n2: int = Field(..., ge=2)

    @model_validator(mode="after")
    def validate_ranges(self) -> "GridSpec":
        if self.max1 <= self.min1 or self.max2 <= self.min2:
            raise ValueError("Chaque axe doit vérifier max > min")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n1, self.n2

    def axis1(self) -> np.ndarray:
        return np.linspace(self.min1, self.max1, self.n1)

    def axis2(self) -> np.ndarray:
        return np.linspace(self.min2, self.max2, self.n2)

    def axis_names(self) -> Tuple[str, str]:
        return "q" + self.plane[0], "q" + self.plane[1]

    def _to_momentum(self, a: float, b: float) -> Momentum3:
        comps = {"x": self.fixed_value, "y": self.fixed_value, "z": self.fixed_value}
        comps[self.plane[0]] = float(a)
        comps[self.plane[1]] = float(b)
        return Momentum3(qx=comps["x"], qy=comps["y"], qz=comps["z"])

    def momentum(self, i: int, j: int) -> Momentum3:
        return self._to_momentum(self.axis1()[i], self.axis2()[j])

    def momenta(self) -> List[Momentum3]:
        """Impulsions de la grille aplaties en ordre ligne (axe 1 lent)."""
        axis2 = self.axis2()
        return [self._to_momentum(a, b) for a in self.axis1() for b in axis2]


class FrequencyScanSpec(BaseModel):
    """Balayage de f(+∞) en ω à impulsion fixe ; les autres paramètres du champ sont fixes."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    q: Momentum3 = Field(default_factory=Momentum3)
    omega_min: float = Field(..., gt=0)
    omega_max: float = Field(..., gt=0)
    n_omega: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_range(self) -> "FrequencyScanSpec":
        if self.omega_max < self.omega_min:
            raise ValueError("omega_max doit être ≥ omega_min")
        if self.n_omega > 1 and self.omega_max == self.omega_min:
            raise ValueError("Plage de fréquences vide pour n_omega > 1")
        return self

    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_omega)


class RingScanSpec(BaseModel):
    """
    Profil f_n le long du demi-anneau supérieur (qy ≥ 0, qz = 0).

    Sans rayon explicite, le rayon prédit par la masse effective est affiné par
    un court balayage radial à travers le premier maximum d'interférence.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=1, description="Nombre de photons de l'anneau")
    n_samples: int = Field(default=181, ge=3)
    radius: Optional[float] = Field(default=None, gt=0)
    refine_radius: bool = True
    refine_half_width: float = Field(default=0.08, gt=0)
    refine_samples: int = Field(default=17, ge=5)


# ============================================================================
# Résultats
# ============================================================================

class _ArrayResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: np.ndarray
    field_config: FieldConfig
    solver_options: SolverOptions
    solver: SolverKind = "dhw"
    run_id: Optional[str] = None
    spec_hash: str = ""
    engine_version: str = ""
    created_at: datetime = Field(default_factory=datetime.now)

    @property
    def complete(self) -> bool:
        return not bool(np.any(self.status == PointStatus.PENDING))

    def status_counts(self) -> Dict[str, int]:
        return status_counts(self.status)


class SpectrumGrid(_ArrayResult):
    """Spectre f_final(q) sur une grille ; values ≥ 0, forme (n1, n2)."""
    values: np.ndarray
    spec: GridSpec

    @property
    def axis1(self) -> np.ndarray:
        return self.spec.axis1()

    @property
    def axis2(self) -> np.ndarray:
        return self.spec.axis2()


class FrequencyCurve(_ArrayResult):
    """Courbe (ω, f_final) à impulsion fixe."""
    omegas: np.ndarray
    values: np.ndarray
    spec: FrequencyScanSpec


class RingCurve(_ArrayResult):
    """Profil (qx, qy, f) le long du demi-anneau n-photon."""
    qx: np.ndarray
    qy: np.ndarray
    values: np.ndarray
    n: int
    radius: float
    predicted_radius: Optional[float] = None
