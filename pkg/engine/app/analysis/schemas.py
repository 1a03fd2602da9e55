"""
Fichier: engine/app/analysis/schemas.py
Objectif: Types et exceptions de l'analyse des spectres.
"""

from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# ============================================================================
# Exceptions Personnalisées
# ============================================================================

class AnalysisError(Exception):
    """Exception de base pour l'analyse des spectres"""
    pass


class GridTooSmall(AnalysisError):
    """Levée lorsque la grille ne couvre pas l'origine ou a trop peu de points"""
    pass


class NoRingsFound(AnalysisError):
    """Levée lorsqu'aucun pic radial n'est assignable à un nombre de photons"""
    pass


class RingOutsideGrid(AnalysisError):
    """Levée lorsque le cercle de l'anneau sort de la grille"""
    pass


class InsufficientNodes(AnalysisError):
    """Levée lorsque moins de deux valeurs distinctes de qx sont disponibles"""
    pass


class NoPeaks(AnalysisError):
    """Levée lorsqu'une courbe de fréquence ne présente aucun pic"""
    pass


# ============================================================================
# Résultats
# ============================================================================

class RadialProfile(BaseModel):
    """Moyenne et maximum angulaires de f sur des cercles concentriques."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    radii: np.ndarray
    mean_f: np.ndarray
    max_f: np.ndarray

    @property
    def step(self) -> float:
        return float(self.radii[1] - self.radii[0]) if len(self.radii) > 1 else 0.0


class RingFeature(BaseModel):
    model_config = ConfigDict(frozen=True)

    radius: float = Field(..., gt=0)
    n_assigned: int = Field(..., ge=1)
    peak_height: float
    mismatch: float = Field(default=0.0, description="|2√(r²+m*²)/ω − n|")


class NodeSet(BaseModel):
    """Nœuds détectés sur un anneau : points (q1, q2) et qx dédoublonnés."""
    model_config = ConfigDict(frozen=True)

    ring: RingFeature
    node_points: List[Tuple[float, float]] = Field(default_factory=list)
    node_qx: List[float] = Field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.node_points)


class ThresholdTrend(BaseModel):
    entries: List[Tuple[float, float]]
    non_increasing: bool


class ResonancePeak(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: float
    value: float
    n_assigned: int
    mismatch: float
    # facteur d'interférence 1 ± cos(...) à l'impulsion du balayage ; 0 = canal interdit
    interference: float = 2.0
    suppressed: bool = False


class OverlayReport(BaseModel):
    """Comparaison d'un profil d'anneau DHW avec le poids semi-analytique."""
    n: int
    radius: float
    dhw_node_qx: List[float]
    predicted_node_qx: List[float]
    max_node_deviation: Optional[float] = None
    nodes_match: bool
    deviations: Dict[str, float]
    best_variant: Literal["as-printed", "bracketed"]
