"""
Fichier: engine/app/semianalytic/predictor.py
Objectif: Prédicteur semi-analytique de type Popov pour les anneaux n-photon.
Responsabilités:
- Géométrie des anneaux avec la masse effective m* (rayon, seuil).
- Facteur d'interférence 1 + (−1)^(n+2s) cos(2π qx/ω) et positions des nœuds.
- Poids f_n(q) ∼ (2ω²/π) w(q) [facteur d'interférence] δ(2Ω_rms − nω).

Les nœuds ne dépendent que de ω : qx = kω si (−1)^(n+2s) = −1, qx = (k+½)ω sinon.
"""

import logging
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.physics.field import FieldConfig, Momentum3, effective_mass
from app.semianalytic.popov import RingAbsent, popov_coefficients

logger = logging.getLogger(__name__)

# tolérance relative sur la condition de seuil nω/2 ≥ m*
THRESHOLD_EPS = 1e-12


# ============================================================================
# Configuration et Résultats
# ============================================================================

EnvelopeVariant = Literal["as-printed", "bracketed"]
EvaluationMode = Literal["ring-locus", "regularized-delta"]


class SemianalyticConfig(BaseModel):
    """Paramètres du prédicteur semi-analytique."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    q_factor: float = Field(default=0.88, gt=0, description="Facteur 𝒬 de la largeur transverse")
    spin: float = Field(default=0.5, description="s = 1/2 (fermions) ou 0 (bosons)")
    envelope_variant: EnvelopeVariant = "as-printed"
    delta_reg_width: Optional[float] = Field(
        default=None, gt=0, description="Largeur σ_E de la delta régularisée (défaut ω/20)"
    )
    evaluation_mode: EvaluationMode = "ring-locus"

    @field_validator("spin")
    @classmethod
    def validate_spin(cls, v: float) -> float:
        if v not in (0.0, 0.5):
            raise ValueError("Le spin doit valoir 0 ou 1/2")
        return v


class RingFeaturePrediction(BaseModel):
    """Anneau n-photon prédit ; radius est None sous le seuil."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    radius: Optional[float] = None
    present: bool


# ============================================================================
# Géométrie des anneaux
# ============================================================================

def _is_above_threshold(n: int, omega: float, mstar: float) -> bool:
    return n * omega / 2.0 >= mstar * (1.0 - THRESHOLD_EPS)


def ring_radius(n: int, cfg: FieldConfig) -> RingFeaturePrediction:
    """Rayon √((nω/2)² − m*²) de l'anneau n-photon."""
    if n < 1:
        raise ValueError(f"n doit être ≥ 1 (reçu {n})")
    mstar = effective_mass(cfg)
    if not _is_above_threshold(n, cfg.omega, mstar):
        return RingFeaturePrediction(n=n, radius=None, present=False)
    radius = math.sqrt(max(0.0, (n * cfg.omega / 2.0) ** 2 - mstar ** 2))
    return RingFeaturePrediction(n=n, radius=radius, present=True)


def min_photon_number(cfg: FieldConfig) -> int:
    """Plus petit n tel que nω/2 ≥ m*."""
    mstar = effective_mass(cfg)
    n = max(1, math.ceil(2.0 * mstar / cfg.omega * (1.0 - THRESHOLD_EPS)))
    # garde-fou d'arrondi : cohérence stricte avec ring_radius
    while not _is_above_threshold(n, cfg.omega, mstar):
        n += 1
    while n > 1 and _is_above_threshold(n - 1, cfg.omega, mstar):
        n -= 1
    return n


def _require_ring(n: int, cfg: FieldConfig) -> float:
    ring = ring_radius(n, cfg)
    if not ring.present:
        raise RingAbsent(f"Anneau {n}-photon absent : nω/2 = {n * cfg.omega / 2:.6g} < m* = {effective_mass(cfg):.6g}")
    return ring.radius


def ring_locus(n: int, cfg: FieldConfig, n_samples: int = 181) -> Tuple[np.ndarray, np.ndarray]:
    """Points (qx, qy ≥ 0) répartis en angle sur le demi-anneau supérieur."""
    radius = _require_ring(n, cfg)
    theta = np.linspace(np.pi, 0.0, n_samples)
    qx = radius * np.cos(theta)
    qy = np.abs(radius * np.sin(theta))
    return qx, qy


# ============================================================================
# Facteurs d'interférence
# ============================================================================

def _parity_sign(n: int, s: float) -> float:
    """(−1)^(n+2s) pour n entier et s ∈ {0, 1/2}."""
    return -1.0 if (n + int(round(2 * s))) % 2 else 1.0


def interference_factor(qx: float, omega: float, n: int, s: float = 0.5) -> float:
    if omega <= 0:
        raise ValueError("ω doit être > 0")
    # phase réduite modulo 1 : zéros exacts aux nœuds
    x = qx / omega
    return 1.0 + _parity_sign(n, s) * math.cos(2.0 * math.pi * (x - round(x)))


def interference_factor_elliptic(qx: float, qy: float, omega: float, n: int, s: float = 0.5) -> float:
    """Variante heuristique δ ≠ 0 : qx remplacé par √(qx² + qy²)."""
    return interference_factor(math.hypot(qx, qy), omega, n, s)


def popov_original_factor(qx: float, omega: float, gamma: float, n: int, s: float = 0.5) -> float:
    """Facteur d'origine 1 + (−1)^(n+2s) cos(4 qx/ω · arctan γ)."""
    if omega <= 0:
        raise ValueError("ω doit être > 0")
    return 1.0 + _parity_sign(n, s) * math.cos(4.0 * qx / omega * math.atan(gamma))


# ============================================================================
# Nœuds
# ============================================================================

def node_qx_values(n: int, cfg: FieldConfig, s: float = 0.5) -> List[float]:
    """Valeurs distinctes de qx des nœuds, triées, restreintes à |qx| ≤ rayon."""
    return lattice_node_qx(cfg.omega, n, _require_ring(n, cfg), s)


def lattice_node_qx(omega: float, n: int, radius: float, s: float = 0.5) -> List[float]:
    """Zéros du facteur d'interférence dans [−radius, radius]."""
    offset = 0.0 if _parity_sign(n, s) < 0 else 0.5
    k_max = math.floor(radius / omega - offset + 1e-12)
    values = []
    for k in range(-k_max - 1, k_max + 1):
        qx = (k + offset) * omega
        if abs(qx) <= radius * (1.0 + 1e-12):
            values.append(qx)
    return sorted(set(values))


def node_positions(n: int, cfg: FieldConfig, s: float = 0.5) -> List[Tuple[float, float]]:
    """Points (qx, ±qy) de l'anneau où le facteur d'interférence s'annule."""
    radius = _require_ring(n, cfg)
    points: List[Tuple[float, float]] = []
    for qx in node_qx_values(n, cfg, s):
        qy = math.sqrt(max(0.0, radius * radius - qx * qx))
        if qy == 0.0:
            points.append((qx, 0.0))
        else:
            points.append((qx, qy))
            points.append((qx, -qy))
    return points


# ============================================================================
# Poids semi-analytique
# ============================================================================

def envelope_weight(q: Momentum3, cfg: FieldConfig, sconf: SemianalyticConfig) -> float:
    """Enveloppe w(q) selon la variante choisie ; nulle sans champ."""
    if cfg.e0 == 0:
        return 0.0
    coeffs = popov_coefficients(cfg.omega / cfg.e0)
    q_perp2 = q.qy ** 2 + q.qz ** 2
    bracket = coeffs.g + sconf.q_factor * coeffs.b1 * q_perp2
    if sconf.envelope_variant == "bracketed":
        return math.exp(-math.pi / cfg.e0 * (bracket + coeffs.b2 * q.qx ** 2))
    return math.exp(-math.pi / cfg.e0 * bracket + coeffs.b2 * q.qx ** 2)


def regularized_delta(q: Momentum3, n: int, cfg: FieldConfig, width: float) -> float:
    """Gaussienne d'aire unité en x = 2Ω_rms(q) − nω."""
    omega_rms = math.sqrt(q.qx ** 2 + q.qy ** 2 + q.qz ** 2 + effective_mass(cfg) ** 2)
    x = 2.0 * omega_rms - n * cfg.omega
    return math.exp(-0.5 * (x / width) ** 2) / (width * math.sqrt(2.0 * math.pi))


def fn_value(q: Momentum3, n: int, cfg: FieldConfig, sconf: SemianalyticConfig | None = None) -> float:
    """
    Poids (2ω²/π) · w(q) · [1 + (−1)^(n+2s) cos(2π qx/ω)] · D.

    D = 1 en mode ring-locus (q supposé sur l'anneau), gaussienne d'aire unité
    en mode regularized-delta.

    Raises:
        RingAbsent: en mode ring-locus si n est sous le seuil
    """
    sconf = sconf or SemianalyticConfig()
    if sconf.evaluation_mode == "ring-locus":
        _require_ring(n, cfg)
        delta_factor = 1.0
    else:
        width = sconf.delta_reg_width or cfg.omega / 20.0
        delta_factor = regularized_delta(q, n, cfg, width)

    interference = interference_factor(q.qx, cfg.omega, n, sconf.spin)
    value = 2.0 * cfg.omega ** 2 / math.pi * envelope_weight(q, cfg, sconf) * interference * delta_factor
    return max(value, 0.0)


def predicted_ring_profile(
    n: int,
    cfg: FieldConfig,
    sconf: SemianalyticConfig | None = None,
    qx: np.ndarray | None = None,
    n_samples: int = 181,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Profil f_n(qx) le long du demi-anneau supérieur.

    Retourne (qx, qy, valeurs) ; qx hors de [−rayon, rayon] est rejeté.
    """
    sconf = sconf or SemianalyticConfig()
    locus_conf = sconf.model_copy(update={"evaluation_mode": "ring-locus"})
    radius = _require_ring(n, cfg)
    if qx is None:
        qx, qy = ring_locus(n, cfg, n_samples)
    else:
        qx = np.asarray(qx, dtype=np.float64)
        if np.any(np.abs(qx) > radius * (1.0 + 1e-9)):
            raise ValueError("qx hors de l'anneau")
        qy = np.sqrt(np.clip(radius ** 2 - qx ** 2, 0.0, None))
    values = np.array([
        fn_value(Momentum3(qx=float(x), qy=float(y), qz=0.0), n, cfg, locus_conf)
        for x, y in zip(qx, qy)
    ])
    return qx, qy, values
