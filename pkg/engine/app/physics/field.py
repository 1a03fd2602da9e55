"""
Fichier: engine/app/physics/field.py
Objectif: Modèle du champ électrique elliptiquement polarisé.
Responsabilités:
- Configuration du champ (FieldConfig) et impulsion canonique (Momentum3).
- Évaluation de E(t) (noyau numba partagé par tous les solveurs).
- Paramètres dérivés : paramètre de Keldysh γ, masse effective m*.
- Queue analytique du potentiel vecteur (diagnostic).

Toutes les grandeurs sont en unités naturelles (voir app.physics.units).
"""

import math
from typing import Any, Tuple

import numpy as np
from numba import njit
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.physics.units import omega_from_photon_energy_ev


# ============================================================================
# Modèles de Domaine
# ============================================================================

class FieldConfig(BaseModel):
    """
    Paramètres de l'impulsion laser.

    E(t) = (e0/√(1+δ²))·exp(−t²/2τ²)·(cos(ωt+φ), δ·sin(ωt+φ), 0)
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    e0: float = Field(..., ge=0, alias="e0_over_ecr", description="Amplitude du champ (unités E_cr)")
    omega: float = Field(..., gt=0, alias="omega_over_m", description="Fréquence angulaire (unités m)")
    tau: float = Field(default=100.0, gt=0, alias="tau_times_m", description="Durée de l'impulsion (unités 1/m)")
    phi: float = Field(default=0.0, alias="phi_rad", description="Phase porteuse (rad)")
    delta: float = Field(default=0.0, ge=-1, le=1, description="Polarisation (0 linéaire, 1 circulaire)")

    @model_validator(mode="before")
    @classmethod
    def _photon_energy(cls, data: Any) -> Any:
        """Accepte photon_energy_ev (ħω en eV) à la place de omega_over_m."""
        if not isinstance(data, dict) or "photon_energy_ev" not in data:
            return data
        data = dict(data)
        energy = data.pop("photon_energy_ev")
        if "omega" in data or "omega_over_m" in data:
            raise ValueError("photon_energy_ev et omega_over_m sont exclusifs")
        if not isinstance(energy, (int, float)) or energy <= 0:
            raise ValueError(f"photon_energy_ev doit être un nombre > 0 (reçu {energy!r})")
        data["omega_over_m"] = omega_from_photon_energy_ev(float(energy))
        return data

    def as_kernel_params(self) -> Tuple[float, float, float, float, float]:
        """Tuple (e0, omega, tau, phi, delta) consommé par les noyaux numba."""
        return (self.e0, self.omega, self.tau, self.phi, self.delta)

    def with_updates(self, **changes) -> "FieldConfig":
        """Copie validée avec des champs modifiés."""
        data = self.model_dump()
        data.update(changes)
        return FieldConfig(**data)


class Momentum3(BaseModel):
    """Impulsion canonique q (unités m)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    qx: float = 0.0
    qy: float = 0.0
    qz: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.qx, self.qy, self.qz], dtype=np.float64)

    def norm(self) -> float:
        return math.sqrt(self.qx ** 2 + self.qy ** 2 + self.qz ** 2)

    def reflect_z(self) -> "Momentum3":
        return Momentum3(qx=self.qx, qy=self.qy, qz=-self.qz)


class DerivedParams(BaseModel):
    """Paramètres dérivés d'une configuration de champ."""
    model_config = ConfigDict(frozen=True)

    gamma: float
    mstar: float
    period: float


# ============================================================================
# Noyau numba
# ============================================================================

@njit(cache=True)
def field_components(t, e0, omega, tau, phi, delta):
    """Composantes (Ex, Ey, Ez) de E(t) ; l'enveloppe n'est jamais tronquée."""
    amplitude = e0 / math.sqrt(1.0 + delta * delta) * math.exp(-t * t / (2.0 * tau * tau))
    phase = omega * t + phi
    return amplitude * math.cos(phase), amplitude * delta * math.sin(phase), 0.0


# ============================================================================
# Opérations publiques
# ============================================================================

def electric_field(cfg: FieldConfig, t: float) -> np.ndarray:
    """E(t) en unités de E_cr ; la composante z est toujours exactement nulle."""
    ex, ey, ez = field_components(float(t), *cfg.as_kernel_params())
    return np.array([ex, ey, ez], dtype=np.float64)


def keldysh_gamma(cfg: FieldConfig) -> float:
    """
    Paramètre d'adiabaticité de Keldysh γ = mω/(eE₀) = ω/e0.

    Raises:
        ValueError: si e0 = 0 (γ non défini)
    """
    if cfg.e0 == 0:
        raise ValueError("γ non défini pour un champ nul (e0 = 0)")
    return cfg.omega / cfg.e0


def effective_mass(cfg: FieldConfig) -> float:
    """Masse effective m* = √(1 + e0²/(2ω²)), indépendante de δ et φ."""
    return math.sqrt(1.0 + cfg.e0 ** 2 / (2.0 * cfg.omega ** 2))


def laser_period(cfg: FieldConfig) -> float:
    """Période laser 2π/ω (unités 1/m)."""
    return 2.0 * math.pi / cfg.omega


def derived_params(cfg: FieldConfig) -> DerivedParams:
    gamma = keldysh_gamma(cfg) if cfg.e0 > 0 else math.inf
    return DerivedParams(gamma=gamma, mstar=effective_mass(cfg), period=laser_period(cfg))


def vector_potential_tail(cfg: FieldConfig) -> np.ndarray:
    """
    Valeur analytique de −∫E dt sur ℝ (intégrale gaussienne-cosinus).

    Sert uniquement à vérifier le potentiel co-intégré par les solveurs.
    """
    if cfg.e0 == 0:
        return np.zeros(3)
    scale = cfg.e0 / math.sqrt(1.0 + cfg.delta ** 2)
    gauss = cfg.tau * math.sqrt(2.0 * math.pi) * math.exp(-0.5 * (cfg.omega * cfg.tau) ** 2)
    return np.array([
        -scale * gauss * math.cos(cfg.phi),
        -scale * gauss * cfg.delta * math.sin(cfg.phi),
        0.0,
    ])
