"""
Fichier: engine/app/physics/units.py
Objectif: Convention d'unités naturelles du projet.
Responsabilités:
- Fixer m = 1 (unité d'énergie et d'impulsion) et e·E_cr = m².
- Fournir les conversions vers les unités SI pour les rapports.

Toutes les API publiques manipulent des nombres sans dimension :
    Ē = E₀/E_cr, ω̄ = ω/m, t̄ = t·m, q̄ = q/m.
Avec cette convention e·E₀ = Ē·m² exactement ; la charge e n'apparaît jamais seule.
"""

from scipy.constants import c, e, hbar, m_e, physical_constants

# ============================================================================
# Constantes SI (CODATA via scipy.constants)
# ============================================================================

ELECTRON_MASS_EV = physical_constants["electron mass energy equivalent in MeV"][0] * 1e6
# champ critique de Sauter-Schwinger m²c³/(eħ)
CRITICAL_FIELD_V_PER_M = m_e ** 2 * c ** 3 / (e * hbar)
HBAR_EV_S = hbar / e


# ============================================================================
# Conversions
# ============================================================================

def field_from_si(field_v_per_m: float) -> float:
    """Champ électrique en V/m → unités de E_cr."""
    return field_v_per_m / CRITICAL_FIELD_V_PER_M


def field_to_si(e0: float) -> float:
    """Champ en unités de E_cr → V/m."""
    return e0 * CRITICAL_FIELD_V_PER_M


def omega_from_photon_energy_ev(photon_energy_ev: float) -> float:
    """Énergie de photon ħω en eV → ω en unités de m."""
    return photon_energy_ev / ELECTRON_MASS_EV


def photon_energy_ev(omega: float) -> float:
    """ω en unités de m → énergie de photon en eV."""
    return omega * ELECTRON_MASS_EV


def time_to_seconds(t: float) -> float:
    """Temps en unités de 1/m → secondes (ħ/mc²)."""
    return t * HBAR_EV_S / ELECTRON_MASS_EV
