"""
Module de Coefficients de Popov
Quadratures g(γ), g′(γ), g″(γ) et coefficients b₁(γ), b₂(γ) :

    g(γ)  = (4/π) ∫₀¹ √(1−u²) / √(1+γ²u²) du
    b₁(γ) = g + γ g′/2
    b₂(γ) = −γ b₁′(γ) = −γ (3g′/2 + γ g″/2)

Les dérivées sont obtenues par quadrature des intégrandes dérivés analytiquement.
"""

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad, trapezoid

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200


# ============================================================================
# Exceptions Personnalisées
# ============================================================================

class PredictionError(Exception):
    """Exception de base pour le prédicteur semi-analytique"""
    pass


class RingAbsent(PredictionError):
    """Levée lorsque nω/2 < m* (anneau n-photon sous le seuil)"""
    pass


# ============================================================================
# Quadratures
# ============================================================================

def _check_gamma(gamma: float) -> None:
    if not gamma >= 0:
        raise ValueError(f"γ doit être ≥ 0 (reçu {gamma})")


def _integrate(integrand) -> float:
    # poids algébrique (1−u)^½ : la racine √(1−u²) = √(1−u)·√(1+u) est traitée exactement
    value, _ = quad(
        integrand, 0.0, 1.0,
        weight="alg", wvar=(0.0, 0.5),
        epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    return 4.0 / math.pi * value


def g_of_gamma(gamma: float) -> float:
    """g(γ) par quadrature adaptative (précision absolue ≤ 1e−10)."""
    _check_gamma(gamma)
    g2 = gamma * gamma
    return _integrate(lambda u: math.sqrt(1.0 + u) / math.sqrt(1.0 + g2 * u * u))


def g_derivatives(gamma: float) -> Tuple[float, float, float]:
    """Retourne (g, g′, g″)."""
    _check_gamma(gamma)
    g2 = gamma * gamma

    def d1(u: float) -> float:
        s = 1.0 + g2 * u * u
        return math.sqrt(1.0 + u) * (-gamma * u * u) * s ** -1.5

    def d2(u: float) -> float:
        s = 1.0 + g2 * u * u
        return math.sqrt(1.0 + u) * (-u * u * s ** -1.5 + 3.0 * g2 * u ** 4 * s ** -2.5)

    return g_of_gamma(gamma), _integrate(d1), _integrate(d2)


def g_of_gamma_reference(gamma: float, n_nodes: int = 10001) -> float:
    """
    Oracle indépendant de quad : trapèzes à pas fixe en θ (u = sin θ),
        g(γ) = (4/π) ∫₀^{π/2} cos²θ / √(1+γ² sin²θ) dθ
    L'intégrande est lisse et pair-périodique, la règle converge spectralement.
    """
    _check_gamma(gamma)
    theta = np.linspace(0.0, 0.5 * np.pi, n_nodes)
    values = np.cos(theta) ** 2 / np.sqrt(1.0 + (gamma * np.sin(theta)) ** 2)
    return float(4.0 / np.pi * trapezoid(values, theta))


# ============================================================================
# Coefficients
# ============================================================================

class PopovCoefficients(BaseModel):
    """Coefficients sans dimension de l'enveloppe de Popov pour un γ donné."""
    model_config = ConfigDict(frozen=True)

    gamma: float = Field(..., ge=0)
    g: float
    b1: float
    b2: float


@lru_cache(maxsize=256)
def _coefficients_cached(gamma: float) -> PopovCoefficients:
    g, dg, d2g = g_derivatives(gamma)
    b1 = g + 0.5 * gamma * dg
    b1_prime = 1.5 * dg + 0.5 * gamma * d2g
    b2 = -gamma * b1_prime
    logger.debug(f"Coefficients de Popov γ={gamma:.6g} : g={g:.10f}, b1={b1:.10f}, b2={b2:.10f}")
    return PopovCoefficients(gamma=gamma, g=g, b1=b1, b2=b2)


def popov_coefficients(gamma: float) -> PopovCoefficients:
    """g, b₁ = g + γg′/2 et b₂ = −γb₁′ (mémoïsé par γ)."""
    _check_gamma(gamma)
    return _coefficients_cached(float(gamma))


def b1_of_gamma(gamma: float) -> float:
    return popov_coefficients(gamma).b1
