"""
Module de Solveur de Base (Base Solver)
Éléments communs aux solveurs DHW et QVE :
- Exceptions personnalisées
- Options d'intégration (SolverOptions)
- Résultat par point d'impulsion (PointResult)
- Convention de rapport (bornage de f, drapeau de dépassement)
- Fenêtre temporelle d'intégration
"""

import math
from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.physics.field import FieldConfig, laser_period


# ============================================================================
# Exceptions Personnalisées
# ============================================================================

class SolverError(Exception):
    """Exception de base pour toutes les erreurs de solveur"""
    pass


class StepLimitExceeded(SolverError):
    """Levée lorsque max_steps est atteint avant la fin de la fenêtre"""
    pass


class NonFiniteState(SolverError):
    """Levée lorsque l'état devient NaN/Inf (tolérance ou transcription erronée)"""
    pass


class StepSizeUnderflow(SolverError):
    """Levée lorsque le pas adaptatif devient négligeable devant t"""
    pass


class NotLinearlyPolarized(SolverError):
    """Levée lorsque l'oracle QVE reçoit un champ avec δ ≠ 0"""
    pass


# Codes de statut renvoyés par les noyaux d'intégration
STATUS_OK = 0
STATUS_STEP_LIMIT = 1
STATUS_NON_FINITE = 2
STATUS_UNDERFLOW = 3


def raise_for_status(status: int, context: str) -> None:
    """Convertit un code de statut de noyau en exception."""
    if status == STATUS_OK:
        return
    if status == STATUS_STEP_LIMIT:
        raise StepLimitExceeded(f"max_steps atteint ({context})")
    if status == STATUS_NON_FINITE:
        raise NonFiniteState(f"État non fini pendant l'intégration ({context})")
    if status == STATUS_UNDERFLOW:
        raise StepSizeUnderflow(f"Pas d'intégration trop petit ({context})")
    raise SolverError(f"Statut de noyau inconnu {status} ({context})")


# ============================================================================
# Options et Résultats
# ============================================================================

H9Variant = Literal["p_outer_e", "e_outer_p"]


class SolverOptions(BaseModel):
    """
    Options d'intégration d'un point d'impulsion.

    La fenêtre est t ∈ [−c·τ, +c·τ] ; la constance post-impulsion est mesurée
    sur les `constancy_check_window` dernières périodes laser.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(default=1e-7, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    t_span_factor: float = Field(default=8.0, ge=5)
    max_steps: int = Field(default=10_000_000, ge=1)
    constancy_check_window: float = Field(default=1.0, gt=0, description="En périodes laser")
    max_step: float = Field(default=0.5, gt=0, description="Pas maximal (unités 1/m)")
    initial_step: float = Field(default=1e-2, gt=0)
    step_control: Literal["adaptive", "fixed"] = "adaptive"
    fixed_step: float = Field(default=1e-2, gt=0)
    h9_variant: H9Variant = "p_outer_e"


class PointResult(BaseModel):
    """Résultat asymptotique pour une impulsion canonique q."""
    model_config = ConfigDict(frozen=True)

    f_final: float = Field(..., ge=0)
    f_raw: float
    n_steps: int
    n_rejected: int = 0
    constancy_residual: float
    clip_flag: bool
    f_min: float
    f_max: float


def time_window(cfg: FieldConfig, opts: SolverOptions) -> Tuple[float, float, float]:
    """Retourne (t_start, t_check, t_end) ; t_check = t_end − fenêtre de constance."""
    t_end = opts.t_span_factor * cfg.tau
    t_start = -t_end
    window = opts.constancy_check_window * laser_period(cfg)
    t_check = max(t_start, t_end - window)
    return t_start, t_check, t_end


def build_point_result(
    f_raw: float,
    f_check: float,
    f_min: float,
    f_max: float,
    n_steps: int,
    n_rejected: int,
    opts: SolverOptions,
) -> PointResult:
    """
    Applique la convention de rapport.

    f_final = max(f_raw, 0). Le drapeau est levé si f_raw sort de
    [−10·atol, 1+10·atol] ou si la trajectoire sort de [−100·atol, 1+100·atol].
    """
    tol = opts.abs_tol
    clip_flag = (
        f_raw < -10 * tol
        or f_raw > 1 + 10 * tol
        or f_min < -100 * tol
        or f_max > 1 + 100 * tol
    )
    if not math.isfinite(f_raw):
        raise NonFiniteState("f final non fini")
    return PointResult(
        f_final=max(f_raw, 0.0),
        f_raw=f_raw,
        n_steps=n_steps,
        n_rejected=n_rejected,
        constancy_residual=abs(f_raw - f_check),
        clip_flag=clip_flag,
        f_min=f_min,
        f_max=f_max,
    )
