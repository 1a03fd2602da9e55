"""
Fichier: engine/app/solvers/qve.py
Objectif: Oracle par l'équation de Vlasov quantique (polarisation linéaire).
Responsabilités:
- Système standard à 3 équations (f, u, v) plus le potentiel co-intégré eA_x.
- Intégration indépendante du solveur DHW (stepper DOP853 de scipy).

Seule l'évaluation du champ (field_components) est partagée avec le solveur DHW.

    ε⊥² = 1 + qy² + qz²,  p∥ = qx − eA_x,  Ω² = ε⊥² + p∥²,  Q = E_x ε⊥/Ω²
    ḟ = Q u/2,  u̇ = Q(1 − 2f) − 2Ω v,  v̇ = 2Ω u,  d(eA_x)/dt = −E_x
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853

from app.physics.field import FieldConfig, Momentum3, field_components
from app.solvers.base_solver import (
    NonFiniteState,
    NotLinearlyPolarized,
    PointResult,
    SolverOptions,
    StepLimitExceeded,
    StepSizeUnderflow,
    build_point_result,
    time_window,
)

logger = logging.getLogger(__name__)


@dataclass
class QVEState:
    """État (f, u, v, eA_x) ; le vide correspond à tout nul."""
    f: float = 0.0
    u: float = 0.0
    v: float = 0.0
    e_ax: float = 0.0

    def to_vector(self) -> np.ndarray:
        return np.array([self.f, self.u, self.v, self.e_ax], dtype=np.float64)


def qve_rhs(t: float, y: np.ndarray, q: Momentum3, cfg: FieldConfig) -> np.ndarray:
    """Second membre du système QVE."""
    ex, _, _ = field_components(t, cfg.e0, cfg.omega, cfg.tau, cfg.phi, cfg.delta)
    eps_perp2 = 1.0 + q.qy * q.qy + q.qz * q.qz
    p_par = q.qx - y[3]
    om2 = eps_perp2 + p_par * p_par
    om = math.sqrt(om2)
    source = ex * math.sqrt(eps_perp2) / om2
    return np.array([
        0.5 * source * y[1],
        source * (1.0 - 2.0 * y[0]) - 2.0 * om * y[2],
        2.0 * om * y[1],
        -ex,
    ])


def qve_solve_point(q: Momentum3, cfg: FieldConfig, opts: SolverOptions | None = None) -> PointResult:
    """
    Intègre l'équation de Vlasov quantique sur la même fenêtre que le solveur DHW.

    Raises:
        NotLinearlyPolarized: si cfg.delta ≠ 0
        StepLimitExceeded: si max_steps est atteint
        NonFiniteState: si l'état devient NaN/Inf
    """
    opts = opts or SolverOptions()
    if cfg.delta != 0:
        raise NotLinearlyPolarized(f"L'oracle QVE exige δ = 0 (reçu δ = {cfg.delta})")

    t_start, t_check, t_end = time_window(cfg, opts)
    stepper = DOP853(
        lambda t, y: qve_rhs(t, y, q, cfg),
        t_start,
        QVEState().to_vector(),
        t_end,
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        first_step=min(opts.initial_step, opts.max_step),
    )

    n_steps = 0
    f_min = f_max = 0.0
    f_check = 0.0 if t_check <= t_start else None
    while stepper.status == "running":
        if n_steps >= opts.max_steps:
            raise StepLimitExceeded(f"max_steps atteint (QVE q=({q.qx}, {q.qy}, {q.qz}))")
        t_prev = stepper.t
        message = stepper.step()
        if stepper.status == "failed":
            raise StepSizeUnderflow(f"Échec du stepper QVE : {message}")
        n_steps += 1
        f_now = float(stepper.y[0])
        if not np.all(np.isfinite(stepper.y)):
            raise NonFiniteState(f"État QVE non fini (q=({q.qx}, {q.qy}, {q.qz}))")
        f_min = min(f_min, f_now)
        f_max = max(f_max, f_now)
        if f_check is None and stepper.t >= t_check:
            # interpolation dense sur [t_prev, t]
            f_check = f_now if stepper.t == t_check else float(stepper.dense_output()(max(t_check, t_prev))[0])

    logger.debug(f"QVE q=({q.qx:.4f}, {q.qy:.4f}, {q.qz:.4f}) : f={stepper.y[0]:.6e}, {n_steps} pas")
    return build_point_result(
        f_raw=float(stepper.y[0]),
        f_check=float(f_check if f_check is not None else stepper.y[0]),
        f_min=f_min,
        f_max=f_max,
        n_steps=n_steps,
        n_rejected=0,
        opts=opts,
    )
