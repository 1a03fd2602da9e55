"""
Fichier: engine/app/solvers/dhw.py
Objectif: Système DHW réduit pour un champ homogène dépendant du temps.
Responsabilités:
- Second membre fermé (noyau numba) utilisé par l'intégrateur.
- Forme matricielle de référence (ė₁, F, G, H₉) pour vérifier la transcription.
- Intégration d'un point d'impulsion depuis le vide (solve_point).

Vecteur d'état (13 composantes) : f, w1, w2, w3 (w₉ = (w1, w2, w3)), eA.
Avec p = q − eA et Ω = √(1+p²) :
    d(eA)/dt = −E
    ḟ  = E·w1 / (2Ω)
    ẇ1 = −p(E·w1)/Ω² − 2 p×w2 − 2 w3 + (1−2f)(E/Ω − p(p·E)/Ω³)
    ẇ2 = −2 p×w1
    ẇ3 = 2 w1 + 2 p(p·w1)

Normalisation : f est l'occupation par état (bornée par 1, identique à l'oracle
QVE). La forme publiée, ḟ = ½ ė₁ᵀ F w₉ et source 2(1−f), intègre la densité 2f ;
on s'y ramène par f → f/2, w₉ → w₉/2, ce qui donne la source (1−2f).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from app.physics.field import FieldConfig, Momentum3, electric_field, field_components
from app.solvers.base_solver import (
    H9Variant,
    PointResult,
    SolverOptions,
    build_point_result,
    raise_for_status,
    time_window,
)
from app.solvers.integrator import make_dopri5

logger = logging.getLogger(__name__)

STATE_SIZE = 13
VARIANT_CODES = {"p_outer_e": 0, "e_outer_p": 1}


# ============================================================================
# Types de Domaine
# ============================================================================

@dataclass
class DHWState:
    """État d'intégration d'un point d'impulsion."""
    f: float = 0.0
    w1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w3: np.ndarray = field(default_factory=lambda: np.zeros(3))
    a_pot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def vacuum(cls) -> "DHWState":
        """Conditions initiales f = 0, w₉ = 0, eA = 0."""
        return cls()

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "DHWState":
        y = np.asarray(y, dtype=np.float64)
        return cls(
            f=float(y[0]),
            w1=y[1:4].copy(),
            w2=y[4:7].copy(),
            w3=y[7:10].copy(),
            a_pot=y[10:13].copy(),
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.f], self.w1, self.w2, self.w3, self.a_pot)).astype(np.float64)

    @property
    def w9(self) -> np.ndarray:
        return np.concatenate((self.w1, self.w2, self.w3))


@dataclass(frozen=True)
class KineticMomentum:
    """Impulsion cinétique p = q − eA et énergie totale Ω(p)."""
    p: np.ndarray
    omega_p: float


def kinetic_momentum(q: Momentum3, e_a: np.ndarray) -> KineticMomentum:
    p = q.as_array() - np.asarray(e_a, dtype=np.float64)
    return KineticMomentum(p=p, omega_p=math.sqrt(1.0 + float(p @ p)))


# ============================================================================
# Second membre fermé (numba)
# ============================================================================

@njit(cache=True)
def dhw_rhs_kernel(t, y, params, dy):
    """params = (qx, qy, qz, e0, omega, tau, phi, delta, variant)"""
    ex, ey, ez = field_components(t, params[3], params[4], params[5], params[6], params[7])

    f = y[0]
    w1x, w1y, w1z = y[1], y[2], y[3]
    w2x, w2y, w2z = y[4], y[5], y[6]
    w3x, w3y, w3z = y[7], y[8], y[9]
    px = params[0] - y[10]
    py = params[1] - y[11]
    pz = params[2] - y[12]

    om2 = 1.0 + px * px + py * py + pz * pz
    om = math.sqrt(om2)
    e_w1 = ex * w1x + ey * w1y + ez * w1z
    p_w1 = px * w1x + py * w1y + pz * w1z
    p_e = px * ex + py * ey + pz * ez

    dy[0] = 0.5 * e_w1 / om

    if params[8] == 0.0:
        # bloc (1,1) = −p Eᵀ/Ω²
        ox = -px * e_w1 / om2
        oy = -py * e_w1 / om2
        oz = -pz * e_w1 / om2
    else:
        # bloc (1,1) = −E pᵀ/Ω²
        ox = -ex * p_w1 / om2
        oy = -ey * p_w1 / om2
        oz = -ez * p_w1 / om2

    src = 1.0 - 2.0 * f
    om3 = om2 * om
    dy[1] = ox - 2.0 * (py * w2z - pz * w2y) - 2.0 * w3x + src * (ex / om - px * p_e / om3)
    dy[2] = oy - 2.0 * (pz * w2x - px * w2z) - 2.0 * w3y + src * (ey / om - py * p_e / om3)
    dy[3] = oz - 2.0 * (px * w2y - py * w2x) - 2.0 * w3z + src * (ez / om - pz * p_e / om3)

    dy[4] = -2.0 * (py * w1z - pz * w1y)
    dy[5] = -2.0 * (pz * w1x - px * w1z)
    dy[6] = -2.0 * (px * w1y - py * w1x)

    dy[7] = 2.0 * w1x + 2.0 * px * p_w1
    dy[8] = 2.0 * w1y + 2.0 * py * p_w1
    dy[9] = 2.0 * w1z + 2.0 * pz * p_w1

    dy[10] = -ex
    dy[11] = -ey
    dy[12] = -ez


_integrate_dhw = make_dopri5(dhw_rhs_kernel)


def kernel_params(q: Momentum3, cfg: FieldConfig, variant: H9Variant = "p_outer_e") -> np.ndarray:
    return np.array(
        [q.qx, q.qy, q.qz, *cfg.as_kernel_params(), float(VARIANT_CODES[variant])],
        dtype=np.float64,
    )


def dhw_rhs(state: DHWState, t: float, q: Momentum3, cfg: FieldConfig,
            variant: H9Variant = "p_outer_e") -> DHWState:
    """Dérivée temporelle de l'état (forme fermée)."""
    dy = np.empty(STATE_SIZE)
    dhw_rhs_kernel(float(t), state.to_vector(), kernel_params(q, cfg, variant), dy)
    return DHWState.from_vector(dy)


# ============================================================================
# Forme matricielle de référence
# ============================================================================

def _cross_matrix(v: np.ndarray) -> np.ndarray:
    """Matrice [v×] telle que [v×] w = v × w."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def h9_matrix(p: np.ndarray, e: np.ndarray, omega_p: float,
              variant: H9Variant = "p_outer_e") -> np.ndarray:
    """Matrice H₉ (9×9) avec m = 1 et ω²(p) lu comme Ω²(p)."""
    outer = np.outer(p, e) if variant == "p_outer_e" else np.outer(e, p)
    h9 = np.zeros((9, 9))
    h9[0:3, 0:3] = -outer / omega_p ** 2
    h9[0:3, 3:6] = -2.0 * _cross_matrix(p)
    h9[0:3, 6:9] = -2.0 * np.eye(3)
    h9[3:6, 0:3] = -2.0 * _cross_matrix(p)
    h9[6:9, 0:3] = 2.0 * (np.eye(3) + np.outer(p, p))
    return h9


def dhw_rhs_matrix(state: DHWState, t: float, q: Momentum3, cfg: FieldConfig,
                   variant: H9Variant = "p_outer_e") -> DHWState:
    """
    Second membre assemblé à partir de ė₁, F, G et H₉ :
        ḟ = ½ ė₁ᵀ F w₉,   ẇ₉ = H₉ w₉ + (1−2f) G ė₁
    avec e₁ = (1/Ω, p/Ω, 0₆) et ṗ = E.
    """
    e = electric_field(cfg, t)
    km = kinetic_momentum(q, state.a_pot)
    p, om = km.p, km.omega_p

    e1_dot = np.zeros(10)
    e1_dot[0] = -(p @ e) / om ** 3
    e1_dot[1:4] = e / om - p * (p @ e) / om ** 3

    f_mat = np.zeros((10, 9))
    f_mat[0, 0:3] = -p
    f_mat[1:10, :] = np.eye(9)
    g_mat = np.zeros((9, 10))
    g_mat[:, 1:10] = np.eye(9)

    w9 = state.w9
    f_dot = 0.5 * e1_dot @ f_mat @ w9
    w9_dot = h9_matrix(p, e, om, variant) @ w9 + (1.0 - 2.0 * state.f) * (g_mat @ e1_dot)

    return DHWState(
        f=float(f_dot),
        w1=w9_dot[0:3],
        w2=w9_dot[3:6],
        w3=w9_dot[6:9],
        a_pot=-e,
    )


# ============================================================================
# Intégration d'un point
# ============================================================================

def solve_point(q: Momentum3, cfg: FieldConfig, opts: SolverOptions | None = None) -> PointResult:
    """
    Intègre le système DHW de t = −cτ à t = +cτ depuis le vide.

    Raises:
        StepLimitExceeded: si max_steps est atteint
        NonFiniteState: si l'état devient NaN/Inf
        StepSizeUnderflow: si le pas adaptatif s'effondre
    """
    opts = opts or SolverOptions()
    t_start, t_check, t_end = time_window(cfg, opts)
    adaptive = opts.step_control == "adaptive"
    h_init = opts.initial_step if adaptive else opts.fixed_step
    h_max = opts.max_step if adaptive else opts.fixed_step

    y, n_acc, n_rej, status, f_min, f_max, f_check = _integrate_dhw(
        np.zeros(STATE_SIZE),
        t_start,
        t_check,
        t_end,
        kernel_params(q, cfg, opts.h9_variant),
        opts.rel_tol,
        opts.abs_tol,
        h_init,
        h_max,
        opts.max_steps,
        adaptive,
    )
    raise_for_status(int(status), f"DHW q=({q.qx}, {q.qy}, {q.qz})")

    logger.debug(f"DHW q=({q.qx:.4f}, {q.qy:.4f}, {q.qz:.4f}) : f={y[0]:.6e}, {n_acc} pas")
    return build_point_result(
        f_raw=float(y[0]),
        f_check=float(f_check),
        f_min=float(f_min),
        f_max=float(f_max),
        n_steps=int(n_acc),
        n_rejected=int(n_rej),
        opts=opts,
    )


def final_state(q: Momentum3, cfg: FieldConfig, opts: SolverOptions | None = None) -> DHWState:
    """État complet en t_end (diagnostic : potentiel vecteur co-intégré)."""
    opts = opts or SolverOptions()
    t_start, t_check, t_end = time_window(cfg, opts)
    y, _, _, status, _, _, _ = _integrate_dhw(
        np.zeros(STATE_SIZE), t_start, t_check, t_end,
        kernel_params(q, cfg, opts.h9_variant),
        opts.rel_tol, opts.abs_tol, opts.initial_step, opts.max_step, opts.max_steps, True,
    )
    raise_for_status(int(status), "DHW état final")
    return DHWState.from_vector(y)
