"""
Intégrateur Runge-Kutta explicite adaptatif (Dormand-Prince 5(4)).

Paire emboîtée d'ordre 5 avec estimation d'erreur d'ordre 4, propriété FSAL,
norme d'erreur RMS et contrôleur de pas PI. Un mode à pas fixe (même tableau,
sans contrôle d'erreur) sert au débogage.

`make_dopri5(rhs)` compile une boucle d'intégration spécialisée pour un second
membre numba de signature rhs(t, y, params, dy_out).
"""

import numpy as np
from numba import njit

from app.solvers.base_solver import (
    STATUS_NON_FINITE,
    STATUS_OK,
    STATUS_STEP_LIMIT,
    STATUS_UNDERFLOW,
)


# ============================================================================
# Tableau de Butcher
# ============================================================================

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])

# b5 − b4 (la 7e étape est évaluée en y_new, FSAL)
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# Contrôleur PI
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0


def make_dopri5(rhs):
    """
    Construit la boucle d'intégration pour le second membre `rhs`.

    La fonction retournée intègre de t0 à t_end en s'arrêtant exactement en
    t_check, et renvoie
    (y, n_accepted, n_rejected, status, f_min, f_max, f_check)
    où f désigne la composante y[0].
    """

    @njit
    def integrate(y0, t0, t_check, t_end, params, rtol, atol,
                  h_init, h_max, max_steps, adaptive):
        n = y0.size
        y = y0.copy()
        y_new = np.empty(n)
        y_stage = np.empty(n)
        k = np.empty((7, n))

        t = t0
        h = min(h_init, h_max)
        err_old = 1e-4
        n_accepted = 0
        n_rejected = 0
        status = STATUS_OK
        f_min = y[0]
        f_max = y[0]
        f_check = y[0]
        checked = t_check <= t0

        rhs(t, y, params, k[0])

        while t < t_end:
            if n_accepted + n_rejected >= max_steps:
                status = STATUS_STEP_LIMIT
                break

            target = t_end if checked else t_check
            if h > h_max:
                h = h_max
            hits_target = False
            if t + h >= target:
                h = target - t
                hits_target = True
                if h <= 1e-12 * max(1.0, abs(target)):
                    # cible atteinte à l'arrondi près
                    t = target
                    if not checked:
                        checked = True
                        f_check = y[0]
                    continue

            if h <= 1e-13 * max(1.0, abs(t)):
                status = STATUS_UNDERFLOW
                break

            for s in range(1, 7):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        acc += A[s, j] * k[j, i]
                    y_stage[i] = y[i] + h * acc
                if s < 6:
                    rhs(t + C[s] * h, y_stage, params, k[s])
            for i in range(n):
                y_new[i] = y_stage[i]
            rhs(t + h, y_new, params, k[6])

            if adaptive:
                acc = 0.0
                for i in range(n):
                    e_i = 0.0
                    for j in range(7):
                        e_i += E[j] * k[j, i]
                    e_i *= h
                    sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
                    acc += (e_i / sc) ** 2
                err = np.sqrt(acc / n)
            else:
                err = 0.0

            if not np.isfinite(err):
                status = STATUS_NON_FINITE
                break

            if err <= 1.0:
                for i in range(n):
                    if not np.isfinite(y_new[i]):
                        status = STATUS_NON_FINITE
                if status != STATUS_OK:
                    break
                t = target if hits_target else t + h
                for i in range(n):
                    y[i] = y_new[i]
                    k[0, i] = k[6, i]
                n_accepted += 1
                if y[0] < f_min:
                    f_min = y[0]
                if y[0] > f_max:
                    f_max = y[0]
                if hits_target and not checked:
                    checked = True
                    f_check = y[0]

                if adaptive:
                    fac11 = err ** EXPO
                    fac = fac11 / err_old ** BETA
                    fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFETY))
                    h = h / fac
                    err_old = max(err, 1e-4)
                else:
                    h = h_init
            else:
                n_rejected += 1
                fac11 = err ** EXPO
                h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)

        return y, n_accepted, n_rejected, status, f_min, f_max, f_check

    return integrate
