"""
Module de Résonances
Pics n-photon d'une courbe f(+∞) en fonction de ω et assignation de n par la
condition de résonance n·ω = 2√(q² + m*(ω)²) à l'impulsion fixe du balayage.
"""

import logging
import math
from typing import List, Literal, Optional

import numpy as np
from scipy.signal import find_peaks

from app.analysis.rings import failed_mask
from app.analysis.schemas import NoPeaks, ResonancePeak
from app.cqrs.schemas import FrequencyCurve
from app.physics.field import Momentum3, effective_mass
from app.semianalytic.predictor import interference_factor, interference_factor_elliptic

logger = logging.getLogger(__name__)

LINEAR_PROMINENCE_RATIO = 1e-2
LOG_PROMINENCE_DECADES = 0.5
# plancher de l'échelle log, relatif au maximum
LOG_FLOOR = 1e-30
SUPPRESSION_THRESHOLD = 1e-9


def channel_interference(q: Momentum3, omega: float, n: int, delta: float, s: float = 0.5) -> float:
    """
    Facteur d'interférence du canal n à l'impulsion q du balayage.

    Pour δ ≠ 0, qx est remplacé par √(qx² + qy²) (variante heuristique).
    """
    if delta != 0:
        return interference_factor_elliptic(q.qx, q.qy, omega, n, s)
    return interference_factor(q.qx, omega, n, s)


def resonance_peaks(
    curve: FrequencyCurve,
    scale: Literal["linear", "log"] = "linear",
    prominence: Optional[float] = None,
) -> List[ResonancePeak]:
    """
    Maxima locaux de la courbe et nombre de photons assigné.

    En échelle linéaire, prominence est une fraction du maximum (défaut 1e−2) ;
    en échelle log, un nombre de décades de log10 f (défaut 0.5).

    Raises:
        NoPeaks: courbe nulle ou sans maximum local
    """
    # points en échec (valeur 0.0) exclus de la courbe
    valid = ~failed_mask(curve.status)
    omegas = np.asarray(curve.omegas, dtype=np.float64)[valid]
    values = np.asarray(curve.values, dtype=np.float64)[valid]
    peak_max = float(values.max()) if len(values) else 0.0
    if peak_max <= 0:
        raise NoPeaks("Courbe de fréquence nulle")

    if scale == "log":
        signal = np.log10(np.maximum(values, LOG_FLOOR * peak_max))
        threshold = LOG_PROMINENCE_DECADES if prominence is None else prominence
    else:
        signal = values
        threshold = (LINEAR_PROMINENCE_RATIO if prominence is None else prominence) * peak_max

    indices, _ = find_peaks(signal, prominence=threshold)
    if len(indices) == 0:
        raise NoPeaks(f"Aucun pic de proéminence ≥ {threshold:.3g} ({scale})")

    q2 = curve.spec.q.norm() ** 2
    peaks = []
    for i in indices:
        omega = float(omegas[i])
        mstar = effective_mass(curve.field_config.with_updates(omega=omega))
        x = 2.0 * math.sqrt(q2 + mstar ** 2) / omega
        n = max(1, int(round(x)))
        interference = channel_interference(curve.spec.q, omega, n, curve.field_config.delta)
        peaks.append(ResonancePeak(
            omega=omega,
            value=float(values[i]),
            n_assigned=n,
            mismatch=abs(x - n),
            interference=interference,
            suppressed=interference < SUPPRESSION_THRESHOLD,
        ))

    logger.info(f"Résonances : {[(round(p.omega, 4), p.n_assigned) for p in peaks]}")
    return peaks
