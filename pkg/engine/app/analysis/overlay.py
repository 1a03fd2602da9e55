"""
Module de Superposition (Overlay)
Compare un profil d'anneau DHW au poids semi-analytique f_n évalué aux mêmes
points : coïncidence des nœuds et écart L2 relatif après normalisation au pic,
pour chaque variante de l'enveloppe.
"""

import logging
import math
from typing import Dict, Optional

import numpy as np

from app.analysis.nodes import detect_profile_nodes
from app.analysis.rings import failed_mask
from app.analysis.schemas import OverlayReport
from app.cqrs.schemas import RingCurve
from app.physics.field import FieldConfig, Momentum3
from app.semianalytic.predictor import SemianalyticConfig, fn_value, lattice_node_qx

logger = logging.getLogger(__name__)

ENVELOPE_VARIANTS = ("as-printed", "bracketed")


def _normalized(values: np.ndarray) -> Optional[np.ndarray]:
    peak = float(np.max(values)) if len(values) else 0.0
    return values / peak if peak > 0 else None


def relative_l2(reference: np.ndarray, candidate: np.ndarray) -> float:
    """‖ref − cand‖₂ / ‖ref‖₂ après normalisation des deux profils à leur pic."""
    ref = _normalized(np.asarray(reference, dtype=np.float64))
    cand = _normalized(np.asarray(candidate, dtype=np.float64))
    if ref is None or cand is None:
        return math.inf
    return float(np.linalg.norm(ref - cand) / np.linalg.norm(ref))


def profile_overlay(
    curve: RingCurve,
    n: int,
    cfg: FieldConfig,
    sconf: Optional[SemianalyticConfig] = None,
    spacing: Optional[float] = None,
) -> OverlayReport:
    """
    Superpose le profil DHW `curve` et f_n sur le même lieu d'anneau.

    spacing : tolérance de coïncidence des nœuds (défaut : deux pas d'arc du profil).
    """
    sconf = sconf or SemianalyticConfig()
    if spacing is None:
        spacing = 2.0 * math.pi * curve.radius / max(len(curve.qx) - 1, 1)

    dhw_nodes = detect_profile_nodes(curve.qx, curve.values, spacing, status=curve.status)
    valid = ~failed_mask(curve.status)
    # extrémités qy = 0 exclues comme pour le profil
    predicted = [
        q for q in lattice_node_qx(cfg.omega, n, curve.radius, sconf.spin)
        if abs(q) < curve.radius - 0.5 * spacing
    ]

    deviations_nodes = [min(abs(p - d) for d in dhw_nodes) for p in predicted] if dhw_nodes else []
    max_dev = max(deviations_nodes) if deviations_nodes else None
    nodes_match = (
        len(dhw_nodes) == len(predicted)
        and (max_dev is None or max_dev <= spacing)
    )

    deviations: Dict[str, float] = {}
    for variant in ENVELOPE_VARIANTS:
        conf = sconf.model_copy(update={"envelope_variant": variant, "evaluation_mode": "ring-locus"})
        model = np.array([
            fn_value(Momentum3(qx=float(x), qy=float(y)), n, cfg, conf)
            for x, y in zip(curve.qx, curve.qy)
        ])
        deviations[variant] = relative_l2(curve.values[valid], model[valid])
    best = min(ENVELOPE_VARIANTS, key=lambda v: deviations[v])

    logger.info(
        f"Overlay n={n} : nœuds DHW {len(dhw_nodes)} / prédits {len(predicted)}, "
        f"écarts L2 {deviations}, meilleure variante {best}"
    )
    return OverlayReport(
        n=n,
        radius=curve.radius,
        dhw_node_qx=dhw_nodes,
        predicted_node_qx=predicted,
        max_node_deviation=max_dev,
        nodes_match=nodes_match,
        deviations=deviations,
        best_variant=best,
    )
