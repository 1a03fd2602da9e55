"""
Module Semi-analytique
Coefficients de Popov et prédiction des anneaux/nœuds n-photon.
"""

from .popov import (
    PopovCoefficients,
    PredictionError,
    RingAbsent,
    g_derivatives,
    g_of_gamma,
    g_of_gamma_reference,
    b1_of_gamma,
    popov_coefficients,
)
from .predictor import (
    RingFeaturePrediction,
    SemianalyticConfig,
    envelope_weight,
    fn_value,
    interference_factor,
    interference_factor_elliptic,
    lattice_node_qx,
    min_photon_number,
    node_positions,
    node_qx_values,
    popov_original_factor,
    predicted_ring_profile,
    regularized_delta,
    ring_locus,
    ring_radius,
)

__all__ = [
    "PopovCoefficients",
    "PredictionError",
    "RingAbsent",
    "RingFeaturePrediction",
    "SemianalyticConfig",
    "b1_of_gamma",
    "envelope_weight",
    "fn_value",
    "g_derivatives",
    "g_of_gamma",
    "g_of_gamma_reference",
    "interference_factor",
    "interference_factor_elliptic",
    "lattice_node_qx",
    "min_photon_number",
    "node_positions",
    "node_qx_values",
    "popov_coefficients",
    "popov_original_factor",
    "predicted_ring_profile",
    "regularized_delta",
    "ring_locus",
    "ring_radius",
]
