"""
Module d'Analyse
Anneaux, nœuds, résonances et superposition DHW / semi-analytique.
"""

from .nodes import detect_nodes, detect_profile_nodes, recover_frequency
from .overlay import profile_overlay, relative_l2
from .resonances import resonance_peaks
from .rings import assign_photon_number, extract_rings, radial_profile, ring_profile, threshold_trend
from .schemas import (
    AnalysisError,
    GridTooSmall,
    InsufficientNodes,
    NodeSet,
    NoPeaks,
    NoRingsFound,
    OverlayReport,
    RadialProfile,
    ResonancePeak,
    RingFeature,
    RingOutsideGrid,
    ThresholdTrend,
)

__all__ = [
    "AnalysisError",
    "GridTooSmall",
    "InsufficientNodes",
    "NodeSet",
    "NoPeaks",
    "NoRingsFound",
    "OverlayReport",
    "RadialProfile",
    "ResonancePeak",
    "RingFeature",
    "RingOutsideGrid",
    "ThresholdTrend",
    "assign_photon_number",
    "detect_nodes",
    "detect_profile_nodes",
    "extract_rings",
    "profile_overlay",
    "radial_profile",
    "recover_frequency",
    "relative_l2",
    "resonance_peaks",
    "ring_profile",
    "threshold_trend",
]
