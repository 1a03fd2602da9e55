"""
Fichier: engine/app/analysis/nodes.py
Objectif: Détection des nœuds d'interférence sur les anneaux et estimation de ω.
Responsabilités:
- Nœuds le long du cercle complet d'un anneau (grille 2D, échantillonnage périodique).
- Nœuds d'un profil 1D de demi-anneau (non périodique).
- Fréquence ω estimée par l'espacement des qx des nœuds.

Un nœud est un minimum local dont la valeur est ≤ depth_ratio × la moyenne des
maxima voisins (maxima pris sur les arcs séparant les minima candidats).
"""

import logging
import math
from typing import List, Optional

import numpy as np
from scipy.signal import find_peaks

from app.analysis.rings import failed_mask, fill_masked, grid_reach, grid_spacing, sample_circle
from app.analysis.schemas import InsufficientNodes, NodeSet, RingFeature, RingOutsideGrid
from app.cqrs.schemas import SpectrumGrid

logger = logging.getLogger(__name__)

NODE_DEPTH_RATIO = 0.1
MIN_ANGULAR_SAMPLES = 720
# minima candidats : proéminence en décades de log10 f (les profils couvrent plusieurs ordres de grandeur)
CANDIDATE_PROMINENCE_DECADES = 0.5
LOG_FLOOR = 1e-30


def _candidate_minima(f: np.ndarray, periodic: bool) -> np.ndarray:
    peak = float(f.max()) if len(f) else 0.0
    if peak <= 0:
        return np.zeros(0, dtype=int)
    signal = -np.log10(np.maximum(f, LOG_FLOOR * peak))
    if not periodic:
        minima, _ = find_peaks(signal, prominence=CANDIDATE_PROMINENCE_DECADES)
        return minima
    n = len(f)
    minima, _ = find_peaks(np.concatenate((signal, signal, signal)), prominence=CANDIDATE_PROMINENCE_DECADES)
    return np.unique(minima[(minima >= n) & (minima < 2 * n)] - n)


def _select_nodes(f: np.ndarray, candidates: np.ndarray, depth_ratio: float, periodic: bool) -> List[int]:
    """Garde les candidats assez profonds relativement aux maxima qui les entourent."""
    if len(candidates) == 0:
        return []
    n = len(f)
    nodes = []
    for k, i in enumerate(candidates):
        if periodic:
            prev_i = candidates[k - 1] if len(candidates) > 1 else i - n
            next_i = candidates[(k + 1) % len(candidates)] if len(candidates) > 1 else i + n
            left = f[np.arange(prev_i, i + 1) % n] if prev_i < i else f[np.arange(prev_i - n, i + 1) % n]
            right = f[np.arange(i, next_i + 1) % n] if next_i > i else f[np.arange(i, next_i + n + 1) % n]
        else:
            prev_i = candidates[k - 1] if k > 0 else 0
            next_i = candidates[k + 1] if k + 1 < len(candidates) else n - 1
            left = f[prev_i:i + 1]
            right = f[i:next_i + 1]
        neighbours = 0.5 * (float(left.max()) + float(right.max()))
        if neighbours > 0 and f[i] <= depth_ratio * neighbours:
            nodes.append(int(i))
    return nodes


def _merge_close(positions: np.ndarray, f: np.ndarray, indices: List[int], min_separation: float,
                 period: Optional[float] = None) -> List[int]:
    """Fusionne les nœuds plus proches que min_separation (le plus profond est gardé)."""
    kept: List[int] = []
    for i in sorted(indices, key=lambda j: positions[j]):
        if kept:
            gap = positions[i] - positions[kept[-1]]
            if gap < min_separation:
                if f[i] < f[kept[-1]]:
                    kept[-1] = i
                continue
        kept.append(i)
    if period is not None and len(kept) > 1:
        wrap_gap = positions[kept[0]] + period - positions[kept[-1]]
        if wrap_gap < min_separation:
            if f[kept[-1]] < f[kept[0]]:
                kept[0] = kept[-1]
            kept.pop()
    return kept


def _cluster_values(values: List[float], tolerance: float) -> List[float]:
    """Moyennes des groupes de valeurs triées distantes de moins de tolerance."""
    clusters: List[List[float]] = []
    for v in sorted(values):
        if clusters and v - clusters[-1][-1] <= tolerance:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [float(np.mean(c)) for c in clusters]


# ============================================================================
# Opérations publiques
# ============================================================================

def detect_nodes(
    grid: SpectrumGrid,
    ring: RingFeature,
    n_angles: Optional[int] = None,
    depth_ratio: float = NODE_DEPTH_RATIO,
) -> NodeSet:
    """
    Nœuds le long du cercle de l'anneau (interpolation bilinéaire).

    Raises:
        RingOutsideGrid: si le cercle sort de la grille
    """
    if ring.radius > grid_reach(grid):
        raise RingOutsideGrid(f"Anneau n={ring.n_assigned} (r={ring.radius:.4f}) hors de la grille")
    spacing = grid_spacing(grid)
    if n_angles is None:
        n_angles = max(MIN_ANGULAR_SAMPLES, int(math.ceil(4 * math.pi * ring.radius / spacing)))
    theta = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    # échantillons au contact d'un point en échec : complétés, jamais retenus comme nœuds
    f, masked = fill_masked(theta, sample_circle(grid, ring.radius, theta), period=2.0 * np.pi)

    candidates = _candidate_minima(f, periodic=True)
    nodes = [i for i in _select_nodes(f, candidates, depth_ratio, periodic=True) if not masked[i]]
    arc = ring.radius * theta
    nodes = _merge_close(arc, f, nodes, spacing, period=2.0 * np.pi * ring.radius)

    points = [(float(ring.radius * np.cos(theta[i])), float(ring.radius * np.sin(theta[i]))) for i in nodes]
    points.sort()
    node_qx = _cluster_values([p[0] for p in points], spacing)
    logger.info(f"Anneau n={ring.n_assigned} : {len(points)} nœud(s), qx = {[round(v, 4) for v in node_qx]}")
    return NodeSet(ring=ring, node_points=points, node_qx=node_qx)


def detect_profile_nodes(
    qx: np.ndarray,
    f: np.ndarray,
    spacing: float,
    depth_ratio: float = NODE_DEPTH_RATIO,
    status: Optional[np.ndarray] = None,
) -> List[float]:
    """
    qx triés des nœuds d'un profil 1D de demi-anneau (extrémités exclues).

    Les points en échec de `status` sont complétés par interpolation et ne
    peuvent pas être des nœuds.
    """
    qx = np.asarray(qx, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if status is not None:
        f = np.where(failed_mask(np.asarray(status)), np.nan, f)
    order = np.argsort(qx)
    qx, f = qx[order], f[order]
    f, masked = fill_masked(qx, f)
    candidates = _candidate_minima(f, periodic=False)
    nodes = [i for i in _select_nodes(f, candidates, depth_ratio, periodic=False) if not masked[i]]
    nodes = _merge_close(qx, f, nodes, spacing)
    return [float(qx[i]) for i in sorted(nodes)]


def recover_frequency(nodes: NodeSet) -> float:
    """
    Médiane des écarts consécutifs entre qx de nœuds.

    Raises:
        InsufficientNodes: moins de deux valeurs distinctes
    """
    values = sorted(set(nodes.node_qx))
    if len(values) < 2:
        raise InsufficientNodes(f"{len(values)} valeur(s) de qx, au moins 2 requises")
    return float(np.median(np.diff(values)))
