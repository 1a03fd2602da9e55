"""
Module d'Analyse des Anneaux
Profils radiaux (moyenne/maximum azimutaux), extraction des anneaux n-photon,
échantillonnage d'un spectre le long d'un demi-anneau et tendance du seuil en δ.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import find_peaks

from app.analysis.schemas import (
    GridTooSmall,
    NoRingsFound,
    RadialProfile,
    RingFeature,
    RingOutsideGrid,
    ThresholdTrend,
)
from app.cqrs.schemas import FAILED_STATUSES, PointStatus, RingCurve, SpectrumGrid
from app.physics.field import FieldConfig, effective_mass

logger = logging.getLogger(__name__)

RING_PROMINENCE_RATIO = 1e-3
ASSIGNMENT_TOLERANCE = 0.25


# ============================================================================
# Échantillonnage de la grille
# ============================================================================

def failed_mask(status: np.ndarray) -> np.ndarray:
    """Points en échec (valeur stockée 0.0, sans signification physique)."""
    return np.isin(status, FAILED_STATUSES)


def grid_interpolator(grid: SpectrumGrid) -> RegularGridInterpolator:
    """Interpolation bilinéaire de f sur (axe 1, axe 2) ; NaN au contact d'un point en échec."""
    values = np.where(failed_mask(grid.status), np.nan, grid.values)
    return RegularGridInterpolator((grid.axis1, grid.axis2), values, method="linear")


def fill_masked(position: np.ndarray, f: np.ndarray, period: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Remplace les échantillons non finis par interpolation linéaire de leurs voisins.

    Retourne (f complété, masque des échantillons remplacés). Sans échantillon
    valide, f vaut 0 partout.
    """
    f = np.asarray(f, dtype=np.float64)
    masked = ~np.isfinite(f)
    if not masked.any():
        return f, masked
    if masked.all():
        return np.zeros_like(f), masked
    filled = f.copy()
    filled[masked] = np.interp(position[masked], position[~masked], f[~masked], period=period)
    return filled, masked


def grid_spacing(grid: SpectrumGrid) -> float:
    """Plus petit pas de la grille."""
    return float(min(np.diff(grid.axis1).min(), np.diff(grid.axis2).min()))


def grid_reach(grid: SpectrumGrid) -> float:
    """Rayon du plus grand cercle centré à l'origine contenu dans la grille."""
    spec = grid.spec
    return min(-spec.min1, spec.max1, -spec.min2, spec.max2)


def _check_grid(grid: SpectrumGrid) -> None:
    spec = grid.spec
    if spec.n1 < 3 or spec.n2 < 3:
        raise GridTooSmall(f"Grille {spec.n1}×{spec.n2} trop petite (≥ 3×3 requis)")
    if grid_reach(grid) <= 0:
        raise GridTooSmall("La grille ne couvre pas l'origine")


def sample_circle(grid: SpectrumGrid, radius: float, theta: np.ndarray) -> np.ndarray:
    """f interpolé aux points (r cos θ, r sin θ) du plan de la grille."""
    if radius > grid_reach(grid) * (1.0 + 1e-12):
        raise RingOutsideGrid(f"Cercle de rayon {radius:.4f} hors de la grille (portée {grid_reach(grid):.4f})")
    points = np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))
    reach = grid_reach(grid)
    np.clip(points, -reach, reach, out=points)
    return grid_interpolator(grid)(points)


# ============================================================================
# Profil radial et anneaux
# ============================================================================

def radial_profile(grid: SpectrumGrid, n_radii: Optional[int] = None, n_angles: int = 360) -> RadialProfile:
    """
    Moyenne et maximum angulaires de f sur des cercles concentriques.

    Par défaut le pas radial vaut la moitié du pas de grille.

    Raises:
        GridTooSmall: grille sans l'origine ou de moins de 3×3 points
    """
    _check_grid(grid)
    reach = grid_reach(grid)
    if n_radii is None:
        n_radii = int(math.ceil(reach / (0.5 * grid_spacing(grid)))) + 1
    radii = np.linspace(0.0, reach, n_radii)
    theta = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)

    interp = grid_interpolator(grid)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    points = np.column_stack(((rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()))
    np.clip(points, -reach, reach, out=points)
    samples = interp(points).reshape(n_radii, n_angles)
    valid = np.isfinite(samples)
    n_valid = valid.sum(axis=1)
    mean_f = np.where(valid, samples, 0.0).sum(axis=1) / np.maximum(n_valid, 1)
    max_f = np.where(valid, samples, -np.inf).max(axis=1)

    return RadialProfile(
        radii=radii,
        mean_f=np.clip(mean_f, 0.0, None),
        max_f=np.where(n_valid > 0, max_f, 0.0),
    )


def assign_photon_number(radius: float, cfg: FieldConfig) -> Tuple[int, float]:
    """n = round(2√(r² + m*²)/ω) et l'écart |2√(r² + m*²)/ω − n|."""
    x = 2.0 * math.sqrt(radius ** 2 + effective_mass(cfg) ** 2) / cfg.omega
    n = max(1, int(round(x)))
    return n, abs(x - n)


def extract_rings(
    profile: RadialProfile,
    cfg: FieldConfig,
    prominence_ratio: float = RING_PROMINENCE_RATIO,
    tolerance: float = ASSIGNMENT_TOLERANCE,
) -> List[RingFeature]:
    """
    Maxima locaux du profil angulaire maximal, assignés à un nombre de photons.

    Un seul anneau est conservé par n (le plus haut). Résultat trié par rayon.

    Raises:
        NoRingsFound: aucun pic, ou aucun pic assignable
    """
    max_f = profile.max_f
    peak_max = float(max_f.max()) if len(max_f) else 0.0
    if peak_max <= 0:
        raise NoRingsFound("Profil radial nul")

    peaks, _ = find_peaks(max_f, prominence=prominence_ratio * peak_max)
    step = profile.step
    by_n = {}
    for i in peaks:
        radius = float(profile.radii[i])
        # raffinement parabolique sur trois échantillons
        denom = max_f[i - 1] - 2.0 * max_f[i] + max_f[i + 1]
        if denom < 0:
            radius += 0.5 * (max_f[i - 1] - max_f[i + 1]) / denom * step
        if radius <= 0:
            continue
        n, mismatch = assign_photon_number(radius, cfg)
        if mismatch > tolerance:
            logger.debug(f"Pic en r={radius:.4f} rejeté (écart {mismatch:.3f} pour n={n})")
            continue
        ring = RingFeature(radius=radius, n_assigned=n, peak_height=float(max_f[i]), mismatch=mismatch)
        if n not in by_n or ring.peak_height > by_n[n].peak_height:
            by_n[n] = ring

    if not by_n:
        raise NoRingsFound(f"{len(peaks)} pic(s) radiaux, aucun assignable à un nombre de photons")
    rings = sorted(by_n.values(), key=lambda r: r.radius)
    logger.info(f"Anneaux détectés : {[(r.n_assigned, round(r.radius, 4)) for r in rings]}")
    return rings


def ring_profile(
    grid: SpectrumGrid,
    radius: float,
    n: Optional[int] = None,
    n_samples: int = 181,
) -> RingCurve:
    """
    Profil f le long du demi-anneau supérieur (de q1 = −r à q1 = +r), interpolé sur la grille.

    Les échantillons au contact d'un point en échec portent SOLVER_ERROR et valent 0.0.
    """
    _check_grid(grid)
    theta = np.linspace(np.pi, 0.0, n_samples)
    samples = sample_circle(grid, radius, theta)
    masked = ~np.isfinite(samples)
    values = np.clip(np.where(masked, 0.0, samples), 0.0, None)
    status = np.where(masked, PointStatus.SOLVER_ERROR, PointStatus.OK).astype(np.uint8)
    if n is None:
        n, _ = assign_photon_number(radius, grid.field_config)
    return RingCurve(
        qx=radius * np.cos(theta),
        qy=np.abs(radius * np.sin(theta)),
        values=values,
        status=status,
        n=n,
        radius=radius,
        field_config=grid.field_config,
        solver_options=grid.solver_options,
        solver=grid.solver,
        run_id=grid.run_id,
        spec_hash=grid.spec_hash,
        engine_version=grid.engine_version,
    )


def threshold_trend(grids: Sequence[Tuple[float, SpectrumGrid]]) -> ThresholdTrend:
    """
    Rayon du plus petit anneau pour chaque δ, trié par δ croissant.

    Raises:
        NoRingsFound: propagée depuis extract_rings
    """
    entries = []
    for delta, grid in sorted(grids, key=lambda item: item[0]):
        rings = extract_rings(radial_profile(grid), grid.field_config)
        entries.append((float(delta), rings[0].radius))
    radii = [r for _, r in entries]
    non_increasing = all(b <= a for a, b in zip(radii, radii[1:]))
    return ThresholdTrend(entries=entries, non_increasing=non_increasing)
