import os
import sys
# Add engine root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
"""
Tests de l'analyse sur des spectres synthétiques construits à partir de la
géométrie prédite (anneaux gaussiens modulés par le facteur d'interférence).
"""

import math
from typing import Dict

import numpy as np
import pytest
from scipy.optimize import brentq

from app.analysis import (
    InsufficientNodes,
    NodeSet,
    NoPeaks,
    NoRingsFound,
    RingFeature,
    RingOutsideGrid,
    assign_photon_number,
    detect_nodes,
    detect_profile_nodes,
    extract_rings,
    profile_overlay,
    radial_profile,
    recover_frequency,
    relative_l2,
    resonance_peaks,
    ring_profile,
    threshold_trend,
)
from app.analysis.resonances import channel_interference
from app.cqrs.schemas import FrequencyCurve, FrequencyScanSpec, GridSpec, PointStatus, RingCurve, SpectrumGrid
from app.physics import FieldConfig, Momentum3, effective_mass
from app.semianalytic import (
    SemianalyticConfig,
    interference_factor,
    node_qx_values,
    predicted_ring_profile,
    ring_radius,
)
from app.solvers import SolverOptions

STRONG = FieldConfig(e0=0.4, omega=0.4)
WEAK = FieldConfig(e0=0.1, omega=0.4)
DESK_GRID = GridSpec(min1=-1.2, max1=1.2, n1=161, min2=-1.2, max2=1.2, n2=161)
SPACING = 0.015
RING_WIDTH = 0.03


def make_grid(values: np.ndarray, spec: GridSpec, cfg: FieldConfig) -> SpectrumGrid:
    return SpectrumGrid(
        values=values,
        status=np.zeros(spec.shape, dtype=np.uint8),
        spec=spec,
        field_config=cfg,
        solver_options=SolverOptions(),
    )


def synthetic_grid(cfg: FieldConfig, amplitudes: Dict[int, float], spec: GridSpec = DESK_GRID,
                   modulated: bool = True) -> SpectrumGrid:
    """Anneaux gaussiens aux rayons prédits, modulés par [1 + (−1)^(n+1) cos(2π qx/ω)]."""
    qx, qy = np.meshgrid(spec.axis1(), spec.axis2(), indexing="ij")
    r = np.hypot(qx, qy)
    values = np.zeros(spec.shape)
    for n, amplitude in amplitudes.items():
        radius = ring_radius(n, cfg).radius
        bump = amplitude * np.exp(-0.5 * ((r - radius) / RING_WIDTH) ** 2)
        if modulated:
            factor = np.vectorize(lambda x: interference_factor(x, cfg.omega, n))(qx)
            bump = bump * factor
        values += bump
    return make_grid(values, spec, cfg)


@pytest.fixture(scope="module")
def strong_grid() -> SpectrumGrid:
    return synthetic_grid(STRONG, {7: 1e-3, 8: 5e-4})


@pytest.fixture(scope="module")
def strong_rings(strong_grid):
    return extract_rings(radial_profile(strong_grid), STRONG)


# ============================================================================
# Anneaux
# ============================================================================

def test_rings_assigned_to_photon_numbers(strong_rings):
    assert [r.n_assigned for r in strong_rings] == [7, 8]
    for ring in strong_rings:
        assert ring.radius == pytest.approx(ring_radius(ring.n_assigned, STRONG).radius, abs=0.5 * SPACING)
        assert ring.mismatch <= 0.25


def test_assign_photon_number_is_exact_on_predicted_radius():
    for n in (7, 8, 9):
        assigned, mismatch = assign_photon_number(ring_radius(n, STRONG).radius, STRONG)
        assert assigned == n
        assert mismatch == pytest.approx(0.0, abs=1e-9)


def test_zero_grid_has_no_rings():
    grid = make_grid(np.zeros(DESK_GRID.shape), DESK_GRID, STRONG)
    with pytest.raises(NoRingsFound):
        extract_rings(radial_profile(grid), STRONG)


def test_radial_profile_step_is_half_grid_spacing(strong_grid):
    profile = radial_profile(strong_grid)
    assert 0.49 * SPACING <= profile.step <= 0.5 * SPACING + 1e-12
    assert profile.radii[-1] == pytest.approx(1.2)


# ============================================================================
# Nœuds
# ============================================================================

def test_even_ring_has_ten_nodes(strong_grid, strong_rings):
    ring8 = next(r for r in strong_rings if r.n_assigned == 8)
    nodes = detect_nodes(strong_grid, ring8)
    assert nodes.count == 10
    np.testing.assert_allclose(nodes.node_qx, [-0.8, -0.4, 0.0, 0.4, 0.8], atol=SPACING)


def test_odd_ring_has_eight_nodes(strong_grid, strong_rings):
    ring7 = next(r for r in strong_rings if r.n_assigned == 7)
    nodes = detect_nodes(strong_grid, ring7)
    assert nodes.count == 8
    np.testing.assert_allclose(nodes.node_qx, [-0.6, -0.2, 0.2, 0.6], atol=SPACING)


def with_failed_points(grid: SpectrumGrid, points) -> SpectrumGrid:
    """Copie de la grille où les points donnés sont en échec (valeur stockée 0.0)."""
    values = grid.values.copy()
    status = grid.status.copy()
    for i, j in points:
        values[i, j] = 0.0
        status[i, j] = PointStatus.STEP_LIMIT
    return SpectrumGrid(values=values, status=status, spec=grid.spec,
                        field_config=grid.field_config, solver_options=grid.solver_options)


def nearest_index(spec: GridSpec, q1: float, q2: float):
    return int(np.abs(spec.axis1() - q1).argmin()), int(np.abs(spec.axis2() - q2).argmin())


def test_failed_point_on_ring_is_not_a_node(strong_grid, strong_rings):
    ring8 = next(r for r in strong_rings if r.n_assigned == 8)
    # maximum de modulation de l'anneau pair : qx = 0.6
    crest = nearest_index(DESK_GRID, 0.6, math.sqrt(ring8.radius ** 2 - 0.36))
    damaged = with_failed_points(strong_grid, [crest])
    nodes = detect_nodes(damaged, ring8)
    assert nodes.count == 10
    np.testing.assert_allclose(nodes.node_qx, [-0.8, -0.4, 0.0, 0.4, 0.8], atol=SPACING)


def test_radial_profile_ignores_failed_points():
    flat = make_grid(np.ones(DESK_GRID.shape), DESK_GRID, STRONG)
    damaged = with_failed_points(flat, [nearest_index(DESK_GRID, 0.3, 0.0), nearest_index(DESK_GRID, -0.5, 0.5)])
    profile = radial_profile(damaged)
    np.testing.assert_allclose(profile.mean_f, 1.0, rtol=1e-12)
    np.testing.assert_allclose(profile.max_f, 1.0, rtol=1e-12)


def test_ring_profile_flags_failed_samples(strong_grid, strong_rings):
    ring7 = next(r for r in strong_rings if r.n_assigned == 7)
    damaged = with_failed_points(strong_grid, [nearest_index(DESK_GRID, 0.0, ring7.radius)])
    curve = ring_profile(damaged, ring7.radius)
    flagged = curve.status == PointStatus.SOLVER_ERROR
    assert 0 < flagged.sum() < 10
    assert np.all(curve.values[flagged] == 0.0)


def test_recovered_frequency_from_grid(strong_grid, strong_rings):
    for ring in strong_rings:
        assert recover_frequency(detect_nodes(strong_grid, ring)) == pytest.approx(0.4, abs=SPACING)


def test_unmodulated_ring_has_no_nodes():
    grid = synthetic_grid(STRONG, {8: 1e-3}, modulated=False)
    ring = extract_rings(radial_profile(grid), STRONG)[0]
    assert detect_nodes(grid, ring).count == 0


def test_ring_outside_grid():
    grid = synthetic_grid(STRONG, {7: 1e-3})
    with pytest.raises(RingOutsideGrid):
        detect_nodes(grid, RingFeature(radius=1.5, n_assigned=9, peak_height=1.0))


def test_recover_frequency_from_predicted_nodes():
    ring = RingFeature(radius=1.0, n_assigned=8, peak_height=1.0)
    even = NodeSet(ring=ring, node_qx=node_qx_values(8, STRONG))
    odd = NodeSet(ring=ring, node_qx=node_qx_values(7, STRONG))
    assert recover_frequency(even) == pytest.approx(0.4, abs=1e-12)
    assert recover_frequency(odd) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(InsufficientNodes):
        recover_frequency(NodeSet(ring=ring, node_qx=[0.2]))


def test_ring_profile_samples_half_circle(strong_grid, strong_rings):
    ring8 = next(r for r in strong_rings if r.n_assigned == 8)
    curve = ring_profile(strong_grid, ring8.radius, n_samples=361)
    assert curve.n == 8
    assert curve.qx[0] == pytest.approx(-ring8.radius)
    assert np.all(curve.qy >= 0)
    nodes = detect_profile_nodes(curve.qx, curve.values, SPACING)
    np.testing.assert_allclose(nodes, [-0.8, -0.4, 0.0, 0.4, 0.8], atol=SPACING)


def test_node_positions_do_not_depend_on_field_strength():
    detected = []
    for e0 in (0.1, 0.2, 0.3, 0.4):
        cfg = STRONG.with_updates(e0=e0)
        qx, _, values = predicted_ring_profile(8, cfg, n_samples=721)
        # fenêtre commune à tous les rayons (le nœud qx = ±1.2 n'existe que pour e0 = 0.1)
        detected.append([v for v in detect_profile_nodes(qx, values, SPACING) if abs(v) <= 0.8 + SPACING])
    assert len(detected[0]) == 5
    for nodes in detected[1:]:
        assert len(nodes) == len(detected[0])
        np.testing.assert_allclose(nodes, detected[0], atol=SPACING)


# ============================================================================
# Tendance du seuil
# ============================================================================

def test_threshold_trend_with_shrinking_rings():
    grids = []
    for delta, shrink in ((0.0, 0.0), (0.5, 0.02), (1.0, 0.06)):
        spec = DESK_GRID
        qx, qy = np.meshgrid(spec.axis1(), spec.axis2(), indexing="ij")
        radius = ring_radius(7, STRONG).radius - shrink
        values = np.exp(-0.5 * ((np.hypot(qx, qy) - radius) / RING_WIDTH) ** 2)
        grids.append((delta, make_grid(values, spec, STRONG.with_updates(delta=delta))))

    trend = threshold_trend(list(reversed(grids)))
    assert [d for d, _ in trend.entries] == [0.0, 0.5, 1.0]
    assert trend.non_increasing
    assert trend.entries[0][1] - trend.entries[2][1] == pytest.approx(0.06, abs=SPACING)


def test_threshold_trend_flat_and_single():
    grid = synthetic_grid(STRONG, {7: 1e-3}, modulated=False)
    assert threshold_trend([(0.0, grid), (1.0, grid)]).non_increasing
    assert len(threshold_trend([(0.0, grid)]).entries) == 1


# ============================================================================
# Résonances
# ============================================================================

def resonance_omega(n: int, e0: float, q2: float = 0.0) -> float:
    """Solution de n·ω = 2√(q² + m*(ω)²)."""
    return brentq(
        lambda w: n * w - 2.0 * math.sqrt(q2 + effective_mass(FieldConfig(e0=e0, omega=w)) ** 2),
        0.05, 3.0,
    )


def frequency_curve(peaks: Dict[int, float], cfg: FieldConfig, q: Momentum3, n_omega: int = 2001) -> FrequencyCurve:
    spec = FrequencyScanSpec(q=q, omega_min=0.25, omega_max=2.2, n_omega=n_omega)
    omegas = spec.omegas()
    q2 = q.norm() ** 2
    values = np.full(n_omega, 1e-12)
    for n, height in peaks.items():
        center = resonance_omega(n, cfg.e0, q2)
        values += height / (1.0 + ((omegas - center) / 2e-3) ** 2)
    return FrequencyCurve(
        omegas=omegas,
        values=values,
        status=np.zeros(n_omega, dtype=np.uint8),
        spec=spec,
        field_config=cfg,
        solver_options=SolverOptions(),
    )


def test_odd_only_resonances_at_zero_momentum():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    curve = frequency_curve({5: 1e-6, 7: 1e-8, 3: 1e-4}, cfg, Momentum3())
    peaks = resonance_peaks(curve, scale="log")
    assert sorted(p.n_assigned for p in peaks) == [3, 5, 7]
    assert all(p.n_assigned % 2 == 1 for p in peaks)


def test_even_resonance_assigned_at_finite_momentum():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    q = Momentum3(qx=0.5)
    curve = frequency_curve({4: 1e-5, 5: 1e-5}, cfg, q)
    assert sorted(p.n_assigned for p in resonance_peaks(curve)) == [4, 5]


def test_linear_scale_drops_small_peaks():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    curve = frequency_curve({3: 1e-4, 7: 1e-8}, cfg, Momentum3())
    assert [p.n_assigned for p in resonance_peaks(curve, scale="linear")] == [3]


def test_flat_curve_has_no_peaks():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    curve = frequency_curve({}, cfg, Momentum3())
    with pytest.raises(NoPeaks):
        resonance_peaks(curve)


def test_failed_points_excluded_from_peaks():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    curve = frequency_curve({3: 1e-4}, cfg, Momentum3())
    center = int(np.argmax(curve.values))
    curve.values[center] = 0.0
    curve.status[center] = PointStatus.STEP_LIMIT
    peaks = resonance_peaks(curve)
    assert [p.n_assigned for p in peaks] == [3]


def test_odd_peaks_at_zero_momentum_are_not_suppressed():
    cfg = FieldConfig(e0=0.1, omega=0.4)
    peaks = resonance_peaks(frequency_curve({3: 1e-4, 5: 1e-6}, cfg, Momentum3()), scale="log")
    for peak in peaks:
        assert peak.interference == pytest.approx(2.0)
        assert not peak.suppressed


@pytest.mark.parametrize("delta", [0.0, 0.5, 1.0])
def test_even_channels_vanish_at_zero_momentum(delta):
    for n in (2, 4, 6):
        assert channel_interference(Momentum3(), 0.4, n, delta) == pytest.approx(0.0, abs=1e-15)
    for n in (1, 3, 5):
        assert channel_interference(Momentum3(), 0.4, n, delta) == pytest.approx(2.0)


def test_elliptic_channel_uses_transverse_radius():
    q = Momentum3(qx=0.12, qy=0.16)
    assert channel_interference(q, 0.4, 4, delta=1.0) == pytest.approx(interference_factor(0.2, 0.4, 4))
    assert channel_interference(q, 0.4, 4, delta=0.0) == pytest.approx(interference_factor(0.12, 0.4, 4))


# ============================================================================
# Superposition semi-analytique
# ============================================================================

def ring_curve_from_model(n: int, cfg: FieldConfig, sconf: SemianalyticConfig, n_samples: int = 181) -> RingCurve:
    qx, qy, values = predicted_ring_profile(n, cfg, sconf, n_samples=n_samples)
    return RingCurve(
        qx=qx,
        qy=qy,
        values=values,
        status=np.full(n_samples, PointStatus.OK, dtype=np.uint8),
        n=n,
        radius=ring_radius(n, cfg).radius,
        field_config=cfg,
        solver_options=SolverOptions(),
    )


@pytest.mark.parametrize("n", [6, 7, 8])
def test_overlay_of_model_with_itself(n):
    sconf = SemianalyticConfig(q_factor=0.88)
    report = profile_overlay(ring_curve_from_model(n, WEAK, sconf), n, WEAK, sconf)
    assert report.nodes_match
    assert report.best_variant == "as-printed"
    assert report.deviations["as-printed"] == pytest.approx(0.0, abs=1e-12)


def test_overlay_reports_node_mismatch():
    sconf = SemianalyticConfig()
    curve = ring_curve_from_model(8, WEAK, sconf)
    report = profile_overlay(curve, 7, WEAK, sconf)
    assert not report.nodes_match


def test_relative_l2():
    ref = np.array([0.0, 1.0, 2.0])
    assert relative_l2(ref, 3.0 * ref) == 0.0
    assert relative_l2(ref, np.zeros(3)) == math.inf
