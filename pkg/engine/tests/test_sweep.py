import os
import sys
# Add engine root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
"""
Tests du moteur de balayage : grilles, reprise sur checkpoint, empreinte,
déterminisme en fonction du nombre de processus.
"""

import numpy as np
import pytest

from app.cqrs import (
    CheckpointNotFound,
    ChecksumMismatch,
    FrequencyScanSpec,
    GridSpec,
    PointStatus,
    RingScanSpec,
    SweepCommands,
)
from app.db.event_store import EventStore
from app.physics import FieldConfig, Momentum3
from app.semianalytic import RingAbsent
from app.solvers import NotLinearlyPolarized, SolverOptions, solve_point

SHORT = FieldConfig(e0=0.3, omega=0.6, tau=10.0)
OPTS = SolverOptions(t_span_factor=10.0)
SMALL_GRID = GridSpec(min1=-0.5, max1=0.5, n1=3, min2=-0.5, max2=0.5, n2=3)


@pytest.fixture
def store(tmp_path):
    return EventStore(f"sqlite:///{tmp_path / 'checkpoints.db'}")


def test_grid_momenta_row_major():
    momenta = SMALL_GRID.momenta()
    assert momenta[0] == Momentum3(qx=-0.5, qy=-0.5)
    assert momenta[1] == Momentum3(qx=-0.5, qy=0.0)
    assert momenta[3] == Momentum3(qx=0.0, qy=-0.5)
    xz = SMALL_GRID.model_copy(update={"plane": "xz", "fixed_value": 0.1})
    assert xz.momentum(0, 2) == Momentum3(qx=-0.5, qy=0.1, qz=0.5)


async def test_zero_field_grid_is_zero():
    grid = await SweepCommands().sweep_grid(FieldConfig(e0=0.0, omega=0.4, tau=10.0), SMALL_GRID, OPTS)
    assert grid.values.shape == (3, 3)
    assert np.all(grid.values == 0.0)
    assert np.all(grid.status == PointStatus.OK)
    assert grid.complete


async def test_grid_matches_direct_solves():
    grid = await SweepCommands().sweep_grid(SHORT, SMALL_GRID, OPTS)
    for i, j in ((0, 0), (1, 2), (2, 1)):
        assert grid.values[i, j] == solve_point(SMALL_GRID.momentum(i, j), SHORT, OPTS).f_final
    assert grid.spec_hash and grid.engine_version


async def test_workers_do_not_change_values():
    serial = await SweepCommands(workers=1).sweep_grid(SHORT, SMALL_GRID, OPTS)
    parallel = await SweepCommands(workers=2).sweep_grid(SHORT, SMALL_GRID, OPTS)
    assert serial.values.tobytes() == parallel.values.tobytes()
    assert serial.spec_hash == parallel.spec_hash


async def test_interrupted_run_resumes_from_checkpoint(store):
    commands = SweepCommands(event_store=store, checkpoint_every=2)
    partial = await commands.sweep_grid(SHORT, SMALL_GRID, OPTS, run_id="resume-me", point_budget=4)
    assert not partial.complete
    assert int(np.count_nonzero(partial.status == PointStatus.PENDING)) == 5

    resumed = await commands.checkpoint_resume("resume-me", SHORT, SMALL_GRID, OPTS)
    fresh = await SweepCommands().sweep_grid(SHORT, SMALL_GRID, OPTS)
    assert resumed.complete
    assert resumed.values.tobytes() == fresh.values.tobytes()


async def test_completed_run_is_not_recomputed(store):
    commands = SweepCommands(event_store=store)
    first = await commands.sweep_grid(SHORT, SMALL_GRID, OPTS, run_id="done")
    n_events = await store.count_events("done")
    again = await commands.sweep_grid(SHORT, SMALL_GRID, OPTS, run_id="done")
    assert await store.count_events("done") == n_events
    assert again.values.tobytes() == first.values.tobytes()


async def test_changed_spec_is_rejected(store):
    commands = SweepCommands(event_store=store)
    await commands.sweep_grid(SHORT, SMALL_GRID, OPTS, run_id="fixed", point_budget=1)
    with pytest.raises(ChecksumMismatch):
        await commands.sweep_grid(SHORT.with_updates(e0=0.31), SMALL_GRID, OPTS, run_id="fixed")


async def test_resume_unknown_run(store):
    with pytest.raises(CheckpointNotFound):
        await SweepCommands(event_store=store).checkpoint_resume("nope", SHORT, SMALL_GRID, OPTS)
    with pytest.raises(CheckpointNotFound):
        await SweepCommands().checkpoint_resume("nope", SHORT, SMALL_GRID, OPTS)


async def test_qve_sweep_requires_linear_polarization():
    with pytest.raises(NotLinearlyPolarized):
        await SweepCommands().sweep_grid(SHORT.with_updates(delta=0.5), SMALL_GRID, OPTS, solver="qve")


async def test_failed_points_are_flagged_not_fatal():
    opts = OPTS.model_copy(update={"max_steps": 5})
    grid = await SweepCommands().sweep_grid(SHORT, SMALL_GRID, opts)
    assert np.all(grid.status == PointStatus.STEP_LIMIT)
    assert np.all(grid.values == 0.0)
    assert grid.status_counts()["step_limit"] == 9


async def test_frequency_sweep_keeps_other_parameters():
    scan = FrequencyScanSpec(q=Momentum3(qx=0.1), omega_min=0.5, omega_max=0.7, n_omega=3)
    curve = await SweepCommands().sweep_frequency(SHORT, scan, OPTS)
    np.testing.assert_allclose(curve.omegas, [0.5, 0.6, 0.7])
    assert curve.values[1] == pytest.approx(solve_point(Momentum3(qx=0.1), SHORT, OPTS).f_final, rel=1e-6)


def test_empty_frequency_range_rejected():
    with pytest.raises(ValueError):
        FrequencyScanSpec(omega_min=0.8, omega_max=0.4, n_omega=10)


async def test_ring_sweep_with_explicit_radius():
    spec = RingScanSpec(n=4, n_samples=5, radius=0.5, refine_radius=False)
    curve = await SweepCommands().sweep_ring(SHORT, spec, OPTS)
    np.testing.assert_allclose(np.hypot(curve.qx, curve.qy), 0.5)
    assert curve.qx[0] == pytest.approx(-0.5)
    assert curve.radius == 0.5
    assert curve.values.shape == (5,)


async def test_ring_sweep_below_threshold_needs_radius():
    with pytest.raises(RingAbsent):
        await SweepCommands().sweep_ring(SHORT, RingScanSpec(n=1), OPTS)
