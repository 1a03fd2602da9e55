"""
Module de Commandes de Balayage (Sweep Commands)
Gestionnaire de commandes pour l'exécution des balayages (Opérations d'écriture, côté Command CQRS).

Chaque commande :
1. Calcule l'empreinte de la spécification (spec hash).
2. Démarre ou reprend le run (SweepStartedEvent ou rejeu des événements).
3. Résout les points en attente (processus parallèles, ordre indifférent).
4. Persiste les résultats par lots (PointsSolvedEvent) AVANT de les projeter.
5. Clôt le run (SweepCompletedEvent) et retourne le résultat assemblé.

Les résultats sont écrits à leur indice dans un tableau préalloué : la grille est
identique bit à bit quel que soit le nombre de processus.
"""

import asyncio
import logging
import math
import uuid
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from app import __version__
from app.cqrs.events.models import BaseEvent, PointsSolvedEvent, SweepCompletedEvent, SweepStartedEvent
from app.cqrs.queries.spectrum_queries import SpectrumQueries
from app.cqrs.schemas import (
    CheckpointNotFound,
    ChecksumMismatch,
    FrequencyCurve,
    FrequencyScanSpec,
    GridSpec,
    PointStatus,
    RingCurve,
    RingScanSpec,
    SolverKind,
    SpectrumGrid,
    spec_hash,
    status_counts,
)
from app.db.config import get_max_workers
from app.db.event_store import EventStore
from app.db.read_models import SweepProjection
from app.physics.field import FieldConfig, Momentum3
from app.semianalytic.popov import RingAbsent
from app.semianalytic.predictor import ring_radius
from app.solvers.base_solver import (
    NonFiniteState,
    NotLinearlyPolarized,
    SolverError,
    SolverOptions,
    StepLimitExceeded,
    StepSizeUnderflow,
)
from app.solvers.dhw import solve_point
from app.solvers.qve import qve_solve_point

logger = logging.getLogger(__name__)

SOLVERS = {"dhw": solve_point, "qve": qve_solve_point}

PointTask = Tuple[int, Momentum3, FieldConfig]
PointOutcome = Tuple[int, float, int]


# ============================================================================
# Résolution (exécutée dans les processus de travail)
# ============================================================================

def solve_task(solver: SolverKind, q: Momentum3, cfg: FieldConfig, opts: SolverOptions) -> Tuple[float, int]:
    """Résout un point ; un échec devient un statut avec la valeur 0.0."""
    try:
        result = SOLVERS[solver](q, cfg, opts)
    except StepLimitExceeded as e:
        logger.warning(f"Point abandonné : {e}")
        return 0.0, int(PointStatus.STEP_LIMIT)
    except NonFiniteState as e:
        logger.warning(f"Point abandonné : {e}")
        return 0.0, int(PointStatus.NON_FINITE)
    except StepSizeUnderflow as e:
        logger.warning(f"Point abandonné : {e}")
        return 0.0, int(PointStatus.UNDERFLOW)
    except SolverError as e:
        logger.warning(f"Point abandonné : {e}")
        return 0.0, int(PointStatus.SOLVER_ERROR)
    status = PointStatus.CLIPPED if result.clip_flag else PointStatus.OK
    return result.f_final, int(status)


def solve_batch(solver: SolverKind, tasks: List[PointTask], opts: SolverOptions) -> List[PointOutcome]:
    return [(idx, *solve_task(solver, q, cfg, opts)) for idx, q, cfg in tasks]


# ============================================================================
# Gestionnaire de Commandes (Command Handler)
# ============================================================================

class SweepCommands:
    """
    Gestionnaire de commandes pour les balayages.

    Côté Command CQRS - Responsabilités :
    - Démarrer, interrompre (point_budget) et reprendre des runs.
    - Vérifier l'empreinte de la spécification à la reprise.
    - Répartir les points sur un pool de processus.
    - Persister les événements EN PREMIER, puis mettre à jour la projection.

    Sans Event Store, le run est exécuté en mémoire (pas de reprise possible).
    """

    def __init__(
        self,
        event_store: Optional[EventStore] = None,
        workers: Optional[int] = 1,
        progress: bool = False,
        checkpoint_every: int = 256,
    ):
        if checkpoint_every < 1:
            raise ValueError("checkpoint_every doit être ≥ 1")
        self.event_store = event_store
        self.workers = workers
        self.progress = progress
        self.checkpoint_every = checkpoint_every

    # ========================================================================
    # Méthodes de Commande Publiques
    # ========================================================================

    async def sweep_grid(
        self,
        cfg: FieldConfig,
        spec: GridSpec,
        opts: Optional[SolverOptions] = None,
        solver: SolverKind = "dhw",
        run_id: Optional[str] = None,
        point_budget: Optional[int] = None,
    ) -> SpectrumGrid:
        """
        Résout f_final sur chaque point de la grille.

        Un run existant de même empreinte est repris ; un run incomplet
        (point_budget atteint) laisse des points au statut PENDING.

        Raises:
            ChecksumMismatch: si run_id existe avec une autre spécification
            NotLinearlyPolarized: solveur qve avec δ ≠ 0
        """
        return await self._grid(cfg, spec, opts, solver, run_id, point_budget, resume=False)

    async def checkpoint_resume(
        self,
        run_id: str,
        cfg: FieldConfig,
        spec: GridSpec,
        opts: Optional[SolverOptions] = None,
        solver: SolverKind = "dhw",
        point_budget: Optional[int] = None,
    ) -> SpectrumGrid:
        """
        Termine un run de grille interrompu ; un run terminé est retourné sans calcul.

        Raises:
            CheckpointNotFound: si aucun événement n'existe pour run_id
            ChecksumMismatch: si la spécification a changé
        """
        if self.event_store is None:
            raise CheckpointNotFound("Aucun Event Store configuré pour la reprise")
        return await self._grid(cfg, spec, opts, solver, run_id, point_budget, resume=True)

    async def sweep_frequency(
        self,
        cfg: FieldConfig,
        scan: FrequencyScanSpec,
        opts: Optional[SolverOptions] = None,
        solver: SolverKind = "dhw",
        run_id: Optional[str] = None,
        point_budget: Optional[int] = None,
    ) -> FrequencyCurve:
        """Une résolution par ω à impulsion fixe ; les autres paramètres de cfg sont conservés."""
        opts = opts or SolverOptions()
        self._check_solver(solver, cfg)
        omegas = scan.omegas()
        tasks = [(k, scan.q, cfg.with_updates(omega=float(w))) for k, w in enumerate(omegas)]
        payload = self._payload("frequency", cfg, opts, solver, scan.model_dump(mode="json"))
        projection = await self._run("frequency", run_id, payload, tasks, 1, solver, opts, point_budget)
        return FrequencyCurve(
            omegas=omegas,
            values=projection.values.copy(),
            status=projection.status.copy(),
            spec=scan,
            **self._provenance(projection, cfg, opts, solver),
        )

    async def sweep_ring(
        self,
        cfg: FieldConfig,
        spec: RingScanSpec,
        opts: Optional[SolverOptions] = None,
        solver: SolverKind = "dhw",
        run_id: Optional[str] = None,
    ) -> RingCurve:
        """
        Profil f le long du demi-anneau supérieur, échantillonné en angle de qx = −r à qx = +r.

        Raises:
            RingAbsent: sans rayon explicite, si l'anneau n est sous le seuil
        """
        opts = opts or SolverOptions()
        self._check_solver(solver, cfg)
        predicted = ring_radius(spec.n, cfg)
        if spec.radius is not None:
            radius = spec.radius
        else:
            if not predicted.present:
                raise RingAbsent(f"Anneau {spec.n}-photon sous le seuil, rayon explicite requis")
            radius = predicted.radius
            if spec.refine_radius:
                radius = await self._refine_radius(cfg, spec, radius, opts, solver)

        theta = np.linspace(np.pi, 0.0, spec.n_samples)
        qx = radius * np.cos(theta)
        qy = np.abs(radius * np.sin(theta))
        tasks = [(k, Momentum3(qx=float(x), qy=float(y)), cfg) for k, (x, y) in enumerate(zip(qx, qy))]
        payload = self._payload("ring", cfg, opts, solver, {**spec.model_dump(mode="json"), "radius_used": radius})
        projection = await self._run("ring", run_id, payload, tasks, 1, solver, opts)
        return RingCurve(
            qx=qx,
            qy=qy,
            values=projection.values.copy(),
            status=projection.status.copy(),
            n=spec.n,
            radius=radius,
            predicted_radius=predicted.radius,
            **self._provenance(projection, cfg, opts, solver),
        )

    # ========================================================================
    # Méthodes Privées
    # ========================================================================

    async def _grid(self, cfg, spec, opts, solver, run_id, point_budget, resume) -> SpectrumGrid:
        opts = opts or SolverOptions()
        self._check_solver(solver, cfg)
        tasks = [(k, q, cfg) for k, q in enumerate(spec.momenta())]
        payload = self._payload("grid", cfg, opts, solver, spec.model_dump(mode="json"))
        projection = await self._run(
            "grid", run_id, payload, tasks, spec.n2, solver, opts, point_budget, resume=resume
        )
        return SpectrumGrid(
            values=projection.values.reshape(spec.shape).copy(),
            status=projection.status.reshape(spec.shape).copy(),
            spec=spec,
            **self._provenance(projection, cfg, opts, solver),
        )

    async def _refine_radius(
        self, cfg: FieldConfig, spec: RingScanSpec, radius: float, opts: SolverOptions, solver: SolverKind
    ) -> float:
        """Maximum de f le long du rayon passant par le premier maximum d'interférence."""
        # fermions : nœuds en qx = kω pour n pair, maxima décalés de ω/2
        nodes_on_lattice = spec.n % 2 == 0
        qx_peak = 0.5 * cfg.omega if nodes_on_lattice else 0.0
        qx_peak = min(qx_peak, 0.5 * radius)
        direction = np.array([qx_peak, math.sqrt(radius ** 2 - qx_peak ** 2)]) / radius

        radii = np.linspace(radius - spec.refine_half_width, radius + spec.refine_half_width, spec.refine_samples)
        radii = radii[radii > 0]
        tasks = [
            (k, Momentum3(qx=float(r * direction[0]), qy=float(r * direction[1])), cfg)
            for k, r in enumerate(radii)
        ]
        payload = self._payload("radial", cfg, opts, solver, {"radii": radii.tolist()})
        projection = await self._run("radial", None, payload, tasks, 1, solver, opts, persist=False)
        values = projection.values
        if not np.any(values > 0):
            logger.warning("Affinage du rayon impossible (profil radial nul), rayon prédit conservé")
            return radius

        i = int(np.argmax(values))
        refined = float(radii[i])
        if 0 < i < len(radii) - 1:
            denom = values[i - 1] - 2.0 * values[i] + values[i + 1]
            if denom < 0:
                refined += 0.5 * (values[i - 1] - values[i + 1]) / denom * (radii[1] - radii[0])
        logger.info(f"Rayon de l'anneau {spec.n} : prédit {radius:.5f}, affiné {refined:.5f}")
        return refined

    async def _run(
        self,
        kind: str,
        run_id: Optional[str],
        payload: Dict[str, Any],
        tasks: Sequence[PointTask],
        group_size: int,
        solver: SolverKind,
        opts: SolverOptions,
        point_budget: Optional[int] = None,
        resume: bool = False,
        persist: bool = True,
    ) -> SweepProjection:
        store = self.event_store if persist else None
        digest = spec_hash(payload)
        run_id = run_id or str(uuid.uuid4())

        projection = None
        if store is not None:
            projection = await SpectrumQueries(store).get_projection(run_id)

        if projection is None:
            if resume:
                raise CheckpointNotFound(f"Aucun checkpoint pour le run {run_id}")
            projection = SweepProjection(run_id=run_id)
            await self._emit(store, projection, SweepStartedEvent(
                aggregate_id=run_id, kind=kind, spec_hash=digest, n_points=len(tasks), spec=payload,
            ))
            logger.info(f"Run {run_id} démarré : {kind}, {len(tasks)} points")
        else:
            if projection.spec_hash != digest:
                raise ChecksumMismatch(
                    f"Le run {run_id} a été démarré avec une autre spécification "
                    f"({projection.spec_hash[:12]} ≠ {digest[:12]})"
                )
            if projection.completed:
                logger.info(f"Run {run_id} déjà terminé, aucun calcul")
                return projection
            logger.info(f"Reprise du run {run_id} : {projection.n_done}/{projection.n_points} points résolus")

        pending = projection.pending_indices()
        if point_budget is not None:
            pending = pending[:max(0, point_budget)]
        batches = self._batches(pending, group_size)
        await self._execute(store, projection, tasks, batches, solver, opts)

        if projection.n_done == projection.n_points:
            await self._emit(store, projection, SweepCompletedEvent(
                aggregate_id=run_id, n_points=projection.n_points, status_counts=status_counts(projection.status),
            ))
            logger.info(f"Run {run_id} terminé")
        else:
            logger.info(f"Run {run_id} interrompu : {projection.n_done}/{projection.n_points} points résolus")
        return projection

    async def _execute(
        self,
        store: Optional[EventStore],
        projection: SweepProjection,
        tasks: Sequence[PointTask],
        batches: List[List[int]],
        solver: SolverKind,
        opts: SolverOptions,
    ) -> None:
        workers = get_max_workers(self.workers)
        buffer: List[PointOutcome] = []
        bar = tqdm(
            total=sum(len(b) for b in batches),
            disable=not self.progress,
            desc=f"{projection.kind} {projection.run_id[:8]}",
            unit="pt",
        )

        async def collect(outcomes: List[PointOutcome]) -> None:
            bar.update(len(outcomes))
            buffer.extend(outcomes)
            if len(buffer) >= self.checkpoint_every:
                await self._flush(store, projection, buffer)
                buffer.clear()

        try:
            if workers <= 1 or len(batches) <= 1:
                for batch in batches:
                    await collect(solve_batch(solver, [tasks[i] for i in batch], opts))
            else:
                loop = asyncio.get_running_loop()
                with ProcessPoolExecutor(max_workers=min(workers, len(batches))) as pool:
                    futures = [
                        loop.run_in_executor(pool, solve_batch, solver, [tasks[i] for i in batch], opts)
                        for batch in batches
                    ]
                    for next_done in asyncio.as_completed(futures):
                        await collect(await next_done)
            if buffer:
                await self._flush(store, projection, buffer)
        finally:
            bar.close()

    async def _flush(self, store: Optional[EventStore], projection: SweepProjection, outcomes: List[PointOutcome]) -> None:
        ordered = sorted(outcomes)
        await self._emit(store, projection, PointsSolvedEvent(
            aggregate_id=projection.run_id,
            indices=[int(i) for i, _, _ in ordered],
            values=[float(v) for _, v, _ in ordered],
            statuses=[int(s) for _, _, s in ordered],
        ))
        logger.info(f"Checkpoint {projection.run_id[:8]} : {projection.n_done}/{projection.n_points} points")

    @staticmethod
    async def _emit(store: Optional[EventStore], projection: SweepProjection, event: BaseEvent) -> None:
        # l'événement est persisté avant d'être projeté
        if store is not None:
            await store.append(event)
        projection.apply(event)

    @staticmethod
    def _batches(pending: np.ndarray, group_size: int) -> List[List[int]]:
        """Regroupe les indices en attente par ligne de grille (un lot par ligne)."""
        batches: Dict[int, List[int]] = {}
        for idx in pending:
            batches.setdefault(int(idx) // group_size, []).append(int(idx))
        return [batches[row] for row in sorted(batches)]

    @staticmethod
    def _check_solver(solver: SolverKind, cfg: FieldConfig) -> None:
        if solver not in SOLVERS:
            raise ValueError(f"Solveur inconnu : {solver}")
        if solver == "qve" and cfg.delta != 0:
            raise NotLinearlyPolarized(f"L'oracle QVE exige δ = 0 (reçu δ = {cfg.delta})")

    @staticmethod
    def _payload(kind: str, cfg: FieldConfig, opts: SolverOptions, solver: SolverKind, spec: Dict[str, Any]) -> Dict[str, Any]:
        return {
            "kind": kind,
            "solver": solver,
            "field": cfg.model_dump(mode="json"),
            "solver_options": opts.model_dump(mode="json"),
            "spec": spec,
        }

    @staticmethod
    def _provenance(projection: SweepProjection, cfg: FieldConfig, opts: SolverOptions, solver: SolverKind) -> Dict[str, Any]:
        return {
            "field_config": cfg,
            "solver_options": opts,
            "solver": solver,
            "run_id": projection.run_id,
            "spec_hash": projection.spec_hash,
            "engine_version": __version__,
        }
