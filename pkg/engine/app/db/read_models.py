"""
Modèles de Lecture (Read Models)
Projection d'un run de balayage reconstruite par rejeu des événements.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import numpy as np

from app.cqrs.events.models import BaseEvent
from app.cqrs.schemas import PointStatus

logger = logging.getLogger(__name__)


@dataclass
class SweepProjection:
    """
    État courant d'un run : valeurs et statuts aplatis, empreinte de la spécification.

    Les points non encore résolus ont le statut PENDING et la valeur 0.0.
    """
    run_id: str
    kind: str = ""
    spec_hash: str = ""
    n_points: int = 0
    spec: Dict[str, Any] = field(default_factory=dict)
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    status: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    completed: bool = False

    @classmethod
    def from_events(cls, run_id: str, events: Iterable[BaseEvent]) -> Optional["SweepProjection"]:
        """Rejoue les événements ; None si le run n'a jamais démarré."""
        projection: Optional[SweepProjection] = None
        for event in events:
            if event.event_type == "SweepStarted":
                projection = cls(run_id=run_id)
            if projection is None:
                logger.warning(f"Événement {event.event_type} ignoré avant SweepStarted ({run_id})")
                continue
            projection.apply(event)
        return projection

    def apply(self, event: BaseEvent) -> None:
        data = event.data
        if event.event_type == "SweepStarted":
            self.kind = data["kind"]
            self.spec_hash = data["spec_hash"]
            self.n_points = int(data["n_points"])
            self.spec = data.get("spec", {})
            self.values = np.zeros(self.n_points, dtype=np.float64)
            self.status = np.full(self.n_points, PointStatus.PENDING, dtype=np.uint8)
            self.completed = False
        elif event.event_type == "PointsSolved":
            idx = np.asarray(data["indices"], dtype=np.int64)
            self.values[idx] = np.asarray(data["values"], dtype=np.float64)
            self.status[idx] = np.asarray(data["statuses"], dtype=np.uint8)
        elif event.event_type == "SweepCompleted":
            self.completed = True
        else:
            logger.warning(f"Type d'événement inconnu : {event.event_type}")

    @property
    def n_done(self) -> int:
        return int(np.count_nonzero(self.status != PointStatus.PENDING))

    def pending_indices(self) -> np.ndarray:
        return np.flatnonzero(self.status == PointStatus.PENDING)
