"""
Fichier: engine/app/cqrs/events/models.py
Objectif: Modèles d'événements pour l'Event Sourcing des balayages.
Responsabilités:
- Définir les événements qui capturent la progression d'un run (agrégat = run_id).
- Le projet de grille est reconstruit en rejouant ces événements (checkpoint).
"""

from pydantic import BaseModel, ConfigDict, Field
from datetime import datetime, timezone
from typing import Dict, Any, List, Literal
import uuid


def _utcnow() -> datetime:
    # horodatage UTC naïf (colonne DateTime SQLite)
    return datetime.now(timezone.utc).replace(tzinfo=None)


class BaseEvent(BaseModel):
    """
    Classe de base pour tous les événements de balayage.

    Les champs spécifiques sont recopiés dans `data`, seule partie sérialisée
    dans l'Event Store.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    event_id: str = Field(default_factory=lambda: str(uuid.uuid4()))
    aggregate_id: str  # run_id du balayage
    event_type: str
    timestamp: datetime = Field(default_factory=_utcnow)
    version: int = Field(default=1)
    data: Dict[str, Any] = Field(default_factory=dict)


class SweepStartedEvent(BaseEvent):
    """
    Événement levé au démarrage d'un run.
    """
    event_type: Literal["SweepStarted"] = "SweepStarted"

    kind: str
    spec_hash: str
    n_points: int
    spec: Dict[str, Any] = Field(default_factory=dict)

    def __init__(self, **data):
        super().__init__(**data)
        if not self.data:
            self.data = {
                "kind": self.kind,
                "spec_hash": self.spec_hash,
                "n_points": self.n_points,
                "spec": self.spec,
            }


class PointsSolvedEvent(BaseEvent):
    """
    Événement levé à chaque vidage de checkpoint : indices aplatis, valeurs et statuts.
    """
    event_type: Literal["PointsSolved"] = "PointsSolved"

    indices: List[int]
    values: List[float]
    statuses: List[int]

    def __init__(self, **data):
        super().__init__(**data)
        if not self.data:
            self.data = {
                "indices": self.indices,
                "values": self.values,
                "statuses": self.statuses,
            }


class SweepCompletedEvent(BaseEvent):
    """
    Événement levé lorsque tous les points du run sont résolus.
    """
    event_type: Literal["SweepCompleted"] = "SweepCompleted"

    n_points: int
    status_counts: Dict[str, int] = Field(default_factory=dict)

    def __init__(self, **data):
        super().__init__(**data)
        if not self.data:
            self.data = {
                "n_points": self.n_points,
                "status_counts": self.status_counts,
            }
