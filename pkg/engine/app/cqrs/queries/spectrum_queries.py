"""
Module de Requêtes Spectres (Spectrum Queries)
Gestionnaire de requêtes pour l'état des runs de balayage (Lecture seule, côté Query CQRS).

Ce module ne modifie AUCUN état : il rejoue les événements d'un run pour en
reconstruire la projection.
"""

from typing import Dict, Optional

from app.db.event_store import EventStore
from app.db.read_models import SweepProjection


class SpectrumQueries:
    """
    Côté Query CQRS - Responsabilités :
    - Reconstruire la projection d'un run (valeurs, statuts, empreinte).
    - Rapporter la progression d'un run.
    """

    def __init__(self, event_store: EventStore):
        self.event_store = event_store

    async def get_projection(self, run_id: str) -> Optional[SweepProjection]:
        """Projection du run, ou None s'il n'existe pas."""
        events = await self.event_store.get_by_aggregate(run_id)
        return SweepProjection.from_events(run_id, events)

    async def get_progress(self, run_id: str) -> Optional[Dict]:
        projection = await self.get_projection(run_id)
        if projection is None:
            return None
        return {
            "run_id": run_id,
            "kind": projection.kind,
            "n_points": projection.n_points,
            "n_done": projection.n_done,
            "completed": projection.completed,
            "spec_hash": projection.spec_hash,
        }
