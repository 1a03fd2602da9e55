"""
Implémentation Event Store
Gère la persistance et la récupération des événements de balayage (checkpoints).
"""

from sqlalchemy import Column, Integer, String, DateTime, Text, create_engine
from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import declarative_base, sessionmaker
from typing import Dict, List, Optional
import json
import logging

from app.cqrs.events.models import BaseEvent

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration Base de Données
# ============================================================================

Base = declarative_base()


class EventModel(Base):
    """
    Modèle SQLAlchemy pour le stockage des événements.

    Append-only : chaque ligne est un événement d'un run (aggregate_id = run_id).
    L'ordre de rejeu est celui de la clé auto-incrémentée.
    """
    __tablename__ = "events"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    event_id = Column(String(36), unique=True, nullable=False, index=True)
    aggregate_id = Column(String(64), nullable=False, index=True)
    event_type = Column(String(100), nullable=False, index=True)
    timestamp = Column(DateTime, nullable=False)
    data = Column(Text, nullable=False)  # Données événement sérialisées JSON
    version = Column(Integer, nullable=False, default=1)


# ============================================================================
# Classe Event Store
# ============================================================================

class EventStore:
    """
    Event Store pour persister et récupérer les événements de balayage.

    Responsabilités:
    - Ajouter de nouveaux événements au store (append-only)
    - Récupérer les événements par run (rejeu du checkpoint)
    - Assurer l'immutabilité des événements une fois stockés
    """

    def __init__(self, database_url: Optional[str] = None):
        """
        Initialise l'Event Store.

        Args:
            database_url: URL SQLAlchemy ; par défaut celle de app.db.config
        """
        from app.db.config import get_database_url

        self.database_url = database_url or get_database_url()
        self.engine = create_engine(self.database_url, echo=False)
        self.SessionLocal = sessionmaker(bind=self.engine)

        # Créer les tables si elles n'existent pas
        Base.metadata.create_all(bind=self.engine)

    async def append(self, event: BaseEvent) -> None:
        """
        Ajouter un nouvel événement à l'event store.

        Raises:
            ValueError: Si un événement avec le même event_id existe déjà
        """
        session = self.SessionLocal()
        try:
            session.add(EventModel(
                event_id=event.event_id,
                aggregate_id=event.aggregate_id,
                event_type=event.event_type,
                timestamp=event.timestamp,
                data=json.dumps(event.data, separators=(",", ":")),
                version=event.version,
            ))
            session.commit()
        except IntegrityError:
            session.rollback()
            raise ValueError(f"L'événement avec ID {event.event_id} existe déjà")
        except Exception as e:
            session.rollback()
            logger.error(f"Échec d'écriture du checkpoint ({event.event_type}, run {event.aggregate_id}) : {e}")
            raise
        finally:
            session.close()

    async def get_by_aggregate(self, aggregate_id: str) -> List[BaseEvent]:
        """
        Récupérer tous les événements d'un run, dans l'ordre d'insertion.
        """
        session = self.SessionLocal()
        try:
            event_models = (
                session.query(EventModel)
                .filter_by(aggregate_id=aggregate_id)
                .order_by(EventModel.id)
                .all()
            )
            return [self._to_event(model) for model in event_models]
        finally:
            session.close()

    async def count_events(self, aggregate_id: Optional[str] = None) -> int:
        """
        Compter les événements dans le store.
        """
        session = self.SessionLocal()
        try:
            query = session.query(EventModel)

            if aggregate_id:
                query = query.filter_by(aggregate_id=aggregate_id)

            return query.count()

        finally:
            session.close()

    @staticmethod
    def _to_event(model: EventModel) -> BaseEvent:
        return BaseEvent(
            event_id=model.event_id,
            aggregate_id=model.aggregate_id,
            event_type=model.event_type,
            timestamp=model.timestamp,
            data=json.loads(model.data),
            version=model.version
        )


# ============================================================================
# Instances Event Store
# ============================================================================

# Une instance par URL de base
_event_store_instances: Dict[str, EventStore] = {}


def get_event_store(database_url: Optional[str] = None) -> EventStore:
    """
    Obtenir ou créer l'event store associé à une URL.
    """
    from app.db.config import get_database_url

    url = database_url or get_database_url()
    if url not in _event_store_instances:
        _event_store_instances[url] = EventStore(url)
    return _event_store_instances[url]
