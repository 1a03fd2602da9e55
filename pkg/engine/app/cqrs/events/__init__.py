"""
Module Event Sourcing
Exporte les modèles d'événements des balayages.
"""

from .models import BaseEvent, PointsSolvedEvent, SweepCompletedEvent, SweepStartedEvent

__all__ = [
    "BaseEvent",
    "PointsSolvedEvent",
    "SweepCompletedEvent",
    "SweepStartedEvent",
]
