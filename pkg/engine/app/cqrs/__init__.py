"""
Module CQRS (Command Query Responsibility Segregation)
Moteur de balayage organisé en Commande/Requête avec Event Sourcing.

Ce module fournit une séparation claire entre :
- Commandes (Commands) : exécution et reprise des balayages (SweepCommands).
- Requêtes (Queries) : état et progression des runs (SpectrumQueries).
- Événements (Events) : checkpoints sous forme d'événements append-only.

Usage:
    from app.cqrs import SweepCommands, SpectrumQueries
"""

from .schemas import (
    CheckpointNotFound,
    ChecksumMismatch,
    FrequencyCurve,
    FrequencyScanSpec,
    GridSpec,
    PointStatus,
    RingCurve,
    RingScanSpec,
    SpectrumGrid,
    SweepError,
)
from .events import BaseEvent, PointsSolvedEvent, SweepCompletedEvent, SweepStartedEvent
from .queries import SpectrumQueries
from .commands import SweepCommands

__all__ = [
    # Gestionnaires
    "SweepCommands",
    "SpectrumQueries",

    # Types
    "FrequencyCurve",
    "FrequencyScanSpec",
    "GridSpec",
    "PointStatus",
    "RingCurve",
    "RingScanSpec",
    "SpectrumGrid",

    # Erreurs
    "CheckpointNotFound",
    "ChecksumMismatch",
    "SweepError",

    # Événements
    "BaseEvent",
    "PointsSolvedEvent",
    "SweepCompletedEvent",
    "SweepStartedEvent",
]
