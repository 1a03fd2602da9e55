"""
Module Requêtes
Gestionnaires de lecture (côté Query CQRS).
"""

from .spectrum_queries import SpectrumQueries

__all__ = ["SpectrumQueries"]
