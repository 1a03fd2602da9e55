"""
Module Commandes
Gestionnaires d'écriture (côté Command CQRS) : exécution des balayages.
"""

from .sweep_commands import SweepCommands, solve_batch, solve_task

__all__ = ["SweepCommands", "solve_batch", "solve_task"]
