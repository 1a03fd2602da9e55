"""
Module CLI
Fichiers de run, formats de sortie et commandes de la ligne de commande.
"""

from .commands import COMMANDS, EXIT_INPUT_ERROR, EXIT_OK, EXIT_SOLVER_ERROR, EXIT_VERIFICATION_FAILED
from .loader import load_run_config, parse_run_config
from .schemas import ConfigError, InputError, RunConfig

__all__ = [
    "COMMANDS",
    "ConfigError",
    "EXIT_INPUT_ERROR",
    "EXIT_OK",
    "EXIT_SOLVER_ERROR",
    "EXIT_VERIFICATION_FAILED",
    "InputError",
    "RunConfig",
    "load_run_config",
    "parse_run_config",
]
