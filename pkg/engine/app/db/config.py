"""
Module de Configuration
Configuration centralisée lue depuis l'environnement (.env via python-dotenv) :
base de checkpoints, plafond de processus et niveau de log.
"""

import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

# Chargement des variables d'environnement
load_dotenv()

DEFAULT_CHECKPOINT_PATH = "pairspectra_checkpoints.db"


def get_database_url(checkpoint_path: Optional[Union[str, Path]] = None) -> str:
    """
    Génère l'URL SQLAlchemy de la base de checkpoints.

    Priorité : CHECKPOINT_DATABASE_URL, puis le fichier SQLite donné par la
    configuration du run, puis DEFAULT_CHECKPOINT_PATH.

    Environment Variables:
        - CHECKPOINT_DATABASE_URL: URL SQLAlchemy complète (ex: sqlite:////data/ckpt.db)
    """
    url = os.getenv("CHECKPOINT_DATABASE_URL", "")
    if url:
        return url
    path = Path(checkpoint_path or DEFAULT_CHECKPOINT_PATH)
    path.parent.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{path}"


def get_max_workers(requested: Optional[int] = None) -> int:
    """
    Nombre effectif de processus : min(demandé, PAIRSPECTRA_MAX_WORKERS, nb de CPU).

    Raises:
        ValueError: si PAIRSPECTRA_MAX_WORKERS n'est pas un entier positif
    """
    cpu = os.cpu_count() or 1
    workers = cpu if requested is None else max(1, int(requested))
    cap = os.getenv("PAIRSPECTRA_MAX_WORKERS", "")
    if cap:
        try:
            cap_value = int(cap)
        except ValueError:
            raise ValueError(f"PAIRSPECTRA_MAX_WORKERS doit être un entier (reçu '{cap}')")
        if cap_value < 1:
            raise ValueError("PAIRSPECTRA_MAX_WORKERS doit être ≥ 1")
        workers = min(workers, cap_value)
    return min(workers, cpu)


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def get_log_level(default: str = "WARNING") -> str:
    """Niveau de PAIRSPECTRA_LOG_LEVEL ; une valeur inconnue retombe sur default."""
    level = os.getenv("PAIRSPECTRA_LOG_LEVEL", default).upper()
    return level if level in LOG_LEVELS else default
