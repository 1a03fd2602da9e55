"""
Module de Chargement des Fichiers de Run
Lecture YAML, surcharges `--set section.clé=valeur` et validation pydantic avec
numéro de ligne de la clé fautive.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import yaml
from pydantic import ValidationError

from app.cli.schemas import ConfigError, RunConfig

logger = logging.getLogger(__name__)


def parse_override(expr: str) -> tuple:
    """'a.b=v' → (['a', 'b'], valeur YAML de v)."""
    if "=" not in expr:
        raise ConfigError(f"Surcharge invalide '{expr}' (format attendu : section.clé=valeur)")
    key, raw = expr.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"Surcharge invalide '{expr}' (clé vide)")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"Valeur illisible dans '{expr}' : {e}")
    return parts, value


def apply_overrides(data: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    for expr in overrides:
        parts, value = parse_override(expr)
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = value
        logger.debug(f"Surcharge appliquée : {'.'.join(parts)} = {value!r}")
    return data


def locate_line(text: str, loc: Sequence[Any]) -> Optional[int]:
    """Ligne (1-indexée) du nœud YAML le plus profond atteint par le chemin loc."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    if node is None:
        return None
    line = None
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(part)), None)
            if match is None:
                return line if line is not None else node.start_mark.line + 1
            key_node, node = match
            line = key_node.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_run_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """
    Valide le texte YAML d'un run.

    Raises:
        ConfigError: YAML invalide ou valeur rejetée (avec numéro de ligne si connu)
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"YAML invalide : {getattr(e, 'problem', e)}", mark.line + 1 if mark else None)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("Le fichier de run doit être un objet YAML (clé: valeur)", 1)

    data = apply_overrides(data, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc", ())
        path = ".".join(str(p) for p in loc) or "(racine)"
        raise ConfigError(f"{path} : {first.get('msg')}", locate_line(text, loc))


def load_run_config(path: Path, overrides: Iterable[str] = ()) -> RunConfig:
    """Charge et valide un fichier de run."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Fichier de run illisible : {path} ({e})")
    config = parse_run_config(text, overrides)
    logger.info(f"Configuration chargée : {path} (tâche {config.task})")
    return config
