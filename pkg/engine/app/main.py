"""
Fichier: engine/app/main.py
Objectif: Point d'entrée principal de la ligne de commande pairspectra.
Responsabilités:
- Chargement de l'environnement (.env) et configuration du logging.
- Enregistrement des commandes (solve, sweep, scan-freq, scan-ring, predict,
  analyze, compare-oracle, overlay).
- Code de sortie du processus = code retourné par la commande.
"""

import logging
import sys

import click
from dotenv import load_dotenv

# Chargement des variables d'environnement
load_dotenv()

from app import ENGINE_NAME, __version__
from app.cli.commands import COMMANDS, EXIT_INPUT_ERROR, EXIT_OK
from app.db.config import get_log_level


# ============================================================================
# Groupe de commandes
# ============================================================================

class ExitCodeGroup(click.Group):
    """Groupe dont le code de sortie est celui retourné par la sous-commande."""

    def main(self, args=None, prog_name=None, standalone_mode=True, **extra):
        code = self._invoke_for_code(args, prog_name, **extra)
        if standalone_mode:
            sys.exit(code)
        return code

    def _invoke_for_code(self, args, prog_name, **extra) -> int:
        try:
            rv = super().main(args=args, prog_name=prog_name, standalone_mode=False, **extra)
        except click.exceptions.Exit as e:
            return e.exit_code
        except click.ClickException as e:
            e.show()
            return EXIT_INPUT_ERROR
        except click.Abort:
            click.echo("Interrompu", err=True)
            return EXIT_INPUT_ERROR
        return rv if isinstance(rv, int) else EXIT_OK


@click.group(cls=ExitCodeGroup, name=ENGINE_NAME)
@click.version_option(__version__, prog_name=ENGINE_NAME)
@click.option("-v", "--verbose", count=True, help="-v : INFO, -vv : DEBUG")
def cli(verbose: int) -> None:
    """Simulateur DHW et analyse des spectres d'impulsion de paires e⁺e⁻."""
    level = {0: get_log_level(), 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


for command in COMMANDS:
    cli.add_command(command)


def main() -> None:
    cli.main()


if __name__ == "__main__":
    main()
