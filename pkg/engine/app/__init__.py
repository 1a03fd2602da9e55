"""
Package PairSpectra
Simulateur DHW et outils d'analyse des spectres d'impulsion de paires e⁺e⁻.
"""

ENGINE_NAME = "pairspectra"
__version__ = "1.0.0"
