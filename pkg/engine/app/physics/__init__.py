"""
Module Physique
Convention d'unités et modèle du champ laser.
"""

from .field import (
    DerivedParams,
    FieldConfig,
    Momentum3,
    derived_params,
    effective_mass,
    electric_field,
    field_components,
    keldysh_gamma,
    laser_period,
    vector_potential_tail,
)

__all__ = [
    "DerivedParams",
    "FieldConfig",
    "Momentum3",
    "derived_params",
    "effective_mass",
    "electric_field",
    "field_components",
    "keldysh_gamma",
    "laser_period",
    "vector_potential_tail",
]
