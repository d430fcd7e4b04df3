"""Random Cech complexes: samplers, homology and Monte Carlo experiments."""

from ._cechlab import (
    ConfigError,
    add_one_cost,
    betti_numbers,
    config_hash,
    run_experiment,
    sample_binomial,
    sample_ginibre,
    sample_poisson,
    simplex_counts,
    sphere_configuration,
    vacant_components,
)

__all__ = [
    "ConfigError",
    "add_one_cost",
    "betti_numbers",
    "config_hash",
    "run_experiment",
    "sample_binomial",
    "sample_ginibre",
    "sample_poisson",
    "simplex_counts",
    "sphere_configuration",
    "vacant_components",
]
