"""Benchmark ensembles: analytic short column and inviscid Burgers."""

from .burgers import (
    BurgersFOM,
    BurgersROM,
    PODModes,
    SnapshotBasis,
    build_pod_rom,
    burgers_ensemble,
    burgers_input_spec,
    burgers_solve,
    fit_pod,
    rom_advance,
)
from .published import published_statistics
from .short_column import short_column_eval, short_column_input_spec, short_column_models

__all__ = [
    "BurgersFOM",
    "BurgersROM",
    "PODModes",
    "SnapshotBasis",
    "build_pod_rom",
    "burgers_ensemble",
    "burgers_input_spec",
    "burgers_solve",
    "fit_pod",
    "published_statistics",
    "rom_advance",
    "short_column_eval",
    "short_column_input_spec",
    "short_column_models",
]
