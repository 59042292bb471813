"""Analytic short-column models.

Inputs: width ``z1``, depth ``z2``, yield stress ``z3``, bending moment ``z4``
and axial force ``z5``. Model 1 is the limit-state function; models 2-5 are
cheap perturbations of it.
"""

from __future__ import annotations

import numpy as np

from ..ensemble import LogNormal, Model, Normal, RandomInputSpec, Uniform

COSTS = (100.0, 50.0, 20.0, 10.0, 5.0)


def _columns(z):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if z.shape[1] != 5:
        raise ValueError(f"short-column inputs are 5-vectors, got shape {z.shape}")
    return z.T


def f1(z):
    z1, z2, z3, z4, z5 = _columns(z)
    return 1.0 - 4.0 * z4 / (z1 * z2**2 * z3) - (z5 / (z1 * z2 * z3)) ** 2


def f2(z):
    z1, z2, z3, z4, z5 = _columns(z)
    return 1.0 - 3.8 * z4 / (z1 * z2**2 * z3) - (z5 * (1.0 + (z4 - 2000.0) / 4000.0) / (z1 * z2 * z3)) ** 2


def f3(z):
    z1, z2, z3, z4, z5 = _columns(z)
    return 1.0 - z4 / (z1 * z2**2 * z3) - (z5 * (1.0 + z4) / (z2 * z3)) ** 2


def f4(z):
    z1, z2, z3, z4, z5 = _columns(z)
    return 1.0 - z4 / (z1 * z2**2 * z3) - (z5 * (1.0 + z4) / (z1 * z2 * z3)) ** 2


def f5(z):
    z1, z2, z3, z4, z5 = _columns(z)
    return 1.0 - z4 / (z1 * z2**2 * z3) - (z5 / (z1 * z2 * z3)) ** 2


EVALUATORS = (f1, f2, f3, f4, f5)


def short_column_eval(which: int, z) -> np.ndarray | float:
    """Evaluate model ``which`` (1-5) at one input vector or a batch of rows."""
    if which not in range(1, 6):
        raise ValueError(f"model number must be in 1..5, got {which}")
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        if np.any(z[:3] == 0):
            raise ZeroDivisionError("z1, z2 and z3 must be nonzero")
        return float(EVALUATORS[which - 1](z)[0])
    if np.any(z[:, :3] == 0):
        raise ZeroDivisionError("z1, z2 and z3 must be nonzero")
    return EVALUATORS[which - 1](z)


def short_column_input_spec(lognormal_convention: str = "underlying") -> RandomInputSpec:
    """Width U[5,15], depth U[15,25], lognormal yield stress (5, 0.5),
    moment N(2000, 400^2), axial force N(500, 100^2)."""
    return RandomInputSpec(
        (
            Uniform(5.0, 15.0),
            Uniform(15.0, 25.0),
            LogNormal(5.0, 0.5, lognormal_convention),
            Normal(2000.0, 400.0),
            Normal(500.0, 100.0),
        )
    )


def short_column_models() -> list[Model]:
    return [Model(f"f{i + 1}", fn, cost) for i, (fn, cost) in enumerate(zip(EVALUATORS, COSTS))]
