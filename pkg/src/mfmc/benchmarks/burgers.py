"""Inviscid Burgers benchmark: upwind finite differences and POD-Galerkin ROMs.

The full model solves

    w_t + (w^2 / 2)_x = s * exp(z2 * x),   w(0, t) = z1,   w(x, 0) = 1

on ``x in [0, 100]``, ``t in [0, 10]`` with first-order upwind differences and
forward Euler. Nodes sit at ``x = dx, 2 dx, ..., 100``; the inflow value ``z1``
acts as the left neighbour of the first node and is never evolved.

Reduced models write ``w = w0 + U_d @ c`` with a POD basis ``U_d`` built from
snapshots centred on the initial state, and evolve ``c`` by Galerkin
projection of the same discrete scheme::

    c <- c - dt/2 * (a - z1**2 * b + B @ c + C(c, c)) + dt * s * U_d.T @ exp(z2 * x)

where ``b = U_d.T @ e_1 / dx`` carries the inflow value.

The quantity of interest is the spatial mean of ``w`` at the final time.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from ..ensemble import Model, RandomInputSpec, Uniform
from ..errors import MFMCError, RankDeficiencyError
from ..rng import SeedLike
from .published import BURGERS_COSTS

Z1_RANGE = (0.5, 3.5)
Z2_RANGE = (2e-4, 2e-3)
ROM_DIMENSIONS = (3, 5, 10, 15)
N_TRAINING = 50
RANK_TOL = 1e-12


class CFLWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class BurgersFOM:
    n: int = 256
    length: float = 100.0
    dt: float = 0.1
    n_steps: int = 100
    forcing_scale: float = 0.02
    initial_value: float = 1.0

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(1, self.n + 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def w0(self) -> np.ndarray:
        return np.full(self.n, self.initial_value)

    def difference_matrix(self) -> np.ndarray:
        """Bidiagonal backward-difference operator: 1/dx on the diagonal, -1/dx below."""
        D = np.eye(self.n) / self.dx
        D[np.arange(1, self.n), np.arange(self.n - 1)] = -1.0 / self.dx
        return D

    def forcing(self, z2) -> np.ndarray:
        """Source term per sample, shape ``(len(z2), n)``."""
        z2 = np.atleast_1d(np.asarray(z2, dtype=float))
        return self.forcing_scale * np.exp(np.outer(z2, self.x))

    def _advance(self, W, z1, source, step):
        cfl = np.max(np.abs(W)) * self.dt / self.dx
        if cfl > 1.0:
            warnings.warn(f"CFL number {cfl:.3f} exceeds 1 at step {step}", CFLWarning, stacklevel=3)
        sq = W * W
        left = np.empty_like(sq)
        left[:, 0] = z1 * z1
        left[:, 1:] = sq[:, :-1]
        W = W - (0.5 * self.dt / self.dx) * (sq - left) + self.dt * source
        if not np.all(np.isfinite(W)):
            raise FloatingPointError(f"non-finite Burgers state after step {step + 1}")
        return W

    def solve_batch(self, Z: np.ndarray, store: bool = False) -> np.ndarray:
        """Integrate every row ``(z1, z2)`` of ``Z``.

        Returns final states ``(ns, n)``, or full trajectories
        ``(ns, n, n_steps + 1)`` when ``store`` is set.
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        z1 = Z[:, 0]
        source = self.forcing(Z[:, 1])
        W = np.tile(self.w0, (Z.shape[0], 1))
        if store:
            traj = np.empty((Z.shape[0], self.n, self.n_steps + 1))
            traj[:, :, 0] = W
        for k in range(self.n_steps):
            W = self._advance(W, z1, source, k)
            if store:
                traj[:, :, k + 1] = W
        return traj if store else W

    def solve(self, z) -> np.ndarray:
        """Trajectory ``(n, n_steps + 1)`` for one parameter ``z = (z1, z2)``."""
        return self.solve_batch(np.asarray(z, dtype=float).reshape(1, 2), store=True)[0]

    def qoi(self, Z: np.ndarray) -> np.ndarray:
        return self.solve_batch(Z).mean(axis=1)


def burgers_solve(z, forcing_scale: float = 0.02, fom: BurgersFOM | None = None) -> np.ndarray:
    """Full trajectory ``(n, n_steps + 1)`` of the upwind scheme at ``z``."""
    if fom is None:
        fom = BurgersFOM(forcing_scale=forcing_scale)
    elif forcing_scale != fom.forcing_scale:
        fom = BurgersFOM(fom.n, fom.length, fom.dt, fom.n_steps, forcing_scale, fom.initial_value)
    return fom.solve(z)


# ---------------------------------------------------------------------------
# POD
# ---------------------------------------------------------------------------


def snapshot_matrix(fom: BurgersFOM, params: np.ndarray) -> np.ndarray:
    """Centred snapshots ``w(t_j) - w(t_0)`` of every run, concatenated column-wise."""
    traj = fom.solve_batch(params, store=True)
    centred = traj - traj[:, :, :1]
    return np.concatenate(list(centred), axis=1)


@dataclass
class PODModes:
    """Left singular vectors and singular values of a snapshot matrix."""

    fom: BurgersFOM
    modes: np.ndarray
    singular_values: np.ndarray
    training_params: np.ndarray

    @property
    def rank(self) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.count_nonzero(s > RANK_TOL * s[0]))

    def basis(self, d: int) -> "SnapshotBasis":
        if d < 1:
            raise ValueError(f"basis size must be positive, got {d}")
        if d > self.rank:
            raise RankDeficiencyError(f"requested {d} modes but the snapshot rank is {self.rank}")
        return SnapshotBasis.from_modes(self.fom, self.modes[:, :d], self.singular_values)

    def save(self, path: str | Path) -> None:
        np.savez(
            path,
            modes=self.modes,
            singular_values=self.singular_values,
            training_params=self.training_params,
            fom=np.array([self.fom.n, self.fom.length, self.fom.dt, self.fom.n_steps,
                          self.fom.forcing_scale, self.fom.initial_value]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PODModes":
        with np.load(path) as data:
            n, length, dt, steps, fs, w_init = data["fom"]
            fom = BurgersFOM(int(n), float(length), float(dt), int(steps), float(fs), float(w_init))
            return cls(fom, data["modes"], data["singular_values"], data["training_params"])


def fit_pod(fom: BurgersFOM, training_params: np.ndarray) -> PODModes:
    S = snapshot_matrix(fom, training_params)
    U, s, _ = np.linalg.svd(S, full_matrices=False)
    return PODModes(fom, U, s, np.asarray(training_params, dtype=float))


@dataclass
class SnapshotBasis:
    """POD basis of size ``d`` with the precomputed Galerkin operators."""

    basis: np.ndarray
    singular_values: np.ndarray
    a: np.ndarray
    B: np.ndarray
    C: np.ndarray
    inflow: np.ndarray
    w0: np.ndarray
    D_x: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def C_matrix(self) -> np.ndarray:
        """Quadratic operator flattened to ``(d, d * d)``."""
        return self.C.reshape(self.d, self.d * self.d)

    @classmethod
    def from_modes(cls, fom: BurgersFOM, U: np.ndarray, singular_values: np.ndarray) -> "SnapshotBasis":
        D = fom.difference_matrix()
        w0 = fom.w0
        P = U.T @ D
        a = P @ (w0 * w0)
        B = 2.0 * P @ (w0[:, None] * U)
        # C[i, j, l] = sum_x P[i, x] U[x, j] U[x, l]
        C = np.stack([(U * P[i][:, None]).T @ U for i in range(U.shape[1])])
        inflow = U[0, :] / fom.dx
        return cls(U, np.asarray(singular_values), a, B, C, inflow, w0, D)

    def quadratic(self, c: np.ndarray) -> np.ndarray:
        """``C(c, c)`` for a batch of reduced states ``(ns, d)``."""
        c = np.atleast_2d(c)
        outer = (c[:, :, None] * c[:, None, :]).reshape(c.shape[0], -1)
        return outer @ self.C_matrix.T

    def reconstruct(self, c: np.ndarray) -> np.ndarray:
        return self.w0 + np.atleast_2d(c) @ self.basis.T

    def save(self, path: str | Path) -> None:
        np.savez(path, basis=self.basis, singular_values=self.singular_values, a=self.a,
                 B=self.B, C=self.C, inflow=self.inflow, w0=self.w0, D_x=self.D_x)

    @classmethod
    def load(cls, path: str | Path) -> "SnapshotBasis":
        with np.load(path) as data:
            return cls(**{k: data[k] for k in data.files})


@dataclass
class BurgersROM:
    fom: BurgersFOM
    pod: SnapshotBasis

    @property
    def d(self) -> int:
        return self.pod.d

    def solve_batch(self, Z: np.ndarray, store: bool = False) -> np.ndarray:
        """Reduced states at the final time ``(ns, d)``, or trajectories
        ``(ns, d, n_steps + 1)`` when ``store`` is set."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        fom, pod = self.fom, self.pod
        z1sq = Z[:, 0:1] ** 2
        source = fom.forcing(Z[:, 1]) @ pod.basis
        constant = pod.a[None, :] - z1sq * pod.inflow[None, :]
        c = np.zeros((Z.shape[0], self.d))
        if store:
            traj = np.zeros((Z.shape[0], self.d, fom.n_steps + 1))
        for k in range(fom.n_steps):
            rate = constant + c @ pod.B.T + pod.quadratic(c)
            c = c - 0.5 * fom.dt * rate + fom.dt * source
            if not np.all(np.isfinite(c)):
                raise FloatingPointError(f"non-finite reduced state after step {k + 1}")
            if store:
                traj[:, :, k + 1] = c
        return traj if store else c

    def qoi(self, Z: np.ndarray) -> np.ndarray:
        c = self.solve_batch(Z)
        return self.pod.w0.mean() + c @ self.pod.basis.mean(axis=0)


def build_pod_rom(
    training_params: np.ndarray,
    d: int,
    fom: BurgersFOM | None = None,
    pod: PODModes | None = None,
) -> BurgersROM:
    """POD-Galerkin ROM of size ``d`` trained on the given parameters."""
    fom = fom or BurgersFOM()
    if pod is None:
        pod = fit_pod(fom, training_params)
    return BurgersROM(fom, pod.basis(d))


def rom_advance(rom: BurgersROM, z) -> tuple[np.ndarray, float]:
    """Reduced trajectory ``(d, n_steps + 1)`` and QoI for one parameter."""
    traj = rom.solve_batch(np.asarray(z, dtype=float).reshape(1, 2), store=True)[0]
    qoi = float(rom.pod.w0.mean() + rom.pod.basis.mean(axis=0) @ traj[:, -1])
    return traj, qoi


# ---------------------------------------------------------------------------
# Ensemble
# ---------------------------------------------------------------------------


def burgers_input_spec(z2_range: Sequence[float] = Z2_RANGE) -> RandomInputSpec:
    return RandomInputSpec((Uniform(*Z1_RANGE), Uniform(float(z2_range[0]), float(z2_range[1]))))


@dataclass
class BurgersEnsemble:
    fom: BurgersFOM
    pod: PODModes
    roms: list[BurgersROM]
    models: list[Model]
    input_spec: RandomInputSpec


def burgers_ensemble(
    training_seed: SeedLike,
    n_training: int = N_TRAINING,
    dims: Sequence[int] = ROM_DIMENSIONS,
    z2_range: Sequence[float] = Z2_RANGE,
    costs: Sequence[float] | None = None,
    fom: BurgersFOM | None = None,
) -> BurgersEnsemble:
    """Full model ``f1`` followed by one ROM per entry of ``dims``.

    Training parameters are drawn from the same input distribution as the
    estimation samples. Costs default to the published per-evaluation times.
    """
    fom = fom or BurgersFOM()
    spec = burgers_input_spec(z2_range)
    params = spec.sample(n_training, training_seed)
    pod = fit_pod(fom, params)
    roms = [BurgersROM(fom, pod.basis(d)) for d in dims]
    if costs is None:
        if len(dims) != len(BURGERS_COSTS) - 1:
            raise MFMCError("published costs cover exactly four ROMs; pass costs explicitly")
        costs = BURGERS_COSTS
    models = [Model("f1", fom.qoi, float(costs[0]))]
    models += [Model(f"f{i + 2}", rom.qoi, float(c)) for i, (rom, c) in enumerate(zip(roms, costs[1:]))]
    return BurgersEnsemble(fom, pod, roms, models, spec)


def export_trajectory_csv(path: str | Path, fom: BurgersFOM, trajectory: np.ndarray,
                          times: Sequence[float] | None = None) -> None:
    """Write ``x`` followed by one column per requested time (default: all)."""
    all_times = fom.times
    if times is None:
        cols = list(range(all_times.size))
    else:
        cols = [int(round(t / fom.dt)) for t in times]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + [f"t={all_times[c]:g}" for c in cols])
        for i, xi in enumerate(fom.x):
            writer.writerow([repr(float(xi))] + [repr(float(trajectory[i, c])) for c in cols])
