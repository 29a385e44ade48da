"""Time-ordered propagation and time averages on a uniform grid."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .errors import DimMismatch, NonHermitianSample, OutOfRange, ZeroHorizon
from .matrix_core import (
    DensityMatrix,
    HamiltonianSpec,
    dagger,
    eigendecompose_many,
    sample_hamiltonian,
    schatten2_many,
)

DEFAULT_STEPS = 512
SIMPSON = "simpson"
TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class PropagatorTrajectory:
    """Unitaries ``U_{t_k}`` and Hamiltonian samples ``H_{t_k}`` on ``t_k = k tau / N``."""

    times: np.ndarray
    unitaries: np.ndarray
    hamiltonians: np.ndarray

    @property
    def steps(self) -> int:
        return self.times.shape[0] - 1

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.unitaries[-1]

    def upto(self, k: int) -> "PropagatorTrajectory":
        """Prefix trajectory covering ``[0, t_k]``."""
        if not 0 <= k <= self.steps:
            raise OutOfRange(f"index {k} outside [0, {self.steps}]")
        return PropagatorTrajectory(self.times[: k + 1], self.unitaries[: k + 1], self.hamiltonians[: k + 1])

    def unitarity_defect(self) -> np.ndarray:
        eye = np.eye(self.dim)
        return schatten2_many(dagger(self.unitaries) @ self.unitaries - eye)

    def evolve_matrices(self, m) -> np.ndarray:
        """``U_t M U_t^dag`` for every grid time."""
        u = self.unitaries
        return u @ np.asarray(m) @ dagger(u)

    def heisenberg_hamiltonians(self) -> np.ndarray:
        """``U_t^dag H_t U_t`` for every grid time."""
        u = self.unitaries
        return dagger(u) @ self.hamiltonians @ u


def propagate(
    spec: HamiltonianSpec,
    tau: float,
    steps: int = DEFAULT_STEPS,
    reorthonormalize_every: Optional[int] = None,
) -> PropagatorTrajectory:
    """Midpoint exponential-product propagation.

    ``U_{k+1} = exp(-i H((k + 1/2) dt) dt) U_k``; second order in ``dt`` and
    unitary by construction.
    """
    if tau < 0:
        raise OutOfRange(f"tau={tau} must be >= 0")
    if steps < 2:
        raise OutOfRange(f"steps={steps} must be >= 2")
    times = np.linspace(0.0, tau, steps + 1)
    dt = tau / steps
    mids = times[:-1] + 0.5 * dt
    h_mid = sample_hamiltonian(spec, mids)
    w, v = eigendecompose_many(h_mid, error=NonHermitianSample)
    step_ops = (v * np.exp(-1j * w * dt)[:, None, :]) @ dagger(v)
    if reorthonormalize_every:
        unitaries = _chunked_product(step_ops, int(reorthonormalize_every))
    else:
        unitaries = kernels.ordered_product(step_ops)
    return PropagatorTrajectory(times, unitaries, sample_hamiltonian(spec, times))


def _polar_unitary(u):
    x, _, yh = np.linalg.svd(u)
    return x @ yh


def _chunked_product(step_ops, every):
    n, d, _ = step_ops.shape
    out = np.empty((n + 1, d, d), dtype=np.complex128)
    out[0] = np.eye(d)
    start = 0
    while start < n:
        stop = min(n, start + every)
        chunk = kernels.ordered_product(step_ops[start:stop])
        out[start + 1 : stop + 1] = chunk[1:] @ out[start]
        out[stop] = _polar_unitary(out[stop])
        start = stop
    return out


def trajectory_from_unitaries(times, unitaries, hamiltonians) -> PropagatorTrajectory:
    """Wrap externally supplied unitaries (e.g. a closed-form propagator)."""
    times = np.asarray(times, dtype=float)
    u = np.asarray(unitaries, dtype=np.complex128)
    h = np.asarray(hamiltonians, dtype=np.complex128)
    if u.shape[0] != times.shape[0] or h.shape != u.shape:
        raise DimMismatch("times, unitaries and hamiltonians must align")
    return PropagatorTrajectory(times, u, h)


def evolve_state(rho0: DensityMatrix, u) -> DensityMatrix:
    """``U rho0 U^dag`` with the spectrum carried over exactly."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (rho0.dim, rho0.dim):
        raise DimMismatch(f"unitary {u.shape} vs state dimension {rho0.dim}")
    vecs = u @ rho0.vectors
    return DensityMatrix.from_eigen(rho0.values, vecs, matrix=u @ rho0.matrix @ dagger(u))


@dataclass(frozen=True)
class TimeAverage:
    value: float
    steps: int
    rule: str


def quadrature_weights(steps: int, tau: float, rule: str = SIMPSON) -> np.ndarray:
    """Weights ``w`` with ``sum(w * f) ~ int_0^tau f dt`` on a uniform grid (read-only, cached)."""
    return _weights(int(steps), float(tau), rule)


@lru_cache(maxsize=256)
def _weights(steps: int, tau: float, rule: str) -> np.ndarray:
    w = _raw_weights(steps, tau, rule)
    w.flags.writeable = False
    return w


def _raw_weights(steps, tau, rule):
    h = tau / steps
    if rule == SIMPSON:
        if steps % 2:
            raise OutOfRange(f"Simpson needs an even number of steps, got {steps}")
        w = np.ones(steps + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (h / 3.0)
    if rule == TRAPEZOID:
        w = np.ones(steps + 1)
        w[0] = w[-1] = 0.5
        return w * h
    raise ValueError(f"unknown quadrature rule {rule!r}")


def integrate(samples, tau: float, rule: str = SIMPSON) -> float:
    """``int_0^tau f dt`` from samples on the uniform grid (last axis); 0 for ``tau = 0``."""
    f = np.asarray(samples, dtype=float)
    if tau == 0.0:
        out = np.zeros(f.shape[:-1])
    else:
        out = f @ quadrature_weights(f.shape[-1] - 1, tau, rule)
    return float(out) if out.ndim == 0 else out


def time_average(samples, tau: float, rule: str = SIMPSON) -> TimeAverage:
    """``(1/tau) int_0^tau f dt`` via composite Simpson (or trapezoid)."""
    f = np.asarray(samples, dtype=float)
    if tau <= 0:
        raise ZeroHorizon("time average over an empty horizon")
    if f.ndim != 1 or f.shape[0] < 3:
        raise OutOfRange("need at least 3 samples on a uniform grid")
    return TimeAverage(integrate(f, tau, rule) / tau, f.shape[0] - 1, rule)
