"""Seeded random states, Hamiltonians and unitaries for sweeps and tests."""

from __future__ import annotations

import numpy as np

from .matrix_core import DensityMatrix, TabulatedHamiltonian, dagger


def ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    """Standard complex Gaussian ``d x d`` matrix."""
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)


def random_state(rng: np.random.Generator, d: int) -> DensityMatrix:
    """``G G^dag / Tr(G G^dag)``; full rank with probability one."""
    g = ginibre(rng, d)
    m = g @ dagger(g)
    return DensityMatrix.from_matrix(m / np.trace(m).real)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = ginibre(rng, d)
    return 0.5 * (g + dagger(g))


def random_hamiltonian(rng: np.random.Generator, d: int, tau: float, knots: int = 3) -> TabulatedHamiltonian:
    """Piecewise-linear drive through ``knots`` independent Hermitian matrices on ``[0, tau]``."""
    times = np.linspace(0.0, tau, knots)
    return TabulatedHamiltonian(times, np.stack([random_hermitian(rng, d) for _ in range(knots)]))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar unitary via QR with the phase correction of the R diagonal."""
    q, r = np.linalg.qr(ginibre(rng, d))
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph
