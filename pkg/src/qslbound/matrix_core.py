"""Dense Hermitian linear algebra for small quantum systems.

Everything here works on ``complex128`` arrays of dimension ``d <= 64``
(in practice ``d <= 8``). Eigendecompositions go through the cyclic Jacobi
kernel in :mod:`qslbound.kernels`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import kernels
from .errors import (
    DegenerateStateWarning,
    DimMismatch,
    InvalidState,
    NonHermitianSample,
    NotHermitian,
    OutOfRange,
    SingularLog,
    SingularPower,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-10
RANK_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def _readonly(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite square complex matrix."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise OutOfRange("matrix has non-finite entries")
    return a


def schatten2(m) -> float:
    """Schatten 2-norm (Frobenius norm) ``sqrt(Tr(M^dag M))``."""
    a = np.asarray(m)
    return float(np.sqrt(np.sum(a.real**2 + a.imag**2)))


def schatten2_many(stack) -> np.ndarray:
    """Schatten 2-norm of every matrix in a ``(..., d, d)`` stack."""
    a = np.asarray(stack)
    return np.sqrt(np.sum(a.real**2 + a.imag**2, axis=(-2, -1)))


def hermiticity_defect(m) -> float:
    a = np.asarray(m)
    return schatten2(a - dagger(a))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m)
    return hermiticity_defect(a) <= tol * max(1.0, schatten2(a))


def commutator(a, b) -> np.ndarray:
    """``AB - BA``; broadcasts over leading axes."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-2:] != b.shape[-2:]:
        raise DimMismatch(f"commutator of {a.shape[-2:]} and {b.shape[-2:]}")
    return a @ b - b @ a


@dataclass(frozen=True)
class HermitianEigen:
    """Spectral decomposition ``M = V diag(values) V^dag``, values ascending."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "vectors", _readonly(np.asarray(self.vectors, dtype=np.complex128)))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def apply(self, fvals) -> np.ndarray:
        """``V diag(fvals) V^dag``."""
        v = self.vectors
        return (v * np.asarray(fvals)) @ dagger(v)

    def reconstruct(self) -> np.ndarray:
        return self.apply(self.values)


def eigendecompose(m) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix via cyclic Jacobi."""
    a = as_matrix(m)
    if not is_hermitian(a):
        raise NotHermitian(f"Hermiticity defect {hermiticity_defect(a):.3e}")
    a = 0.5 * (a + dagger(a))
    w, v = kernels.jacobi_eigh(a[None])
    return HermitianEigen(w[0], v[0])


def eigendecompose_many(stack, *, error=NotHermitian):
    """Batched eigendecomposition of a ``(n, d, d)`` Hermitian stack.

    Returns plain arrays ``(values, vectors)``.
    """
    a = np.asarray(stack, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimMismatch(f"expected (n, d, d), got {a.shape}")
    defect = schatten2_many(a - dagger(a))
    scale = np.maximum(1.0, schatten2_many(a))
    bad = defect > HERMITIAN_TOL * scale
    if np.any(bad):
        i = int(np.argmax(bad))
        raise error(f"matrix {i} has Hermiticity defect {defect[i]:.3e}")
    return kernels.jacobi_eigh(0.5 * (a + dagger(a)))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix with cached spectrum."""

    matrix: np.ndarray
    eigen: HermitianEigen = field(repr=False)
    lambda_min: float

    @classmethod
    def from_matrix(cls, m) -> "DensityMatrix":
        a = as_matrix(m)
        if not is_hermitian(a):
            raise NotHermitian(f"Hermiticity defect {hermiticity_defect(a):.3e}")
        a = 0.5 * (a + dagger(a))
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace is {tr!r}, expected 1")
        eig = eigendecompose(a)
        if eig.values[0] < -NEGATIVE_EIG_TOL:
            raise InvalidState(f"negative eigenvalue {eig.values[0]:.3e}")
        return cls.from_eigen(np.clip(eig.values, 0.0, None), eig.vectors, matrix=a)

    @classmethod
    def from_eigen(cls, values, vectors, matrix=None) -> "DensityMatrix":
        """Build from a known spectral decomposition (no re-diagonalisation)."""
        eig = HermitianEigen(np.clip(values, 0.0, None), vectors)
        if matrix is None:
            matrix = eig.reconstruct()
        return cls(_readonly(matrix), eig, float(eig.values[0]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self.eigen.values

    @property
    def vectors(self) -> np.ndarray:
        return self.eigen.vectors

    def rank_threshold(self, rank_tol: float = RANK_TOL) -> float:
        return rank_tol * float(self.eigen.values[-1])

    def support_mask(self, rank_tol: float = RANK_TOL) -> np.ndarray:
        return self.eigen.values > self.rank_threshold(rank_tol)

    def is_full_rank(self, rank_tol: float = RANK_TOL) -> bool:
        return bool(np.all(self.support_mask(rank_tol)))

    def power_values(self, a: float, rank_tol: float = RANK_TOL) -> np.ndarray:
        """Eigenvalues raised to ``a`` with the support convention of :func:`matrix_power`."""
        mask = self.support_mask(rank_tol)
        if a <= 0 and not np.all(mask):
            raise SingularPower(f"exponent {a} on a rank-deficient state")
        out = np.zeros_like(self.eigen.values)
        out[mask] = self.eigen.values[mask] ** a
        return out


def matrix_power(rho: DensityMatrix, a: float, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``rho**a`` through the spectrum; sub-threshold eigenvalues count as 0."""
    return rho.eigen.apply(rho.power_values(a, rank_tol))


def matrix_log(rho: DensityMatrix, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Matrix logarithm of a full-rank density matrix."""
    if not rho.is_full_rank(rank_tol):
        raise SingularLog(f"lambda_min = {rho.lambda_min:.3e} is below the rank threshold")
    return rho.eigen.apply(np.log(rho.eigen.values))


def exp_minus_iH_dt(h, dt: float) -> np.ndarray:
    """Unitary ``exp(-i H dt)`` for Hermitian ``H``."""
    eig = eigendecompose(h)
    return eig.apply(np.exp(-1j * eig.values * dt))


def support_projector(rho: Union[DensityMatrix, np.ndarray], rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors above the rank threshold."""
    if not isinstance(rho, DensityMatrix):
        a = as_matrix(rho)
        if schatten2(a) == 0.0:
            warnings.warn("support projector of the zero matrix", DegenerateStateWarning, stacklevel=2)
            return np.zeros_like(a)
        eig = eigendecompose(a)
        mask = eig.values > rank_tol * float(np.max(np.abs(eig.values)))
        v = eig.vectors[:, mask]
        return v @ dagger(v)
    v = rho.eigen.vectors[:, rho.support_mask(rank_tol)]
    return v @ dagger(v)


def bloch_unit(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def pauli_dot(vec) -> np.ndarray:
    """``vec . sigma`` for a 3-vector (or ``(n, 3)`` stack)."""
    return np.tensordot(np.asarray(vec, dtype=float), PAULI, axes=([-1], [0]))


def from_bloch(r: float, theta: float, phi: float) -> DensityMatrix:
    """Qubit state ``(I + r rhat . sigma) / 2``."""
    if not 0.0 <= r <= 1.0:
        raise OutOfRange(f"Bloch radius r={r} outside [0, 1]")
    if not 0.0 <= theta <= np.pi:
        raise OutOfRange(f"theta={theta} outside [0, pi]")
    if not 0.0 <= phi <= 2 * np.pi:
        raise OutOfRange(f"phi={phi} outside [0, 2 pi]")
    rhat = bloch_unit(theta, phi)
    m = 0.5 * (IDENTITY2 + r * pauli_dot(rhat))
    # closed-form spectrum; eigenvectors along +-rhat
    up = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    down = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
    vecs = np.column_stack([down, up])
    return DensityMatrix.from_eigen(np.array([(1 - r) / 2, (1 + r) / 2]), vecs, matrix=m)


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix.from_eigen(np.full(d, 1.0 / d), np.eye(d, dtype=np.complex128))


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix.from_matrix(np.outer(psi, psi.conj()))


# --- Hamiltonians -------------------------------------------------------------


def _check_unit(n, what):
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise OutOfRange(f"{what} must be a unit 3-vector, got {n}")
    return n


@dataclass(frozen=True)
class ConstantHamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise NotHermitian(f"Hermiticity defect {hermiticity_defect(m):.3e}")
        object.__setattr__(self, "matrix", _readonly(0.5 * (m + dagger(m))))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_constant(self) -> bool:
        return True

    def at(self, t: float) -> np.ndarray:
        return np.array(self.matrix)

    def sample(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.broadcast_to(self.matrix, (times.shape[0],) + self.matrix.shape).copy()


@dataclass(frozen=True)
class LZAxis:
    """Landau-Zener sweep ``n(t) = (delta, 0, v t) / sqrt(delta^2 + v^2 t^2)``."""

    delta: float
    v: float

    def direction(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        gamma = np.hypot(self.delta, self.v * t)
        out = np.zeros((t.shape[0], 3))
        live = gamma > 0
        out[live, 0] = self.delta / gamma[live]
        out[live, 2] = self.v * t[live] / gamma[live]
        out[~live, 2] = 1.0 if self.v >= 0 else -1.0
        return out


@dataclass(frozen=True)
class FixedAxis:
    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", _readonly(_check_unit(self.n, "FixedAxis.n")))

    def direction(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        return np.broadcast_to(self.n, (t.shape[0], 3)).copy()


@dataclass(frozen=True)
class QubitDrive:
    """``H_t = varpi I + n_t . sigma`` with ``n_t`` given by ``axis``."""

    varpi: float
    axis: Union[LZAxis, FixedAxis]

    @property
    def dim(self) -> int:
        return 2

    @property
    def is_constant(self) -> bool:
        return isinstance(self.axis, FixedAxis)

    def at(self, t: float) -> np.ndarray:
        return self.sample([t])[0]

    def sample(self, times) -> np.ndarray:
        n = self.axis.direction(times)
        return self.varpi * IDENTITY2 + pauli_dot(n)


@dataclass(frozen=True)
class TabulatedHamiltonian:
    """Piecewise-linear interpolation between tabulated Hermitian matrices.

    Outside ``[times[0], times[-1]]`` the end matrices are held constant.
    """

    times: np.ndarray
    matrices: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.matrices, dtype=np.complex128)
        if t.ndim != 1 or t.shape[0] < 1 or m.shape[0] != t.shape[0]:
            raise DimMismatch("times and matrices must have the same length")
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise DimMismatch(f"matrices must be (n, d, d), got {m.shape}")
        if np.any(np.diff(t) <= 0):
            raise OutOfRange("tabulated times must be strictly increasing")
        for i, mi in enumerate(m):
            if not is_hermitian(mi):
                raise NotHermitian(f"tabulated matrix {i} is not Hermitian")
        object.__setattr__(self, "times", _readonly(t))
        object.__setattr__(self, "matrices", _readonly(0.5 * (m + dagger(m))))

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def is_constant(self) -> bool:
        return self.matrices.shape[0] == 1

    def at(self, t: float) -> np.ndarray:
        return self.sample([t])[0]

    def sample(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        knots = self.times
        if knots.shape[0] == 1:
            return np.broadcast_to(self.matrices[0], (t.shape[0],) + self.matrices.shape[1:]).copy()
        tc = np.clip(t, knots[0], knots[-1])
        idx = np.clip(np.searchsorted(knots, tc, side="right") - 1, 0, knots.shape[0] - 2)
        w = (tc - knots[idx]) / (knots[idx + 1] - knots[idx])
        return (1 - w)[:, None, None] * self.matrices[idx] + w[:, None, None] * self.matrices[idx + 1]


HamiltonianSpec = Union[ConstantHamiltonian, QubitDrive, TabulatedHamiltonian]


def sample_hamiltonian(spec: HamiltonianSpec, times) -> np.ndarray:
    """Sample ``spec`` on ``times`` and check every sample is Hermitian."""
    h = spec.sample(times)
    defect = schatten2_many(h - dagger(h))
    bad = defect > HERMITIAN_TOL * np.maximum(1.0, schatten2_many(h))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonHermitianSample(f"H(t={np.atleast_1d(times)[i]}) has Hermiticity defect {defect[i]:.3e}")
    return h
