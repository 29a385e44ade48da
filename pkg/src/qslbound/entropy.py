"""Divergences between density matrices.

All quantities are evaluated in the eigenbases of the two arguments, e.g.

    g_a(rho, omega) = sum_ij p_i^a q_j^(1-a) |<v_i|w_j>|^2

which keeps them real and avoids forming fractional matrix powers.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DimMismatch, NonPositivePurity, OutOfRange
from .matrix_core import RANK_TOL, DensityMatrix, dagger

PURITY_TOL = 1e-14
OVERLAP_TOL = 1e-14


class EntropyKind(str, enum.Enum):
    RENYI = "R"
    TSALLIS = "H"

    @classmethod
    def parse(cls, value) -> "EntropyKind":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        for kind, names in ((cls.RENYI, ("r", "renyi", "rre")), (cls.TSALLIS, ("h", "tsallis", "tre"))):
            if v in names:
                return kind
        raise ValueError(f"unknown entropy kind {value!r}")


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise OutOfRange(f"alpha={alpha} outside (0, 1); use the dedicated limit operations")
    return alpha


def _check_dims(rho: DensityMatrix, omega: DensityMatrix):
    if rho.dim != omega.dim:
        raise DimMismatch(f"dimensions {rho.dim} and {omega.dim} differ")


def overlap_weights(rho: DensityMatrix, omega: DensityMatrix) -> np.ndarray:
    """``|<v_i|w_j>|^2`` for eigenvectors ``v`` of rho and ``w`` of omega."""
    _check_dims(rho, omega)
    w = dagger(rho.vectors) @ omega.vectors
    return w.real**2 + w.imag**2


def relative_purity(rho: DensityMatrix, omega: DensityMatrix, alpha: float, rank_tol: float = RANK_TOL) -> float:
    """``Tr(rho^alpha omega^(1-alpha))`` for ``alpha`` in (0, 1)."""
    alpha = check_alpha(alpha)
    p = rho.power_values(alpha, rank_tol)
    q = omega.power_values(1.0 - alpha, rank_tol)
    return float(p @ overlap_weights(rho, omega) @ q)


def purity_deficit(rho: DensityMatrix, omega: DensityMatrix, alpha: float, rank_tol: float = RANK_TOL) -> float:
    """``1 - g_alpha(rho, omega)`` without cancellation.

    The overlap matrix is doubly stochastic, so
    ``1 - g = sum_ij W_ij [a p_i + (1-a) q_j - p_i^a q_j^(1-a)] + (1 - a sum p - (1-a) sum q)``;
    every bracket is nonnegative (weighted AM-GM) and vanishes exactly when
    ``p_i == q_j``, which keeps identical spectra at an exact zero.
    """
    alpha = check_alpha(alpha)
    p, q = rho.eigen.values, omega.eigen.values
    pa = rho.power_values(alpha, rank_tol)
    qb = omega.power_values(1.0 - alpha, rank_tol)
    gap = alpha * p[:, None] + (1.0 - alpha) * q[None, :] - np.outer(pa, qb)
    gap[p[:, None] == q[None, :]] = 0.0
    trace_gap = 1.0 - alpha * p.sum() - (1.0 - alpha) * q.sum()
    return float(np.sum(overlap_weights(rho, omega) * gap) + trace_gap)


def _gap_matrix(rho0: DensityMatrix, alpha: float, rank_tol: float) -> np.ndarray:
    p = rho0.eigen.values
    gap = alpha * p[:, None] + (1.0 - alpha) * p[None, :] - np.outer(rho0.power_values(alpha, rank_tol),
                                                                     rho0.power_values(1.0 - alpha, rank_tol))
    gap[p[:, None] == p[None, :]] = 0.0
    return gap


def orbit_weights(rho0: DensityMatrix, unitaries) -> np.ndarray:
    """``|<v_j|U v_i>|^2`` as ``w[..., j, i]`` for eigenvectors ``v`` of rho0."""
    v = rho0.vectors
    m = dagger(v) @ np.asarray(unitaries, dtype=np.complex128) @ v
    return m.real**2 + m.imag**2


def orbit_deficits(rho0: DensityMatrix, weights, alpha: float, rank_tol: float = RANK_TOL):
    """``(1 - g_a(rho_t, rho0), 1 - g_a(rho0, rho_t))`` for ``rho_t = U rho0 U^dag``.

    ``weights`` comes from :func:`orbit_weights` and may carry leading batch axes.
    """
    alpha = check_alpha(alpha)
    gap = _gap_matrix(rho0, alpha, rank_tol)
    tgap = 1.0 - float(rho0.eigen.values.sum())
    w = np.asarray(weights)
    fwd = np.einsum("...ji,ij->...", w, gap) + tgap
    rev = np.einsum("...ij,ij->...", w, gap) + tgap
    return fwd, rev


def from_deficit(kind, deficit, alpha):
    """Divergence values from ``1 - g`` (array friendly)."""
    kind = EntropyKind.parse(kind)
    d = np.asarray(deficit, dtype=float)
    if kind is EntropyKind.TSALLIS:
        out = d / (1.0 - alpha)
    else:
        if np.any(1.0 - d <= PURITY_TOL):
            raise NonPositivePurity("relative purity vanished")
        out = np.log1p(-d) / (alpha - 1.0)
    return float(out) if out.ndim == 0 else out


def renyi(rho: DensityMatrix, omega: DensityMatrix, alpha: float, rank_tol: float = RANK_TOL) -> float:
    """Petz-Renyi relative entropy ``ln g_alpha / (alpha - 1)``."""
    d = purity_deficit(rho, omega, alpha, rank_tol)
    if 1.0 - d <= PURITY_TOL:
        raise NonPositivePurity(f"relative purity {1.0 - d:.3e} (orthogonal supports)")
    return math.log1p(-d) / (alpha - 1.0)


def tsallis(rho: DensityMatrix, omega: DensityMatrix, alpha: float, rank_tol: float = RANK_TOL) -> float:
    """Tsallis relative entropy ``(1 - g_alpha) / (1 - alpha)``."""
    return purity_deficit(rho, omega, alpha, rank_tol) / (1.0 - alpha)


def divergence(kind, rho, omega, alpha, rank_tol: float = RANK_TOL) -> float:
    kind = EntropyKind.parse(kind)
    f = renyi if kind is EntropyKind.RENYI else tsallis
    return f(rho, omega, alpha, rank_tol)


def symmetrized(kind, rho: DensityMatrix, omega: DensityMatrix, alpha: float, rank_tol: float = RANK_TOL) -> float:
    """``O_alpha(rho||omega) + O_alpha(omega||rho)``."""
    return divergence(kind, rho, omega, alpha, rank_tol) + divergence(kind, omega, rho, alpha, rank_tol)


def from_purity(kind, g, alpha):
    """Map relative purity values to divergence values (array friendly)."""
    kind = EntropyKind.parse(kind)
    g = np.asarray(g, dtype=float)
    if kind is EntropyKind.TSALLIS:
        return (1.0 - g) / (1.0 - alpha)
    if np.any(g <= PURITY_TOL):
        raise NonPositivePurity("relative purity vanished")
    return np.log(g) / (alpha - 1.0)


def quantum_relative_entropy(rho: DensityMatrix, omega: DensityMatrix, rank_tol: float = RANK_TOL) -> float:
    """Umegaki relative entropy ``Tr rho (ln rho - ln omega)``.

    Returns ``math.inf`` when the support of rho is not contained in the
    support of omega.
    """
    _check_dims(rho, omega)
    p = rho.eigen.values
    q = omega.eigen.values
    pmask = rho.support_mask(rank_tol)
    qmask = omega.support_mask(rank_tol)
    ov = overlap_weights(rho, omega)
    # weight rho puts on the kernel of omega
    leak = float(p[pmask] @ ov[np.ix_(pmask, ~qmask)].sum(axis=1)) if np.any(~qmask) else 0.0
    if leak > OVERLAP_TOL:
        return math.inf
    # rows of the overlap matrix sum to one, so S = sum_ij W_ij p_i (ln p_i - ln q_j)
    pp, qq = p[pmask], q[qmask]
    diff = np.log(pp)[:, None] - np.log(qq)[None, :]
    diff[pp[:, None] == qq[None, :]] = 0.0
    return float(np.sum(ov[np.ix_(pmask, qmask)] * (pp[:, None] * diff)))


def min_relative_entropy(rho: DensityMatrix, omega: DensityMatrix, rank_tol: float = RANK_TOL) -> float:
    """``-ln Tr(Pi_rho omega)``; ``math.inf`` for orthogonal supports."""
    _check_dims(rho, omega)
    mask = rho.support_mask(rank_tol)
    if np.all(mask):
        return 0.0
    v = rho.vectors[:, mask]
    tr = float(np.real(np.trace(dagger(v) @ omega.matrix @ v)))
    if tr <= OVERLAP_TOL:
        return math.inf
    return -math.log(tr)
