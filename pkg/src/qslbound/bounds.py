"""Upper bounds on relative entropies under unitary driving and the QSL times they imply.

For ``alpha`` in (0, 1) the bounds have the form

    O_alpha(rho_tau || rho_0) <= tau <<G_alpha>>_tau / |1 - alpha|

with ``G_alpha(t) = Phi_alpha ||rho_0^p||_2 ||[H_t, rho_0^q]||_2``. The
exponent placement ``(p, q)`` is selected by :class:`GConvention`. The
``alpha -> 1`` (relative entropy) and ``alpha -> 0`` (min-relative entropy)
families have their own speed functionals.

Every report stores ``g_avg`` such that ``rhs = tau * g_avg / |1 - alpha|``
(``|1 - alpha|`` is replaced by 1 for the limit families); the QSL time of a
report is then ``|1 - alpha| lhs / g_avg``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import entropy as ent
from .entropy import EntropyKind, check_alpha
from .errors import RequiresFullRank, SingularPhi, VanishingOverlap
from .evolution import SIMPSON, PropagatorTrajectory, evolve_state, integrate
from .matrix_core import (
    RANK_TOL,
    DensityMatrix,
    commutator,
    dagger,
    is_hermitian,
    matrix_log,
    schatten2,
    schatten2_many,
    support_projector,
)

VALIDITY_TOL = 1e-9
PHI_GUARD = 1e-8
DRIVE_TOL = 1e-14
OVERLAP_TOL = 1e-12

DIVERGENT = "Divergent"
DEGENERATE_DRIVE = "DegenerateDrive"
SINGULAR_PHI = "SingularPhi"


class GConvention(str, enum.Enum):
    """Which of ``alpha``/``1 - alpha`` sits on the commutator in ``G_alpha``.

    APPENDIX:  ``||rho_0^alpha|| ||[H_t, rho_0^(1-alpha)]||`` (the derived form)
    MAINTEXT:  ``||rho_0^(1-alpha)|| ||[H_t, rho_0^alpha]||``
    """

    APPENDIX = "appendix"
    MAINTEXT = "maintext"

    @classmethod
    def parse(cls, value) -> "GConvention":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())

    def exponents(self, alpha: float) -> Tuple[float, float]:
        """``(norm exponent, commutator exponent)``."""
        if self is GConvention.APPENDIX:
            return alpha, 1.0 - alpha
        return 1.0 - alpha, alpha


class Variant(str, enum.Enum):
    FORWARD = "Forward"
    REVERSE = "Reverse"
    SYMMETRIC = "Symmetric"
    LOOSE = "Loose"
    RE_LIMIT = "RELimit"
    MIN_LIMIT = "MinLimit"


@dataclass(frozen=True)
class BoundReport:
    variant: Variant
    kind: str
    alpha: float
    tau: float
    lhs: float
    rhs: float
    slack: float
    phi: float
    g_avg: float
    flags: Tuple[str, ...] = ()

    @property
    def weight(self) -> float:
        """``|1 - alpha|`` for the alpha family, 1 for the limit families."""
        if self.variant in (Variant.RE_LIMIT, Variant.MIN_LIMIT):
            return 1.0
        return abs(1.0 - self.alpha)

    @property
    def valid(self) -> bool:
        return DIVERGENT in self.flags or self.slack >= -VALIDITY_TOL

    def qsl(self) -> Tuple[float, Tuple[str, ...]]:
        """QSL time ``|1 - alpha| lhs / <<G>>`` implied by this report."""
        if self.tau == 0.0:
            return 0.0, ()
        if DIVERGENT in self.flags:
            return 0.0, (DIVERGENT,)
        if not self.g_avg > DRIVE_TOL:
            return 0.0, (DEGENERATE_DRIVE,)
        return self.weight * abs(self.lhs) / self.g_avg, ()


@dataclass(frozen=True)
class QslReport:
    family: str
    alpha: float
    tau_actual: float
    components: Dict[str, float]
    tau_max: float
    flags: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.tau_max <= self.tau_actual + VALIDITY_TOL


def _report(variant, kind, alpha, tau, lhs, g_avg, phi, weight, flags=()):
    rhs = tau * g_avg / weight
    return BoundReport(Variant(variant), str(kind), float(alpha), float(tau), float(lhs), float(rhs),
                       float(rhs - lhs), float(phi), float(g_avg), tuple(flags))


def phi_factor(kind, alpha: float, lambda_min: float, rank_tol: float = RANK_TOL) -> float:
    """Prefactor ``Phi_alpha``: ``1 / |1 + (1 - alpha) ln lambda_min|`` (Renyi) or 1 (Tsallis).

    ``rank_tol`` is compared directly with ``lambda_min``; states carry their
    own relative threshold, see :meth:`DensityMatrix.is_full_rank`.
    """
    kind = EntropyKind.parse(kind)
    if kind is EntropyKind.TSALLIS:
        return 1.0
    if not lambda_min > rank_tol:
        raise RequiresFullRank(f"lambda_min={lambda_min:.3e}; the Renyi prefactor needs a full-rank state")
    den = abs(1.0 + (1.0 - alpha) * math.log(lambda_min))
    if den < PHI_GUARD:
        raise SingularPhi(f"|1 + (1 - {alpha}) ln {lambda_min}| = {den:.3e}")
    return 1.0 / den


def _hamiltonians(h):
    if isinstance(h, PropagatorTrajectory):
        return h.hamiltonians
    h = np.asarray(h, dtype=np.complex128)
    return h[None] if h.ndim == 2 else h


def _state_phi(kind, alpha, rho0: DensityMatrix, rank_tol):
    kind = EntropyKind.parse(kind)
    if kind is EntropyKind.RENYI and not rho0.is_full_rank(rank_tol):
        raise RequiresFullRank("Renyi bounds need a full-rank initial state")
    return phi_factor(kind, alpha, rho0.lambda_min, 0.0 if kind is EntropyKind.RENYI else rank_tol)


def g_functional(kind, alpha, rho0: DensityMatrix, hamiltonians, convention=GConvention.APPENDIX,
                 rank_tol: float = RANK_TOL) -> np.ndarray:
    """Samples of ``G_alpha(t)`` for every Hamiltonian sample."""
    alpha = check_alpha(alpha)
    conv = GConvention.parse(convention)
    phi = _state_phi(kind, alpha, rho0, rank_tol)
    p, q = conv.exponents(alpha)
    norm_p = float(np.sqrt(np.sum(rho0.power_values(p, rank_tol) ** 2)))
    rq = rho0.eigen.apply(rho0.power_values(q, rank_tol))
    return phi * norm_p * schatten2_many(commutator(_hamiltonians(hamiltonians), rq))


class BoundProblem:
    """Shared samples for every bound evaluated on one ``(rho0, trajectory)`` pair.

    Sample arrays cover the full trajectory; reports can be taken at any even
    prefix index ``k`` (horizon ``t_k``) without recomputation.
    """

    def __init__(self, rho0: DensityMatrix, trajectory: PropagatorTrajectory,
                 rank_tol: float = RANK_TOL, rule: str = SIMPSON):
        self.rho0 = rho0
        self.trajectory = trajectory
        self.rank_tol = rank_tol
        self.rule = rule
        self._cache = {}

    # -- cached samples -------------------------------------------------------

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def power_norm(self, a: float) -> float:
        return self._cached(("pn", a), lambda: float(np.sqrt(np.sum(self.rho0.power_values(a, self.rank_tol) ** 2))))

    def _h_weights(self, heisenberg: bool) -> np.ndarray:
        """``|<v_i|H_t|v_j>|^2`` in the eigenbasis of rho0 (Heisenberg-picture H if requested)."""
        def f():
            h = self.trajectory.heisenberg_hamiltonians() if heisenberg else self.trajectory.hamiltonians
            v = self.rho0.vectors
            m = dagger(v) @ h @ v
            return m.real**2 + m.imag**2
        return self._cached(("hw", heisenberg), f)

    def _comm_norms(self, values, heisenberg=False) -> np.ndarray:
        # [H, f(rho0)]_ij = H_ij (f_j - f_i) in the eigenbasis of rho0
        gap = (values[:, None] - values[None, :]) ** 2
        return np.sqrt(np.einsum("tij,ij->t", self._h_weights(heisenberg), gap))

    def comm_norms(self, a: float) -> np.ndarray:
        """``||[H_t, rho0^a]||_2`` on the grid."""
        return self._cached(("cn", a), lambda: self._comm_norms(self.rho0.power_values(a, self.rank_tol)))

    def h_norms(self) -> np.ndarray:
        return self._cached("hn", lambda: schatten2_many(self.trajectory.hamiltonians))

    def evolved_comm_norms(self) -> np.ndarray:
        """``||[H_t, rho_t]||_2`` on the grid."""
        # ||[H_t, U rho0 U^dag]|| = ||[U^dag H_t U, rho0]||
        return self._cached("ecn", lambda: self._comm_norms(self.rho0.values, heisenberg=True))

    def phi(self, kind, alpha: float) -> float:
        return self._cached(("phi", EntropyKind.parse(kind), alpha),
                            lambda: _state_phi(kind, alpha, self.rho0, self.rank_tol))

    def g_samples(self, kind, alpha: float, convention) -> np.ndarray:
        conv = GConvention.parse(convention)
        kind = EntropyKind.parse(kind)

        def f():
            p, q = conv.exponents(alpha)
            return self.phi(kind, alpha) * self.power_norm(p) * self.comm_norms(q)
        return self._cached(("g", kind, alpha, conv), f)

    def g_average(self, kind, alpha: float, convention, k: int) -> float:
        conv = GConvention.parse(convention)
        kind = EntropyKind.parse(kind)
        return self._cached(("ga", kind, alpha, conv, k),
                            lambda: self.average(self.g_samples(kind, alpha, conv), k))

    def state(self, k: int) -> DensityMatrix:
        return self._cached(("st", k), lambda: evolve_state(self.rho0, self.trajectory.unitaries[k]))

    def tau(self, k: int) -> float:
        return float(self.trajectory.times[k])

    def _index(self, k: Optional[int]) -> int:
        return self.trajectory.steps if k is None else int(k)

    def average(self, samples, k: int) -> float:
        """``<<f>>_{t_k}``; at ``t_k = 0`` the limit value ``f(0)``."""
        tau = self.tau(k)
        if tau == 0.0:
            return float(samples[0])
        return integrate(samples[: k + 1], tau, self.rule) / tau

    # -- alpha family ---------------------------------------------------------

    def entropy_pair(self, kind, alpha: float, k: int) -> Tuple[float, float]:
        """``(O(rho_t||rho0), O(rho0||rho_t))`` at grid index ``k``."""
        kind = EntropyKind.parse(kind)

        def f():
            w = self._cached(("w", k), lambda: ent.orbit_weights(self.rho0, self.trajectory.unitaries[k]))
            fwd, rev = ent.orbit_deficits(self.rho0, w, alpha, self.rank_tol)
            return ent.from_deficit(kind, fwd, alpha), ent.from_deficit(kind, rev, alpha)
        return self._cached(("ent", kind, alpha, k), f)

    def forward(self, kind, alpha, convention=GConvention.APPENDIX, k=None) -> BoundReport:
        alpha = check_alpha(alpha)
        k = self._index(k)
        kind = EntropyKind.parse(kind)
        lhs = self.entropy_pair(kind, alpha, k)[0]
        g_avg = self.g_average(kind, alpha, convention, k)
        return _report(Variant.FORWARD, kind.value, alpha, self.tau(k), lhs, g_avg,
                       self.phi(kind, alpha), abs(1 - alpha))

    def reverse(self, kind, alpha, convention=GConvention.APPENDIX, k=None) -> BoundReport:
        alpha = check_alpha(alpha)
        k = self._index(k)
        kind = EntropyKind.parse(kind)
        lhs = self.entropy_pair(kind, alpha, k)[1]
        g_avg = self.g_average(kind, 1 - alpha, convention, k)
        return _report(Variant.REVERSE, kind.value, alpha, self.tau(k), lhs, g_avg,
                       self.phi(kind, 1 - alpha), abs(1 - alpha))

    def symmetric(self, kind, alpha, convention=GConvention.APPENDIX, k=None) -> BoundReport:
        alpha = check_alpha(alpha)
        k = self._index(k)
        kind = EntropyKind.parse(kind)
        lhs = sum(self.entropy_pair(kind, alpha, k))
        g_avg = self.g_average(kind, alpha, convention, k) + self.g_average(kind, 1 - alpha, convention, k)
        return _report(Variant.SYMMETRIC, kind.value, alpha, self.tau(k), lhs, g_avg,
                       self.phi(kind, alpha), abs(1 - alpha))

    def loose(self, kind, alpha, k=None) -> BoundReport:
        alpha = check_alpha(alpha)
        k = self._index(k)
        kind = EntropyKind.parse(kind)
        lhs = self.entropy_pair(kind, alpha, k)[0]
        phi = self.phi(kind, alpha)
        pref = math.sqrt(2.0) * phi * self.power_norm(1 - alpha) * self.power_norm(alpha)
        g_avg = pref * self.average(self.h_norms(), k)
        return _report(Variant.LOOSE, kind.value, alpha, self.tau(k), lhs, g_avg, phi, abs(1 - alpha))

    # -- alpha -> 1 -----------------------------------------------------------

    def log_norm(self) -> float:
        def f():
            if not self.rho0.is_full_rank(self.rank_tol):
                raise RequiresFullRank("relative-entropy bound needs a full-rank initial state")
            return schatten2(matrix_log(self.rho0, self.rank_tol))
        return self._cached("ln", f)

    def re_pair(self, k: int) -> Tuple[float, float]:
        def f():
            rt = self.state(k)
            return (ent.quantum_relative_entropy(rt, self.rho0, self.rank_tol),
                    ent.quantum_relative_entropy(self.rho0, rt, self.rank_tol))
        return self._cached(("re", k), f)

    def re_limit(self, k=None) -> BoundReport:
        k = self._index(k)
        ln = self.log_norm()
        lhs = self.re_pair(k)[0]
        g_avg = ln * self.average(self.evolved_comm_norms(), k)
        return _report(Variant.RE_LIMIT, "RE", 1.0, self.tau(k), lhs, g_avg, ln, 1.0)

    def qsl_re(self, k=None) -> QslReport:
        k = self._index(k)
        tau = self.tau(k)
        ln = self.log_norm()
        s_fwd, s_rev = self.re_pair(k)
        a_t = self.average(self.evolved_comm_norms(), k)
        a_0 = self.average(self.comm_norms(1.0), k)
        comps, flags = {}, set()
        for name, num, den in (("forward", s_fwd, ln * a_t), ("reverse", s_rev, ln * a_0),
                               ("symmetric", s_fwd + s_rev, ln * (a_t + a_0))):
            if tau == 0.0:
                comps[name] = 0.0
            elif den > DRIVE_TOL:
                comps[name] = num / den
            else:
                comps[name] = 0.0
                flags.add(DEGENERATE_DRIVE)
        return QslReport("RE", 1.0, tau, comps, max(comps.values()), tuple(sorted(flags)))

    # -- alpha -> 0 -----------------------------------------------------------

    def projector(self) -> np.ndarray:
        return self._cached("pi", lambda: support_projector(self.rho0, self.rank_tol))

    def q0_samples(self, a, b) -> Tuple[np.ndarray, np.ndarray]:
        """``(numerator, |Tr(A U B U^dag)|)`` of the min-entropy speed on the grid."""
        heis = self.trajectory.heisenberg_hamiltonians()
        num = schatten2(a) * schatten2_many(commutator(heis, b))
        ubu = self.trajectory.evolve_matrices(b)
        den = np.abs(np.einsum("ij,tji->t", a, ubu))
        return num, den

    def min_limit(self, k=None) -> Tuple[BoundReport, QslReport]:
        k = self._index(k)
        tau = self.tau(k)
        rho = self.rho0.matrix
        pi = self.projector()
        full = bool(self.rho0.is_full_rank(self.rank_tol))

        num_f, den_f = self._cached("q0f", lambda: self.q0_samples(rho, pi))
        num_r, den_r = self._cached("q0r", lambda: self.q0_samples(pi, rho))
        # Tr(Pi_{rho_t} rho0) and Tr(Pi rho_t) are the same two overlaps
        divergent = bool(np.any(den_f[: k + 1] <= OVERLAP_TOL) or np.any(den_r[: k + 1] <= OVERLAP_TOL))

        if full:
            r_fwd = r_rev = 0.0
        else:
            ov_f, ov_r = float(den_f[k]), float(den_r[k])
            r_fwd = -math.log(ov_f) if ov_f > OVERLAP_TOL else math.inf
            r_rev = -math.log(ov_r) if ov_r > OVERLAP_TOL else math.inf

        flags = (DIVERGENT,) if divergent else ()
        if divergent:
            q_f = q_r = np.full(k + 1, np.inf)
            avg_f = avg_r = math.inf
        else:
            q_f = num_f[: k + 1] / den_f[: k + 1]
            q_r = num_r[: k + 1] / den_r[: k + 1]
            avg_f, avg_r = self.average(q_f, k), self.average(q_r, k)

        fwd = _report(Variant.MIN_LIMIT, "Min", 0.0, tau, abs(r_fwd), avg_f, 1.0, 1.0, flags)
        comps, qflags = {}, set(flags)
        for name, num, den in (("forward", abs(r_fwd), avg_f), ("reverse", abs(r_rev), avg_r),
                               ("symmetric", abs(r_fwd + r_rev), avg_f + avg_r)):
            if tau == 0.0 or divergent:
                comps[name] = 0.0
            elif den > DRIVE_TOL:
                comps[name] = num / den
            else:
                comps[name] = 0.0
                qflags.add(DEGENERATE_DRIVE)
        qsl = QslReport("Min", 0.0, tau, comps, max(comps.values()), tuple(sorted(qflags)))
        return fwd, qsl


# --- functional API ------------------------------------------------------------


def bound_forward(kind, alpha, rho0, trajectory, convention=GConvention.APPENDIX, **kw) -> BoundReport:
    """``O_alpha(rho_tau||rho_0) <= tau <<G_alpha>> / |1 - alpha|``."""
    return BoundProblem(rho0, trajectory, **kw).forward(kind, alpha, convention)


def bound_reverse(kind, alpha, rho0, trajectory, convention=GConvention.APPENDIX, **kw) -> BoundReport:
    """``O_alpha(rho_0||rho_tau) <= tau <<G_(1-alpha)>> / |1 - alpha|``."""
    return BoundProblem(rho0, trajectory, **kw).reverse(kind, alpha, convention)


def bound_symmetric(kind, alpha, rho0, trajectory, convention=GConvention.APPENDIX, **kw) -> BoundReport:
    return BoundProblem(rho0, trajectory, **kw).symmetric(kind, alpha, convention)


def bound_loose(kind, alpha, rho0, trajectory, **kw) -> BoundReport:
    """Cauchy-Schwarz relaxation using only ``<<||H_t||_2>>``."""
    return BoundProblem(rho0, trajectory, **kw).loose(kind, alpha)


def re_limit_bound(rho0, trajectory, **kw) -> BoundReport:
    """``S(rho_tau||rho_0) <= tau ||ln rho_0||_2 <<||[H_t, rho_t]||_2>>``."""
    return BoundProblem(rho0, trajectory, **kw).re_limit()


def qsl_re(rho0, trajectory, **kw) -> QslReport:
    return BoundProblem(rho0, trajectory, **kw).qsl_re()


def min_bound_and_qsl(rho0, trajectory, rank_tol: float = RANK_TOL, **kw) -> Tuple[BoundReport, QslReport]:
    return BoundProblem(rho0, trajectory, rank_tol=rank_tol, **kw).min_limit()


def qsl_times(kind, alpha, reports) -> QslReport:
    """QSL components from forward/reverse/symmetric reports; ``tau_max`` is their max."""
    comps, flags = {}, set()
    tau = 0.0
    for name in ("forward", "reverse", "symmetric"):
        rep = reports[name]
        tau = rep.tau
        value, f = rep.qsl()
        comps[name] = value
        flags.update(f)
    family = EntropyKind.parse(kind).value
    return QslReport(family, float(alpha), tau, comps, max(comps.values()), tuple(sorted(flags)))


def merit_deltas(kind, alpha, reports) -> Tuple[float, float, float]:
    """``delta_1 = tau <<G_alpha>> - |1-alpha| O(rho_tau||rho_0)``, ``delta_2`` likewise reversed, ``delta_3 = delta_1 + delta_2``."""
    w = abs(1.0 - alpha)
    f, r = reports["forward"], reports["reverse"]
    d1 = f.tau * f.g_avg - w * f.lhs
    d2 = r.tau * r.g_avg - w * r.lhs
    return d1, d2, d1 + d2


def q0_speed(a, b, trajectory: PropagatorTrajectory) -> np.ndarray:
    """``||A|| ||[U^dag H U, B]|| / |Tr(A U B U^dag)|`` on the trajectory grid."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    heis = trajectory.heisenberg_hamiltonians()
    num = schatten2(a) * schatten2_many(commutator(heis, b))
    den = np.abs(np.einsum("ij,tji->t", a, trajectory.evolve_matrices(b)))
    if np.any(den <= OVERLAP_TOL):
        i = int(np.argmax(den <= OVERLAP_TOL))
        raise VanishingOverlap(f"Tr(A U B U^dag) = {den[i]:.3e} at t={trajectory.times[i]}")
    return num / den


def skew_information(rho0: DensityMatrix, h) -> Tuple[float, float]:
    """``(I_L, (Delta H)^2)`` with ``I_L = -Tr([rho, H]^2) / 4``."""
    h = np.asarray(h, dtype=np.complex128)
    if not is_hermitian(h):
        raise ValueError("H must be Hermitian")
    c = commutator(rho0.matrix, h)
    il = float(-0.25 * np.trace(c @ c).real)
    rho = rho0.matrix
    var = float(np.trace(rho @ h @ h).real - np.trace(rho @ h).real ** 2)
    return il, var


def re_variance_qsl(rho0: DensityMatrix, trajectory: PropagatorTrajectory, rank_tol: float = RANK_TOL):
    """Weaker constant-drive QSLs ``S / (2 Delta H ||ln rho_0||_2)`` for both orderings."""
    h = trajectory.hamiltonians
    if not np.allclose(h, h[0], rtol=0, atol=1e-14):
        raise ValueError("variance bound applies to time-independent Hamiltonians only")
    prob = BoundProblem(rho0, trajectory, rank_tol=rank_tol)
    s_fwd, s_rev = prob.re_pair(trajectory.steps)
    _, var = skew_information(rho0, h[0])
    den = 2.0 * math.sqrt(max(var, 0.0)) * prob.log_norm()
    if den <= DRIVE_TOL:
        return 0.0, 0.0
    return s_fwd / den, s_rev / den
