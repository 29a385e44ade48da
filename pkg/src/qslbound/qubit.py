"""Closed-form single-qubit oracle.

State ``rho_0 = (I + r rhat . sigma) / 2`` driven by ``H_t = varpi I + n_t . sigma``
where ``n_t`` is either fixed or the Landau-Zener sweep
``(delta, 0, v t) / sqrt(delta^2 + v^2 t^2)``. With ``u_t = int_0^t n_s ds`` the
propagator is taken as ``exp(-i varpi t) exp(-i u_t . sigma)``; this is exact for
a fixed axis and only an approximation of the time-ordered exponential for
the sweep (see :func:`propagator_closed`).

All functions broadcast over arrays of times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .bounds import DEGENERATE_DRIVE, DIVERGENT, DRIVE_TOL, GConvention, QslReport
from .errors import OutOfRange, RequiresFullRank, SingularLog, SingularPhi
from .evolution import SIMPSON, quadrature_weights
from .matrix_core import (
    IDENTITY2,
    FixedAxis,
    LZAxis,
    QubitDrive,
    bloch_unit,
    from_bloch,
    pauli_dot,
)

UNIT_TOL = 1e-12
U_ZERO_TOL = 1e-300
OVERLAP_TOL = 1e-12
PHI_GUARD = 1e-8
FAMILIES = ("TRE", "RRE", "RE", "Min")


@dataclass(frozen=True)
class XiPair:
    plus: float
    minus: float


def xi(alpha, r):
    """``xi^(+-)_alpha = 2^-alpha [(1 + r)^alpha +- (1 - r)^alpha]``; broadcasts over ``alpha``."""
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 0):
        raise OutOfRange("alpha must be >= 0")
    if not 0.0 <= r <= 1.0:
        raise OutOfRange(f"r={r} outside [0, 1]")
    hi = (1.0 + r) ** a
    lo = (1.0 - r) ** a  # 0**0 = 1 keeps xi^+_0 = 2 at r = 1 as for every other r
    s = 2.0 ** (-a)
    plus, minus = s * (hi + lo), s * (hi - lo)
    if np.ndim(plus) == 0:
        return XiPair(float(plus), float(minus))
    return XiPair(plus, minus)


@dataclass(frozen=True)
class QubitBlochSpec:
    r: float
    theta: float
    phi: float
    drive: QubitDrive

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise OutOfRange(f"r={self.r} outside (0, 1]")
        if not 0.0 <= self.theta <= math.pi:
            raise OutOfRange(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi <= 2 * math.pi:
            raise OutOfRange(f"phi={self.phi} outside [0, 2 pi]")
        if isinstance(self.drive.axis, LZAxis) and self.drive.axis.v == 0:
            raise OutOfRange("Landau-Zener sweep needs v != 0")

    @classmethod
    def lz(cls, r, theta, phi, delta, v=1.0, varpi=0.0) -> "QubitBlochSpec":
        return cls(r, theta, phi, QubitDrive(varpi, LZAxis(delta, v)))

    @classmethod
    def fixed(cls, r, theta, phi, n, varpi=0.0) -> "QubitBlochSpec":
        return cls(r, theta, phi, QubitDrive(varpi, FixedAxis(np.asarray(n, dtype=float))))

    @property
    def rhat(self) -> np.ndarray:
        return bloch_unit(self.theta, self.phi)

    def state(self):
        return from_bloch(self.r, self.theta, self.phi)


# --- drive geometry -------------------------------------------------------------


def axis_direction(drive: QubitDrive, t) -> np.ndarray:
    """``n_t`` with shape ``t.shape + (3,)``."""
    t = np.asarray(t, dtype=float)
    axis = drive.axis
    if isinstance(axis, FixedAxis):
        return np.broadcast_to(axis.n, t.shape + (3,)).copy()
    d, v = axis.delta, axis.v
    gamma = np.hypot(d, v * t)
    out = np.zeros(t.shape + (3,))
    live = gamma > 0
    out[..., 0] = np.where(live, d / np.where(live, gamma, 1.0), 0.0)
    out[..., 2] = np.where(live, v * t / np.where(live, gamma, 1.0), math.copysign(1.0, v))
    return out


def u_closed(drive: QubitDrive, t) -> np.ndarray:
    """``u_t = int_0^t n_s ds`` by antiderivatives."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise OutOfRange("t must be >= 0")
    axis = drive.axis
    if isinstance(axis, FixedAxis):
        return t[..., None] * axis.n
    d, v = axis.delta, axis.v
    out = np.zeros(t.shape + (3,))
    if d == 0.0:
        out[..., 2] = t * math.copysign(1.0, v)
        return out
    out[..., 0] = (d / v) * np.arcsinh(v * t / abs(d))
    # (sqrt(d^2 + v^2 t^2) - |d|) / v written without cancellation
    vt = v * t
    out[..., 2] = vt * vt / (v * (np.hypot(d, vt) + abs(d)))
    return out


def u_quadrature(drive: QubitDrive, t: float, steps: int = 4096) -> np.ndarray:
    """Composite Simpson cross-check of :func:`u_closed` (scalar ``t``)."""
    if t == 0:
        return np.zeros(3)
    s = np.linspace(0.0, t, steps + 1)
    return quadrature_weights(steps, t, SIMPSON) @ axis_direction(drive, s)


def _rotate(x, axis, angle):
    """Rodrigues rotation of ``x`` about unit ``axis`` by ``angle`` (broadcasting)."""
    c, s = np.cos(angle)[..., None], np.sin(angle)[..., None]
    dot = np.einsum("...i,...i->...", axis, x)[..., None]
    ax, ay, az = axis[..., 0], axis[..., 1], axis[..., 2]
    xx, xy, xz = x[..., 0], x[..., 1], x[..., 2]
    cross = np.stack([ay * xz - az * xy, az * xx - ax * xz, ax * xy - ay * xx], axis=-1)
    return x * c + s * cross + (1 - c) * dot * axis


@dataclass(frozen=True)
class DriveVectors:
    """Drive geometry at the requested times.

    ``uhat`` falls back to ``n_t`` (its ``t -> 0`` limit) wherever ``|u| = 0``;
    ``zero_u`` marks those entries.
    """

    t: np.ndarray
    n: np.ndarray
    u: np.ndarray
    u_norm: np.ndarray
    uhat: np.ndarray
    nu: np.ndarray
    mu: np.ndarray
    zero_u: np.ndarray


def drive_vectors(spec: QubitBlochSpec, t, with_nu: bool = True) -> DriveVectors:
    t = np.asarray(t, dtype=float)
    n = axis_direction(spec.drive, t)
    u = u_closed(spec.drive, t)
    norm = np.linalg.norm(u, axis=-1)
    zero = norm <= U_ZERO_TOL
    uhat = np.where(zero[..., None], n, u / np.where(zero, 1.0, norm)[..., None])
    rhat = np.broadcast_to(spec.rhat, n.shape)
    # nu = R_uhat(2|u|) rhat  (Schroedinger picture), mu = R_uhat(-2|u|) n  (Heisenberg picture)
    nu = _rotate(rhat, uhat, 2.0 * norm) if with_nu else None
    mu = _rotate(n, uhat, -2.0 * norm)
    return DriveVectors(t, n, u, norm, uhat, nu, mu, zero)


def propagator_closed(drive: QubitDrive, t) -> np.ndarray:
    """``exp(-i varpi t) [cos|u_t| I - i sin|u_t| uhat_t . sigma]`` (shape ``t.shape + (2, 2)``)."""
    t = np.asarray(t, dtype=float)
    u = u_closed(drive, t)
    norm = np.linalg.norm(u, axis=-1)
    # sin|u| uhat = sinc-weighted u, well defined at |u| = 0
    su = np.sinc(norm / math.pi)[..., None] * u
    m = np.cos(norm)[..., None, None] * IDENTITY2 - 1j * pauli_dot(su)
    return np.exp(-1j * drive.varpi * t)[..., None, None] * m


def _transition(dv: DriveVectors, rhat) -> np.ndarray:
    """``(1 - (uhat . rhat)^2) sin^2 |u|``."""
    c = np.sum(dv.uhat * rhat, axis=-1)
    return (1.0 - c * c) * np.sin(dv.u_norm) ** 2


def purity_closed(alpha, spec: QubitBlochSpec, t):
    """``g_alpha(rho_t, rho_0) = 1 - xi^-_alpha xi^-_(1-alpha) (1 - (uhat . rhat)^2) sin^2 |u_t|``."""
    a = np.asarray(alpha, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise OutOfRange("alpha outside [0, 1]")
    dv = drive_vectors(spec, t)
    amp = xi(a, spec.r).minus * xi(1.0 - a, spec.r).minus
    return 1.0 - np.multiply.outer(amp, _transition(dv, spec.rhat)) if np.ndim(a) else 1.0 - amp * _transition(dv, spec.rhat)


@dataclass(frozen=True)
class Table1:
    comm_h_rho0_alpha: np.ndarray
    comm_h_rho0: np.ndarray
    comm_h_rhot: np.ndarray
    relative_entropy: np.ndarray
    log_norm: float
    power_norm: float


def log_norm_closed(r: float) -> float:
    """``||ln rho_0||_2 = sqrt(ln^2((1 - r)/2) + ln^2((1 + r)/2))``."""
    if r >= 1.0:
        raise SingularLog("||ln rho_0|| diverges for a pure state")
    return math.hypot(math.log((1 - r) / 2), math.log((1 + r) / 2))


def table1(spec: QubitBlochSpec, alpha: float, t) -> Table1:
    dv = drive_vectors(spec, t)
    rhat = spec.rhat
    r = spec.r
    nr = np.sum(dv.n * rhat, axis=-1)
    mr = np.sum(dv.mu * rhat, axis=-1)
    gap_n = np.sqrt(np.clip(2.0 * (1.0 - nr * nr), 0.0, None))
    gap_m = np.sqrt(np.clip(2.0 * (1.0 - mr * mr), 0.0, None))
    s = r * math.log((1 + r) / (1 - r)) * _transition(dv, rhat) if r < 1 else np.full(np.shape(t), np.nan)
    return Table1(
        comm_h_rho0_alpha=xi(alpha, r).minus * gap_n,
        comm_h_rho0=r * gap_n,
        comm_h_rhot=r * gap_m,
        relative_entropy=s,
        log_norm=log_norm_closed(r) if r < 1 else math.inf,
        power_norm=math.sqrt(xi(2 * alpha, r).plus),
    )


# --- closed-form QSL times ------------------------------------------------------


@dataclass(frozen=True)
class DriveAverages:
    """Time averages over ``[0, tau]`` of the closed-form integrands, plus the end-point transition."""

    tau: np.ndarray
    gap_n: np.ndarray
    gap_mu: np.ndarray
    min_speed: np.ndarray
    transition: np.ndarray
    min_overlap: np.ndarray


def drive_averages(spec: QubitBlochSpec, taus, steps: int = 512) -> DriveAverages:
    """Simpson averages of ``sqrt(1 - (n.r)^2)``, ``sqrt(1 - (mu.r)^2)`` and the min-entropy integrand."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(taus < 0):
        raise OutOfRange("tau must be >= 0")
    frac = np.linspace(0.0, 1.0, steps + 1)
    grid = taus[:, None] * frac  # (n_tau, steps + 1)
    dv = drive_vectors(spec, grid, with_nu=False)
    rhat = spec.rhat
    nr = np.sum(dv.n * rhat, axis=-1)
    mr = np.sum(dv.mu * rhat, axis=-1)
    gap_n = np.sqrt(np.clip(1.0 - nr * nr, 0.0, None))
    gap_mu = np.sqrt(np.clip(1.0 - mr * mr, 0.0, None))
    overlap = np.abs(1.0 - _transition(dv, rhat))
    with np.errstate(divide="ignore"):
        min_int = gap_mu / overlap
    w = quadrature_weights(steps, 1.0, SIMPSON)  # averages are tau-independent on [0, 1]
    avg = lambda f: np.where(taus > 0, f @ w, f[:, 0])
    trans = _transition(drive_vectors(spec, taus), rhat)
    return DriveAverages(taus, avg(gap_n), avg(gap_mu), avg(min_int), trans, overlap.min(axis=1))


def _ratio(num, den, flags):
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    ok = den > DRIVE_TOL
    if not np.all(ok):
        flags.add(DEGENERATE_DRIVE)
    return np.where(ok, num / np.where(ok, den, 1.0), 0.0)


def _alpha_terms(spec, alphas, avg: DriveAverages, family, convention):
    """``(|1-alpha| O, k_fwd, k_rev, s)`` with ``<<G_alpha>> = k_fwd s`` and ``<<G_(1-alpha)>> = k_rev s``."""
    r = spec.r
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    if np.any((a <= 0) | (a >= 1)):
        raise OutOfRange("alpha must lie in (0, 1)")
    conv = GConvention.parse(convention)
    xa, xb = xi(a, r).minus, xi(1 - a, r).minus
    amp = xa * xb
    if conv is GConvention.MAINTEXT:
        k_fwd = np.sqrt(xi(2 - 2 * a, r).plus) * xa
        k_rev = np.sqrt(xi(2 * a, r).plus) * xb
    else:
        k_fwd = np.sqrt(xi(2 * a, r).plus) * xb
        k_rev = np.sqrt(xi(2 - 2 * a, r).plus) * xa
    trans = avg.transition[:, None]
    if family == "TRE":
        lhs = amp * trans
    else:
        lhs = np.abs(np.log(1.0 - amp * trans))
        lm = math.log((1 - r) / 2)
        d_fwd, d_rev = np.abs(1 + (1 - a) * lm), np.abs(1 + a * lm)
        if np.any(d_fwd < PHI_GUARD) or np.any(d_rev < PHI_GUARD):
            raise SingularPhi("Renyi prefactor denominator vanishes on the alpha grid")
        k_fwd = k_fwd / d_fwd
        k_rev = k_rev / d_rev
    return lhs, k_fwd, k_rev, math.sqrt(2.0) * avg.gap_n[:, None]


def qsl_closed_grid(spec: QubitBlochSpec, alphas, taus, family: str, steps: int = 512,
                    convention=GConvention.MAINTEXT) -> Dict[str, object]:
    """Closed-form QSL components on a ``(tau, alpha)`` grid.

    Returns ``{"forward", "reverse", "symmetric", "max"}`` arrays of shape
    ``(len(taus), len(alphas))`` (``len(alphas)`` is 1 for RE/Min) and a
    ``"flags"`` set. ``convention`` chooses the G exponent placement for the
    TRE/RRE families; MAINTEXT reproduces the published closed forms.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    r = spec.r
    if family in ("RRE", "RE") and r >= 1.0:
        raise RequiresFullRank(f"{family} needs r < 1")
    if family == "Min" and r != 1.0:
        raise OutOfRange("the Min closed form assumes a pure state (r = 1)")
    avg = drive_averages(spec, taus, steps)
    tau = avg.tau[:, None]
    flags = set()

    if family == "RE":
        lr = math.log((1 + r) / (1 - r))
        ln = log_norm_closed(r)
        num = (lr * avg.transition)[:, None]
        base = math.sqrt(2.0) * ln
        fwd = _ratio(num, base * avg.gap_mu[:, None], flags)
        rev = _ratio(num, base * avg.gap_n[:, None], flags)
        sym = _ratio(2 * num, base * (avg.gap_mu + avg.gap_n)[:, None], flags)
    elif family == "Min":
        ov = 1.0 - avg.transition
        div = avg.min_overlap <= OVERLAP_TOL
        if np.any(div):
            flags.add(DIVERGENT)
        num = np.abs(np.log(np.where(div, 1.0, ov)))[:, None]
        den = math.sqrt(2.0) * np.where(div, 1.0, avg.min_speed)[:, None]
        fwd = np.where(div[:, None], 0.0, _ratio(num, den, flags))
        rev = fwd.copy()
        sym = fwd.copy()
    else:
        lhs, k_fwd, k_rev, s = _alpha_terms(spec, alphas, avg, family, convention)
        fwd = _ratio(lhs, k_fwd * s, flags)
        rev = _ratio(lhs, k_rev * s, flags)
        sym = _ratio(2 * lhs, (k_fwd + k_rev) * s, flags)

    zero = (tau == 0)
    fwd, rev, sym = (np.where(zero, 0.0, x) for x in (fwd, rev, sym))
    return {"forward": fwd, "reverse": rev, "symmetric": sym,
            "max": np.maximum(np.maximum(fwd, rev), sym), "flags": flags}


def qsl_closed(spec: QubitBlochSpec, alpha: Optional[float], tau: float, family: str, steps: int = 512,
               convention=GConvention.MAINTEXT) -> QslReport:
    """Closed-form QSL components for one ``(alpha, tau)`` point."""
    a = 0.5 if family in ("RE", "Min") else alpha
    out = qsl_closed_grid(spec, [a], [tau], family, steps, convention)
    comps = {k: float(out[k][0, 0]) for k in ("forward", "reverse", "symmetric")}
    label_alpha = {"RE": 1.0, "Min": 0.0}.get(family, alpha)
    return QslReport(family, float(label_alpha), float(tau), comps, max(comps.values()), tuple(sorted(out["flags"])))


def merit_closed_grid(spec: QubitBlochSpec, alphas, taus, family: str, steps: int = 512,
                      convention=GConvention.MAINTEXT):
    """Closed-form ``(delta_1, delta_2, delta_3)`` on a ``(tau, alpha)`` grid (TRE/RRE)."""
    if family not in ("TRE", "RRE"):
        raise ValueError("merits are defined for the TRE and RRE families")
    if family == "RRE" and spec.r >= 1.0:
        raise RequiresFullRank("RRE needs r < 1")
    avg = drive_averages(spec, taus, steps)
    lhs, k_fwd, k_rev, s = _alpha_terms(spec, alphas, avg, family, convention)
    tau = avg.tau[:, None]
    d1 = tau * k_fwd * s - lhs
    d2 = tau * k_rev * s - lhs
    return d1, d2, d1 + d2
