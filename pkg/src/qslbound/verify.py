"""Seeded invariant sweep over random states and drives.

Each check contributes a *margin* (positive when the inequality holds with room
to spare); a family fails if any margin drops below ``-tolerance``. Families
are merged with sums and minima only, so results do not depend on how the
instances are split across workers.

Renyi families are reported twice: over every instance, and restricted to the
instances where the prefactor denominators ``1 + (1 - a) ln lambda_min`` are
positive for the exponents involved (the ``.provable`` suffix).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import entropy as ent
from .bounds import DIVERGENT, VALIDITY_TOL, BoundProblem, GConvention, merit_deltas, qsl_times, skew_information
from .config import VerifySettings
from .ensembles import ginibre, random_hamiltonian, random_state
from .entropy import EntropyKind
from .errors import SingularPhi
from .evolution import propagate
from .matrix_core import DensityMatrix, commutator, schatten2_many

KINDS = (EntropyKind.RENYI, EntropyKind.TSALLIS)
CONVENTIONS = (GConvention.APPENDIX, GConvention.MAINTEXT)
DERIVATIVE_TOL = 5e-6
DERIVATIVE_POINTS = 64
DERIVATIVE_INSTANCES = 25
TIGHT_TOL = 1e-12


@dataclass
class FamilyStats:
    name: str
    tolerance: float = VALIDITY_TOL
    checks: int = 0
    failures: int = 0
    skipped: int = 0
    worst: float = math.inf

    def add(self, margin: float):
        self.checks += 1
        if not margin >= -self.tolerance:  # NaN counts as a failure
            self.failures += 1
        if not margin >= self.worst:
            self.worst = margin

    def add_many(self, margins: np.ndarray):
        for m in np.ravel(margins):
            self.add(float(m))

    def merge(self, other: "FamilyStats"):
        self.checks += other.checks
        self.failures += other.failures
        self.skipped += other.skipped
        if not other.worst >= self.worst:
            self.worst = other.worst

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class VerifyReport:
    families: Dict[str, FamilyStats] = field(default_factory=dict)

    def family(self, name: str, tolerance: float = VALIDITY_TOL) -> FamilyStats:
        if name not in self.families:
            self.families[name] = FamilyStats(name, tolerance)
        return self.families[name]

    def merge(self, other: "VerifyReport"):
        for name, st in other.families.items():
            self.family(name, st.tolerance).merge(st)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families.values())

    def rows(self) -> List[tuple]:
        return [(f.name, f.checks, f.failures, f.skipped, f.worst, f.tolerance, "pass" if f.passed else "FAIL")
                for f in sorted(self.families.values(), key=lambda f: f.name)]


REPORT_HEADER = ("family", "checks", "failures", "skipped", "worst_margin", "tolerance", "status")


def _provable(lam_min: float, *exponents: float) -> bool:
    return all(1.0 + (1.0 - a) * math.log(lam_min) > 0 for a in exponents)


def _prefix_indices(taus, tau_max, steps) -> Optional[List[int]]:
    ks = []
    for t in taus:
        k = t / tau_max * steps
        if abs(k - round(k)) > 1e-9 or round(k) % 2:
            return None
        ks.append(int(round(k)))
    return ks


def _problems(rho0, ham, taus, steps) -> List[Tuple[BoundProblem, int]]:
    """``(problem, index)`` per horizon, sharing one trajectory when the grid allows it."""
    tmax = max(taus)
    ks = _prefix_indices(taus, tmax, steps)
    if ks is not None:
        prob = BoundProblem(rho0, propagate(ham, tmax, steps))
        return [(prob, k) for k in ks]
    out = []
    for t in taus:
        n = max(2, int(round(steps * t / tmax)))
        n += n % 2
        out.append((BoundProblem(rho0, propagate(ham, t, n)), n))
    return out


def _alpha_checks(rep: VerifyReport, prob: BoundProblem, k: int, alphas, lam_min: float):
    tau = prob.tau(k)
    for a in alphas:
        for kind in KINDS:
            kname = kind.value
            loose = None
            try:
                loose = prob.loose(kind, a, k)
                rep.family(f"bound.{kname}.loose").add(loose.slack)
                if kind is EntropyKind.RENYI and _provable(lam_min, a):
                    rep.family(f"bound.{kname}.loose.provable").add(loose.slack)
            except SingularPhi:
                rep.family(f"bound.{kname}.loose").skipped += 1
            sym_rhs = {}
            for conv in CONVENTIONS:
                c = conv.value
                try:
                    reps = {n: getattr(prob, n)(kind, a, conv, k) for n in ("forward", "reverse", "symmetric")}
                except SingularPhi:
                    for n in ("forward", "reverse", "symmetric"):
                        rep.family(f"bound.{kname}.{n}.{c}").skipped += 1
                    continue
                exps = {"forward": (a,), "reverse": (1 - a,), "symmetric": (a, 1 - a)}
                for n, r in reps.items():
                    rep.family(f"bound.{kname}.{n}.{c}").add(r.slack)
                    if kind is EntropyKind.RENYI and _provable(lam_min, *exps[n]):
                        rep.family(f"bound.{kname}.{n}.{c}.provable").add(r.slack)
                q = qsl_times(kind, a, reps)
                rep.family(f"qsl.{kname}.{c}").add(tau - q.tau_max)
                if kind is EntropyKind.RENYI and _provable(lam_min, a, 1 - a):
                    rep.family(f"qsl.{kname}.{c}.provable").add(tau - q.tau_max)
                d1, d2, d3 = merit_deltas(kind, a, reps)
                w = abs(1 - a)
                fam = rep.family("merit.consistency", TIGHT_TOL)
                for d, r in ((d1, reps["forward"]), (d2, reps["reverse"])):
                    fam.add(-abs(d - w * r.slack) / max(1.0, abs(d)))
                fam.add(-abs(d3 - d1 - d2) / max(1.0, abs(d3)))
                sym_rhs[conv] = reps["symmetric"].rhs
                if conv is GConvention.MAINTEXT and loose is not None:
                    rep.family(f"loose_dominates.{kname}", TIGHT_TOL).add(
                        (loose.rhs - reps["forward"].rhs) / max(1.0, loose.rhs))
            if kind is EntropyKind.TSALLIS and len(sym_rhs) == 2:
                diff = sym_rhs[GConvention.APPENDIX] - sym_rhs[GConvention.MAINTEXT]
                rep.family("tsallis_symmetric_convention", TIGHT_TOL).add(-abs(diff) / max(1.0, abs(sym_rhs[GConvention.APPENDIX])))


def _chain_checks(rep: VerifyReport, prob: BoundProblem, k: int, alphas, lam_min: float):
    rho0 = prob.rho0
    rt = prob.state(k)
    s = ent.quantum_relative_entropy(rt, rho0)
    rep.family("chain.re_le_neglog_lambda_min").add(-math.log(lam_min) - s)
    for a in alphas:
        h = ent.tsallis(rt, rho0, a)
        g = ent.relative_purity(rt, rho0, a)
        rep.family("chain.tsallis_le_re").add(s - h)
        rep.family("chain.purity_floor").add(g - (1 + (1 - a) * math.log(lam_min)))
        if _provable(lam_min, a):
            phi = prob.phi(EntropyKind.RENYI, a)
            rep.family("phi.inverse_purity").add(phi - 1.0 / g)


def _limit_checks(rep: VerifyReport, prob: BoundProblem, k: int):
    tau = prob.tau(k)
    rep.family("bound.re_limit").add(prob.re_limit(k).slack)
    rep.family("qsl.re").add(tau - prob.qsl_re(k).tau_max)
    b, q = prob.min_limit(k)
    rep.family("bound.min_limit.full_rank").add(b.slack)
    rep.family("qsl.min.full_rank").add(tau - q.tau_max)


def _pure_min_checks(rep: VerifyReport, prob: BoundProblem, k: int):
    b, q = prob.min_limit(k)
    if DIVERGENT in b.flags:
        rep.family("bound.min_limit.pure").skipped += 1
        rep.family("qsl.min.pure").skipped += 1
        return
    rep.family("bound.min_limit.pure").add(b.slack)
    rep.family("qsl.min.pure").add(prob.tau(k) - q.tau_max)


def derivative_margins(prob: BoundProblem, kind, alpha: float, points: int = DERIVATIVE_POINTS,
                       convention=GConvention.APPENDIX) -> np.ndarray:
    """``G_alpha(t)/|1-alpha| - |dO/dt|`` with central differences at ``points`` interior grid times."""
    n = prob.trajectory.steps
    idx = np.unique(np.linspace(1, n - 1, points).round().astype(int))
    dt = prob.trajectory.times[1] - prob.trajectory.times[0]
    g = prob.g_samples(kind, alpha, convention)
    u = prob.trajectory.unitaries
    lo = ent.from_deficit(kind, ent.orbit_deficits(prob.rho0, ent.orbit_weights(prob.rho0, u[idx - 1]), alpha)[0], alpha)
    hi = ent.from_deficit(kind, ent.orbit_deficits(prob.rho0, ent.orbit_weights(prob.rho0, u[idx + 1]), alpha)[0], alpha)
    return g[idx] / abs(1 - alpha) - np.abs(hi - lo) / (2 * dt)


def _derivative_checks(rep, prob: BoundProblem, alphas, lam_min):
    for kind in KINDS:
        for a in alphas:
            name = f"derivative.{kind.value}"
            try:
                m = derivative_margins(prob, kind, a)
            except SingularPhi:
                rep.family(name, DERIVATIVE_TOL).skipped += 1
                continue
            rep.family(name, DERIVATIVE_TOL).add_many(m)
            if kind is EntropyKind.RENYI and _provable(lam_min, a):
                rep.family(name + ".provable", DERIVATIVE_TOL).add_many(m)


def _pure_state(rng, d) -> DensityMatrix:
    psi = ginibre(rng, d)[:, 0]
    psi /= np.linalg.norm(psi)
    return DensityMatrix.from_matrix(np.outer(psi, psi.conj()))


def run_instance(index: int, seed_seq: np.random.SeedSequence, settings: VerifySettings) -> VerifyReport:
    rep = VerifyReport()
    rng = np.random.default_rng(seed_seq)
    d = settings.dims[index % len(settings.dims)]
    rho0 = random_state(rng, d)
    taus = list(settings.taus)
    ham = random_hamiltonian(rng, d, max(taus))
    lam_min = rho0.lambda_min
    problems = _problems(rho0, ham, taus, settings.steps)
    for prob, k in problems:
        _alpha_checks(rep, prob, k, settings.alphas, lam_min)
        _chain_checks(rep, prob, k, settings.alphas, lam_min)
        _limit_checks(rep, prob, k)
    pure = _pure_state(rng, d)
    for prob, k in problems:
        _pure_min_checks(rep, BoundProblem(pure, prob.trajectory), k)
    h0 = ham.at(0.0)
    il, var = skew_information(rho0, h0)
    rep.family("skew.il_le_variance", TIGHT_TOL).add(var - il)
    rep.family("skew.il_nonnegative", TIGHT_TOL).add(il)
    if index < DERIVATIVE_INSTANCES:
        prob, _ = problems[-1]
        _derivative_checks(rep, prob, settings.alphas, lam_min)
    return rep


def commutator_check(rng: np.random.Generator, pairs: int, max_dim: int = 8) -> FamilyStats:
    """``||[X, Y]||_2 <= sqrt(2) ||X||_2 ||Y||_2`` on random complex pairs, ``d`` cycling over 2..max_dim."""
    st = FamilyStats("commutator_norm", TIGHT_TOL)
    dims = np.arange(2, max_dim + 1)
    for d in dims:
        n = len(range(int(d) - 2, pairs, len(dims)))
        if n == 0:
            continue
        shape = (n, d, d)
        x = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * rng.exponential(1.0, (n, 1, 1))
        y = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * rng.exponential(1.0, (n, 1, 1))
        lhs = schatten2_many(commutator(x, y))
        rhs = math.sqrt(2.0) * schatten2_many(x) * schatten2_many(y)
        st.add_many((rhs - lhs) / np.maximum(1.0, rhs))
    return st


def _chunk(args) -> VerifyReport:
    indices, seqs, settings = args
    rep = VerifyReport()
    for i, s in zip(indices, seqs):
        rep.merge(run_instance(i, s, settings))
    return rep


def run_verification(settings: VerifySettings, seed: int = 0, workers: int = 1) -> VerifyReport:
    root = np.random.SeedSequence(seed)
    inst_seq, comm_seq = root.spawn(2)
    seqs = inst_seq.spawn(settings.instances)
    idx = list(range(settings.instances))
    report = VerifyReport()
    if workers > 1:
        parts = [(idx[w::workers], seqs[w::workers], settings) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r in pool.map(_chunk, parts):
                report.merge(r)
    else:
        report.merge(_chunk((idx, seqs, settings)))
    report.families["commutator_norm"] = commutator_check(np.random.default_rng(comm_seq), settings.commutator_pairs)
    return report


def summary_lines(report: VerifyReport) -> Iterable[str]:
    for name, checks, fails, skipped, worst, tol, status in report.rows():
        yield f"{status:4s}  {name:44s} checks={checks:<7d} failures={fails:<6d} skipped={skipped:<5d} worst={worst:.3e}"
