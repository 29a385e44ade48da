"""Grid scans over ``(tau, alpha)`` for a configured scenario.

Each horizon ``tau`` gets its own trajectory with ``steps`` midpoint steps, so
grid points are independent and can be farmed out to worker processes. Rows
are sorted by ``(tau, alpha, ...)`` before writing, which keeps the output
byte-identical whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from . import entropy as ent
from .bounds import (
    DIVERGENT,
    SINGULAR_PHI,
    VALIDITY_TOL,
    BoundProblem,
    BoundReport,
    GConvention,
    Variant,
    qsl_times,
)
from .entropy import EntropyKind
from .errors import NonPositivePurity, RequiresFullRank, SingularPhi
from .evolution import evolve_state, propagate
from .matrix_core import DensityMatrix, HamiltonianSpec
from .output import exact_difference

KINDS = (EntropyKind.RENYI, EntropyKind.TSALLIS)

ENTROPY_HEADER = ("tau", "alpha", "renyi_fwd", "renyi_rev", "tsallis_fwd", "tsallis_rev",
                  "relative_entropy_fwd", "relative_entropy_rev", "min_fwd", "min_rev")
BOUND_HEADER = ("tau", "alpha", "variant", "kind", "lhs", "rhs", "slack", "phi", "g_avg", "qsl", "flags")
QSL_HEADER = ("tau", "alpha", "family", "forward", "reverse", "symmetric", "tau_max", "flags")

_VARIANT_ORDER = {v.value: i for i, v in enumerate(Variant)}


@dataclass(frozen=True)
class ScanJob:
    state: DensityMatrix
    hamiltonian: HamiltonianSpec
    tau: float
    steps: int
    alphas: Tuple[float, ...]
    convention: GConvention


def _problem(job: ScanJob) -> BoundProblem:
    return BoundProblem(job.state, propagate(job.hamiltonian, job.tau, job.steps))


def _safe(fn, *args):
    try:
        return fn(*args)
    except NonPositivePurity:
        return math.inf


def entropy_rows(job: ScanJob) -> List[tuple]:
    prob = _problem(job)
    rho0 = job.state
    rt = evolve_state(rho0, prob.trajectory.final)
    s = (ent.quantum_relative_entropy(rt, rho0), ent.quantum_relative_entropy(rho0, rt))
    m = (ent.min_relative_entropy(rt, rho0), ent.min_relative_entropy(rho0, rt))
    rows = []
    for a in job.alphas:
        rows.append((job.tau, a,
                     _safe(ent.renyi, rt, rho0, a), _safe(ent.renyi, rho0, rt, a),
                     ent.tsallis(rt, rho0, a), ent.tsallis(rho0, rt, a), *s, *m))
    return rows


def _bound_row(rep: BoundReport) -> tuple:
    q, qflags = rep.qsl()
    flags = "|".join(sorted(set(rep.flags) | set(qflags)))
    return (rep.tau, rep.alpha, rep.variant.value, rep.kind, rep.lhs, rep.rhs,
            exact_difference(rep.rhs, rep.lhs), rep.phi, rep.g_avg, q, flags)


def _flagged_row(tau, alpha, variant, kind, lhs, flag) -> tuple:
    return (tau, alpha, variant, kind, lhs, math.nan, "nan", math.nan, math.nan, math.nan, flag)


def _alpha_lhs(prob, kind, a, variant):
    """Entropy value for a row whose bound could not be formed."""
    k = prob.trajectory.steps
    try:
        fwd, rev = prob.entropy_pair(kind, a, k)
    except NonPositivePurity:
        return math.inf
    return {"Forward": fwd, "Loose": fwd, "Reverse": rev}.get(variant, fwd + rev)


def bound_rows(job: ScanJob) -> List[tuple]:
    prob = _problem(job)
    rows = []
    for a in job.alphas:
        for kind in KINDS:
            for variant in ("Forward", "Reverse", "Symmetric", "Loose"):
                try:
                    if variant == "Loose":
                        rep = prob.loose(kind, a)
                    else:
                        rep = getattr(prob, variant.lower())(kind, a, job.convention)
                    rows.append(_bound_row(rep))
                except (SingularPhi, RequiresFullRank):
                    rows.append(_flagged_row(job.tau, a, variant, kind.value, _alpha_lhs(prob, kind, a, variant),
                                             SINGULAR_PHI))
                except NonPositivePurity:
                    rows.append(_flagged_row(job.tau, a, variant, kind.value, math.inf, DIVERGENT))
    try:
        rows.append(_bound_row(prob.re_limit()))
    except RequiresFullRank:
        rows.append(_flagged_row(job.tau, 1.0, "RELimit", "RE", prob.re_pair(prob.trajectory.steps)[0], DIVERGENT))
    rows.append(_bound_row(prob.min_limit()[0]))
    return rows


def qsl_rows(job: ScanJob) -> List[tuple]:
    prob = _problem(job)
    rows = []
    for a in job.alphas:
        for kind in KINDS:
            try:
                reps = {n: getattr(prob, n)(kind, a, job.convention) for n in ("forward", "reverse", "symmetric")}
                q = qsl_times(kind, a, reps)
                c = q.components
                rows.append((job.tau, a, kind.value, c["forward"], c["reverse"], c["symmetric"], q.tau_max,
                             "|".join(q.flags)))
            except (SingularPhi, RequiresFullRank):
                rows.append((job.tau, a, kind.value, math.nan, math.nan, math.nan, math.nan, SINGULAR_PHI))
            except NonPositivePurity:
                rows.append((job.tau, a, kind.value, math.nan, math.nan, math.nan, math.nan, DIVERGENT))
    for q in (_re_qsl(prob), prob.min_limit()[1]):
        if q is None:
            continue
        c = q.components
        rows.append((job.tau, q.alpha, q.family, c["forward"], c["reverse"], c["symmetric"], q.tau_max,
                     "|".join(q.flags)))
    return rows


def _re_qsl(prob):
    try:
        return prob.qsl_re()
    except RequiresFullRank:
        return None


def run_jobs(fn: Callable[[ScanJob], List[tuple]], jobs: Sequence[ScanJob], workers: int = 1) -> List[tuple]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(fn, jobs))
    else:
        chunks = [fn(j) for j in jobs]
    rows = [r for c in chunks for r in c]
    rows.sort(key=lambda r: (r[0], r[1], _VARIANT_ORDER.get(r[2], -1) if isinstance(r[2], str) else -1,
                            str(r[2]), str(r[3])))
    return rows


def make_jobs(cfg) -> List[ScanJob]:
    cfg.require_scenario()
    alphas = tuple(float(a) for a in cfg.alphas)
    return [ScanJob(cfg.state, cfg.hamiltonian, float(t), cfg.steps, alphas, cfg.convention)
            for t in np.unique(cfg.taus)]


def bound_violations(rows) -> List[tuple]:
    """Rows with ``slack < -tol`` that are not flagged Divergent or SingularPhi."""
    bad = []
    for r in rows:
        slack = float(r[6])
        excluded = DIVERGENT in r[10] or SINGULAR_PHI in r[10]
        if not excluded and not math.isnan(slack) and slack < -VALIDITY_TOL:
            bad.append(r)
    return bad


def qsl_violations(rows) -> List[tuple]:
    return [r for r in rows if not math.isnan(r[6]) and r[6] > r[0] + VALIDITY_TOL]
