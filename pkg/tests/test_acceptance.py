"""Acceptance criteria at their stated tolerances.

Each test records one pass/fail line, printed in the terminal summary. Nothing
here is relaxed to make a criterion pass; criteria that fail are analysed in
the project notes.
"""

import csv
import json
import math
import time

import numpy as np
import pytest

from qslbound import entropy as ent
from qslbound import qubit as qb
from qslbound.bounds import BoundProblem
from qslbound.cli import main
from qslbound.config import VerifySettings
from qslbound.ensembles import random_hamiltonian, random_state
from qslbound.evolution import evolve_state, propagate
from qslbound.figures import FIGURES
from qslbound.matrix_core import commutator, matrix_power, schatten2_many
from qslbound.verify import run_verification

from .conftest import record_criterion

SEED = 2024
ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 10))
FIG_STATE = (0.25, math.pi / 4, math.pi / 4)
RATIOS = (0.5, 1.0, 5.0, 10.0)
MERIT_PANELS = {f"fig2_{c}" for c in "abcdef"}


@pytest.fixture(scope="module")
def sweep():
    settings = VerifySettings(instances=1000, dims=(2, 3, 4), alphas=ALPHAS, taus=(0.5, 1.0, 2.0, 5.0),
                              steps=500, commutator_pairs=10000)
    t0 = time.perf_counter()
    report = run_verification(settings, seed=SEED, workers=1)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def figure_runs(tmp_path_factory):
    """``qslbound figures`` once per figure (timed), then a second full run for determinism."""
    base = tmp_path_factory.mktemp("figures")
    timings = {}
    for name in FIGURES:
        cfg = base / f"{name}.json"
        cfg.write_text(json.dumps({"figures": [name]}))
        t0 = time.perf_counter()
        code = main(["figures", "--config", str(cfg), "--out", str(base / "run1")])
        timings[name] = (time.perf_counter() - t0, code)
    cfg = base / "all.json"
    cfg.write_text(json.dumps({"figures": list(FIGURES)}))
    main(["figures", "--config", str(cfg), "--out", str(base / "run2")])
    return base / "run1", base / "run2", timings


def _families(report, names):
    stats = [report.families[n] for n in names]
    failing = [f"{s.name} ({s.failures}/{s.checks}, worst {s.worst:.2e})" for s in stats if not s.passed]
    checks = sum(s.checks for s in stats)
    return not failing, checks, failing


def _detail(checks, failing, extra=""):
    head = f"{checks} checks"
    if extra:
        head += f", {extra}"
    return head + ("" if not failing else "; failing: " + ", ".join(failing))


def _renyi_off_domain_only(report, failing_names):
    """True when every failing family is a Renyi family whose ``.provable`` restriction passes.

    Off the domain ``1 + (1 - a) ln lambda_min > 0`` the prefactor no longer
    bounds the inverse relative purity, so those failures are counterexamples to
    the stated inequality rather than numerical defects.
    """
    for name in failing_names:
        prov = report.families.get(name + ".provable")
        if name.split(".")[1] != "R" or prov is None or not prov.passed or prov.checks == 0:
            return False
    return True


def _known_failure(reason):
    pytest.xfail(reason + " (analysis in the project decisions notes)")


def _panel(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(x) for x in r] for r in rows])


BOUND_FAMILIES = ([f"bound.{k}.{v}.{c}" for k in "RH" for v in ("forward", "reverse", "symmetric")
                   for c in ("appendix", "maintext")]
                  + ["bound.R.loose", "bound.H.loose", "bound.re_limit", "bound.min_limit.full_rank",
                     "bound.min_limit.pure"])
QSL_FAMILIES = ([f"qsl.{k}.{c}" for k in "RH" for c in ("appendix", "maintext")]
                + ["qsl.re", "qsl.min.full_rank", "qsl.min.pure"])


def test_criterion_1_bound_validity(sweep):
    report, seconds = sweep
    ok, checks, failing = _families(report, BOUND_FAMILIES)
    fast = seconds <= 60.0
    record_criterion(1, "bound validity sweep", ok and fast,
                     _detail(checks, failing, f"{seconds:.1f} s (limit 60 s)"))
    assert fast, f"sweep took {seconds:.1f} s"
    if not ok:
        names = [f.split(" ")[0] for f in failing]
        assert _renyi_off_domain_only(report, names), failing
        _known_failure("Renyi bounds fail only where 1 + (1 - a) ln lambda_min <= 0")


def test_criterion_2_qsl_validity(sweep, figure_runs):
    report, _ = sweep
    ok, checks, failing = _families(report, QSL_FAMILIES)
    run1, _, _ = figure_runs
    grid_bad = 0
    grid_points = 0
    for path in sorted(run1.glob("fig*.csv")):
        if path.stem in MERIT_PANELS:
            continue
        data = _panel(path)  # x = tau for every QSL panel
        grid_points += len(data)
        grid_bad += int(np.sum(data[:, 2] > data[:, 0] + 1e-9))
    if grid_bad:
        failing.append(f"figure grids ({grid_bad}/{grid_points})")
    passed = ok and grid_bad == 0
    record_criterion(2, "QSL validity", passed, _detail(checks + grid_points, failing, f"{grid_points} grid points"))
    assert grid_bad == 0, failing
    if not ok:
        names = [f.split(" ")[0] for f in failing]
        assert _renyi_off_domain_only(report, names), failing
        _known_failure("Renyi QSLs exceed tau only where 1 + (1 - a) ln lambda_min <= 0")


def _purity_gap(spec, steps=2048, tau=10.0):
    traj = propagate(spec.drive, tau, steps)
    rho = spec.state()
    w = ent.orbit_weights(rho, traj.unitaries)
    return max(float(np.abs(1.0 - ent.orbit_deficits(rho, w, a)[0] - qb.purity_closed(a, spec, traj.times)).max())
               for a in ALPHAS)


def _table_gap(spec, unitaries_from, steps=2048, tau=10.0):
    """Largest deviation of the closed-form table rows from dense numerics, split into U-free and U-dependent rows."""
    traj = propagate(spec.drive, tau, steps)
    t, h = traj.times, traj.hamiltonians
    u = traj.unitaries if unitaries_from == "numeric" else qb.propagator_closed(spec.drive, t)
    rho = spec.state()
    rt = u @ rho.matrix @ np.conj(np.swapaxes(u, -1, -2))
    idx = list(range(0, t.size, 8))
    free = dep = 0.0
    for a in ALPHAS:
        tab = qb.table1(spec, a, t)
        free = max(free,
                   float(np.abs(tab.comm_h_rho0_alpha - schatten2_many(commutator(h, matrix_power(rho, a)))).max()),
                   float(np.abs(tab.comm_h_rho0 - schatten2_many(commutator(h, rho.matrix))).max()),
                   abs(tab.power_norm - float(np.linalg.norm(matrix_power(rho, a)))))
        s = np.array([ent.quantum_relative_entropy(evolve_state(rho, u[k]), rho) for k in idx])
        dep = max(dep, float(np.abs(tab.comm_h_rhot - schatten2_many(commutator(h, rt))).max()),
                  float(np.abs(tab.relative_entropy[idx] - s).max()))
    return free, dep


def test_criterion_3_oracle_equivalence():
    specs = [qb.QubitBlochSpec.lz(*FIG_STATE, ratio) for ratio in RATIOS]
    purity = max(_purity_gap(spec) for spec in specs)
    table = [_table_gap(spec, "numeric") for spec in specs]
    free, dep = max(t[0] for t in table), max(t[1] for t in table)
    passed = purity <= 1e-8 and max(free, dep) <= 1e-9
    record_criterion(3, "oracle equivalence", passed,
                     f"Landau-Zener sweep, N=2048: max |g_numeric - g_closed| = {purity:.2e} (limit 1e-8); "
                     f"closed-form table rows without U: {free:.2e}, rows through U: {dep:.2e} (limit 1e-9)")

    # parts that do hold: U-free rows, the closed forms on their own propagator, and exact fixed-axis driving
    assert free <= 1e-9
    closed = max(_table_gap(spec, "closed")[1] for spec in specs)
    assert closed <= 1e-9, closed
    fixed = qb.QubitBlochSpec.fixed(*FIG_STATE, np.array([1.0, 2.0, -2.0]) / 3.0)
    assert _purity_gap(fixed) <= 1e-8
    assert max(_table_gap(fixed, "numeric")) <= 1e-9
    if not passed:
        _known_failure("the closed-form propagator ignores time ordering for the sweep")


def test_criterion_4_limit_continuity():
    rng = np.random.default_rng(SEED)
    a = 1.0 - 1e-4
    worst_r = worst_h = 0.0
    for i in range(100):
        d = 2 + i % 2
        rho, omega = random_state(rng, d), random_state(rng, d)
        assert rho.is_full_rank() and omega.is_full_rank()
        s = ent.quantum_relative_entropy(rho, omega)
        worst_r = max(worst_r, abs(ent.renyi(rho, omega, a) - s))
        worst_h = max(worst_h, abs(ent.tsallis(rho, omega, a) - s))
    passed = worst_r <= 1e-3 and worst_h <= 1e-3
    record_criterion(4, "limit continuity", passed,
                     f"max |R - S| = {worst_r:.2e}, max |H - S| = {worst_h:.2e} (limit 1e-3, seed {SEED})")
    assert passed


def test_criterion_5_full_rank_min_entropy():
    rng = np.random.default_rng(SEED + 5)
    worst_r0 = worst_tau = 0.0
    for i in range(100):
        d = 2 + i % 3
        rho = random_state(rng, d)
        traj = propagate(random_hamiltonian(rng, d, 1.0), 1.0, 32)
        rt = evolve_state(rho, traj.final)
        worst_r0 = max(worst_r0, abs(ent.min_relative_entropy(rt, rho)))
        rep, q = BoundProblem(rho, traj).min_limit()
        worst_r0 = max(worst_r0, abs(rep.lhs))
        worst_tau = max(worst_tau, abs(q.tau_max))
    passed = worst_r0 <= 1e-12 and worst_tau == 0.0
    record_criterion(5, "full-rank min-entropy degeneracy", passed,
                     f"max |R0| = {worst_r0:.1e}, max tau_0 = {worst_tau:.1e} over 100 states")
    assert passed


def test_criterion_6_derivative_inequality(sweep):
    report, _ = sweep
    ok, checks, failing = _families(report, ["derivative.R", "derivative.H"])
    record_criterion(6, "derivative inequality", ok, _detail(checks, failing, "64 interior points per scenario"))
    if not ok:
        names = [f.split(" ")[0] for f in failing]
        assert _renyi_off_domain_only(report, names), failing
        _known_failure("Renyi derivative bound fails only where 1 + (1 - a) ln lambda_min <= 0")


def test_criterion_7_inequality_chain(sweep):
    report, _ = sweep
    names = ["chain.tsallis_le_re", "chain.re_le_neglog_lambda_min", "chain.purity_floor", "skew.il_le_variance"]
    ok, checks, failing = _families(report, names)
    record_criterion(7, "inequality chain", ok, _detail(checks, failing))
    assert ok, failing


def test_criterion_8_commutator_norm(sweep):
    report, _ = sweep
    st = report.families["commutator_norm"]
    passed = st.passed and st.checks == 10000
    record_criterion(8, "commutator norm", passed,
                     f"{st.checks} pairs with d in 2..8, {st.failures} failures, worst relative margin {st.worst:.2e}")
    assert passed


def test_criterion_9_figure_regeneration(figure_runs):
    run1, run2, timings = figure_runs
    problems = []
    for name, (seconds, code) in timings.items():
        if code != 0:
            problems.append(f"{name} exit {code}")
        if seconds > 30.0:
            problems.append(f"{name} took {seconds:.1f} s")
    files = sorted(p.name for p in run1.iterdir())
    if files != sorted(p.name for p in run2.iterdir()):
        problems.append("different file sets")
    for f in files:
        if (run1 / f).read_bytes() != (run2 / f).read_bytes():
            problems.append(f"{f} differs between runs")
    panels = sorted(p for p in run1.glob("fig*.csv"))
    for p in panels:
        data = _panel(p)
        if len(data) != 100 * 100:
            problems.append(f"{p.stem} has {len(data)} points")
        if p.stem in MERIT_PANELS:
            v = data[:, 2]
            if v.min() < 0 or v.max() > 1 or v.max() != 1.0:
                problems.append(f"{p.stem} merit range [{v.min()}, {v.max()}]")
    slowest = max(s for s, _ in timings.values())
    passed = not problems
    record_criterion(9, "figure regeneration", passed,
                     f"{len(panels)} panels, slowest figure {slowest:.1f} s (limit 30 s), byte-identical reruns"
                     + ("" if passed else "; " + ", ".join(problems)))
    assert passed, problems
