import math

import numpy as np
import pytest
from hypothesis import assume, given

from qslbound import entropy as ent
from qslbound.errors import DimMismatch, NonPositivePurity, OutOfRange
from qslbound.evolution import evolve_state
from qslbound.matrix_core import DensityMatrix, from_bloch, maximally_mixed, pure_state

from .conftest import alphas, dims, orbit_from, pair_from, seeds, state_from

# Reference pair; values below were computed at 30 digits with mpmath from the
# matrix definitions (eigendecomposition, fractional powers, trace).
RHO = DensityMatrix.from_matrix(np.array([[0.5, 0.1 + 0.05j, 0.0],
                                          [0.1 - 0.05j, 0.3, 0.05],
                                          [0.0, 0.05, 0.2]]))
OMEGA = DensityMatrix.from_matrix(np.array([[1 / 3, 0.0, 0.1j],
                                            [0.0, 1 / 3, 1 / 12],
                                            [-0.1j, 1 / 12, 1 / 3]]))
REFERENCE = {
    0.3: (0.97177126319084549208, 0.040906897357906847026, 0.040326766870220725605),
    0.5: (0.96614650642019897692, 0.068879586616829396366, 0.067706987159602046153),
    0.8: (0.9779045515279384659, 0.11171604642391374267, 0.11047724236030767052),
}
S_FWD = 0.140721526105767101
S_REV = 0.1340914667226260398


def test_reference_spectrum():
    np.testing.assert_allclose(RHO.values, [0.17213990417286127578, 0.27664988864082798342, 0.5512102071863107408],
                               rtol=0, atol=1e-15)


@pytest.mark.parametrize("alpha", sorted(REFERENCE))
def test_reference_divergences(alpha):
    g, r, h = REFERENCE[alpha]
    assert ent.relative_purity(RHO, OMEGA, alpha) == pytest.approx(g, abs=1e-14)
    assert ent.renyi(RHO, OMEGA, alpha) == pytest.approx(r, abs=1e-13)
    assert ent.tsallis(RHO, OMEGA, alpha) == pytest.approx(h, abs=1e-13)
    assert ent.divergence("R", RHO, OMEGA, alpha) == ent.renyi(RHO, OMEGA, alpha)
    assert ent.symmetrized("H", RHO, OMEGA, alpha) == pytest.approx(
        ent.tsallis(RHO, OMEGA, alpha) + ent.tsallis(OMEGA, RHO, alpha), abs=1e-15)


def test_reference_relative_entropy():
    assert ent.quantum_relative_entropy(RHO, OMEGA) == pytest.approx(S_FWD, abs=1e-13)
    assert ent.quantum_relative_entropy(OMEGA, RHO) == pytest.approx(S_REV, abs=1e-13)


def test_alpha_domain():
    for a in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(OutOfRange):
            ent.renyi(RHO, OMEGA, a)
    with pytest.raises(DimMismatch):
        ent.renyi(RHO, maximally_mixed(2), 0.5)


def test_kind_parsing():
    assert ent.EntropyKind.parse("Renyi") is ent.EntropyKind.RENYI
    assert ent.EntropyKind.parse("TRE") is ent.EntropyKind.TSALLIS
    with pytest.raises(ValueError):
        ent.EntropyKind.parse("Q")


def test_commuting_states_are_exact():
    rho = DensityMatrix.from_matrix(np.diag([0.1, 0.3, 0.6]))
    # an evolution that commutes with rho leaves every divergence exactly zero
    u = np.diag(np.exp(1j * np.array([0.3, -1.2, 2.0])))
    rt = evolve_state(rho, u)
    for a in (0.1, 0.5, 0.9):
        assert ent.renyi(rt, rho, a) == 0.0
        assert ent.tsallis(rt, rho, a) == 0.0
    assert ent.quantum_relative_entropy(rt, rho) == 0.0


def test_orthogonal_pure_states():
    a, b = pure_state([1, 0]), pure_state([0, 1])
    with pytest.raises(NonPositivePurity):
        ent.renyi(a, b, 0.5)
    assert ent.tsallis(a, b, 0.5) == pytest.approx(2.0, abs=1e-15)
    assert ent.quantum_relative_entropy(a, b) == math.inf
    assert ent.min_relative_entropy(a, b) == math.inf


def test_min_relative_entropy():
    psi = pure_state([1, 1])
    omega = DensityMatrix.from_matrix(np.diag([0.25, 0.75]))
    assert ent.min_relative_entropy(psi, omega) == pytest.approx(math.log(2), abs=1e-15)
    assert ent.min_relative_entropy(omega, psi) == 0.0


def test_pure_state_tsallis_support():
    # rank-deficient rho with full-rank omega stays finite
    psi = pure_state([1, 0])
    omega = from_bloch(0.5, 0.0, 0.0)
    assert ent.renyi(psi, omega, 0.5) == pytest.approx(-2 * math.log(math.sqrt(0.75)), abs=1e-14)


def test_orbit_deficits_match_pairwise():
    rng = np.random.default_rng(0)
    from qslbound.ensembles import random_unitary
    us = np.stack([random_unitary(rng, 3) for _ in range(4)])
    w = ent.orbit_weights(RHO, us)
    fwd, rev = ent.orbit_deficits(RHO, w, 0.4)
    for k in range(4):
        rt = evolve_state(RHO, us[k])
        assert fwd[k] == pytest.approx(ent.purity_deficit(rt, RHO, 0.4), abs=1e-14)
        assert rev[k] == pytest.approx(ent.purity_deficit(RHO, rt, 0.4), abs=1e-14)


@given(seeds, dims, alphas)
def test_nonnegative_and_ordered(seed, d, a):
    rho, omega = pair_from(seed, d)
    r, h = ent.renyi(rho, omega, a), ent.tsallis(rho, omega, a)
    assert h >= -1e-14
    assert r >= h - 1e-14  # -ln g >= 1 - g
    assert h <= ent.quantum_relative_entropy(rho, omega) + 1e-12


@given(seeds, dims, alphas)
def test_self_divergence_vanishes(seed, d, a):
    rho = state_from(seed, d)
    assert abs(ent.renyi(rho, rho, a)) < 1e-12
    assert abs(ent.tsallis(rho, rho, a)) < 1e-12
    assert abs(ent.quantum_relative_entropy(rho, rho)) < 1e-14


@given(seeds, dims, alphas)
def test_joint_unitary_invariance(seed, d, a):
    rho, u = orbit_from(seed, d)
    omega = state_from(seed + 1, d)
    lhs = ent.renyi(evolve_state(rho, u), evolve_state(omega, u), a)
    assert lhs == pytest.approx(ent.renyi(rho, omega, a), abs=1e-12)


@given(seeds, dims, alphas, alphas)
def test_renyi_monotone_in_alpha(seed, d, a, b):
    assume(abs(a - b) > 1e-3)
    rho, omega = pair_from(seed, d)
    lo, hi = sorted((a, b))
    assert ent.renyi(rho, omega, lo) <= ent.renyi(rho, omega, hi) + 1e-12


@given(seeds, dims, alphas)
def test_purity_floor(seed, d, a):
    rho, u = orbit_from(seed, d)
    g = ent.relative_purity(evolve_state(rho, u), rho, a)
    assert g >= 1 + (1 - a) * math.log(rho.lambda_min) - 1e-9
    assert g <= 1 + 1e-14


@given(seeds, dims)
def test_relative_entropy_chain(seed, d):
    rho, u = orbit_from(seed, d)
    s = ent.quantum_relative_entropy(evolve_state(rho, u), rho)
    assert -1e-14 <= s <= -math.log(rho.lambda_min) + 1e-9
