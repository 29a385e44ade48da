import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qslbound import evolution as ev
from qslbound.errors import DimMismatch, OutOfRange, ZeroHorizon
from qslbound.matrix_core import SIGMA_X, SIGMA_Z, ConstantHamiltonian, TabulatedHamiltonian, dagger

from .conftest import drive_from, seeds

H_CONST = np.array([[1.0, 0.5 - 0.2j], [0.5 + 0.2j, -0.3]])
# exp(-0.7 i H_CONST) at 30 digits (mpmath.expm)
U_REF = np.array([[0.70160521525501751831 - 0.61760514834583328573j, -0.20809347928359303489 - 0.28811648086031217257j],
                  [0.048012639732785865848 - 0.35214881668063504374j, 0.90971030667106683629 + 0.21473973845739808836j]])


def test_constant_hamiltonian_is_exact():
    traj = ev.propagate(ConstantHamiltonian(H_CONST), 0.7, 2)
    np.testing.assert_allclose(traj.final, U_REF, atol=1e-14)


def test_trajectory_shape_and_prefix():
    traj = ev.propagate(ConstantHamiltonian(SIGMA_Z), 2.0, 8)
    assert traj.steps == 8 and traj.tau == 2.0 and traj.dim == 2
    pre = traj.upto(4)
    assert pre.tau == 1.0
    np.testing.assert_allclose(pre.final, np.diag(np.exp([-1j, 1j])), atol=1e-15)
    with pytest.raises(OutOfRange):
        traj.upto(9)


def test_propagate_arguments():
    h = ConstantHamiltonian(SIGMA_Z)
    with pytest.raises(OutOfRange):
        ev.propagate(h, -1.0, 4)
    with pytest.raises(OutOfRange):
        ev.propagate(h, 1.0, 1)


def test_midpoint_is_second_order():
    spec = TabulatedHamiltonian(np.array([0.0, 1.0]), np.stack([SIGMA_X, SIGMA_Z]))
    ref = ev.propagate(spec, 1.0, 4096).final
    e1 = np.abs(ev.propagate(spec, 1.0, 32).final - ref).max()
    e2 = np.abs(ev.propagate(spec, 1.0, 64).final - ref).max()
    assert 3.5 < e1 / e2 < 4.5


@given(seeds, st.integers(min_value=2, max_value=4), st.floats(min_value=0.1, max_value=5.0))
def test_unitarity_preserved(seed, d, tau):
    _, h = drive_from(seed, d, tau)
    traj = ev.propagate(h, tau, 64)
    assert traj.unitarity_defect().max() < 1e-12


def test_reorthonormalized_product_agrees():
    spec = TabulatedHamiltonian(np.array([0.0, 3.0]), np.stack([SIGMA_X, SIGMA_Z]))
    a = ev.propagate(spec, 3.0, 200)
    b = ev.propagate(spec, 3.0, 200, reorthonormalize_every=16)
    np.testing.assert_allclose(a.unitaries, b.unitaries, atol=1e-12)


def test_heisenberg_and_evolved_matrices():
    traj = ev.propagate(ConstantHamiltonian(SIGMA_Z), 1.0, 4)
    u = traj.unitaries
    np.testing.assert_allclose(traj.evolve_matrices(SIGMA_X), u @ SIGMA_X @ dagger(u))
    np.testing.assert_allclose(traj.heisenberg_hamiltonians(), np.broadcast_to(SIGMA_Z, (5, 2, 2)), atol=1e-15)


def test_trajectory_from_unitaries_checks_shapes():
    with pytest.raises(DimMismatch):
        ev.trajectory_from_unitaries([0.0, 1.0], np.stack([np.eye(2)] * 3), np.stack([np.eye(2)] * 3))


def test_quadrature_rules():
    t = np.linspace(0.0, 2.0, 9)
    f = t**3
    assert ev.integrate(f, 2.0) == pytest.approx(4.0, abs=1e-14)  # Simpson exact for cubics
    assert ev.integrate(t, 2.0, ev.TRAPEZOID) == pytest.approx(2.0, abs=1e-15)
    assert ev.integrate(f, 0.0) == 0.0
    avg = ev.time_average(np.sin(np.linspace(0, math.pi, 129)), math.pi)
    assert avg.value == pytest.approx(2 / math.pi, abs=1e-8)
    with pytest.raises(OutOfRange):
        ev.quadrature_weights(3, 1.0)
    with pytest.raises(ZeroHorizon):
        ev.time_average([1.0, 1.0, 1.0], 0.0)
    with pytest.raises(ValueError):
        ev.quadrature_weights(4, 1.0, "gauss")
