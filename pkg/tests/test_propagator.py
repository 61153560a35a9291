"""Unitary propagation against closed-form and self-convergence oracles."""

import numpy as np
import pytest

from adiaudit import (
    HamiltonianModel,
    QuantumState,
    SpinHalfParams,
    TimeGrid,
    UsageError,
    build_dual_system,
    evolve_state,
    hermitian_conjugate_path,
    propagate,
    propagator_analytic,
    rotating_field_hamiltonian,
    step_unitary,
)
from conftest import random_smooth_model


@pytest.fixture(scope="module")
def spin_params() -> SpinHalfParams:
    return SpinHalfParams(1.0, 0.1, np.pi / 3)


@pytest.fixture(scope="module")
def spin_model(spin_params) -> HamiltonianModel:
    return rotating_field_hamiltonian(spin_params)


class TestStepUnitary:
    def test_matches_scalar_exponential_for_diagonal(self):
        ham = np.diag([1.0, -2.0]).astype(complex)
        unitary = step_unitary(ham, 0.3)
        assert np.allclose(
            unitary.entries, np.diag(np.exp([-0.3j, 0.6j])), atol=1e-14
        )

    def test_negative_step_inverts(self):
        ham = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        forward = step_unitary(ham, 0.2).entries
        backward = step_unitary(ham, -0.2).entries
        assert np.allclose(forward @ backward, np.eye(2), atol=1e-14)


class TestPropagateSpinHalf:
    def test_final_unitary_matches_closed_form(self, spin_params, spin_model):
        grid = TimeGrid(t_end=50.0, steps=50000)
        path = propagate(spin_model, grid)
        target = propagator_analytic(spin_params, grid.t_end)
        assert np.linalg.norm(path.final.entries - target.entries) < 5e-8

    def test_whole_path_matches_closed_form(self, spin_params, spin_model):
        grid = TimeGrid(t_end=10.0, steps=10000)
        path = propagate(spin_model, grid)
        worst = max(
            np.abs(path.unitary(k).entries - propagator_analytic(spin_params, t).entries).max()
            for k, t in zip((0, 2500, 5000, 10000), (0.0, 2.5, 5.0, 10.0))
        )
        assert worst < 1e-7

    def test_identity_at_t_zero(self, spin_model):
        path = propagate(spin_model, TimeGrid(t_end=1.0, steps=10))
        assert np.allclose(path.unitary(0).entries, np.eye(2), atol=0)

    def test_unitarity_defects_stay_tiny(self, spin_model):
        path = propagate(spin_model, TimeGrid(t_end=10.0, steps=5000))
        assert path.max_unitarity_defect < 1e-10

    def test_aligned_field_gives_diagonal_phases(self):
        params = SpinHalfParams(2.0, 0.3, 0.0)
        model = rotating_field_hamiltonian(params)
        grid = TimeGrid(t_end=7.0, steps=4000)
        path = propagate(model, grid)
        expected = np.diag(np.exp([1.0j * 7.0, -1.0j * 7.0]))
        assert np.abs(path.final.entries - expected).max() < 1e-10

    def test_restart_composition(self, spin_params, spin_model):
        half = TimeGrid(t_end=5.0, steps=5000)
        first = propagate(spin_model, half)
        shifted = HamiltonianModel(
            dimension=2,
            evaluate=lambda t: spin_model.evaluate(t + 5.0),
            derivative=lambda t: spin_model.derivative(t + 5.0),
        )
        second = propagate(shifted, half, initial=first.final.entries)
        target = propagator_analytic(spin_params, 10.0)
        assert np.abs(second.final.entries - target.entries).max() < 1e-7

    def test_initial_dimension_mismatch_rejected(self, spin_model):
        with pytest.raises(UsageError):
            propagate(spin_model, TimeGrid(1.0, 10), initial=np.eye(3, dtype=complex))


class TestPropagateRandomModel:
    def test_second_order_self_convergence(self):
        model = random_smooth_model(seed=42)
        reference = propagate(model, TimeGrid(t_end=5.0, steps=32000)).final.entries
        errors = []
        for steps in (1000, 2000, 4000):
            final = propagate(model, TimeGrid(t_end=5.0, steps=steps)).final.entries
            errors.append(np.linalg.norm(final - reference))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(np.abs(orders - 2.0) < 0.2)


class TestEvolveState:
    def test_matches_closed_form_states(self, spin_params, spin_model):
        grid = TimeGrid(t_end=10.0, steps=10000)
        path = propagate(spin_model, grid)
        initial = QuantumState(np.array([0.6, 0.8j]))
        trajectory = evolve_state(path, initial)
        target = propagator_analytic(spin_params, 10.0).entries @ initial.amplitudes
        assert np.abs(trajectory.state(10000).amplitudes - target).max() < 1e-7

    def test_preserves_norm(self, spin_model):
        path = propagate(spin_model, TimeGrid(t_end=5.0, steps=2000))
        trajectory = evolve_state(path, QuantumState(np.array([1.0, 1.0])))
        norms = np.linalg.norm(trajectory.states, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-12

    def test_dimension_mismatch_rejected(self, spin_model):
        path = propagate(spin_model, TimeGrid(t_end=1.0, steps=10))
        with pytest.raises(UsageError):
            evolve_state(path, QuantumState(np.ones(3)))


class TestConjugatePath:
    def test_pointwise_inverse_at_roundoff(self, spin_model):
        grid = TimeGrid(t_end=10.0, steps=5000)
        path = propagate(spin_model, grid)
        conj = hermitian_conjugate_path(path)
        products = np.einsum("kij,kjl->kil", conj.unitaries, path.unitaries)
        products[:, [0, 1], [0, 1]] -= 1.0
        # bounded by the path's own accumulated roundoff, far below any gate
        assert np.abs(products).max() < 1e-11

    def test_dual_numeric_propagation_matches_conjugate_oracle(self, spin_params, spin_model):
        grid = TimeGrid(t_end=50.0, steps=50000)
        prop = propagate(spin_model, grid)
        dual = build_dual_system(spin_model, prop)
        numeric = propagate(dual.dual_model, grid)
        target = propagator_analytic(spin_params, 50.0).conjugate_transpose()
        assert np.linalg.norm(numeric.final.entries - target.entries) < 1e-6
