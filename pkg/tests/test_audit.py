"""Phases, validity fidelity, condition metrics, and the identity chain."""

import numpy as np
import pytest

from adiaudit import (
    GaugeCorruptionError,
    HamiltonianModel,
    QuantumState,
    SpectralPath,
    SpinHalfParams,
    TimeGrid,
    UsageError,
    adiabatic_phase,
    adiabatic_state,
    adiabatic_trajectory,
    audit_conditions,
    build_dual_system,
    condition_lidar,
    condition_pointwise,
    condition_pointwise_hdot,
    condition_roland,
    evolve_state,
    hermitian_conjugate_path,
    marzlin_sanders_residual,
    propagate,
    reduced_fidelity_initial_overlap,
    reduced_fidelity_propagated,
    rotating_field_hamiltonian,
    spectral_path_closed_form,
    track,
    validity_fidelity,
)

PARAMS = SpinHalfParams(1.0, 0.1, np.pi / 3)
MODEL = rotating_field_hamiltonian(PARAMS)


def constant_model() -> HamiltonianModel:
    levels = np.diag([0.3, -0.7, 1.9]).astype(complex)

    def evaluate_many(ts):
        ts = np.asarray(ts, dtype=float)
        return np.broadcast_to(levels, ts.shape + (3, 3)).copy()

    return HamiltonianModel(
        dimension=3,
        evaluate=lambda t: levels.copy(),
        derivative=lambda t: np.zeros((3, 3), dtype=complex),
        evaluate_many=evaluate_many,
    )


@pytest.fixture(scope="module")
def spin_run():
    grid = TimeGrid(t_end=62.831853071795862, steps=20000)
    prop = propagate(MODEL, grid)
    path = track(MODEL, grid)
    exact = evolve_state(prop, QuantumState(path.vectors[0, :, 0]))
    return grid, prop, path, exact


class TestAdiabaticPhase:
    def test_constant_hamiltonian_phases(self):
        model = constant_model()
        grid = TimeGrid(t_end=4.0, steps=400)
        path = track(model, grid)
        dyn, geo = adiabatic_phase(path, level=2)  # highest level: E = 1.9
        assert np.abs(dyn - (-1.9) * grid.times).max() < 1e-12
        assert np.abs(geo).max() < 1e-12

    def test_closed_form_gauge_geometric_rate(self):
        grid = TimeGrid(t_end=20.0, steps=8000)
        path = spectral_path_closed_form(PARAMS, grid)
        rate = 0.5 * PARAMS.omega * np.cos(PARAMS.theta)
        _, geo_up = adiabatic_phase(path, level=1)
        _, geo_dn = adiabatic_phase(path, level=0)
        assert np.abs(geo_up - (-rate) * grid.times).max() < 1e-6
        assert np.abs(geo_dn - rate * grid.times).max() < 1e-6

    def test_transported_gauge_geometric_phase_vanishes(self, spin_run):
        _, _, path, _ = spin_run
        _, geo = adiabatic_phase(path, level=0)
        assert np.abs(geo).max() < 1e-8

    def test_connection_purely_imaginary_on_closed_form_path(self):
        grid = TimeGrid(t_end=10.0, steps=20000)
        path = spectral_path_closed_form(PARAMS, grid)
        from adiaudit.spectral import coupling_matrix

        diag = coupling_matrix(path)[:, [0, 1], [0, 1]]
        assert np.abs(diag.real).max() < 1e-8

    def test_scrambled_gauge_is_refused(self, spin_run):
        _, _, path, _ = spin_run
        rng = np.random.default_rng(3)
        phases = np.exp(2j * np.pi * rng.random((path.vectors.shape[0], 2)))
        corrupted = SpectralPath(
            grid=path.grid,
            energies=path.energies,
            vectors=path.vectors * phases[:, None, :],
            min_gaps=path.min_gaps,
            gauge="scrambled",
        )
        with pytest.raises(GaugeCorruptionError):
            adiabatic_phase(corrupted, level=0)

    def test_level_out_of_range(self, spin_run):
        _, _, path, _ = spin_run
        with pytest.raises(UsageError):
            adiabatic_phase(path, level=2)


class TestAdiabaticTrajectory:
    def test_states_normalized_and_start_on_eigenvector(self, spin_run):
        _, _, path, _ = spin_run
        adi = adiabatic_trajectory(path, level=0)
        norms = np.linalg.norm(adi.states, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-12
        assert np.abs(adi.state(0).amplitudes - path.vectors[0, :, 0]).max() < 1e-12

    def test_single_state_accessor_matches(self, spin_run):
        _, _, path, _ = spin_run
        adi = adiabatic_trajectory(path, level=0)
        one = adiabatic_state(path, level=0, k=1234)
        assert np.abs(one.amplitudes - adi.state(1234).amplitudes).max() < 1e-14


class TestValidityFidelity:
    def test_static_system_keeps_fidelity_one(self):
        model = constant_model()
        grid = TimeGrid(t_end=6.0, steps=600)
        prop = propagate(model, grid)
        path = track(model, grid)
        exact = evolve_state(prop, QuantumState(path.vectors[0, :, 1]))
        result = validity_fidelity(adiabatic_trajectory(path, 1), exact)
        assert np.abs(result.values - 1.0).max() < 1e-10
        assert result.minimum == pytest.approx(1.0, abs=1e-10)
        assert result.final == pytest.approx(1.0, abs=1e-10)

    def test_slow_rotation_is_valid(self, spin_run):
        _, _, path, exact = spin_run
        result = validity_fidelity(adiabatic_trajectory(path, 0), exact)
        assert result.minimum > 0.99

    def test_grid_mismatch_rejected(self, spin_run):
        _, _, path, _ = spin_run
        other_grid = TimeGrid(t_end=1.0, steps=10)
        other = evolve_state(
            propagate(MODEL, other_grid), QuantumState(path.vectors[0, :, 0])
        )
        with pytest.raises(UsageError):
            validity_fidelity(adiabatic_trajectory(path, 0), other)


class TestReducedForms:
    def test_propagated_form_equals_validity_fidelity(self, spin_run):
        _, prop, path, exact = spin_run
        direct = validity_fidelity(adiabatic_trajectory(path, 0), exact)
        reduced = reduced_fidelity_propagated(path, prop, level=0)
        assert np.abs(direct.values - reduced.values).max() < 1e-10

    def test_initial_overlap_form_equals_dual_fidelity(self, spin_run):
        grid, prop, path_a, _ = spin_run
        dual = build_dual_system(MODEL, prop)
        path_b = track(dual.dual_model, grid)
        exact_b = evolve_state(
            hermitian_conjugate_path(prop), QuantumState(path_b.vectors[0, :, 0])
        )
        dual_fid = validity_fidelity(adiabatic_trajectory(path_b, 0), exact_b)
        # level 0 of the dual corresponds to level 1 of the primal
        reduced = reduced_fidelity_initial_overlap(path_a, level=1)
        assert np.abs(dual_fid.values - reduced.values).max() < 1e-9


class TestConditionMetrics:
    def test_pointwise_value(self, spin_run):
        _, _, path, _ = spin_run
        expected = PARAMS.omega * np.sin(PARAMS.theta) / (2.0 * PARAMS.omega0)
        result = condition_pointwise(path)
        assert result.maximum == pytest.approx(expected, rel=1e-6)
        assert result.per_time_max.shape == (20001,)
        assert result.ratios[:, 0, 0].max() == 0.0

    def test_hdot_form_value(self, spin_run):
        _, _, path, _ = spin_run
        expected = PARAMS.omega * np.sin(PARAMS.theta) / (2.0 * PARAMS.omega0)
        result = condition_pointwise_hdot(MODEL, path)
        assert result.maximum == pytest.approx(expected, rel=1e-8)

    def test_lidar_form(self, spin_run):
        _, _, path, _ = spin_run
        result = condition_lidar(MODEL, path)
        assert result.lhs == pytest.approx(
            PARAMS.omega0 * PARAMS.omega * np.sin(PARAMS.theta) / 2.0, rel=1e-8
        )
        assert result.rhs == pytest.approx(PARAMS.omega0**2, rel=1e-10)
        assert result.satisfied
        strict = condition_lidar(MODEL, path, margin=0.01)
        assert not strict.satisfied

    def test_roland_metric(self, spin_run):
        _, _, path, _ = spin_run
        value = condition_roland(MODEL, path)
        assert value == pytest.approx(
            PARAMS.omega * np.sin(PARAMS.theta) / (2.0 * PARAMS.omega0), rel=1e-8
        )

    def test_report_consistent_with_standalone_calls(self, spin_run):
        _, _, path, exact = spin_run
        report = audit_conditions(MODEL, path, exact, level=0)
        assert report.pointwise_ratio_max == pytest.approx(
            condition_pointwise(path).maximum, abs=1e-14
        )
        assert report.hdot_ratio_max == pytest.approx(
            condition_pointwise_hdot(MODEL, path).maximum, abs=1e-12
        )
        assert report.roland_epsilon == pytest.approx(condition_roland(MODEL, path), abs=1e-12)
        assert report.lidar_lhs == pytest.approx(condition_lidar(MODEL, path).lhs, abs=1e-12)
        direct = validity_fidelity(adiabatic_trajectory(path, 0), exact)
        assert report.fidelity_min == pytest.approx(direct.minimum, abs=1e-14)
        assert report.fidelity_final == pytest.approx(direct.final, abs=1e-14)

    def test_report_level_out_of_range(self, spin_run):
        _, _, path, exact = spin_run
        with pytest.raises(UsageError):
            audit_conditions(MODEL, path, exact, level=7)


class TestMarzlinSandersChain:
    def test_exact_value_stays_unity(self, spin_run):
        _, prop, path, _ = spin_run
        chain = marzlin_sanders_residual(path, prop, level=0)
        assert np.abs(chain.exact_values - 1.0).max() < 1e-10
        assert abs(chain.final_exact - 1.0) < 1e-10

    def test_adiabatic_value_follows_fidelity_law(self, spin_run):
        grid, prop, path, _ = spin_run
        chain = marzlin_sanders_residual(path, prop, level=0)
        law = 1.0 - (np.sin(PARAMS.theta) * np.sin(PARAMS.omega * grid.times / 2.0)) ** 2
        assert np.abs(np.abs(chain.adiabatic_values) ** 2 - law).max() < 1e-6

    def test_values_are_gauge_invariant(self, spin_run):
        grid, prop, path, _ = spin_run
        closed = spectral_path_closed_form(PARAMS, grid)
        transported = marzlin_sanders_residual(path, prop, level=0)
        canonical = marzlin_sanders_residual(closed, prop, level=0)
        assert np.abs(
            np.abs(transported.adiabatic_values) - np.abs(canonical.adiabatic_values)
        ).max() < 1e-9
