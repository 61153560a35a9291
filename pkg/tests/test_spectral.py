"""Eigensystem tracking: pairing, transport, gauge handling, couplings."""

import numpy as np
import pytest

from adiaudit import (
    DegeneracyError,
    HamiltonianModel,
    SpinHalfParams,
    TimeGrid,
    TrackingError,
    coupling_matrix,
    coupling_moduli,
    coupling_via_hdot,
    decompose,
    eigen_derivative,
    eigenvector_derivatives,
    hdot_coupling_matrix,
    realign_phases,
    rotating_field_hamiltonian,
    spectral_path_closed_form,
    track,
)
from conftest import random_smooth_model

PARAMS = SpinHalfParams(1.0, 0.1, np.pi / 3)
MODEL = rotating_field_hamiltonian(PARAMS)


def crossing_model(coupled: bool = False) -> HamiltonianModel:
    """Two uncoupled levels crossing at t = 0.5 (optionally weakly coupled)."""
    off = 0.3 if coupled else 0.0

    def evaluate_many(ts):
        ts = np.asarray(ts, dtype=float)
        out = np.zeros(ts.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = ts - 0.5
        out[..., 1, 1] = 0.5 - ts
        out[..., 0, 1] = off
        out[..., 1, 0] = off
        return out

    return HamiltonianModel(
        dimension=2,
        evaluate=lambda t: evaluate_many(np.atleast_1d(np.asarray(t, dtype=float)))[0],
        evaluate_many=evaluate_many,
    )


class TestDecompose:
    def test_ascending_energies_and_residual(self, smooth_model):
        frame = decompose(smooth_model, 1.3)
        assert np.all(np.diff(frame.energies) > 0)
        ham = smooth_model.matrix(1.3)
        for level in range(3):
            vec = frame.vectors[:, level]
            assert np.abs(ham @ vec - frame.energies[level] * vec).max() < 1e-13

    def test_rejects_degenerate_point(self):
        with pytest.raises(DegeneracyError):
            decompose(crossing_model(), 0.5)


class TestTrack:
    def test_constant_energies_of_rotating_field(self):
        grid = TimeGrid(t_end=20.0, steps=2000)
        path = track(MODEL, grid)
        assert np.abs(path.energies[:, 0] + 0.5).max() < 1e-12
        assert np.abs(path.energies[:, 1] - 0.5).max() < 1e-12
        assert path.min_gap == pytest.approx(1.0, abs=1e-12)

    def test_vectors_continuous_under_transport(self):
        grid = TimeGrid(t_end=20.0, steps=2000)
        path = track(MODEL, grid)
        jumps = np.linalg.norm(np.diff(path.vectors, axis=0), axis=1).max()
        assert jumps < 2.0 * 0.06 * grid.step + 1e-6  # speed ~ omega/2 plus slack

    def test_levels_follow_through_a_crossing(self):
        # 999 steps puts the crossing between grid points; overlap pairing
        # must keep each diagonal level on its own straight line
        grid = TimeGrid(t_end=1.0, steps=999)
        path = track(crossing_model(), grid)
        assert np.abs(path.energies[:, 0] - (grid.times - 0.5)).max() < 1e-12
        assert np.abs(path.energies[:, 1] - (0.5 - grid.times)).max() < 1e-12

    def test_avoided_crossing_states_stay_sorted(self):
        grid = TimeGrid(t_end=1.0, steps=1000)
        path = track(crossing_model(coupled=True), grid)
        assert np.all(path.energies[:, 1] - path.energies[:, 0] >= 2 * 0.3 - 1e-12)

    def test_exact_crossing_on_grid_is_refused(self):
        with pytest.raises(DegeneracyError):
            track(crossing_model(), TimeGrid(t_end=1.0, steps=1000))

    def test_ambiguous_pairing_is_refused(self):
        def basis_swap(ts):
            ts = np.asarray(ts, dtype=float)
            phi = (np.pi / 2.0) * ts  # 45 degrees of eigenbasis rotation per step
            out = np.zeros(ts.shape + (2, 2), dtype=complex)
            out[..., 0, 0] = np.cos(2 * phi)
            out[..., 1, 1] = -np.cos(2 * phi)
            out[..., 0, 1] = np.sin(2 * phi)
            out[..., 1, 0] = np.sin(2 * phi)
            return out

        model = HamiltonianModel(
            dimension=2,
            evaluate=lambda t: basis_swap(np.atleast_1d(np.asarray(t, dtype=float)))[0],
            evaluate_many=basis_swap,
        )
        with pytest.raises(TrackingError):
            track(model, TimeGrid(t_end=1.0, steps=2))

    def test_transport_makes_consecutive_overlaps_real_positive(self):
        path = track(MODEL, TimeGrid(t_end=10.0, steps=1000))
        overlaps = np.einsum("kim,kim->km", path.vectors[:-1].conj(), path.vectors[1:])
        assert np.abs(overlaps.imag).max() < 1e-12
        assert overlaps.real.min() > 0.9


class TestGauge:
    def _scrambled(self, path):
        rng = np.random.default_rng(99)
        phases = np.exp(2j * np.pi * rng.random(path.vectors.shape[::2]))
        vectors = path.vectors * phases[:, None, :]
        return type(path)(
            grid=path.grid,
            energies=path.energies,
            vectors=vectors,
            min_gaps=path.min_gaps,
            gauge="scrambled",
        )

    def test_realign_recovers_coupling_moduli(self):
        path = track(MODEL, TimeGrid(t_end=10.0, steps=1000))
        scrambled = self._scrambled(path)
        realigned = realign_phases(scrambled)
        original = np.abs(coupling_matrix(path))
        recovered = np.abs(coupling_matrix(realigned))
        assert np.abs(original - recovered).max() < 1e-9

    def test_coupling_moduli_ignore_phases_entirely(self):
        path = track(MODEL, TimeGrid(t_end=10.0, steps=1000))
        scrambled = self._scrambled(path)
        assert np.abs(coupling_moduli(path) - coupling_moduli(scrambled)).max() < 1e-12


class TestCouplings:
    def test_offdiagonal_modulus_matches_closed_form(self):
        grid = TimeGrid(t_end=20.0, steps=4000)
        path = track(MODEL, grid)
        expected = PARAMS.omega * np.sin(PARAMS.theta) / 2.0
        moduli = np.abs(coupling_matrix(path))
        assert np.abs(moduli[:, 0, 1] - expected).max() < 1e-6
        assert np.abs(moduli[:, 1, 0] - expected).max() < 1e-6
        overlap_based = coupling_moduli(path)
        assert np.abs(overlap_based[:, 0, 1] - expected).max() < 1e-6

    def test_diagonal_small_in_transported_gauge(self):
        path = track(MODEL, TimeGrid(t_end=20.0, steps=4000))
        diag = coupling_matrix(path)[:, [0, 1], [0, 1]]
        assert np.abs(diag.real).max() < 1e-8
        assert np.abs(diag.imag).max() < 1e-6

    def test_closed_form_gauge_diagonal_carries_the_connection(self):
        grid = TimeGrid(t_end=20.0, steps=4000)
        path = spectral_path_closed_form(PARAMS, grid)
        diag = coupling_matrix(path)[:, [0, 1], [0, 1]]
        expected = 0.5 * PARAMS.omega * np.cos(PARAMS.theta)
        # upper level (ascending index 1): +i(omega/2)cos(theta)
        assert np.abs(diag[:, 1] - 1j * expected).max() < 1e-6
        assert np.abs(diag[:, 0] + 1j * expected).max() < 1e-6

    def test_two_coupling_routes_agree(self, smooth_model):
        grid = TimeGrid(t_end=5.0, steps=5000)
        path = track(smooth_model, grid)
        gate = max(1e-6, 10.0 * grid.step**2)
        fd_route = np.abs(coupling_matrix(path))
        hdot_route = np.abs(hdot_coupling_matrix(smooth_model, path))
        mask = ~np.eye(3, dtype=bool)
        assert np.abs((fd_route - hdot_route)[:, mask]).max() < gate
        overlap_route = coupling_moduli(path)
        assert np.abs((overlap_route - hdot_route)[:, mask]).max() < gate

    def test_single_pair_helper_matches_table(self, smooth_model):
        grid = TimeGrid(t_end=5.0, steps=2000)
        path = track(smooth_model, grid)
        table = hdot_coupling_matrix(smooth_model, path)
        value = coupling_via_hdot(smooth_model, path, 0, 2, 700)
        assert value == pytest.approx(table[700, 0, 2], abs=1e-12)

    def test_eigen_derivative_slicing(self):
        path = track(MODEL, TimeGrid(t_end=10.0, steps=500))
        full = eigenvector_derivatives(path)
        one = eigen_derivative(path, level=1, k=250)
        assert np.abs(one - full[250, :, 1]).max() < 1e-15


class TestEnergyContinuity:
    def test_weyl_bound_on_consecutive_energies(self, smooth_model):
        grid = TimeGrid(t_end=5.0, steps=500)
        path = track(smooth_model, grid)
        stack = smooth_model.sample(grid.times)
        h_jumps = np.linalg.norm(np.diff(stack, axis=0), axis=(1, 2))
        e_jumps = np.abs(np.diff(path.energies, axis=0)).max(axis=1)
        assert np.all(e_jumps <= h_jumps + 1e-12)
