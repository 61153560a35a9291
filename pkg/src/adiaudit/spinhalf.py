"""Closed forms for a spin-1/2 in a uniformly rotating field.

The Hamiltonian is

    H(t) = -(omega0/2) (sx sin(theta) cos(omega t)
                        + sy sin(theta) sin(omega t)
                        + sz cos(theta)),

a field of fixed magnitude omega0/2 precessing about z at frequency omega
with opening angle theta. Everything about this model is solvable: the
instantaneous eigenpairs, the exact propagator (via the rotating frame), the
exact and adiabatic states of its dual partner, and the dual's validity
fidelity

    |<dual_adiabatic(t)|dual_exact(t)>|^2 = 1 - sin^2(theta) sin^2(omega t/2).

These closed forms are the reference oracles for the numerical machinery in
the rest of the package.

Level labels: this module labels the instantaneous levels 1 (upper, energy
+omega0/2) and 2 (lower, -omega0/2), the customary order for this model.
:func:`ascending_index` maps a label to the tracker's ascending-energy index
(label 1 -> index 1, label 2 -> index 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HamiltonianModel, QuantumState, TimeGrid, UnitaryMatrix
from .errors import UsageError
from .propagator import PropagatorPath, _defect_stack
from .spectral import SpectralPath

__all__ = [
    "SpinHalfParams",
    "rotating_field_hamiltonian",
    "eigenpairs_analytic",
    "ascending_index",
    "propagator_analytic",
    "propagator_path_closed_form",
    "spectral_path_closed_form",
    "dual_exact_state",
    "dual_adiabatic_state",
    "dual_fidelity_law",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class SpinHalfParams:
    """Field magnitude omega0, rotation frequency omega, opening angle theta."""

    omega0: float
    omega: float
    theta: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.omega0) and self.omega0 > 0):
            raise UsageError(f"omega0 must be positive, got {self.omega0}")
        if not (np.isfinite(self.omega) and self.omega >= 0):
            raise UsageError(f"omega must be non-negative, got {self.omega}")
        if not (np.isfinite(self.theta) and 0.0 <= self.theta <= np.pi):
            raise UsageError(f"theta must lie in [0, pi], got {self.theta}")
        if self.omega_bar <= 0.0:
            raise UsageError("degenerate dressed frequency: omega == omega0 with theta == pi")

    @property
    def omega_bar(self) -> float:
        """Dressed (rotating-frame) frequency sqrt(w0^2 + w^2 + 2 w0 w cos(theta))."""
        return float(
            np.sqrt(
                self.omega0**2
                + self.omega**2
                + 2.0 * self.omega0 * self.omega * np.cos(self.theta)
            )
        )


def _field_matrix(params: SpinHalfParams, t: np.ndarray) -> np.ndarray:
    """H(t) for scalar or array t; output shape t.shape + (2, 2)."""
    t = np.asarray(t, dtype=float)
    st, ct = np.sin(params.theta), np.cos(params.theta)
    phase = np.exp(-1j * params.omega * t)
    out = np.empty(t.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ct
    out[..., 0, 1] = st * phase
    out[..., 1, 0] = st * phase.conj()
    out[..., 1, 1] = -ct
    return -(params.omega0 / 2.0) * out


def _field_matrix_dot(params: SpinHalfParams, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    st = np.sin(params.theta)
    phase = np.exp(-1j * params.omega * t)
    out = np.zeros(t.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = -1j * params.omega * st * phase
    out[..., 1, 0] = (1j * params.omega * st * phase.conj())
    return -(params.omega0 / 2.0) * out


def rotating_field_hamiltonian(params: SpinHalfParams) -> HamiltonianModel:
    """The rotating-field model as a :class:`HamiltonianModel` (analytic dH/dt)."""
    return HamiltonianModel(
        dimension=2,
        evaluate=lambda t: _field_matrix(params, t),
        derivative=lambda t: _field_matrix_dot(params, t),
        kind="spin-half rotating field",
        evaluate_many=lambda ts: _field_matrix(params, ts),
        derivative_many=lambda ts: _field_matrix_dot(params, ts),
    )


def eigenpairs_analytic(params: SpinHalfParams, t: float):
    """Closed-form instantaneous eigenpairs ((E1, v1), (E2, v2)), upper first.

    The vectors carry the canonical analytic gauge (components proportional to
    exp(-+i omega t / 2)); in this gauge the diagonal connections are
    <E1|dE1/dt> = +i (omega/2) cos(theta) and <E2|dE2/dt> = -i (omega/2) cos(theta).
    """
    s, c = np.sin(params.theta / 2.0), np.cos(params.theta / 2.0)
    em = np.exp(-1j * params.omega * t / 2.0)
    ep = np.exp(+1j * params.omega * t / 2.0)
    upper = np.array([em * s, -ep * c])
    lower = np.array([em * c, ep * s])
    return (params.omega0 / 2.0, upper), (-params.omega0 / 2.0, lower)


def ascending_index(label: int) -> int:
    """Map this module's level labels {1: upper, 2: lower} to ascending indices."""
    if label == 1:
        return 1
    if label == 2:
        return 0
    raise UsageError(f"level label must be 1 or 2, got {label}")


def _propagator_entries(params: SpinHalfParams, t: np.ndarray) -> np.ndarray:
    """Exact U(t) entries for scalar or array t; shape t.shape + (2, 2)."""
    t = np.asarray(t, dtype=float)
    wb = params.omega_bar
    a = (params.omega + params.omega0 * np.cos(params.theta)) / wb
    b = params.omega0 * np.sin(params.theta) / wb
    co = np.cos(wb * t / 2.0)
    si = np.sin(wb * t / 2.0)
    em = np.exp(-1j * params.omega * t / 2.0)
    ep = np.exp(+1j * params.omega * t / 2.0)
    out = np.empty(t.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = (co + 1j * a * si) * em
    out[..., 0, 1] = 1j * b * si * em
    out[..., 1, 0] = 1j * b * si * ep
    out[..., 1, 1] = (co - 1j * a * si) * ep
    return out


def propagator_analytic(params: SpinHalfParams, t: float) -> UnitaryMatrix:
    """Exact evolution operator U(t) (rotating-frame solution)."""
    return UnitaryMatrix(_propagator_entries(params, float(t)))


def propagator_path_closed_form(params: SpinHalfParams, grid: TimeGrid) -> PropagatorPath:
    """Exact U(t_k) on every grid point, packaged like a propagated path."""
    unitaries = _propagator_entries(params, grid.times)
    defects = _defect_stack(unitaries)
    unitaries.setflags(write=False)
    defects.setflags(write=False)
    return PropagatorPath(grid=grid, unitaries=unitaries, unitarity_defects=defects)


def spectral_path_closed_form(params: SpinHalfParams, grid: TimeGrid) -> SpectralPath:
    """Closed-form eigensystem on a grid, in the canonical analytic gauge.

    Levels are stored in ascending order (index 0 = lower level), matching the
    tracker's convention at t = 0; unlike tracker output the gauge here is the
    analytic one, so diagonal connections are nonzero and phase integrals
    reproduce the textbook geometric phases.
    """
    ts = grid.times
    s, c = np.sin(params.theta / 2.0), np.cos(params.theta / 2.0)
    em = np.exp(-1j * params.omega * ts / 2.0)
    ep = np.exp(+1j * params.omega * ts / 2.0)
    vectors = np.empty((ts.size, 2, 2), dtype=complex)
    vectors[:, 0, 0] = em * c        # lower level, first component
    vectors[:, 1, 0] = ep * s
    vectors[:, 0, 1] = em * s        # upper level
    vectors[:, 1, 1] = -ep * c
    energies = np.empty((ts.size, 2))
    energies[:, 0] = -params.omega0 / 2.0
    energies[:, 1] = +params.omega0 / 2.0
    gaps = np.full(ts.size, params.omega0)
    for arr in (vectors, energies, gaps):
        arr.setflags(write=False)
    return SpectralPath(
        grid=grid, energies=energies, vectors=vectors, min_gaps=gaps, gauge="closed-form"
    )


def _rotating_frame_terms(params: SpinHalfParams, t: float):
    wb = params.omega_bar
    a = (params.omega + params.omega0 * np.cos(params.theta)) / wb
    b = params.omega0 * np.sin(params.theta) / wb
    co = np.cos(wb * t / 2.0)
    si = np.sin(wb * t / 2.0)
    s, c = np.sin(params.theta / 2.0), np.cos(params.theta / 2.0)
    return a, b, co, si, s, c


def dual_exact_state(params: SpinHalfParams, t: float, label: int = 1) -> QuantumState:
    """Exact state of the dual system started in eigenlevel ``label`` at t = 0.

    The dual of this model evolves by the conjugate-transposed propagator, so
    the state is U(t)^H applied to the initial eigenvector; the two-component
    closed form below is that product, written out.
    """
    a, b, co, si, s, c = _rotating_frame_terms(params, t)
    em = np.exp(-1j * params.omega * t / 2.0)
    ep = np.exp(+1j * params.omega * t / 2.0)
    if label == 1:
        comps = [
            (co - 1j * a * si) * s * ep + 1j * b * si * c * em,
            -(co + 1j * a * si) * c * em - 1j * b * si * s * ep,
        ]
    elif label == 2:
        comps = [
            (co - 1j * a * si) * c * ep - 1j * b * si * s * em,
            (co + 1j * a * si) * s * em - 1j * b * si * c * ep,
        ]
    else:
        raise UsageError(f"level label must be 1 or 2, got {label}")
    return QuantumState(np.array(comps))


def dual_adiabatic_state(params: SpinHalfParams, t: float, label: int = 1) -> QuantumState:
    """Adiabatic-approximation state of the dual system for eigenlevel ``label``.

    The dynamic phases of the dual cancel exactly, leaving only the geometric
    factor exp(-+ i omega cos(theta) t / 2) on the transported eigenvector.
    """
    a, b, co, si, s, c = _rotating_frame_terms(params, t)
    if label == 1:
        pref = np.exp(-1j * params.omega * np.cos(params.theta) * t / 2.0)
        comps = [
            pref * ((co - 1j * a * si) * s + 1j * b * si * c),
            pref * (-(co + 1j * a * si) * c - 1j * b * si * s),
        ]
    elif label == 2:
        pref = np.exp(+1j * params.omega * np.cos(params.theta) * t / 2.0)
        comps = [
            pref * ((co - 1j * a * si) * c - 1j * b * si * s),
            pref * ((co + 1j * a * si) * s - 1j * b * si * c),
        ]
    else:
        raise UsageError(f"level label must be 1 or 2, got {label}")
    return QuantumState(np.array(comps))


def dual_fidelity_law(params: SpinHalfParams, t) -> np.ndarray:
    """Squared overlap of the dual's adiabatic and exact states.

    1 - sin^2(theta) sin^2(omega t / 2), for either level (the law is
    invariant under swapping the half-angle sine and cosine). Note the square
    sits on sin(theta), not sin(theta/2) — a transcription slip seen in the
    wild; brute-force integration pins the former.
    """
    t = np.asarray(t, dtype=float)
    st = np.sin(params.theta)
    return 1.0 - (st * np.sin(params.omega * t / 2.0)) ** 2
