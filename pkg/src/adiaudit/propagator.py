"""Unitary time evolution on a uniform grid.

The integrator is the exponential midpoint rule,

    U(t_{k+1}) = exp(-i h H(t_k + h/2)) U(t_k),

which preserves unitarity exactly (each factor is a matrix exponential of a
Hermitian generator) and converges with global order h^2. Step exponentials
are built from an eigendecomposition of the midpoint Hamiltonian, so no
accuracy is lost to a truncated series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HamiltonianModel, QuantumState, TimeGrid, UnitaryMatrix
from .errors import NumericalFailureError, UsageError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "PropagatorPath",
    "StateTrajectory",
    "step_unitary",
    "propagate",
    "evolve_state",
    "hermitian_conjugate_path",
]


@dataclass(frozen=True)
class PropagatorPath:
    """Evolution operators U(t_k) for every point of a grid.

    ``unitaries`` has shape (steps + 1, N, N) with ``unitaries[0]`` equal to
    the initial unitary (the identity unless a restart seeded it) and
    ``unitaries[k]`` the evolution from t = 0 to t_k. ``unitarity_defects``
    holds the Frobenius defect |U^H U - 1| per grid point.
    """

    grid: TimeGrid
    unitaries: np.ndarray = field(repr=False)
    unitarity_defects: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.unitaries.shape[-1]

    @property
    def max_unitarity_defect(self) -> float:
        return float(self.unitarity_defects.max())

    def unitary(self, k: int) -> UnitaryMatrix:
        """The evolution operator at grid point k as a validated matrix."""
        return UnitaryMatrix(self.unitaries[k])

    @property
    def final(self) -> UnitaryMatrix:
        return self.unitary(self.grid.steps)


@dataclass(frozen=True)
class StateTrajectory:
    """A state evolved along a grid; ``states`` has shape (steps + 1, N)."""

    grid: TimeGrid
    states: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.states.shape[-1]

    def state(self, k: int) -> QuantumState:
        return QuantumState(self.states[k])


def _step_stack(h_stack: np.ndarray, step: float) -> np.ndarray:
    """exp(-i * step * H) for a (K, N, N) stack of Hermitian matrices."""
    try:
        energies, vectors = np.linalg.eigh(h_stack)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed on a step Hamiltonian: {exc}") from exc
    phases = np.exp(-1j * step * energies)
    return np.einsum("kim,km,kjm->kij", vectors, phases, vectors.conj())


def step_unitary(
    hamiltonian: np.ndarray,
    step: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> UnitaryMatrix:
    """Single midpoint-rule step exp(-i * step * H) for a Hermitian H.

    Parameters
    ----------
    hamiltonian:
        The Hamiltonian evaluated at the interval midpoint.
    step:
        Interval length h (may be negative; that inverts the step).
    """
    from .core import validate_hermitian

    mat = validate_hermitian(hamiltonian, tolerances)
    out = _step_stack(mat[np.newaxis], step)[0]
    return UnitaryMatrix(out, tolerances)


def _defect_stack(unitaries: np.ndarray) -> np.ndarray:
    """Frobenius unitarity defect per matrix of a (K, N, N) stack."""
    n = unitaries.shape[-1]
    gram = np.einsum("kji,kjl->kil", unitaries.conj(), unitaries)
    gram[:, np.arange(n), np.arange(n)] -= 1.0
    return np.linalg.norm(gram, axis=(-2, -1))


def propagate(
    model: HamiltonianModel,
    grid: TimeGrid,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    initial: np.ndarray | None = None,
) -> PropagatorPath:
    """Propagate the model over the grid with the exponential midpoint rule.

    Parameters
    ----------
    model:
        Time-dependent Hamiltonian to integrate.
    grid:
        Uniform grid; one step per interval, midpoint sampling.
    initial:
        Optional starting unitary (restart semantics: pass U(t*) here and a
        model shifted by t* to continue a previous propagation). Defaults to
        the identity.

    Raises
    ------
    NumericalFailureError
        If the accumulated unitarity defect anywhere along the path exceeds
        ``tolerances.unitarity_path``.
    """
    n = model.dimension
    steps = model.sample(grid.midpoints, tolerances)
    step_mats = _step_stack(steps, grid.step)

    if initial is None:
        current = np.eye(n, dtype=complex)
    else:
        start = UnitaryMatrix(initial, tolerances)
        if start.dimension != n:
            raise UsageError(
                f"initial unitary has dimension {start.dimension}, model has {n}"
            )
        current = start.entries.copy()

    out = np.empty((grid.steps + 1, n, n), dtype=complex)
    out[0] = current
    for k in range(grid.steps):
        current = step_mats[k] @ current
        out[k + 1] = current

    defects = _defect_stack(out)
    worst = float(defects.max())
    if worst > tolerances.unitarity_path:
        raise NumericalFailureError(
            f"accumulated unitarity defect {worst:.3e} exceeds "
            f"{tolerances.unitarity_path:.1e}"
        )
    out.setflags(write=False)
    defects.setflags(write=False)
    return PropagatorPath(grid=grid, unitaries=out, unitarity_defects=defects)


def evolve_state(path: PropagatorPath, initial: QuantumState) -> StateTrajectory:
    """Apply every U(t_k) of a path to an initial state."""
    if initial.dimension != path.dimension:
        raise UsageError(
            f"state dimension {initial.dimension} does not match path dimension {path.dimension}"
        )
    states = np.einsum("kij,j->ki", path.unitaries, initial.amplitudes)
    states.setflags(write=False)
    return StateTrajectory(grid=path.grid, states=states)


def hermitian_conjugate_path(path: PropagatorPath) -> PropagatorPath:
    """The path of conjugate-transposed operators U(t_k)^H.

    For a system governed by H^b(t) = -U^H(t) H(t) U(t) this is the exact
    evolution operator family, which makes it the reference ("oracle") route
    for dual-system dynamics.
    """
    unitaries = path.unitaries.conj().swapaxes(-1, -2).copy()
    defects = _defect_stack(unitaries)
    unitaries.setflags(write=False)
    defects.setflags(write=False)
    return PropagatorPath(grid=path.grid, unitaries=unitaries, unitarity_defects=defects)
