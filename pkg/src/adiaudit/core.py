"""Shared quantum-dynamics primitives: grids, states, models, basic algebra.

Conventions used throughout the package:

* hbar = 1; Hamiltonians, frequencies and times are dimensionless.
* State vectors are one-dimensional complex arrays of unit norm.
* A time-dependent Hamiltonian is a callable ``t -> (N, N) complex array``
  wrapped in :class:`HamiltonianModel`, which symmetrizes and validates every
  evaluation. Batched evaluation over a whole grid is available via
  :meth:`HamiltonianModel.sample` and friends; models may supply vectorized
  evaluators to speed that path up, but the scalar callable is the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericalFailureError, UsageError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "TimeGrid",
    "QuantumState",
    "UnitaryMatrix",
    "HamiltonianModel",
    "inner_product",
    "fidelity",
    "validate_hermitian",
    "cumulative_trapezoid",
    "grid_derivative",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [0, t_end] with ``steps`` intervals.

    The grid has ``steps + 1`` points; point k sits at ``k * step``. All
    propagation and tracking in this package happens on such grids, and two
    results are only comparable when their grids compare equal.
    """

    t_end: float
    steps: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.t_end) or self.t_end <= 0.0:
            raise UsageError(f"t_end must be positive and finite, got {self.t_end}")
        if self.steps < 2:
            raise UsageError(f"steps must be at least 2, got {self.steps}")

    @property
    def step(self) -> float:
        return self.t_end / self.steps

    @property
    def times(self) -> np.ndarray:
        """All ``steps + 1`` grid points, including both endpoints."""
        return np.linspace(0.0, self.t_end, self.steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        """Interval midpoints ``t_k + step/2``, one per interval."""
        return self.times[:-1] + 0.5 * self.step


@dataclass(frozen=True)
class QuantumState:
    """A normalized pure state.

    The constructor copies the amplitudes, casts to complex128 and normalizes;
    a zero or non-finite input is a numerical failure, not a silent NaN.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0 or not np.all(np.isfinite(amps)):
            raise NumericalFailureError("state amplitudes must be finite and non-empty")
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise NumericalFailureError("cannot normalize a (near-)zero state vector")
        amps /= norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class UnitaryMatrix:
    """A square matrix validated to be unitary within tolerance."""

    entries: np.ndarray
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False, compare=False)

    def __post_init__(self) -> None:
        mat = np.array(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise UsageError(f"unitary must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise NumericalFailureError("unitary entries must be finite")
        defect = np.linalg.norm(mat.conj().T @ mat - np.eye(mat.shape[0]))
        if defect > self.tolerances.unitarity_step:
            raise NumericalFailureError(
                f"unitarity defect {defect:.3e} exceeds {self.tolerances.unitarity_step:.1e}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def conjugate_transpose(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.entries.conj().T, self.tolerances)


def validate_hermitian(
    matrix: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Return the Hermitian part ``(M + M^H)/2`` of a near-Hermitian matrix.

    Parameters
    ----------
    matrix:
        Square complex matrix expected to be Hermitian up to roundoff.
    tolerances:
        Supplies the relative rejection threshold.

    Raises
    ------
    NumericalFailureError
        If entries are not finite or the anti-Hermitian part is too large
        relative to the matrix norm to be attributable to roundoff.
    """
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NumericalFailureError("matrix entries must be finite")
    defect = np.linalg.norm(mat - mat.conj().T)
    scale = max(np.linalg.norm(mat), 1.0)
    if defect > tolerances.hermiticity_reject * scale:
        raise NumericalFailureError(
            f"matrix is not Hermitian: defect {defect:.3e} vs scale {scale:.3e}"
        )
    out = 0.5 * (mat + mat.conj().T)
    return out


def _symmetrize_stack(stack: np.ndarray, tolerances: Tolerances) -> np.ndarray:
    """Hermitian-validate a (K, N, N) stack in one shot."""
    if not np.all(np.isfinite(stack)):
        raise NumericalFailureError("matrix entries must be finite")
    adj = stack.conj().swapaxes(-1, -2)
    defect = np.linalg.norm(stack - adj, axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(stack, axis=(-2, -1)), 1.0)
    worst = np.argmax(defect / scale)
    if defect[worst] > tolerances.hermiticity_reject * scale[worst]:
        raise NumericalFailureError(
            f"matrix at sample {worst} is not Hermitian "
            f"(defect {defect[worst]:.3e}, scale {scale[worst]:.3e})"
        )
    return 0.5 * (stack + adj)


@dataclass(frozen=True)
class HamiltonianModel:
    """Time-dependent Hamiltonian with optional analytic derivative.

    Attributes
    ----------
    dimension:
        Hilbert-space dimension N.
    evaluate:
        Callable ``t -> (N, N)`` array; Hermitian up to roundoff.
    derivative:
        Optional callable for dH/dt. When absent, a centered finite
        difference with a caller-controlled step is substituted.
    kind:
        Free-form tag ("analytic", "dual", "sampled", ...) for reporting.
    evaluate_many / derivative_many:
        Optional vectorized versions mapping a (K,) time array to (K, N, N).
        Pure performance aids; results must match the scalar callables.
    """

    dimension: int
    evaluate: Callable[[float], np.ndarray]
    derivative: Optional[Callable[[float], np.ndarray]] = None
    kind: str = "analytic"
    evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )
    derivative_many: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.dimension < 2:
            raise UsageError(f"dimension must be at least 2, got {self.dimension}")

    def matrix(self, t: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
        """Validated Hermitian matrix H(t)."""
        mat = validate_hermitian(self.evaluate(t), tolerances)
        if mat.shape[0] != self.dimension:
            raise UsageError(
                f"model returned shape {mat.shape}, expected ({self.dimension}, {self.dimension})"
            )
        return mat

    def matrix_derivative(
        self,
        t: float,
        fd_step: Optional[float] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> np.ndarray:
        """dH/dt at time t, analytic when available, centered difference otherwise."""
        if self.derivative is not None:
            return validate_hermitian(self.derivative(t), tolerances)
        h = tolerances.fd_step_floor if fd_step is None else fd_step
        plus = validate_hermitian(self.evaluate(t + h), tolerances)
        minus = validate_hermitian(self.evaluate(t - h), tolerances)
        return (plus - minus) / (2.0 * h)

    def sample(
        self, times: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> np.ndarray:
        """Stack of validated H(t) over an array of times, shape (K, N, N)."""
        times = np.asarray(times, dtype=float)
        if self.evaluate_many is not None:
            stack = np.asarray(self.evaluate_many(times), dtype=complex)
        else:
            stack = np.stack([np.asarray(self.evaluate(t), dtype=complex) for t in times])
        return _symmetrize_stack(stack, tolerances)

    def sample_derivative(
        self,
        times: np.ndarray,
        fd_step: Optional[float] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> np.ndarray:
        """Stack of dH/dt over an array of times, shape (K, N, N)."""
        times = np.asarray(times, dtype=float)
        if self.derivative_many is not None:
            stack = np.asarray(self.derivative_many(times), dtype=complex)
            return _symmetrize_stack(stack, tolerances)
        if self.derivative is not None:
            stack = np.stack([np.asarray(self.derivative(t), dtype=complex) for t in times])
            return _symmetrize_stack(stack, tolerances)
        h = tolerances.fd_step_floor if fd_step is None else fd_step
        plus = self.sample(times + h, tolerances)
        minus = self.sample(times - h, tolerances)
        return (plus - minus) / (2.0 * h)


def inner_product(bra: QuantumState, ket: QuantumState) -> complex:
    """Hermitian inner product <bra|ket>, conjugate-linear in the first slot."""
    if bra.dimension != ket.dimension:
        raise UsageError(
            f"dimension mismatch: {bra.dimension} vs {ket.dimension}"
        )
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def fidelity(
    a: QuantumState, b: QuantumState, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """|<a|b>| for unit-norm states.

    Symmetric in its arguments by construction (the modulus of a complex
    number equals the modulus of its conjugate bit for bit).
    """
    for state in (a, b):
        defect = abs(np.linalg.norm(state.amplitudes) - 1.0)
        if defect > tolerances.state_norm:
            raise NumericalFailureError(f"state norm off by {defect:.3e}")
    return float(abs(inner_product(a, b)))


def cumulative_trapezoid(values: np.ndarray, step: float) -> np.ndarray:
    """Cumulative trapezoidal integral over a uniform grid, starting at 0.

    Works on real or complex samples; output has the same length as the input
    with ``out[0] == 0``.
    """
    values = np.asarray(values)
    out = np.empty_like(values)
    out[0] = 0
    np.cumsum(0.5 * step * (values[1:] + values[:-1]), axis=0, out=out[1:])
    return out


def grid_derivative(samples: np.ndarray, step: float) -> np.ndarray:
    """Second-order time derivative of uniformly sampled data along axis 0.

    Centered differences inside, one-sided three-point stencils at both ends,
    so the result is O(step^2) accurate everywhere including the endpoints.
    """
    samples = np.asarray(samples)
    if samples.shape[0] < 3:
        raise UsageError("need at least 3 samples for a second-order derivative")
    out = np.empty_like(samples)
    out[1:-1] = (samples[2:] - samples[:-2]) / (2.0 * step)
    out[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * step)
    out[-1] = (3.0 * samples[-1] - 4.0 * samples[-2] + samples[-3]) / (2.0 * step)
    return out
