"""Auditing the adiabatic approximation along a tracked spectral path.

Given a gauge-continuous eigensystem (a :class:`~adiaudit.spectral.SpectralPath`)
and the exactly evolved state, this module builds the adiabatic reference
trajectory

    |psi_adi(t)> = exp(i (phase_dynamic + phase_geometric)) |E_n(t)>,

measures how well it approximates the exact evolution (validity fidelity),
and evaluates the three quantitative "slowness" metrics that are customarily
used to certify the approximation:

* pointwise ratio  |<E_m|dE_n/dt>| / |E_m - E_n|              (per pair, per t)
* its dH/dt form   |<E_m|dH/dt|E_n>| / (E_m - E_n)^2           (same quantity)
* lidar form       max_t |<E_m|dH/dt|E_n>/(E_n - E_m)|  vs  min_t |E_n - E_m|
* roland form      max_t |<E_m|dH/dt|E_n>| / (min_t |E_m - E_n|)^2

All metrics are reported as raw numbers; "much smaller than one" is
operationalized by a configurable satisfaction margin, never hidden inside a
boolean. :func:`marzlin_sanders_residual` evaluates the two sides of the
classic substitution argument — an identity that is exactly 1 and the value
the adiabatic approximation assigns to it — so callers can exhibit the
inconsistency between the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import HamiltonianModel, QuantumState, TimeGrid, cumulative_trapezoid
from .errors import GaugeCorruptionError, UsageError
from .propagator import PropagatorPath, StateTrajectory
from .spectral import SpectralPath, coupling_matrix, coupling_moduli
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "AdiabaticTrajectory",
    "FidelityResult",
    "PointwiseConditions",
    "LidarCondition",
    "MarzlinSandersChain",
    "ConditionReport",
    "adiabatic_phase",
    "adiabatic_trajectory",
    "adiabatic_state",
    "validity_fidelity",
    "reduced_fidelity_propagated",
    "reduced_fidelity_initial_overlap",
    "condition_pointwise",
    "condition_pointwise_hdot",
    "condition_lidar",
    "condition_roland",
    "marzlin_sanders_residual",
    "audit_conditions",
]


def _require_level(path: SpectralPath, level: int) -> None:
    if not 0 <= level < path.dimension:
        raise UsageError(f"level {level} out of range for dimension {path.dimension}")


def _require_same_grid(a: TimeGrid, b: TimeGrid) -> None:
    if a != b:
        raise UsageError(f"grids differ: {a} vs {b}")


def _checked_connection(
    path: SpectralPath, level: int, tolerances: Tolerances
) -> np.ndarray:
    """Diagonal connection <E_n|dE_n/dt> with a gauge sanity gate.

    For a unit-norm differentiable family the connection is purely imaginary;
    a real part beyond tolerance means the stored phases are not a consistent
    gauge (e.g. the vectors were reordered or re-phased after tracking).
    """
    conn = coupling_matrix(path)[:, level, level]
    worst = float(np.abs(conn.real).max())
    if worst > tolerances.gauge_real_part:
        raise GaugeCorruptionError(
            f"Re<E|dE/dt> reaches {worst:.3e} on level {level}; "
            "the stored gauge is not differentiable"
        )
    return conn


def adiabatic_phase(
    path: SpectralPath,
    level: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray]:
    """Dynamic and geometric phase samples of one level along the path.

    Returns
    -------
    phase_dynamic:
        Samples of -integral of E_n(t') dt' from 0 to t_k.
    phase_geometric:
        Samples of i * integral of <E_n|dE_n/dt'> dt'; real because the
        connection is purely imaginary. Both phases are zero at t = 0.

    The geometric part is gauge-covariant: it belongs to the gauge stored in
    the path (zero for transported paths, generally nonzero for closed-form
    gauges), and only the combination with the stored vectors is physical.

    Raises
    ------
    GaugeCorruptionError
        If the diagonal connection has a real part beyond tolerance.
    """
    _require_level(path, level)
    conn = _checked_connection(path, level, tolerances)
    phase_dynamic = cumulative_trapezoid(-path.energies[:, level], path.grid.step)
    phase_geometric = cumulative_trapezoid(-conn.imag, path.grid.step)
    return phase_dynamic, phase_geometric


@dataclass(frozen=True)
class AdiabaticTrajectory:
    """The adiabatic reference trajectory of one level.

    ``states[k]`` is exp(i * (phase_dynamic[k] + phase_geometric[k])) times
    the stored eigenvector of the level at t_k; phases are those of
    :func:`adiabatic_phase`.
    """

    level: int
    grid: TimeGrid
    phase_dynamic: np.ndarray = field(repr=False)
    phase_geometric: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def state(self, k: int) -> QuantumState:
        return QuantumState(self.states[k])


def adiabatic_trajectory(
    path: SpectralPath,
    level: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> AdiabaticTrajectory:
    """Build the full adiabatic reference trajectory for one level."""
    phase_dynamic, phase_geometric = adiabatic_phase(path, level, tolerances)
    states = np.exp(1j * (phase_dynamic + phase_geometric))[:, np.newaxis] * path.vectors[:, :, level]
    for arr in (phase_dynamic, phase_geometric, states):
        arr.setflags(write=False)
    return AdiabaticTrajectory(
        level=level,
        grid=path.grid,
        phase_dynamic=phase_dynamic,
        phase_geometric=phase_geometric,
        states=states,
    )


def adiabatic_state(
    path: SpectralPath,
    level: int,
    k: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> QuantumState:
    """The adiabatic reference state of one level at grid point k."""
    return adiabatic_trajectory(path, level, tolerances).state(k)


@dataclass(frozen=True)
class FidelityResult:
    """A fidelity curve |<a(t_k)|b(t_k)>| over a grid."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def final(self) -> float:
        return float(self.values[-1])


def validity_fidelity(
    adiabatic: AdiabaticTrajectory,
    exact: StateTrajectory,
) -> FidelityResult:
    """Pointwise overlap magnitude between the adiabatic and exact states.

    This is the operational test of the adiabatic approximation: the
    approximation is acceptable on [0, T] exactly when this curve stays close
    to one. Insensitive to any global phase of either trajectory.

    Raises
    ------
    UsageError
        If the two trajectories do not share a grid.
    """
    _require_same_grid(adiabatic.grid, exact.grid)
    if adiabatic.states.shape != exact.states.shape:
        raise UsageError("trajectory dimensions differ")
    values = np.abs(np.einsum("ki,ki->k", adiabatic.states.conj(), exact.states))
    values.setflags(write=False)
    return FidelityResult(grid=adiabatic.grid, values=values)


def reduced_fidelity_propagated(
    path: SpectralPath,
    prop: PropagatorPath,
    level: int,
) -> FidelityResult:
    """|<E_n(t_k)|U(t_k)|E_n(0)>| — the validity fidelity in reduced form.

    For a system evolved by the stored propagator from the level's initial
    eigenvector, this curve equals the full validity fidelity; it is provided
    as an independent cross-check, not a substitute.
    """
    _require_level(path, level)
    _require_same_grid(path.grid, prop.grid)
    evolved = np.einsum("kij,j->ki", prop.unitaries, path.vectors[0, :, level])
    values = np.abs(np.einsum("ki,ki->k", path.vectors[:, :, level].conj(), evolved))
    values.setflags(write=False)
    return FidelityResult(grid=path.grid, values=values)


def reduced_fidelity_initial_overlap(path: SpectralPath, level: int) -> FidelityResult:
    """|<E_n(t_k)|E_n(0)>| — the reduced validity fidelity of the dual partner.

    When a system's evolution operator is the conjugate transpose of the one
    that generated ``path``, its validity fidelity collapses to this overlap
    of instantaneous eigenvectors with their initial value.
    """
    _require_level(path, level)
    values = np.abs(
        np.einsum("ki,i->k", path.vectors[:, :, level].conj(), path.vectors[0, :, level])
    )
    values.setflags(write=False)
    return FidelityResult(grid=path.grid, values=values)


def _gap_tensor(energies: np.ndarray) -> np.ndarray:
    """|E_m - E_n| per grid point and pair, with 1.0 on the diagonal."""
    gaps = np.abs(energies[:, :, np.newaxis] - energies[:, np.newaxis, :])
    n = energies.shape[1]
    gaps[:, np.arange(n), np.arange(n)] = 1.0
    return gaps


def _zero_diagonal(table: np.ndarray) -> np.ndarray:
    n = table.shape[-1]
    table[:, np.arange(n), np.arange(n)] = 0.0
    return table


@dataclass(frozen=True)
class PointwiseConditions:
    """Per-pair, per-time condition ratios; diagonal entries are zero."""

    grid: TimeGrid
    ratios: np.ndarray = field(repr=False)

    @property
    def per_time_max(self) -> np.ndarray:
        """Largest ratio over level pairs at each grid point."""
        return self.ratios.max(axis=(1, 2))

    @property
    def maximum(self) -> float:
        return float(self.ratios.max())


def condition_pointwise(path: SpectralPath) -> PointwiseConditions:
    """Pointwise ratios |<E_m|dE_n/dt>| / |E_m - E_n| for all pairs and times.

    The numerator is the gauge-invariant neighbour-overlap discretization of
    the coupling modulus (:func:`coupling_moduli`), so the table cannot be
    polluted by per-time phase choices. The classic criterion demands the
    maximum be much smaller than one.
    """
    numerators = coupling_moduli(path)
    ratios = _zero_diagonal(numerators / _gap_tensor(path.energies))
    ratios.setflags(write=False)
    return PointwiseConditions(grid=path.grid, ratios=ratios)


def _hdot_elements(
    model: HamiltonianModel,
    path: SpectralPath,
    fd_step: Optional[float],
    tolerances: Tolerances,
) -> np.ndarray:
    """<E_m|dH/dt|E_n> on every grid point, shape (steps + 1, N, N)."""
    if fd_step is None:
        fd_step = max(tolerances.fd_step_floor, path.grid.step / 100.0)
    hdot = model.sample_derivative(path.grid.times, fd_step, tolerances)
    return np.einsum("kim,kij,kjn->kmn", path.vectors.conj(), hdot, path.vectors)


def condition_pointwise_hdot(
    model: HamiltonianModel,
    path: SpectralPath,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PointwiseConditions:
    """Pointwise ratios in dH/dt form: |<E_m|dH/dt|E_n>| / (E_m - E_n)^2.

    Equals :func:`condition_pointwise` entry by entry (up to discretization)
    through the identity <E_m|dH/dt|E_n> = (E_n - E_m) <E_m|dE_n/dt> for
    m != n — the two routes share no code, which makes the agreement a real
    cross-check.
    """
    elements = np.abs(_hdot_elements(model, path, fd_step, tolerances))
    ratios = _zero_diagonal(elements / _gap_tensor(path.energies) ** 2)
    ratios.setflags(write=False)
    return PointwiseConditions(grid=path.grid, ratios=ratios)


@dataclass(frozen=True)
class LidarCondition:
    """max-coupling vs. min-gap form of the adiabatic condition."""

    lhs: float
    rhs: float
    margin: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.margin * self.rhs


def condition_lidar(
    model: HamiltonianModel,
    path: SpectralPath,
    margin: Optional[float] = None,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> LidarCondition:
    """The max/min condition: lhs = max over t, m != n of
    |<E_m|dH/dt|E_n> / (E_n - E_m)|, rhs = min over t, m != n of |E_n - E_m|.

    ``satisfied`` means lhs <= margin * rhs; the margin operationalizes
    "much smaller than" and defaults to the tolerance record's value (0.1).
    """
    if margin is None:
        margin = tolerances.satisfaction_margin
    elements = np.abs(_hdot_elements(model, path, fd_step, tolerances))
    lhs = float(_zero_diagonal(elements / _gap_tensor(path.energies)).max())
    return LidarCondition(lhs=lhs, rhs=path.min_gap, margin=float(margin))


def condition_roland(
    model: HamiltonianModel,
    path: SpectralPath,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """The global-ratio condition metric:

        epsilon = max over t, m != n of |<E_m|dH/dt|E_n>|
                  / (min over t, m != n of |E_m - E_n|)^2.

    Returned as a raw number; small epsilon is the customary certificate.
    """
    elements = np.abs(_hdot_elements(model, path, fd_step, tolerances))
    numerator = float(_zero_diagonal(elements).max())
    return numerator / path.min_gap**2


@dataclass(frozen=True)
class MarzlinSandersChain:
    """Both sides of the substitution argument, sampled along the grid.

    ``exact_values[k]`` evaluates <E_n(0)|U(t_k)U^H(t_k)|E_n(0)> literally —
    a quantity that is identically 1. ``adiabatic_values[k]`` is what the
    chain assigns to the same quantity after the adiabatic approximation is
    substituted for one propagator factor:

        exp(-integral of <E_n|dE_n/dt'> dt') * <E_n(0)|E_n(t_k)>.

    A non-unit magnitude of the latter, next to the manifestly unit former,
    is the inconsistency: the substitution was not harmless.
    """

    level: int
    grid: TimeGrid
    exact_values: np.ndarray = field(repr=False)
    adiabatic_values: np.ndarray = field(repr=False)

    @property
    def final_exact(self) -> complex:
        return complex(self.exact_values[-1])

    @property
    def final_adiabatic(self) -> complex:
        return complex(self.adiabatic_values[-1])


def marzlin_sanders_residual(
    path: SpectralPath,
    prop: PropagatorPath,
    level: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MarzlinSandersChain:
    """Evaluate the substitution chain on a level of the primal system.

    Both returned sample arrays are invariant under re-gauging the path (the
    connection integral and the eigenvector overlap pick up cancelling
    factors), so any gauge-continuous path gives the same numbers.

    Raises
    ------
    GaugeCorruptionError
        If the stored gauge is not differentiable (as in
        :func:`adiabatic_phase`).
    UsageError
        If path and propagator do not share a grid, or the level is invalid.
    """
    _require_level(path, level)
    _require_same_grid(path.grid, prop.grid)
    initial = path.vectors[0, :, level]

    back = np.einsum("kji,j->ki", prop.unitaries.conj(), initial)
    forth = np.einsum("kij,kj->ki", prop.unitaries, back)
    exact_values = np.einsum("i,ki->k", initial.conj(), forth)

    conn = _checked_connection(path, level, tolerances)
    integral = cumulative_trapezoid(conn, path.grid.step)
    overlap = np.einsum("i,ki->k", initial.conj(), path.vectors[:, :, level])
    adiabatic_values = np.exp(-integral) * overlap

    for arr in (exact_values, adiabatic_values):
        arr.setflags(write=False)
    return MarzlinSandersChain(
        level=level, grid=path.grid, exact_values=exact_values, adiabatic_values=adiabatic_values
    )


@dataclass(frozen=True)
class ConditionReport:
    """All condition metrics and the validity fidelity for one level."""

    level: int
    pointwise: PointwiseConditions
    hdot: PointwiseConditions
    lidar: LidarCondition
    roland_epsilon: float
    fidelity: FidelityResult

    @property
    def pointwise_ratio_max(self) -> float:
        return self.pointwise.maximum

    @property
    def hdot_ratio_max(self) -> float:
        return self.hdot.maximum

    @property
    def lidar_lhs(self) -> float:
        return self.lidar.lhs

    @property
    def lidar_rhs(self) -> float:
        return self.lidar.rhs

    @property
    def fidelity_min(self) -> float:
        return self.fidelity.minimum

    @property
    def fidelity_final(self) -> float:
        return self.fidelity.final


def audit_conditions(
    model: HamiltonianModel,
    path: SpectralPath,
    exact: StateTrajectory,
    level: int,
    margin: Optional[float] = None,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ConditionReport:
    """Assemble the full audit of one level: all metrics plus the fidelity.

    ``exact`` must be the trajectory evolved from the level's initial
    eigenvector by the system's own propagator.
    """
    if margin is None:
        margin = tolerances.satisfaction_margin
    adi = adiabatic_trajectory(path, level, tolerances)
    fid = validity_fidelity(adi, exact)

    pointwise = condition_pointwise(path)
    elements = np.abs(_hdot_elements(model, path, fd_step, tolerances))
    gaps = _gap_tensor(path.energies)
    hdot = PointwiseConditions(grid=path.grid, ratios=_zero_diagonal(elements / gaps**2))
    lidar = LidarCondition(
        lhs=float(_zero_diagonal(elements / gaps).max()),
        rhs=path.min_gap,
        margin=float(margin),
    )
    roland = float(_zero_diagonal(elements).max()) / path.min_gap**2
    return ConditionReport(
        level=level,
        pointwise=pointwise,
        hdot=hdot,
        lidar=lidar,
        roland_epsilon=roland,
        fidelity=fid,
    )
