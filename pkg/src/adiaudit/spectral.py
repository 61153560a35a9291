"""Instantaneous eigendecompositions along a grid, with gauge tracking.

Eigenvectors of H(t) are only defined up to a phase per level and time, so a
naive per-point eigendecomposition produces a family that is useless for
differentiation. :func:`track` fixes this with

* a deterministic seed gauge at t = 0 (largest-modulus component of each
  eigenvector made real positive),
* discrete parallel transport afterwards: the phase of each level at t_{k+1}
  is chosen so that <E_m(t_k)|E_m(t_{k+1})> is real and positive,
* level pairing across frames by maximal eigenvector overlap, so levels keep
  their identity through eigenvalue crossings instead of being re-sorted.

In the transported gauge the diagonal connection <E_m|dE_m/dt> is driven to
zero; quantities derived from a path are either gauge-invariant (moduli of
off-diagonal couplings, fidelities) or explicitly gauge-covariant (phases),
and the docstrings say which.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import HamiltonianModel, TimeGrid, grid_derivative
from .errors import DegeneracyError, NumericalFailureError, TrackingError, UsageError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "SpectralFrame",
    "SpectralPath",
    "decompose",
    "track",
    "realign_phases",
    "eigen_derivative",
    "eigenvector_derivatives",
    "coupling_matrix",
    "coupling_moduli",
    "coupling_via_hdot",
    "hdot_coupling_matrix",
]


@dataclass(frozen=True)
class SpectralFrame:
    """Eigensystem of H(t) at one time: ascending energies, seeded gauge."""

    t: float
    energies: np.ndarray
    vectors: np.ndarray  # column m is the eigenvector of energies[m]
    min_gap: float


@dataclass(frozen=True)
class SpectralPath:
    """Tracked eigensystem along a grid.

    ``energies`` has shape (steps + 1, N) and ``vectors`` shape
    (steps + 1, N, N) with column m of frame k the vector of level m. Levels
    are indexed by their ascending-energy position at t = 0 and keep that
    identity through crossings, so a frame's energies are not necessarily
    sorted. ``gauge`` records how the phases were fixed ("transported" for
    tracker output, "closed-form" for analytically built paths).
    """

    grid: TimeGrid
    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    min_gaps: np.ndarray = field(repr=False)
    gauge: str = "transported"

    @property
    def dimension(self) -> int:
        return self.energies.shape[1]

    @property
    def min_gap(self) -> float:
        return float(self.min_gaps.min())

    def frame(self, k: int) -> SpectralFrame:
        """Frame k in tracked level order (ascending only at t = 0)."""
        return SpectralFrame(
            t=float(self.grid.times[k]),
            energies=self.energies[k],
            vectors=self.vectors[k],
            min_gap=float(self.min_gaps[k]),
        )

    def level_vectors(self, level: int) -> np.ndarray:
        """All stored vectors of one level, shape (steps + 1, N)."""
        return self.vectors[:, :, level]


def _seed_gauge(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-modulus component of each column real positive."""
    idx = np.abs(vectors).argmax(axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = pivots / np.abs(pivots)
    return vectors * phases.conj()[np.newaxis, :]


def _check_eigensystem(
    h_stack: np.ndarray,
    energies: np.ndarray,
    vectors: np.ndarray,
    tolerances: Tolerances,
) -> None:
    """Residual and orthonormality checks for a stacked eigensystem."""
    residual = np.einsum("kij,kjm->kim", h_stack, vectors) - energies[:, np.newaxis, :] * vectors
    worst_res = float(np.linalg.norm(residual, axis=1).max())
    if worst_res > tolerances.eigen_residual:
        raise NumericalFailureError(f"eigenpair residual {worst_res:.3e} too large")
    gram = np.einsum("kim,kin->kmn", vectors.conj(), vectors)
    gram = gram - np.eye(vectors.shape[-1])
    worst_gram = float(np.linalg.norm(gram, axis=(-2, -1)).max())
    if worst_gram > tolerances.eigen_residual:
        raise NumericalFailureError(f"eigenbasis orthonormality defect {worst_gram:.3e}")


def _min_gaps(sorted_energies: np.ndarray) -> np.ndarray:
    return np.diff(sorted_energies, axis=-1).min(axis=-1)


def decompose(
    model: HamiltonianModel,
    t: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SpectralFrame:
    """Eigendecomposition of H(t) with the deterministic seed gauge.

    Raises
    ------
    DegeneracyError
        If the smallest spectral gap is at or below the degeneracy threshold;
        tracked quantities are meaningless there and the audit must refuse.
    """
    mat = model.matrix(t, tolerances)
    try:
        energies, vectors = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed at t={t}: {exc}") from exc
    gap = float(_min_gaps(energies))
    if gap <= tolerances.degeneracy_gap:
        raise DegeneracyError(f"spectral gap {gap:.3e} at t={t} is below the threshold")
    vectors = _seed_gauge(vectors)
    _check_eigensystem(mat[np.newaxis], energies[np.newaxis], vectors[np.newaxis], tolerances)
    return SpectralFrame(t=float(t), energies=energies, vectors=vectors, min_gap=gap)


def _pair_levels(vectors: np.ndarray, tolerances: Tolerances) -> Optional[np.ndarray]:
    """Frame-to-frame level pairing by maximal overlap.

    Returns None when every consecutive pairing is the identity (the common
    case without crossings), else a (steps + 1, N) array mapping tracked level
    -> stored eigh column per frame.

    Raises
    ------
    TrackingError
        If a pairing is ambiguous (two overlaps within the ambiguity
        tolerance) or fails to be a permutation.
    """
    n = vectors.shape[-1]
    overlaps = np.abs(np.einsum("kim,kin->kmn", vectors[:-1].conj(), vectors[1:]))
    choice = overlaps.argmax(axis=2)

    top = np.take_along_axis(overlaps, choice[:, :, np.newaxis], axis=2)[:, :, 0]
    masked = overlaps.copy()
    np.put_along_axis(masked, choice[:, :, np.newaxis], -1.0, axis=2)
    second = masked.max(axis=2)
    ambiguous = (top - second) < tolerances.pairing_ambiguity
    if np.any(ambiguous):
        k, m = np.argwhere(ambiguous)[0]
        raise TrackingError(
            f"ambiguous level pairing at frame {k}, level {m}: "
            f"overlaps {top[k, m]:.3f} vs {second[k, m]:.3f}"
        )

    identity = np.arange(n)
    if np.all(choice == identity):
        return None

    columns = np.empty((vectors.shape[0], n), dtype=int)
    columns[0] = identity
    for k in range(vectors.shape[0] - 1):
        step = choice[k]
        if np.bincount(step, minlength=n).max() > 1:
            raise TrackingError(f"level pairing at frame {k} is not a permutation")
        columns[k + 1] = step[columns[k]]
    return columns


def _transport_phases(vectors: np.ndarray, tolerances: Tolerances) -> np.ndarray:
    """Seed frame 0, then parallel-transport all later frames (in place)."""
    vectors[0] = _seed_gauge(vectors[0])
    overlaps = np.einsum("kim,kim->km", vectors[:-1].conj(), vectors[1:])
    mags = np.abs(overlaps)
    if float(mags.min()) < 0.1:
        k, m = np.argwhere(mags < 0.1)[0]
        raise TrackingError(
            f"consecutive overlap {mags[k, m]:.3e} at frame {k}, level {m} "
            "is too small for phase transport"
        )
    factors = overlaps.conj() / mags
    phases = np.cumprod(factors, axis=0)
    phases /= np.abs(phases)
    vectors[1:] *= phases[:, np.newaxis, :]
    return vectors


def track(
    model: HamiltonianModel,
    grid: TimeGrid,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SpectralPath:
    """Tracked eigensystem of the model over a grid.

    Levels are paired frame to frame by maximal eigenvector overlap and keep
    their t = 0 ascending index through crossings; phases follow the discrete
    parallel-transport gauge.
    """
    h_stack = model.sample(grid.times, tolerances)
    try:
        energies, vectors = np.linalg.eigh(h_stack)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed along the grid: {exc}") from exc

    gaps = _min_gaps(energies)
    k_bad = int(np.argmin(gaps))
    if gaps[k_bad] <= tolerances.degeneracy_gap:
        raise DegeneracyError(
            f"spectral gap {gaps[k_bad]:.3e} at t={grid.times[k_bad]:.6g} "
            "is below the degeneracy threshold"
        )
    _check_eigensystem(h_stack, energies, vectors, tolerances)

    columns = _pair_levels(vectors, tolerances)
    if columns is not None:
        energies = np.take_along_axis(energies, columns, axis=1)
        vectors = np.take_along_axis(vectors, columns[:, np.newaxis, :], axis=2)

    vectors = _transport_phases(np.ascontiguousarray(vectors), tolerances)
    energies = np.ascontiguousarray(energies)
    for arr in (energies, vectors, gaps):
        arr.setflags(write=False)
    return SpectralPath(grid=grid, energies=energies, vectors=vectors, min_gaps=gaps)


def realign_phases(path: SpectralPath, tolerances: Tolerances = DEFAULT_TOLERANCES) -> SpectralPath:
    """Re-apply the seed gauge and parallel transport to a path's vectors.

    Deterministic: two paths that differ only by per-frame phases realign to
    identical vectors, which is what makes modulus-level quantities testably
    gauge-invariant.
    """
    vectors = _transport_phases(path.vectors.copy(), tolerances)
    vectors.setflags(write=False)
    return SpectralPath(
        grid=path.grid,
        energies=path.energies,
        vectors=vectors,
        min_gaps=path.min_gaps,
        gauge="transported",
    )


def eigenvector_derivatives(path: SpectralPath) -> np.ndarray:
    """d|E_m(t)>/dt for every level, shape (steps + 1, N, N), column = level.

    Second-order stencils on the stored gauge; the result is gauge-covariant,
    so only project it against vectors of the same path.
    """
    return grid_derivative(path.vectors, path.grid.step)


def eigen_derivative(path: SpectralPath, level: int, k: Optional[int] = None) -> np.ndarray:
    """Time derivative of one level's eigenvector at grid point k (or all)."""
    if not 0 <= level < path.dimension:
        raise UsageError(f"level {level} out of range for dimension {path.dimension}")
    dv = eigenvector_derivatives(path)[:, :, level]
    return dv if k is None else dv[k]


def coupling_matrix(path: SpectralPath) -> np.ndarray:
    """C[k, m, n] = <E_m(t_k)|dE_n(t_k)/dt> from the stored vectors.

    Off-diagonal moduli are gauge-invariant; phases and the diagonal follow
    the path's gauge (the diagonal is ~0 in the transported gauge).
    """
    dv = eigenvector_derivatives(path)
    return np.einsum("kim,kin->kmn", path.vectors.conj(), dv)


def coupling_moduli(path: SpectralPath) -> np.ndarray:
    """|C|[k, m, n] = |<E_m(t_k)|dE_n(t_k)/dt>| for m != n, gauge-invariant.

    Discretizes the modulus directly through overlaps of neighbouring
    frames, |<E_m(t_k)|E_n(t_{k+1})>| / h, which no per-time phase choice
    can touch: each vector enters exactly once, inside a modulus. The
    mid-step values are averaged back onto grid points (linear
    extrapolation at the two ends). Estimates only the off-diagonal moduli;
    the diagonal — a pure gauge quantity with no invariant modulus — is set
    to zero.
    """
    vectors = path.vectors
    step = path.grid.step
    halves = np.abs(np.einsum("kim,kin->kmn", vectors[:-1].conj(), vectors[1:])) / step
    out = np.empty((vectors.shape[0],) + halves.shape[1:])
    out[1:-1] = 0.5 * (halves[:-1] + halves[1:])
    out[0] = np.clip(1.5 * halves[0] - 0.5 * halves[1], 0.0, None)
    out[-1] = np.clip(1.5 * halves[-1] - 0.5 * halves[-2], 0.0, None)
    diag = np.arange(path.dimension)
    out[:, diag, diag] = 0.0
    return out


def hdot_coupling_matrix(
    model: HamiltonianModel,
    path: SpectralPath,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Couplings <E_m|dE_n/dt> for m != n via the dH/dt matrix element.

    Computes <E_m|Hdot|E_n> / (E_n - E_m) on every grid point; the diagonal,
    where the formula is undefined, is set to zero. Independent route used to
    cross-check :func:`coupling_matrix`.
    """
    if fd_step is None:
        fd_step = max(tolerances.fd_step_floor, path.grid.step / 100.0)
    hdot = model.sample_derivative(path.grid.times, fd_step, tolerances)
    elements = np.einsum("kim,kij,kjn->kmn", path.vectors.conj(), hdot, path.vectors)
    denom = path.energies[:, np.newaxis, :] - path.energies[:, :, np.newaxis]
    n = path.dimension
    diag = np.arange(n)
    denom[:, diag, diag] = 1.0
    out = elements / denom
    out[:, diag, diag] = 0.0
    return out


def coupling_via_hdot(
    model: HamiltonianModel,
    path: SpectralPath,
    m: int,
    n: int,
    k: int,
    fd_step: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> complex:
    """<E_m|Hdot|E_n> / (E_n - E_m) at grid point k; equals <E_m|dE_n/dt>.

    Raises
    ------
    DegeneracyError
        If the gap between levels m and n at t_k is below the threshold.
    UsageError
        If m == n (the identity only holds between distinct levels).
    """
    if m == n:
        raise UsageError("coupling_via_hdot is defined for distinct levels only")
    if fd_step is None:
        fd_step = max(tolerances.fd_step_floor, path.grid.step / 100.0)
    t = float(path.grid.times[k])
    hdot = model.matrix_derivative(t, fd_step, tolerances)
    gap = path.energies[k, n] - path.energies[k, m]
    if abs(gap) <= tolerances.degeneracy_gap:
        raise DegeneracyError(f"gap between levels {m} and {n} at t={t} is {gap:.3e}")
    vm = path.vectors[k, :, m]
    vn = path.vectors[k, :, n]
    return complex(np.vdot(vm, hdot @ vn) / gap)
