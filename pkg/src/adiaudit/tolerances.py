"""Central numerical tolerances.

Every module reads its thresholds from a :class:`Tolerances` record instead of
redefining magic numbers locally. The defaults are the contract; operations
accept an optional record so callers can tighten or relax a single gate
(e.g. the verification CLI exposes overrides through the config file).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used across the package.

    Attributes
    ----------
    hermiticity_reject:
        Relative Frobenius defect ``|M - M^H| / |M|`` above which a matrix is
        rejected as not Hermitian (rather than silently symmetrized).
    state_norm:
        Allowed deviation of a state norm from 1 in consuming operations.
    unitarity_step:
        Allowed ``|U^H U - 1|`` Frobenius defect for a single step unitary.
    unitarity_path:
        Allowed accumulated defect anywhere along a propagated path.
    degeneracy_gap:
        Minimum admissible spectral gap; below this the decomposition refuses.
    pairing_ambiguity:
        Two candidate frame-to-frame overlaps closer than this make the level
        pairing ambiguous, which is a tracking error.
    gauge_real_part:
        Largest tolerated ``|Re <E|dE/dt>|`` before the gauge is considered
        corrupted.
    fd_step_floor:
        Smallest finite-difference step substituted for a missing analytic
        time derivative.
    eigen_residual:
        Allowed ``|H v - E v|`` for an eigenpair returned by a decomposition.
    satisfaction_margin:
        Default "much smaller than" factor used by the condition verdicts.
    """

    hermiticity_reject: float = 1e-8
    state_norm: float = 1e-10
    unitarity_step: float = 1e-10
    unitarity_path: float = 1e-8
    degeneracy_gap: float = 1e-8
    pairing_ambiguity: float = 0.1
    gauge_real_part: float = 1e-6
    fd_step_floor: float = 1e-6
    eigen_residual: float = 1e-10
    satisfaction_margin: float = 0.1

    # Residual gates used by the verification pipeline (exit code 3).
    verify_eigenvalue: float = 1e-10
    verify_overlap_deficit: float = 1e-8
    verify_coupling_floor: float = 1e-6
    verify_equivalence: float = 1e-6
    verify_conjugacy: float = 1e-6
    verify_exact_value: float = 1e-10

    def coupling_identity(self, step: float) -> float:
        """Grid-adaptive gate for the coupling-identity residual."""
        return max(self.verify_coupling_floor, 10.0 * step * step)


DEFAULT_TOLERANCES = Tolerances()
