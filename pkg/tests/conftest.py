"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from adiaudit import HamiltonianModel, TimeGrid


def random_smooth_model(seed: int, dim: int = 3) -> HamiltonianModel:
    """A well-gapped smooth Hermitian model with an analytic derivative.

    Diagonal levels spaced by >= 1.1 plus a small two-tone Hermitian
    perturbation, so the spectrum never comes close to degeneracy and
    tracking is unambiguous at any reasonable grid.
    """
    rng = np.random.default_rng(seed)
    base = np.diag(np.arange(dim, dtype=float) * 1.1 + rng.uniform(-0.05, 0.05, size=dim))
    raw_a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    raw_b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    pert_a = (raw_a + raw_a.conj().T) / 2.0
    pert_b = (raw_b + raw_b.conj().T) / 2.0
    pert_a *= 0.05 / np.linalg.norm(pert_a)
    pert_b *= 0.05 / np.linalg.norm(pert_b)
    nu_a, nu_b = rng.uniform(0.5, 1.5, size=2)

    def evaluate_many(ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        cos_t = np.cos(nu_a * ts)[..., None, None]
        sin_t = np.sin(nu_b * ts)[..., None, None]
        return base + cos_t * pert_a + sin_t * pert_b

    def derivative_many(ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        cos_t = np.cos(nu_b * ts)[..., None, None]
        sin_t = np.sin(nu_a * ts)[..., None, None]
        return -nu_a * sin_t * pert_a + nu_b * cos_t * pert_b

    return HamiltonianModel(
        dimension=dim,
        evaluate=lambda t: evaluate_many(np.atleast_1d(np.asarray(t, dtype=float)))[0],
        derivative=lambda t: derivative_many(np.atleast_1d(np.asarray(t, dtype=float)))[0],
        evaluate_many=evaluate_many,
        derivative_many=derivative_many,
    )


def phase_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over a global phase of ||a - exp(i phi) b||."""
    overlap = np.vdot(b, a)
    if abs(overlap) < 1e-300:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(a - b * (overlap / abs(overlap))))


@pytest.fixture
def smooth_model() -> HamiltonianModel:
    return random_smooth_model(seed=1776)


@pytest.fixture
def short_grid() -> TimeGrid:
    return TimeGrid(t_end=5.0, steps=2500)
