import numpy as np
import pytest

from cavitybell.core import HilbertDims, OperatorMatrix, StateVector


def random_conditional_matrix(rng: np.random.Generator, dim: int, decay: float = 1.0):
    """Hermitian part minus i times a PSD decay part (valid no-jump generator)."""
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = (m + m.conj().T) / 2.0
    c = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    psd = (c.conj().T @ c) / dim
    return herm - 1j * decay * psd


def random_unit_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def small_dims_pool() -> list[HilbertDims]:
    """Assorted composite spaces with dim <= 32."""
    pool = []
    for n_max in (0, 1, 2, 3):
        for levels in (2, 3, 4):
            for atoms in (1, 2):
                d = HilbertDims(n_max=n_max, atom_levels=levels, n_atoms=atoms)
                if d.dim <= 32:
                    pool.append(d)
    return pool


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def as_operator(dims: HilbertDims, mat) -> OperatorMatrix:
    return OperatorMatrix(dims, np.asarray(mat, dtype=complex))


def as_state(dims: HilbertDims, amps) -> StateVector:
    return StateVector(dims, np.asarray(amps, dtype=complex))
