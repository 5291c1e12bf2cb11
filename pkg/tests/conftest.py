import numpy as np
import pytest

from discordlab import _kernels


def random_density(rng, dim=4):
    """Random full-rank density matrix (Ginibre construction)."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, dim=4):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_unitary(rng, dim=2):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile the hot kernels once so timing-sensitive tests exclude JIT cost.
    _kernels.warmup()
