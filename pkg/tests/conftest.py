import numpy as np
import pytest

from twirlc.channels import SuperOp, pauli_labels, ptm_from_kraus, ptm_from_unitary
from twirlc.pauli import to_matrix


def random_kraus(n, rng, rank=3):
    """Trace-preserving Kraus set from normalized Ginibre matrices."""
    dim = 2**n
    gs = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(rank)]
    gram = sum(g.conj().T @ g for g in gs)
    w, v = np.linalg.eigh(gram)
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T
    return [g @ inv_sqrt for g in gs]


def random_cptp(n, rng, rank=3) -> SuperOp:
    return ptm_from_kraus(random_kraus(n, rng, rank))


def random_density(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_unitary(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def dense_twirl_oracle(e: SuperOp) -> np.ndarray:
    """Float-accumulated average of D_T R D_T over every Pauli twirl."""
    acc = np.zeros_like(e.matrix)
    for t in pauli_labels(e.n):
        d = ptm_from_unitary(to_matrix(t)).matrix
        acc += d @ e.matrix @ d
    return acc / 4**e.n


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
