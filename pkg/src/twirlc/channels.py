"""Channel algebra in the Pauli-transfer-matrix picture.

Basis convention: normalized Pauli strings P/sqrt(2^n), ordered
lexicographically I<X<Y<Z per qubit with qubit 0 most significant, so PTMs
of unitaries are real orthogonal matrices. The closed-form overrotation
comparison depends on this normalization.

Structural checks use 1e-10, arithmetic identities 1e-12 (double precision
accumulated over 4^n-term sums).
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResourceCapError
from .pauli import PauliString, to_matrix

TP_TOL = 1e-10
DIAG_TOL = 1e-12

# Exact 4^n-term twirl sums are used up to this size, diagonal projection above.
MAX_SUM_QUBITS = 3
MAX_PTM_QUBITS = 5


def pauli_labels(n: int) -> list[PauliString]:
    return [PauliString(p) for p in itertools.product("IXYZ", repeat=n)]


@lru_cache(maxsize=8)
def pauli_basis(n: int) -> np.ndarray:
    """Stack of the 4^n unnormalized Pauli matrices, shape (4^n, 2^n, 2^n)."""
    if n > MAX_PTM_QUBITS:
        raise ResourceCapError(f"Pauli basis capped at {MAX_PTM_QUBITS} qubits")
    return np.stack([to_matrix(p) for p in pauli_labels(n)])


@lru_cache(maxsize=8)
def _sign_table(n: int) -> np.ndarray:
    """S[t, i] = +1 if Pauli t and Pauli i commute else -1, as int64."""
    digits = np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64)
    clash = np.zeros((4**n, 4**n), dtype=np.int64)
    for q in range(n):
        a = digits[:, q][:, None]
        b = digits[:, q][None, :]
        clash += ((a != 0) & (b != 0) & (a != b)).astype(np.int64)
    return 1 - 2 * (clash % 2)


@dataclass(frozen=True, eq=False)
class SuperOp:
    """A channel as its real 4^n x 4^n Pauli transfer matrix."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4**self.n, 4**self.n):
            raise ValueError(f"PTM shape {m.shape} does not match n={self.n}")
        object.__setattr__(self, "matrix", m)

    def is_trace_preserving(self, tol: float = TP_TOL) -> bool:
        first = np.zeros(4**self.n)
        first[0] = 1.0
        return np.max(np.abs(self.matrix[0] - first)) <= tol


@dataclass(frozen=True, eq=False)
class PauliChannel:
    """Probabilistic mixture of Pauli errors; its PTM is diagonal."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (4**self.n,):
            raise ValueError("probability vector has wrong length")
        object.__setattr__(self, "probs", p)

    def to_superop(self) -> SuperOp:
        diag = _sign_table(self.n).astype(float) @ self.probs
        return SuperOp(self.n, np.diag(diag))


@dataclass(frozen=True, eq=False)
class JointChannel:
    """Channel on environment (dim d) x system (n qubits), stored blockwise.

    blocks[(a,b), (c,e)] is the 4^n x 4^n system submatrix between the
    environment matrix units |a><b| and |c><e|; indices flattened as a*d+b.
    """

    n: int
    d: int
    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        expect = (self.d**2, self.d**2, 4**self.n, 4**self.n)
        if b.shape != expect:
            raise ValueError(f"blocks shape {b.shape}, expected {expect}")
        object.__setattr__(self, "blocks", b)


def ptm_from_unitary(u: np.ndarray) -> SuperOp:
    """PTM of the conjugation channel rho -> U rho U†."""
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    n = int(round(np.log2(dim)))
    if u.shape != (dim, dim) or 2**n != dim:
        raise ValueError(f"not a qubit-space matrix: shape {u.shape}")
    if n > MAX_PTM_QUBITS:
        raise ResourceCapError(f"ptm_from_unitary capped at {MAX_PTM_QUBITS} qubits")
    if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > TP_TOL:
        raise ValueError("input is not unitary")
    basis = pauli_basis(n)
    conj = u[None] @ basis @ u.conj().T[None]
    mat = np.einsum("iab,jba->ij", basis, conj).real / dim
    return SuperOp(n, mat)


def ptm_from_kraus(ops) -> SuperOp:
    """PTM of rho -> sum_k K rho K†; requires a trace-preserving Kraus set."""
    ops = [np.asarray(k, dtype=complex) for k in ops]
    dim = ops[0].shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError("Kraus operators must act on qubit spaces")
    total = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(total - np.eye(dim))) > TP_TOL:
        raise ValueError("Kraus set is not trace preserving")
    basis = pauli_basis(n)
    out = np.zeros((4**n, dim, dim), dtype=complex)
    for k in ops:
        out += k[None] @ basis @ k.conj().T[None]
    mat = np.einsum("iab,jba->ij", basis, out).real / dim
    return SuperOp(n, mat)


def compose(a: SuperOp, b: SuperOp) -> SuperOp:
    """Channel doing b first, then a."""
    if a.n != b.n:
        raise ValueError("qubit count mismatch")
    return SuperOp(a.n, a.matrix @ b.matrix)


def apply_to_density(e: SuperOp, rho: np.ndarray) -> np.ndarray:
    """Apply the channel to a density matrix via Pauli coordinates."""
    basis = pauli_basis(e.n)
    dim = 2**e.n
    coords = np.einsum("iab,ba->i", basis, np.asarray(rho, dtype=complex)) / dim
    out = e.matrix @ coords.real + 1j * (e.matrix @ coords.imag)
    return np.tensordot(out, basis, axes=(0, 0))


def twirl_average(e: SuperOp) -> SuperOp:
    """Exact uniform average of T† E T over all 4^n Pauli twirls.

    For n <= MAX_SUM_QUBITS the 4^n-term sum is evaluated with integer sign
    weights (exact, so the diagonal is preserved bitwise); above that the
    equivalent diagonal projection is used.
    """
    if e.n <= MAX_SUM_QUBITS:
        s = _sign_table(e.n)
        weights = s.T @ s  # 4^n on the diagonal, 0 elsewhere, exactly
        mat = e.matrix * weights / 4**e.n
    else:
        mat = np.diag(np.diag(e.matrix))
    return SuperOp(e.n, mat)


def is_pauli_channel(e: SuperOp, tol: float = TP_TOL) -> tuple[bool, float]:
    """(max off-diagonal <= tol, Frobenius norm of the off-diagonal part)."""
    off = e.matrix - np.diag(np.diag(e.matrix))
    return bool(np.max(np.abs(off)) <= tol), float(np.linalg.norm(off))


def pauli_channel_from_superop(e: SuperOp, tol: float = TP_TOL) -> PauliChannel:
    """Extract error probabilities from a diagonal PTM."""
    ok, off = is_pauli_channel(e, tol)
    if not ok:
        raise ValueError(f"PTM is not diagonal (off-diagonal norm {off:.3g})")
    probs = _sign_table(e.n).astype(float) @ np.diag(e.matrix) / 4**e.n
    return PauliChannel(e.n, probs)


# --- joint (non-Markovian) channels ----------------------------------------

def _joint_basis(n: int, d: int) -> np.ndarray:
    """Orthonormal joint basis |a><b| x P_i/sqrt(2^n), flattened (a*d+b)*4^n+i."""
    basis = pauli_basis(n) / np.sqrt(2.0**n)
    dim = d * 2**n
    out = np.empty((d * d * 4**n, dim, dim), dtype=complex)
    k = 0
    for a in range(d):
        for b in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            for i in range(4**n):
                out[k] = np.kron(unit, basis[i])
                k += 1
    return out


def joint_from_unitary(u: np.ndarray, n_sys: int, d_env: int) -> JointChannel:
    """Blockwise superoperator of rho -> U rho U† on environment x system."""
    u = np.asarray(u, dtype=complex)
    dim = d_env * 2**n_sys
    if u.shape != (dim, dim):
        raise ValueError(f"joint unitary shape {u.shape}, expected {(dim, dim)}")
    if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > TP_TOL:
        raise ValueError("input is not unitary")
    basis = _joint_basis(n_sys, d_env)
    conj = u[None] @ basis @ u.conj().T[None]
    mat = np.einsum("iab,jab->ij", basis.conj(), conj)
    nb = 4**n_sys
    blocks = mat.reshape(d_env**2, nb, d_env**2, nb).transpose(0, 2, 1, 3)
    return JointChannel(n_sys, d_env, blocks)


def block_twirl(j: JointChannel) -> JointChannel:
    """Average over twirls acting as I_env x T: every block goes diagonal."""
    if j.n <= MAX_SUM_QUBITS:
        s = _sign_table(j.n)
        weights = (s.T @ s).astype(float) / 4**j.n
        blocks = j.blocks * weights[None, None]
    else:
        mask = np.eye(4**j.n)
        blocks = j.blocks * mask[None, None]
    return JointChannel(j.n, j.d, blocks)


def reduce_to_system(j: JointChannel, env_state: np.ndarray) -> SuperOp:
    """System-only channel for inputs rho_env x rho_sys, environment traced out."""
    rho = np.asarray(env_state, dtype=complex)
    if rho.shape != (j.d, j.d):
        raise ValueError(f"environment state shape {rho.shape}, expected {(j.d, j.d)}")
    if abs(np.trace(rho) - 1.0) > 1e-9 or np.max(np.abs(rho - rho.conj().T)) > 1e-9:
        raise ValueError("environment state is not a density matrix")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -1e-9:
        raise ValueError("environment state is not positive semidefinite")
    nb = 4**j.n
    blocks = j.blocks.reshape(j.d, j.d, j.d, j.d, nb, nb)
    mat = np.einsum("aacdij,cd->ij", blocks, rho)
    if np.max(np.abs(mat.imag)) > 1e-9:
        raise ValueError("reduced channel has a non-real PTM; invalid joint channel")
    return SuperOp(j.n, mat.real)


def fidelity_metrics(e: SuperOp) -> tuple[float, float]:
    """(average gate fidelity, process fidelity) of the channel vs identity.

    Both are linear in the PTM diagonal, hence invariant under twirling.
    """
    tr = float(np.trace(e.matrix))
    dim = 2.0**e.n
    process = tr / 4**e.n
    average = (tr + dim) / (4**e.n + dim)
    return average, process


# --- complete positivity ----------------------------------------------------

def choi_matrix(e: SuperOp) -> np.ndarray:
    """Choi operator sum_ab E_ab x Channel(E_ab); PSD iff the map is CP."""
    dim = 2**e.n
    basis = pauli_basis(e.n)
    choi = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[a, b] = 1.0
            coords = np.einsum("iab,ba->i", basis, unit) / dim
            image = np.tensordot(e.matrix @ coords, basis, axes=(0, 0))
            choi += np.kron(unit, image)
    return choi


def is_cp(e: SuperOp, tol: float = TP_TOL) -> bool:
    eigs = np.linalg.eigvalsh((choi_matrix(e) + choi_matrix(e).conj().T) / 2)
    return bool(eigs.min() >= -tol)


# --- import/export ----------------------------------------------------------

def superop_to_csv(e: SuperOp, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", e.n])
        for row in e.matrix:
            writer.writerow([repr(float(v)) for v in row])


def superop_from_csv(path) -> SuperOp:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "n":
        raise ValueError("missing PTM header row")
    n = int(rows[0][1])
    mat = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    return SuperOp(n, mat)


def kraus_to_json(ops, path) -> None:
    payload = [[[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(op)] for op in ops]
    with open(path, "w") as fh:
        json.dump(payload, fh)


def kraus_from_json(path) -> list[np.ndarray]:
    with open(path) as fh:
        payload = json.load(fh)
    return [np.array([[complex(re, im) for re, im in row] for row in op]) for op in payload]
