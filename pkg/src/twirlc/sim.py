"""Noisy execution of cycle circuits under three error models.

Models: per-gate overrotation U -> U^(1+eps); T1/T2 decoherence applied
once per cycle with the cycle-kind duration; and a non-Markovian chain of
mediator qubits, system and environment interleaved S-E-...-E-S, evolving
jointly under the always-on coupling Hamiltonian while gates are generated
by their own Hamiltonians (Pauli/2 for time pi on easy rounds, CNOT
generator/10 for time 5*pi on hard rounds).

Units: the chain model is dimensionless (hbar=1); the T1/T2 model uses SI
seconds. The two are never combined in one run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .circuit import Circuit, EasyCycle, HardCycle, I2, X, validate
from .compiler import CompiledCircuit, RandomizationEnsemble, postprocess_counts
from .errors import CircuitError, ResourceCapError
from .pauli import PAULI_MATRICES, PauliString

MAX_SV_QUBITS = 12
MAX_DM_QUBITS = 8
MAX_CHAIN_QUBITS = 12
MAX_DENSE_PROPAGATOR_DIM = 1024
TROTTER_BUDGET = 1e-6  # unitary error per cycle

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

# Projector K with CNOT = exp(i*pi*K); fixes the branch for fractional powers.
_CNOT_GEN = np.zeros((4, 4), dtype=complex)
_CNOT_GEN[2:, 2:] = np.array([[0.5, -0.5], [-0.5, 0.5]])


@dataclass(frozen=True)
class OverrotationModel:
    """Gate-dependent coherent errors: every gate U executes as U^(1+eps)."""

    eps_easy: float = 0.0
    eps_hard: float = 0.0


@dataclass(frozen=True)
class DecoherenceModel:
    """Amplitude damping + dephasing per cycle; durations by cycle kind."""

    t1: float
    t2: float
    t_single: float = 25e-9
    t_double: float = 100e-9

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0 or self.t_single <= 0 or self.t_double <= 0:
            raise ValueError("decoherence times and durations must be positive")
        if self.t2 > 2 * self.t1 + 1e-15:
            raise ValueError("T2 must not exceed 2*T1")


@dataclass(frozen=True)
class LatticeModel:
    """Mediated-coupling chain: n_sys system qubits, n_sys-1 defect qubits."""

    n_sys: int
    j_mean: float = 0.0
    j_variance: float = 1e-3
    hard_scale: float = 0.1
    hard_time: float = 5 * math.pi
    easy_scale: float = 0.5
    easy_time: float = math.pi

    def __post_init__(self):
        if self.chain_len > MAX_CHAIN_QUBITS:
            raise ResourceCapError(
                f"chain of {self.chain_len} qubits exceeds the cap of {MAX_CHAIN_QUBITS}"
            )

    @property
    def n_env(self) -> int:
        return self.n_sys - 1

    @property
    def chain_len(self) -> int:
        return 2 * self.n_sys - 1

    def sys_position(self, q: int) -> int:
        return 2 * q


@dataclass(frozen=True)
class SimResult:
    final_state: np.ndarray
    distribution: dict
    error_rate: float


# --- primitives --------------------------------------------------------------

def _apply_gate(state: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """Apply a k-qubit operator to the given tensor axes of a state."""
    qubits = tuple(qubits)
    k = len(qubits)
    ur = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    moved = np.moveaxis(state, qubits, range(k))
    out = np.tensordot(ur, moved, axes=(tuple(range(k, 2 * k)), tuple(range(k))))
    return np.moveaxis(out, tuple(range(k)), qubits)


def unitary_power(u: np.ndarray, p: float) -> np.ndarray:
    """U^p through the principal eigenphase branch (angles in (-pi, pi])."""
    u = np.asarray(u, dtype=complex)
    if p == 1.0:
        return u
    w, v = np.linalg.eig(u)
    powered = v @ np.diag(np.exp(1j * p * np.angle(w))) @ np.linalg.inv(v)
    if np.max(np.abs(powered @ powered.conj().T - np.eye(u.shape[0]))) > 1e-9:
        raise ValueError("matrix power lost unitarity; input likely not unitary")
    return powered


def cnot_power(p: float) -> np.ndarray:
    """CNOT^p = exp(i*pi*p*K) with K the rank-one CNOT generator."""
    return np.eye(4, dtype=complex) + (np.exp(1j * math.pi * p) - 1.0) * _CNOT_GEN


def error_rate(ideal_state: np.ndarray, noisy) -> float:
    """r = 1 - <ideal| rho |ideal>, accepting a state vector or density matrix."""
    ideal = np.asarray(ideal_state, dtype=complex).reshape(-1)
    flat = np.asarray(noisy, dtype=complex).reshape(-1)
    if flat.size == ideal.size:
        fid = abs(np.vdot(ideal, flat)) ** 2
    elif flat.size == ideal.size**2:
        rho = flat.reshape(ideal.size, ideal.size)
        fid = float(np.real(ideal.conj() @ rho @ ideal))
    else:
        raise ValueError(f"dimension mismatch: {ideal.size} vs {flat.size}")
    r = 1.0 - fid
    if r < -1e-10 or r > 1.0 + 1e-10:
        raise ValueError(f"error rate {r} out of range; input not normalized?")
    return min(max(r, 0.0), 1.0)


def _probs_to_distribution(probs: np.ndarray, measured) -> dict:
    n = probs.ndim
    measured = tuple(measured)
    drop = tuple(q for q in range(n) if q not in measured)
    marg = probs.sum(axis=drop) if drop else probs
    kept = [q for q in range(n) if q in measured]
    marg = np.transpose(marg, [kept.index(q) for q in measured])
    flat = marg.reshape(-1)
    if flat.min() < -1e-9:
        raise ValueError("negative probability in distribution")
    flat = np.maximum(flat, 0.0)
    width = len(measured)
    return {format(i, f"0{width}b"): float(p) for i, p in enumerate(flat)}


def distribution_from_state(state: np.ndarray, n: int, measured) -> dict:
    """Computational-basis distribution over the measured qubits."""
    state = np.asarray(state)
    if state.ndim == 2 and state.shape == (2**n, 2**n):
        probs = np.real(np.diag(state)).reshape((2,) * n)
    else:
        probs = np.abs(state.reshape((2,) * n)) ** 2
    return _probs_to_distribution(probs, measured)


# --- overrotation / decoherence backends -------------------------------------

def _cycle_ops(cyc, model: OverrotationModel) -> list[tuple[np.ndarray, tuple[int, ...]]]:
    ops = []
    if isinstance(cyc, EasyCycle):
        for q, g in enumerate(cyc.gates):
            gg = unitary_power(g, 1.0 + model.eps_easy) if model.eps_easy else g
            ops.append((gg, (q,)))
    else:
        u4 = cnot_power(1.0 + model.eps_hard) if model.eps_hard else CNOT
        for c, t in cyc.pairs:
            ops.append((u4, (c, t)))
    return ops


def _decoherence_kraus(dec: DecoherenceModel, t: float) -> list[np.ndarray]:
    gamma = 1.0 - math.exp(-t / dec.t1)
    damp = [
        np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex),
        np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex),
    ]
    inv_tphi = 1.0 / dec.t2 - 0.5 / dec.t1
    p = 0.5 * (1.0 - math.exp(-t * inv_tphi))
    deph = [math.sqrt(1.0 - p) * I2, math.sqrt(p) * np.diag([1.0, -1.0]).astype(complex)]
    ops = [d @ k for d in deph for k in damp]
    return [k for k in ops if np.max(np.abs(k)) > 0.0]


def _zero_state(n: int) -> np.ndarray:
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    return psi


def ideal_state(circuit: Circuit) -> np.ndarray:
    """Noiseless state vector of the circuit, shape (2,)*n."""
    psi = _zero_state(circuit.n)
    clean = OverrotationModel()
    for cyc in circuit.cycles:
        for u, qubits in _cycle_ops(cyc, clean):
            psi = _apply_gate(psi, u, qubits)
    return psi


def run_overrotation(circuit: Circuit, model: OverrotationModel,
                     dec: DecoherenceModel | None = None) -> SimResult:
    """Exact simulation: state vector, or density matrix when dec is given."""
    validate(circuit)
    n = circuit.n
    ideal = ideal_state(circuit)
    if dec is None:
        if n > MAX_SV_QUBITS:
            raise ResourceCapError(f"state-vector backend capped at {MAX_SV_QUBITS} qubits")
        psi = _zero_state(n)
        for cyc in circuit.cycles:
            for u, qubits in _cycle_ops(cyc, model):
                psi = _apply_gate(psi, u, qubits)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError("state norm drifted beyond 1e-8")
        dist = _probs_to_distribution(np.abs(psi) ** 2, circuit.measured_qubits)
        return SimResult(psi.reshape(-1), dist, error_rate(ideal, psi))
    if n > MAX_DM_QUBITS:
        raise ResourceCapError(f"density-matrix backend capped at {MAX_DM_QUBITS} qubits")
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    fused = {
        kind: sum(np.kron(k, k.conj()) for k in _decoherence_kraus(dec, t))
        for kind, t in (("easy", dec.t_single), ("hard", dec.t_double))
    }
    for cyc in circuit.cycles:
        if isinstance(cyc, EasyCycle):
            u = reduce(np.kron, (
                unitary_power(g, 1.0 + model.eps_easy) if model.eps_easy else g
                for g in cyc.gates
            ))
            noise = fused["easy"]
        else:
            u = np.eye(dim, dtype=complex)
            u4 = cnot_power(1.0 + model.eps_hard) if model.eps_hard else CNOT
            for c, t in cyc.pairs:
                u = _embed(u4, (c, t), n) @ u
            noise = fused["hard"]
        rho = u @ rho @ u.conj().T
        tens = rho.reshape((2,) * (2 * n))
        for q in range(n):
            tens = _apply_gate(tens, noise, (q, q + n))
        rho = tens.reshape(dim, dim)
    mat = rho
    if abs(np.trace(mat).real - 1.0) > 1e-8:
        raise ValueError("density matrix trace drifted beyond 1e-8")
    dist = distribution_from_state(mat, n, circuit.measured_qubits)
    return SimResult(mat, dist, error_rate(ideal, mat))


def run_overrotation_counts(circuit: Circuit, model: OverrotationModel,
                            dec: DecoherenceModel | None, shots: int,
                            rng: np.random.Generator) -> dict:
    """Monte-Carlo trajectory sampling of the same model; returns counts."""
    validate(circuit)
    n = circuit.n
    if n > MAX_SV_QUBITS:
        raise ResourceCapError(f"trajectory backend capped at {MAX_SV_QUBITS} qubits")
    plan = [( _cycle_ops(cyc, model),
              None if dec is None else
              _decoherence_kraus(dec, dec.t_single if isinstance(cyc, EasyCycle) else dec.t_double))
            for cyc in circuit.cycles]
    measured = circuit.measured_qubits
    counts: dict = {}
    for _ in range(shots):
        psi = _zero_state(n)
        for ops, kraus in plan:
            for u, qubits in ops:
                psi = _apply_gate(psi, u, qubits)
            if kraus is None:
                continue
            for q in range(n):
                branches = [_apply_gate(psi, k, (q,)) for k in kraus]
                weights = np.array([np.vdot(b, b).real for b in branches])
                pick = rng.choice(len(branches), p=weights / weights.sum())
                psi = branches[pick] / math.sqrt(weights[pick])
        dist = _probs_to_distribution(np.abs(psi) ** 2, measured)
        keys = list(dist)
        probs = np.array([dist[k] for k in keys])
        outcome = keys[rng.choice(len(keys), p=probs / probs.sum())]
        counts[outcome] = counts.get(outcome, 0) + 1
    return counts


# --- lattice (non-Markovian) backend -----------------------------------------

def sample_couplings(model: LatticeModel, rng: np.random.Generator) -> np.ndarray:
    """One J per adjacent chain pair, drawn fresh per circuit realization."""
    std = math.sqrt(model.j_variance)
    return rng.normal(model.j_mean, std, size=model.chain_len - 1)


def coupling_bound(js: np.ndarray) -> float:
    """Uniform bound on the interaction norm: each edge term has norm 2|J|."""
    return float(2.0 * np.sum(np.abs(js)))


def _embed(op: np.ndarray, positions, length: int) -> np.ndarray:
    eye = np.eye(2**length, dtype=complex).reshape((2,) * length + (2**length,))
    return _apply_gate(eye, op, positions).reshape(2**length, 2**length)


_XY_EDGE = np.kron(X, PAULI_MATRICES["Y"]) + np.kron(PAULI_MATRICES["Y"], X)


def interaction_hamiltonian(model: LatticeModel, js: np.ndarray) -> np.ndarray:
    length = model.chain_len
    h = np.zeros((2**length, 2**length), dtype=complex)
    for k in range(length - 1):
        h += js[k] * _embed(_XY_EDGE, (k, k + 1), length)
    return h


def _pauli_label_of(g: np.ndarray) -> str | None:
    """Label when g equals phase * P for a Pauli P, else None."""
    for lab, mat in PAULI_MATRICES.items():
        c = np.trace(mat.conj().T @ g) / 2.0
        if abs(abs(c) - 1.0) < 1e-9 and np.max(np.abs(g - c * mat)) < 1e-9:
            return lab
    return None


def _easy_ham(cyc: EasyCycle, model: LatticeModel) -> np.ndarray:
    length = model.chain_len
    h = np.zeros((2**length, 2**length), dtype=complex)
    for q, g in enumerate(cyc.gates):
        lab = _pauli_label_of(g)
        if lab == "I":
            continue
        if lab is not None:
            h += model.easy_scale * _embed(PAULI_MATRICES[lab], (model.sys_position(q),), length)
            continue
        # generic SU(2) gate: principal-log generator over the easy duration
        w, v = np.linalg.eig(g)
        gen = v @ np.diag(-np.angle(w) / model.easy_time) @ np.linalg.inv(v)
        gen = (gen + gen.conj().T) / 2.0
        h += _embed(gen, (model.sys_position(q),), length)
    return h


def _hard_ham(cyc: HardCycle, model: LatticeModel) -> np.ndarray:
    length = model.chain_len
    h = np.zeros((2**length, 2**length), dtype=complex)
    for c, t in cyc.pairs:
        h += model.hard_scale * _embed(CNOT, (model.sys_position(c), model.sys_position(t)), length)
    return h


def _propagator(h: np.ndarray, tau: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * tau)) @ v.conj().T


def _trotter_steps(a_norm: float, b_norm: float, tau: float) -> int:
    total = a_norm + b_norm
    if total == 0.0:
        return 1
    dt = math.sqrt(6.0 * TROTTER_BUDGET / (tau * total**3 + 1e-300)) / 2.0
    return max(1, int(math.ceil(tau / max(dt, 1e-12))))


def _trotter_cycle(psi: np.ndarray, cyc, model: LatticeModel, js: np.ndarray,
                   tau: float) -> np.ndarray:
    """Second-order split: local gate terms / even edges / odd edges."""
    length = model.chain_len
    gate_terms: list[tuple[np.ndarray, tuple[int, ...]]] = []
    a_norm = 0.0
    if isinstance(cyc, EasyCycle):
        for q, g in enumerate(cyc.gates):
            lab = _pauli_label_of(g)
            if lab == "I":
                continue
            if lab is None:
                w, v = np.linalg.eig(g)
                gen = v @ np.diag(-np.angle(w) / model.easy_time) @ np.linalg.inv(v)
                gen = (gen + gen.conj().T) / 2.0
            else:
                gen = model.easy_scale * PAULI_MATRICES[lab]
            gate_terms.append((gen, (model.sys_position(q),)))
            a_norm += float(np.linalg.norm(gen, 2))
    else:
        for c, t in cyc.pairs:
            gate_terms.append((model.hard_scale * CNOT, (model.sys_position(c), model.sys_position(t))))
            a_norm += model.hard_scale
    edges = [(k, js[k]) for k in range(length - 1) if js[k] != 0.0]
    b_norm = coupling_bound(js)
    steps = _trotter_steps(a_norm, b_norm, tau)
    dt = tau / steps
    half_gates = [(_propagator(np.asarray(g), dt / 2), pos) for g, pos in gate_terms]
    even = [(_propagator(j * _XY_EDGE, dt / 2), (k, k + 1)) for k, j in edges if k % 2 == 0]
    odd = [(_propagator(j * _XY_EDGE, dt), (k, k + 1)) for k, j in edges if k % 2 == 1]
    for _ in range(steps):
        for u, pos in half_gates:
            psi = _apply_gate(psi, u, pos)
        for u, pos in even:
            psi = _apply_gate(psi, u, pos)
        for u, pos in odd:
            psi = _apply_gate(psi, u, pos)
        for u, pos in even:
            psi = _apply_gate(psi, u, pos)
        for u, pos in half_gates:
            psi = _apply_gate(psi, u, pos)
    return psi


def _lattice_cycle(psi: np.ndarray, cyc, model: LatticeModel, js: np.ndarray,
                   h_int: np.ndarray | None, cache: dict) -> np.ndarray:
    tau = model.easy_time if isinstance(cyc, EasyCycle) else model.hard_time
    dim = 2**model.chain_len
    if dim > MAX_DENSE_PROPAGATOR_DIM:
        return _trotter_cycle(psi, cyc, model, js, tau)
    if isinstance(cyc, EasyCycle):
        key = ("e",) + tuple(_pauli_label_of(g) for g in cyc.gates)
        if None in key:
            key = None
    else:
        key = ("h",) + tuple(cyc.pairs)
    if key is not None and key in cache:
        u = cache[key]
    else:
        h_cycle = _easy_ham(cyc, model) if isinstance(cyc, EasyCycle) else _hard_ham(cyc, model)
        u = _propagator(h_cycle + h_int, tau)
        if key is not None:
            cache[key] = u
    return (u @ psi.reshape(-1)).reshape(psi.shape)


def _system_fidelity(joint: np.ndarray, target_sys: np.ndarray, model: LatticeModel) -> float:
    sys_axes = [model.sys_position(q) for q in range(model.n_sys)]
    moved = np.moveaxis(joint, sys_axes, range(model.n_sys))
    mat = moved.reshape(2**model.n_sys, -1)
    amps = target_sys.reshape(-1).conj() @ mat
    return float(np.real(np.vdot(amps, amps)))


def lattice_error_curve(circ: Circuit, model: LatticeModel,
                        rng: np.random.Generator | None = None,
                        js: np.ndarray | None = None,
                        frames=None,
                        ideal: Circuit | None = None) -> np.ndarray:
    """Error rate after each easy cycle (index = completed hard-cycle count).

    ``frames``, when given, holds one Pauli frame per easy cycle (the running
    twirl of a compiled circuit); the fidelity is evaluated after undoing it.
    ``ideal`` supplies the reference circuit when ``circ`` is a dressed one.
    """
    validate(circ)
    if circ.n != model.n_sys:
        raise CircuitError(f"circuit has {circ.n} qubits, model expects {model.n_sys}")
    reference = circ if ideal is None else ideal
    if js is None:
        if rng is None:
            raise ValueError("need either js or rng to draw couplings")
        js = sample_couplings(model, rng)
    h_int = None
    if 2**model.chain_len <= MAX_DENSE_PROPAGATOR_DIM:
        h_int = interaction_hamiltonian(model, js)
    cache: dict = {}
    psi = _zero_state(model.chain_len)
    phi = _zero_state(model.n_sys)
    clean = OverrotationModel()
    frames = list(frames) if frames is not None else None
    rates = []
    k = 0
    for cyc, ref_cyc in zip(circ.cycles, reference.cycles):
        psi = _lattice_cycle(psi, cyc, model, js, h_int, cache)
        for u, qubits in _cycle_ops(ref_cyc, clean):
            phi = _apply_gate(phi, u, qubits)
        if isinstance(cyc, EasyCycle):
            target = phi
            if frames is not None:
                target = phi.copy()
                for q, lab in enumerate(frames[k].labels):
                    if lab != "I":
                        target = _apply_gate(target, PAULI_MATRICES[lab], (q,))
            k += 1
            fid = _system_fidelity(psi, target, model)
            rates.append(min(max(1.0 - fid, 0.0), 1.0))
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("joint state norm drifted beyond 1e-8")
    return np.array(rates)


def run_lattice(circ: Circuit, model: LatticeModel, rng: np.random.Generator,
                js: np.ndarray | None = None) -> SimResult:
    """Joint evolution of one circuit realization; couplings drawn from rng."""
    validate(circ)
    if circ.n != model.n_sys:
        raise CircuitError(f"circuit has {circ.n} qubits, model expects {model.n_sys}")
    if js is None:
        js = sample_couplings(model, rng)
    h_int = None
    if 2**model.chain_len <= MAX_DENSE_PROPAGATOR_DIM:
        h_int = interaction_hamiltonian(model, js)
    cache: dict = {}
    psi = _zero_state(model.chain_len)
    for cyc in circ.cycles:
        psi = _lattice_cycle(psi, cyc, model, js, h_int, cache)
    phi = ideal_state(circ)
    fid = _system_fidelity(psi, phi, model)
    probs = np.abs(psi) ** 2
    measured_positions = [model.sys_position(q) for q in circ.measured_qubits]
    dist = _probs_to_distribution(probs, measured_positions)
    return SimResult(psi.reshape(-1), dist, min(max(1.0 - fid, 0.0), 1.0))


# --- compiled execution -------------------------------------------------------

def _frame_corrected_state(state: np.ndarray, n: int, frame: PauliString):
    state = np.asarray(state)
    if state.size == 2**n:
        out, is_dm = state.reshape((2,) * n), False
    elif state.size == 4**n:
        out, is_dm = state.reshape((2,) * (2 * n)), True
    else:
        raise ValueError(f"state size {state.size} does not match {n} qubits")
    for q, lab in enumerate(frame.labels):
        if lab == "I":
            continue
        mat = PAULI_MATRICES[lab]
        out = _apply_gate(out, mat, (q,))
        if is_dm:
            out = _apply_gate(out, mat.conj(), (q + n,))
    return out.reshape(state.shape)


def run_compiled(ensemble: RandomizationEnsemble, model, rng: np.random.Generator | None = None,
                 dec: DecoherenceModel | None = None) -> tuple[list[SimResult], dict]:
    """Execute every member, undo frames, and average the distributions.

    Member error rates are measured against the bare circuit's ideal state
    after frame correction.
    """
    bare_ideal = ideal_state(ensemble.bare)
    measured = ensemble.bare.measured_qubits
    results = []
    total: dict = {}
    for member in ensemble.members:
        if isinstance(model, LatticeModel):
            raw = run_lattice(member.circuit, model, rng)
            joint = raw.final_state.reshape((2,) * model.chain_len)
            target = _frame_corrected_state(bare_ideal, ensemble.bare.n, member.final_frame.pauli)
            fid = _system_fidelity(joint, target, model)
            r = min(max(1.0 - fid, 0.0), 1.0)
            dist = postprocess_counts(raw.distribution, member.final_frame, measured)
            res = SimResult(raw.final_state, dist, r)
        else:
            raw = run_overrotation(member.circuit, model, dec)
            corrected = _frame_corrected_state(
                np.asarray(raw.final_state), member.circuit.n, member.final_frame.pauli
            )
            r = error_rate(bare_ideal, corrected)
            dist = postprocess_counts(raw.distribution, member.final_frame, measured)
            res = SimResult(raw.final_state, dist, r)
        results.append(res)
        for key, p in res.distribution.items():
            total[key] = total.get(key, 0.0) + p
    scale = 1.0 / len(results)
    avg = {key: p * scale for key, p in sorted(total.items())}
    return results, avg


# --- random dynamical decoupling baseline --------------------------------------

def rdd_baseline(model: LatticeModel, rounds: int, dt: float,
                 rng: np.random.Generator, draws: int = 100) -> float:
    """Mean error rate of random decoupling on the identity circuit.

    Random system-wide Pauli pulses at spacing dt, free coupling evolution
    in between, final inverse pulse applied; averaged over pulse sequences
    and coupling draws.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    total = 0.0
    for _ in range(draws):
        js = sample_couplings(model, rng)
        u_free = _propagator(interaction_hamiltonian(model, js), dt)
        psi = _zero_state(model.chain_len)
        current = None
        for _ in range(rounds):
            nxt = tuple(rng.integers(0, 4, size=model.n_sys))
            psi = _apply_pulse(psi, current, nxt, model)
            current = nxt
            psi = (u_free @ psi.reshape(-1)).reshape(psi.shape)
        psi = _apply_pulse(psi, current, None, model)
        sys_axes = [model.sys_position(q) for q in range(model.n_sys)]
        moved = np.moveaxis(psi, sys_axes, range(model.n_sys))
        mat = moved.reshape(2**model.n_sys, -1)
        fid = float(np.sum(np.abs(mat[0]) ** 2))
        total += min(max(1.0 - fid, 0.0), 1.0)
    return total / draws


_LABELS = "IXYZ"


def _apply_pulse(psi, undo, apply, model: LatticeModel):
    """Instantaneous pulse undoing one system Pauli and applying the next."""
    for q in range(model.n_sys):
        pos = model.sys_position(q)
        if undo is not None and undo[q] != 0:
            psi = _apply_gate(psi, PAULI_MATRICES[_LABELS[undo[q]]], (pos,))
        if apply is not None and apply[q] != 0:
            psi = _apply_gate(psi, PAULI_MATRICES[_LABELS[apply[q]]], (pos,))
    return psi
