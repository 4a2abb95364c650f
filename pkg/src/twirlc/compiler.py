"""The randomized-compiling pass.

Each easy cycle is replaced by the dressed cycle T_k * E_k * corr, where
corr conjugates the previous twirl through the intervening hard cycle.
Depth never changes and the trailing twirl is never emitted as a gate: it
is recorded as the final frame and undone by classical post-processing of
measurement bitstrings (Pauli phases cannot affect computational-basis
statistics, so the frame's phase is irrelevant there).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, EasyCycle, HardCycle, validate
from .pauli import PAULI_MATRICES, PauliString, PhasedPauli, correction_twirl, sample_uniform


@dataclass(frozen=True, eq=False)
class CompiledCircuit:
    """One randomization: same shape as the bare input plus the virtual frame."""

    circuit: Circuit
    final_frame: PhasedPauli
    twirls: tuple[PauliString, ...]
    seed: int | None = None


@dataclass(frozen=True, eq=False)
class RandomizationEnsemble:
    members: tuple[CompiledCircuit, ...]
    bare: Circuit

    @property
    def n_rc(self) -> int:
        return len(self.members)


def dress(bare: Circuit, twirls) -> CompiledCircuit:
    """Deterministic core of the pass: fold the given twirls into easy cycles.

    The compiled cycle list satisfies, as exact matrices,
    compiled_unitary == to_matrix(T_last) @ bare_unitary, so executing the
    compiled circuit and then the final frame reproduces the bare circuit.
    """
    validate(bare)
    twirls = tuple(twirls)
    n_easy = sum(1 for c in bare.cycles if isinstance(c, EasyCycle))
    if len(twirls) != n_easy:
        raise ValueError(f"need {n_easy} twirls, got {len(twirls)}")
    new_cycles: list = []
    prev: PauliString | None = None
    last_hard: HardCycle | None = None
    k = 0
    for cyc in bare.cycles:
        if isinstance(cyc, HardCycle):
            last_hard = cyc
            new_cycles.append(cyc)
            continue
        t = twirls[k]
        k += 1
        corr = None if prev is None else correction_twirl(last_hard, prev)
        gates = []
        for q in range(bare.n):
            g = PAULI_MATRICES[t.labels[q]] @ cyc.gates[q]
            if corr is not None:
                g = g @ PAULI_MATRICES[corr.pauli.labels[q]]
                if q == 0:
                    g = corr.phase * g
            gates.append(g)
        new_cycles.append(EasyCycle(tuple(gates)))
        prev = t
    compiled = Circuit(bare.n, tuple(new_cycles), bare.measured_qubits, bare.measurement)
    return CompiledCircuit(compiled, PhasedPauli(0, twirls[-1]), twirls)


def compile_once(bare: Circuit, rng: np.random.Generator, seed: int | None = None) -> CompiledCircuit:
    """Sample one uniform Pauli twirl per easy cycle and dress the circuit."""
    validate(bare)
    n_easy = sum(1 for c in bare.cycles if isinstance(c, EasyCycle))
    twirls = tuple(sample_uniform(bare.n, rng) for _ in range(n_easy))
    out = dress(bare, twirls)
    return CompiledCircuit(out.circuit, out.final_frame, out.twirls, seed)


def compile_ensemble(bare: Circuit, n_rc: int, seed) -> RandomizationEnsemble:
    """n_rc independent randomizations on substreams spawned from one seed,
    so members are reproducible and order-independent."""
    if n_rc < 1:
        raise ValueError("n_rc must be >= 1")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_rc)
    members = tuple(
        compile_once(bare, np.random.default_rng(child), seed=i)
        for i, child in enumerate(children)
    )
    return RandomizationEnsemble(members, bare)


def postprocess_counts(counts: dict, frame, measured_qubits) -> dict:
    """Undo the final frame on measurement bitstrings.

    Bit i flips iff the frame acts as X or Y on measured qubit i; Z and I
    commute with computational readout. Works on counts or probabilities.
    """
    pauli = frame.pauli if isinstance(frame, PhasedPauli) else frame
    measured = tuple(measured_qubits)
    flips = [pauli.labels[q] in ("X", "Y") for q in measured]
    out: dict = {}
    for key, value in counts.items():
        if len(key) != len(measured):
            raise ValueError(f"key {key!r} does not match {len(measured)} measured qubits")
        new_key = "".join(
            ("1" if ch == "0" else "0") if flip else ch for ch, flip in zip(key, flips)
        )
        out[new_key] = out.get(new_key, 0) + value
    return out


def average_distribution(ensemble: RandomizationEnsemble, executor) -> dict:
    """Uniform mixture of the members' post-processed output distributions.

    ``executor`` maps a CompiledCircuit to a post-processed distribution.
    """
    if not ensemble.members:
        raise ValueError("empty ensemble")
    total: dict = {}
    for member in ensemble.members:
        dist = executor(member)
        for key, p in dist.items():
            total[key] = total.get(key, 0.0) + p
    scale = 1.0 / len(ensemble.members)
    return {key: p * scale for key, p in sorted(total.items())}
