"""Exact algebra of n-qubit Pauli strings with phase tracking.

Phases are elements of Z4 (powers of i), never floats, so products and
conjugations stay exact group algebra. Text form is "XIZY" with qubit 0
leftmost and an optional phase prefix from {+, +i, -, -i}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import CircuitError, ParseError, ResourceCapError

LABELS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

# Dense kron products above this qubit count are refused.
MAX_DENSE_QUBITS = 12

_PHASE_VALUES = (1 + 0j, 1j, -1 + 0j, -1j)
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"+": 0, "+i": 1, "-": 2, "-i": 3, "": 0, "i": 1}

# (a, b) -> (k, c) with a·b = i^k · c for single-qubit labels.
_MUL_1Q = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("Y", "I"): (0, "Y"), ("Z", "I"): (0, "Z"),
    ("X", "X"): (0, "I"), ("Y", "Y"): (0, "I"), ("Z", "Z"): (0, "I"),
    ("X", "Y"): (1, "Z"), ("Y", "X"): (3, "Z"),
    ("Y", "Z"): (1, "X"), ("Z", "Y"): (3, "X"),
    ("Z", "X"): (1, "Y"), ("X", "Z"): (3, "Y"),
}

# Conjugation of a two-qubit Pauli (control, target) by CNOT:
# (a, b) -> (k, a', b') with  CNOT (a⊗b) CNOT = i^k (a'⊗b').  Signs are
# always ±1 (k in {0, 2}); the two -1 entries come from XZ = -iY factors.
_CNOT_CONJ = {
    ("I", "I"): (0, "I", "I"), ("I", "X"): (0, "I", "X"), ("I", "Y"): (0, "Z", "Y"), ("I", "Z"): (0, "Z", "Z"),
    ("X", "I"): (0, "X", "X"), ("X", "X"): (0, "X", "I"), ("X", "Y"): (0, "Y", "Z"), ("X", "Z"): (2, "Y", "Y"),
    ("Y", "I"): (0, "Y", "X"), ("Y", "X"): (0, "Y", "I"), ("Y", "Y"): (2, "X", "Z"), ("Y", "Z"): (0, "X", "Y"),
    ("Z", "I"): (0, "Z", "I"), ("Z", "X"): (0, "Z", "X"), ("Z", "Y"): (0, "I", "Y"), ("Z", "Z"): (0, "I", "Z"),
}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word, one label per qubit, no phase."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        for q, lab in enumerate(labels):
            if lab not in LABELS:
                raise ValueError(f"invalid Pauli label {lab!r} on qubit {q}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(("I",) * n)

    @classmethod
    def from_string(cls, text: str) -> "PauliString":
        return cls(tuple(text.strip()))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return sum(1 for lab in self.labels if lab != "I")

    def is_identity(self) -> bool:
        return self.weight == 0

    def __str__(self) -> str:
        return "".join(self.labels)


@dataclass(frozen=True)
class PhasedPauli:
    """A Pauli string together with a fourth-root-of-unity phase i^k."""

    phase_power: int
    pauli: PauliString

    def __post_init__(self):
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    @property
    def n(self) -> int:
        return self.pauli.n

    @property
    def phase(self) -> complex:
        return _PHASE_VALUES[self.phase_power]

    def dagger(self) -> "PhasedPauli":
        # Pauli strings are Hermitian, so only the phase conjugates.
        return PhasedPauli(-self.phase_power % 4, self.pauli)

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase_power] + str(self.pauli)


def multiply(a: PhasedPauli, b: PhasedPauli) -> PhasedPauli:
    """Product a·b, exact in phase; matches the 2^n x 2^n matrix product."""
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    power = a.phase_power + b.phase_power
    labels = []
    for la, lb in zip(a.pauli.labels, b.pauli.labels):
        k, lc = _MUL_1Q[(la, lb)]
        power += k
        labels.append(lc)
    return PhasedPauli(power, PauliString(tuple(labels)))


def to_matrix(p: PhasedPauli | PauliString) -> np.ndarray:
    """Dense 2^n x 2^n unitary of a (phased) Pauli string."""
    phased = p if isinstance(p, PhasedPauli) else PhasedPauli(0, p)
    if phased.n > MAX_DENSE_QUBITS:
        raise ResourceCapError(f"dense Pauli matrix capped at {MAX_DENSE_QUBITS} qubits, got {phased.n}")
    mat = reduce(np.kron, (PAULI_MATRICES[lab] for lab in phased.pauli.labels))
    return phased.phase * mat


def sample_uniform(n: int, rng: np.random.Generator) -> PauliString:
    """Uniform Pauli string; per-qubit labels are independent by construction."""
    if n < 1:
        raise ValueError("need at least one qubit")
    draws = rng.integers(0, 4, size=n)
    return PauliString(tuple(LABELS[i] for i in draws))


def commutes(a: PauliString, b: PauliString) -> bool:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    clashes = sum(
        1 for la, lb in zip(a.labels, b.labels) if la != "I" and lb != "I" and la != lb
    )
    return clashes % 2 == 0


def correction_twirl(hard, t: PauliString) -> PhasedPauli:
    """Conjugate t† through a cycle of CNOTs: returns G t† G†.

    ``hard`` is anything exposing ``pairs`` of disjoint (control, target)
    qubit indices, e.g. a circuit HardCycle. Always lands on a Pauli string
    with sign ±1 because the cycle is Clifford and t is Hermitian.
    """
    pairs = getattr(hard, "pairs", hard)
    labels = list(t.labels)
    power = 0
    seen: set[int] = set()
    for c, tgt in pairs:
        if c == tgt or not (0 <= c < t.n and 0 <= tgt < t.n):
            raise CircuitError(f"bad CNOT pair ({c},{tgt}) for {t.n} qubits")
        if c in seen or tgt in seen:
            raise CircuitError(f"overlapping CNOT pair ({c},{tgt})")
        seen.update((c, tgt))
        k, labels[c], labels[tgt] = _CNOT_CONJ[(labels[c], labels[tgt])]
        power += k
    return PhasedPauli(power, PauliString(tuple(labels)))


def parse_pauli(text: str) -> PhasedPauli:
    """Parse the textual form, e.g. "-iXZ" or "XIZY" (phase defaults to +)."""
    text = text.strip()
    prefix = ""
    while text and text[0] in "+-i":
        prefix += text[0]
        text = text[1:]
    if prefix not in _TEXT_PHASE:
        raise ParseError(f"invalid phase prefix {prefix!r}")
    if not text:
        raise ParseError("empty Pauli string")
    try:
        pauli = PauliString.from_string(text)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return PhasedPauli(_TEXT_PHASE[prefix], pauli)
