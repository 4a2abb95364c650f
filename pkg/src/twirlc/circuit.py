"""Cycle-structured circuit IR: alternating easy/hard cycles plus measurement.

A circuit is the canonical list [E0, H1, E1, ..., HM, EM]: it begins and
ends with an easy cycle and alternates strictly. Easy cycles carry one 2x2
unitary per qubit; hard cycles are layers of CNOTs on disjoint pairs.
Qubit 0 is leftmost in all string formats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import CircuitError, ParseError, ResourceCapError

UNITARY_TOL = 1e-12
MAX_UNITARY_QUBITS = 12

I2 = np.eye(2, dtype=complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)

NAMED_GATES = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H}


def su2_euler(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """SU(2) element Rz(alpha) Ry(beta) Rz(gamma)."""

    def rz(t):
        return np.array([[np.exp(-0.5j * t), 0.0], [0.0, np.exp(0.5j * t)]])

    def ry(t):
        return np.array(
            [[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]],
            dtype=complex,
        )

    return rz(alpha) @ ry(beta) @ rz(gamma)


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(2) element via the standard (psi, chi, phi) chart."""
    psi, chi = rng.uniform(-math.pi, math.pi, size=2)
    phi = math.asin(math.sqrt(rng.uniform()))
    return np.array(
        [
            [np.exp(1j * psi) * math.cos(phi), np.exp(1j * chi) * math.sin(phi)],
            [-np.exp(-1j * chi) * math.sin(phi), np.exp(-1j * psi) * math.cos(phi)],
        ]
    )


def _is_unitary(g: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return g.shape == (2, 2) and np.max(np.abs(g.conj().T @ g - I2)) <= tol


@dataclass(frozen=True, eq=False)
class EasyCycle:
    """One round of single-qubit gates, one 2x2 unitary per qubit."""

    gates: tuple[np.ndarray, ...]

    def __post_init__(self):
        gates = tuple(np.asarray(g, dtype=complex) for g in self.gates)
        object.__setattr__(self, "gates", gates)

    @classmethod
    def identity(cls, n: int) -> "EasyCycle":
        return cls((I2,) * n)

    @classmethod
    def all_x(cls, n: int) -> "EasyCycle":
        return cls((X,) * n)

    @classmethod
    def from_names(cls, names) -> "EasyCycle":
        try:
            return cls(tuple(NAMED_GATES[name] for name in names))
        except KeyError as exc:
            raise CircuitError(f"unknown gate name {exc.args[0]!r}") from exc

    @property
    def n(self) -> int:
        return len(self.gates)

    def matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n unitary of the cycle (kron over qubits)."""
        if self.n > MAX_UNITARY_QUBITS:
            raise ResourceCapError(f"dense cycle matrix capped at {MAX_UNITARY_QUBITS} qubits")
        return reduce(np.kron, self.gates)

    def __eq__(self, other):
        return (
            isinstance(other, EasyCycle)
            and self.n == other.n
            and all(np.array_equal(a, b) for a, b in zip(self.gates, other.gates))
        )


@dataclass(frozen=True, eq=False)
class HardCycle:
    """One round of CNOTs on pairwise-disjoint (control, target) pairs."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(c), int(t)) for c, t in self.pairs))

    @property
    def cnot_count(self) -> int:
        return len(self.pairs)

    def matrix(self) -> np.ndarray:
        """Dense unitary built from projector embeddings, one CNOT at a time."""
        if self.n > MAX_UNITARY_QUBITS:
            raise ResourceCapError(f"dense cycle matrix capped at {MAX_UNITARY_QUBITS} qubits")
        p0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        p1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        u = np.eye(2 ** self.n, dtype=complex)
        for c, t in self.pairs:
            hold = [p0 if q == c else I2 for q in range(self.n)]
            flip = [p1 if q == c else (X if q == t else I2) for q in range(self.n)]
            u = (reduce(np.kron, hold) + reduce(np.kron, flip)) @ u
        return u

    def __eq__(self, other):
        return isinstance(other, HardCycle) and self.n == other.n and self.pairs == other.pairs


@dataclass(frozen=True)
class MeasurementSpec:
    """Computational-basis readout with a shot budget (None = exact mode)."""

    shots: int = 1024
    basis: str = "computational"

    def __post_init__(self):
        if self.shots < 1:
            raise CircuitError("shot count must be >= 1")
        if self.basis != "computational":
            raise CircuitError(f"unsupported measurement basis {self.basis!r}")


@dataclass(frozen=True, eq=False)
class Circuit:
    n: int
    cycles: tuple
    measured_qubits: tuple[int, ...] = ()
    measurement: MeasurementSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "cycles", tuple(self.cycles))
        measured = tuple(self.measured_qubits) if self.measured_qubits else tuple(range(self.n))
        object.__setattr__(self, "measured_qubits", measured)

    @property
    def depth(self) -> int:
        """Total cycle count (easy and hard rounds)."""
        return len(self.cycles)

    @property
    def hard_cycle_count(self) -> int:
        return sum(1 for c in self.cycles if isinstance(c, HardCycle))

    def easy_cycles(self) -> list[EasyCycle]:
        return [c for c in self.cycles if isinstance(c, EasyCycle)]

    def hard_cycles(self) -> list[HardCycle]:
        return [c for c in self.cycles if isinstance(c, HardCycle)]

    def __eq__(self, other):
        return (
            isinstance(other, Circuit)
            and self.n == other.n
            and self.measured_qubits == other.measured_qubits
            and self.measurement == other.measurement
            and len(self.cycles) == len(other.cycles)
            and all(a == b for a, b in zip(self.cycles, other.cycles))
        )


def validate(c: Circuit) -> None:
    """Check all structural invariants; raises CircuitError naming the first
    violating cycle index."""
    if c.n < 1:
        raise CircuitError("circuit needs at least one qubit")
    if not c.cycles:
        raise CircuitError("circuit has no cycles")
    for i, cyc in enumerate(c.cycles):
        expect_easy = i % 2 == 0
        if expect_easy and not isinstance(cyc, EasyCycle):
            raise CircuitError(f"non-alternating structure: cycle {i} must be easy")
        if not expect_easy and not isinstance(cyc, HardCycle):
            raise CircuitError(f"non-alternating structure: cycle {i} must be hard")
        if isinstance(cyc, EasyCycle):
            if cyc.n != c.n:
                raise CircuitError(f"cycle {i}: covers {cyc.n} qubits, circuit has {c.n}")
            for q, g in enumerate(cyc.gates):
                if not _is_unitary(g):
                    raise CircuitError(f"cycle {i}: non-unitary gate on qubit {q}")
        else:
            if cyc.n != c.n:
                raise CircuitError(f"cycle {i}: covers {cyc.n} qubits, circuit has {c.n}")
            seen: set[int] = set()
            for cq, tq in cyc.pairs:
                if not (0 <= cq < c.n and 0 <= tq < c.n) or cq == tq:
                    raise CircuitError(f"cycle {i}: bad CNOT pair ({cq},{tq})")
                if cq in seen or tq in seen:
                    raise CircuitError(f"cycle {i}: overlapping qubits in CNOT pair ({cq},{tq})")
                seen.update((cq, tq))
    if len(c.cycles) % 2 == 0:
        raise CircuitError("circuit must end with an easy cycle")
    for q in c.measured_qubits:
        if not 0 <= q < c.n:
            raise CircuitError(f"measured qubit {q} out of range")
    if len(set(c.measured_qubits)) != len(c.measured_qubits):
        raise CircuitError("duplicate measured qubit")


def ideal_unitary(c: Circuit) -> np.ndarray:
    """Product of cycle unitaries in time order (first cycle acts first)."""
    if c.n > MAX_UNITARY_QUBITS:
        raise ResourceCapError(f"ideal_unitary capped at {MAX_UNITARY_QUBITS} qubits, got {c.n}")
    validate(c)
    u = np.eye(2**c.n, dtype=complex)
    for cyc in c.cycles:
        u = cyc.matrix() @ u
    return u


# --- generators -------------------------------------------------------------

def _random_perfect_matching(n: int, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    order = list(rng.permutation(n))
    return tuple((order[2 * i], order[2 * i + 1]) for i in range(n // 2))


def _layer_counts(n: int) -> list[int]:
    # a(k) = number of CNOT layers on k qubits, counting orientation and
    # allowing unpaired qubits: a(k) = a(k-1) + 2(k-1) a(k-2).
    counts = [1, 1]
    for k in range(2, n + 1):
        counts.append(counts[k - 1] + 2 * (k - 1) * counts[k - 2])
    return counts


def _random_cnot_layer(n: int, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    """Uniform over all layers of disjoint ordered pairs, empty layer included."""
    counts = _layer_counts(n)
    free = list(range(n))
    pairs = []
    while free:
        k = len(free)
        q = free.pop(0)
        if k == 1 or rng.random() < counts[k - 1] / counts[k]:
            continue
        j = int(rng.integers(0, len(free)))
        partner = free.pop(j)
        pairs.append((q, partner) if rng.random() < 0.5 else (partner, q))
    return tuple(sorted(pairs))


def _sample_hard(n: int, rng: np.random.Generator, mode: str) -> HardCycle:
    if mode == "perfect":
        return HardCycle(n, _random_perfect_matching(n, rng))
    if mode == "all":
        return HardCycle(n, _random_cnot_layer(n, rng))
    raise CircuitError(f"unknown hard layer mode {mode!r}")


def gen_structured(kind: str, n: int, m: int, rng: np.random.Generator,
                   hard_layer_mode: str = "all") -> Circuit:
    """Structured circuits: all-X easy rounds; kind "A" repeats one random
    perfect CNOT matching, kind "B" resamples the hard round each cycle
    (distribution set by hard_layer_mode, uniform over all layers by default).
    """
    if kind not in ("A", "B"):
        raise CircuitError(f"structured circuit kind must be A or B, got {kind!r}")
    if n % 2:
        raise CircuitError("structured circuits need an even qubit count")
    cycles: list = [EasyCycle.all_x(n)]
    fixed = HardCycle(n, _random_perfect_matching(n, rng))
    for _ in range(m):
        cycles.append(fixed if kind == "A" else _sample_hard(n, rng, hard_layer_mode))
        cycles.append(EasyCycle.all_x(n))
    return Circuit(n, tuple(cycles))


def gen_uniform_random(n: int, m: int, rng: np.random.Generator,
                       hard_layer_mode: str = "all") -> Circuit:
    """Uniformly random circuit: Haar SU(2) easy gates, random CNOT layers."""
    if n < 2:
        raise CircuitError("uniform random circuits need n >= 2")
    cycles: list = [EasyCycle(tuple(haar_su2(rng) for _ in range(n)))]
    for _ in range(m):
        cycles.append(_sample_hard(n, rng, hard_layer_mode))
        cycles.append(EasyCycle(tuple(haar_su2(rng) for _ in range(n))))
    return Circuit(n, tuple(cycles))


# --- text format ------------------------------------------------------------

def _format_gate(g: np.ndarray) -> str:
    entries = ";".join(repr(complex(v)) for v in g.reshape(-1))
    return f"[{entries}]"


def _parse_gate(token: str, line_no: int, col: int) -> np.ndarray:
    if token in NAMED_GATES:
        return NAMED_GATES[token]
    if token.startswith("[") and token.endswith("]"):
        parts = token[1:-1].split(";")
        if len(parts) != 4:
            raise ParseError(f"matrix needs 4 entries, got {len(parts)}", line_no, col)
        try:
            vals = [complex(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"bad matrix entry in {token!r}: {exc}", line_no, col) from exc
        return np.array(vals, dtype=complex).reshape(2, 2)
    raise ParseError(f"unknown gate name {token!r}", line_no, col)


def serialize(c: Circuit) -> str:
    """Circuit file text; parse(serialize(c)) == c with exact gate entries."""
    validate(c)
    lines = [f"n: {c.n}", "measure: " + " ".join(str(q) for q in c.measured_qubits)]
    if c.measurement is not None:
        lines.append(f"shots: {c.measurement.shots}")
    for cyc in c.cycles:
        if isinstance(cyc, EasyCycle):
            toks = [f"q{q}: {_format_gate(g)}" for q, g in enumerate(cyc.gates)]
            lines.append("easy " + " ".join(toks))
        else:
            lines.append("hard: " + " ".join(f"cnot({a},{b})" for a, b in cyc.pairs))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Circuit:
    """Parse a circuit file; raises ParseError with line/column context."""
    n = None
    measured: tuple[int, ...] | None = None
    shots = None
    cycles: list = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head, _, rest = line.partition(":") if not line.startswith("easy") else ("easy", ":", line[4:])
        head = head.strip()
        if head == "n":
            n = int(rest)
        elif head == "measure":
            measured = tuple(int(t) for t in rest.split())
        elif head == "shots":
            shots = int(rest)
        elif head == "hard":
            if n is None:
                raise ParseError("hard cycle before n header", line_no)
            pairs = []
            for tok in rest.split():
                if not (tok.startswith("cnot(") and tok.endswith(")")):
                    raise ParseError(f"unknown hard gate token {tok!r}", line_no, raw.find(tok) + 1)
                a, _, b = tok[5:-1].partition(",")
                try:
                    pairs.append((int(a), int(b)))
                except ValueError as exc:
                    raise ParseError(f"bad cnot pair {tok!r}", line_no, raw.find(tok) + 1) from exc
            cycles.append(HardCycle(n, tuple(pairs)))
        elif head == "easy":
            if n is None:
                raise ParseError("easy cycle before n header", line_no)
            gates = [I2] * n
            toks = rest.split()
            if len(toks) % 2:
                raise ParseError("easy record needs q<i>: <gate> pairs", line_no)
            for qtok, gtok in zip(toks[::2], toks[1::2]):
                if not (qtok.startswith("q") and qtok.endswith(":")):
                    raise ParseError(f"expected qubit tag, got {qtok!r}", line_no, raw.find(qtok) + 1)
                try:
                    q = int(qtok[1:-1])
                except ValueError as exc:
                    raise ParseError(f"bad qubit tag {qtok!r}", line_no, raw.find(qtok) + 1) from exc
                if not 0 <= q < n:
                    raise ParseError(f"qubit {q} out of range", line_no, raw.find(qtok) + 1)
                gates[q] = _parse_gate(gtok, line_no, raw.find(gtok) + 1)
            cycles.append(EasyCycle(tuple(gates)))
        else:
            raise ParseError(f"unknown record {head!r}", line_no, 1)
    if n is None:
        raise ParseError("missing n header")
    if not cycles:
        raise ParseError("no cycles")
    meas = None if shots is None else MeasurementSpec(shots=shots)
    circ = Circuit(n, tuple(cycles), measured or tuple(range(n)), meas)
    validate(circ)
    return circ
