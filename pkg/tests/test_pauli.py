import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twirlc.errors import CircuitError, ParseError
from twirlc.pauli import (
    LABELS,
    PauliString,
    PhasedPauli,
    commutes,
    correction_twirl,
    multiply,
    parse_pauli,
    sample_uniform,
    to_matrix,
)

CNOT01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CNOT10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)


def phased(text):
    return parse_pauli(text)


def test_multiply_self_inverse():
    assert multiply(phased("X"), phased("X")) == phased("I")
    assert multiply(phased("XZ"), phased("XZ")) == phased("II")


def test_multiply_xy_gives_iz():
    # oracle: X @ Y == i Z for the 2x2 matrices
    prod = to_matrix(phased("X")) @ to_matrix(phased("Y"))
    assert np.allclose(prod, 1j * to_matrix(phased("Z")))
    assert multiply(phased("X"), phased("Y")) == phased("+iZ")


def test_multiply_dimension_mismatch():
    with pytest.raises(ValueError):
        multiply(phased("X"), phased("XX"))


@pytest.mark.parametrize("n", [1, 2])
def test_multiply_matches_dense_product_exhaustive(n):
    strings = [PauliString(p) for p in itertools.product(LABELS, repeat=n)]
    for a in strings:
        for b in strings:
            for ka, kb in ((0, 0), (1, 3), (2, 1)):
                pa, pb = PhasedPauli(ka, a), PhasedPauli(kb, b)
                got = multiply(pa, pb)
                assert np.allclose(to_matrix(got), to_matrix(pa) @ to_matrix(pb), atol=1e-14)


def test_multiply_matches_dense_product_random_n3(rng):
    for _ in range(50):
        pa = PhasedPauli(int(rng.integers(4)), sample_uniform(3, rng))
        pb = PhasedPauli(int(rng.integers(4)), sample_uniform(3, rng))
        got = multiply(pa, pb)
        assert np.allclose(to_matrix(got), to_matrix(pa) @ to_matrix(pb), atol=1e-14)


def test_to_matrix_examples():
    assert np.array_equal(to_matrix(phased("I")), np.eye(2))
    assert np.array_equal(to_matrix(phased("Z")), np.diag([1.0, -1.0]).astype(complex))
    xi = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    assert np.allclose(to_matrix(phased("-iXI")), -1j * xi)


def test_to_matrix_structure(rng):
    for _ in range(20):
        p = PhasedPauli(int(rng.integers(4)), sample_uniform(2, rng))
        m = to_matrix(p)
        assert np.allclose(m @ m.conj().T, np.eye(4), atol=1e-14)  # unitary
        assert np.allclose(m @ m, p.phase**2 * np.eye(4), atol=1e-14)
        if p.phase_power in (0, 2):
            assert np.allclose(m, m.conj().T, atol=1e-14)  # Hermitian


def test_sample_uniform_label_frequencies():
    rng = np.random.default_rng(7)
    draws = 40_000
    counts = {lab: 0 for lab in LABELS}
    for _ in range(draws):
        counts[sample_uniform(1, rng).labels[0]] += 1
    sigma = (draws * 0.25 * 0.75) ** 0.5
    for lab in LABELS:
        assert abs(counts[lab] - draws / 4) < 3 * sigma


def test_sample_uniform_marginal_independence():
    rng = np.random.default_rng(8)
    draws = 40_000
    counts = {lab: 0 for lab in LABELS}
    for _ in range(draws):
        counts[sample_uniform(2, rng).labels[0]] += 1
    sigma = (draws * 0.25 * 0.75) ** 0.5
    for lab in LABELS:
        assert abs(counts[lab] - draws / 4) < 3 * sigma


def test_sample_uniform_seed_determinism():
    a = [str(sample_uniform(4, np.random.default_rng(123))) for _ in range(5)]
    b = [str(sample_uniform(4, np.random.default_rng(123))) for _ in range(5)]
    assert a == b


def test_correction_twirl_identity_cycle():
    t = PauliString.from_string("XZ")
    out = correction_twirl([], t)
    assert out == PhasedPauli(0, t)


def test_correction_twirl_cnot_examples():
    assert correction_twirl([(0, 1)], PauliString.from_string("XI")) == phased("XX")
    assert correction_twirl([(0, 1)], PauliString.from_string("IZ")) == phased("ZZ")


def _dense_conjugation(gate, t):
    m = gate @ to_matrix(PhasedPauli(0, t)).conj().T @ gate.conj().T
    return m


@pytest.mark.parametrize(
    "pairs,gate",
    [((), np.eye(4, dtype=complex)), (((0, 1),), CNOT01), (((1, 0),), CNOT10)],
)
def test_correction_twirl_exhaustive_against_dense(pairs, gate):
    for labels in itertools.product(LABELS, repeat=2):
        t = PauliString(labels)
        got = correction_twirl(pairs, t)
        assert np.allclose(to_matrix(got), _dense_conjugation(gate, t), atol=1e-14)


def test_correction_twirl_double_application_is_identity(rng):
    for _ in range(20):
        t = sample_uniform(2, rng)
        once = correction_twirl([(0, 1)], t)
        twice = correction_twirl([(0, 1)], once.pauli)
        assert PhasedPauli((once.phase_power + twice.phase_power) % 4, twice.pauli) == PhasedPauli(0, t)


def test_correction_twirl_bad_pairs():
    with pytest.raises(CircuitError):
        correction_twirl([(0, 0)], PauliString.from_string("XI"))
    with pytest.raises(CircuitError):
        correction_twirl([(0, 1), (1, 0)], PauliString.from_string("XI"))
    with pytest.raises(CircuitError):
        correction_twirl([(0, 5)], PauliString.from_string("XI"))


def test_text_roundtrip():
    for text in ("+XIZY", "-iZZ", "+iY", "-X"):
        assert str(parse_pauli(text)) == text
    assert parse_pauli("XI") == phased("+XI")
    with pytest.raises(ParseError):
        parse_pauli("XQ")
    with pytest.raises(ParseError):
        parse_pauli("")


def test_commutes_basic():
    assert commutes(PauliString.from_string("XX"), PauliString.from_string("ZZ"))
    assert not commutes(PauliString.from_string("XI"), PauliString.from_string("ZI"))


_pauli_strat = st.tuples(
    st.integers(min_value=0, max_value=3),
    st.lists(st.sampled_from("IXYZ"), min_size=2, max_size=2),
).map(lambda t: PhasedPauli(t[0], PauliString(tuple(t[1]))))


@settings(max_examples=60, deadline=None)
@given(_pauli_strat, _pauli_strat, _pauli_strat)
def test_multiply_associative(a, b, c):
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@settings(max_examples=60, deadline=None)
@given(_pauli_strat, _pauli_strat)
def test_multiply_phase_consistent_with_matrices(a, b):
    assert np.allclose(to_matrix(multiply(a, b)), to_matrix(a) @ to_matrix(b), atol=1e-14)
