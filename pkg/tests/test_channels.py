import math

import numpy as np
import pytest

from conftest import dense_twirl_oracle, random_cptp, random_density, random_kraus, random_unitary
from twirlc.channels import (
    JointChannel,
    SuperOp,
    apply_to_density,
    block_twirl,
    choi_matrix,
    compose,
    fidelity_metrics,
    is_cp,
    is_pauli_channel,
    joint_from_unitary,
    kraus_from_json,
    kraus_to_json,
    pauli_channel_from_superop,
    ptm_from_kraus,
    ptm_from_unitary,
    reduce_to_system,
    superop_from_csv,
    superop_to_csv,
    twirl_average,
)
from twirlc.circuit import haar_su2

X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Z2 = np.diag([1.0, -1.0]).astype(complex)


def x_rotation(eps):
    return math.cos(eps / 2) * np.eye(2) - 1j * math.sin(eps / 2) * X2


def test_ptm_identity():
    assert np.allclose(ptm_from_unitary(np.eye(2)).matrix, np.eye(4), atol=1e-14)


def test_ptm_of_x_gate():
    # conjugation oracle: X P X for each basis Pauli gives diag(1,1,-1,-1)
    assert np.allclose(ptm_from_unitary(X2).matrix, np.diag([1.0, 1.0, -1.0, -1.0]), atol=1e-14)


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.5])
def test_overrotation_deviation_closed_form(eps):
    # the published deviation-from-identity matrix for U = exp(-i eps X / 2)
    lam = ptm_from_unitary(x_rotation(eps)).matrix
    deviation = np.zeros((4, 4))
    deviation[2, 2] = deviation[3, 3] = 1.0 - math.cos(eps)
    deviation[2, 3] = math.sin(eps)
    deviation[3, 2] = -math.sin(eps)
    assert np.max(np.abs((np.eye(4) - lam) - deviation)) < 1e-12


def test_ptm_rejects_non_unitary():
    with pytest.raises(ValueError):
        ptm_from_unitary(np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_ptm_of_unitary_is_orthogonal(rng):
    for n in (1, 2):
        u = random_unitary(2**n, rng)
        m = ptm_from_unitary(u).matrix
        assert np.max(np.abs(m @ m.T - np.eye(4**n))) < 1e-10
        assert np.allclose(m[0], np.eye(4**n)[0], atol=1e-12)
        assert np.allclose(m[:, 0], np.eye(4**n)[:, 0], atol=1e-12)


def test_kraus_identity():
    assert np.allclose(ptm_from_kraus([np.eye(2)]).matrix, np.eye(4), atol=1e-14)


def test_kraus_amplitude_damping_full():
    k0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    k1 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    e = ptm_from_kraus([k0, k1])
    # only the I and Z output rows are populated
    populated = np.nonzero(np.max(np.abs(e.matrix), axis=1) > 1e-12)[0]
    assert set(populated) == {0, 3}
    rng = np.random.default_rng(5)
    zero = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    for _ in range(10):
        rho = random_density(2, rng)
        direct = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T  # Kraus-sum oracle
        assert np.max(np.abs(direct - zero)) < 1e-12
        assert np.max(np.abs(apply_to_density(e, rho) - zero)) < 1e-12


def test_kraus_dephasing_half():
    ops = [math.sqrt(0.5) * np.eye(2), math.sqrt(0.5) * Z2]
    assert np.allclose(ptm_from_kraus(ops).matrix, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-14)


def test_kraus_rejects_non_tp():
    with pytest.raises(ValueError):
        ptm_from_kraus([0.5 * np.eye(2)])


def test_ptm_kraus_consistency(rng):
    ops = random_kraus(2, rng)
    via_kraus = ptm_from_kraus(ops)
    rho = random_density(4, rng)
    direct = sum(k @ rho @ k.conj().T for k in ops)
    assert np.max(np.abs(apply_to_density(via_kraus, rho) - direct)) < 1e-12


def test_twirl_fixed_point_on_pauli_channels():
    dep = SuperOp(1, np.diag([1.0, 0.6, 0.6, 0.6]))  # depolarizing
    assert np.array_equal(twirl_average(dep).matrix, dep.matrix)


def test_twirl_overrotation_explicit_average():
    eps = 0.37
    e = ptm_from_unitary(x_rotation(eps))
    got = twirl_average(e)
    # explicit 4-term average oracle
    assert np.max(np.abs(got.matrix - dense_twirl_oracle(e))) < 1e-12
    assert np.allclose(np.diag(got.matrix), [1.0, 1.0, math.cos(eps), math.cos(eps)], atol=1e-14)


def test_theorem1_twirl_diagonalizes_and_preserves_diagonal(rng):
    for n in (1, 2, 3):
        for _ in range(10):
            e = random_cptp(n, rng)
            t = twirl_average(e)
            off = t.matrix - np.diag(np.diag(t.matrix))
            assert np.linalg.norm(off) < 1e-10
            assert np.array_equal(np.diag(t.matrix), np.diag(e.matrix))  # exact
            assert np.max(np.abs(t.matrix - dense_twirl_oracle(e))) < 1e-12


def test_twirl_sum_equals_projection_path(rng):
    # the n<=3 sign-weight sum must equal plain diagonal projection bitwise
    e = random_cptp(2, rng)
    assert np.array_equal(twirl_average(e).matrix, np.diag(np.diag(e.matrix)))


def test_theorem2_average_then_twirl_commutes(rng):
    family = [random_cptp(2, rng) for _ in range(4)]
    weights = rng.dirichlet(np.ones(4))
    mixed = SuperOp(2, sum(w * e.matrix for w, e in zip(weights, family)))
    twirl_then_mix = sum(w * twirl_average(e).matrix for w, e in zip(weights, family))
    assert np.max(np.abs(twirl_average(mixed).matrix - twirl_then_mix)) < 1e-12


def test_is_pauli_channel_identity():
    ok, off = is_pauli_channel(SuperOp(1, np.eye(4)))
    assert ok and off == 0.0


def test_is_pauli_channel_overrotation_norm():
    eps = 0.1
    ok, off = is_pauli_channel(ptm_from_unitary(x_rotation(eps)))
    assert not ok
    assert abs(off - math.sqrt(2.0) * math.sin(eps)) < 1e-12


def test_twirled_channel_is_pauli(rng):
    e = random_cptp(2, rng)
    ok, _ = is_pauli_channel(twirl_average(e), tol=1e-10)
    assert ok


def test_pauli_channel_probs_roundtrip(rng):
    probs = rng.dirichlet(np.ones(16))
    from twirlc.channels import PauliChannel

    chan = PauliChannel(2, probs)
    back = pauli_channel_from_superop(chan.to_superop())
    assert np.max(np.abs(back.probs - probs)) < 1e-12


def test_block_twirl_reduces_to_twirl_average_without_environment(rng):
    u = haar_su2(rng)
    j = joint_from_unitary(u, 1, 1)
    bt = block_twirl(j)
    assert np.max(np.abs(bt.blocks[0, 0].real - twirl_average(ptm_from_unitary(u)).matrix)) < 1e-12
    assert np.max(np.abs(bt.blocks[0, 0].imag)) < 1e-12


def test_block_twirl_random_joint_unitary_blocks_diagonal(rng):
    u = random_unitary(4, rng)  # 1 system qubit x 1 environment qubit
    bt = block_twirl(joint_from_unitary(u, 1, 2))
    off = bt.blocks - bt.blocks * np.eye(4)[None, None]
    assert np.max(np.abs(off)) < 1e-12


def test_block_twirl_xx_coupling_weights_are_env_independent():
    # For exp(-i a XX) the twirled Pauli weights come out identical for every
    # environment state: the env-dependent terms are all PTM-off-diagonal.
    alpha = 0.3
    xx = np.kron(X2, X2)
    u = math.cos(alpha) * np.eye(4) - 1j * math.sin(alpha) * xx
    bt = block_twirl(joint_from_unitary(u, 1, 2))
    p0 = pauli_channel_from_superop(reduce_to_system(bt, np.diag([1.0, 0.0])))
    pp = pauli_channel_from_superop(reduce_to_system(bt, np.full((2, 2), 0.5)))
    expected = [math.cos(alpha) ** 2, math.sin(alpha) ** 2, 0.0, 0.0]
    assert np.allclose(p0.probs, expected, atol=1e-12)
    assert np.allclose(pp.probs, expected, atol=1e-12)


def test_block_twirl_controlled_rotation_weights_depend_on_env_state():
    # local-Pauli-channel illustration: weights c_P vary with the reduced
    # environment state for a controlled rotation env -> system
    alpha = 0.3
    rot = x_rotation(2 * alpha)
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = np.eye(2)
    u[2:, 2:] = rot
    bt = block_twirl(joint_from_unitary(u, 1, 2))
    c0 = pauli_channel_from_superop(reduce_to_system(bt, np.diag([1.0, 0.0])))
    cp = pauli_channel_from_superop(reduce_to_system(bt, np.full((2, 2), 0.5)))
    assert np.allclose(c0.probs, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
    assert abs(cp.probs[1] - 0.5 * math.sin(alpha) ** 2) < 1e-12
    assert abs(cp.probs[1] - c0.probs[1]) > 0.01


def test_reduce_to_system_identity_joint(rng):
    j = joint_from_unitary(np.eye(8), 1, 4)
    for _ in range(3):
        e = reduce_to_system(j, random_density(4, rng))
        assert np.max(np.abs(e.matrix - np.eye(4))) < 1e-12


def test_reduce_to_system_of_twirled_is_pauli(rng):
    u = random_unitary(8, rng)  # 1 system qubit x dim-4 environment
    bt = block_twirl(joint_from_unitary(u, 1, 4))
    for _ in range(3):
        e = reduce_to_system(bt, random_density(4, rng))
        chan = pauli_channel_from_superop(e, tol=1e-10)
        assert chan.probs.min() > -1e-10
        assert abs(chan.probs.sum() - 1.0) < 1e-9


def test_reduce_to_system_rejects_bad_density():
    j = joint_from_unitary(np.eye(4), 1, 2)
    with pytest.raises(ValueError):
        reduce_to_system(j, np.diag([1.0, 1.0]))  # trace 2
    with pytest.raises(ValueError):
        reduce_to_system(j, np.array([[1.5, 0.0], [0.0, -0.5]]))


def test_fidelity_metrics_identity():
    assert fidelity_metrics(SuperOp(1, np.eye(4))) == (1.0, 1.0)


def test_fidelity_metrics_overrotation():
    eps = 0.2
    e = ptm_from_unitary(x_rotation(eps))
    avg, process = fidelity_metrics(e)
    assert abs(process - (2.0 + 2.0 * math.cos(eps)) / 4.0) < 1e-12
    t_avg, t_process = fidelity_metrics(twirl_average(e))
    assert t_process == process


def test_fidelity_metrics_invariant_under_twirl(rng):
    for _ in range(50):
        e = random_cptp(1, rng)
        assert np.allclose(fidelity_metrics(e), fidelity_metrics(twirl_average(e)), atol=1e-14)


def test_composition_homomorphism(rng):
    for n in (1, 2, 3):
        u = random_unitary(2**n, rng)
        v = random_unitary(2**n, rng)
        lhs = ptm_from_unitary(u @ v).matrix
        rhs = compose(ptm_from_unitary(u), ptm_from_unitary(v)).matrix
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_choi_of_identity_channel():
    c = choi_matrix(SuperOp(1, np.eye(4)))
    eigs = np.linalg.eigvalsh(c)
    assert abs(eigs[-1] - 2.0) < 1e-12
    assert np.max(np.abs(eigs[:-1])) < 1e-12


def test_cp_detection(rng):
    assert is_cp(random_cptp(1, rng))
    transpose_map = SuperOp(1, np.diag([1.0, 1.0, -1.0, 1.0]))
    assert not is_cp(transpose_map)


def test_trace_preservation_flag(rng):
    assert random_cptp(2, rng).is_trace_preserving()


def test_superop_csv_roundtrip(tmp_path, rng):
    e = random_cptp(1, rng)
    path = tmp_path / "chan.csv"
    superop_to_csv(e, path)
    back = superop_from_csv(path)
    assert back.n == 1
    assert np.array_equal(back.matrix, e.matrix)


def test_kraus_json_roundtrip(tmp_path, rng):
    ops = random_kraus(1, rng)
    path = tmp_path / "kraus.json"
    kraus_to_json(ops, path)
    back = kraus_from_json(path)
    assert all(np.max(np.abs(a - b)) < 1e-15 for a, b in zip(ops, back))
