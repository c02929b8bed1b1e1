import numpy as np
import pytest

from pointerlab.linalg import (
    eigh,
    herm_to_vec,
    is_effect,
    is_projector,
    partial_trace,
    proj_psd,
    require_hermitian,
    tensor,
    unitary_from_hamiltonian,
    validate_density,
    vec_to_herm,
)
from pointerlab.sampling import random_density, random_hermitian, rng

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)


def test_eigh_identity():
    w, v = eigh(I2)
    assert np.allclose(w, [1.0, 1.0])
    assert np.allclose(v.conj().T @ v, I2)


def test_eigh_pauli_x_spectrum():
    w, _ = eigh(SX)
    assert np.allclose(w, [-1.0, 1.0])


def test_eigh_reconstruction_seeded():
    gen = rng(101)
    h = random_hermitian(gen, 5)
    w, v = eigh(h)
    assert np.all(np.diff(w) >= 0)
    recon = (v * w) @ v.conj().T
    assert np.linalg.norm(recon - h) <= 1e-10 * max(1.0, np.linalg.norm(h))
    assert np.linalg.norm(v.conj().T @ v - np.eye(5)) <= 1e-10


def test_eigh_phase_convention_deterministic():
    gen = rng(7)
    h = random_hermitian(gen, 4)
    _, v1 = eigh(h)
    _, v2 = eigh(h.copy())
    assert np.allclose(v1, v2)
    for col in v1.T:
        anchor = col[np.argmax(np.abs(col))]
        assert abs(anchor.imag) < 1e-12 and anchor.real >= 0


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_tensor_identities():
    assert np.allclose(tensor(I2, I2), np.eye(4))
    assert np.allclose(tensor(SZ, I2), np.diag([1, 1, -1, -1]))


def test_tensor_block_structure():
    m = tensor(P0, SX)
    assert np.allclose(m[:2, :2], SX)
    assert np.allclose(m[2:, 2:], 0)


def test_partial_trace_product_state():
    gen = rng(3)
    rho_a, rho_b = random_density(gen, 2), random_density(gen, 3)
    joint = tensor(rho_a, rho_b)
    assert np.allclose(partial_trace(joint, [2, 3], keep=0), rho_a, atol=1e-12)
    assert np.allclose(partial_trace(joint, [2, 3], keep=1), rho_b, atol=1e-12)


def test_partial_trace_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    assert np.allclose(partial_trace(rho, [2, 2], keep=0), I2 / 2, atol=1e-12)


def test_partial_trace_multi_factor_loop_oracle():
    # keep {0, 2} of a 3-qubit state, checked against an explicit index loop.
    gen = rng(17)
    rho = random_density(gen, 8)
    direct = partial_trace(rho, [2, 2, 2], keep=[0, 2])

    oracle = np.zeros((4, 4), dtype=complex)
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    oracle[2 * i + j, 2 * k + l] = sum(t[i, m, j, k, m, l] for m in range(2))
    assert np.allclose(direct, oracle, atol=1e-12)
    assert abs(np.trace(direct) - np.trace(rho)) <= 1e-12


def test_partial_trace_linearity():
    gen = rng(29)
    m1, m2 = random_hermitian(gen, 4), random_hermitian(gen, 4)
    a, b = 0.3, -1.7
    lhs = partial_trace(a * m1 + b * m2, [2, 2], keep=0)
    rhs = a * partial_trace(m1, [2, 2], keep=0) + b * partial_trace(m2, [2, 2], keep=0)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_partial_trace_tensor_adjointness():
    # Tr((A ⊗ 1)·M) = Tr(A · Tr_2 M)
    gen = rng(31)
    for _ in range(100):
        a = random_hermitian(gen, 2)
        m = random_hermitian(gen, 6)
        lhs = np.trace(tensor(a, np.eye(3)) @ m)
        rhs = np.trace(a @ partial_trace(m, [2, 3], keep=0))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_partial_trace_errors():
    with pytest.raises(ValueError, match="does not match"):
        partial_trace(np.eye(3), [2, 2], keep=0)
    with pytest.raises(ValueError, match="out of range"):
        partial_trace(np.eye(4), [2, 2], keep=5)
    with pytest.raises(ValueError, match="at least one"):
        partial_trace(np.eye(4), [2, 2], keep=[])


def test_unitary_at_zero_time():
    gen = rng(5)
    h = random_hermitian(gen, 3)
    assert np.allclose(unitary_from_hamiltonian(h, 0.0), np.eye(3), atol=1e-12)


def test_unitary_pauli_z_analytic():
    u = unitary_from_hamiltonian(SZ, np.pi / 2)
    assert np.allclose(u, np.diag([-1j, 1j]), atol=1e-12)


def test_unitary_is_unitary():
    gen = rng(13)
    for _ in range(10):
        h = random_hermitian(gen, 4)
        u = unitary_from_hamiltonian(h, float(gen.uniform(-3, 3)))
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) <= 1e-10


def test_unitary_group_property():
    gen = rng(19)
    h = random_hermitian(gen, 3)
    t1, t2 = 0.7, -1.3
    u12 = unitary_from_hamiltonian(h, t1) @ unitary_from_hamiltonian(h, t2)
    assert np.linalg.norm(u12 - unitary_from_hamiltonian(h, t1 + t2)) <= 1e-9


def test_is_effect():
    assert is_effect(I2 / 2)
    assert not is_effect(2 * I2)
    assert is_effect(P0)


def test_is_projector():
    assert is_projector(P0)
    assert not is_projector(I2 / 2)


def test_validate_density():
    validate_density(I2 / 2)
    with pytest.raises(ValueError, match="not PSD"):
        validate_density(np.diag([1.5, -0.5]).astype(complex))
    with pytest.raises(ValueError, match="trace"):
        validate_density(I2)


def test_proj_psd_clips_negative_part():
    a = np.diag([2.0, -1.0]).astype(complex)
    assert np.allclose(proj_psd(a), np.diag([2.0, 0.0]))


def test_herm_vec_roundtrip_is_isometry():
    gen = rng(23)
    for _ in range(20):
        h, k = random_hermitian(gen, 3), random_hermitian(gen, 3)
        vh, vk = herm_to_vec(h), herm_to_vec(k)
        assert np.allclose(vec_to_herm(vh, 3), h, atol=1e-14)
        frob = np.trace(h @ k).real
        assert abs(np.dot(vh, vk) - frob) <= 1e-12 * max(1.0, abs(frob))


def test_require_hermitian_shape_check():
    with pytest.raises(ValueError, match="square"):
        require_hermitian(np.ones((2, 3)))
