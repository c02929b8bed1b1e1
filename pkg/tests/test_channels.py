import numpy as np
import pytest

from pointerlab.channels import (
    BroadcastModel,
    adjoint_apply,
    apply,
    channel,
    choi,
    compose,
    dephasing_channel,
    from_dilation,
    identity_channel,
    kraus_from_choi,
    marginal,
    tensor_channel,
)
from pointerlab.linalg import partial_trace, tensor, validate_density
from pointerlab.sampling import random_density, random_hermitian, random_kraus_set, rng
from pointerlab.scenarios import cloning_channel, sic_povm

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)


def random_channel(gen, dim_in, dim_out, count=None):
    if count is None:
        count = max(2, -(-dim_in // dim_out))
    return channel(random_kraus_set(gen, dim_in, dim_out, count))


def test_channel_rejects_non_trace_preserving():
    with pytest.raises(ValueError, match="trace preserving"):
        channel([I2, I2])


def test_apply_identity():
    gen = rng(1)
    rho = random_density(gen, 2)
    assert np.allclose(apply(identity_channel(2), rho), rho)


def test_apply_cloning_marginal_on_ground_state():
    out = apply(cloning_channel(), P0)
    assert np.allclose(out, np.diag([2 / 3, 1 / 3]), atol=1e-12)


def test_apply_dephasing_kills_coherence():
    assert np.allclose(apply(dephasing_channel(2), PLUS), I2 / 2, atol=1e-12)


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError, match="does not match"):
        apply(identity_channel(2), np.eye(3) / 3)


def test_adjoint_unital():
    gen = rng(2)
    for _ in range(5):
        n = random_channel(gen, 3, 2)
        assert np.linalg.norm(adjoint_apply(n, I2) - np.eye(3)) <= 1e-10


def test_adjoint_duality_oracle():
    # Tr(N(ρ)B) = Tr(ρ N*(B)) checked over a basis of states.
    n = cloning_channel()
    gen = rng(4)
    b = random_hermitian(gen, 2)
    basis = [P0, P1, PLUS, np.array([[0.5, -0.5j], [0.5j, 0.5]])]
    for rho in basis:
        lhs = np.trace(apply(n, rho) @ b)
        rhs = np.trace(rho @ adjoint_apply(n, b))
        assert abs(lhs - rhs) <= 1e-12
    # and the closed form B/3 + Tr(B)·1/3
    assert np.allclose(adjoint_apply(n, b), b / 3 + np.trace(b) * I2 / 3, atol=1e-12)


def test_adjoint_dephasing_annihilates_sigma_x():
    assert np.allclose(adjoint_apply(dephasing_channel(2), SX), 0, atol=1e-14)


def test_compose_identity_acts_as_original():
    gen = rng(6)
    n = random_channel(gen, 2, 2)
    c = compose(identity_channel(2), n)
    for rho in (P0, P1, PLUS):
        assert np.allclose(apply(c, rho), apply(n, rho), atol=1e-12)


def test_compose_dephasing_idempotent():
    d = dephasing_channel(2)
    dd = compose(d, d)
    gen = rng(8)
    for _ in range(5):
        rho = random_density(gen, 2)
        assert np.allclose(apply(dd, rho), apply(d, rho), atol=1e-12)


def test_compose_cloning_twice_oracle():
    # Oracle: direct double application; closed form ρ/9 + 4·Tr(ρ)·1/9.
    n = cloning_channel()
    nn = compose(n, n)
    for rho in (P0, P1):
        twice = apply(n, apply(n, rho))
        assert np.allclose(apply(nn, rho), twice, atol=1e-12)
        assert np.allclose(twice, rho / 9 + 4 * np.trace(rho) * I2 / 9, atol=1e-12)


def test_tensor_channel_factorwise():
    assert np.allclose(
        apply(tensor_channel(identity_channel(2), identity_channel(2)), tensor(P0, PLUS)),
        tensor(P0, PLUS))
    out = apply(tensor_channel(dephasing_channel(2), identity_channel(2)), tensor(PLUS, P0))
    assert np.allclose(out, tensor(I2 / 2, P0), atol=1e-12)


def test_tensor_channel_product_oracle():
    n = cloning_channel()
    both = tensor_channel(n, n)
    gen = rng(10)
    rho_a, rho_b = random_density(gen, 2), random_density(gen, 2)
    lhs = apply(both, tensor(rho_a, rho_b))
    rhs = tensor(apply(n, rho_a), apply(n, rho_b))
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_from_dilation_identity_prepares_env():
    n = from_dilation(np.eye(4), P0, sys_dim=2)
    gen = rng(12)
    rho = random_density(gen, 2)
    assert np.allclose(apply(n, rho), tensor(rho, P0), atol=1e-12)


def test_from_dilation_swap_moves_state_to_env():
    n = from_dilation(SWAP, P0, sys_dim=2)
    gen = rng(14)
    rho = random_density(gen, 2)
    out = apply(n, rho)
    assert np.allclose(partial_trace(out, [2, 2], keep=1), rho, atol=1e-12)


def test_from_dilation_rejects_bad_inputs():
    with pytest.raises(ValueError, match="not unitary"):
        from_dilation(np.ones((4, 4)), P0, sys_dim=2)
    with pytest.raises(ValueError, match="mixed"):
        from_dilation(np.eye(4), I2 / 2, sys_dim=2)


def test_choi_identity_is_rank_one():
    c = choi(identity_channel(2))
    w = np.linalg.eigvalsh(c)
    assert abs(np.trace(c) - 2) <= 1e-12
    assert np.sum(w > 1e-10) == 1


def test_choi_dephasing_diagonal():
    assert np.allclose(choi(dephasing_channel(2)), np.diag([1.0, 0, 0, 1.0]), atol=1e-12)


def test_choi_partial_trace_is_identity():
    gen = rng(16)
    n = random_channel(gen, 3, 2)
    c = choi(n)
    assert np.allclose(partial_trace(c, [3, 2], keep=0), np.eye(3), atol=1e-10)


def test_choi_round_trip_cloning():
    n = cloning_channel()
    n2 = kraus_from_choi(choi(n), 2, 2)
    for rho in (P0, P1, PLUS):
        assert np.allclose(apply(n2, rho), apply(n, rho), atol=1e-10)


def test_choi_round_trip_seeded():
    gen = rng(18)
    for _ in range(100):
        d_in, d_out = int(gen.integers(2, 4)), int(gen.integers(2, 4))
        n = random_channel(gen, d_in, d_out)
        n2 = kraus_from_choi(choi(n), d_in, d_out)
        rho = random_density(gen, d_in)
        assert np.linalg.norm(apply(n2, rho) - apply(n, rho)) <= 1e-9


def test_duality_seeded_instances():
    gen = rng(20)
    for _ in range(100):
        d_in, d_out = int(gen.integers(2, 4)), int(gen.integers(2, 4))
        n = random_channel(gen, d_in, d_out)
        rho = random_density(gen, d_in)
        b = random_hermitian(gen, d_out)
        lhs = np.trace(apply(n, rho) @ b)
        rhs = np.trace(rho @ adjoint_apply(n, b))
        assert abs(lhs - rhs) <= 1e-10
        assert abs(np.trace(apply(n, rho)) - 1) <= 1e-12


def test_apply_outputs_valid_density():
    gen = rng(22)
    for _ in range(10):
        n = random_channel(gen, 2, 3)
        validate_density(apply(n, random_density(gen, 2)))


def test_broadcast_model_validation():
    n = identity_channel(4)
    with pytest.raises(ValueError, match="do not factor"):
        BroadcastModel(joint=n, fragment_dims=(3, 2))
    model = BroadcastModel(joint=n, fragment_dims=(2, 2))
    assert model.labels == ("B1", "B2")


def test_marginal_of_product_channel():
    # On product inputs the first marginal of N1 ⊗ N2 acts as N1 on factor 1.
    gen = rng(24)
    n1 = random_channel(gen, 2, 2)
    n2 = random_channel(gen, 2, 3)
    model = BroadcastModel(joint=tensor_channel(n1, n2), fragment_dims=(2, 3))
    m1 = marginal(model, 0)
    sigma = random_density(gen, 2)
    for rho in (P0, P1, PLUS):
        assert np.allclose(apply(m1, tensor(rho, sigma)), apply(n1, rho), atol=1e-10)


def test_marginal_matches_joint_partial_trace():
    gen = rng(26)
    joint = random_channel(gen, 2, 6, count=3)
    model = BroadcastModel(joint=joint, fragment_dims=(2, 3))
    for i in (0, 1):
        mi = marginal(model, i)
        for _ in range(5):
            rho = random_density(gen, 2)
            direct = partial_trace(apply(joint, rho), [2, 3], keep=i)
            assert np.linalg.norm(apply(mi, rho) - direct) <= 1e-10


def test_marginal_index_out_of_range():
    model = BroadcastModel(joint=identity_channel(4), fragment_dims=(2, 2))
    with pytest.raises(ValueError, match="out of range"):
        marginal(model, 2)
