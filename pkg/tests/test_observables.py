import numpy as np
import pytest

from pointerlab.channels import channel, compose, dephasing_channel, identity_channel
from pointerlab.linalg import herm_to_vec
from pointerlab.observables import (
    coarse_grain,
    coarse_graining_witness,
    is_sharp,
    probabilities,
    pullback,
    sharp_observable,
    simplex_coefficients,
    trivial_observable,
    validate_povm,
    validate_stochastic,
)
from pointerlab.sampling import random_density, random_kraus_set, random_povm, random_stochastic, rng
from pointerlab.scenarios import SIGMA_X, SIGMA_Z, cloning_channel, sic_povm

I2 = np.eye(2, dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)

Z_MEAS = sharp_observable(np.array(SIGMA_Z))
X_MEAS = sharp_observable(np.array(SIGMA_X))


def test_validate_povm_sharp_pair():
    obs = validate_povm([P0, P1])
    assert obs.num_outcomes == 2 and obs.dim == 2


def test_validate_povm_trivial():
    obs = validate_povm([I2 / 2, I2 / 2])
    assert obs.num_outcomes == 2


def test_validate_povm_sum_exceeds_identity():
    with pytest.raises(ValueError, match="sum"):
        validate_povm([I2, I2 / 2])


def test_validate_povm_non_effect():
    with pytest.raises(ValueError, match="not an effect"):
        validate_povm([2 * I2, -I2])


def test_probabilities_sharp_on_ground_state():
    assert np.allclose(probabilities(Z_MEAS, P0), [1.0, 0.0], atol=1e-12)


def test_probabilities_sic_on_maximally_mixed():
    # Tr(Γ_i / 2) = 1/4 since each Γ_i has trace 1/2.
    gamma = sic_povm()
    p = probabilities(gamma, I2 / 2)
    assert np.allclose(p, [0.25] * 4, atol=1e-12)
    for g in gamma.elements:
        assert abs(np.trace(g) - 0.5) <= 1e-12


def test_probabilities_trivial_observable():
    gen = rng(1)
    obs = trivial_observable(2, 2)
    for _ in range(5):
        assert np.allclose(probabilities(obs, random_density(gen, 2)), [0.5, 0.5], atol=1e-12)


def test_probabilities_sum_to_one():
    gen = rng(2)
    for _ in range(20):
        obs = validate_povm(random_povm(gen, 3, 4))
        p = probabilities(obs, random_density(gen, 3))
        assert p.min() >= -1e-12
        assert abs(p.sum() - 1) <= 1e-10


def test_is_sharp():
    assert is_sharp(Z_MEAS)
    assert not is_sharp(sic_povm())  # elements are half-projectors, not idempotent
    assert is_sharp(validate_povm([np.eye(3)]))


def test_coarse_grain_identity_permutation():
    gamma = sic_povm()
    out = coarse_grain(gamma, np.eye(4))
    for a, b in zip(out.elements, gamma.elements):
        assert np.allclose(a, b, atol=1e-14)


def test_coarse_grain_binary_merge():
    gamma = sic_povm()
    merge = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=float)
    out = coarse_grain(gamma, merge)
    assert np.allclose(out.elements[0], gamma.elements[0] + gamma.elements[1], atol=1e-14)
    assert np.allclose(out.elements[1], gamma.elements[2] + gamma.elements[3], atol=1e-14)


def test_coarse_grain_full_forgetting():
    gamma = sic_povm()
    p = np.full((4, 2), 0.5)
    out = coarse_grain(gamma, p)
    for el in out.elements:
        assert np.allclose(el, I2 / 2, atol=1e-12)


def test_coarse_grain_rejects_bad_matrix():
    gamma = sic_povm()
    with pytest.raises(ValueError, match="row sums"):
        coarse_grain(gamma, np.full((4, 2), 0.3))
    with pytest.raises(ValueError, match="rows"):
        coarse_grain(gamma, np.eye(3))


def test_pullback_identity_and_dephasing():
    assert all(np.allclose(a, b) for a, b in
               zip(pullback(Z_MEAS, identity_channel(2)).elements, Z_MEAS.elements))
    out = pullback(Z_MEAS, dephasing_channel(2))
    assert all(np.allclose(a, b, atol=1e-14) for a, b in zip(out.elements, Z_MEAS.elements))


def test_pullback_sic_through_cloning():
    # Closed form: Γ_i/3 + Tr(Γ_i)·1/3 = Γ_i/3 + 1/6.
    gamma = sic_povm()
    out = pullback(gamma, cloning_channel())
    for a, g in zip(out.elements, gamma.elements):
        assert np.allclose(a, g / 3 + I2 / 6, atol=1e-12)


def test_simplex_coefficients_identity_over_sic():
    alpha = simplex_coefficients(I2, sic_povm())
    assert alpha.inside
    assert np.allclose(alpha.values, [1, 1, 1, 1], atol=1e-10)


def test_simplex_coefficients_cloned_ground_state():
    # N*(|0><0|) = 1/2 + σz/6 expands as (1, 1/3, 1/3, 1/3) on the +z SIC.
    from pointerlab.channels import adjoint_apply
    gamma = sic_povm()
    a = adjoint_apply(cloning_channel(), P0)
    # independent 4x4 linear-solve oracle
    g = np.column_stack([herm_to_vec(x) for x in gamma.elements])
    oracle = np.linalg.solve(g, herm_to_vec(a))
    result = simplex_coefficients(a, gamma)
    assert result.inside
    assert np.allclose(result.values, oracle, atol=1e-12)
    assert np.allclose(result.values, [1.0, 1 / 3, 1 / 3, 1 / 3], atol=1e-10)


def test_simplex_coefficients_projector_outside():
    result = simplex_coefficients(P0, sic_povm())
    assert not result.inside
    assert result.values.max() > 1 + 1e-6


def test_simplex_coefficients_rejects_dependent_elements():
    obs = trivial_observable(2, 3)
    with pytest.raises(ValueError, match="linearly dependent"):
        simplex_coefficients(I2, obs)


def test_witness_identity_matrix_for_self():
    gamma = sic_povm()
    w = coarse_graining_witness(gamma, gamma)
    assert w.feasible
    assert np.allclose(w.matrix, np.eye(4), atol=1e-8)


def test_witness_recovers_binary_merge():
    gamma = sic_povm()
    merge = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=float)
    x = coarse_grain(gamma, merge)
    w = coarse_graining_witness(x, gamma)
    assert w.feasible
    assert np.allclose(w.matrix, merge, atol=1e-8)


def test_witness_sharp_z_vs_sic_infeasible():
    gamma = sic_povm()
    w = coarse_graining_witness(Z_MEAS, gamma)
    assert not w.feasible
    assert w.residual > 1e-6
    # Oracle: the unique linear expansion needs a coefficient above 1.
    g = np.column_stack([herm_to_vec(x) for x in gamma.elements])
    alpha = np.linalg.solve(g, herm_to_vec(P0))
    assert alpha.max() > 1 + 1e-6


def test_witness_soundness_random_coarse_grainings():
    gen = rng(3)
    gamma = sic_povm()
    for _ in range(20):
        p = random_stochastic(gen, 4, int(gen.integers(2, 5)))
        x = coarse_grain(gamma, p)
        w = coarse_graining_witness(x, gamma)
        assert w.feasible
        validate_stochastic(w.matrix)
        recon = coarse_grain(gamma, w.matrix)
        for a, b in zip(recon.elements, x.elements):
            assert np.linalg.norm(a - b) <= 1e-8


def test_witness_dependent_elements_path():
    # Eight half-weight SIC elements are linearly dependent; the projection
    # path must still find the obvious pairing witness.
    gamma = sic_povm()
    doubled = validate_povm([g / 2 for g in gamma.elements] * 2)
    x = coarse_grain(gamma, np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=float))
    w = coarse_graining_witness(x, doubled)
    assert w.feasible
    recon = coarse_grain(doubled, w.matrix)
    for a, b in zip(recon.elements, x.elements):
        assert np.linalg.norm(a - b) <= 1e-8


def test_normalization_closure():
    gen = rng(4)
    gamma = validate_povm(random_povm(gen, 2, 4))
    p = random_stochastic(gen, 4, 3)
    out = coarse_grain(gamma, p)
    assert np.linalg.norm(sum(out.elements) - I2) <= 1e-10
    n = channel(random_kraus_set(gen, 2, 2, 2))
    out2 = pullback(gamma, n)
    assert np.linalg.norm(sum(out2.elements) - I2) <= 1e-10


def test_coarse_grain_composition_law():
    gen = rng(5)
    gamma = validate_povm(random_povm(gen, 2, 4))
    p = random_stochastic(gen, 4, 3)
    q = random_stochastic(gen, 3, 2)
    lhs = coarse_grain(coarse_grain(gamma, p), q)
    rhs = coarse_grain(gamma, p @ q)
    for a, b in zip(lhs.elements, rhs.elements):
        assert np.max(np.abs(a - b)) <= 1e-12


def test_pullback_functoriality():
    gen = rng(6)
    n = channel(random_kraus_set(gen, 3, 2, 2))   # inner: 3 -> 2
    m = channel(random_kraus_set(gen, 2, 4, 2))   # outer: 2 -> 4
    y = validate_povm(random_povm(gen, 4, 3))
    lhs = pullback(y, compose(m, n))
    rhs = pullback(pullback(y, m), n)
    for a, b in zip(lhs.elements, rhs.elements):
        assert np.linalg.norm(a - b) <= 1e-10


def test_convex_combination_of_witnesses():
    # A convex mix of two coarse-grainings of gamma is again one, witnessed by
    # the mixed stochastic matrix.
    gen = rng(7)
    gamma = sic_povm()
    p1 = random_stochastic(gen, 4, 2)
    p2 = random_stochastic(gen, 4, 2)
    lam = 0.3
    mixed = coarse_grain(gamma, lam * p1 + (1 - lam) * p2)
    x1, x2 = coarse_grain(gamma, p1), coarse_grain(gamma, p2)
    for a, b, c in zip(mixed.elements, x1.elements, x2.elements):
        assert np.allclose(a, lam * b + (1 - lam) * c, atol=1e-12)
    assert coarse_graining_witness(mixed, gamma).feasible
