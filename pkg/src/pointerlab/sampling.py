"""Seeded random generators for states, effects, channels, and POVMs.

All sampling in the package flows through a single numpy Generator (PCG64)
created by `rng(seed)`, so any run is reproducible from its seed.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger, hermitian_part


def rng(seed: int | None = None) -> np.random.Generator:
    """The package-wide pseudorandom generator (PCG64), seeded."""
    return np.random.default_rng(seed)


def random_hermitian(gen: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return hermitian_part(g) * scale


def haar_state(gen: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random pure state vector (normalized complex Gaussian)."""
    v = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return v / np.linalg.norm(v)


def haar_projector(gen: np.random.Generator, dim: int) -> np.ndarray:
    """Rank-1 projector onto a Haar-random pure state."""
    v = haar_state(gen, dim)
    return np.outer(v, v.conj())


def random_density(gen: np.random.Generator, dim: int) -> np.ndarray:
    """Full-rank random density matrix (Wishart, trace-normalized)."""
    g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_kraus_set(gen: np.random.Generator, dim_in: int, dim_out: int, count: int) -> list[np.ndarray]:
    """Random trace-preserving Kraus set: Gaussian blocks whitened by (ΣE†E)^(-1/2)."""
    if count * dim_out < dim_in:
        raise ValueError(
            f"no trace-preserving channel with {count} Kraus operators of shape "
            f"({dim_out}, {dim_in}): rank ΣE†E < {dim_in}"
        )
    blocks = [gen.standard_normal((dim_out, dim_in)) + 1j * gen.standard_normal((dim_out, dim_in))
              for _ in range(count)]
    s = sum(dagger(e) @ e for e in blocks)
    w, v = np.linalg.eigh(hermitian_part(s))
    s_inv_sqrt = (v / np.sqrt(w)) @ dagger(v)
    return [e @ s_inv_sqrt for e in blocks]


def random_povm(gen: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random POVM: PSD Wishart blocks renormalized by S^(-1/2)·A_i·S^(-1/2)."""
    blocks = []
    for _ in range(outcomes):
        g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
        blocks.append(g @ dagger(g))
    s = sum(blocks)
    w, v = np.linalg.eigh(hermitian_part(s))
    s_inv_sqrt = (v / np.sqrt(w)) @ dagger(v)
    return [hermitian_part(s_inv_sqrt @ a @ s_inv_sqrt) for a in blocks]


def random_rank_projector(gen: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    """Projector onto a Haar-random subspace of the given rank (QR of a Gaussian)."""
    g = gen.standard_normal((dim, rank)) + 1j * gen.standard_normal((dim, rank))
    q, _ = np.linalg.qr(g)
    return q @ dagger(q)


def random_stochastic(gen: np.random.Generator, sources: int, targets: int) -> np.ndarray:
    """Row-stochastic matrix (each source row a point on the target simplex)."""
    p = gen.random((sources, targets))
    return p / p.sum(axis=1, keepdims=True)
