"""Quantum channels in Kraus form, plus broadcast models with marginals.

A channel N maps input states to output states as N(ρ) = Σ_k E_k ρ E_k†
(Schrödinger picture); its adjoint acts on effects as N*(B) = Σ_k E_k† B E_k
(Heisenberg picture). Trace preservation (Σ E_k†E_k = 1) is validated at
construction; complete positivity holds by the Kraus form itself.

A BroadcastModel wraps a channel whose output factors into labeled fragments;
its marginal channels are realized concretely in Kraus form by partial-tracing
the Choi matrix and refactoring it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    TOL_PSD,
    dagger,
    frozen,
    hermitian_part,
    partial_trace,
    tensor,
    validate_density,
)

TOL_TRACE_PRESERVING = 1e-10
CHOI_RANK_CUTOFF = 1e-12


@dataclass(frozen=True)
class QuantumChannel:
    """A completely positive trace-preserving map, stored as Kraus operators.

    Every Kraus operator has shape (dim_out, dim_in). Instances are immutable
    after validation and safe to share across threads.
    """

    kraus: tuple[np.ndarray, ...]
    dim_in: int
    dim_out: int

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        for k, e in enumerate(self.kraus):
            if e.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"Kraus operator {k} has shape {e.shape}, expected "
                    f"({self.dim_out}, {self.dim_in})"
                )
        s = sum(dagger(e) @ e for e in self.kraus)
        dev = float(np.linalg.norm(s - np.eye(self.dim_in)))
        if dev > TOL_TRACE_PRESERVING:
            raise ValueError(
                f"Kraus operators are not trace preserving: |ΣE†E - 1|_F = {dev:.3e}"
            )

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)


def channel(kraus_ops) -> QuantumChannel:
    """Validate a Kraus-operator list into a QuantumChannel."""
    ops = tuple(frozen(np.asarray(e, dtype=complex)) for e in kraus_ops)
    if not ops:
        raise ValueError("a channel needs at least one Kraus operator")
    dim_out, dim_in = ops[0].shape
    return QuantumChannel(kraus=ops, dim_in=int(dim_in), dim_out=int(dim_out))


def identity_channel(dim: int) -> QuantumChannel:
    return channel([np.eye(dim)])


def dephasing_channel(dim: int) -> QuantumChannel:
    """Complete dephasing in the computational basis (kills all off-diagonals)."""
    eye = np.eye(dim)
    return channel([np.outer(eye[i], eye[i]) for i in range(dim)])


def apply(n: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    """Schrödinger-picture action: Σ_k E_k ρ E_k†."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n.dim_in, n.dim_in):
        raise ValueError(f"state shape {rho.shape} does not match dim_in {n.dim_in}")
    out = np.zeros((n.dim_out, n.dim_out), dtype=complex)
    for e in n.kraus:
        out += e @ rho @ dagger(e)
    return hermitian_part(out)


def adjoint_apply(n: QuantumChannel, b: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action on effects: Σ_k E_k† B E_k. Unital by duality."""
    b = np.asarray(b, dtype=complex)
    if b.shape != (n.dim_out, n.dim_out):
        raise ValueError(f"operator shape {b.shape} does not match dim_out {n.dim_out}")
    out = np.zeros((n.dim_in, n.dim_in), dtype=complex)
    for e in n.kraus:
        out += dagger(e) @ b @ e
    return hermitian_part(out)


def compose(m: QuantumChannel, n: QuantumChannel) -> QuantumChannel:
    """The channel ρ ↦ M(N(ρ)), with Kraus set {F_j E_k}."""
    if n.dim_out != m.dim_in:
        raise ValueError(f"cannot compose: inner dims {n.dim_out} vs {m.dim_in}")
    return channel([f @ e for f in m.kraus for e in n.kraus])


def tensor_channel(n1: QuantumChannel, n2: QuantumChannel) -> QuantumChannel:
    """Factorwise product channel with Kraus set {E_j ⊗ F_k}."""
    return channel([tensor(e, f) for e in n1.kraus for f in n2.kraus])


def from_dilation(u: np.ndarray, env_state: np.ndarray, sys_dim: int) -> QuantumChannel:
    """Joint system-environment evolution as a channel into the full product.

    Builds ρ ↦ U (ρ ⊗ |ψ_E⟩⟨ψ_E|) U† for a unitary U on system ⊗ environment
    and a pure environment state. The output keeps both factors
    (dim_out = sys_dim × env_dim); reduced channels are taken downstream via
    BroadcastModel marginals. The exact Kraus form is the single isometry
    U·(1 ⊗ |ψ_E⟩).
    """
    u = np.asarray(u, dtype=complex)
    total = u.shape[0]
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dilation unitary must be square, got {u.shape}")
    if total % sys_dim != 0:
        raise ValueError(f"unitary dim {total} is not a multiple of sys_dim {sys_dim}")
    dev = float(np.linalg.norm(dagger(u) @ u - np.eye(total)))
    if dev > 1e-10:
        raise ValueError(f"dilation operator is not unitary: |U†U - 1|_F = {dev:.3e}")
    env_dim = total // sys_dim

    env_state = validate_density(np.asarray(env_state, dtype=complex))
    if env_state.shape != (env_dim, env_dim):
        raise ValueError(f"environment state shape {env_state.shape}, expected ({env_dim}, {env_dim})")
    w, v = np.linalg.eigh(env_state)
    if env_dim > 1 and w[-2] > 1e-10:
        raise ValueError(f"environment state is mixed: second eigenvalue {w[-2]:.3e}")
    psi = v[:, -1]

    isometry = u @ tensor(np.eye(sys_dim), psi.reshape(-1, 1))
    return channel([isometry])


def choi(n: QuantumChannel) -> np.ndarray:
    """Choi matrix (1 ⊗ N)(|Ω⟩⟨Ω|) with |Ω⟩ = Σ_a |a,a⟩ unnormalized.

    Index order is (input ⊗ output). PSD by construction; its partial trace
    over the output factor is the dim_in identity (trace preservation).
    """
    vecs = [e.T.reshape(-1) for e in n.kraus]  # w[(a,s)] = E[s,a]
    c = np.zeros((n.dim_in * n.dim_out,) * 2, dtype=complex)
    for w in vecs:
        c += np.outer(w, w.conj())
    return hermitian_part(c)


def kraus_from_choi(choi_matrix: np.ndarray, dim_in: int, dim_out: int,
                    cutoff: float = CHOI_RANK_CUTOFF) -> QuantumChannel:
    """Refactor a Choi matrix into Kraus form via its eigendecomposition.

    Eigenvalues below `cutoff` are dropped as numerical rank noise.
    """
    c = np.asarray(choi_matrix, dtype=complex)
    if c.shape != (dim_in * dim_out, dim_in * dim_out):
        raise ValueError(f"Choi matrix shape {c.shape} does not match dims ({dim_in}, {dim_out})")
    w, v = np.linalg.eigh(hermitian_part(c))
    if w[0] < -TOL_PSD:
        raise ValueError(f"Choi matrix not PSD: min eigenvalue {w[0]:.3e}")
    ops = []
    for lam, col in zip(w, v.T):
        if lam > cutoff:
            ops.append(np.sqrt(lam) * col.reshape(dim_in, dim_out).T)
    if not ops:
        raise ValueError("Choi matrix has no eigenvalue above the rank cutoff")
    return channel(ops)


@dataclass(frozen=True)
class BroadcastModel:
    """A channel into a tensor product of labeled fragments.

    `fragment_dims` factorizes joint.dim_out; marginal(i) is the channel into
    fragment i alone, obtained by tracing the others out of the Choi matrix
    and refactoring into Kraus form.
    """

    joint: QuantumChannel
    fragment_dims: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        prod = int(np.prod(self.fragment_dims)) if self.fragment_dims else 0
        if prod != self.joint.dim_out:
            raise ValueError(
                f"fragment dims {self.fragment_dims} do not factor dim_out {self.joint.dim_out}"
            )
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"B{i+1}" for i in range(len(self.fragment_dims))))
        if len(self.labels) != len(self.fragment_dims):
            raise ValueError("one label per fragment required")

    @property
    def num_fragments(self) -> int:
        return len(self.fragment_dims)


def marginal(model: BroadcastModel, i: int) -> QuantumChannel:
    """The reduced channel into fragment i (partial trace over the rest)."""
    if not 0 <= i < model.num_fragments:
        raise ValueError(f"fragment index {i} out of range for {model.num_fragments} fragments")
    n = model.joint
    c = choi(n)
    # Choi factors: input, then each output fragment.
    dims = [n.dim_in, *model.fragment_dims]
    c_i = partial_trace(c, dims, keep=[0, 1 + i])
    return kraus_from_choi(c_i, n.dim_in, model.fragment_dims[i])


def marginals(model: BroadcastModel) -> list[QuantumChannel]:
    return [marginal(model, i) for i in range(model.num_fragments)]
