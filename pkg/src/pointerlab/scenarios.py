"""Worked decoherence and broadcasting scenarios.

Three concrete broadcast models are built here:

* the canonical spin-environment model — a system coupled to n environment
  qubits through H = J ⊗ Σ_i g_i σz^(i), which gradually broadcasts the
  eigenbasis of J into the environment;
* the symmetric cloning marginal ρ ↦ ρ/3 + Tr(ρ)·1/3, whose preserved
  observables are exactly the coarse-grainings of any qubit SIC-POVM;
* the measurement copy channel, which writes a POVM's outcome into n
  classical registers (embedded as diagonal quantum systems).

The analyzers quantify how much of an observable survives: per-fragment
preservation verdicts, a redundancy count, and the decoherence factor that
tracks the suppression of the system's off-diagonal matrix elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    BroadcastModel,
    QuantumChannel,
    adjoint_apply,
    apply,
    channel,
    from_dilation,
    marginals,
)
from .linalg import (
    eigh,
    frozen,
    hermitian_part,
    partial_trace,
    require_hermitian,
    tensor,
    unitary_from_hamiltonian,
    validate_density,
)
from .observables import DiscreteObservable, simplex_coefficients, validate_povm
from .preservation import (
    DEFAULT_OPTIONS,
    IntersectionResult,
    SolverOptions,
    in_intersection,
)
from .sampling import haar_projector, rng

SIGMA_X = frozen(np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA_Y = frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
SIGMA_Z = frozen(np.array([[1, 0], [0, -1]], dtype=complex))
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

MAX_TOTAL_DIM = 2 ** 10


def basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def ket_projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


PLUS_STATE = frozen(ket_projector(np.array([1.0, 1.0])))


@dataclass(frozen=True)
class CanonicalModelSpec:
    """Parameters of the spin-environment decoherence model.

    The system (generator J, any Hermitian operator) couples to
    env_qubit_count environment qubits via H = J ⊗ Σ_i g_i σz^(i); every qubit
    starts in the same pure state (default |+⟩, which maximizes how fast the
    conditional environment states separate).
    """

    system_generator: np.ndarray = field(default_factory=lambda: np.array(SIGMA_Z))
    couplings: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    env_qubit_count: int = 4
    env_initial: np.ndarray = field(default_factory=lambda: np.array(PLUS_STATE))
    time: float = 0.0

    def __post_init__(self):
        require_hermitian(self.system_generator, name="system generator")
        if self.env_qubit_count < 1:
            raise ValueError("at least one environment qubit required")
        if len(self.couplings) != self.env_qubit_count:
            raise ValueError(
                f"{len(self.couplings)} couplings for {self.env_qubit_count} environment qubits"
            )
        validate_density(self.env_initial)
        if self.env_initial.shape != (2, 2):
            raise ValueError("per-fragment environment state must be a qubit state")

    @property
    def system_dim(self) -> int:
        return int(np.asarray(self.system_generator).shape[0])


def canonical_model(spec: CanonicalModelSpec) -> BroadcastModel:
    """The joint system+environment evolution at spec.time, as a broadcast model.

    Fragments are the system itself (label "A") followed by each environment
    qubit. At t = 0 the system marginal is the identity and every environment
    marginal is constant; as t grows the environment qubits pick up which-way
    information about the eigenbasis of J.
    """
    sys_dim = spec.system_dim
    n = spec.env_qubit_count
    if sys_dim * 2 ** n > MAX_TOTAL_DIM:
        raise ValueError(f"total dimension {sys_dim * 2**n} exceeds cap {MAX_TOTAL_DIM}")

    coupling_sum = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i, g in enumerate(spec.couplings):
        ops = [np.eye(2, dtype=complex)] * n
        ops[i] = np.array(SIGMA_Z)
        coupling_sum += g * tensor(*ops)
    hamiltonian = tensor(np.asarray(spec.system_generator, dtype=complex), coupling_sum)
    u = unitary_from_hamiltonian(hamiltonian, spec.time)

    env_joint = tensor(*([np.asarray(spec.env_initial, dtype=complex)] * n))
    joint = from_dilation(u, env_joint, sys_dim)
    labels = ("A",) + tuple(f"E{i+1}" for i in range(n))
    return BroadcastModel(joint=joint, fragment_dims=(sys_dim,) + (2,) * n, labels=labels)


def decoherence_factor(spec: CanonicalModelSpec) -> float:
    """Suppression ratio of the system's off-diagonals in the J eigenbasis.

    Simulates the joint evolution on a maximal-coherence probe state and
    returns |off-diagonal after| / |off-diagonal before|. Requires a qubit
    system; a degenerate J (single eigenvalue) dephases nothing and gives 1.
    For couplings g_i and |+⟩ environments this equals Π_i |cos(Δλ g_i t)|
    with Δλ the eigenvalue gap of J.
    """
    j = require_hermitian(spec.system_generator, name="system generator")
    if j.shape != (2, 2):
        raise ValueError("decoherence factor is defined for a qubit system")
    w, v = eigh(j)
    if abs(w[1] - w[0]) < 1e-12:
        return 1.0
    probe = ket_projector(v[:, 0] + v[:, 1])
    model = canonical_model(spec)
    out = apply(model.joint, probe)
    reduced = partial_trace(out, model.fragment_dims, keep=0)
    after = abs(v[:, 0].conj() @ reduced @ v[:, 1])
    return float(after / 0.5)


def cloning_channel() -> QuantumChannel:
    """The single-copy marginal of the optimal symmetric qubit cloner.

    Acts as ρ ↦ ρ/3 + Tr(ρ)·1/3 (a depolarizing channel shrinking the Bloch
    vector by 1/3); its adjoint acts identically on effects.
    """
    return channel([
        np.eye(2) / np.sqrt(2),
        np.array(SIGMA_X) / np.sqrt(6),
        np.array(SIGMA_Y) / np.sqrt(6),
        np.array(SIGMA_Z) / np.sqrt(6),
    ])


def _rotation_from_z(target: np.ndarray) -> np.ndarray:
    """SO(3) rotation taking +z to the target unit vector (Rodrigues form)."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, target))
    if c > 1 - 1e-12:
        return np.eye(3)
    if c < -1 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])  # π turn about the x axis
    axis = np.cross(z, target)
    axis = axis / np.linalg.norm(axis)
    s = np.sqrt(max(0.0, 1 - c * c))
    k = np.array([
        [0, -axis[2], axis[1]],
        [axis[2], 0, -axis[0]],
        [-axis[1], axis[0], 0],
    ])
    return np.eye(3) * c + s * k + (1 - c) * np.outer(axis, axis)


def sic_povm(orientation=(0.0, 0.0, 1.0)) -> DiscreteObservable:
    """Qubit SIC-POVM: four effects (1 + v_i·σ)/4 on a regular tetrahedron.

    `orientation` fixes the first tetrahedron vertex on the Bloch sphere
    (default +z). Each 2Γ_i is a rank-1 projector; pairwise overlaps are
    Tr(Γ_iΓ_j) = 1/4 on the diagonal and 1/12 off it.
    """
    v = np.asarray(orientation, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise ValueError("orientation must be a nonzero 3-vector")
    v = v / norm

    r = np.sqrt(2.0)
    base = np.array([
        [0.0, 0.0, 1.0],
        [2 * r / 3, 0.0, -1.0 / 3],
        [-r / 3, np.sqrt(2.0 / 3.0), -1.0 / 3],
        [-r / 3, -np.sqrt(2.0 / 3.0), -1.0 / 3],
    ])
    vertices = base @ _rotation_from_z(v).T
    elements = [
        hermitian_part((np.eye(2) + bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z) / 4)
        for bx, by, bz in vertices
    ]
    return validate_povm(elements, [f"t{i}" for i in range(4)])


@dataclass(frozen=True)
class ContainmentReport:
    """Sampled check that the channel's pulled-back effects stay inside the
    simplex spanned by a POVM's elements."""

    passed: bool
    worst_margin: float   # min over samples of min(α_i, 1 - α_i); ≥ -tol when passed
    samples_checked: int
    failures: int
    tol: float


def containment_check(n: QuantumChannel, gamma: DiscreteObservable,
                      sample_count: int = 1000, seed: int = 0,
                      tol: float = 1e-10) -> ContainmentReport:
    """Verify on sampled extreme effects P that N*(P) = Σ α_i Γ_i with α ∈ [0,1].

    Extreme points of the effect interval are projectors; the probe set is 0,
    the identity, deterministic axis-aligned projectors, and `sample_count`
    Haar-random rank-1 projectors. Requires gamma's elements to be linearly
    independent (the expansion must be unique to be conclusive).
    """
    d = n.dim_in
    probes: list[np.ndarray] = [np.zeros((d, d), dtype=complex), np.eye(d, dtype=complex)]
    if d == 2:
        for sigma in PAULI:
            probes.append((np.eye(2) + sigma) / 2)
            probes.append((np.eye(2) - sigma) / 2)
    else:
        eye = np.eye(d, dtype=complex)
        probes.extend(np.outer(eye[i], eye[i]) for i in range(d))
    gen = rng(seed)
    probes.extend(haar_projector(gen, d) for _ in range(sample_count))

    worst = np.inf
    failures = 0
    for p in probes:
        alpha = simplex_coefficients(adjoint_apply(n, p), gamma, box_tol=tol).values
        margin = float(min(alpha.min(), 1.0 - alpha.max()))
        worst = min(worst, margin)
        if margin < -tol:
            failures += 1
    return ContainmentReport(
        passed=failures == 0,
        worst_margin=worst,
        samples_checked=len(probes),
        failures=failures,
        tol=tol,
    )


def measurement_copy_channel(gamma: DiscreteObservable, n: int) -> BroadcastModel:
    """Measure gamma and write the outcome into n classical registers.

    The joint channel is ρ ↦ Σ_x Tr(Γ_x ρ) (|x⟩⟨x|)^⊗n on n registers of
    dimension k (classical values embedded as diagonal quantum states); every
    marginal is the measure-and-prepare channel ρ ↦ Σ_x Tr(Γ_x ρ)|x⟩⟨x|. All
    coarse-grainings of gamma are broadcast to every register.
    """
    if n < 1:
        raise ValueError("at least one register required")
    k = gamma.num_outcomes
    out_dim = k ** n
    if out_dim > 10 ** 6:
        raise ValueError(f"output dimension {out_dim} exceeds cap 10^6")

    kraus_ops = []
    repeated_stride = (out_dim - 1) // (k - 1) if k > 1 else 1  # index of |x…x⟩ is x·stride
    for x, effect in enumerate(gamma.elements):
        w, v = np.linalg.eigh(np.asarray(effect))
        register = basis_ket(out_dim, x * repeated_stride)
        for lam, col in zip(w, v.T):
            if lam > 1e-12:
                kraus_ops.append(np.sqrt(lam) * np.outer(register, col.conj()))
    joint = channel(kraus_ops)
    return BroadcastModel(joint=joint, fragment_dims=(k,) * n,
                          labels=tuple(f"B{i+1}" for i in range(n)))


@dataclass(frozen=True)
class RedundancyReport:
    """How many fragments independently carry a target observable."""

    time: float | None
    verdict: IntersectionResult
    redundancy: int
    decoherence_factor: float | None
    fragment_labels: tuple[str, ...]

    def __post_init__(self):
        if not 0 <= self.redundancy <= len(self.fragment_labels):
            raise ValueError("redundancy count out of range")


def redundancy_report(model: BroadcastModel, x: DiscreteObservable,
                      opts: SolverOptions = DEFAULT_OPTIONS,
                      spec: CanonicalModelSpec | None = None) -> RedundancyReport:
    """Per-fragment preservation verdicts for x, with the redundancy count.

    Runs the preservation solver against every marginal channel and counts
    the feasible fragments. When the model came from a CanonicalModelSpec,
    pass it to attach the decoherence factor at the model's time.
    """
    verdict = in_intersection(x, marginals(model), opts)
    redundancy = sum(1 for v in verdict.verdicts if v.feasible)
    factor = decoherence_factor(spec) if spec is not None else None
    return RedundancyReport(
        time=spec.time if spec is not None else None,
        verdict=verdict,
        redundancy=redundancy,
        decoherence_factor=factor,
        fragment_labels=model.labels,
    )
