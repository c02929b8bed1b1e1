"""Deciding which observables survive a noisy channel.

An observable X is preserved by a channel N when some observable Y on the
output reproduces its statistics, i.e. X_i = N*(Y_i) for every outcome with
{Y_i} a valid POVM. That is a convex feasibility problem: the equality
constraints and the normalization ΣY_i = 1 form an affine set, and the
positivity of each Y_i a product of PSD cones. Dykstra's alternating
projections decide membership numerically, returning the witness POVM when
one is found and the best-iterate residual when not.

On top of the single-channel solver sit the broadcast notions: membership in
the intersection of all marginal channels of a system-environment evolution,
the joint pointer observable assembled from per-fragment witnesses, and the
correlation matrix between fragment readouts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channels import BroadcastModel, QuantumChannel, adjoint_apply, apply, marginals
from .feasibility import affine_set, dykstra
from .linalg import (
    dagger,
    herm_to_vec,
    hermitian_part,
    is_projector,
    proj_psd,
    tensor,
    vec_to_herm,
)
from .observables import DiscreteObservable, validate_povm

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNDECIDED = "undecided"

MAX_POINTER_OUTCOMES = 10**6


@dataclass(frozen=True)
class SolverOptions:
    """Feasibility thresholds and iteration budget.

    A verdict is feasible when the residual reaches eps_feas and infeasible
    when it stays at or above eps_infeas; anything between is undecided.
    `stall_window`/`stall_rtol` allow an early exit once the best residual
    stops improving (set stall_window=0 to always run out max_iter). `seed`
    is carried for reproducibility of any randomized driver built on top;
    the solver itself starts deterministically from Y_i = 1/num_outcomes.
    """

    eps_feas: float = 1e-8
    eps_infeas: float = 1e-6
    max_iter: int = 50000
    seed: int = 0
    stall_window: int = 1000
    stall_rtol: float = 1e-6
    record_trace: bool = False

    def __post_init__(self):
        if not self.eps_feas < self.eps_infeas:
            raise ValueError(f"eps_feas ({self.eps_feas}) must be below eps_infeas ({self.eps_infeas})")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class PreservationVerdict:
    """Solver outcome for one observable/channel pair.

    `residual` is the Frobenius norm of the stacked affine-constraint defect
    (per-outcome equality plus normalization) at the reported iterate. The
    witness is present exactly when the status is feasible; an infeasible
    status is a numerical statement (residual stayed above eps_infeas), not a
    certificate.
    """

    status: str
    residual: float
    iterations: int
    witness: DiscreteObservable | None = None
    trace: np.ndarray | None = None

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def adjoint_matrix(n: QuantumChannel) -> np.ndarray:
    """Real matrix of the Heisenberg adjoint N* on the isometric Hermitian
    parametrization; shape (dim_in², dim_out²)."""
    d = n.dim_out
    cols = []
    for a in range(d * d):
        basis = np.zeros(d * d)
        basis[a] = 1.0
        cols.append(herm_to_vec(adjoint_apply(n, vec_to_herm(basis, d))))
    return np.column_stack(cols)


def _preservation_system(x: DiscreteObservable, n: QuantumChannel) -> tuple[np.ndarray, np.ndarray]:
    """Stacked affine constraints on the candidate witness blocks {Y_i}:
    N*(Y_i) = X_i for each outcome, and ΣY_i = 1."""
    m = x.num_outcomes
    di2, do2 = n.dim_in ** 2, n.dim_out ** 2
    adj = adjoint_matrix(n)
    rows = np.zeros((m * di2 + do2, m * do2))
    rhs = np.zeros(m * di2 + do2)
    for i in range(m):
        rows[i * di2:(i + 1) * di2, i * do2:(i + 1) * do2] = adj
        rhs[i * di2:(i + 1) * di2] = herm_to_vec(x.elements[i])
        rows[m * di2:, i * do2:(i + 1) * do2] = np.eye(do2)
    rhs[m * di2:] = herm_to_vec(np.eye(n.dim_out))
    return rows, rhs


def _blocks_from_vec(v: np.ndarray, m: int, d: int) -> list[np.ndarray]:
    return [vec_to_herm(v[i * d * d:(i + 1) * d * d], d) for i in range(m)]


def _project_blocks_psd(v: np.ndarray, m: int, d: int) -> np.ndarray:
    out = np.empty_like(v)
    for i in range(m):
        sl = slice(i * d * d, (i + 1) * d * d)
        out[sl] = herm_to_vec(proj_psd(vec_to_herm(v[sl], d)))
    return out


def _polish_witness(blocks: list[np.ndarray], labels: tuple[str, ...]) -> DiscreteObservable | None:
    """Round a near-feasible iterate onto an exact POVM.

    Clips negative eigenvalues, then renormalizes by S^(-1/2)·Y_i·S^(-1/2)
    with S = ΣY_i, which restores ΣY_i = 1 to machine precision while keeping
    positivity. Returns None when S is too far from the identity to trust.
    """
    clipped = [proj_psd(y) for y in blocks]
    s = hermitian_part(sum(clipped))
    w, v = np.linalg.eigh(s)
    if w[0] < 0.5:
        return None
    s_inv_sqrt = (v / np.sqrt(w)) @ dagger(v)
    polished = [hermitian_part(s_inv_sqrt @ y @ s_inv_sqrt) for y in clipped]
    try:
        return validate_povm(polished, labels)
    except ValueError:
        return None


def preservation_witness(x: DiscreteObservable, n: QuantumChannel,
                         opts: SolverOptions = DEFAULT_OPTIONS) -> PreservationVerdict:
    """Decide whether x is preserved by n, producing a witness POVM when it is.

    Dykstra's algorithm alternates between the affine set of the equality
    constraints (projected through a precomputed least-squares factorization)
    and the product of PSD cones (eigenvalue clipping per block), starting
    from the deterministic uniform POVM Y_i = 1/m. The converged iterate is
    polished onto an exact POVM before the feasible verdict is issued, so a
    returned witness always satisfies the observable invariants and
    reconstructs x through the adjoint within eps_feas.
    """
    if x.dim != n.dim_in:
        raise ValueError(f"observable dim {x.dim} does not match channel dim_in {n.dim_in}")
    m, d = x.num_outcomes, n.dim_out
    rows, rhs = _preservation_system(x, n)
    aff = affine_set(rows, rhs)
    start = np.concatenate([herm_to_vec(np.eye(d) / m)] * m)

    result = dykstra(
        aff,
        lambda v: _project_blocks_psd(v, m, d),
        start,
        target=opts.eps_feas * 1e-2,
        max_iter=opts.max_iter,
        stall_window=opts.stall_window,
        stall_rtol=opts.stall_rtol,
        record_trace=opts.record_trace,
    )

    if result.residual <= opts.eps_feas:
        witness = _polish_witness(_blocks_from_vec(result.x, m, d), x.outcome_labels)
        if witness is not None:
            stacked = np.concatenate([herm_to_vec(y) for y in witness.elements])
            polished_residual = aff.violation(stacked)
            if polished_residual <= opts.eps_feas:
                return PreservationVerdict(FEASIBLE, polished_residual, result.iterations,
                                           witness=witness, trace=result.trace)
        # Polishing failed to stay within tolerance; report the raw iterate.
        return PreservationVerdict(UNDECIDED, result.residual, result.iterations, trace=result.trace)

    status = INFEASIBLE if result.residual >= opts.eps_infeas else UNDECIDED
    return PreservationVerdict(status, result.residual, result.iterations, trace=result.trace)


def sharp_correctability_check(projectors, n: QuantumChannel, tol: float = 1e-10) -> list[bool]:
    """Necessary condition for a sharp effect to be preserved by n.

    For each projector P, checks that P commutes with every E_k†E_k built from
    the channel's Kraus operators. Preservation of a sharp effect implies this
    condition; passing it does not imply preservation (necessary only).
    """
    results = []
    grams = [dagger(e) @ e for e in n.kraus]
    for p in projectors:
        p = np.asarray(p, dtype=complex)
        if not is_projector(p):
            raise ValueError("correctability check requires projector inputs (P² = P)")
        ok = all(np.linalg.norm(p @ g - g @ p) <= tol for g in grams)
        results.append(bool(ok))
    return results


@dataclass(frozen=True)
class IntersectionResult:
    """Per-channel verdicts for one observable against a family of channels."""

    verdicts: tuple[PreservationVerdict, ...]

    @property
    def in_intersection(self) -> bool:
        return all(v.feasible for v in self.verdicts)

    @property
    def witnesses(self) -> tuple[DiscreteObservable | None, ...]:
        return tuple(v.witness for v in self.verdicts)


def in_intersection(x: DiscreteObservable, channel_list, opts: SolverOptions = DEFAULT_OPTIONS) -> IntersectionResult:
    """Decide preservation of x by every channel in the family.

    x lies in the intersection iff every per-channel verdict is feasible; the
    full verdict list (with witnesses) is returned either way.
    """
    channel_list = list(channel_list)
    for k, ch in enumerate(channel_list):
        if ch.dim_in != x.dim:
            raise ValueError(f"channel {k} has dim_in {ch.dim_in}, observable dim {x.dim}")
    return IntersectionResult(tuple(preservation_witness(x, ch, opts) for ch in channel_list))


def joint_pointer_observable(witnesses, model: BroadcastModel) -> DiscreteObservable:
    """Assemble the single observable that simulates all fragment witnesses.

    Its elements are the adjoint of the joint channel applied to the tensor
    products of witness effects, one per tuple of fragment outcomes; summing
    out all indices but fragment i recovers the pullback of that fragment's
    witness through its marginal channel.
    """
    witnesses = list(witnesses)
    if len(witnesses) != model.num_fragments:
        raise ValueError(f"{len(witnesses)} witnesses for {model.num_fragments} fragments")
    for i, (w, d) in enumerate(zip(witnesses, model.fragment_dims)):
        if w.dim != d:
            raise ValueError(f"witness {i} has dim {w.dim}, fragment has dim {d}")
    total = int(np.prod([w.num_outcomes for w in witnesses]))
    if total > MAX_POINTER_OUTCOMES:
        raise ValueError(f"joint outcome count {total} exceeds cap {MAX_POINTER_OUTCOMES}")

    elements = []
    labels = []
    for combo in itertools.product(*[range(w.num_outcomes) for w in witnesses]):
        effect = tensor(*[witnesses[f].elements[combo[f]] for f in range(len(witnesses))])
        elements.append(adjoint_apply(model.joint, effect))
        labels.append(",".join(witnesses[f].outcome_labels[combo[f]] for f in range(len(witnesses))))
    return validate_povm(elements, labels)


def marginalize_product(joint_obs: DiscreteObservable, outcome_shape, fragment: int) -> DiscreteObservable:
    """Sum a product-outcome observable over all indices except one axis."""
    shape = tuple(int(s) for s in outcome_shape)
    if int(np.prod(shape)) != joint_obs.num_outcomes:
        raise ValueError(f"outcome shape {shape} does not match {joint_obs.num_outcomes} outcomes")
    if not 0 <= fragment < len(shape):
        raise ValueError(f"axis {fragment} out of range")
    stack = np.stack(joint_obs.elements).reshape(shape + (joint_obs.dim, joint_obs.dim))
    axes = tuple(a for a in range(len(shape)) if a != fragment)
    summed = stack.sum(axis=axes)
    return validate_povm([hermitian_part(summed[k]) for k in range(shape[fragment])])


def correlation_matrix(model: BroadcastModel, i: int, j: int,
                       y: DiscreteObservable, z: DiscreteObservable,
                       rho: np.ndarray) -> np.ndarray:
    """Joint outcome distribution of fragment readouts y (on i) and z (on j).

    C_ab = Tr[N(ρ) · (1 ⊗ … ⊗ Y_a ⊗ … ⊗ Z_b ⊗ … ⊗ 1)]; its row and column
    sums are the single-fragment marginal distributions. A diagonal C means
    the two fragments' readouts are fully correlated.
    """
    nf = model.num_fragments
    if i == j or not (0 <= i < nf and 0 <= j < nf):
        raise ValueError(f"need two distinct fragment indices in range, got ({i}, {j})")
    if y.dim != model.fragment_dims[i]:
        raise ValueError(f"observable on fragment {i} has dim {y.dim}, expected {model.fragment_dims[i]}")
    if z.dim != model.fragment_dims[j]:
        raise ValueError(f"observable on fragment {j} has dim {z.dim}, expected {model.fragment_dims[j]}")
    sigma = apply(model.joint, rho)
    c = np.zeros((y.num_outcomes, z.num_outcomes))
    for a, ya in enumerate(y.elements):
        for b, zb in enumerate(z.elements):
            factors = [np.eye(d) for d in model.fragment_dims]
            factors[i] = ya
            factors[j] = zb
            c[a, b] = float(np.trace(sigma @ tensor(*factors)).real)
    return c
