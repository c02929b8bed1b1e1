"""Finite-outcome POVMs and their classical post-processing structure.

A DiscreteObservable is a finite family of effects summing to the identity;
measuring it on ρ gives outcome probabilities Tr(ρ X_i). Coarse-graining by a
row-stochastic matrix models forgetting classical detail after measurement;
the witness solver inverts that relation, deciding whether one observable is a
classical post-processing of another and producing the stochastic matrix when
it is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import channels
from .feasibility import FeasibilityResult, affine_set, dykstra
from .linalg import (
    TOL_PSD,
    eigh,
    frozen,
    herm_to_vec,
    hermitian_part,
    is_hermitian,
    require_hermitian,
)

TOL_POVM_SUM = 1e-10
TOL_SHARP = 1e-10
TOL_STOCHASTIC = 1e-12
TOL_INDEPENDENT = 1e-10   # smallest-singular-value threshold for a direct solve
WITNESS_EPS = 1e-8        # coarse-graining witness acceptance residual


@dataclass(frozen=True)
class DiscreteObservable:
    """A finite POVM: effects X_i with Σ X_i = 1, labeled by outcome."""

    elements: tuple[np.ndarray, ...]
    outcome_labels: tuple[str, ...]
    dim: int

    def __post_init__(self):
        if not self.elements:
            raise ValueError("an observable needs at least one outcome")
        if len(self.outcome_labels) != len(self.elements):
            raise ValueError("one label per outcome required")
        for i, x in enumerate(self.elements):
            if x.shape != (self.dim, self.dim):
                raise ValueError(f"element {i} has shape {x.shape}, expected ({self.dim}, {self.dim})")
            if not is_hermitian(x):
                raise ValueError(f"element {i} is not Hermitian")
            w = np.linalg.eigvalsh(x)
            if w[0] < -TOL_PSD or w[-1] > 1 + TOL_PSD:
                raise ValueError(
                    f"element {i} is not an effect: spectrum [{w[0]:.3e}, {w[-1]:.3e}] "
                    f"outside [-{TOL_PSD:.0e}, 1+{TOL_PSD:.0e}]"
                )
        dev = float(np.linalg.norm(sum(self.elements) - np.eye(self.dim)))
        if dev > TOL_POVM_SUM:
            raise ValueError(f"elements do not sum to the identity: residual {dev:.3e}")

    @property
    def num_outcomes(self) -> int:
        return len(self.elements)


def validate_povm(elements: Sequence[np.ndarray], outcome_labels: Sequence[str] | None = None) -> DiscreteObservable:
    """Validate a list of effects into a DiscreteObservable.

    Raises ValueError naming the first violated constraint (non-effect element
    or normalization residual).
    """
    elems = tuple(frozen(np.asarray(x, dtype=complex)) for x in elements)
    if not elems:
        raise ValueError("an observable needs at least one outcome")
    dim = elems[0].shape[0]
    if outcome_labels is None:
        outcome_labels = tuple(str(i) for i in range(len(elems)))
    return DiscreteObservable(elements=elems, outcome_labels=tuple(outcome_labels), dim=int(dim))


def sharp_observable(h: np.ndarray, labels_from_eigenvalues: bool = True) -> DiscreteObservable:
    """The spectral measure of a Hermitian operator: one projector per distinct
    eigenvalue (eigenvalues rounded together below 1e-9), outcomes ordered by
    descending eigenvalue so a σz measurement lists the +1 outcome first."""
    h = require_hermitian(h)
    w, v = eigh(h)
    elements: list[np.ndarray] = []
    labels: list[str] = []
    i = 0
    while i < len(w):
        j = i
        while j + 1 < len(w) and w[j + 1] - w[i] < 1e-9:
            j += 1
        block = v[:, i:j + 1]
        elements.append(hermitian_part(block @ block.conj().T))
        labels.append(f"{w[i]:g}" if labels_from_eigenvalues else str(len(labels)))
        i = j + 1
    elements.reverse()
    labels.reverse()
    if not labels_from_eigenvalues:
        labels = [str(k) for k in range(len(labels))]
    return validate_povm(elements, labels)


def trivial_observable(dim: int, outcomes: int) -> DiscreteObservable:
    """The fully uninformative POVM {1/k, ..., 1/k}."""
    return validate_povm([np.eye(dim) / outcomes for _ in range(outcomes)])


def probabilities(x: DiscreteObservable, rho: np.ndarray) -> np.ndarray:
    """Outcome distribution p_i = Tr(ρ X_i)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (x.dim, x.dim):
        raise ValueError(f"state shape {rho.shape} does not match observable dim {x.dim}")
    return np.array([float(np.trace(rho @ xi).real) for xi in x.elements])


def is_sharp(x: DiscreteObservable, tol: float = TOL_SHARP) -> bool:
    """True iff every element is idempotent (a projector) within tol."""
    return all(np.linalg.norm(xi @ xi - xi) <= tol for xi in x.elements)


def validate_stochastic(p: np.ndarray, tol: float = TOL_STOCHASTIC) -> np.ndarray:
    """Check a row-stochastic matrix: entries in [0,1], each row summing to 1."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 2:
        raise ValueError(f"stochastic matrix must be 2-D, got shape {p.shape}")
    if p.min() < -tol or p.max() > 1 + tol:
        raise ValueError(f"entries outside [0,1]: range [{p.min():.3e}, {p.max():.3e}]")
    row_dev = float(np.max(np.abs(p.sum(axis=1) - 1.0)))
    if row_dev > max(tol, 1e-12 * p.shape[1]):
        raise ValueError(f"row sums deviate from 1 by {row_dev:.3e}")
    return p


def coarse_grain(gamma: DiscreteObservable, p: np.ndarray,
                 outcome_labels: Sequence[str] | None = None) -> DiscreteObservable:
    """Post-process gamma by a row-stochastic matrix: X_k = Σ_i p_ik Γ_i.

    Row index runs over gamma's outcomes, column index over the new outcomes.
    """
    p = validate_stochastic(np.asarray(p, dtype=float))
    if p.shape[0] != gamma.num_outcomes:
        raise ValueError(f"matrix has {p.shape[0]} rows, observable has {gamma.num_outcomes} outcomes")
    elements = [
        hermitian_part(sum(p[i, k] * gamma.elements[i] for i in range(gamma.num_outcomes)))
        for k in range(p.shape[1])
    ]
    return validate_povm(elements, outcome_labels)


def pullback(y: DiscreteObservable, n: channels.QuantumChannel) -> DiscreteObservable:
    """Heisenberg-picture evolution of an observable through a channel.

    The result has elements N*(Y_i) on the channel input space; unitality of
    the adjoint guarantees it is again a valid observable.
    """
    if y.dim != n.dim_out:
        raise ValueError(f"observable dim {y.dim} does not match channel dim_out {n.dim_out}")
    return validate_povm([channels.adjoint_apply(n, yi) for yi in y.elements], y.outcome_labels)


class SimplexCoefficients(NamedTuple):
    values: np.ndarray
    inside: bool  # all coefficients within [0, 1] up to 1e-10


def element_matrix(gamma: DiscreteObservable) -> np.ndarray:
    """Columns are the real isometric vectorizations of gamma's elements."""
    return np.column_stack([herm_to_vec(g) for g in gamma.elements])


def simplex_coefficients(a: np.ndarray, gamma: DiscreteObservable,
                         box_tol: float = 1e-10) -> SimplexCoefficients:
    """Expand a Hermitian operator over linearly independent POVM elements.

    Solves A = Σ_i α_i Γ_i (unique by independence) and reports whether every
    α_i lies in [0,1] up to box_tol. Raises if the elements are linearly
    dependent (smallest singular value below 1e-10) or A is outside their span.
    """
    a = require_hermitian(a)
    if a.shape != (gamma.dim, gamma.dim):
        raise ValueError(f"operator shape {a.shape} does not match observable dim {gamma.dim}")
    g = element_matrix(gamma)
    svals = np.linalg.svd(g, compute_uv=False)
    if svals[-1] < TOL_INDEPENDENT:
        raise ValueError(f"observable elements are linearly dependent (σ_min = {svals[-1]:.3e})")
    target = herm_to_vec(a)
    alpha, *_ = np.linalg.lstsq(g, target, rcond=None)
    recon = float(np.linalg.norm(g @ alpha - target))
    if recon > 1e-8:
        raise ValueError(f"operator lies outside the span of the elements (residual {recon:.3e})")
    inside = bool(alpha.min() >= -box_tol and alpha.max() <= 1 + box_tol)
    return SimplexCoefficients(values=alpha, inside=inside)


@dataclass(frozen=True)
class CoarseGrainingWitness:
    """Outcome of the coarse-graining feasibility problem.

    When feasible, `matrix` is a row-stochastic p with X_k = Σ_i p_ik Γ_i and
    the attained residual is at most WITNESS_EPS; when infeasible, `matrix` is
    None and `residual` is the best constraint violation reached.
    """

    feasible: bool
    matrix: np.ndarray | None
    residual: float
    iterations: int


def _witness_system(x: DiscreteObservable, gamma: DiscreteObservable) -> tuple[np.ndarray, np.ndarray]:
    """Stacked linear system in the flattened p: element reconstruction rows
    for each target outcome, then one row-sum row per source outcome."""
    m, k = gamma.num_outcomes, x.num_outcomes
    gvecs = element_matrix(gamma)              # (d², m)
    d2 = gvecs.shape[0]
    rows = np.zeros((k * d2 + m, m * k))
    rhs = np.zeros(k * d2 + m)
    for kk in range(k):
        for i in range(m):
            rows[kk * d2:(kk + 1) * d2, i * k + kk] = gvecs[:, i]
        rhs[kk * d2:(kk + 1) * d2] = herm_to_vec(x.elements[kk])
    for i in range(m):
        rows[k * d2 + i, i * k:(i + 1) * k] = 1.0
        rhs[k * d2 + i] = 1.0
    return rows, rhs


def coarse_graining_witness(x: DiscreteObservable, gamma: DiscreteObservable,
                            max_iter: int = 50000) -> CoarseGrainingWitness:
    """Decide whether x is a coarse-graining of gamma, returning the matrix.

    If gamma's elements are linearly independent the candidate matrix is the
    unique linear solution, accepted after a box check. Otherwise (or when the
    unique solution leaves [0,1]) the bounded feasibility problem is solved by
    alternating projections between the affine reconstruction constraints and
    the [0,1] box, sharing the solver core used for channel preservation.
    Infeasibility is reported with the residual attained, never as an error.
    """
    if x.dim != gamma.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {gamma.dim}")
    m, k = gamma.num_outcomes, x.num_outcomes
    rows, rhs = _witness_system(x, gamma)

    def stacked_residual(p: np.ndarray) -> float:
        return float(np.linalg.norm(rows @ p.reshape(-1) - rhs))

    g = element_matrix(gamma)
    svals = np.linalg.svd(g, compute_uv=False)
    if svals[-1] >= TOL_INDEPENDENT:
        # Unique expansion per target outcome; stochasticity follows from it.
        p = np.column_stack([
            np.linalg.lstsq(g, herm_to_vec(xk), rcond=None)[0] for xk in x.elements
        ])
        if p.min() >= -1e-10 and p.max() <= 1 + 1e-10:
            residual = stacked_residual(p)
            if residual <= WITNESS_EPS:
                return CoarseGrainingWitness(True, np.clip(p, 0.0, 1.0), residual, 0)

    aff = affine_set(rows, rhs)
    start = np.full(m * k, 1.0 / k)
    result: FeasibilityResult = dykstra(
        aff, lambda v: np.clip(v, 0.0, 1.0), start,
        target=WITNESS_EPS * 1e-2, max_iter=max_iter,
    )
    if result.residual <= WITNESS_EPS:
        p = np.clip(result.x.reshape(m, k), 0.0, 1.0)
        return CoarseGrainingWitness(True, p, stacked_residual(p), result.iterations)
    return CoarseGrainingWitness(False, None, result.residual, result.iterations)
