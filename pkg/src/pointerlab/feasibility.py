"""Convex feasibility by Dykstra's alternating projections.

The problems in this package all take the same shape: find a point in the
intersection of an affine set {x : Lx = b} with a simple convex set (a product
of PSD cones, or a box). The affine projection is a one-time least-squares
factorization reused across thousands of iterations; the convex projection is
cheap and problem-specific. Corrections are kept only for the convex set —
for affine sets Dykstra's correction term is provably unnecessary.

The reported residual is the Euclidean norm of the affine-constraint violation
Lx - b at the iterate, measured in an isometric parametrization so that it
equals the Frobenius norm of the stacked operator-equation defects. When the
linear system is inconsistent (no witness can exist even ignoring the cone),
this residual is bounded below by the inconsistency gap for every iterate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class AffineSet:
    """The set {x : Lx = b} with a precomputed pseudo-inverse projector."""

    matrix: np.ndarray
    offset: np.ndarray
    pinv: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return x - self.pinv @ (self.matrix @ x - self.offset)

    def violation(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.matrix @ x - self.offset))


def affine_set(matrix: np.ndarray, offset: np.ndarray) -> AffineSet:
    matrix = np.asarray(matrix, dtype=float)
    offset = np.asarray(offset, dtype=float)
    return AffineSet(matrix=matrix, offset=offset, pinv=np.linalg.pinv(matrix))


@dataclass(frozen=True)
class FeasibilityResult:
    x: np.ndarray          # best iterate (smallest affine violation seen)
    residual: float        # affine violation at the best iterate
    iterations: int
    trace: np.ndarray | None  # per-iteration residual log, when requested


def dykstra(
    affine: AffineSet,
    project_convex: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    target: float,
    max_iter: int,
    stall_window: int = 1000,
    stall_rtol: float = 1e-6,
    record_trace: bool = False,
) -> FeasibilityResult:
    """Alternate affine and convex projections from x0 until the affine
    violation of the convex-feasible iterate drops below `target`, the best
    violation stalls, or `max_iter` is reached.

    Every iterate returned lies in the convex set (the convex projection is
    applied last), so the affine violation alone measures infeasibility.
    Stalling means the best violation improved by less than a relative
    `stall_rtol` over `stall_window` iterations; set stall_window=0 to always
    run to max_iter.
    """
    x = np.asarray(x0, dtype=float).copy()
    correction = np.zeros_like(x)
    best_x = x.copy()
    best_r = affine.violation(x)
    log: list[float] = []
    window_best = best_r

    it = 0
    for it in range(1, max_iter + 1):
        y = affine.project(x)
        x = project_convex(y + correction)
        correction = y + correction - x
        r = affine.violation(x)
        if record_trace:
            log.append(r)
        if r < best_r:
            best_r = r
            best_x = x.copy()
        if best_r <= target:
            break
        if stall_window and it % stall_window == 0:
            if window_best - best_r <= stall_rtol * max(window_best, 1e-30):
                break
            window_best = best_r

    return FeasibilityResult(
        x=best_x,
        residual=best_r,
        iterations=it,
        trace=np.asarray(log) if record_trace else None,
    )
