"""Dense complex-matrix kernel: Hermitian eigenproblems, tensor products,
partial traces, Hermitian exponentials, and cone/membership predicates.

Everything here works on plain complex numpy arrays. Operators are square
unless noted; states are density matrices (PSD, unit trace). The tolerance
ladder is fixed globally: representation noise (TOL_HERM) sits two orders
below the decision thresholds (TOL_PSD, TOL_RECON).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-12   # entrywise Hermitian-symmetry tolerance
TOL_PSD = 1e-10    # cone-membership tolerance on eigenvalues
TOL_RECON = 1e-10  # factorization/reconstruction tolerance (Frobenius)

_EINSUM_CHARS = "abcdefghijklmnopqrstuvwxyz"


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A†)/2; used to scrub float asymmetry off Hermitian results."""
    return (a + a.conj().T) / 2


def is_hermitian(a: np.ndarray, tol: float = TOL_HERM) -> bool:
    """Entrywise check that A equals its conjugate transpose within tol."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def require_hermitian(a: np.ndarray, tol: float = TOL_HERM, name: str = "operator") -> np.ndarray:
    """Return A as a complex array, rejecting non-Hermitian input."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    dev = float(np.max(np.abs(a - a.conj().T)))
    if dev > tol:
        raise ValueError(f"{name} is not Hermitian: max |A - A†| = {dev:.3e} > {tol:.1e}")
    return a


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a deterministic phase.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    H = V diag(w) V†. Each eigenvector's phase is fixed so that its
    largest-magnitude entry is real and nonnegative, making the output
    reproducible up to degenerate-subspace rotations. Code downstream must
    only rely on spectral projectors inside degenerate blocks.
    """
    h = require_hermitian(h)
    w, v = np.linalg.eigh(h)
    # Phase convention: largest-|entry| component of each column made real >= 0.
    idx = np.argmax(np.abs(v), axis=0)
    anchors = v[idx, np.arange(v.shape[1])]
    phases = np.where(np.abs(anchors) > 0, anchors / np.maximum(np.abs(anchors), 1e-300), 1.0)
    v = v / phases[np.newaxis, :]
    return w, v


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor slowest."""
    if not ops:
        raise ValueError("tensor() needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(m: np.ndarray, factor_dims: Sequence[int], keep: int | Iterable[int]) -> np.ndarray:
    """Trace out all tensor factors except those in `keep`.

    `factor_dims` lists the dimension of each factor in tensor order; their
    product must equal the matrix dimension. Kept factors retain their
    relative order. The trace is preserved: Tr(result) = Tr(m).
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in factor_dims]
    if any(d <= 0 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match factor dims {dims}")
    if isinstance(keep, (int, np.integer)):
        keep_idx = [int(keep)]
    else:
        keep_idx = sorted(int(k) for k in keep)
    if not keep_idx:
        raise ValueError("keep must name at least one factor")
    if len(set(keep_idx)) != len(keep_idx):
        raise ValueError(f"duplicate indices in keep: {keep_idx}")
    if keep_idx[0] < 0 or keep_idx[-1] >= n:
        raise ValueError(f"keep indices {keep_idx} out of range for {n} factors")

    if 2 * n > len(_EINSUM_CHARS):
        raise ValueError(f"too many tensor factors ({n}) for partial_trace")
    traced = [i for i in range(n) if i not in keep_idx]
    row = list(range(n))
    col = list(range(n, 2 * n))
    for t in traced:
        col[t] = row[t]
    src = "".join(_EINSUM_CHARS[i] for i in row + col)
    dst = "".join(_EINSUM_CHARS[i] for i in [row[k] for k in keep_idx] + [col[k] for k in keep_idx])
    reduced = np.einsum(f"{src}->{dst}", m.reshape(dims + dims))
    d_keep = int(np.prod([dims[k] for k in keep_idx]))
    return reduced.reshape(d_keep, d_keep)


def unitary_from_hamiltonian(h: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-i t H) for Hermitian H, via eigendecomposition."""
    w, v = eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def is_effect(a: np.ndarray, tol: float = TOL_PSD) -> bool:
    """True iff A is Hermitian with spectrum inside [-tol, 1 + tol]."""
    if not is_hermitian(a, tol=TOL_HERM):
        return False
    w = np.linalg.eigvalsh(np.asarray(a, dtype=complex))
    return bool(w[0] >= -tol and w[-1] <= 1 + tol)


def is_projector(p: np.ndarray, tol: float = TOL_RECON) -> bool:
    """True iff P is Hermitian and idempotent within tol (Frobenius)."""
    if not is_hermitian(p, tol=TOL_HERM):
        return False
    p = np.asarray(p, dtype=complex)
    return bool(np.linalg.norm(p @ p - p) <= tol)


def validate_density(rho: np.ndarray, tol_psd: float = TOL_PSD, tol_trace: float = 1e-12) -> np.ndarray:
    """Check PSD-ness and unit trace of a density matrix; return it unchanged."""
    rho = require_hermitian(rho, name="density matrix")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -tol_psd:
        raise ValueError(f"density matrix is not PSD: min eigenvalue {w[0]:.3e} < -{tol_psd:.1e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol_trace:
        raise ValueError(f"density matrix trace {tr!r} differs from 1 by more than {tol_trace:.1e}")
    return rho


def proj_psd(a: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: eigendecompose and clip negative eigenvalues."""
    w, v = np.linalg.eigh(hermitian_part(np.asarray(a, dtype=complex)))
    w = np.maximum(w, 0.0)
    return (v * w) @ v.conj().T


def herm_to_vec(h: np.ndarray) -> np.ndarray:
    """Isometric real parametrization of a Hermitian matrix.

    Maps d x d Hermitian H to a length-d² real vector (diagonal entries, then
    √2·Re and √2·Im of the upper triangle) so that Euclidean inner products of
    vectors equal Frobenius inner products of matrices. This makes Euclidean
    projections in parameter space agree with Frobenius projections on
    operators.
    """
    h = np.asarray(h)
    d = h.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate([
        np.real(np.diagonal(h)),
        np.sqrt(2.0) * np.real(h[iu]),
        np.sqrt(2.0) * np.imag(h[iu]),
    ])


def vec_to_herm(vec: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of herm_to_vec."""
    vec = np.asarray(vec, dtype=float)
    if vec.size != dim * dim:
        raise ValueError(f"vector length {vec.size} does not match dim {dim}")
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, vec[:dim])
    iu = np.triu_indices(dim, k=1)
    m = iu[0].size
    off = (vec[dim:dim + m] + 1j * vec[dim + m:dim + 2 * m]) / np.sqrt(2.0)
    h[iu] = off
    h[(iu[1], iu[0])] = off.conj()
    return h


def frozen(a: np.ndarray) -> np.ndarray:
    """Copy an array and mark it read-only; value types here are immutable."""
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out
