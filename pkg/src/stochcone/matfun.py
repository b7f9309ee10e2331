"""Spectral functions of real symmetric matrices.

The eigensolver is a self-contained cyclic Jacobi iteration: deterministic,
dependency-free, and accurate to near machine precision for the small
dimensions (d <= ~16) this library targets.  numpy is used only as the array
container and for dense products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymMatrix",
    "SpectralDecomposition",
    "sym",
    "eye",
    "eigh",
    "matrix_fn",
    "congruence",
    "frobenius",
    "DimensionMismatch",
    "SpectralDomainError",
    "EigenConvergenceError",
]

_MAX_SWEEPS = 64
# stop a sweep pass once the off-diagonal Frobenius mass is this far below
# the matrix scale; well under the 1e-10 reconstruction budget
_SWEEP_TOL = 1e-14
_DECOMP_TOL = 1e-10


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


class SpectralDomainError(ValueError):
    """A spectral scalar map was applied outside its domain."""

    def __init__(self, fn: str, min_eigenvalue: float):
        self.fn = fn
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"matrix function {fn!r} needs a strictly positive spectrum; "
            f"smallest eigenvalue is {min_eigenvalue:.6e}"
        )


class EigenConvergenceError(RuntimeError):
    """The Jacobi iteration did not converge within the sweep cap."""


def _as_square(entries) -> np.ndarray:
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Real symmetric matrix; stored as (A + A^T)/2, read-only."""

    entries: np.ndarray

    def __post_init__(self):
        a = _as_square(self.entries)
        a = (a + a.T) / 2.0
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:  # keep reprs one-line for test output
        return f"SymMatrix({self.entries.tolist()!r})"


def sym(entries) -> SymMatrix:
    """Build a SymMatrix from any square array-like."""
    return SymMatrix(np.asarray(entries, dtype=float))


def eye(dim: int) -> SymMatrix:
    return SymMatrix(np.eye(dim))


def frobenius(a) -> float:
    """Frobenius norm of an array-like or SymMatrix."""
    arr = a.entries if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)
    return float(np.sqrt((arr * arr).sum()))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        q = np.asarray(self.eigenvectors, dtype=float)
        d = w.shape[0]
        if w.ndim != 1 or q.shape != (d, d):
            raise DimensionMismatch("eigenvalue/eigenvector shapes disagree")
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be ascending")
        orth = frobenius(q.T @ q - np.eye(d))
        if orth > _DECOMP_TOL:
            raise ValueError(f"eigenvector columns not orthonormal: residual {orth:.3e}")
        w.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", q)


def _jacobi(a: np.ndarray, want_vectors: bool):
    """Cyclic Jacobi on a symmetric array.

    Returns (eigenvalues ascending as list, eigenvector columns as ndarray or
    None).  Deterministic: fixed sweep order, stable sort, sign convention
    "largest-magnitude component positive".
    """
    d = a.shape[0]
    if d == 1:
        return [float(a[0, 0])], (np.eye(1) if want_vectors else None)
    A = [[float(a[i, j]) for j in range(d)] for i in range(d)]
    V = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)] if want_vectors else None
    nrm = math.sqrt(sum(A[i][j] * A[i][j] for i in range(d) for j in range(d)))
    thr2 = (_SWEEP_TOL * (1.0 + nrm)) ** 2
    converged = False
    for _ in range(_MAX_SWEEPS):
        off2 = 0.0
        for i in range(d - 1):
            Ai = A[i]
            for j in range(i + 1, d):
                off2 += Ai[j] * Ai[j]
        if 2.0 * off2 <= thr2:
            converged = True
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p][q]
                if apq == 0.0:
                    continue
                tau = (A[q][q] - A[p][p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(d):
                    if k != p and k != q:
                        akp = A[k][p]
                        akq = A[k][q]
                        A[k][p] = A[p][k] = c * akp - s * akq
                        A[k][q] = A[q][k] = s * akp + c * akq
                app = A[p][p]
                A[p][p] = app - t * apq
                A[q][q] = A[q][q] + t * apq
                A[p][q] = A[q][p] = 0.0
                if want_vectors:
                    for k in range(d):
                        vkp = V[k][p]
                        vkq = V[k][q]
                        V[k][p] = c * vkp - s * vkq
                        V[k][q] = s * vkp + c * vkq
    if not converged:
        raise EigenConvergenceError(
            f"Jacobi sweeps exhausted ({_MAX_SWEEPS}) on matrix {a.tolist()!r}"
        )
    w = [A[i][i] for i in range(d)]
    order = sorted(range(d), key=w.__getitem__)
    w_sorted = [w[i] for i in order]
    if not want_vectors:
        return w_sorted, None
    q = np.empty((d, d))
    for col, src in enumerate(order):
        best = 0
        vals = [V[k][src] for k in range(d)]
        for k in range(1, d):
            if abs(vals[k]) > abs(vals[best]):
                best = k
        sign = -1.0 if vals[best] < 0.0 else 1.0
        for k in range(d):
            q[k, col] = sign * vals[k]
    return w_sorted, q


def _eig(a: np.ndarray, want_vectors: bool = True):
    """Array-level eigendecomposition; no wrapper validation."""
    return _jacobi(a, want_vectors)


_SCALAR_MAPS = {
    "sqrt": math.sqrt,
    "inv_sqrt": lambda x: 1.0 / math.sqrt(x),
    "log": math.log,
    "exp": math.exp,
    "inv": lambda x: 1.0 / x,
}
_POSITIVE_DOMAIN = {"sqrt", "inv_sqrt", "log", "inv", "pow"}


def _apply(w, q: np.ndarray, fn: str, t: float | None = None) -> np.ndarray:
    """Assemble Q f(diag(w)) Q^T for a scalar map tag."""
    if fn == "pow":
        if t is None:
            raise ValueError("matrix function 'pow' needs an exponent")
        fw = [x ** t for x in w]
    else:
        try:
            f = _SCALAR_MAPS[fn]
        except KeyError:
            raise ValueError(f"unknown matrix function tag {fn!r}") from None
        fw = [f(x) for x in w]
    m = (q * np.asarray(fw)) @ q.T
    return (m + m.T) / 2.0


def _fn(a: np.ndarray, fn: str, t: float | None = None) -> np.ndarray:
    """Array-level spectral map with domain check."""
    w, q = _jacobi(a, True)
    if fn in _POSITIVE_DOMAIN and w[0] <= 0.0:
        raise SpectralDomainError(fn, w[0])
    return _apply(w, q, fn, t)


def eigh(a: SymMatrix) -> SpectralDecomposition:
    """Full spectral decomposition, validated against the input.

    Raises EigenConvergenceError if the factorization does not reproduce the
    matrix to within 1e-10 * (1 + ||A||_F).
    """
    w, q = _jacobi(a.entries, True)
    dec = SpectralDecomposition(np.asarray(w), q)
    recon = (q * np.asarray(w)) @ q.T
    err = frobenius(recon - a.entries)
    if err > _DECOMP_TOL * (1.0 + frobenius(a)):
        raise EigenConvergenceError(
            f"decomposition residual {err:.3e} on matrix {a.entries.tolist()!r}"
        )
    return dec


def matrix_fn(a: SymMatrix, fn: str, t: float | None = None) -> SymMatrix:
    """Apply a scalar map to the spectrum: one of sqrt, inv_sqrt, log, exp,
    inv, or pow with exponent t.

    All maps except exp require a strictly positive spectrum.
    """
    return SymMatrix(_fn(a.entries, fn, t))


def congruence(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    """Two-sided product b a b for symmetric a, b."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")
    return SymMatrix(b.entries @ a.entries @ b.entries)
