"""Small dense-matrix helpers on top of numpy.

Matrices are plain 2-D float64 ``numpy.ndarray`` objects. The helpers here add
the validation and the regularization policy the trainer relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    NotSymmetric,
    ShapeMismatch,
    SingularAfterRegularization,
)

SYMMETRY_TOL = 1e-10
DEFAULT_COND_LIMIT = 1e12
DEFAULT_RANK_TOL = 1e-10
# ridge ladder: base * 10**k for k in range(RIDGE_STEPS)
RIDGE_BASE = 1e-12
RIDGE_STEPS = 25


def as_matrix(a, name="matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float array, raising ValueError otherwise."""
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def as_vector(v, name="vector") -> np.ndarray:
    out = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains NaN or Inf")
    return out


def check_symmetric(a: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy of a nearly symmetric matrix."""
    return 0.5 * (a + a.T)


def _condition(a: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(a))
    except np.linalg.LinAlgError:
        return np.inf


def regularized_inverse(a, ridge: float = 0.0, cond_limit: float = DEFAULT_COND_LIMIT):
    """Invert a symmetric matrix, adding a ridge ``lam * I`` when needed.

    With ``ridge > 0`` that ridge is used as is. With ``ridge == 0`` the
    matrix is inverted unchanged when its 2-norm condition number is at most
    ``cond_limit``; otherwise ``lam`` climbs the ladder
    ``1e-12 * trace(a) / n * 10**k`` until the condition is restored.

    Returns
    -------
    (inverse, lam)
        The symmetric inverse of ``a + lam * I`` and the ridge actually used.
    """
    a = as_matrix(a)
    check_symmetric(a)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    n = a.shape[0]
    eye = np.eye(n)

    if ridge > 0:
        candidates = [float(ridge)]
    else:
        base = RIDGE_BASE * float(np.trace(a)) / n
        candidates = [0.0]
        if base > 0:
            candidates += [base * 10.0**k for k in range(RIDGE_STEPS)]

    for lam in candidates:
        shifted = a + lam * eye
        if ridge == 0 and _condition(shifted) > cond_limit:
            continue
        try:
            inv = np.linalg.inv(shifted)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(inv)):
            return symmetrize(inv), lam
    raise SingularAfterRegularization(
        "matrix stays singular or ill-conditioned after ridge escalation"
    )


@dataclass(frozen=True)
class CondensedSvd:
    """Rank-truncated SVD ``a ~= u @ diag(s) @ v.T``.

    Columns are sign-normalised: in each column of ``u`` the entry of largest
    magnitude is positive (lowest index wins ties), and ``v`` follows.
    Reconstruction error is bounded by the largest dropped singular value,
    i.e. at most ``rank_tol * s[0]`` per unit vector.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.s.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def condensed_svd(a, rank_tol: float = DEFAULT_RANK_TOL) -> CondensedSvd:
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tol * s[0]))
    u = u[:, :r].copy()
    v = vt[:r, :].T.copy()
    for q in range(r):
        # argmax returns the first index on ties
        k = int(np.argmax(np.abs(u[:, q])))
        if u[k, q] < 0:
            u[:, q] = -u[:, q]
            v[:, q] = -v[:, q]
    return CondensedSvd(u=u, s=s[:r].copy(), v=v)


def hadamard(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"hadamard: shapes {a.shape} and {b.shape} differ")
    return a * b


def min_eigenvalue_bound(a) -> float:
    """Smallest eigenvalue of a symmetric matrix (symmetric eigensolver)."""
    a = as_matrix(a)
    check_symmetric(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(symmetrize(a))[0])
