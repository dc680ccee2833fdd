"""Dual quadratic program solver.

Solves::

    min  1/2 a^T H a + q^T a
    s.t. 0 <= a_i <= C           (C may be infinite)
         sum_i a_i d_i = 0       (only when labels are given)

and reports the maximised dual value ``Q(a) = -(1/2 a^T H a + q^T a)``; for the
SHM dual ``q = -e`` so ``Q(a) = e^T a - 1/2 a^T H a``.

Without the equality constraint the solver runs cyclic projected coordinate
descent (closed-form clipped coordinate steps, sweep order 0..N-1). With it,
SMO-style pair updates on the maximal violating pair are used. In both cases
the iterate is periodically "polished": once the active pattern (which
multipliers sit at 0, at C, or strictly between) stops changing, the reduced
equality-constrained linear system for that pattern is solved directly and
the result is accepted if it is feasible and does not lower the objective.
That step removes the slow tail of coordinate methods on degenerate H.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndefiniteHessian, InfeasibleBox, QpFailure, ShapeMismatch, TooLarge
from .linalg import as_matrix, as_vector, check_symmetric, min_eigenvalue_bound

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10**6
PSD_TOL = 1e-6
ORACLE_MAX_N = 10

LOWER, FREE, UPPER = 0, 1, 2


@dataclass
class QpProblem:
    h: np.ndarray
    linear: np.ndarray | None = None
    d: np.ndarray | None = None
    upper: float | None = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        self.h = as_matrix(self.h, "H")
        n = self.h.shape[0]
        check_symmetric(self.h)
        if self.linear is None:
            self.linear = -np.ones(n)
        else:
            self.linear = as_vector(self.linear, "linear term")
        if self.linear.shape != (n,):
            raise ShapeMismatch("linear term length differs from H")
        if self.d is not None:
            self.d = as_vector(self.d, "labels")
            if self.d.shape != (n,):
                raise ShapeMismatch("label vector length differs from H")
            if not np.all(np.abs(self.d) == 1.0):
                raise ValueError("labels must be -1 or +1")
        if self.upper is not None:
            if math.isnan(self.upper):
                raise InfeasibleBox("upper bound is NaN")
            if self.upper < 0:
                raise InfeasibleBox(f"upper bound C={self.upper} is negative")
            if math.isinf(self.upper):
                self.upper = None

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def cap(self) -> float:
        return math.inf if self.upper is None else float(self.upper)

    def objective(self, alpha) -> float:
        """Maximised dual value ``-(1/2 a^T H a + q^T a)``."""
        alpha = np.asarray(alpha, dtype=float)
        return float(-(0.5 * alpha @ self.h @ alpha + self.linear @ alpha))

    def gradient(self, alpha) -> np.ndarray:
        return self.h @ alpha + self.linear

    def kkt_residual(self, alpha, grad=None) -> float:
        """Largest KKT violation at ``alpha`` (0 at an exact optimum).

        Without the equality constraint this is the projected-gradient norm
        ``max |a - clip(a - g, 0, C)|``. With it, the equality multiplier is
        chosen optimally and half the maximal-violating-pair gap is
        returned, together with the equality violation.
        """
        g = self.gradient(alpha) if grad is None else grad
        cap = self.cap
        if self.d is None:
            return float(np.max(np.abs(alpha - np.clip(alpha - g, 0.0, cap)), initial=0.0))
        up, low = _up_low(alpha, self.d, cap)
        score = -self.d * g
        if not up.any() or not low.any():
            gap = 0.0
        else:
            gap = max(0.0, float(score[up].max() - score[low].min()))
        return max(0.5 * gap, abs(float(self.d @ alpha)))


@dataclass
class QpSolution:
    alpha: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _up_low(alpha, d, cap):
    below = alpha < cap
    above = alpha > 0
    up = (below & (d > 0)) | (above & (d < 0))
    low = (above & (d > 0)) | (below & (d < 0))
    return up, low


def _pattern(alpha, cap) -> tuple:
    return tuple(LOWER if a <= 0 else (UPPER if a >= cap else FREE) for a in alpha)


def solve_pattern(p: QpProblem, pattern) -> tuple[np.ndarray, float] | None:
    """Solve the stationarity system with the given active pattern fixed.

    Returns ``(alpha, nu)`` where ``nu`` is the equality multiplier (0 when
    there is no equality constraint), or None when the reduced system is
    inconsistent. Bounds on the free entries are not enforced here.
    """
    pattern = np.asarray(pattern)
    cap = p.cap
    alpha = np.zeros(p.n)
    upper = pattern == UPPER
    if upper.any():
        if not math.isfinite(cap):
            return None
        alpha[upper] = cap
    free = np.flatnonzero(pattern == FREE)
    fixed = np.flatnonzero(pattern != FREE)
    rhs = -p.linear[free] - p.h[np.ix_(free, fixed)] @ alpha[fixed]
    nu = 0.0
    if p.d is None:
        if free.size:
            a = p.h[np.ix_(free, free)]
            sol = np.linalg.lstsq(a, rhs, rcond=None)[0]
            if not _consistent(a, sol, rhs):
                return None
            alpha[free] = sol
    else:
        k = free.size
        a = np.zeros((k + 1, k + 1))
        a[:k, :k] = p.h[np.ix_(free, free)]
        a[:k, k] = p.d[free]
        a[k, :k] = p.d[free]
        b = np.append(rhs, -p.d[fixed] @ alpha[fixed])
        sol = np.linalg.lstsq(a, b, rcond=None)[0]
        if not _consistent(a, sol, b):
            return None
        alpha[free] = sol[:k]
        nu = float(sol[k])
    return alpha, nu


def _consistent(a, x, b) -> bool:
    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)),
                float(np.max(np.abs(a), initial=0.0)) * float(np.max(np.abs(x), initial=0.0)))
    return float(np.max(np.abs(a @ x - b), initial=0.0)) <= 1e-9 * scale


def _polish(p: QpProblem, alpha: np.ndarray, pattern) -> np.ndarray | None:
    res = solve_pattern(p, pattern)
    if res is None:
        return None
    cand = res[0]
    slack = 1e-9 * max(1.0, float(np.max(np.abs(cand), initial=0.0)))
    if np.any(cand < -slack) or np.any(cand > p.cap + slack):
        return None
    cand = np.clip(cand, 0.0, p.cap)
    if p.d is not None and abs(float(p.d @ cand)) > p.tol:
        return None
    if p.objective(cand) < p.objective(alpha) - 1e-12 * max(1.0, abs(p.objective(alpha))):
        return None
    return cand


def _validate(p: QpProblem) -> None:
    if p.n and min_eigenvalue_bound(p.h) < -PSD_TOL:
        raise IndefiniteHessian("H has a negative eigenvalue below -1e-6")


def solve(p: QpProblem, record_history: bool = False) -> QpSolution:
    """Solve the box/equality constrained dual QP.

    A run that hits ``max_iter`` returns the last iterate with
    ``converged=False``. Raises QpFailure when the objective is unbounded.
    """
    _validate(p)
    if p.d is None:
        return _coordinate_descent(p, record_history)
    return _smo(p, record_history)


def _coordinate_descent(p: QpProblem, record_history: bool) -> QpSolution:
    n, h, cap = p.n, p.h, p.cap
    alpha = np.zeros(n)
    g = p.linear.copy()
    diag = np.diag(h).copy()
    tiny = 1e-14 * max(1.0, float(np.max(np.abs(diag), initial=0.0)))
    history = [p.objective(alpha)] if record_history else []
    last_pattern = None
    polished = None
    residual = p.kkt_residual(alpha, g)
    sweeps = 0
    while residual > p.tol and sweeps < p.max_iter:
        sweeps += 1
        for i in range(n):
            gi = g[i]
            if diag[i] > tiny:
                new = min(max(alpha[i] - gi / diag[i], 0.0), cap)
            elif gi < 0:
                if not math.isfinite(cap):
                    raise QpFailure(f"dual objective unbounded along coordinate {i}")
                new = cap
            else:
                new = 0.0
            step = new - alpha[i]
            if step != 0.0:
                alpha[i] = new
                g += step * h[:, i]
        pattern = _pattern(alpha, cap)
        if pattern == last_pattern and pattern != polished:
            polished = pattern
            cand = _polish(p, alpha, pattern)
            if cand is not None:
                alpha = cand
                g = p.gradient(alpha)
        last_pattern = pattern
        residual = p.kkt_residual(alpha, g)
        if record_history:
            history.append(p.objective(alpha))
    return QpSolution(alpha=alpha, objective=p.objective(alpha), kkt_residual=residual,
                      iterations=sweeps, converged=residual <= p.tol, history=history)


def _smo(p: QpProblem, record_history: bool) -> QpSolution:
    n, h, d, cap = p.n, p.h, p.d, p.cap
    alpha = np.zeros(n)
    g = p.linear.copy()
    history = [p.objective(alpha)] if record_history else []
    last_pattern = None
    polished = None
    iterations = 0
    while iterations < p.max_iter:
        up, low = _up_low(alpha, d, cap)
        if not up.any() or not low.any():
            break
        score = -d * g
        # np.argmax / argmin return the lowest index on ties
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        gap = score[i] - score[j]
        if 0.5 * gap <= p.tol:
            break
        iterations += 1
        curv = h[i, i] + h[j, j] - 2.0 * d[i] * d[j] * h[i, j]
        t = gap / curv if curv > 1e-14 * max(1.0, h[i, i] + h[j, j]) else math.inf
        room_i = cap - alpha[i] if d[i] > 0 else alpha[i]
        room_j = alpha[j] if d[j] > 0 else cap - alpha[j]
        t = min(t, room_i, room_j)
        if not math.isfinite(t):
            raise QpFailure("dual objective unbounded (data not separable under hard margin?)")
        alpha[i] += t * d[i]
        alpha[j] -= t * d[j]
        # snap to the bound that limited the step
        if t == room_i:
            alpha[i] = cap if d[i] > 0 else 0.0
        if t == room_j:
            alpha[j] = 0.0 if d[j] > 0 else cap
        g += t * (d[i] * h[:, i] - d[j] * h[:, j])
        if iterations % max(n, 1) == 0:
            pattern = _pattern(alpha, cap)
            if pattern == last_pattern and pattern != polished:
                polished = pattern
                cand = _polish(p, alpha, pattern)
                if cand is not None:
                    alpha = cand
                    g = p.gradient(alpha)
            last_pattern = pattern
        if record_history:
            history.append(p.objective(alpha))
    residual = p.kkt_residual(alpha, g)
    return QpSolution(alpha=alpha, objective=p.objective(alpha), kkt_residual=residual,
                      iterations=iterations, converged=residual <= p.tol, history=history)


def brute_force_oracle(p: QpProblem) -> QpSolution:
    """Exhaustive active-set search, for testing ``solve`` on small problems.

    Every multiplier is tried at its lower bound, free, and (when the box is
    finite) at its upper bound. For each pattern the reduced stationarity
    system is solved; feasible points satisfying the sign conditions of the
    bound multipliers are KKT points, hence global optima of the convex QP.
    The best objective among them is returned.
    """
    if p.n > ORACLE_MAX_N:
        raise TooLarge(f"oracle limited to N <= {ORACLE_MAX_N}, got {p.n}")
    _validate(p)
    cap = p.cap
    states = (LOWER, FREE, UPPER) if math.isfinite(cap) else (LOWER, FREE)
    scale = max(1.0, float(np.max(np.abs(p.h), initial=0.0)))
    best = None
    best_obj = -math.inf
    for pattern in itertools.product(states, repeat=p.n):
        res = solve_pattern(p, pattern)
        if res is None:
            continue
        alpha, nu = res
        amax = max(1.0, float(np.max(np.abs(alpha), initial=0.0)))
        feas = 1e-9 * amax
        if np.any(alpha < -feas) or np.any(alpha > cap + feas):
            continue
        alpha = np.clip(alpha, 0.0, cap)
        if p.d is not None and abs(float(p.d @ alpha)) > 1e-9 * amax:
            continue
        g = p.gradient(alpha)
        if p.d is not None:
            g = g + nu * p.d
        tol = 1e-8 * scale * amax
        pat = np.asarray(pattern)
        if np.any(g[pat == LOWER] < -tol) or np.any(g[pat == UPPER] > tol):
            continue
        obj = p.objective(alpha)
        if obj > best_obj:
            best, best_obj = alpha, obj
    if best is None:
        raise QpFailure("no KKT point found; the problem is unbounded or infeasible")
    return QpSolution(alpha=best, objective=best_obj, kkt_residual=p.kkt_residual(best),
                      iterations=0, converged=True)
