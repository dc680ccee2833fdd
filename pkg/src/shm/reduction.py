"""Condensed-SVD variable substitution for the dual problem, and a check on it.

The projector is factored as ``G = U_r S_r V_r^T`` with ``S_r = I``, and each
multiplier's coefficient becomes ``c_i = d_i * sum_q u_iq``. The reduced dual

    Q_red(a) = -1/2 sum_ij a_i a_j c_i c_j K_ij + sum_i a_i

is implemented exactly as stated. For rank 1 it coincides with the full dual
``-1/2 a^T (dd^T o K o G) a + e^T a``; for higher rank the cross terms
``u_iq u_jp`` (q != p) enter ``c_i c_j`` but not ``g_ij``, so the two
differ. ``consistency_report`` measures that gap on random multipliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RidgedProjector, ShapeMismatch
from .linalg import DEFAULT_RANK_TOL, CondensedSvd, as_vector, condensed_svd
from .train import GramProjector, hessian

SIGN_CONVENTION = "largest-magnitude entry of each U column positive, lowest index on ties"
PASS_TOL = 1e-10


@dataclass(frozen=True)
class ReducedProblem:
    c: np.ndarray
    rank: int
    k: np.ndarray
    svd: CondensedSvd
    upper: float | None = None


def reduce(gp: GramProjector, d, k, rank_tol: float = DEFAULT_RANK_TOL,
           upper: float | None = None) -> ReducedProblem:
    if gp.ridge_used != 0:
        raise RidgedProjector(
            f"projector was built with ridge {gp.ridge_used:g}; the substitution needs an exact projector"
        )
    d = as_vector(d, "d")
    k = np.asarray(k, dtype=float)
    n = gp.g.shape[0]
    if d.shape != (n,) or k.shape != (n, n):
        raise ShapeMismatch("labels / kernel matrix do not match the projector size")
    svd = condensed_svd(gp.g, rank_tol)
    c = d * svd.u.sum(axis=1)
    return ReducedProblem(c=c, rank=svd.rank, k=k, svd=svd, upper=upper)


def reduced_objective(rp: ReducedProblem, alpha) -> float:
    alpha = as_vector(alpha, "alpha")
    if alpha.shape != rp.c.shape:
        raise ShapeMismatch("alpha length differs from the reduced problem")
    ac = alpha * rp.c
    return float(-0.5 * ac @ rp.k @ ac + alpha.sum())


def full_objective(gp: GramProjector, d, k, alpha) -> float:
    alpha = as_vector(alpha, "alpha")
    return float(-0.5 * alpha @ hessian(d, k, gp.g) @ alpha + alpha.sum())


@dataclass(frozen=True)
class ConsistencyReport:
    rank: int
    samples: int
    seed: int | None
    max_gap: float
    mean_gap: float
    singular_values: tuple
    sign_convention: str = SIGN_CONVENTION

    @property
    def passed(self) -> bool:
        return self.max_gap <= PASS_TOL

    def to_text(self) -> str:
        svals = " ".join(f"{s:.17g}" for s in self.singular_values)
        lines = [
            f"rank: {self.rank}",
            f"singular_values: {svals}",
            f"samples: {self.samples}",
            f"seed: {self.seed}",
            f"max_gap: {self.max_gap:.6e}",
            f"mean_gap: {self.mean_gap:.6e}",
            f"sign_convention: {self.sign_convention}",
            f"status: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def consistency_report(rp: ReducedProblem, gp: GramProjector, d, k,
                       alpha_samples: int = 100, seed: int | None = 0,
                       alpha_scale: float = 1.0) -> ConsistencyReport:
    """Compare reduced and full dual objectives on seeded random ``alpha >= 0``.

    Multipliers are drawn uniformly from ``[0, alpha_scale)`` (capped at the
    box when one is set).
    """
    rng = np.random.default_rng(seed)
    n = rp.c.shape[0]
    gaps = []
    for _ in range(alpha_samples):
        alpha = alpha_scale * rng.random(n)
        if rp.upper is not None and math.isfinite(rp.upper):
            alpha = np.minimum(alpha, rp.upper)
        gaps.append(abs(reduced_objective(rp, alpha) - full_objective(gp, d, k, alpha)))
    gaps = np.asarray(gaps)
    return ConsistencyReport(
        rank=rp.rank,
        samples=alpha_samples,
        seed=seed,
        max_gap=float(gaps.max()) if gaps.size else 0.0,
        mean_gap=float(gaps.mean()) if gaps.size else 0.0,
        singular_values=tuple(float(s) for s in rp.svd.s),
    )
