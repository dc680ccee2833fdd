"""Training data model and the SHM training pipeline.

Pipeline for a training set ``{(x_i, y_i, d_i)}`` with inputs ``X`` (m x N),
transformed inputs ``Y`` (Z x N) and labels ``d``:

1. covariance ``XX^T`` and its (possibly ridged) inverse
2. projector ``G = X^T (XX^T)^-1 X``
3. kernel matrix ``K_ij = k(y_i, y_j) + 1``
4. Hessian ``H = (d d^T) o K o G``
5. dual QP ``min 1/2 a^T H a - e^T a`` over the configured constraints
6. weights ``W``, ``w0`` (linear kernel) and threshold ``b``
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import qp
from .errors import (
    DegenerateModel,
    NoPositiveSupportVector,
    NotConverged,
    ShapeMismatch,
    SingularAfterRegularization,
    SingularCovariance,
)
from .linalg import as_matrix, as_vector, hadamard, regularized_inverse, symmetrize
from .model import ShmModel, TrainMeta

QP_MODES = ("script", "kkt")
# support vectors are the multipliers surviving floor(alpha * 1e4) / 1e4 != 0
TRUNCATION_CUT = 1e-4


@dataclass(frozen=True)
class TrainingSet:
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.x, "x")
        y = as_matrix(self.y, "y")
        d = as_vector(self.d, "d")
        n = d.shape[0]
        if x.shape[1] != n or y.shape[1] != n:
            raise ShapeMismatch(
                f"x has {x.shape[1]} columns, y has {y.shape[1]}, d has {n} labels"
            )
        if n < 2:
            raise ValueError("need at least two training examples")
        if not np.all((d == 1.0) | (d == -1.0)):
            raise ValueError("labels must be exactly -1 or +1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def z(self) -> int:
        return self.y.shape[0]

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel on the transformed inputs.

    ``linear``: ``y^T y'``; ``polynomial``: ``(y^T y' + offset) ** degree``;
    ``rbf``: ``exp(-gamma * |y - y'|^2)``. The trainer always adds 1.
    """

    kind: str = "linear"
    degree: int = 2
    offset: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "polynomial", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError("polynomial degree must be a positive integer")
            if not math.isfinite(self.offset):
                raise ValueError("polynomial offset must be finite")
        if self.kind == "rbf" and not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("rbf gamma must be a positive real")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int, offset: float = 1.0):
        return cls("polynomial", degree=int(degree), offset=float(offset))

    @classmethod
    def rbf(cls, gamma: float):
        return cls("rbf", gamma=float(gamma))

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse ``linear``, ``poly:D:R`` or ``rbf:G``."""
        parts = text.strip().split(":")
        try:
            if parts[0] == "linear" and len(parts) == 1:
                return cls.linear()
            if parts[0] in ("poly", "polynomial") and len(parts) == 3:
                return cls.polynomial(int(parts[1]), float(parts[2]))
            if parts[0] == "rbf" and len(parts) == 2:
                return cls.rbf(float(parts[1]))
        except ValueError as exc:
            raise ValueError(f"bad kernel spec {text!r}: {exc}") from None
        raise ValueError(f"bad kernel spec {text!r}; expected linear, poly:D:R or rbf:G")

    def __str__(self):
        if self.kind == "linear":
            return "linear"
        if self.kind == "polynomial":
            return f"poly:{self.degree}:{self.offset!r}"
        return f"rbf:{self.gamma!r}"

    def evaluate(self, a, b) -> np.ndarray:
        """Kernel values between the columns of ``a`` and the columns of ``b``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == "rbf":
            sq = (np.sum(a * a, axis=0)[:, None] + np.sum(b * b, axis=0)[None, :]
                  - 2.0 * (a.T @ b))
            return np.exp(-self.gamma * np.maximum(sq, 0.0))
        gram = a.T @ b
        if self.kind == "linear":
            return gram
        return (gram + self.offset) ** self.degree


@dataclass(frozen=True)
class GramProjector:
    inv_xxt: np.ndarray
    g: np.ndarray
    ridge_used: float


@dataclass(frozen=True)
class TrainConfig:
    """Trainer settings.

    ``qp_mode='script'`` keeps only ``alpha >= 0`` (plus the box when ``c`` is
    finite) and is what reproduces the published worked example;
    ``qp_mode='kkt'`` adds ``sum_i alpha_i d_i = 0``.
    """

    ridge: float = 0.0
    c: float = math.inf
    qp_mode: str = "script"
    sv_truncation: bool = True
    sv_tol: float = 1e-8
    tol: float = qp.DEFAULT_TOL
    max_iter: int = qp.DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.qp_mode not in QP_MODES:
            raise ValueError(f"qp_mode must be one of {QP_MODES}")
        if not self.c > 0:
            raise ValueError("c must be positive (use inf for hard margin)")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")

    def support_cut(self, alpha) -> float:
        """Smallest multiplier that still counts as a support vector."""
        if self.sv_truncation:
            return TRUNCATION_CUT
        return self.sv_tol * max(1.0, float(np.max(alpha, initial=0.0)))


def projector(x, ridge: float = 0.0) -> GramProjector:
    x = as_matrix(x, "x")
    m, n = x.shape
    if m > n:
        warnings.warn(f"m={m} exceeds N={n}; XX^T is singular and will be ridged",
                      stacklevel=2)
    try:
        inv, lam = regularized_inverse(symmetrize(x @ x.T), ridge)
    except SingularAfterRegularization as exc:
        raise SingularCovariance(str(exc)) from exc
    g = symmetrize(x.T @ inv @ x)
    return GramProjector(inv_xxt=inv, g=g, ridge_used=lam)


def kernel_matrix(y, spec: KernelSpec | None = None) -> np.ndarray:
    y = as_matrix(y, "y")
    spec = spec or KernelSpec.linear()
    if spec.kind == "linear":
        return y.T @ y + 1.0
    return symmetrize(spec.evaluate(y, y)) + 1.0


def hessian(d, k, g) -> np.ndarray:
    d = as_vector(d, "d")
    k = np.asarray(k, dtype=float)
    g = np.asarray(g, dtype=float)
    n = d.shape[0]
    if k.shape != (n, n):
        raise ShapeMismatch(f"kernel matrix is {k.shape}, expected {(n, n)}")
    return hadamard(hadamard(np.outer(d, d), k), g)


def recover_weights(ts: TrainingSet, gp: GramProjector, alpha):
    """``W = (XX^T)^-1 sum_i a_i d_i x_i y_i^T`` and ``w0 = (XX^T)^-1 sum_i a_i d_i x_i``."""
    alpha = as_vector(alpha, "alpha")
    if alpha.shape != (ts.n,):
        raise ShapeMismatch(f"alpha has length {alpha.shape[0]}, expected {ts.n}")
    ad = alpha * ts.d
    w = gp.inv_xxt @ ((ts.x * ad) @ ts.y.T)
    w0 = gp.inv_xxt @ (ts.x @ ad)
    return w, w0


def raw_scores(ts: TrainingSet, w, w0) -> np.ndarray:
    """``x_i^T W y_i + w0^T x_i`` for every training example (no threshold)."""
    return np.einsum("ji,jk,ki->i", ts.x, w, ts.y) + w0 @ ts.x


def recover_threshold(ts: TrainingSet, alpha, raw, cut: float = TRUNCATION_CUT,
                      upper: float = math.inf) -> float:
    """Threshold from the first positive support vector in training order.

    ``raw`` holds the decision values without threshold at the training
    points. The chosen example is put on its supporting hyperplane
    ``h = +1``, so ``b = 1 - raw_i``. With a finite box, multipliers at the
    bound are skipped because their margin constraint need not be active.
    """
    alpha = as_vector(alpha, "alpha")
    raw = as_vector(raw, "raw")
    ok = (ts.d > 0) & (alpha >= cut)
    if math.isfinite(upper):
        ok &= alpha < upper * (1.0 - 1e-9)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise NoPositiveSupportVector("no support vector with label +1")
    i = int(idx[0])
    return float(1.0 - raw[i])


def train(ts: TrainingSet, spec: KernelSpec | None = None,
          cfg: TrainConfig | None = None) -> ShmModel:
    spec = spec or KernelSpec.linear()
    cfg = cfg or TrainConfig()
    gp = projector(ts.x, cfg.ridge)
    k = kernel_matrix(ts.y, spec)
    h = hessian(ts.d, k, gp.g)
    problem = qp.QpProblem(
        h,
        d=ts.d if cfg.qp_mode == "kkt" else None,
        upper=None if math.isinf(cfg.c) else cfg.c,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )
    sol = qp.solve(problem)
    if not sol.converged:
        raise NotConverged(
            f"QP stopped after {sol.iterations} iterations, KKT residual {sol.kkt_residual:.3g}",
            solution=sol,
        )
    alpha = sol.alpha
    if not np.any(alpha > 0):
        raise DegenerateModel("all Lagrange multipliers are zero")
    cut = cfg.support_cut(alpha)

    if spec.kind == "linear":
        w, w0 = recover_weights(ts, gp, alpha)
        raw = raw_scores(ts, w, w0)
    else:
        w = w0 = None
        raw = ts.d * (h @ alpha)
    b = recover_threshold(ts, alpha, raw, cut, cfg.c)

    keep = np.flatnonzero(alpha > 0)
    meta = TrainMeta(
        ridge_used=gp.ridge_used,
        objective=sol.objective,
        qp_mode=cfg.qp_mode,
        c=cfg.c,
        sv_cut=cut,
        kkt_residual=sol.kkt_residual,
        iterations=sol.iterations,
    )
    return ShmModel(
        kernel=spec,
        inv_xxt=gp.inv_xxt,
        b=b,
        sv_index=keep,
        sv_x=ts.x[:, keep],
        sv_y=ts.y[:, keep],
        sv_d=ts.d[keep],
        sv_alpha=alpha[keep],
        w=w,
        w0=w0,
        meta=meta,
    )
