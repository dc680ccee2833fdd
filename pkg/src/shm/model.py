"""Trained SHM model: recognizing function, classification, supporting hyperplanes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .errors import DimensionMismatch, KernelModeUnsupported, ZeroNormVector

if TYPE_CHECKING:
    from .train import KernelSpec, TrainingSet

LINEAR_EXPLICIT = "linear-explicit"
KERNEL_EXPANSION = "kernel-expansion"


class ShmWeights(NamedTuple):
    w: np.ndarray
    w0: np.ndarray
    b: float


class HyperplaneCoeffs(NamedTuple):
    """Line/plane ``normal . y + offset = 0`` through one support vector."""

    normal: np.ndarray
    offset: float
    support_index: int


@dataclass(frozen=True)
class TrainMeta:
    ridge_used: float = 0.0
    objective: float = math.nan
    qp_mode: str = "script"
    c: float = math.inf
    sv_cut: float = 1e-4
    kkt_residual: float = math.nan
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class ShmModel:
    """Immutable trained model.

    The support expansion (``sv_*`` arrays, one column/entry per multiplier
    with ``alpha > 0``, ``sv_index`` giving the training position) is always
    kept. Linear-kernel models additionally carry ``w`` (m x Z) and ``w0``
    and predict through them.
    """

    kernel: "KernelSpec"
    inv_xxt: np.ndarray
    b: float
    sv_index: np.ndarray
    sv_x: np.ndarray
    sv_y: np.ndarray
    sv_d: np.ndarray
    sv_alpha: np.ndarray
    w: np.ndarray | None = None
    w0: np.ndarray | None = None
    meta: TrainMeta = field(default_factory=TrainMeta)

    def __post_init__(self):
        if np.any(self.sv_alpha <= 0):
            raise ValueError("stored multipliers must be positive")
        if (self.w is None) != (self.w0 is None):
            raise ValueError("w and w0 must be given together")

    @property
    def mode(self) -> str:
        return LINEAR_EXPLICIT if self.w is not None else KERNEL_EXPANSION

    @property
    def m(self) -> int:
        return self.inv_xxt.shape[0]

    @property
    def z(self) -> int:
        return self.sv_y.shape[0]

    @property
    def weights(self) -> ShmWeights | None:
        if self.w is None:
            return None
        return ShmWeights(self.w, self.w0, self.b)

    @property
    def support_mask(self) -> np.ndarray:
        """Which stored multipliers count as support vectors (``alpha >= sv_cut``)."""
        return self.sv_alpha >= self.meta.sv_cut

    def _inputs(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[:, None]
            y = y.reshape(-1, 1)
        if x.shape[0] != self.m or y.shape[0] != self.z or x.shape[1] != y.shape[1]:
            raise DimensionMismatch(
                f"expected x with {self.m} rows and y with {self.z} rows, "
                f"got {x.shape} and {y.shape}"
            )
        return x, y, single

    def decide(self, x, y, path: str | None = None):
        """Recognizing function ``h(x, y)``.

        ``x``/``y`` are single vectors or matrices whose columns are examples.
        ``path`` selects ``"explicit"`` (``x^T W y + w0^T x + b``, linear
        models only) or ``"expansion"``
        (``sum_i a_i d_i (k(y_i, y) + 1) x_i^T (XX^T)^-1 x + b``); by default
        the model's own mode decides.
        """
        x, y, single = self._inputs(x, y)
        if path is None:
            path = "explicit" if self.w is not None else "expansion"
        if path == "explicit":
            if self.w is None:
                raise KernelModeUnsupported("kernel models have no explicit weights")
            h = np.einsum("ji,jk,ki->i", x, self.w, y) + self.w0 @ x + self.b
        elif path == "expansion":
            kv = self.kernel.evaluate(self.sv_y, y) + 1.0
            proj = self.sv_x.T @ (self.inv_xxt @ x)
            h = (self.sv_alpha * self.sv_d) @ (kv * proj) + self.b
        else:
            raise ValueError(f"unknown path {path!r}")
        return float(h[0]) if single else h

    def classify(self, x, y):
        """Sign of ``h``; an exact zero is classified as +1."""
        h = self.decide(x, y)
        if np.ndim(h) == 0:
            return 1 if h >= 0 else -1
        return np.where(h >= 0, 1, -1)

    def supporting_hyperplanes(self) -> list[HyperplaneCoeffs]:
        """``normal = x_i^T W`` and ``offset = w0^T x_i + b - d_i`` per support vector."""
        if self.w is None:
            raise KernelModeUnsupported("hyperplane coefficients need a linear-kernel model")
        out = []
        for col in np.flatnonzero(self.support_mask):
            xi = self.sv_x[:, col]
            out.append(HyperplaneCoeffs(
                normal=xi @ self.w,
                offset=float(self.w0 @ xi + self.b - self.sv_d[col]),
                support_index=int(self.sv_index[col]),
            ))
        return out

    def margins(self, ts: "TrainingSet") -> np.ndarray:
        """Signed distance ``d_i / |[w0^T x_i, x_i^T W]|`` for every example."""
        if self.w is None:
            raise KernelModeUnsupported("margins need a linear-kernel model")
        if ts.m != self.m or ts.z != self.z:
            raise DimensionMismatch("training set dimensions differ from the model")
        rows = np.hstack([(ts.x.T @ self.w0)[:, None], ts.x.T @ self.w])
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms == 0):
            bad = int(np.flatnonzero(norms == 0)[0])
            raise ZeroNormVector(f"example {bad} has a zero weight row")
        return ts.d / norms
