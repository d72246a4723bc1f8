"""Residual-based classification over block-labeled dictionaries.

Two coding routes produce the coefficient vector: the closed-form ridge
projector (the production path, one matrix-vector product per observation)
and an l1-regularized solve (monotone accelerated proximal gradient, the
sparse baseline). Either way the label is the class whose block best
reconstructs the observation, measured by the l2 residual with all other
coefficients zeroed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary, Projector, apply_center
from .errors import DimensionMismatch, NonConvergenceWarning


@dataclass(frozen=True)
class Coefficients:
    """Coding coefficients over the dictionary columns."""

    x_hat: np.ndarray
    solver: str  # "ridge" | "l1"
    iterations: int = 0
    converged: bool = True


@dataclass(frozen=True)
class ClassResiduals:
    """Per-class reconstruction residuals, the winning class and the margin."""

    classes: tuple[str, ...]
    residuals: np.ndarray
    best: str
    margin: float

    def residual_of(self, label: str) -> float:
        return float(self.residuals[self.classes.index(label)])


@dataclass(frozen=True)
class RecognitionResult:
    label: str
    residuals: ClassResiduals
    coefficients: Coefficients


def crc_code(y: np.ndarray, d: Dictionary, p: Projector) -> Coefficients:
    """Ridge coefficients via the precomputed projector: exact solution of
    the l2-regularized least-squares coding problem."""
    yc = apply_center(d, y)
    if p.P.shape[1] != yc.size:
        raise DimensionMismatch(
            f"projector expects length {p.P.shape[1]}, got {yc.size}"
        )
    return Coefficients(x_hat=p.P @ yc, solver="ridge", iterations=0)


def class_residuals(
    y: np.ndarray,
    d: Dictionary,
    coefficients: Coefficients,
    normalize_by_coef: bool = False,
) -> ClassResiduals:
    """Residual per class block, keeping only that block's coefficients.

    Residuals are computed in the centered space when the dictionary is
    centered. ``normalize_by_coef`` divides each residual by the block's
    coefficient norm (a variant some pipelines use); it is off by default.
    Ties break toward the lowest class index.
    """
    x = coefficients.x_hat
    if x.size != d.A.shape[1]:
        raise DimensionMismatch(f"coefficients length {x.size} != cols {d.A.shape[1]}")
    yc = apply_center(d, y)
    classes = tuple(d.blocks.keys())
    residuals = np.empty(len(classes))
    for i, lab in enumerate(classes):
        start, stop = d.blocks[lab]
        recon = d.A[:, start:stop] @ x[start:stop]
        r = float(np.linalg.norm(yc - recon))
        if normalize_by_coef:
            r /= max(float(np.linalg.norm(x[start:stop])), 1e-300)
        residuals[i] = r
    best_idx = int(np.argmin(residuals))
    if len(classes) > 1:
        margin = float(np.partition(residuals, 1)[1] - residuals[best_idx])
    else:
        margin = float("inf")
    return ClassResiduals(
        classes=classes,
        residuals=residuals,
        best=classes[best_idx],
        margin=margin,
    )


def crc_classify(y: np.ndarray, d: Dictionary, p: Projector) -> RecognitionResult:
    coeffs = crc_code(y, d, p)
    res = class_residuals(y, d, coeffs)
    return RecognitionResult(label=res.best, residuals=res, coefficients=coeffs)


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _l1_objective(A: np.ndarray, y: np.ndarray, x: np.ndarray, lam: float) -> float:
    r = y - A @ x
    return 0.5 * float(r @ r) + lam * float(np.abs(x).sum())


def kkt_violation(A: np.ndarray, y: np.ndarray, x: np.ndarray, lam: float) -> float:
    """Max violation of the l1 optimality conditions at x."""
    g = A.T @ (y - A @ x)
    on = x != 0
    viol = 0.0
    if np.any(~on):
        viol = float(np.maximum(np.abs(g[~on]) - lam, 0.0).max())
    if np.any(on):
        viol = max(viol, float(np.abs(g[on] - lam * np.sign(x[on])).max()))
    return viol


def l1_solve(
    y: np.ndarray,
    d: Dictionary,
    lambda_l1: float | None = None,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> Coefficients:
    """l1-regularized coding by monotone accelerated proximal gradient.

    Fixed step 1/L with L the largest Gram eigenvalue; the monotone variant
    keeps the iterate with the smaller objective, so the recorded objective
    never increases. Stops when the relative objective change drops below
    ``tol``. Hitting ``max_iter`` with a KKT violation above 10 * tol flags
    the result as non-converged (a warning, not an error: streaming callers
    need an answer every frame).
    """
    yc = apply_center(d, y)
    A = d.A
    if A.shape[0] != yc.size:
        raise DimensionMismatch(f"observation length {yc.size} != rows {A.shape[0]}")
    if lambda_l1 is None:
        lambda_l1 = 0.1 * float(np.abs(A.T @ yc).max())
    if lambda_l1 <= 0:
        raise ValueError("lambda_l1 must be > 0")

    L = d.gram_spectral_norm()
    step = 1.0 / max(L, 1e-300)
    n = A.shape[1]
    x = np.zeros(n)
    z = x
    t = 1.0
    f_x = _l1_objective(A, yc, x, lambda_l1)
    it = 0
    for it in range(1, max_iter + 1):
        grad = A.T @ (A @ z - yc)
        u = _soft_threshold(z - step * grad, step * lambda_l1)
        f_u = _l1_objective(A, yc, u, lambda_l1)
        if f_u > f_x:
            # overshoot from the extrapolated point: restart the momentum at
            # the last accepted iterate (a plain proximal step cannot increase)
            z = x
            t = 1.0
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = u + ((t - 1.0) / t_next) * (u - x)
        change = f_x - f_u
        x, t, f_x = u, t_next, f_u
        if change <= tol * max(1.0, abs(f_x)) and it > 1:
            return Coefficients(x_hat=x, solver="l1", iterations=it)

    converged = True
    viol = kkt_violation(A, yc, x, lambda_l1)
    if viol > 10.0 * tol:
        converged = False
        warnings.warn(
            f"l1 solve hit max_iter={max_iter} with KKT violation {viol:.2e}",
            NonConvergenceWarning,
        )
    return Coefficients(x_hat=x, solver="l1", iterations=it, converged=converged)


def src_classify(
    y: np.ndarray,
    d: Dictionary,
    lambda_l1: float | None = None,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> RecognitionResult:
    """Sparse-coding classification: l1 coefficients, then residual argmin."""
    coeffs = l1_solve(y, d, lambda_l1=lambda_l1, max_iter=max_iter, tol=tol)
    res = class_residuals(y, d, coeffs)
    return RecognitionResult(label=res.best, residuals=res, coefficients=coeffs)
