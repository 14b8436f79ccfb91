"""
The exact sigma_1 calibration of a flat torus homotopy class.

For f: T^m -> T^n with f^*[dy] = P^T [dx] the form Phi = sum P_i^j dx^i ^ *dy_j
pulls back along the graph to <P, df> vol_g, where

    <A, B> = tr(A^T G^{-1} B H)

on m x n arrays. Everything here takes differentials in the n x m layout of Q
and converts through the transpose.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from energy_densities import LinearMapData, metric_whiten, schatten_p
from torus_lab.spec import TorusMapSpec, TorusSpecError
from utils import config
from utils.rng import map_chunks
from utils.serialization import matrix_to_json

EQUALITY_SCALES = (0.5, 1.0, 3.0)


def metric_inner(spec: TorusMapSpec, a: np.ndarray, b: np.ndarray) -> float:
    """<A^T, B^T> = tr(G^{-1} A^T H B) for n x m differentials A, B."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != (spec.n, spec.m) or b.shape != (spec.n, spec.m):
        raise TorusSpecError(f"expected {spec.n}x{spec.m} matrices, got {a.shape} and {b.shape}")
    return float(np.trace(spec.G_inv @ a.T @ spec.H @ b))


def p_norm_squared(spec: TorusMapSpec) -> float:
    """
    |P|^2 = tr(P^T G^{-1} P H) with P = Q^T.

    Positive iff Q != 0, since G^{-1} and H are positive definite.
    """
    return metric_inner(spec, spec.Q, spec.Q)


def pairing(spec: TorusMapSpec, a: np.ndarray) -> float:
    """
    <P, A^T>: the value of (1, f)^* Phi / vol_g where df = A.

    Args:
        spec: Torus map (only G, H, Q are used)
        a: n x m differential

    Returns:
        tr(G^{-1} A^T H Q)
    """
    return metric_inner(spec, a, spec.Q)


def sigma1(spec: TorusMapSpec, a: np.ndarray) -> float:
    """|A|_2 under the metrics (G, H): sqrt(tr(G^{-1} A^T H A))."""
    return schatten_p(LinearMapData(a, spec.G, spec.H), 2.0)


def pairing_batch(spec: TorusMapSpec, a: np.ndarray) -> np.ndarray:
    """pairing over a stack (..., n, m): sum_ab A_ab (H Q G^{-1})_ab."""
    weight = spec.H @ spec.Q @ spec.G_inv
    return np.sum(np.asarray(a, dtype=float) * weight, axis=(-2, -1))


def sigma1_batch(spec: TorusMapSpec, a: np.ndarray) -> np.ndarray:
    """sigma1 over a stack (..., n, m)."""
    whitened = metric_whiten(a, spec.G, spec.H)
    return np.sqrt(np.sum(whitened ** 2, axis=(-2, -1)))


@dataclass
class CalibrationSweepReport:
    trials: int
    p_norm: float
    min_margin: float
    failures: int
    equality_residual: float
    negative_gap: float
    worst_case: Optional[List[List[float]]] = None
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "pNorm": self.p_norm,
            "minMargin": self.min_margin,
            "failures": self.failures,
            "equalityResidual": self.equality_residual,
            "negativeGap": self.negative_gap,
            "worstCase": self.worst_case,
            "pass": self.passed,
        }


def sigma1_calibration_sweep(
    spec: TorusMapSpec,
    trials: int,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    tol: float = config.REL_TOL,
) -> CalibrationSweepReport:
    """
    Check <P, A> <= |P| sigma_1(A) on Gaussian differentials.

    The linear lift is the equality witness: A = lambda Q gives equality for
    lambda >= 0, while A = -Q misses the bound by 2 |P|^2.

    Args:
        spec: Torus map with Q != 0
        trials: Number of random differentials
        seed: Root seed
        workers: Thread count
        tol: Allowed normalized violation

    Returns:
        CalibrationSweepReport
    """
    norm_sq = p_norm_squared(spec)
    if norm_sq <= 0.0:
        raise TorusSpecError("Q = 0: the pullback in cohomology vanishes and Phi is zero")
    norm = float(np.sqrt(norm_sq))

    def chunk(rng, size, _index):
        a = rng.standard_normal((size, spec.n, spec.m))
        bound = norm * sigma1_batch(spec, a)
        margins = (bound - pairing_batch(spec, a)) / (1.0 + bound)
        worst = int(np.argmin(margins))
        return float(margins[worst]), int(np.sum(margins < -tol)), a[worst]

    results = map_chunks(chunk, trials, seed, workers)
    min_margin, failures, worst_case = np.inf, 0, None
    for margin, fails, a in results:
        failures += fails
        if margin < min_margin:
            min_margin, worst_case = margin, a

    residual = 0.0
    for scale in EQUALITY_SCALES:
        a = scale * spec.Q
        bound = norm * sigma1(spec, a)
        residual = max(residual, abs(bound - pairing(spec, a)) / (1.0 + bound))
    negative_gap = norm * sigma1(spec, -spec.Q) - pairing(spec, -spec.Q)

    return CalibrationSweepReport(
        trials=trials,
        p_norm=norm,
        min_margin=float(min_margin) if results else 0.0,
        failures=failures,
        equality_residual=residual,
        negative_gap=float(negative_gap),
        worst_case=matrix_to_json(worst_case) if failures and worst_case is not None else None,
        passed=failures == 0 and residual <= 1e-12 and negative_gap > 0.0,
    )
