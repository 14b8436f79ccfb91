"""
Tangent-plane checks for calibrated submanifolds and calibrated fibrations.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from calibration_verify.errors import FrameError
from energy_densities import LinearMapData, tau_tilde
from exterior_algebra import (
    KForm,
    complement,
    compound_matrix,
    evaluate,
    index_array,
    index_lookup,
    merge_sign,
    multi_index_basis,
    pullback,
    wedge,
)
from utils import config
from utils.rng import random_frames


def check_orthonormal(frame: np.ndarray, tol: float = config.FRAME_TOL) -> np.ndarray:
    """Raise FrameError unless the columns of `frame` are orthonormal to `tol`."""
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2 or frame.shape[1] > frame.shape[0]:
        raise FrameError(f"expected an n x m frame with m <= n, got shape {frame.shape}")
    residual = float(np.max(np.abs(frame.T @ frame - np.eye(frame.shape[1])))) if frame.size else 0.0
    if residual > tol:
        raise FrameError(f"frame is not orthonormal (residual {residual:.3e})")
    return frame


def wirtinger_check(frame: np.ndarray, psi: KForm) -> float:
    """
    Margin of the calibration inequality psi|_V <= vol_V on one oriented plane.

    Args:
        frame: n x m matrix whose columns are an orthonormal basis of V
        psi: Degree-m form on R^n

    Returns:
        1 - psi(frame); nonnegative whenever psi has comass <= 1
    """
    frame = check_orthonormal(frame)
    if frame.shape != (psi.m, psi.k):
        raise FrameError(f"frame of shape {frame.shape} does not fit a degree-{psi.k} form on R^{psi.m}")
    return 1.0 - float(evaluate(psi, frame))


def comass_estimate(phi: KForm, samples: int, rng: np.random.Generator) -> float:
    """
    Sampled lower estimate of the comass sup |phi(xi)| over unit simple k-vectors.

    Args:
        phi: Degree-k form
        samples: Number of random orthonormal k-frames
        rng: Generator

    Returns:
        max |phi(frame)| over the samples (0.0 for samples = 0)
    """
    if phi.k == 0:
        return float(abs(phi.coeffs[0]))
    if samples <= 0:
        return 0.0
    values = evaluate(phi, random_frames(rng, phi.m, phi.k, samples))
    return float(np.max(np.abs(values)))


def plane_form(frame: np.ndarray) -> KForm:
    """
    The k-form phi(V) = det(W^T V) dual to an oriented orthonormal k-frame W.
    It has comass 1 and calibrates exactly the plane of W.
    """
    frame = check_orthonormal(frame)
    m, k = frame.shape
    return KForm(m, k, compound_matrix(frame, k)[:, 0])


def fibration_weights(phi: KForm, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Minor selections and weights with (A^* vol_Y ^ phi) / vol = dets @ weights,
    where dets = submatrix_dets(A, rows, cols) for n x m maps A.

    The weight of the column set I is sign(I, I^c) phi_{I^c}.
    """
    m = phi.m
    if phi.k != m - n:
        raise FrameError(f"phi must have degree {m - n}, got {phi.k}")
    sources = multi_index_basis(m, n)
    lookup = index_lookup(m, phi.k)
    weights = np.array(
        [merge_sign(index, complement(m, index)) * phi.coeffs[lookup[complement(m, index)]] for index in sources]
    )
    cols = index_array(m, n)
    rows = np.tile(np.arange(n, dtype=np.intp), (len(sources), 1))
    return rows, cols, weights


@dataclass
class FibrationResult:
    lhs: float
    rhs: float
    fiber_value: Optional[float]
    calibrated: bool
    comass: Optional[float] = None

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "fiberValue": self.fiber_value,
            "calibrated": self.calibrated,
            "comass": self.comass,
        }


def adapted_frame(a: np.ndarray) -> Optional[np.ndarray]:
    """
    Oriented orthonormal frame (H, K) of R^m for a surjective n x m map:
    H spans the row space with det(A H) > 0, K spans ker A, det([H K]) > 0.

    Returns:
        m x m matrix [H K], or None when rank(A) < n
    """
    n, m = a.shape
    _, singular, vt = np.linalg.svd(a)
    scale = max(1.0, float(singular[0])) if singular.size else 1.0
    if singular.size < n or float(singular[-1]) <= config.FRAME_TOL * scale:
        return None
    frame = vt.T.copy()
    if np.linalg.det(a @ frame[:, :n]) < 0:
        frame[:, 0] *= -1.0
    if np.linalg.det(frame) < 0:
        frame[:, n] *= -1.0
    return frame


def fibration_check(
    a: np.ndarray,
    phi: KForm,
    vol_scale: float = 1.0,
    precondition_samples: int = 256,
    seed: int = config.DEFAULT_SEED,
    tol: float = config.MARGIN_TOL,
) -> FibrationResult:
    """
    Pointwise tau_tilde calibration of Phi = f^* vol_Y ^ phi.

    In the adapted frame (H, K) the left side factors as
    vol_Y(A H) phi(K) = tau_tilde(A) phi(K), so equality holds exactly when
    phi takes the value 1 on the oriented kernel.

    Args:
        a: n x m matrix, m > n
        phi: Degree (m - n) form on R^m of comass <= 1
        vol_scale: Coefficient of vol_Y on e^{1..n}
        precondition_samples: Random frames used to check comass(phi) <= 1 (0 skips)
        seed: Seed for the comass sample
        tol: Tolerance for the comass and calibrated-fiber tests

    Returns:
        FibrationResult
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise FrameError(f"expected a matrix, got shape {a.shape}")
    n, m = a.shape
    if m <= n:
        raise FrameError(f"fibration check needs m > n, got m={m}, n={n}")
    if phi.m != m or phi.k != m - n:
        raise FrameError(f"phi must be a degree-{m - n} form on R^{m}, got degree {phi.k} on R^{phi.m}")

    comass = None
    if precondition_samples > 0:
        comass = comass_estimate(phi, precondition_samples, np.random.default_rng(seed))
        if comass > 1.0 + tol:
            raise FrameError(f"phi is not a calibration: sampled comass {comass:.6f} > 1")

    vol_y = KForm(n, n, [vol_scale])
    lhs = float(wedge(pullback(a, vol_y), phi).coeffs[0])
    rhs = tau_tilde(LinearMapData.identity(a), vol_scale)

    frame = adapted_frame(a)
    if frame is None:
        return FibrationResult(lhs, rhs, None, False, comass)
    fiber_value = float(evaluate(phi, frame[:, n:]))
    return FibrationResult(lhs, rhs, fiber_value, abs(fiber_value - 1.0) <= tol, comass)
