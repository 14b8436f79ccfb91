"""Determinant bound behind the tau_m / sigma_{1,m} comparison."""

from typing import Tuple

import numpy as np

from exterior_algebra import DomainError


def amgm_det_check(a: np.ndarray) -> Tuple[float, float]:
    """
    det(A) <= m^{-m} |A|_1^m, with |A|_1 the sum of singular values.

    Equality holds at A = lambda * U with lambda >= 0 and U in SO(m).

    Args:
        a: m x m matrix

    Returns:
        (det A, m^{-m} |A|_1^m)
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"determinant bound needs a square matrix, got shape {a.shape}")
    m = a.shape[0]
    if m == 0:
        return 1.0, 1.0
    singular = np.linalg.svd(a, compute_uv=False)
    return float(np.linalg.det(a)), float((np.sum(singular) / m) ** m)
