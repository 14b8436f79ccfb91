"""
Cohomological lower bound for E_k on flat tori.

Harmonic k-forms on T^m are the constant forms dx_I, and dy_J is a bounded
closed basis on T^n. f^*[dy_J] = sum_I det(Q[J, I]) [dx_I], so the degree-k
pullback matrix is the transposed k-th compound of Q. Pairing with the
harmonic basis and bounding each entry by the loose sigma_k constant gives

    E_k(f) >= lambda (sum_ij C_ij^2)^{-1/2} |P_k|

with lambda the smallest eigenvalue of the L^2 Gram matrix.
"""

from typing import Any, Dict, Optional

import numpy as np

from calibration_verify import lemma41_constant
from exterior_algebra import MetricData, compound_matrix, gram_matrix
from torus_lab.energy import energy_quadrature
from torus_lab.spec import TorusMapSpec, TorusSpecError
from utils import config


def cohomology_bound(spec: TorusMapSpec, k: int, measured_energy: Optional[float] = None) -> Dict[str, Any]:
    """
    Lower bound for E_k over the homotopy class of spec.

    Args:
        spec: Torus map (only G, H, Q are used)
        k: Degree, 1 <= k <= m
        measured_energy: Optional E_k of a descent run on the same class

    Returns:
        {k, bound, linearEnergy, ratio, lambda, pullbackNorm, measuredEnergy, pass}
    """
    m, n = spec.m, spec.n
    if not 1 <= k <= m:
        raise TorusSpecError(f"degree k must lie in 1..{m}, got {k}", "$.k")

    gram = gram_matrix(m, k, MetricData(spec.G)) * spec.sqrt_det_g
    lam = float(np.linalg.eigvalsh(0.5 * (gram + gram.T))[0])

    if k > n:
        # Lambda^k of the target vanishes
        pullback_norm, c_norm, bound = 0.0, 0.0, 0.0
    else:
        pullback = compound_matrix(spec.Q, k).T
        pullback_norm = float(np.linalg.norm(pullback))
        src_norms = np.sqrt(np.diag(gram_matrix(m, k, MetricData(spec.G))))
        tgt_norms = np.sqrt(np.diag(gram_matrix(n, k, MetricData(spec.H))))
        c = lemma41_constant(m, n, k) * np.outer(src_norms, tgt_norms)
        c_norm = float(np.linalg.norm(c))
        bound = lam * pullback_norm / c_norm

    linear = energy_quadrature(spec, 2.0, float(k), np.zeros(spec.field_shape))
    passed = bound <= linear * (1.0 + config.REL_TOL)
    if measured_energy is not None:
        passed = passed and bound <= measured_energy * (1.0 + config.REL_TOL)
    return {
        "k": k,
        "bound": bound,
        "linearEnergy": linear,
        "ratio": bound / linear if linear > 0 else 0.0,
        "lambda": lam,
        "pullbackNorm": pullback_norm,
        "constantNorm": c_norm,
        "measuredEnergy": measured_energy,
        "pass": passed,
    }
