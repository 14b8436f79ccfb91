"""
Randomized verification suites behind `calibra verify` and `calibra oracles`.

Every suite runs through utils.rng.map_chunks: chunk i draws from its own
seeded substream and picks its shapes from its index, so a report depends only
on (suite, trials, seed).
"""

import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.special import factorial

from calibration_verify.kahler import (
    kahler_mixed_form,
    kahler_orientation,
    kahler_power,
    split_norms,
    standard_complex_structure,
)
from calibration_verify.mixed import MixedForm, evaluate_mixed, evaluate_mixed_batch, graph_oracle, lemma41_constant
from calibration_verify.submanifolds import fibration_check, fibration_weights, plane_form
from energy_densities import batch_singular_values
from exterior_algebra import KForm, basis_size, compound_matrix, evaluate, index_array, pullback, submatrix_dets
from local_models import random_unitary
from utils import config
from utils.rng import map_chunks, random_frames, random_orthogonal
from utils.serialization import matrix_to_json

SUITES = ("lichnerowicz", "wirtinger", "fibration", "amgm", "lemma41")

# complex dimensions (m, n) for the Lichnerowicz identities
LICHNEROWICZ_SHAPES = ((1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3), (3, 3))
# (q, p): degree-2p planes in C^q against omega^p / p!
WIRTINGER_SHAPES = ((2, 1), (3, 1), (3, 2), (4, 2), (4, 3))
# (m, n) with fibers of dimension m - n
FIBRATION_SHAPES = ((3, 1), (4, 1), (4, 2), (5, 2), (5, 3), (6, 2), (6, 4))
LEMMA41_SHAPES = tuple(
    (m, n, k) for m in range(1, 7) for n in range(1, 7) for k in range(1, min(3, m, n) + 1)
)
WITNESSES_PER_CHUNK = 16


@dataclass
class SuiteReport:
    suite: str
    trials: int
    min_margin: float
    failures: int
    worst_case: Optional[Dict[str, Any]] = None
    extras: Dict[str, float] = field(default_factory=dict)
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "minMargin": self.min_margin,
            "failures": self.failures,
            "worstCase": self.worst_case,
            "extras": self.extras,
            "pass": self.passed,
        }


@dataclass
class _ChunkResult:
    margin: float
    failures: int
    worst: Dict[str, Any]
    extras: Dict[str, float]


def _rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar sample from SO(dim)."""
    o = random_orthogonal(rng, dim)
    if np.linalg.det(o) < 0:
        o[:, 0] *= -1.0
    return o


def _chunk_summary(margins: np.ndarray, failed: np.ndarray, inputs: Callable[[int], Dict[str, Any]], extras) -> _ChunkResult:
    worst = int(np.argmin(margins))
    return _ChunkResult(float(margins[worst]), int(np.sum(failed)), inputs(worst), extras)


def _lichnerowicz_chunk(rng, size, index, tol):
    m, n = LICHNEROWICZ_SHAPES[index % len(LICHNEROWICZ_SHAPES)]
    J_s, J_t = standard_complex_structure(m), standard_complex_structure(n)
    # odd chunks conjugate the structures by random orthogonal frames
    if index % 2:
        o_s, o_t = random_orthogonal(rng, 2 * m), random_orthogonal(rng, 2 * n)
        J_s, J_t = o_s @ J_s @ o_s.T, o_t @ J_t @ o_t.T
    mixed = kahler_mixed_form(m, n, J_src=J_s, J_tgt=J_t)
    orientation = kahler_orientation(J_s)
    factor = orientation * float(factorial(m - 1, exact=True))

    a = rng.standard_normal((size, 2 * n, 2 * m))
    d_sq, dbar_sq = split_norms(a, J_s, J_t)
    energy = np.sum(a ** 2, axis=(1, 2))
    pairing = evaluate_mixed_batch(mixed, a)
    residual = np.maximum(
        np.abs(energy - 2.0 * d_sq - 2.0 * dbar_sq),
        np.abs(pairing - factor * (d_sq - dbar_sq)),
    ) / (1.0 + energy)

    linear = 0.5 * (a - J_t @ a @ J_s)
    _, linear_dbar = split_norms(linear, J_s, J_t)

    def inputs(i):
        return {"A": matrix_to_json(a[i]), "J_src": matrix_to_json(J_s), "J_tgt": matrix_to_json(J_t)}

    return _chunk_summary(-residual, residual > tol, inputs, {"maxComplexLinearDbar": float(np.max(linear_dbar))})


def _wirtinger_chunk(rng, size, index, tol):
    q, p = WIRTINGER_SHAPES[index % len(WIRTINGER_SHAPES)]
    psi = kahler_power(q, p)
    frames = random_frames(rng, 2 * q, 2 * p, size)
    margins = 1.0 - evaluate(psi, frames)
    failed = (margins < -tol) | (margins > 2.0 + tol)

    # complex subspaces spanned by (u_1, J u_1, ..., u_p, J u_p)
    equality = 0.0
    for _ in range(WITNESSES_PER_CHUNK):
        frame = random_unitary(q, rng)[:, : 2 * p]
        equality = max(equality, abs(1.0 - float(evaluate(psi, frame))))

    def inputs(i):
        return {"frame": matrix_to_json(frames[i]), "q": q, "p": p}

    return _chunk_summary(margins, failed, inputs, {"maxMargin": float(np.max(margins)), "equalityResidual": equality})


def _fibration_chunk(rng, size, index, tol):
    m, n = FIBRATION_SHAPES[index % len(FIBRATION_SHAPES)]
    frame = _rotation(rng, m)
    phi = plane_form(frame[:, n:])
    rows, cols, weights = fibration_weights(phi, n)

    a = rng.standard_normal((size, n, m))
    lhs = submatrix_dets(a, rows, cols) @ weights
    rhs = np.prod(batch_singular_values(a), axis=1)
    margins = (rhs - lhs) / (1.0 + rhs)

    # A = B H^T with det B > 0 has the oriented plane of phi as its kernel
    equality = 0.0
    for _ in range(WITNESSES_PER_CHUNK):
        b = rng.standard_normal((n, n))
        if np.linalg.det(b) < 0:
            b[0] *= -1.0
        result = fibration_check(b @ frame[:, :n].T, phi, precondition_samples=0)
        fiber_gap = 1.0 if result.fiber_value is None else abs(result.fiber_value - 1.0)
        equality = max(equality, abs(result.rhs - result.lhs) / (1.0 + result.rhs), fiber_gap)

    comass = float(np.max(np.abs(evaluate(phi, random_frames(rng, m, m - n, 256)))))

    def inputs(i):
        return {"A": matrix_to_json(a[i]), "phi": matrix_to_json(phi.coeffs)}

    return _chunk_summary(margins, margins < -tol, inputs, {"equalityResidual": equality, "maxComass": comass})


def _amgm_chunk(rng, size, index, tol):
    m = index % 6 + 1
    a = rng.standard_normal((size, m, m))
    lhs = np.linalg.det(a)
    rhs = (np.sum(batch_singular_values(a), axis=1) / m) ** m
    margins = (rhs - lhs) / (1.0 + np.abs(rhs))

    equality = 0.0
    for _ in range(WITNESSES_PER_CHUNK):
        scaled = 3.0 * rng.random() * _rotation(rng, m)
        det = float(np.linalg.det(scaled))
        bound = float((np.sum(np.linalg.svd(scaled, compute_uv=False)) / m) ** m)
        equality = max(equality, abs(bound - det) / (1.0 + bound))

    def inputs(i):
        return {"A": matrix_to_json(a[i])}

    return _chunk_summary(margins, margins < -tol, inputs, {"equalityResidual": equality})


def _lemma41_chunk(rng, size, index, tol):
    m, n, k = LEMMA41_SHAPES[index % len(LEMMA41_SHAPES)]
    phis = rng.standard_normal((size, basis_size(m, k), basis_size(n, k)))
    a = rng.standard_normal((size, n, m))
    lhs = np.einsum("sij,sji->s", phis, compound_matrix(a, k))
    sup = np.sqrt(np.sum(phis ** 2, axis=(1, 2)))
    scale = sup * np.linalg.norm(a, axis=(1, 2)) ** k
    rhs = lemma41_constant(m, n, k) * scale
    margins = (rhs - lhs) / (1.0 + rhs)
    sharper = float(np.max(np.abs(lhs) / np.where(scale > 0, scale, 1.0)))

    def inputs(i):
        return {"Phi": matrix_to_json(phis[i]), "A": matrix_to_json(a[i]), "k": k}

    return _chunk_summary(margins, margins < -tol, inputs, {"sharperConstant": sharper})


_CHUNKS = {
    "lichnerowicz": (_lichnerowicz_chunk, config.REL_TOL),
    "wirtinger": (_wirtinger_chunk, config.REL_TOL),
    "fibration": (_fibration_chunk, config.MARGIN_TOL),
    "amgm": (_amgm_chunk, config.REL_TOL),
    "lemma41": (_lemma41_chunk, config.REL_TOL),
}

# extras that gate the verdict: key -> largest allowed value
_EXTRA_LIMITS = {
    "lichnerowicz": {"maxComplexLinearDbar": 1e-14},
    "wirtinger": {"equalityResidual": config.REL_TOL},
    "fibration": {"equalityResidual": config.MARGIN_TOL, "maxComass": 1.0 + config.MARGIN_TOL},
    "amgm": {"equalityResidual": config.REL_TOL},
    "lemma41": {},
}


def _reduce(name: str, trials: int, results: List[_ChunkResult]) -> SuiteReport:
    min_margin, failures, worst = np.inf, 0, None
    extras: Dict[str, float] = {}
    for chunk in results:
        failures += chunk.failures
        if chunk.margin < min_margin:
            min_margin, worst = chunk.margin, chunk.worst
        for key, value in chunk.extras.items():
            extras[key] = max(extras.get(key, -np.inf), value)

    limits = _EXTRA_LIMITS.get(name, {})
    extras_ok = all(extras.get(key, 0.0) <= limit for key, limit in limits.items())
    return SuiteReport(
        suite=name,
        trials=trials,
        min_margin=float(min_margin) if results else 0.0,
        failures=failures,
        worst_case=worst if failures else None,
        extras=extras,
        passed=failures == 0 and extras_ok,
    )


def run_suite(
    name: str,
    trials: int,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    debug: bool = False,
) -> SuiteReport:
    """
    Run one verification suite.

    Args:
        name: One of SUITES
        trials: Number of random inputs
        seed: Root seed
        workers: Thread count (does not change the result)
        debug: Print progress to stderr

    Returns:
        SuiteReport with minMargin, failures, worstCase and suite extras
    """
    if name not in _CHUNKS:
        raise ValueError(f"unknown suite '{name}' (expected one of {', '.join(SUITES)})")
    chunk_fn, tol = _CHUNKS[name]
    if debug:
        print(f"📡 verify {name}: {trials} trials...", file=sys.stderr)

    results = map_chunks(lambda rng, size, index: chunk_fn(rng, size, index, tol), trials, seed, workers)
    report = _reduce(name, trials, results)

    if debug:
        status = "✅" if report.passed else "❌"
        print(f"{status} verify {name}: minMargin={report.min_margin:.3e} failures={report.failures}", file=sys.stderr)
    return report


def _oracle_chunk(rng, size, _index, tol):
    mixed_err, mixed_worst = 0.0, None
    pull_err, pull_worst = 0.0, None
    failures = 0
    for _ in range(size):
        m, n = (int(v) for v in rng.integers(1, 6, size=2))
        k = int(rng.integers(1, min(3, m, n) + 1))
        phi = MixedForm(m, n, k, rng.standard_normal((basis_size(m, k), basis_size(n, k))))
        a = rng.standard_normal((n, m))
        fast, slow = evaluate_mixed(phi, a), graph_oracle(phi, a)
        err = abs(fast - slow) / (1.0 + abs(slow))
        failures += int(err > tol)
        if err >= mixed_err:
            mixed_err, mixed_worst = err, {"Phi": matrix_to_json(phi.coeffs), "A": matrix_to_json(a), "k": k}

        k = int(rng.integers(1, min(m, n) + 1))
        beta = KForm(n, k, rng.standard_normal(basis_size(n, k)))
        # beta(A e_{i_1}, ..., A e_{i_k}) for every increasing I
        direct = evaluate(beta, np.transpose(a[:, index_array(m, k)], (1, 0, 2)))
        err = float(np.max(np.abs(pullback(a, beta).coeffs - direct) / (1.0 + np.abs(direct))))
        failures += int(err > tol)
        if err >= pull_err:
            pull_err, pull_worst = err, {"beta": matrix_to_json(beta.coeffs), "A": matrix_to_json(a), "k": k}
    return mixed_err, mixed_worst, pull_err, pull_worst, failures


def oracle_suite(
    trials: int,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    tol: float = config.REL_TOL,
    debug: bool = False,
) -> SuiteReport:
    """
    Cross-check the fast kernels against brute-force expansions.

    evaluate_mixed is compared with the graph-frame oracle, and the
    compound-matrix pullback with direct multilinear evaluation on basis tuples.

    Args:
        trials: Random instances per oracle
        seed: Root seed
        workers: Thread count
        tol: Relative tolerance
        debug: Print progress to stderr

    Returns:
        SuiteReport named "oracles"; minMargin is minus the largest relative error
    """
    if debug:
        print(f"📡 oracles: {trials} instances per kernel...", file=sys.stderr)
    results = map_chunks(lambda rng, size, index: _oracle_chunk(rng, size, index, tol), trials, seed, workers)

    mixed_err, pull_err, worst = 0.0, 0.0, None
    worst_err, failures = -1.0, 0
    for m_err, m_worst, p_err, p_worst, fails in results:
        failures += fails
        mixed_err, pull_err = max(mixed_err, m_err), max(pull_err, p_err)
        for err, case in ((m_err, m_worst), (p_err, p_worst)):
            if err > worst_err:
                worst_err, worst = err, case

    largest = max(mixed_err, pull_err)
    report = SuiteReport(
        suite="oracles",
        trials=trials,
        min_margin=-largest,
        failures=failures,
        worst_case=worst if failures else None,
        extras={"mixedMaxRelError": mixed_err, "pullbackMaxRelError": pull_err},
        passed=failures == 0,
    )
    if debug:
        status = "✅" if report.passed else "❌"
        print(f"{status} oracles: mixed={mixed_err:.2e} pullback={pull_err:.2e}", file=sys.stderr)
    return report
