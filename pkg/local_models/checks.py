"""
Numerical checks on the local models: constancy of |iota_u phi0|^2 on the
unit sphere, the pullback inequality

    <A^* phi0, phi0> <= (|phi0|^2 / m) |A|_k^k

with its equality cases, and a structural gate per geometry.
"""

import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from energy_densities import batch_singular_values
from exterior_algebra import (
    KForm,
    hodge_star,
    index_array,
    interior_matrix,
    pullback,
    submatrix_dets,
    wedge,
)
from local_models.models import (
    ModelForm,
    complex_structure_of,
    induced_g2_metric,
    quaternionic_triple,
)
from utils import config
from utils.rng import map_chunks, unit_vectors
from utils.serialization import matrix_to_json

EQUALITY_SCALES = (0.0, 0.5, 1.0, 3.0)


@dataclass
class IotaReport:
    tag: str
    samples: int
    constant: float
    max_deviation: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "samples": self.samples,
            "constant": self.constant,
            "maxDeviation": self.max_deviation,
            "pass": self.passed,
        }


@dataclass
class Prop53Report:
    tag: str
    trials: int
    min_margin: float  # min of (rhs - lhs) / (1 + rhs)
    failures: int
    worst_case: Optional[List[List[float]]] = None
    equality_residual: float = 0.0
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "trials": self.trials,
            "minMargin": self.min_margin,
            "failures": self.failures,
            "worstCase": self.worst_case,
            "equalityResidual": self.equality_residual,
            "pass": self.passed,
        }


@dataclass
class StructureReport:
    name: str
    residual: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "residual": self.residual, "pass": self.passed}


@dataclass
class UnitaryReport:
    trials: int
    max_form_residual: float
    max_margin_residual: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "maxFormResidual": self.max_form_residual,
            "maxMarginResidual": self.max_margin_residual,
            "pass": self.passed,
        }


def check_iota_constancy(
    model: ModelForm,
    samples: int,
    tol: float = config.MARGIN_TOL,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
) -> IotaReport:
    """
    Sample unit vectors u and compare |iota_u phi0|^2 with the model constant.

    Args:
        model: Local model
        samples: Number of unit vectors
        tol: Allowed deviation
        seed: Root seed
        workers: Thread count

    Returns:
        IotaReport with the largest observed deviation
    """
    contraction = interior_matrix(model.form)

    def chunk(rng, size, _index):
        u = unit_vectors(rng, size, model.m)
        values = np.sum((u @ contraction) ** 2, axis=1)
        return float(np.max(np.abs(values - model.iota_const_sq)))

    deviations = map_chunks(chunk, samples, seed, workers)
    worst = max(deviations) if deviations else 0.0
    return IotaReport(model.label, samples, model.iota_const_sq, worst, worst <= tol)


def prop53_terms(model: ModelForm, a: np.ndarray) -> Tuple[float, float]:
    """
    (lhs, rhs) with lhs vol = A^* phi0 ^ *phi0 and rhs = (|phi0|^2/m) |A|_k^k.
    """
    a = np.asarray(a, dtype=float)
    top = wedge(pullback(a, model.form), hodge_star(model.form))
    lhs = float(top.coeffs[0])
    singular = np.linalg.svd(a, compute_uv=False)
    rhs = model.norm_sq / model.m * float(np.sum(singular ** model.k))
    return lhs, rhs


def verify_prop53(model: ModelForm, a: np.ndarray) -> float:
    """Margin rhs - lhs of the pullback inequality at one matrix."""
    lhs, rhs = prop53_terms(model, a)
    return rhs - lhs


def sigma_kk_calibration_value(model: ModelForm, a: np.ndarray) -> Tuple[float, float]:
    """
    Pointwise sides of the sigma_{k,k} calibration inequality.

    Returns:
        ((m / |phi0|^2) <A^* phi0, phi0>, |A|_k^k)
    """
    lhs, rhs = prop53_terms(model, a)
    return model.m / model.norm_sq * lhs, model.m / model.norm_sq * rhs


def pairing_batch(form: KForm, a: np.ndarray) -> np.ndarray:
    """
    <A^* phi, phi> for a stack of square matrices (N, m, m).

    Only minors with rows and columns in the support of phi are formed.
    """
    support = np.flatnonzero(form.coeffs)
    idx = index_array(form.m, form.k)[support]
    count = support.size
    rows = np.repeat(idx, count, axis=0)
    cols = np.tile(idx, (count, 1))
    c = form.coeffs[support]
    weights = np.outer(c, c).ravel()
    return submatrix_dets(a, rows, cols) @ weights


def prop53_sweep(
    model: ModelForm,
    trials: int,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    tol: float = config.MARGIN_TOL,
) -> Prop53Report:
    """
    Gaussian sweep of the pullback inequality plus the A = lambda * 1_m equalities.

    Args:
        model: Local model
        trials: Number of random matrices
        seed: Root seed
        workers: Thread count
        tol: Allowed normalized violation

    Returns:
        Prop53Report
    """
    def chunk(rng, size, _index):
        a = rng.standard_normal((size, model.m, model.m))
        lhs = pairing_batch(model.form, a)
        rhs = model.norm_sq / model.m * np.sum(batch_singular_values(a) ** model.k, axis=1)
        normalized = (rhs - lhs) / (1.0 + rhs)
        worst = int(np.argmin(normalized))
        return float(normalized[worst]), int(np.sum(normalized < -tol)), a[worst]

    results = map_chunks(chunk, trials, seed, workers)
    min_margin, failures, worst_case = np.inf, 0, None
    for margin, fails, a in results:
        failures += fails
        if margin < min_margin:
            min_margin, worst_case = margin, a

    residual = 0.0
    for scale in EQUALITY_SCALES:
        lhs, rhs = prop53_terms(model, scale * np.eye(model.m))
        residual = max(residual, abs(rhs - lhs) / (1.0 + rhs))

    return Prop53Report(
        tag=model.label,
        trials=trials,
        min_margin=float(min_margin) if results else 0.0,
        failures=failures,
        worst_case=matrix_to_json(worst_case) if failures and worst_case is not None else None,
        equality_residual=residual,
        passed=failures == 0 and residual <= tol,
    )


def random_unitary(q: int, rng: np.random.Generator) -> np.ndarray:
    """
    Haar unitary in U(q), returned as its real 2q x 2q matrix for the complex
    coordinates z_a = x_{2a-1} + i x_{2a}.
    """
    z = (rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))) / np.sqrt(2.0)
    u, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    u = u * phases[None, :]
    real = np.zeros((2 * q, 2 * q))
    real[0::2, 0::2] = u.real
    real[0::2, 1::2] = -u.imag
    real[1::2, 0::2] = u.imag
    real[1::2, 1::2] = u.real
    return real


def unitary_equality_sweep(
    model: ModelForm,
    trials: int,
    seed: int = config.DEFAULT_SEED,
    tol: float = config.MARGIN_TOL,
) -> UnitaryReport:
    """
    Kaehler stabilizer witnesses: U^* omega0 = omega0 and zero margin at lambda U.

    Args:
        model: A kahler model
        trials: Number of random unitaries
        seed: Root seed
        tol: Allowed residual

    Returns:
        UnitaryReport
    """
    if model.tag != "kahler":
        raise ValueError(f"unitary witnesses apply to Kaehler models, got {model.label}")
    rng = np.random.default_rng(seed)
    form_residual, margin_residual = 0.0, 0.0
    for _ in range(trials):
        u = random_unitary(model.q, rng)
        scale = 3.0 * rng.random()
        form_residual = max(form_residual, float(np.max(np.abs(pullback(u, model.form).coeffs - model.form.coeffs))))
        lhs, rhs = prop53_terms(model, scale * u)
        margin_residual = max(margin_residual, abs(rhs - lhs) / (1.0 + rhs))
    return UnitaryReport(
        trials=trials,
        max_form_residual=form_residual,
        max_margin_residual=margin_residual,
        passed=form_residual <= config.REL_TOL and margin_residual <= tol,
    )


def structure_check(model: ModelForm, tol: float = config.REL_TOL) -> StructureReport:
    """
    Geometry-specific gate on the coordinate expression of phi0.

    G2: induced metric is the identity. Spin(7): self-duality. Kaehler: omega
    comes from an orthogonal complex structure. Quaternionic: invariance
    under the three complex structures of the triple.
    """
    form = model.form
    if model.tag == "g2":
        residual = float(np.max(np.abs(induced_g2_metric(form) - np.eye(7))))
        return StructureReport("induced-metric", residual, residual <= tol)
    if model.tag == "spin7":
        residual = float(np.max(np.abs(hodge_star(form).coeffs - form.coeffs)))
        return StructureReport("self-duality", residual, residual <= tol)
    if model.tag == "kahler":
        x = complex_structure_of(form)
        eye = np.eye(model.m)
        residual = float(max(np.max(np.abs(x @ x + eye)), np.max(np.abs(x.T @ x - eye))))
        return StructureReport("complex-structure", residual, residual <= tol)
    residual = 0.0
    for omega in quaternionic_triple(model.m // 4):
        x = complex_structure_of(omega)
        residual = max(residual, float(np.max(np.abs(pullback(x, form).coeffs - form.coeffs))))
    return StructureReport("sp1-invariance", residual, residual <= tol)


def model_report(
    model: ModelForm,
    samples: int,
    trials: int,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    unitary_trials: int = 0,
    debug: bool = False,
) -> Dict[str, Any]:
    """
    Everything the `models` command reports for one model.

    Args:
        model: Local model
        samples: Unit vectors for the contraction check
        trials: Gaussian matrices for the pullback inequality
        seed: Root seed
        workers: Thread count
        unitary_trials: Kaehler unitary witnesses (ignored for other tags)
        debug: Print progress to stderr

    Returns:
        Report dict with tag, m, k, normSq, iotaConstSq, maxDeviation, minMargin, pass
    """
    if debug:
        print(f"📡 {model.label}: contraction check on {samples} unit vectors...", file=sys.stderr)
    iota = check_iota_constancy(model, samples, seed=seed, workers=workers)
    relation = abs(model.iota_const_sq * model.m - model.k * model.norm_sq)
    relation_ok = relation <= config.REL_TOL * (1.0 + model.k * model.norm_sq)

    if debug:
        print(f"📡 {model.label}: pullback inequality on {trials} matrices...", file=sys.stderr)
    sweep = prop53_sweep(model, trials, seed=seed + 1, workers=workers)
    structure = structure_check(model)

    report = model.to_dict()
    report.update({
        "maxDeviation": iota.max_deviation,
        "minMargin": sweep.min_margin,
        "equalityResidual": sweep.equality_residual,
        "failures": sweep.failures,
        "worstCase": sweep.worst_case,
        "structure": structure.to_dict(),
        "iotaRelationResidual": relation,
    })
    passed = iota.passed and relation_ok and sweep.passed and structure.passed

    if model.tag == "kahler" and unitary_trials > 0:
        unitary = unitary_equality_sweep(model, unitary_trials, seed=seed + 2)
        report["unitary"] = unitary.to_dict()
        passed = passed and unitary.passed

    report["pass"] = passed
    if debug:
        status = "✅" if passed else "❌"
        print(f"{status} {model.label}: maxDeviation={iota.max_deviation:.2e} minMargin={sweep.min_margin:.2e}", file=sys.stderr)
    return report
