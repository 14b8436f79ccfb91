"""
Monte-Carlo intersection invariants of a flat torus map.

On flat tori the image of the geodesic x + tv under the linear lift has
length t |Qv|_h, so i_f and j_f are integrals of |Qv|_h and |Qv|_h^2 over the
unit sphere bundle with its Liouville measure (mass sqrt(det G) V(S^{m-1})).
"""

import sys
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy.special import gamma

from energy_densities import spd_power
from torus_lab.calibration import p_norm_squared
from torus_lab.energy import energy_quadrature
from torus_lab.spec import TorusMapSpec, TorusSpecError
from utils import config
from utils.rng import map_chunks, unit_vectors

STANDARD_ERRORS = 4.0
RELATIVE_SLACK = 1e-10


def sphere_volume(m: int) -> float:
    """V(S^{m-1}) = 2 pi^{m/2} / Gamma(m/2)."""
    return float(2.0 * np.pi ** (0.5 * m) / gamma(0.5 * m))


@dataclass
class IntersectionReport:
    samples: int
    i_f: float
    j_f: float
    closed_form_jf: float
    standard_error: float
    standard_error_if: float
    liouville_mass: float
    sphere_volume: float
    e2: float
    croke_fathi_margin: float
    cauchy_schwarz_margin: float
    passed: bool

    @property
    def jf_deviation(self) -> float:
        return abs(self.j_f - self.closed_form_jf)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": self.samples,
            "iF": self.i_f,
            "jF": self.j_f,
            "closedFormJF": self.closed_form_jf,
            "jfDeviation": self.jf_deviation,
            "standardError": self.standard_error,
            "standardErrorIF": self.standard_error_if,
            "liouvilleMass": self.liouville_mass,
            "sphereVolume": self.sphere_volume,
            "e2": self.e2,
            "crokeFathiMargin": self.croke_fathi_margin,
            "cauchySchwarzMargin": self.cauchy_schwarz_margin,
            "pass": self.passed,
        }


def intersection_estimate(
    spec: TorusMapSpec,
    samples: int = config.INTERSECTION_SAMPLES,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    debug: bool = False,
) -> IntersectionReport:
    """
    Estimate i_f and j_f for the linear lift of spec.

    Directions v = G^{-1/2} w / |w| with w uniform on S^{m-1} are uniform on the
    g-unit sphere. The perturbation is ignored.

    Args:
        spec: Torus map
        samples: Number of directions
        seed: Root seed
        workers: Thread count
        debug: Print progress to stderr

    Returns:
        IntersectionReport; passes when jF is within 4 standard errors of the
        closed form and both energy inequalities hold
    """
    if samples < 1:
        raise TorusSpecError(f"samples must be positive, got {samples}", "$.samples")
    m = spec.m
    g_inv_half = spd_power(spec.G, -0.5)
    qhq = spec.Q.T @ spec.H @ spec.Q

    if debug:
        print(f"📡 intersection: {samples} directions, m={m} n={spec.n}...", file=sys.stderr)

    def chunk(rng, size, _index):
        v = unit_vectors(rng, size, m) @ g_inv_half
        y = np.clip(np.einsum("si,ij,sj->s", v, qhq, v), 0.0, None)
        x = np.sqrt(y)
        return size, float(x.sum()), float(y.sum()), float((y ** 2).sum())

    totals = np.zeros(4)
    for result in map_chunks(chunk, samples, seed, workers):
        totals += result
    count, sum_x, sum_y, sum_yy = totals
    # sum of x^2 is sum of y
    mean_x, mean_y = sum_x / count, sum_y / count
    var_x = max(sum_y / count - mean_x ** 2, 0.0)
    var_y = max(sum_yy / count - mean_y ** 2, 0.0)

    volume = sphere_volume(m)
    mu = spec.sqrt_det_g
    mass = mu * volume
    i_f, j_f = mass * mean_x, mass * mean_y
    se_i = mass * np.sqrt(var_x / count)
    se_j = mass * np.sqrt(var_y / count)
    closed = volume / m * p_norm_squared(spec) * mu
    e2 = energy_quadrature(spec, 2.0, 2.0, np.zeros(spec.field_shape))

    # E_2 mu V^2 >= m iF^2, with iF widened by its sampling error
    croke_fathi = e2 * mu * volume ** 2 - m * i_f ** 2 + 2.0 * STANDARD_ERRORS * m * i_f * se_i
    cauchy_schwarz = j_f - i_f ** 2 / mass
    within = abs(j_f - closed) <= max(STANDARD_ERRORS * se_j, RELATIVE_SLACK * closed)

    report = IntersectionReport(
        samples=int(count),
        i_f=float(i_f),
        j_f=float(j_f),
        closed_form_jf=float(closed),
        standard_error=float(se_j),
        standard_error_if=float(se_i),
        liouville_mass=float(mass),
        sphere_volume=volume,
        e2=e2,
        croke_fathi_margin=float(croke_fathi),
        cauchy_schwarz_margin=float(cauchy_schwarz),
        passed=bool(
            within
            and croke_fathi >= -RELATIVE_SLACK * m * i_f ** 2
            and cauchy_schwarz >= -RELATIVE_SLACK * max(j_f, 1.0)
        ),
    )
    if debug:
        status = "✅" if report.passed else "❌"
        print(f"{status} intersection: jF={j_f:.6e} closed={closed:.6e} se={se_j:.2e}", file=sys.stderr)
    return report
