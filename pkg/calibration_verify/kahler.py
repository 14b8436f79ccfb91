"""
Kaehler forms on C^m = R^{2m} and the complex-linear / anti-linear split of
a real linear map.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import factorial

from calibration_verify.errors import FrameError
from calibration_verify.mixed import MixedForm, evaluate_mixed
from exterior_algebra import KForm, hodge_star, wedge
from utils import config


def standard_complex_structure(m: int) -> np.ndarray:
    """2m x 2m real matrix with J e_{2a-1} = e_{2a} and J e_{2a} = -e_{2a-1}."""
    J = np.zeros((2 * m, 2 * m))
    for a in range(m):
        J[2 * a + 1, 2 * a] = 1.0
        J[2 * a, 2 * a + 1] = -1.0
    return J


def two_form_of(J: np.ndarray) -> KForm:
    """The 2-form omega(u, v) = <J u, v> of a complex structure."""
    J = np.asarray(J, dtype=float)
    size = J.shape[0]
    terms = {(i + 1, j + 1): J[j, i] for i in range(size) for j in range(i + 1, size) if J[j, i] != 0.0}
    return KForm.from_terms(size, 2, terms)


def kahler_form(m: int) -> KForm:
    """omega = sum_a e^{2a-1} ^ e^{2a}, so omega(u, v) = <J u, v>."""
    return KForm.from_terms(2 * m, 2, {(2 * a - 1, 2 * a): 1.0 for a in range(1, m + 1)})


def _power(omega: KForm, p: int) -> KForm:
    power = KForm(omega.m, 0, [1.0])
    for _ in range(p):
        power = wedge(power, omega)
    return power


def kahler_power(m: int, p: int) -> KForm:
    """omega^p / p! on R^{2m}."""
    return _power(kahler_form(m), p) / float(factorial(p, exact=True))


def kahler_mixed_form(
    m: int,
    n: int,
    J_src: Optional[np.ndarray] = None,
    J_tgt: Optional[np.ndarray] = None,
) -> MixedForm:
    """
    Mixed form omega_h ^ omega_g^{m-1} on C^m x C^n in table form:
    Phi_IJ = (*omega_g^{m-1})_I (omega_h)_J.
    """
    omega_g = kahler_form(m) if J_src is None else two_form_of(J_src)
    omega_h = kahler_form(n) if J_tgt is None else two_form_of(J_tgt)
    return MixedForm.from_product(hodge_star(_power(omega_g, m - 1)), omega_h)


def kahler_orientation(J: np.ndarray) -> float:
    """Sign s with omega^m / m! = s e^{1..2m} for omega the form of J."""
    m = J.shape[0] // 2
    return float(np.sign(_power(two_form_of(J), m).coeffs[0]))


def split_norms(a: np.ndarray, J_s: np.ndarray, J_t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(|A+|^2 / 2, |A-|^2 / 2) over a stack (..., 2n, 2m)."""
    twisted = J_t @ a @ J_s
    d_sq = 0.5 * np.sum((0.5 * (a - twisted)) ** 2, axis=(-2, -1))
    dbar_sq = 0.5 * np.sum((0.5 * (a + twisted)) ** 2, axis=(-2, -1))
    return d_sq, dbar_sq


def check_complex_structure(J: np.ndarray, name: str = "J") -> np.ndarray:
    """Raise FrameError unless J is orthogonal with J^2 = -1."""
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2:
        raise FrameError(f"{name} must be a square matrix of even size, got {J.shape}")
    eye = np.eye(J.shape[0])
    if np.max(np.abs(J @ J + eye)) > config.FRAME_TOL or np.max(np.abs(J.T @ J - eye)) > config.FRAME_TOL:
        raise FrameError(f"{name} is not an orthogonal complex structure")
    return J


@dataclass
class LichnerowiczSplit:
    d_norm_sq: float
    dbar_norm_sq: float
    energy_residual: float
    pairing: float
    expected_pairing: float

    @property
    def pairing_residual(self) -> float:
        return abs(self.pairing - self.expected_pairing)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dNormSq": self.d_norm_sq,
            "dBarNormSq": self.dbar_norm_sq,
            "energyResidual": self.energy_residual,
            "pairing": self.pairing,
            "expectedPairing": self.expected_pairing,
        }


def lichnerowicz_split(
    a: np.ndarray,
    J_src: Optional[np.ndarray] = None,
    J_tgt: Optional[np.ndarray] = None,
    mixed: Optional[MixedForm] = None,
) -> LichnerowiczSplit:
    """
    Split A into A+ = (A - J_t A J_s)/2 and A- = (A + J_t A J_s)/2.

    dNorm^2 = |A+|^2/2 and dBarNorm^2 = |A-|^2/2, so that
    |A|^2 = 2 dNorm^2 + 2 dBarNorm^2. The pairing omega_g^{m-1} ^ f^*omega_h
    is evaluated through the mixed-form kernel and compared with
    (m-1)! (dNorm^2 - dBarNorm^2).

    Args:
        a: 2n x 2m real matrix
        J_src: Source complex structure (standard if None)
        J_tgt: Target complex structure (standard if None)
        mixed: Precomputed kahler_mixed_form for the same structures

    Returns:
        LichnerowiczSplit
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] % 2 or a.shape[1] % 2:
        raise FrameError(f"expected a 2n x 2m matrix, got shape {a.shape}")
    n, m = a.shape[0] // 2, a.shape[1] // 2
    J_s = standard_complex_structure(m) if J_src is None else check_complex_structure(J_src, "J_src")
    J_t = standard_complex_structure(n) if J_tgt is None else check_complex_structure(J_tgt, "J_tgt")
    if J_s.shape[0] != 2 * m or J_t.shape[0] != 2 * n:
        raise FrameError("complex structures do not match the map's dimensions")

    d_sq, dbar_sq = (float(v) for v in split_norms(a, J_s, J_t))
    energy = float(np.sum(a ** 2))

    # the identity is stated against omega_g^m / m!, which is +-e^{1..2m}
    orientation = 1.0 if J_src is None else kahler_orientation(J_s)
    expected = orientation * (d_sq - dbar_sq) * float(factorial(m - 1, exact=True))
    if mixed is None:
        mixed = kahler_mixed_form(m, n, J_src=J_src, J_tgt=J_tgt)
    pairing = evaluate_mixed(mixed, a)

    return LichnerowiczSplit(
        d_norm_sq=d_sq,
        dbar_norm_sq=dbar_sq,
        energy_residual=abs(energy - 2.0 * d_sq - 2.0 * dbar_sq),
        pairing=pairing,
        expected_pairing=expected,
    )


def complex_to_real(z: np.ndarray) -> np.ndarray:
    """Real 2n x 2m matrix of a complex n x m matrix for z_a = x_{2a-1} + i x_{2a}."""
    z = np.asarray(z, dtype=complex)
    n, m = z.shape
    real = np.zeros((2 * n, 2 * m))
    real[0::2, 0::2] = z.real
    real[0::2, 1::2] = -z.imag
    real[1::2, 0::2] = z.imag
    real[1::2, 1::2] = z.real
    return real
