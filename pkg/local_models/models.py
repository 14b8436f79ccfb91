"""
Flat local models (g0, phi0) for the special-holonomy geometries:
Kaehler, quaternionic Kaehler, G2 and Spin(7).
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from exterior_algebra import (
    DomainError,
    KForm,
    MultiIndex,
    hodge_star,
    inner,
    interior,
    shift_form,
    two_form_matrix,
    wedge,
)

MODEL_TAGS = ("kahler", "quaternionic", "g2", "spin7")

# Associative 3-form, one signed term per line of the Fano plane
G2_TERMS: Dict[MultiIndex, float] = {
    (1, 2, 3): 1.0,
    (1, 4, 5): 1.0,
    (1, 6, 7): 1.0,
    (2, 4, 6): 1.0,
    (2, 5, 7): -1.0,
    (3, 4, 7): -1.0,
    (3, 5, 6): -1.0,
}


@dataclass(frozen=True, eq=False)
class ModelForm:
    """A calibrating form phi0 on R^m with the identity metric g0."""
    tag: str
    m: int
    k: int
    form: KForm
    norm_sq: float  # |phi0|^2
    iota_const_sq: float  # |iota_u phi0|^2 for unit u
    q: Optional[int] = None

    @property
    def label(self) -> str:
        return self.tag if self.q is None else f"{self.tag}({self.q})"

    def to_dict(self) -> Dict:
        return {
            "tag": self.label,
            "m": self.m,
            "k": self.k,
            "normSq": self.norm_sq,
            "iotaConstSq": self.iota_const_sq,
        }


def kahler_two_form(q: int) -> KForm:
    """omega0 = sum_a e^{2a-1} ^ e^{2a} on R^{2q}."""
    return KForm.from_terms(2 * q, 2, {(2 * a - 1, 2 * a): 1.0 for a in range(1, q + 1)})


def quaternionic_triple(q: int):
    """
    The hyperkaehler 2-forms (omega_I, omega_J, omega_K) on H^q = R^{4q}.

    Returns:
        Tuple of three KForms
    """
    m = 4 * q
    omega_i, omega_j, omega_k = {}, {}, {}
    for a in range(1, q + 1):
        b = 4 * a - 4
        omega_i[(b + 1, b + 2)] = 1.0
        omega_i[(b + 3, b + 4)] = 1.0
        omega_j[(b + 1, b + 3)] = 1.0
        omega_j[(b + 2, b + 4)] = -1.0
        omega_k[(b + 1, b + 4)] = 1.0
        omega_k[(b + 2, b + 3)] = 1.0
    return (
        KForm.from_terms(m, 2, omega_i),
        KForm.from_terms(m, 2, omega_j),
        KForm.from_terms(m, 2, omega_k),
    )


def g2_form() -> KForm:
    return KForm.from_terms(7, 3, G2_TERMS)


def spin7_form() -> KForm:
    """Cayley form e^1 ^ phi + *phi, with phi the G2 form on coordinates 2..8."""
    phi = g2_form()
    e1 = KForm.from_terms(8, 1, {(1,): 1.0})
    return wedge(e1, shift_form(phi, 8, 1)) + shift_form(hodge_star(phi), 8, 1)


def model_from_form(tag: str, form: KForm, q: Optional[int] = None) -> ModelForm:
    """
    Wrap any form as a model, with norm and contraction constant computed
    by the engine. |iota_u phi|^2 is read off at u = e_1.

    Args:
        tag: Model tag
        form: Constant form on R^m
        q: Quaternionic/complex dimension where applicable

    Returns:
        ModelForm
    """
    if form.k == 0:
        raise DomainError("a model form needs positive degree")
    e1 = np.zeros(form.m)
    e1[0] = 1.0
    return ModelForm(
        tag=tag,
        m=form.m,
        k=form.k,
        form=form,
        norm_sq=inner(form, form),
        iota_const_sq=interior(e1, form).norm_sq(),
        q=q,
    )


def build_model(tag: str, q: Optional[int] = None) -> ModelForm:
    """
    Standard coordinate expression of one of the four local models.

    Args:
        tag: "kahler", "quaternionic", "g2" or "spin7"
        q: Complex (kahler) or quaternionic dimension; required for those tags

    Returns:
        ModelForm
    """
    if tag not in MODEL_TAGS:
        raise DomainError(f"unknown model tag {tag!r}; expected one of {MODEL_TAGS}")
    if tag in ("kahler", "quaternionic"):
        if q is None or q < 1:
            raise DomainError(f"{tag} model needs q >= 1, got {q}")
    if tag == "kahler":
        return model_from_form(tag, kahler_two_form(q), q)
    if tag == "quaternionic":
        if q < 2:
            raise DomainError(f"quaternionic Kaehler model needs 4q >= 8, got q={q}")
        total = KForm.zero(4 * q, 4)
        for omega in quaternionic_triple(q):
            total = total + wedge(omega, omega)
        return model_from_form(tag, total, q)
    if tag == "g2":
        return model_from_form(tag, g2_form())
    return model_from_form(tag, spin7_form())


def parse_tag(text: str) -> ModelForm:
    """Build a model from "g2", "spin7", "kahler(3)" or "quaternionic(2)"."""
    text = text.strip().lower()
    if "(" in text:
        name, _, rest = text.partition("(")
        try:
            q = int(rest.rstrip(")"))
        except ValueError as e:
            raise DomainError(f"bad model tag {text!r}") from e
        return build_model(name, q)
    return build_model(text)


def complex_structure_of(omega: KForm) -> np.ndarray:
    """Matrix X with omega(u, v) = <X u, v>."""
    return two_form_matrix(omega).T


def induced_g2_metric(form: KForm) -> np.ndarray:
    """
    Bilinear form B with B(u, v) vol = (1/6) iota_u phi ^ iota_v phi ^ phi.

    Equals the identity exactly when phi is the G2 form of the standard
    metric and orientation.
    """
    if form.m != 7 or form.k != 3:
        raise DomainError(f"induced metric needs a 3-form on R^7, got degree {form.k} on R^{form.m}")
    eye = np.eye(7)
    contractions = [interior(eye[i], form) for i in range(7)]
    B = np.zeros((7, 7))
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(contractions[i], contractions[j]), form)
            B[i, j] = B[j, i] = top.coeffs[0] / 6.0
    return B
