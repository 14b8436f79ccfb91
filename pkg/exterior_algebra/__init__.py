"""Exterior algebra module: constant-coefficient forms, Hodge star, pullbacks and minors."""

from exterior_algebra.basis import (
    DomainError,
    MultiIndex,
    basis_size,
    complement,
    index_array,
    index_lookup,
    merge_sign,
    multi_index_basis,
)
from exterior_algebra.compound import compound_matrix, small_det, submatrix_dets
from exterior_algebra.forms import (
    KForm,
    MetricData,
    basis_form,
    evaluate,
    gram_matrix,
    hodge_star,
    inner,
    interior,
    interior_matrix,
    kform_from_json,
    kform_to_json,
    pullback,
    pullback_coefficients,
    shift_form,
    two_form_matrix,
    validate_spd,
    volume_form,
    wedge,
)
