"""Local models module: flat (g0, phi0) pairs for Kaehler, quaternionic Kaehler, G2, Spin(7) and their checks."""

from local_models.models import (
    G2_TERMS,
    MODEL_TAGS,
    ModelForm,
    build_model,
    complex_structure_of,
    g2_form,
    induced_g2_metric,
    kahler_two_form,
    model_from_form,
    parse_tag,
    quaternionic_triple,
    spin7_form,
)
from local_models.checks import (
    IotaReport,
    Prop53Report,
    StructureReport,
    UnitaryReport,
    check_iota_constancy,
    model_report,
    pairing_batch,
    prop53_sweep,
    prop53_terms,
    random_unitary,
    sigma_kk_calibration_value,
    structure_check,
    unitary_equality_sweep,
    verify_prop53,
)
