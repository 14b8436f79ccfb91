"""Calibration verify module: mixed forms, Lichnerowicz split, Wirtinger, fibration and AM-GM checks."""

from calibration_verify.errors import FrameError
from calibration_verify.mixed import (
    MixedForm,
    evaluate_mixed,
    evaluate_mixed_batch,
    evaluate_mixed_metric,
    graph_oracle,
    lemma41_bound,
    lemma41_constant,
    mixed_to_form,
)
from calibration_verify.kahler import (
    LichnerowiczSplit,
    check_complex_structure,
    complex_to_real,
    kahler_form,
    kahler_mixed_form,
    kahler_orientation,
    kahler_power,
    lichnerowicz_split,
    split_norms,
    standard_complex_structure,
    two_form_of,
)
from calibration_verify.submanifolds import (
    FibrationResult,
    adapted_frame,
    check_orthonormal,
    comass_estimate,
    fibration_check,
    fibration_weights,
    plane_form,
    wirtinger_check,
)
from calibration_verify.inequalities import amgm_det_check
from calibration_verify.suites import SUITES, SuiteReport, oracle_suite, run_suite
