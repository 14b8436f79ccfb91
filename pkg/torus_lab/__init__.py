"""Torus lab module: flat torus maps, exact sigma_1 calibration, energy descent, cohomology bound and intersection invariants."""

from torus_lab.spec import (
    TorusMapSpec,
    TorusSpecError,
    grid_points,
    load_torus_config,
    random_instance,
    sample_field,
    synthesize_perturbation,
)
from torus_lab.calibration import (
    CalibrationSweepReport,
    metric_inner,
    p_norm_squared,
    pairing,
    pairing_batch,
    sigma1,
    sigma1_batch,
    sigma1_calibration_sweep,
)
from torus_lab.energy import (
    FlowTrace,
    InvarianceReport,
    counterexample_1d,
    density,
    density_gradient,
    energy_gradient,
    energy_quadrature,
    finite_difference,
    finite_difference_adjoint,
    graph_integral,
    holder_check,
    homotopy_invariance_check,
    jacobian_field,
    minimize_energy,
    sup_deviation,
)
from torus_lab.bounds import cohomology_bound
from torus_lab.intersection import IntersectionReport, intersection_estimate, sphere_volume
