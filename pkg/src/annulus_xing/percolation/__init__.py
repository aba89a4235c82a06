"""Monte Carlo side: lattices, arm-event detectors and estimators."""
from .detect import (
    Workspace,
    detect_mono_two_arm,
    detect_one_arm,
    detect_poly_two_arm,
    enumerate_events,
)
from .estimate import (
    CSV_COLUMNS,
    EVENTS,
    Estimate,
    count_events,
    estimate,
    estimate_events,
    estimate_row,
    exact_value,
    sample_coloring,
    to_csv,
    to_json_lines,
    trial_stream,
    wilson_interval,
)
from .lattice import (
    GEOMETRIES,
    Lattice,
    build_annulus_lattice,
    build_cylinder_lattice,
    build_lattice,
    cylinder_lattice,
    cylinder_shape,
)

__all__ = [
    "CSV_COLUMNS", "EVENTS", "GEOMETRIES", "Estimate", "Lattice", "Workspace",
    "build_annulus_lattice", "build_cylinder_lattice", "build_lattice", "count_events",
    "cylinder_lattice", "cylinder_shape", "detect_mono_two_arm", "detect_one_arm",
    "detect_poly_two_arm", "enumerate_events", "estimate", "estimate_events",
    "estimate_row", "exact_value", "sample_coloring", "to_csv", "to_json_lines",
    "trial_stream", "wilson_interval",
]
