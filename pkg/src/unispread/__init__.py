"""Bottleneck-transport diagnostics for uniformly spread point configurations.

The package measures how far a finite point configuration is from "uniform":
its bottleneck (max-displacement) transport distance to scaled lattices, to
multiples of Lebesgue measure discretized on grids, and to its own translates
— together with certificates, averaging constructions, and growth trends over
increasing windows.
"""

from .criterion import (
    COARSE,
    FINE,
    GROWTH_DETECTED,
    INTEGERS,
    SCHEMA_VERSION,
    SPREAD_CONSISTENT,
    BijectionReport,
    CesaroReport,
    ChainReport,
    GrowthReport,
    ShiftSweepReport,
    cesaro_average,
    growth_analysis,
    lattice_displacement,
    lebesgue_distance,
    shift_bijection,
    shift_distance,
    shift_grid,
    shift_sweep,
    verify_chain,
    write_growth_csv,
)
from .errors import CountMismatchError, MassMismatchError, SpreadError, ValidationError
from .generators import (
    GeneratorSpec,
    density_defect,
    fibonacci_points,
    generate,
    perturbed_lattice,
    poisson_points,
)
from .geometry import (
    FREE,
    TORUS,
    GridMeasure,
    PointConfiguration,
    Window,
    atomize_grid,
    bin_to_grid,
    distance_matrix,
    frac_gcd,
    grid_from_dict,
    make_lattice,
    max_box_distance,
    pair_distance,
    read_point_file,
    restrict,
    shift,
    uniform_grid,
    vector_norm,
    write_grid_json,
    write_point_file,
)
from .solver import (
    DistanceResult,
    HallViolator,
    bottleneck_distance,
    brute_force_bottleneck,
    candidate_radii,
    feasible_at,
    point_to_grid_distance,
)
from .transport import (
    MarginalReport,
    PlanRadius,
    TransportPlan,
    atom_displacement,
    average_plans,
    compose,
    identity_plan,
    product_plan_to_cells,
    support_radius,
    verify_marginals,
)

__version__ = "0.1.0"

__all__ = [
    "COARSE",
    "FINE",
    "GROWTH_DETECTED",
    "INTEGERS",
    "SCHEMA_VERSION",
    "SPREAD_CONSISTENT",
    "__version__",
    # errors
    "SpreadError", "ValidationError", "MassMismatchError", "CountMismatchError",
    # geometry
    "TORUS", "FREE", "Window", "PointConfiguration", "GridMeasure",
    "pair_distance", "distance_matrix", "vector_norm", "max_box_distance",
    "frac_gcd", "shift", "restrict", "make_lattice", "uniform_grid",
    "bin_to_grid", "atomize_grid", "grid_from_dict",
    "read_point_file", "write_point_file", "write_grid_json",
    # transport
    "TransportPlan", "PlanRadius", "MarginalReport", "identity_plan",
    "verify_marginals", "support_radius", "atom_displacement", "compose",
    "product_plan_to_cells", "average_plans",
    # solver
    "DistanceResult", "HallViolator", "candidate_radii", "feasible_at",
    "bottleneck_distance", "brute_force_bottleneck", "point_to_grid_distance",
    # criterion
    "ShiftSweepReport", "BijectionReport", "CesaroReport", "ChainReport",
    "GrowthReport", "shift_grid", "shift_distance", "shift_sweep",
    "lattice_displacement", "lebesgue_distance", "verify_chain",
    "cesaro_average", "shift_bijection", "growth_analysis", "write_growth_csv",
    # generators
    "GeneratorSpec", "generate", "perturbed_lattice", "poisson_points",
    "fibonacci_points", "density_defect",
]
