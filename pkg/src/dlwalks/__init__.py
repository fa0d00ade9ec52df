"""Semi-isotropic random walks on homogeneous trees and Diestel-Leader graphs.

Construction of semi-isotropic transition measures, their positive and
minimal harmonic functions in closed form, and numerical verification of the
classification via exact checks and Monte Carlo oracles.
"""

from .boundary import (
    BoundaryCoefficients,
    ClassificationReport,
    HarmonicFunction,
    KernelFamily,
    TreeCase,
    classify_tree_case,
    cocycle_check,
    enumerate_minimal_families,
    epsilon,
    harmonicity_residual,
    kernel_at,
    kernel_value,
    lift_to_dl,
    minimal_z_harmonics,
    solve_coefficients,
    standard_boundary_points,
)
from .dlgraph import (
    ORIGIN,
    DLVertex,
    FlagData,
    compose,
    dl_distance,
    flags,
    group_inverse,
    group_multiply,
    induced_tree_action,
    neighbors as dl_neighbors,
    project,
    up_quadruple,
)
from .tree import (
    ROOT,
    BoundaryPoint,
    ConeSpec,
    TreeVertex,
    boundary_through,
    cone_count,
    confluent,
    enumerate_cone,
    geodesic_toward,
    predecessor,
    successors,
    up,
    up_pair,
    up_to_boundary,
)
from .walks import (
    QuadrupleMeasure,
    TreeWalk,
    WalkSpec,
    ZWalk,
    load_walk_spec,
    parse_walk_spec,
    sample_step,
    step_support,
    switch_walk,
)

__all__ = [name for name in dir() if not name.startswith("_")]
