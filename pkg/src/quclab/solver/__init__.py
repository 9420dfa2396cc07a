"""Dirichlet energy minimization with the regularization cascade."""

from .mesh import BoxMesh
from .problem import (
    ProblemSpec,
    RegularizationSchedule,
    load_problem_config,
    make_boundary,
    make_source,
    problem_config_to_dict,
    radial_power_solution,
)
from .minimize import (
    DiscreteSolution,
    StageRecord,
    assemble_energy,
    minimize,
    stress_field,
)
from .reports import (
    RegularityReport,
    caccioppoli_check,
    disk_cell_weights,
    euler_lagrange_residual,
    sobolev_report,
    w1p_error,
)

__all__ = [
    "BoxMesh",
    "DiscreteSolution",
    "ProblemSpec",
    "RegularityReport",
    "RegularizationSchedule",
    "StageRecord",
    "assemble_energy",
    "caccioppoli_check",
    "disk_cell_weights",
    "euler_lagrange_residual",
    "load_problem_config",
    "make_boundary",
    "make_source",
    "minimize",
    "problem_config_to_dict",
    "radial_power_solution",
    "sobolev_report",
    "stress_field",
    "w1p_error",
]
