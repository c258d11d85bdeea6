"""Threshold simulator for cluster-state computing with heralded gate failures."""

__version__ = "0.1.0"

from .circuits import Circuit, PauliFrame
from .decoder import decode_run
from .growth import (
    EOModel,
    GrowthStrategy,
    NodeErrorProfile,
    ResourceStats,
    estimate_error_profile,
    expected_cost,
    fuse_and_prune_node,
    grow_resource,
    required_resource_size,
    resource_graph,
    resource_size,
)
from .lattice import ClusterLattice, build_lattice
from .pauli import PauliOperator, commutes, pauli_multiply
from .tableau import StabilizerTableau
from .threshold import (
    CrossingEstimate,
    NoCrossingError,
    PhaseDiagramResult,
    RegionBoundary,
    SweepConfig,
    SweepResult,
    correctable_region,
    estimate_crossing,
    memory_effect,
    phase_boundary,
    run_sweep,
)

__all__ = [
    "Circuit",
    "ClusterLattice",
    "CrossingEstimate",
    "EOModel",
    "GrowthStrategy",
    "NoCrossingError",
    "NodeErrorProfile",
    "PauliFrame",
    "PauliOperator",
    "PhaseDiagramResult",
    "RegionBoundary",
    "ResourceStats",
    "StabilizerTableau",
    "SweepConfig",
    "SweepResult",
    "build_lattice",
    "commutes",
    "correctable_region",
    "decode_run",
    "estimate_crossing",
    "estimate_error_profile",
    "expected_cost",
    "fuse_and_prune_node",
    "grow_resource",
    "memory_effect",
    "pauli_multiply",
    "phase_boundary",
    "required_resource_size",
    "resource_graph",
    "resource_size",
    "run_sweep",
    "__version__",
]
