"""
Service layer: chain construction, gauge, asymptotics, spectra, dynamics and output.
"""

from starkchain.services.asymptotics_service import (
    BranchClassification,
    BranchKind,
    classify_branch,
    finite_size_scales,
)
from starkchain.services.chain_service import build_cdw_orbitals, build_hamiltonian, build_hoppings
from starkchain.services.dynamics_service import entropy_trace, excess_entropy
from starkchain.services.gauge_service import gauge_closed_form, gauge_product, transform_chain
from starkchain.services.output_service import OutputWriter, write_manifest
from starkchain.services.pipeline_service import PipelineService, get_pipeline_service
from starkchain.services.spectral_service import build_localization_map, eigensolve

__all__ = [
    "BranchClassification",
    "BranchKind",
    "classify_branch",
    "finite_size_scales",
    "build_cdw_orbitals",
    "build_hamiltonian",
    "build_hoppings",
    "entropy_trace",
    "excess_entropy",
    "gauge_closed_form",
    "gauge_product",
    "transform_chain",
    "OutputWriter",
    "write_manifest",
    "PipelineService",
    "get_pipeline_service",
    "build_localization_map",
    "eigensolve",
]
