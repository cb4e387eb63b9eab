"""Application payloads: Grover read alignment and randomized benchmarking."""

from .alignment import AlignmentQuery, AlignmentResult, ReferenceIndex, grover_align, random_reference
from .grover import diffusion, grover_build, optimal_iterations, phase_oracle, success_probability
from .rb import RbConfig, RbResult, run_rb

__all__ = [
    "AlignmentQuery",
    "AlignmentResult",
    "RbConfig",
    "RbResult",
    "ReferenceIndex",
    "diffusion",
    "grover_align",
    "grover_build",
    "optimal_iterations",
    "phase_oracle",
    "random_reference",
    "run_rb",
    "success_probability",
]
