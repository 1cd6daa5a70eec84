"""Sphere-plane Casimir free energies and forces in the scattering approach."""

from ._core import (
    ConvergenceError,
    DomainError,
    JobSpec,
    Material,
    NotPositiveDefinite,
    ParseError,
    block_logdet,
    force,
    free_energy,
    pfa_correction_sweep,
    pfa_force,
    plane_plane_free_energy,
    run_cli,
    scattering_matrix,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "JobSpec",
    "Material",
    "NotPositiveDefinite",
    "ParseError",
    "block_logdet",
    "force",
    "free_energy",
    "pfa_correction_sweep",
    "pfa_force",
    "plane_plane_free_energy",
    "run_cli",
    "scattering_matrix",
]
