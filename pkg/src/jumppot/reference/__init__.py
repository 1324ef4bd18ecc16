"""Deterministic oracles for subordinate killed Brownian motion."""

from .halfspace import (
    HalfSpaceHeatKernel,
    SkbmHalfspaceOracle,
    riesz_constant,
    stable_subordinator_levy_constant,
    subordinator_density_half,
    survival_halfspace,
)
from .disk import DiskEigendata, DiskHeatKernel, SkbmDiskOracle
from .envelopes import green_envelope, heat_kernel_envelope_check

__all__ = [
    "DiskEigendata",
    "DiskHeatKernel",
    "HalfSpaceHeatKernel",
    "SkbmDiskOracle",
    "SkbmHalfspaceOracle",
    "green_envelope",
    "heat_kernel_envelope_check",
    "riesz_constant",
    "stable_subordinator_levy_constant",
    "subordinator_density_half",
    "survival_halfspace",
]
