"""Simulation toolkit for parametric flux-pulse leakage reduction on a transmon."""

from .errors import FluxLRUError
from .hilbert import DeviceParams, build_composite, dress_basis
from .pulse import FluxPulse, calibrate_flux_amplitude

__version__ = "0.1.0"

__all__ = ["DeviceParams", "FluxLRUError", "FluxPulse", "build_composite", "calibrate_flux_amplitude",
           "dress_basis"]
