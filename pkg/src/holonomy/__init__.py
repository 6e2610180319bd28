"""Holonomic Λ-system quantum gates with decay, beyond the rotating wave approximation."""

from .gates import GateSpec, catalog, embed_qubit_unitary, holonomy_double, holonomy_single, ideal_two_qubit
from .model import DriveConfig, LoopParams, PulseSequence, PulseShape, TwoQubitConfig
from .solver import DecayChannel, IntegrationError, IntegratorSettings, integrate, run_protocol

__all__ = [
    "DecayChannel",
    "DriveConfig",
    "GateSpec",
    "IntegrationError",
    "IntegratorSettings",
    "LoopParams",
    "PulseSequence",
    "PulseShape",
    "TwoQubitConfig",
    "catalog",
    "embed_qubit_unitary",
    "holonomy_double",
    "holonomy_single",
    "ideal_two_qubit",
    "integrate",
    "run_protocol",
]
