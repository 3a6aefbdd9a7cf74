"""Twisted charged-particle beams in magnetic fields.

Landau and Laguerre-Gauss modes, solenoid field maps, OAM bookkeeping across
field boundaries, trajectory and paraxial-wave oracles, and the quadrupole
OAM analyzer.
"""

from .beamstate import (
    ELECTRON,
    POSITRON,
    UNITS,
    BeamQuantumState,
    DomainError,
    ParticleSpecies,
    StateClass,
    classify_state,
    landau_energy,
    magnetic_width,
    mean_square_radius,
)
from .fields import Beamline, FieldRegion
from .oam_ledger import OamLedger, ledger_for_state
from .transitions import TransitionReport, post_transition_state

__all__ = [
    "ELECTRON",
    "POSITRON",
    "UNITS",
    "BeamQuantumState",
    "Beamline",
    "DomainError",
    "FieldRegion",
    "OamLedger",
    "ParticleSpecies",
    "StateClass",
    "TransitionReport",
    "classify_state",
    "landau_energy",
    "ledger_for_state",
    "magnetic_width",
    "mean_square_radius",
    "post_transition_state",
]

__version__ = "0.1.0"
