"""Hysteresis, coil fields, segmented-rod drive, and dipole forces."""

from .materials import (MaterialParams, PRESETS, PRESET_DATASHEET,
                        PRESET_TABLE1, HC_ALNICO, HC_NDFEB,
                        dump_material, load_material)
from .hysteresis import (JaState, SolverConfig, anhysteretic,
                         consistency_residual, drive_sequence, ja_update,
                         kernel_name)
from .solenoid import Coil, centered, field_profile, solenoid_h_field
from .rod import (PulseWaveform, RodState, apply_pulse, demagnetize,
                  demagnetized_rod, flux_metrics)
from .dipole import (Dipole, MIN_GAP, coaxial_force, cylinder_moment,
                     dipole_force, interaction_energy, rod_moment)

__all__ = [
    "MaterialParams", "PRESETS", "PRESET_DATASHEET", "PRESET_TABLE1",
    "HC_ALNICO", "HC_NDFEB", "dump_material", "load_material",
    "JaState", "SolverConfig", "anhysteretic", "consistency_residual",
    "drive_sequence", "ja_update", "kernel_name",
    "Coil", "centered", "field_profile", "solenoid_h_field",
    "PulseWaveform", "RodState", "apply_pulse", "demagnetize",
    "demagnetized_rod", "flux_metrics",
    "Dipole", "MIN_GAP", "coaxial_force", "cylinder_moment",
    "dipole_force", "interaction_energy", "rod_moment",
]
