"""Physical constants and fixed geometry defaults."""

import numpy as np

MU0 = 4e-7 * np.pi  # vacuum permeability [H/m]

RHO_COPPER = 1.68e-8  # copper resistivity at 20 C [ohm*m]

GRAVITY = 9.81  # [m/s^2]

# Switchable-rod geometry used by the bench simulations (radius/length of the
# low-coercivity rod, drive coil length and wire gauge, pulse timing).
SIM_ROD_RADIUS = 1.5e-3  # [m]
SIM_ROD_LENGTH = 8.0e-3  # [m]
SIM_COIL_LENGTH = 10.0e-3  # [m]
SIM_WIRE_DIAMETER = 0.2e-3  # [m]
SIM_COIL_TURNS = 250

PULSE_RISE = 1.0e-5  # rise / fall edge width [s]
PULSE_HOLD = 4.0e-4  # flat-top hold [s]
PULSE_PERIOD = 4.0e-4  # nominal period bookkeeping for one polarity [s]
SOLVER_STEP = 5.0e-7  # waveform sampling step [s]
DEMAG_FREQUENCY = 2.0  # decaying-sine demagnetization frequency [Hz]

# Hardware module geometry: cubic module, four work faces, rods through the
# wall plus fixed high-coercivity pins on the second surface level.
MODULE_SIDE = 15.0e-3  # [m]
MODULE_MASS = 12.0e-3  # [kg]
ROD_RADIUS = 1.25e-3  # switchable rod radius [m]
ROD_LENGTH = 8.0e-3  # [m]
PIN_RADIUS = 1.0e-3  # fixed-magnet radius [m]
PIN_LENGTH = 1.5e-3  # fixed-magnet length [m]
PIN_BR = 1.28  # fixed-magnet residual flux density [T]

SEP_PITCH = MODULE_SIDE / 3.0  # 5 mm between switchable rods on a face
SLIDER_SPACING = SEP_PITCH  # 5 mm between the two fixed pins
STEP_DISTANCE = MODULE_SIDE / 6.0  # 2.5 mm per commutation step
