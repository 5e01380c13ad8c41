"""Point-dipole reduction of the magnets and the pair force."""

from __future__ import annotations

import dataclasses

import numpy as np

from ..constants import MU0
from ..errors import CoincidentDipoles
from .rod import RodState

MIN_GAP = 0.5e-3  # below this separation the point model is meaningless [m]


@dataclasses.dataclass(frozen=True)
class Dipole:
    """A point dipole: moment vector [A*m^2] at a position [m]."""

    moment: np.ndarray
    position: np.ndarray

    def __post_init__(self) -> None:
        moment = np.asarray(self.moment, dtype=np.float64)
        position = np.asarray(self.position, dtype=np.float64)
        if moment.shape != (3,) or position.shape != (3,):
            raise ValueError("moment and position must be 3-vectors")
        if not (np.all(np.isfinite(moment)) and np.all(np.isfinite(position))):
            raise ValueError("dipole components must be finite")
        object.__setattr__(self, "moment", moment)
        object.__setattr__(self, "position", position)


def rod_moment(rod: RodState) -> float:
    """Axial dipole moment of a switchable rod: volume-average M times volume.

    Signed; follows the magnetization direction. [A*m^2]
    """
    return float(np.mean(rod.m) * rod.volume)


def cylinder_moment(radius: float, length: float, br: float) -> float:
    """Moment of a uniformly magnetized cylinder at M = Br/mu0. [A*m^2]"""
    if radius <= 0 or length <= 0:
        raise ValueError("cylinder geometry must be positive")
    volume = np.pi * radius**2 * length
    return float(br / MU0 * volume)


def interaction_energy(d1: Dipole, d2: Dipole) -> float:
    """Dipole-dipole interaction energy [J].

    U = mu0/(4 pi r^3) * [ m1.m2 - 3 (m1.rhat)(m2.rhat) ]
    """
    r = d2.position - d1.position
    dist = float(np.linalg.norm(r))
    _check_gap(dist)
    rhat = r / dist
    return MU0 / (4.0 * np.pi * dist**3) * (
        float(d1.moment @ d2.moment)
        - 3.0 * float(d1.moment @ rhat) * float(d2.moment @ rhat)
    )


def dipole_force(d1: Dipole, d2: Dipole) -> np.ndarray:
    """Force on dipole 2 from dipole 1 [N].

    Gradient of the interaction energy; the closed form is

    F2 = 3 mu0/(4 pi r^4) * [ (m1.rhat) m2 + (m2.rhat) m1
                              + (m1.m2) rhat - 5 (m1.rhat)(m2.rhat) rhat ]

    Newton's third law holds exactly; coaxial aligned dipoles attract.
    """
    r = d2.position - d1.position
    dist = float(np.linalg.norm(r))
    _check_gap(dist)
    rhat = r / dist
    m1r = float(d1.moment @ rhat)
    m2r = float(d2.moment @ rhat)
    m1m2 = float(d1.moment @ d2.moment)
    coeff = 3.0 * MU0 / (4.0 * np.pi * dist**4)
    return coeff * (m1r * d2.moment + m2r * d1.moment
                    + (m1m2 - 5.0 * m1r * m2r) * rhat)


def coaxial_force(m1: float, m2: float, separation: float) -> float:
    """Axial force between coaxial dipoles; negative = attraction [N].

    F = -3 mu0 m1 m2 / (2 pi d^4) for aligned moments.
    """
    _check_gap(abs(separation))
    return -3.0 * MU0 * m1 * m2 / (2.0 * np.pi * separation**4)


def _check_gap(dist: float, min_gap: float = MIN_GAP) -> None:
    if dist < min_gap:
        raise CoincidentDipoles(
            f"separation {dist:.2e} m below the minimum gap {min_gap:.2e} m")
