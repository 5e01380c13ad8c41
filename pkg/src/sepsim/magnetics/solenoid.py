"""Drive coil geometry and the on-axis finite-solenoid field."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ..constants import RHO_COPPER


@dataclasses.dataclass(frozen=True)
class Coil:
    """A close-wound drive coil around the rod axis.

    turns : number of turns
    length : winding length along the axis [m]
    inner_radius : innermost winding radius [m]
    wire_diameter : bare wire diameter [m]
    coverage : axial interval (z0, z1) the winding occupies, in the same
        frame as the rod (rod centered on z = 0) [m]
    """

    turns: int
    length: float
    inner_radius: float
    wire_diameter: float
    coverage: tuple[float, float]

    def __post_init__(self) -> None:
        if self.turns < 0:
            raise ValueError(f"turns invalid: {self.turns}")
        if self.length <= 0:
            raise ValueError(f"length invalid: {self.length}")
        if self.inner_radius <= 0 or self.wire_diameter <= 0:
            raise ValueError("coil radii must be positive")
        z0, z1 = self.coverage
        if not z1 > z0:
            raise ValueError(f"coverage interval not well ordered: {self.coverage}")
        if not math.isclose(z1 - z0, self.length, rel_tol=1e-9):
            raise ValueError("coverage span must equal the winding length")

    @property
    def layers(self) -> int:
        """Winding layers assuming close packing along the length."""
        per_layer = max(1, int(self.length / self.wire_diameter))
        return max(1, math.ceil(self.turns / per_layer))

    @property
    def mean_radius(self) -> float:
        """Mid-build winding radius [m]."""
        return self.inner_radius + self.wire_diameter * self.layers / 2.0

    @property
    def wire_length(self) -> float:
        """Total wire length [m]."""
        return self.turns * 2.0 * math.pi * self.mean_radius

    @property
    def resistance(self) -> float:
        """DC resistance from the winding geometry [ohm]."""
        area = math.pi * (self.wire_diameter / 2.0) ** 2
        return RHO_COPPER * self.wire_length / area


def centered(turns: int, length: float, inner_radius: float, wire_diameter: float,
             center: float = 0.0) -> Coil:
    """Coil whose winding is centered on ``center`` along the rod axis."""
    half = length / 2.0
    return Coil(turns=turns, length=length, inner_radius=inner_radius,
                wire_diameter=wire_diameter, coverage=(center - half, center + half))


def solenoid_h_field(coil: Coil, current: float, z) -> np.ndarray | float:
    """On-axis H field of the finite solenoid at axial position(s) ``z``.

    H(z) = (N I / 2 L) * [ (z - z0)/sqrt((z - z0)^2 + R^2)
                         - (z - z1)/sqrt((z - z1)^2 + R^2) ]

    with R the inner winding radius (thin-build approximation; the build
    thickness only enters the resistance model) and (z0, z1) the winding
    ends. Sign follows the current; the magnitude peaks at the coil center
    and falls to zero far away. Result in A/m.
    """
    if not np.all(np.isfinite(np.asarray(z, dtype=float))):
        raise ValueError("z must be finite")
    if coil.turns == 0 or current == 0.0:
        return np.zeros_like(np.asarray(z, dtype=float)) if np.ndim(z) else 0.0
    z0, z1 = coil.coverage
    r = coil.inner_radius
    za = np.asarray(z, dtype=float)
    term0 = (za - z0) / np.sqrt((za - z0) ** 2 + r * r)
    term1 = (za - z1) / np.sqrt((za - z1) ** 2 + r * r)
    h = coil.turns * current / (2.0 * coil.length) * (term0 - term1)
    return h if np.ndim(z) else float(h)


def field_profile(coil: Coil, z_points: np.ndarray) -> np.ndarray:
    """Field per unit current at each axial position [A/m per A]."""
    if coil.turns == 0:
        return np.zeros_like(np.asarray(z_points, dtype=float))
    return np.asarray(solenoid_h_field(coil, 1.0, z_points), dtype=float)
