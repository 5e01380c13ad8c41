"""Hysteresis material parameters and the shipped presets.

The model constants (``ms``, ``hc``, ``br``) come straight from material
data; the internal loop-shape constants (``a``, ``k``, ``c``, ``alpha``) are
fitted so the simulated major loop reproduces the target coercivity and
remanence (see ``sepsim.experiments.calibrate``). Two presets ship:

``table1``
    The bench-simulation material (Br = 0.03 T, Bs = 0.2 T). Used by the
    pulse/turns/coverage sweeps.

``datasheet``
    Catalog values for the low-coercivity alloy (Br = 1.26 T), a square
    loop. Used by the force and robot simulations.

The two differ because the source data for the bench studies is itself
inconsistent with the catalog values; both are exposed, neither is guessed.
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path

from ..constants import MU0
from ..errors import ScenarioError


@dataclasses.dataclass(frozen=True)
class MaterialParams:
    """Scalar Jiles-Atherton material constants.

    ms : saturation magnetization [A/m]
    a : anhysteretic shape parameter [A/m]
    k : pinning strength [A/m]
    c : reversibility, 0..1 [-]
    alpha : mean-field coupling [-]
    hc : target coercivity of the major loop [A/m]
    br : target residual flux density [T]
    """

    ms: float
    a: float
    k: float
    c: float
    alpha: float
    hc: float
    br: float

    def __post_init__(self) -> None:
        if not (self.ms > 0 and math.isfinite(self.ms)):
            raise ValueError(f"ms invalid: {self.ms}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"a invalid: {self.a}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError(f"k invalid: {self.k}")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c invalid: {self.c}")
        if self.alpha < 0:
            raise ValueError(f"alpha invalid: {self.alpha}")
        if not self.hc > 0:
            raise ValueError(f"hc invalid: {self.hc}")
        if self.br > MU0 * self.ms:
            raise ValueError(f"br exceeds mu0*ms: {self.br}")

    @property
    def mr(self) -> float:
        """Target remanent magnetization [A/m]."""
        return self.br / MU0

    def replace(self, **kwargs) -> "MaterialParams":
        return dataclasses.replace(self, **kwargs)


HC_ALNICO = 48e3  # coercivity of the switchable alloy [A/m]
HC_NDFEB = 1000e3  # coercivity of the fixed magnets [A/m]; treated as unswitchable

# Fitted loop-shape constants; regenerate with `sepsim calibrate`.
PRESET_TABLE1 = MaterialParams(
    ms=0.2 / MU0,
    a=9.5837392e04,
    k=1.1354312e05,
    c=5.0694941e-01,
    alpha=1.3878007e-07,
    hc=HC_ALNICO,
    br=0.03,
)

PRESET_DATASHEET = MaterialParams(
    ms=1.6 / MU0,
    a=8.7261714e03,
    k=7.4001136e04,
    c=1.0413624e-01,
    alpha=1.3878498e-02,
    hc=HC_ALNICO,
    br=1.26,
)

PRESETS = {
    "table1": PRESET_TABLE1,
    "datasheet": PRESET_DATASHEET,
}

_FIELDS = ("ms", "a", "k", "c", "alpha", "hc", "br")


def load_material(source: str | Path) -> MaterialParams:
    """Resolve a preset name or a key-value config file to parameters.

    The file format is one ``name value`` pair per line; ``#`` starts a
    comment. All seven constants must be present.
    """
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source]
    path = Path(source)
    if not path.exists():
        raise ScenarioError(f"unknown preset or missing file: {source}")
    values: dict[str, float] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) != 2:
            raise ScenarioError(f"{path}:{lineno}: expected 'name value', got {raw!r}")
        name, value = parts
        if name not in _FIELDS:
            raise ScenarioError(f"{path}:{lineno}: unknown material field {name!r}")
        try:
            values[name] = float(value)
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: bad number {value!r}") from exc
    missing = [f for f in _FIELDS if f not in values]
    if missing:
        raise ScenarioError(f"{path}: missing material fields: {', '.join(missing)}")
    return MaterialParams(**values)


def dump_material(params: MaterialParams, path: str | Path) -> None:
    """Write parameters in the format ``load_material`` reads."""
    lines = [f"{name} {getattr(params, name):.17g}" for name in _FIELDS]
    Path(path).write_text("\n".join(lines) + "\n")
