"""Planar multi-module world: poses, connections, sliding and composite moves.

Modules are axis-aligned squares on a uniform-friction floor. All motion
is stepwise along a neighbor's face: the stationary module's rod triple
commutates and the moving module's pin pair follows, so the stationary
side spends the energy. Poses are kept in integer 2.5 mm step cells, which
makes forward/back round trips restore coordinates exactly.

The composite moves:

push / pull
    The actor stays put and drives a face-adjacent payload along itself
    (pull is the mirrored direction). Demand is the payload's friction.
carry
    The actor slides along a rail module and the payload rides on the
    actor's far side, held by their connection; the connection must beat
    the payload's friction drag.

Scenario files are line oriented::

    surface glass
    mode stable
    module A 0.0 0.0
    module B 0.0 -0.015
    connect A B 75          # optional stored force in mN
    slide A +x 0.015
    push B A +x 0.005       # actor payload direction distance
    demag A x               # demagnetize an axis triple (drops connections)

Distances and coordinates must be multiples of the 2.5 mm step. Traces
serialize to CSV with columns (t, module_id, x, y, event, force_mN,
bank_V, reliable).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from pathlib import Path

from .actuator import (CANONICAL_POLARITIES, FORWARD_ORDER, MODES, REVERSE_ORDER,
                       ROBOT_COIL, SURFACES, DriveMode, LinearMotorState,
                       PlanStep, Surface, execute_step)
from .constants import (GRAVITY, MODULE_MASS, MODULE_SIDE, MU0, PIN_BR,
                        PIN_LENGTH, PIN_RADIUS, ROD_LENGTH, ROD_RADIUS,
                        STEP_DISTANCE)
from .errors import (CollisionError, ConnectionTooWeak, NoMotorContact,
                     ScenarioError, StallError)
from .magnetics import RodState, rod_moment
from .magnetics.dipole import cylinder_moment
from .power import CapacitorBank

CELLS_PER_SIDE = 6  # module side in step cells

# Effective rod-to-pin distance for holding-force queries at face contact.
# Fitted so a rod saturated by one 16 V pulse holds 75 mN; the point-dipole
# model is not trustworthy at contact, so this one anchor disciplines it.
CONTACT_GAP = 0.00620265101841434

PIN_MOMENT = cylinder_moment(PIN_RADIUS, PIN_LENGTH, PIN_BR)

SATURATED_HOLDING_MN = 75.0

DIRECTIONS = {
    "+x": (1, 0), "-x": (-1, 0), "+y": (0, 1), "-y": (0, -1),
}


@dataclasses.dataclass(frozen=True)
class ModuleSpec:
    """Fixed geometry of one cubic module."""

    side: float = MODULE_SIDE
    mass: float = MODULE_MASS
    sep_count: int = 6
    ndfeb_count: int = 4
    work_faces: int = 4
    rod_radius: float = ROD_RADIUS
    rod_length: float = ROD_LENGTH
    pin_radius: float = PIN_RADIUS
    pin_length: float = PIN_LENGTH

    def __post_init__(self) -> None:
        if min(self.side, self.mass, self.rod_radius, self.rod_length,
               self.pin_radius, self.pin_length) <= 0:
            raise ValueError("module dimensions must be positive")


DEFAULT_SPEC = ModuleSpec()


@dataclasses.dataclass
class Module:
    """One module: pose in step cells, per-axis rod polarities, its bank.

    The six rod holes run through the body, so opposite faces share one
    polarity triple per axis ('x' faces and 'y' faces).
    """

    id: str
    cell: tuple[int, int]
    polarities: dict[str, tuple[int, int, int]] = dataclasses.field(
        default_factory=lambda: {"x": CANONICAL_POLARITIES,
                                 "y": CANONICAL_POLARITIES})
    bank: CapacitorBank = dataclasses.field(default_factory=CapacitorBank)
    spec: ModuleSpec = DEFAULT_SPEC
    orientation: int = 0  # axis-aligned by construction

    @property
    def pos(self) -> tuple[float, float]:
        return (self.cell[0] * STEP_DISTANCE, self.cell[1] * STEP_DISTANCE)


def holding_force(rod: RodState, pin_moment: float = PIN_MOMENT,
                  gap: float = CONTACT_GAP) -> float:
    """Holding force of one rod/pin contact in mN (>= 0).

    Attraction between the rod's remanent moment and the fixed pin at the
    calibrated contact distance; monotone in the rod magnetization.
    """
    m_rod = abs(rod_moment(rod))
    force = 3.0 * MU0 * m_rod * pin_moment / (2.0 * math.pi * gap**4)
    return force * 1e3


@dataclasses.dataclass(frozen=True)
class TraceRow:
    t: float
    module_id: str
    x: float
    y: float
    event: str
    force_mn: float
    bank_v: float
    reliable: bool


@dataclasses.dataclass
class Trace:
    rows: list[TraceRow] = dataclasses.field(default_factory=list)
    total_energy: float = 0.0
    t: float = 0.0

    def log(self, module: Module, event: str, force_mn: float = 0.0,
            bank_v: float = 0.0, reliable: bool = True) -> None:
        x, y = module.pos
        self.rows.append(TraceRow(self.t, module.id, x, y, event,
                                  force_mn, bank_v, reliable))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "module_id", "x", "y", "event",
                         "force_mN", "bank_V", "reliable"])
        for r in self.rows:
            writer.writerow([f"{r.t:.6f}", r.module_id,
                             f"{r.x:.6f}", f"{r.y:.6f}", r.event,
                             f"{r.force_mn:.4f}", f"{r.bank_v:.4f}",
                             int(r.reliable)])
        return buf.getvalue()


@dataclasses.dataclass
class World:
    """The set of modules, the floor, and the connection graph."""

    surface: Surface = dataclasses.field(default_factory=lambda: SURFACES["glass"])
    modules: dict[str, Module] = dataclasses.field(default_factory=dict)
    connections: dict[frozenset, float] = dataclasses.field(default_factory=dict)
    gravity: float = GRAVITY

    def add_module(self, module: Module) -> None:
        if module.id in self.modules:
            raise ScenarioError(f"duplicate module id {module.id!r}")
        for other in self.modules.values():
            if _cells_overlap(module.cell, other.cell):
                raise ScenarioError(
                    f"module {module.id!r} overlaps {other.id!r}")
        self.modules[module.id] = module

    def connect(self, id_a: str, id_b: str,
                force_mn: float = SATURATED_HOLDING_MN) -> None:
        ma, mb = self.modules[id_a], self.modules[id_b]
        if not _face_adjacent(ma.cell, mb.cell):
            raise ScenarioError(
                f"{id_a} and {id_b} are not face-adjacent; cannot connect")
        self.connections[frozenset((id_a, id_b))] = force_mn

    def friction_force(self, module: Module) -> float:
        return self.surface.friction_coeff * module.spec.mass * self.gravity


def _cells_overlap(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return (abs(a[0] - b[0]) < CELLS_PER_SIDE
            and abs(a[1] - b[1]) < CELLS_PER_SIDE)


def _face_adjacent(a: tuple[int, int], b: tuple[int, int]) -> bool:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return ((dx == CELLS_PER_SIDE and dy == 0)
            or (dy == CELLS_PER_SIDE and dx == 0))


def _lane_overlap(mover: tuple[int, int], stator: tuple[int, int], axis: int,
                  delta: int = 0) -> bool:
    """Mover and stator are face-to-face with motion-axis overlap.

    With ``delta`` set, a step counts as engaged when any part of its
    travel overlaps the rail (so a module at corner contact can step back
    onto it).
    """
    perp = 1 - axis
    if abs(mover[perp] - stator[perp]) != CELLS_PER_SIDE:
        return False
    d = mover[axis] - stator[axis]
    return abs(d) < CELLS_PER_SIDE or abs(d + delta) < CELLS_PER_SIDE


def _find_stator(world: World, mover: Module, axis: int, delta: int = 0,
                 exclude: set[str] = frozenset()) -> Module | None:
    best = None
    best_key = None
    for other in world.modules.values():
        if other.id == mover.id or other.id in exclude:
            continue
        if _lane_overlap(mover.cell, other.cell, axis, delta):
            overlap = CELLS_PER_SIDE - abs(mover.cell[axis] - other.cell[axis])
            key = (-overlap, other.id)
            if best_key is None or key < best_key:
                best, best_key = other, key
    return best


def connectivity(world: World, threshold_mn: float = 0.0) -> list[set[str]]:
    """Connected components over connections at least as strong as the
    threshold (a shake-robustness query)."""
    parent = {mid: mid for mid in world.modules}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pair, force in world.connections.items():
        if force >= threshold_mn:
            a, b = tuple(pair)
            parent[find(a)] = find(b)
    groups: dict[str, set[str]] = {}
    for mid in world.modules:
        groups.setdefault(find(mid), set()).add(mid)
    return sorted(groups.values(), key=lambda s: sorted(s)[0])


def _refresh_connections(world: World, module: Module) -> None:
    """Drop stale connections of a moved module; form new full-face ones."""
    for pair in [p for p in world.connections if module.id in p]:
        other_id = next(iter(pair - {module.id}))
        if not _face_adjacent(module.cell, world.modules[other_id].cell):
            del world.connections[pair]
    for other in world.modules.values():
        if other.id != module.id and _face_adjacent(module.cell, other.cell):
            world.connections.setdefault(
                frozenset((module.id, other.id)), SATURATED_HOLDING_MN)


def _motor_step(world: World, stator: Module, mover: Module, axis: int,
                entry: PlanStep, mode: DriveMode, trace: Trace,
                extra_friction: float = 0.0, riders: list[Module] | None = None,
                ) -> None:
    """One commutation step: stator toggles, mover (and riders) shift."""
    axis_name = "xy"[axis]
    motor = LinearMotorState(polarities=stator.polarities[axis_name])
    friction = world.friction_force(mover) + extra_friction
    new_motor, res = execute_step(motor, entry, mode, stator.bank, friction,
                                  surface=world.surface, coil=ROBOT_COIL)
    stator.polarities[axis_name] = new_motor.polarities
    stator.bank = res.bank

    delta = entry.displacement_steps
    moved = [mover] + list(riders or [])
    moved_ids = {m.id for m in moved}
    targets = []
    for m in moved:
        cell = list(m.cell)
        cell[axis] += delta
        target = (cell[0], cell[1])
        for other in world.modules.values():
            if other.id not in moved_ids and _cells_overlap(target, other.cell):
                raise CollisionError(
                    f"{m.id} would overlap {other.id} at cell {target}")
        targets.append(target)
    for m, target in zip(moved, targets):
        m.cell = target

    trace.t += res.duration
    trace.total_energy += res.energy
    trace.log(mover, "step", res.peak_force * 1e3, res.bank.voltage,
              res.reliable)


def _steps_for(distance: float) -> int:
    steps = distance / STEP_DISTANCE
    n = round(steps)
    if abs(steps - n) > 1e-9:
        raise ScenarioError(
            f"distance {distance} is not a multiple of the "
            f"{STEP_DISTANCE * 1e3:.1f} mm step")
    return int(n)


def slide(world: World, module_id: str, direction: str, distance: float,
          mode: DriveMode | str = "stable") -> Trace:
    """Slide a module along a neighbor by a multiple of the step distance.

    The neighbor's rod triple commutates; this module rides its pins. With
    no face-to-face neighbor on the motion lane there is no motor:
    NoMotorContact. Collisions abort before any pose change of the step.
    """
    mode = MODES[mode] if isinstance(mode, str) else mode
    if direction not in DIRECTIONS:
        raise ScenarioError(f"direction invalid: {direction}")
    mover = world.modules[module_id]
    dx, dy = DIRECTIONS[direction]
    axis = 0 if dx else 1
    sense = dx or dy
    n_steps = _steps_for(distance)
    trace = Trace()
    if n_steps == 0:
        return trace
    if _find_stator(world, mover, axis, sense) is None:
        raise NoMotorContact(f"{module_id} has no rail neighbor on axis "
                             f"{'xy'[axis]}")
    for i in range(n_steps):
        stator = _find_stator(world, mover, axis, sense)
        if stator is None:
            raise NoMotorContact(
                f"{module_id} lost rail contact mid-slide on axis {'xy'[axis]}")
        entry = _next_entry(stator, axis, sense, i)
        _motor_step(world, stator, mover, axis, entry, mode, trace)
    _refresh_connections(world, mover)
    return trace


def _next_entry(stator: Module, axis: int, sense: int, step_index: int) -> PlanStep:
    """Commutation entry for the current stator pattern."""
    order = FORWARD_ORDER if sense > 0 else REVERSE_ORDER
    sep = order[step_index % 3]
    current = stator.polarities["xy"[axis]][sep - 1]
    new = -current if current != 0 else +1
    return PlanStep(sep_index=sep, new_polarity=new, displacement_steps=sense)


@dataclasses.dataclass(frozen=True)
class CompositeMotion:
    """A scripted composite move."""

    kind: str  # move | push | pull | carry
    actor: str
    payload: tuple[str, ...]
    direction: str
    distance: float

    def __post_init__(self) -> None:
        if self.kind not in ("move", "push", "pull", "carry"):
            raise ValueError(f"kind invalid: {self.kind}")
        if self.kind == "move" and self.payload:
            raise ValueError("move takes no payload")
        if self.kind != "move" and not self.payload:
            raise ValueError(f"{self.kind} needs a payload")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction invalid: {self.direction}")


def composite(world: World, motion: CompositeMotion,
              mode: DriveMode | str = "stable") -> Trace:
    """Run a composite motion; see the module docstring for semantics."""
    mode = MODES[mode] if isinstance(mode, str) else mode
    if motion.kind == "move":
        return slide(world, motion.actor, motion.direction, motion.distance, mode)

    actor = world.modules[motion.actor]
    payloads = [world.modules[p] for p in motion.payload]
    dx, dy = DIRECTIONS[motion.direction]
    axis = 0 if dx else 1
    sense = dx or dy
    n_steps = _steps_for(motion.distance)
    trace = Trace()
    if n_steps == 0:
        return trace

    if motion.kind in ("push", "pull"):
        # The actor is the rail: its rod triple walks the payload along it.
        payload = payloads[0]
        if len(payloads) != 1:
            raise ScenarioError("push/pull take exactly one payload")
        if not _lane_overlap(payload.cell, actor.cell, axis, sense):
            raise NoMotorContact(
                f"payload {payload.id} is not riding on {actor.id}")
        for i in range(n_steps):
            if not _lane_overlap(payload.cell, actor.cell, axis, sense):
                raise NoMotorContact(
                    f"payload {payload.id} left the {actor.id} rail")
            entry = _next_entry(actor, axis, sense, i)
            _motor_step(world, actor, payload, axis, entry, mode, trace)
        _refresh_connections(world, payload)
        return trace

    # carry: the actor slides along a rail, the payload rides the actor.
    demand_mn = sum(world.friction_force(p) for p in payloads) * 1e3
    for p in payloads:
        pair = frozenset((motion.actor, p.id))
        stored = world.connections.get(pair, 0.0)
        if stored < demand_mn:
            raise ConnectionTooWeak(
                f"connection {motion.actor}-{p.id} holds {stored:.1f} mN, "
                f"carry needs {demand_mn:.1f} mN")
    extra = sum(world.friction_force(p) for p in payloads)
    if _find_stator(world, actor, axis, sense,
                    exclude={p.id for p in payloads}) is None:
        raise NoMotorContact(f"{motion.actor} has no rail neighbor to carry along")
    for i in range(n_steps):
        stator = _find_stator(world, actor, axis, sense,
                              exclude={p.id for p in payloads})
        if stator is None:
            raise NoMotorContact(
                f"{motion.actor} lost rail contact mid-carry")
        entry = _next_entry(stator, axis, sense, i)
        _motor_step(world, stator, actor, axis, entry, mode, trace,
                    extra_friction=extra, riders=payloads)
    _refresh_connections(world, actor)
    for p in payloads:
        _refresh_connections(world, p)
        world.connections.setdefault(frozenset((motion.actor, p.id)),
                                     SATURATED_HOLDING_MN)
    return trace


def parse_scenario(text: str) -> tuple[World, list[tuple]]:
    """Parse a scenario file into a world and a motion script."""
    world = World()
    script: list[tuple] = []
    mode: DriveMode = MODES["stable"]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        cmd = parts[0].lower()
        try:
            if cmd == "surface":
                world.surface = SURFACES[parts[1]]
            elif cmd == "mode":
                mode = MODES[parts[1]]
            elif cmd == "module":
                cell = (_coord_to_cell(float(parts[2])),
                        _coord_to_cell(float(parts[3])))
                world.add_module(Module(id=parts[1], cell=cell))
            elif cmd == "connect":
                force = float(parts[3]) if len(parts) > 3 else SATURATED_HOLDING_MN
                world.connect(parts[1], parts[2], force)
            elif cmd == "slide":
                script.append(("slide", parts[1], parts[2], float(parts[3]), mode))
            elif cmd in ("push", "pull", "carry"):
                script.append((cmd, parts[1], parts[2], parts[3],
                               float(parts[4]), mode))
            elif cmd == "demag":
                script.append(("demag", parts[1], parts[2]))
            else:
                raise ScenarioError(f"unknown command {cmd!r}")
        except (IndexError, ValueError, KeyError) as exc:
            raise ScenarioError(f"line {lineno}: {exc!r}") from exc
    return world, script


def _coord_to_cell(coord: float) -> int:
    cell = coord / STEP_DISTANCE
    n = round(cell)
    if abs(cell - n) > 1e-9:
        raise ScenarioError(
            f"coordinate {coord} is not a multiple of {STEP_DISTANCE}")
    return int(n)


def run_scenario(text: str) -> tuple[World, Trace]:
    """Parse and execute a scenario; returns the final world and the trace."""
    world, script = parse_scenario(text)
    trace = Trace()
    for op in script:
        if op[0] == "slide":
            _, mid, direction, dist, mode = op
            sub = slide(world, mid, direction, dist, mode)
        elif op[0] in ("push", "pull", "carry"):
            kind, actor, payload, direction, dist, mode = op
            sub = composite(world, CompositeMotion(
                kind=kind, actor=actor, payload=(payload,),
                direction=direction, distance=dist), mode)
        elif op[0] == "demag":
            _, mid, axis_name = op
            module = world.modules[mid]
            module.polarities[axis_name] = (0, 0, 0)
            for pair in [p for p in world.connections if mid in p]:
                del world.connections[pair]
            sub = Trace()
            sub.log(module, "demag")
        else:  # pragma: no cover - parse_scenario filters commands
            raise ScenarioError(f"unknown op {op[0]!r}")
        offset = trace.t
        for row in sub.rows:
            trace.rows.append(dataclasses.replace(row, t=row.t + offset))
        trace.t += sub.t
        trace.total_energy += sub.total_energy
    return world, trace


def load_scenario(path: str | Path) -> tuple[World, Trace]:
    return run_scenario(Path(path).read_text())
