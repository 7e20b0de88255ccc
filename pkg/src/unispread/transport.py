"""Transport plans between finite measures, as first-class verified data.

A plan couples a source and a target measure through integer-mass atoms
``(source id, target id, mass)``; ids address point indices or grid cells.
The plan carries its own mass quantum so that averaging N plans can keep all
atom masses integral while the 1/N scale lives in the quantum.

The key scalar is the support radius: the largest displacement any atom
performs.  For atoms that end in a grid cell the displacement is measured to
the farthest point of the closed cell, so reported radii are certified upper
bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import ValidationError
from .geometry import (
    GridMeasure,
    PointConfiguration,
    frac_gcd,
    max_box_distance,
    pair_distance,
    same_metric,
)

Measure = Union[PointConfiguration, GridMeasure]

POINTS = "points"
GRID = "grid"


def measure_kind(measure: Measure) -> str:
    if isinstance(measure, PointConfiguration):
        return POINTS
    if isinstance(measure, GridMeasure):
        return GRID
    raise ValidationError(f"not a measure: {type(measure).__name__}")


def element_mass(measure: Measure, i: int) -> int:
    """Integer mass (in the measure's quantum units) of element ``i``."""
    if isinstance(measure, PointConfiguration):
        return measure.masses[i]
    return measure.cell_mass(i)


def element_box(measure: Measure, i: int):
    """Closed per-axis (min, max) box occupied by element ``i``."""
    if isinstance(measure, PointConfiguration):
        return tuple((x, x) for x in measure.points[i])
    return measure.cell_box(i)


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling with integer atom masses in units of ``quantum``."""

    source: Measure
    target: Measure
    atoms: tuple[tuple[int, int, int], ...]
    quantum: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "atoms",
                           tuple((int(s), int(t), int(m)) for s, t, m in self.atoms))
        object.__setattr__(self, "quantum", Fraction(self.quantum))
        if self.quantum <= 0:
            raise ValidationError(f"plan quantum must be positive, got {self.quantum}")
        ns, nt = len(self.source), len(self.target)
        for s, t, m in self.atoms:
            if not 0 <= s < ns:
                raise ValidationError(f"atom source id {s} out of range ({ns} elements)")
            if not 0 <= t < nt:
                raise ValidationError(f"atom target id {t} out of range ({nt} elements)")
            if m < 1:
                raise ValidationError(f"atom ({s}, {t}) has non-positive mass {m}")

    def with_quantum(self, quantum: Fraction) -> "TransportPlan":
        """Rescale atom masses to a finer quantum (exact)."""
        quantum = Fraction(quantum)
        factor = self.quantum / quantum
        if factor == 1:
            return self
        if factor.denominator != 1:
            raise ValidationError(
                f"cannot rescale plan quantum {self.quantum} to non-divisor {quantum}")
        f = factor.numerator
        return TransportPlan(self.source, self.target,
                             tuple((s, t, m * f) for s, t, m in self.atoms), quantum)

    def to_dict(self) -> dict:
        return {
            "source_kind": measure_kind(self.source),
            "target_kind": measure_kind(self.target),
            "quantum_num": self.quantum.numerator,
            "quantum_den": self.quantum.denominator,
            "atoms": [[s, t, m] for s, t, m in self.atoms],
        }


@dataclass(frozen=True)
class PlanRadius:
    """Largest atom displacement and the atom attaining it."""

    value: float
    atom: tuple[int, int]


@dataclass(frozen=True)
class MarginalReport:
    """Outcome of exact marginal verification; falsy when a violation exists."""

    ok: bool
    side: str | None = None
    element_id: int | None = None
    expected: Fraction | None = None
    actual: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "marginals valid"
        return (f"{self.side} marginal violated at id {self.element_id}: "
                f"expected {self.expected}, got {self.actual}")


def identity_plan(config: PointConfiguration) -> TransportPlan:
    """The diagonal coupling of a configuration with itself."""
    atoms = tuple((i, i, m) for i, m in enumerate(config.masses))
    return TransportPlan(config, config, atoms, config.quantum)


def verify_marginals(plan: TransportPlan) -> MarginalReport:
    """Exact (rational-arithmetic) check of both marginals.

    Never raises; reports the first offending element id and the mass
    discrepancy on failure.  Element order fixes which violation is "first".
    """
    for side, measure, pos in (("source", plan.source, 0), ("target", plan.target, 1)):
        sums: dict[int, int] = {}
        for atom in plan.atoms:
            sums[atom[pos]] = sums.get(atom[pos], 0) + atom[2]
        for i in range(len(measure)):
            expected = element_mass(measure, i) * measure.quantum
            actual = sums.get(i, 0) * plan.quantum
            if actual != expected:
                return MarginalReport(False, side, i, expected, actual)
    return MarginalReport(True)


def atom_displacement(plan: TransportPlan, atom: tuple[int, int, int]) -> float:
    """Displacement of one atom; grid cells measured to their farthest point."""
    src, tgt = plan.source, plan.target
    s, t, _ = atom
    if isinstance(src, PointConfiguration) and isinstance(tgt, PointConfiguration):
        return pair_distance(src.points[s], tgt.points[t], src.window)
    return max_box_distance(element_box(src, s), element_box(tgt, t), src.window)


def support_radius(plan: TransportPlan) -> PlanRadius:
    """Maximum atom displacement together with the attaining atom."""
    if not same_metric(plan.source.window, plan.target.window):
        raise ValidationError(
            "mixed-window plan: source and target windows have different "
            "side lengths or boundary modes")
    best = 0.0
    best_atom = (-1, -1)
    for atom in plan.atoms:
        d = atom_displacement(plan, atom)
        if d > best or best_atom == (-1, -1):
            best = d
            best_atom = (atom[0], atom[1])
    return PlanRadius(best, best_atom)


def compose(plan_ab: TransportPlan, plan_bc: TransportPlan) -> TransportPlan:
    """Glue two plans along their shared middle measure.

    Splits mass per middle element greedily in deterministic id order; any
    valid gluing has radius at most the sum of the two input radii.
    """
    if plan_ab.target != plan_bc.source:
        raise ValidationError("compose: middle measures differ (target of the first "
                              "plan must be the source of the second)")
    q = frac_gcd(plan_ab.quantum, plan_bc.quantum)
    first = plan_ab.with_quantum(q)
    second = plan_bc.with_quantum(q)

    into: dict[int, list[list[int]]] = {}
    for s, t, m in first.atoms:
        into.setdefault(t, []).append([s, m])
    out_of: dict[int, list[list[int]]] = {}
    for s, t, m in second.atoms:
        out_of.setdefault(s, []).append([t, m])

    glued: dict[tuple[int, int], int] = {}
    for mid in sorted(set(into) | set(out_of)):
        ins = sorted(into.get(mid, []))
        outs = sorted(out_of.get(mid, []))
        if sum(m for _, m in ins) != sum(m for _, m in outs):
            raise ValidationError(
                f"compose: middle element {mid} carries unequal incoming and outgoing mass")
        i = j = 0
        while i < len(ins) and j < len(outs):
            s, mi = ins[i]
            t, mo = outs[j]
            take = min(mi, mo)
            key = (s, t)
            glued[key] = glued.get(key, 0) + take
            ins[i][1] -= take
            outs[j][1] -= take
            if ins[i][1] == 0:
                i += 1
            if outs[j][1] == 0:
                j += 1
    atoms = tuple((s, t, m) for (s, t), m in sorted(glued.items()))
    return TransportPlan(first.source, second.target, atoms, q)


def product_plan_to_cells(config: PointConfiguration,
                          assignment: Mapping[int, int],
                          grid: GridMeasure) -> TransportPlan:
    """Plan sending each point wholly into its assigned grid cell.

    The assignment must be mass-compatible: the point mass routed into every
    cell has to equal that cell's mass exactly.
    """
    if config.dim != grid.dim:
        raise ValidationError("configuration and grid dimensions differ")
    q = frac_gcd(config.quantum, grid.quantum)
    sf = int(config.quantum / q)
    gf = int(grid.quantum / q)
    routed: dict[int, int] = {}
    atoms = []
    for i in range(len(config)):
        if i not in assignment:
            raise ValidationError(f"point {i} has no assigned cell")
        cell = assignment[i]
        if not 0 <= cell < len(grid):
            raise ValidationError(f"point {i} assigned to nonexistent cell {cell}")
        m = config.masses[i] * sf
        routed[cell] = routed.get(cell, 0) + m
        atoms.append((i, cell, m))
    for cell in range(len(grid)):
        want = grid.cells[cell] * gf
        got = routed.get(cell, 0)
        if got != want:
            raise ValidationError(
                f"assignment is not mass-compatible at cell {cell}: "
                f"assigned {got * q} but the cell holds {want * q}")
    return TransportPlan(config, grid, tuple(atoms), q)


def average_plans(plans: Sequence[TransportPlan],
                  common_source: Measure | None = None) -> TransportPlan:
    """Sum N plans sharing one source; the 1/N scale lives in the quantum.

    The result couples the source with the sum of the target measures
    (targets concatenated, ids offset).  Atom masses stay integral; the
    radius of the sum is the maximum of the input radii.
    """
    if not plans:
        raise ValidationError("average_plans needs at least one plan")
    source = common_source if common_source is not None else plans[0].source
    for k, plan in enumerate(plans):
        if plan.source != source:
            raise ValidationError(f"plan {k} does not share the common source measure")
        if not isinstance(plan.target, PointConfiguration):
            raise ValidationError("average_plans supports atomic (point) targets only")
    n = len(plans)
    q0 = plans[0].quantum
    for plan in plans[1:]:
        q0 = frac_gcd(q0, plan.quantum)
    qt0 = plans[0].target.quantum
    for plan in plans[1:]:
        qt0 = frac_gcd(qt0, plan.target.quantum)

    window = plans[0].target.window
    pts: list = []
    masses: list[int] = []
    atoms: list[tuple[int, int, int]] = []
    offset = 0
    for plan in plans:
        scaled = plan.with_quantum(q0)
        tgt = plan.target
        if not same_metric(tgt.window, window):
            raise ValidationError("averaged targets live under incompatible windows")
        tf = int(tgt.quantum / qt0)
        pts.extend(tgt.points)
        masses.extend(m * tf for m in tgt.masses)
        atoms.extend((s, t + offset, m) for s, t, m in scaled.atoms)
        offset += len(tgt)
    sum_target = PointConfiguration(window, tuple(pts), tuple(masses), qt0 / n)
    return TransportPlan(source, sum_target, tuple(atoms), q0 / n)
