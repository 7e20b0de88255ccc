"""Windows, point configurations, grid measures, and the metric they share.

Everything downstream (plans, the bottleneck solver, the spread criterion)
consumes the objects defined here:

* ``Window``     -- a cubical computation domain, periodic (torus) or not (free).
* ``PointConfiguration`` -- finitely many weighted atoms with integer masses
  expressed in units of a rational mass quantum.
* ``GridMeasure``        -- a piecewise-uniform measure given by integer cell
  masses on a regular cubical grid.

All cubes are half-open per axis, so grids partition the window exactly and
binning never double-counts.  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError

Coords = tuple[float, ...]

TORUS = "torus"
FREE = "free"


def frac_gcd(a, b) -> Fraction:
    """Greatest common divisor of two positive rationals."""
    a, b = Fraction(a), Fraction(b)
    num = math.gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


# ---------------------------------------------------------------------------
# Window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Half-open cubical domain ``[lower_j, lower_j + side)`` per axis.

    boundary ``"torus"`` identifies opposite faces (periodic); ``"free"``
    leaves the cube embedded in Euclidean space.
    """

    dim: int
    lower: Coords
    side: float
    boundary: str = TORUS

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.dim}")
        if not self.side > 0:
            raise ValidationError(f"window side must be positive, got {self.side}")
        if len(self.lower) != self.dim:
            raise ValidationError(
                f"lower corner has {len(self.lower)} coordinates for dimension {self.dim}")
        if self.boundary not in (TORUS, FREE):
            raise ValidationError(f"boundary must be 'torus' or 'free', got {self.boundary!r}")
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "side", float(self.side))

    @property
    def is_torus(self) -> bool:
        return self.boundary == TORUS

    @property
    def upper(self) -> Coords:
        return tuple(lo + self.side for lo in self.lower)

    def volume(self) -> float:
        return self.side ** self.dim

    def contains(self, coords: Sequence[float]) -> bool:
        return all(lo <= x < lo + self.side for lo, x in zip(self.lower, coords))

    def wrap(self, coords: Sequence[float]) -> Coords:
        """Wrap coordinates into the half-open window (torus reduction)."""
        out = []
        for lo, x in zip(self.lower, coords):
            w = (x - lo) % self.side
            if w >= self.side:  # float mod can land exactly on side
                w = 0.0
            y = lo + w
            if y >= lo + self.side:
                y = lo
            out.append(y)
        return tuple(out)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "lower": list(self.lower),
                "side": self.side, "boundary": self.boundary}

    @staticmethod
    def from_dict(d: dict) -> "Window":
        return Window(int(d["dim"]), tuple(d["lower"]), float(d["side"]), d["boundary"])


def same_metric(a: Window, b: Window) -> bool:
    """True when distances computed under either window agree."""
    if a.dim != b.dim or a.boundary != b.boundary:
        return False
    if a.is_torus and a.side != b.side:
        return False
    return True


# ---------------------------------------------------------------------------
# Metric helpers
#
# Scalar and batch paths accumulate per-axis terms in the same order so that
# a distance recomputed for one atom is bit-identical to the matrix entry the
# solver used.
# ---------------------------------------------------------------------------

def _axis_torus(delta: float, side: float) -> float:
    r = abs(delta) % side
    if r >= side:
        r = 0.0
    return min(r, side - r)


def pair_distance(p: Sequence[float], q: Sequence[float], window: Window) -> float:
    """Euclidean distance between two points, torus-reduced when periodic."""
    acc = 0.0
    if window.is_torus:
        for a, b in zip(p, q):
            t = _axis_torus(a - b, window.side)
            acc += t * t
    else:
        for a, b in zip(p, q):
            t = a - b
            acc += t * t
    return math.sqrt(acc)


def distance_matrix(points_a: np.ndarray, points_b: np.ndarray, window: Window) -> np.ndarray:
    """All pairwise distances, shape (len(a), len(b))."""
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    acc = np.zeros((a.shape[0], b.shape[0]))
    for ax in range(window.dim):
        delta = a[:, ax, None] - b[None, :, ax]
        if window.is_torus:
            r = np.abs(delta) % window.side
            r[r >= window.side] = 0.0
            t = np.minimum(r, window.side - r)
        else:
            t = delta
        acc += t * t
    return np.sqrt(acc)


def vector_norm(z: Sequence[float], window: Window) -> float:
    """Length of a shift vector under the window metric (torus-reduced length)."""
    acc = 0.0
    for zi in z:
        t = _axis_torus(zi, window.side) if window.is_torus else zi
        acc += t * t
    return math.sqrt(acc)


def _axis_interval_max(lo: float, hi: float, side: float, torus: bool) -> float:
    """Max per-axis distance when the signed difference ranges over [lo, hi]."""
    if not torus:
        return max(abs(lo), abs(hi))
    if hi - lo >= side:
        return side / 2.0
    # does [lo, hi] contain a point congruent to side/2 (the antipode)?
    k = math.ceil((lo - side / 2.0) / side)
    if side / 2.0 + k * side <= hi:
        return side / 2.0
    return max(_axis_torus(lo, side), _axis_torus(hi, side))


def max_box_distance(box_a: Sequence[tuple[float, float]],
                     box_b: Sequence[tuple[float, float]],
                     window: Window) -> float:
    """Largest distance between a point of closed box A and one of closed box B.

    Boxes are per-axis ``(min, max)`` pairs; a point is a degenerate box.  Used
    for conservative plan displacements involving grid cells.
    """
    acc = 0.0
    for (a1, b1), (a2, b2) in zip(box_a, box_b):
        t = _axis_interval_max(a1 - b2, b1 - a2, window.side, window.is_torus)
        acc += t * t
    return math.sqrt(acc)


# ---------------------------------------------------------------------------
# PointConfiguration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointConfiguration:
    """Finite atomic measure: sum of point masses ``masses[i] * quantum``.

    Masses are positive integers in units of ``quantum`` (a positive rational),
    so every mass comparison downstream is exact.  Duplicate locations are
    allowed.  In torus mode every coordinate must already lie inside the
    half-open window; use :meth:`Window.wrap` before construction.
    """

    window: Window
    points: tuple[Coords, ...]
    masses: Optional[tuple[int, ...]] = None  # default: unit masses
    quantum: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "points",
                           tuple(tuple(float(x) for x in p) for p in self.points))
        if self.masses is None:
            object.__setattr__(self, "masses", (1,) * len(self.points))
        object.__setattr__(self, "masses", tuple(int(m) for m in self.masses))
        object.__setattr__(self, "quantum", Fraction(self.quantum))
        if len(self.points) != len(self.masses):
            raise ValidationError("points and masses must have equal length")
        if self.quantum <= 0:
            raise ValidationError(f"mass quantum must be positive, got {self.quantum}")
        d = self.window.dim
        for i, p in enumerate(self.points):
            if len(p) != d:
                raise ValidationError(f"point {i} has {len(p)} coordinates, expected {d}")
        for i, m in enumerate(self.masses):
            if m < 1:
                raise ValidationError(f"point {i} has non-positive mass {m}")
        if self.window.is_torus:
            for i, p in enumerate(self.points):
                if not self.window.contains(p):
                    raise ValidationError(
                        f"point {i} at {p} lies outside the torus window "
                        f"[{self.window.lower}, side {self.window.side})")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.window.dim

    def total_mass(self) -> Fraction:
        return self.quantum * sum(self.masses)

    def coords_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(len(self.points), self.dim)

    def with_scaled_masses(self, factor: int) -> "PointConfiguration":
        """Refine the quantum by ``factor``: same measure, finer units."""
        if factor == 1:
            return self
        return PointConfiguration(self.window, self.points,
                                  tuple(m * factor for m in self.masses),
                                  self.quantum / factor)


def shift(config: PointConfiguration, z: Sequence[float]) -> PointConfiguration:
    """Translate every point by ``z``; torus windows wrap, free windows do not."""
    if len(z) != config.dim:
        raise ValidationError(f"shift vector has {len(z)} coordinates, expected {config.dim}")
    if config.window.is_torus:
        pts = tuple(config.window.wrap(tuple(x + dz for x, dz in zip(p, z)))
                    for p in config.points)
    else:
        pts = tuple(tuple(x + dz for x, dz in zip(p, z)) for p in config.points)
    return PointConfiguration(config.window, pts, config.masses, config.quantum)


def restrict(config: PointConfiguration, window: Window) -> PointConfiguration:
    """Keep exactly the points inside the half-open window; masses unchanged."""
    if window.dim != config.dim:
        raise ValidationError("restriction window dimension mismatch")
    kept = [(p, m) for p, m in zip(config.points, config.masses) if window.contains(p)]
    return PointConfiguration(window,
                              tuple(p for p, _ in kept),
                              tuple(m for _, m in kept),
                              config.quantum)


def make_lattice(alpha: float, window: Window) -> PointConfiguration:
    """Unit masses on ``alpha * Z^d`` intersected with the window.

    Points are ordered lexicographically by lattice index.  In torus mode the
    side must be an integer multiple of ``alpha`` or the wrap would create
    uneven spacing.
    """
    if not alpha > 0:
        raise ValidationError(f"lattice spacing must be positive, got {alpha}")
    ratio = window.side / alpha
    if window.is_torus and abs(ratio - round(ratio)) > 1e-9:
        raise ValidationError(
            f"torus side {window.side} is not an integer multiple of spacing {alpha}")
    ranges = []
    for lo in window.lower:
        n_lo = math.ceil(lo / alpha - 1e-12)
        n_hi = math.ceil((lo + window.side) / alpha - 1e-12)  # exclusive
        ranges.append(range(n_lo, n_hi))
    pts = []
    for idx in itertools.product(*ranges):
        p = tuple(alpha * m for m in idx)
        if window.contains(p):
            pts.append(p)
    return PointConfiguration(window, tuple(pts), (1,) * len(pts))


# ---------------------------------------------------------------------------
# GridMeasure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridMeasure:
    """Piecewise-uniform measure: integer mass per half-open cubical cell.

    Cells tile ``[origin_j, origin_j + side)`` per axis with spacing ``h``;
    the window side must be an integer multiple of ``h``.  Cell masses are
    stored row-major (last axis fastest) in units of ``quantum``.
    """

    window: Window
    origin: Coords
    h: float
    cells: tuple[int, ...]
    quantum: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        object.__setattr__(self, "quantum", Fraction(self.quantum))
        if not self.h > 0:
            raise ValidationError(f"cell size must be positive, got {self.h}")
        if self.quantum <= 0:
            raise ValidationError(f"mass quantum must be positive, got {self.quantum}")
        if len(self.origin) != self.window.dim:
            raise ValidationError("grid origin dimension mismatch")
        ratio = self.window.side / self.h
        n = round(ratio)
        if abs(ratio - n) > 1e-9 or n < 1:
            raise ValidationError(
                f"window side {self.window.side} is not an integer multiple of cell size {self.h}")
        if len(self.cells) != n ** self.window.dim:
            raise ValidationError(
                f"expected {n ** self.window.dim} cells ({n} per axis), got {len(self.cells)}")
        if any(c < 0 for c in self.cells):
            raise ValidationError("cell masses must be nonnegative")

    @property
    def dim(self) -> int:
        return self.window.dim

    @property
    def cells_per_axis(self) -> int:
        return round(self.window.side / self.h)

    def __len__(self) -> int:
        return len(self.cells)

    def total_mass(self) -> Fraction:
        return self.quantum * sum(self.cells)

    def cell_mass(self, k) -> int:
        """Stored integer mass of cell ``k`` (flat row-major index or multi-index)."""
        flat = self.flat_index(k) if isinstance(k, (tuple, list)) else int(k)
        if not 0 <= flat < len(self.cells):
            raise IndexError(f"cell index {k} out of range for {len(self.cells)} cells")
        return self.cells[flat]

    def flat_index(self, multi: Sequence[int]) -> int:
        n = self.cells_per_axis
        if len(multi) != self.dim:
            raise IndexError(f"cell multi-index {multi} has wrong dimension")
        flat = 0
        for c in multi:
            if not 0 <= c < n:
                raise IndexError(f"cell multi-index {multi} out of range ({n} per axis)")
            flat = flat * n + c
        return flat

    def multi_index(self, flat: int) -> tuple[int, ...]:
        n = self.cells_per_axis
        out = []
        for _ in range(self.dim):
            out.append(flat % n)
            flat //= n
        return tuple(reversed(out))

    def cell_box(self, flat: int) -> tuple[tuple[float, float], ...]:
        """Closed bounding box of cell ``flat`` in grid coordinates."""
        multi = self.multi_index(flat)
        return tuple((o + c * self.h, o + (c + 1) * self.h)
                     for o, c in zip(self.origin, multi))

    def cell_center(self, flat: int) -> Coords:
        multi = self.multi_index(flat)
        return tuple(o + (c + 0.5) * self.h for o, c in zip(self.origin, multi))

    def locate(self, coords: Sequence[float]) -> int:
        """Flat index of the cell containing a point (torus-wrapped)."""
        n = self.cells_per_axis
        flat = 0
        for o, x in zip(self.origin, coords):
            c = math.floor((x - o) / self.h)
            if self.window.is_torus:
                c %= n
            if not 0 <= c < n:
                raise ValidationError(f"point {tuple(coords)} falls outside the grid")
            flat = flat * n + c
        return flat

    def to_dict(self) -> dict:
        return {"dim": self.dim, "origin": list(self.origin), "h": self.h,
                "L": self.window.side, "quantum": str(self.quantum),
                "cells": list(self.cells)}


def grid_from_dict(d: dict, window: Window) -> GridMeasure:
    return GridMeasure(window, tuple(d["origin"]), float(d["h"]),
                       tuple(d["cells"]), Fraction(str(d["quantum"])))


def uniform_grid(window: Window, h: float, cell_mass: int = 1,
                 quantum: Fraction = Fraction(1), centered: bool = True) -> GridMeasure:
    """Grid with equal cell masses.

    ``centered=True`` places cell centers on the scaled lattice sites
    ``window.lower + h * Z^d`` (cells are the half-open cubes of side ``h``
    around those sites), which is the natural alignment for comparing a
    lattice-like configuration with its uniform counterpart.
    """
    n = round(window.side / h)
    origin = tuple(lo - h / 2.0 for lo in window.lower) if centered else window.lower
    return GridMeasure(window, origin, h, (int(cell_mass),) * (n ** window.dim), quantum)


def bin_to_grid(config: PointConfiguration, h: float, centered: bool = True) -> GridMeasure:
    """Bin point masses into grid cells (integer masses, quantum preserved)."""
    n = round(config.window.side / h)
    origin = (tuple(lo - h / 2.0 for lo in config.window.lower)
              if centered else config.window.lower)
    proto = GridMeasure(config.window, origin, h, (0,) * (n ** config.dim), config.quantum)
    counts = [0] * len(proto)
    for p, m in zip(config.points, config.masses):
        counts[proto.locate(p)] += m
    return GridMeasure(config.window, origin, h, tuple(counts), config.quantum)


def atomize_grid(grid: GridMeasure, s: int = 1,
                 max_refine: int = 10 ** 6) -> tuple[PointConfiguration, float]:
    """Replace each cell by ``s^d`` equal atoms at subcell centers.

    Returns the atomic configuration and the displacement slack
    ``(h/s) * sqrt(d) / 2`` between a subcell center and the farthest point of
    its subcell.  Cell masses that are not divisible by ``s^d`` force a quantum
    refinement; the refinement factor is capped by ``max_refine``.
    """
    if s < 1:
        raise ValidationError(f"subdivision factor must be >= 1, got {s}")
    d = grid.dim
    pieces = s ** d
    g = math.gcd(pieces, math.gcd(*grid.cells) if any(grid.cells) else pieces)
    factor = pieces // g
    if factor > max_refine:
        raise ValidationError(
            f"quantum refinement factor {factor} exceeds the cap {max_refine}")
    sub_mass = {flat: c * factor // pieces for flat, c in enumerate(grid.cells)}
    quantum = grid.quantum / factor
    pts: list[Coords] = []
    masses: list[int] = []
    offsets = list(itertools.product(range(s), repeat=d))
    for flat in range(len(grid)):
        m = sub_mass[flat]
        if m == 0:
            continue
        multi = grid.multi_index(flat)
        for off in offsets:
            p = tuple(o + (c + (2 * t + 1) / (2 * s)) * grid.h
                      for o, c, t in zip(grid.origin, multi, off))
            if grid.window.is_torus:
                p = grid.window.wrap(p)
            pts.append(p)
            masses.append(m)
    config = PointConfiguration(grid.window, tuple(pts), tuple(masses), quantum)
    slack = (grid.h / s) * math.sqrt(d) / 2.0
    return config, slack


# ---------------------------------------------------------------------------
# Point-set files
#
# Line 1: ``dim <d>``.  Each following line: d whitespace-separated decimal
# coordinates plus an optional trailing integer mass (default 1).  Blank lines
# and ``#`` comments are skipped.
# ---------------------------------------------------------------------------

def read_point_file(path: str, window: Window) -> PointConfiguration:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read point file {path}: {exc}") from exc
    dim = None
    pts: list[Coords] = []
    masses: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if dim is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "dim":
                raise ValidationError(f"{path}:{lineno}: expected header 'dim <d>', got {line!r}")
            try:
                dim = int(parts[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad dimension {parts[1]!r}") from None
            if dim != window.dim:
                raise ValidationError(
                    f"{path}:{lineno}: file dimension {dim} != window dimension {window.dim}")
            continue
        parts = line.split()
        if len(parts) == dim:
            mass = 1
        elif len(parts) == dim + 1:
            try:
                mass = int(parts[-1])
            except ValueError:
                raise ValidationError(
                    f"{path}:{lineno}: trailing mass {parts[-1]!r} is not an integer") from None
            parts = parts[:dim]
        else:
            raise ValidationError(
                f"{path}:{lineno}: expected {dim} coordinates "
                f"(plus optional mass), got {len(parts)} fields")
        try:
            coords = tuple(float(v) for v in parts)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: non-numeric coordinate in {line!r}") from None
        if mass < 1:
            raise ValidationError(f"{path}:{lineno}: mass must be >= 1, got {mass}")
        pts.append(coords)
        masses.append(mass)
    if dim is None:
        raise ValidationError(f"{path}: empty point file (missing 'dim <d>' header)")
    return PointConfiguration(window, tuple(pts), tuple(masses))


def write_point_file(config: PointConfiguration, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim {config.dim}\n")
        for p, m in zip(config.points, config.masses):
            coords = " ".join(repr(x) for x in p)
            fh.write(f"{coords} {m}\n" if m != 1 else f"{coords}\n")


def write_grid_json(grid: GridMeasure, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(grid.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
