"""Uniform-spread diagnostics built on the bottleneck solver.

A configuration is "uniformly spread" when it stays within bounded bottleneck
distance of a scaled lattice, of a multiple of Lebesgue measure, and of all
its own translates; these notions coincide, and each operation here measures
one of them on a finite torus window:

* ``shift_distance`` / ``shift_sweep`` — distance to translates, with a
  Lipschitz-certified bound on the supremum over all shifts;
* ``lattice_displacement`` — the windowed bijection-to-lattice displacement;
* ``lebesgue_distance`` — distance to the uniform density, via grids;
* ``verify_chain`` — the constructive inequality tying the two above;
* ``cesaro_average`` — shift-averaging that flattens cell masses;
* ``shift_bijection`` — the translate coupling read off as a permutation;
* ``growth_analysis`` — detects distances growing with the window, the
  finite-window signature of a configuration that is not uniformly spread.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CountMismatchError, ValidationError
from .generators import GeneratorSpec, generate
from .geometry import (
    PointConfiguration,
    Window,
    bin_to_grid,
    make_lattice,
    pair_distance,
    shift,
    uniform_grid,
)
from .solver import DistanceResult, bottleneck_distance, point_to_grid_distance
from .transport import average_plans, verify_marginals

SCHEMA_VERSION = "1.0.0"

GROWTH_DETECTED = "growth-detected"
SPREAD_CONSISTENT = "spread-consistent"

#: presets for shift_grid / shift_sweep
COARSE, FINE, INTEGERS = "coarse", "fine", "integers"


def shift_distance(config: PointConfiguration, z: Sequence[float]) -> DistanceResult:
    """Bottleneck distance from a configuration to its translate by ``z``.

    Torus windows only, so that both measures carry the same mass.  The value
    never exceeds the torus length of ``z`` (identity pairing).
    """
    if not config.window.is_torus:
        raise ValidationError("shift_distance requires a torus window: translating a "
                              "free window changes the restricted mass")
    if len(z) != config.dim:
        raise ValidationError(f"shift vector has {len(z)} coordinates, window has dim {config.dim}")
    return bottleneck_distance(config, shift(config, z))


def _product_covering_radius(axis_offsets: Sequence[Sequence[float]], side: float) -> float:
    """Covering radius of a product sample grid on the torus (half max gap per axis)."""
    acc = 0.0
    for offs in axis_offsets:
        xs = sorted(set(offs))
        gaps = [b - a for a, b in zip(xs, xs[1:])]
        gaps.append(side - xs[-1] + xs[0])
        acc += (max(gaps) / 2.0) ** 2
    return math.sqrt(acc)


def shift_grid(window: Window, preset: str = COARSE) -> tuple[list[tuple[float, ...]], float]:
    """Sample shifts for a sweep, plus the grid's covering radius.

    * ``coarse`` — quarter-window steps per axis, ``4^d`` shifts;
    * ``integers`` — coarse plus every integer shift up to ``L/2`` per axis;
    * ``fine`` — quarter-cell steps over the whole fundamental domain
      (contains every integer shift), covering radius ``sqrt(d)/8``.
    """
    L = window.side
    if preset == COARSE:
        offs = [j * L / 4.0 for j in range(4)]
    elif preset == INTEGERS:
        offs = sorted({j * L / 4.0 for j in range(4)}
                      | {float(i) for i in range(int(L // 2) + 1)})
    elif preset == FINE:
        offs = [0.25 * j for j in range(int(math.ceil(L / 0.25)))]
    else:
        raise ValidationError(f"unknown shift-grid preset {preset!r}; "
                              f"expected one of {COARSE!r}, {INTEGERS!r}, {FINE!r}")
    offs = [x for x in offs if x < L]
    axes = [offs] * window.dim
    shifts = [tuple(c) for c in itertools.product(*axes)]
    return shifts, _product_covering_radius(axes, L)


@dataclass(frozen=True)
class ShiftSweepReport:
    """Per-shift distances plus the empirical and certified sweep maxima.

    ``max_shift_distance`` is the largest sampled value — an empirical lower
    bound on the true supremum over all shifts.  When the shifts came from a
    preset grid, ``certified_sup_bound = max + covering_radius`` is a rigorous
    upper bound, since the shift distance is 1-Lipschitz in the shift vector.
    """

    window: Window
    shifts: tuple[tuple[float, ...], ...]
    results: tuple[DistanceResult, ...]
    max_shift_distance: float
    covering_radius: Optional[float] = None
    certified_sup_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "window": self.window.to_dict(),
            "shifts": [list(z) for z in self.shifts],
            "results": [r.to_dict() for r in self.results],
            "max_shift_distance": self.max_shift_distance,
            "covering_radius": self.covering_radius,
            "certified_sup_bound": self.certified_sup_bound,
        }


def shift_sweep(config: PointConfiguration,
                shifts: Optional[Sequence[Sequence[float]]] = None,
                preset: str = COARSE) -> ShiftSweepReport:
    """Evaluate shift_distance over a grid of shifts (default: quarter-window)."""
    covering = None
    if shifts is None:
        shifts, covering = shift_grid(config.window, preset)
    shifts = [tuple(float(c) for c in z) for z in shifts]
    if not shifts:
        raise ValidationError("empty shift list")
    results = tuple(shift_distance(config, z) for z in shifts)
    peak = max(r.value for r in results)
    return ShiftSweepReport(
        window=config.window,
        shifts=tuple(shifts),
        results=results,
        max_shift_distance=peak,
        covering_radius=covering,
        certified_sup_bound=None if covering is None else peak + covering,
    )


def lattice_displacement(config: PointConfiguration, alpha: float) -> DistanceResult:
    """Bottleneck distance to the ``alpha``-lattice restricted to the window.

    The finite-window version of the bijection-to-lattice displacement: point
    count must match the site count (a mismatch is itself evidence the
    configuration has the wrong density, and is reported, never padded).
    """
    if not config.window.is_torus:
        raise ValidationError("lattice_displacement requires a torus window")
    lattice = make_lattice(alpha, config.window)
    if len(config) != len(lattice):
        raise CountMismatchError(len(config), len(lattice))
    return bottleneck_distance(config, lattice)


def lebesgue_distance(config: PointConfiguration, beta: Optional[float] = None,
                      h: float = 1.0, s: int = 1,
                      max_refine: int = 10 ** 6) -> DistanceResult:
    """Certified bottleneck distance to ``beta`` times the uniform density.

    The continuous target is discretized as the grid of ``h``-cells with mass
    ``beta * h^d`` each, then atomized at ``s^d`` subcell centers; the result
    carries ``error_bound = (h/s)*sqrt(d)/2``, bounding the discretization gap
    in both directions.  ``beta`` defaults to the empirical density; a
    user-supplied value must match the total mass (no silent rescaling).
    """
    if not config.window.is_torus:
        raise ValidationError("lebesgue_distance requires a torus window")
    total = config.total_mass()
    volume = config.window.volume()
    if beta is not None:
        implied = beta * volume
        if abs(implied - float(total)) > 1e-9 * max(1.0, float(total)):
            raise ValidationError(
                f"beta*L^d = {implied!r} does not match total mass {float(total)!r}; "
                "beta must equal total mass / window volume")
    per_axis = round(config.window.side / h)
    cells = per_axis ** config.dim
    if total == 0:
        raise ValidationError("lebesgue_distance needs a nonempty configuration")
    grid = uniform_grid(config.window, h, cell_mass=1, quantum=total / cells)
    return point_to_grid_distance(config, grid, s=s, max_refine=max_refine)


@dataclass(frozen=True)
class ChainReport:
    """Lattice and Lebesgue distances with the constructive bound between them.

    ``constructive_ok`` asserts the provable direction (route the lattice plan
    through each site's own cell): lebesgue value ≤ lattice value +
    alpha*sqrt(d)/2 + error_bound.  ``displacement_ratio`` (lattice/lebesgue)
    is recorded as an observation only — the reverse direction's constant is
    not computed, merely monitored.
    """

    alpha: float
    lattice: DistanceResult
    lebesgue: DistanceResult
    bound: float
    constructive_ok: bool
    displacement_ratio: float

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "alpha": self.alpha,
            "lattice": self.lattice.to_dict(),
            "lebesgue": self.lebesgue.to_dict(),
            "bound": self.bound,
            "constructive_ok": self.constructive_ok,
            "displacement_ratio": self.displacement_ratio,
        }


def verify_chain(config: PointConfiguration, alpha: float, s: int = 1,
                 tol: float = 1e-9) -> ChainReport:
    """Check the constructive inequality between the lattice and Lebesgue routes."""
    d_lat = lattice_displacement(config, alpha)
    beta = alpha ** (-config.dim)
    d_leb = lebesgue_distance(config, beta=beta, h=alpha, s=s)
    bound = d_lat.value + alpha * math.sqrt(config.dim) / 2.0 + d_leb.error_bound
    ratio = d_lat.value / max(d_leb.value, 1e-12)
    return ChainReport(
        alpha=alpha,
        lattice=d_lat,
        lebesgue=d_leb,
        bound=bound,
        constructive_ok=d_leb.value <= bound + tol,
        displacement_ratio=ratio,
    )


@dataclass(frozen=True)
class CesaroReport:
    """Shift-averaged measure on unit cells, its flatness, and its distance.

    ``cell_masses`` (units of ``cell_quantum``) are the exact target marginal
    of the averaged plan binned to unit cells; ``spread`` is max−min cell mass
    in mass units.  ``bound_satisfied`` checks the averaging inequality:
    distance to the average never exceeds the worst shift distance used (plus
    grid error)."""

    k: tuple[int, ...]
    n: int
    shifts: tuple[tuple[int, ...], ...]
    shift_values: tuple[float, ...]
    max_shift_value: float
    cell_masses: tuple[int, ...]
    cell_quantum: Fraction
    spread: float
    distance: DistanceResult
    bound_satisfied: bool
    marginals_verified: bool

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "k": list(self.k),
            "n": self.n,
            "shifts": [list(m) for m in self.shifts],
            "shift_values": list(self.shift_values),
            "max_shift_value": self.max_shift_value,
            "cell_masses": list(self.cell_masses),
            "cell_quantum_num": self.cell_quantum.numerator,
            "cell_quantum_den": self.cell_quantum.denominator,
            "spread": self.spread,
            "distance": self.distance.to_dict(),
            "bound_satisfied": self.bound_satisfied,
            "marginals_verified": self.marginals_verified,
        }


def cesaro_average(config: PointConfiguration, k: Optional[Sequence[int]] = None,
                   n: int = 1, s: int = 1, tol: float = 1e-9) -> CesaroReport:
    """Average the configuration over the integer shifts ``|m - k|_inf <= n``.

    Builds the witness plan of every shift in the box, averages the plans,
    bins the averaged target into unit cells, and measures how flat the cell
    masses are and how far the average sits from the original configuration.
    """
    if not config.window.is_torus:
        raise ValidationError("cesaro_average requires a torus window")
    if n < 0:
        raise ValidationError(f"averaging half-width must be >= 0, got {n}")
    if k is None:
        k = (0,) * config.dim
    k = tuple(int(c) for c in k)
    if len(k) != config.dim:
        raise ValidationError(f"k has {len(k)} coordinates, window has dim {config.dim}")
    box = [range(c - n, c + n + 1) for c in k]
    shifts = [tuple(m) for m in itertools.product(*box)]
    results = [shift_distance(config, tuple(float(c) for c in m)) for m in shifts]
    averaged = average_plans([r.witness for r in results])
    marginals_ok = bool(verify_marginals(averaged))
    binned = bin_to_grid(averaged.target, h=1.0)
    lo, hi = min(binned.cells), max(binned.cells)
    dist = point_to_grid_distance(config, binned, s=s)
    peak = max(r.value for r in results)
    return CesaroReport(
        k=k,
        n=n,
        shifts=tuple(shifts),
        shift_values=tuple(r.value for r in results),
        max_shift_value=peak,
        cell_masses=binned.cells,
        cell_quantum=binned.quantum,
        spread=float((hi - lo) * binned.quantum),
        distance=dist,
        bound_satisfied=dist.value <= peak + dist.error_bound + tol,
        marginals_verified=marginals_ok,
    )


@dataclass(frozen=True)
class BijectionReport:
    """The optimal shift coupling of a simple configuration, as a permutation.

    ``pairing`` lists (n, sigma(n)) meaning point ``n`` translated by ``z``
    is matched to point ``sigma(n)``; ``max_displacement`` is the recomputed
    worst displacement over the pairing and equals the shift distance.
    """

    z: tuple[float, ...]
    pairing: tuple[tuple[int, int], ...]
    max_displacement: float
    distance: DistanceResult

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "z": list(self.z),
            "pairing": [list(p) for p in self.pairing],
            "max_displacement": self.max_displacement,
            "distance": self.distance.to_dict(),
        }


def shift_bijection(config: PointConfiguration, z: Sequence[float]) -> BijectionReport:
    """Read the optimal translate coupling off as an index bijection.

    Only defined for unit masses, where the optimal plan is a permutation.
    """
    if any(m != 1 for m in config.masses):
        raise ValidationError("shift_bijection requires unit masses "
                              "(the coupling is a permutation only for simple configurations)")
    z = tuple(float(c) for c in z)
    result = shift_distance(config, z)
    translated = shift(config, z)
    # plan atom (i, j): original point i receives translated point j,
    # i.e. sigma(j) = i with displacement |a_j + z - a_i|
    pairing = tuple(sorted((j, i) for i, j, _ in result.witness.atoms))
    worst = 0.0
    for m, sig in pairing:
        worst = max(worst, pair_distance(translated.points[m], config.points[sig],
                                         config.window))
    n = len(config)
    if sorted(p for p, _ in pairing) != list(range(n)) or sorted(q for _, q in pairing) != list(range(n)):
        raise ValidationError("witness plan did not induce a bijection")
    return BijectionReport(z=z, pairing=pairing, max_displacement=worst, distance=result)


@dataclass(frozen=True)
class GrowthReport:
    """Distance-vs-window-side trend with a threshold classification.

    ``classification`` is growth-detected when the fitted slope exceeds
    ``slope_threshold`` and the last value exceeds the first by
    ``ratio_threshold``; both are tunable defaults, not theory.
    """

    kind: str
    route: str
    sides: tuple[float, ...]
    values: tuple[float, ...]
    error_bounds: tuple[float, ...]
    slope: float
    ratio: float
    classification: str
    slope_threshold: float
    ratio_threshold: float

    def entries(self) -> list[tuple[float, float, float]]:
        return list(zip(self.sides, self.values, self.error_bounds))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "route": self.route,
            "entries": [{"L": L, "value": v, "error_bound": e}
                        for L, v, e in self.entries()],
            "slope": self.slope,
            "ratio": self.ratio,
            "classification": self.classification,
            "slope_threshold": self.slope_threshold,
            "ratio_threshold": self.ratio_threshold,
        }


def write_growth_csv(report: GrowthReport, path) -> None:
    """CSV companion (L, value, error_bound) for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["L", "value", "error_bound"])
        for L, v, e in report.entries():
            writer.writerow([f"{L:.17g}", f"{v:.17g}", f"{e:.17g}"])


def growth_analysis(family: GeneratorSpec, sides: Sequence[float],
                    route: str = "lebesgue",
                    betas: Union[None, float, Sequence[float]] = None,
                    h: float = 1.0, s: int = 1,
                    preset: str = COARSE,
                    slope_threshold: float = 0.05,
                    ratio_threshold: float = 1.5) -> GrowthReport:
    """Run a distance route over growing windows and classify the trend.

    A uniformly spread family keeps its distances bounded as the window
    grows; distances trending upward (steep fitted slope and last/first
    ratio) are classified as growth-detected.
    """
    sides = [float(L) for L in sides]
    if len(sides) < 3 or any(b <= a for a, b in zip(sides, sides[1:])):
        raise ValidationError("growth_analysis needs at least 3 strictly increasing window sides")
    if route not in ("lebesgue", "sweep"):
        raise ValidationError(f"unknown route {route!r}; expected 'lebesgue' or 'sweep'")
    if betas is None or isinstance(betas, (int, float)):
        betas = [betas] * len(sides)
    elif len(betas) != len(sides):
        raise ValidationError(f"got {len(betas)} betas for {len(sides)} window sides")
    values, errors = [], []
    for L, beta in zip(sides, betas):
        window = replace(family.window, side=float(L))
        config = generate(replace(family, window=window))
        if route == "lebesgue":
            res = lebesgue_distance(config, beta=beta, h=h, s=s)
            values.append(res.value)
            errors.append(res.error_bound)
        else:
            sweep = shift_sweep(config, preset=preset)
            values.append(sweep.max_shift_distance)
            errors.append(0.0)
    slope = float(np.polyfit(sides, values, 1)[0])
    if values[0] > 0:
        ratio = values[-1] / values[0]
    else:
        ratio = math.inf if values[-1] > 0 else 1.0
    grew = slope > slope_threshold and ratio >= ratio_threshold
    return GrowthReport(
        kind=family.kind,
        route=route,
        sides=tuple(sides),
        values=tuple(values),
        error_bounds=tuple(errors),
        slope=slope,
        ratio=ratio,
        classification=GROWTH_DETECTED if grew else SPREAD_CONSISTENT,
        slope_threshold=slope_threshold,
        ratio_threshold=ratio_threshold,
    )
