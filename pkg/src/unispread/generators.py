"""Reproducible point-configuration families for exercising the criterion.

Every family is a pure function of its ``GeneratorSpec``: randomness comes
from a counter-based generator keyed on the seed field, so a JSON spec
replays to the identical configuration.  The families cover both verdicts: perturbed
lattices and the cut-and-project sequence stay uniformly spread; the
density-defect family does not (its half windows have different densities,
forcing transports that grow with the window).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import PointConfiguration, Window, make_lattice

KINDS = ("lattice", "perturbed", "poisson", "fibonacci", "density_defect")

_PHI = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of a point family; the CLI's JSON config unit."""

    kind: str
    window: Window
    alpha: float = 1.0
    epsilon: float = 0.0
    intensity: float = 1.0
    densities: tuple[float, float] = (1.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if self.epsilon < 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.intensity <= 0:
            raise ValidationError(f"intensity must be positive, got {self.intensity}")
        if len(self.densities) != 2 or any(r <= 0 for r in self.densities):
            raise ValidationError(f"densities must be a positive pair, got {self.densities}")
        object.__setattr__(self, "densities", tuple(float(r) for r in self.densities))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "window": self.window.to_dict(),
                "alpha": self.alpha, "epsilon": self.epsilon,
                "intensity": self.intensity, "densities": list(self.densities),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        try:
            window = Window.from_dict(d["window"])
            return cls(kind=d["kind"], window=window,
                       alpha=float(d.get("alpha", 1.0)),
                       epsilon=float(d.get("epsilon", 0.0)),
                       intensity=float(d.get("intensity", 1.0)),
                       densities=tuple(d.get("densities", (1.0, 2.0))),
                       seed=int(d.get("seed", 0)))
        except KeyError as exc:
            raise ValidationError(f"generator spec missing field {exc}") from exc


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _ball_offsets(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    """Uniform samples in the Euclidean ball, by rejection from the cube."""
    if radius == 0.0 or count == 0:
        return np.zeros((count, dim))
    out = np.empty((count, dim))
    need = count
    while need:
        draw = rng.uniform(-radius, radius, size=(need, dim))
        ok = draw[np.einsum("ij,ij->i", draw, draw) <= radius * radius]
        out[count - need:count - need + len(ok)] = ok
        need -= len(ok)
    return out


def perturbed_lattice(window: Window, alpha: float, epsilon: float,
                      seed: int) -> tuple[PointConfiguration, PointConfiguration]:
    """Lattice sites plus iid uniform offsets in the epsilon-ball.

    Returns (configuration, generating sites); point ``i`` lies within
    ``epsilon`` of site ``i``, wrapped on tori.
    """
    sites = make_lattice(alpha, window)
    offsets = _ball_offsets(_rng(seed), len(sites), window.dim, epsilon)
    points = tuple(window.wrap(tuple(s + o for s, o in zip(site, off)))
                   for site, off in zip(sites.points, offsets))
    return PointConfiguration(window, points), sites


def poisson_points(window: Window, intensity: float, seed: int) -> PointConfiguration:
    """N ~ Poisson(intensity * volume) points uniform in the window."""
    rng = _rng(seed)
    count = int(rng.poisson(intensity * window.volume()))
    coords = rng.uniform(0.0, window.side, size=(count, window.dim))
    points = tuple(tuple(lo + c for lo, c in zip(window.lower, row)) for row in coords)
    return PointConfiguration(window, points)


def fibonacci_points(window: Window) -> PointConfiguration:
    """Cut-and-project quasiperiodic integers floor(n*phi) inside the window.

    One-dimensional only; consecutive gaps take exactly the two values 1, 2.
    """
    if window.dim != 1:
        raise ValidationError(f"fibonacci generator is one-dimensional, got dim {window.dim}")
    lo = window.lower[0]
    hi = lo + window.side
    n_min = math.floor(lo / _PHI) - 2
    n_max = math.ceil(hi / _PHI) + 2
    points = tuple((float(math.floor(n * _PHI)),) for n in range(n_min, n_max + 1)
                   if window.contains((float(math.floor(n * _PHI)),)))
    return PointConfiguration(window, points)


def density_defect(window: Window, densities: tuple[float, float] = (1.0, 2.0)) -> PointConfiguration:
    """Two half-windows with different densities along axis 0.

    The default is a unit lattice on the left half and a half-step (density
    2) lattice on the right half: the mass imbalance between the halves
    forces transports across a region that grows with the window.
    """
    L = window.side
    half = L / 2.0
    steps = [1.0 / r for r in densities]
    for step in steps + [1.0]:
        ratio = half / step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValidationError(
                f"density_defect needs each half-window ({half}) to be an integer "
                f"number of steps, got step {step}")
    axis0 = []
    for k, step in enumerate(steps):
        start = k * half
        axis0.extend(start + i * step for i in range(round(half / step)))
    lo = window.lower
    tails = itertools.product(*(range(round(L)) for _ in range(window.dim - 1)))
    points = tuple((lo[0] + x0,) + tuple(l + float(t) for l, t in zip(lo[1:], tail))
                   for tail in tails for x0 in axis0)
    return PointConfiguration(window, points)


def generate(spec: GeneratorSpec) -> PointConfiguration:
    """Realize a spec; deterministic in (spec, seed)."""
    if spec.kind == "lattice":
        return make_lattice(spec.alpha, spec.window)
    if spec.kind == "perturbed":
        config, _ = perturbed_lattice(spec.window, spec.alpha, spec.epsilon, spec.seed)
        return config
    if spec.kind == "poisson":
        return poisson_points(spec.window, spec.intensity, spec.seed)
    if spec.kind == "fibonacci":
        return fibonacci_points(spec.window)
    return density_defect(spec.window, spec.densities)
