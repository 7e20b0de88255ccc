"""Figure rendering for the CLI report paths (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .criterion import CesaroReport, GrowthReport, ShiftSweepReport
from .geometry import vector_norm


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def growth_figure(report: GrowthReport):
    """Distance vs window side with error bars and the fitted trend."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    L, v, e = report.sides, report.values, report.error_bounds
    ax.errorbar(L, v, yerr=e, marker="o", capsize=3, label=f"{report.kind} ({report.route})")
    lo, hi = min(L), max(L)
    intercept = sum(v) / len(v) - report.slope * sum(L) / len(L)
    ax.plot([lo, hi], [report.slope * lo + intercept, report.slope * hi + intercept],
            "--", color="gray", label=f"slope {report.slope:.3g}")
    ax.set_xlabel("window side L")
    ax.set_ylabel("distance")
    ax.set_title(f"classification: {report.classification}")
    ax.legend()
    return fig


def sweep_figure(report: ShiftSweepReport):
    """Shift distance against the torus length of the shift vector."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    window = report.window
    if window.dim == 1:
        xs = [z[0] for z in report.shifts]
        ys = [r.value for r in report.results]
        order = sorted(range(len(xs)), key=xs.__getitem__)
        ax.plot([xs[i] for i in order], [ys[i] for i in order], marker="o")
        ax.set_xlabel("shift z")
    else:
        xs = [vector_norm(z, window) for z in report.shifts]
        ax.plot(xs, [r.value for r in report.results], "o")
        ax.set_xlabel("|z| (torus)")
    ax.axhline(report.max_shift_distance, color="gray", linestyle=":",
               label=f"max {report.max_shift_distance:.3g}")
    if report.certified_sup_bound is not None:
        ax.axhline(report.certified_sup_bound, color="red", linestyle="--",
                   label=f"certified sup bound {report.certified_sup_bound:.3g}")
    ax.set_ylabel("shift distance")
    ax.legend()
    return fig


def cesaro_figure(report: CesaroReport):
    """Cell masses of the shift-averaged measure."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    masses = [float(c * report.cell_quantum) for c in report.cell_masses]
    ax.bar(range(len(masses)), masses, width=0.9)
    ax.set_xlabel("cell (row-major)")
    ax.set_ylabel("averaged cell mass")
    ax.set_title(f"n={report.n}  spread={report.spread:.4g}  "
                 f"Tra={report.distance.value:.4g} (+/- {report.distance.error_bound:.4g})")
    return fig
