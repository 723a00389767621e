"""Figure rendering for Monte Carlo, threshold and benchmark reports."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import BenchRow, PointStats, ThresholdEstimate  # noqa: E402


def figure_path(out_path) -> Path:
    return Path(out_path).with_suffix(".png")


def plot_error_rates(points: list[PointStats], path) -> Path:
    """Logical error rate vs erasure probability, one curve per size."""
    by_size: dict[tuple[str, int], list[PointStats]] = {}
    for pt in points:
        by_size.setdefault((pt.lattice, pt.L), []).append(pt)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (lattice, L), pts in sorted(by_size.items()):
        pts = sorted(pts, key=lambda q: q.p)
        ax.errorbar([q.p for q in pts], [q.rate_any for q in pts],
                    yerr=[q.stderr_any for q in pts], marker="o",
                    capsize=2, label=f"{lattice} L={L}")
    ax.set_xlabel("erasure probability p")
    ax.set_ylabel("logical error rate")
    ax.grid(True, ls="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_threshold(points: list[PointStats], estimate: ThresholdEstimate,
                   path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    by_size: dict[int, list[PointStats]] = {}
    for pt in points:
        by_size.setdefault(pt.L, []).append(pt)
    for L, pts in sorted(by_size.items()):
        pts = sorted(pts, key=lambda q: q.p)
        ax.errorbar([q.p for q in pts], [q.rate_any for q in pts],
                    yerr=[q.stderr_any for q in pts], marker="o",
                    capsize=2, label=f"L={L}")
    ax.axvline(estimate.p_cross, color="k", ls=":",
               label=f"crossing p={estimate.p_cross:.3f}")
    ax.axvspan(estimate.ci_low, estimate.ci_high, color="k", alpha=0.08)
    ax.set_xlabel("erasure probability p")
    ax.set_ylabel("logical error rate")
    ax.grid(True, ls="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_bench(rows: list[BenchRow], path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    qubits = [r.qubits for r in rows]
    times = [r.mean_decode_ns * 1e-3 for r in rows]
    ax.loglog(qubits, times, marker="o", label="measured")
    # linear-scaling guide through the first point
    ax.loglog(qubits, [times[0] * q / qubits[0] for q in qubits],
              ls="--", color="gray", label="linear scaling")
    ax.set_xlabel("qubit count")
    ax.set_ylabel("mean decode time per shot (us)")
    ax.grid(True, which="both", ls="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
