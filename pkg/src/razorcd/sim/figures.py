"""Figure rendering for simulation reports (file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .reporting import ComparisonTable, SimReport


def render_comparison_figure(table: ComparisonTable, path: str | Path) -> Path:
    """Pull vs push convergence time across the cluster-count sweep."""
    path = Path(path)
    ns = [row["num_clusters"] for row in table.rows]
    pull = [row["pull_time"] for row in table.rows]
    push = [row["push_time"] for row in table.rows]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(ns, pull, marker="o", label="pull (per-cluster agents)")
    ax.plot(ns, push, marker="s", label=f"push (parallelism {table.push_parallelism})")
    ax.set_xscale("log")
    ax.set_xlabel("clusters")
    ax.set_ylabel("convergence time (logical s)")
    ax.set_title("Rollout convergence vs fleet size")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report_figure(report: SimReport, path: str | Path) -> Path:
    """Per-cluster convergence times for a single rollout run."""
    path = Path(path)
    times = report.per_cluster_times
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if len(times) <= 40:
        ax.bar(range(len(times)), times)
        ax.set_xlabel("cluster index")
    else:
        ax.hist(times, bins=min(30, max(5, len(set(times)))))
        ax.set_xlabel("convergence time (logical s)")
        ax.set_ylabel("clusters")
    if len(times) <= 40:
        ax.set_ylabel("convergence time (logical s)")
    ax.set_title(f"{report.model} rollout, {report.num_clusters} clusters")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
