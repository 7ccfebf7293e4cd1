"""Simulation report structures and their JSON / aligned-text renderings."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..bundles import canonical_json, sha256_hex


def trace_digest(trace: list[dict]) -> str:
    return sha256_hex("\n".join(canonical_json(entry) for entry in trace).encode())


@dataclass
class SimReport:
    model: str
    num_clusters: int
    convergence_time: int
    per_cluster_times: list[int] = field(default_factory=list)
    events_processed: int = 0
    alerts_fired: int = 0
    trace_digest: str = ""
    converged_clusters: int = 0
    matching_clusters: int = 0
    poll_interval: int | None = None
    push_parallelism: int | None = None
    per_cluster_push_cost: int | None = None

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "num_clusters": self.num_clusters,
            "convergence_time": self.convergence_time,
            "per_cluster_times": list(self.per_cluster_times),
            "events_processed": self.events_processed,
            "alerts_fired": self.alerts_fired,
            "trace_digest": self.trace_digest,
            "converged_clusters": self.converged_clusters,
            "matching_clusters": self.matching_clusters,
        }
        if self.poll_interval is not None:
            out["poll_interval"] = self.poll_interval
        if self.push_parallelism is not None:
            out["push_parallelism"] = self.push_parallelism
            out["per_cluster_push_cost"] = self.per_cluster_push_cost
        return out

    def to_text(self) -> str:
        rows = [
            ("model", self.model),
            ("clusters", str(self.num_clusters)),
            ("matching clusters", str(self.matching_clusters)),
            ("converged clusters", str(self.converged_clusters)),
            ("convergence time", str(self.convergence_time)),
            ("events processed", str(self.events_processed)),
            ("alerts fired", str(self.alerts_fired)),
            ("trace digest", self.trace_digest[:16]),
        ]
        if self.poll_interval is not None:
            rows.insert(2, ("poll interval", str(self.poll_interval)))
        if self.push_parallelism is not None:
            rows.insert(2, ("push parallelism", str(self.push_parallelism)))
            rows.insert(3, ("per-cluster cost", str(self.per_cluster_push_cost)))
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


@dataclass
class ComparisonTable:
    rows: list[dict]
    poll_interval: int
    push_parallelism: int
    per_cluster_push_cost: int

    def to_dict(self) -> dict:
        return {
            "rows": list(self.rows),
            "poll_interval": self.poll_interval,
            "push_parallelism": self.push_parallelism,
            "per_cluster_push_cost": self.per_cluster_push_cost,
        }

    def to_text(self) -> str:
        headers = ("clusters", "pull_time", "push_time")
        table = [headers] + [
            (str(r["num_clusters"]), str(r["pull_time"]), str(r["push_time"]))
            for r in self.rows
        ]
        widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
        lines = []
        for row in table:
            lines.append("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))
        lines.append("")
        lines.append(
            f"pull poll_interval={self.poll_interval}  "
            f"push parallelism={self.push_parallelism} cost={self.per_cluster_push_cost}"
        )
        return "\n".join(lines)
