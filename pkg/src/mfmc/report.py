"""Result tables: CSV, JSON sidecar, plain-text rendering and plot data.

Every float is written with ``repr`` so the CSV and the JSON sidecar carry the
same value to full precision. Infeasible rows have empty CSV cells and JSON
``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .harness import PipelineResult

METHOD_LABELS = {"mc": "MC", "modified": "MFMC modified", "naive-rounded": "MFMC rounded"}


def csv_header(k: int) -> list[str]:
    return ["budget_over_w1", "method"] + [f"m_{i + 1}" for i in range(k)] + [
        "effective_budget",
        "rel_mse",
        "mse",
        "est_mean",
    ]


@dataclass
class TableRow:
    budget_over_w1: float
    method: str
    counts: list[int | None]
    effective_budget: float | None
    rel_mse: float | None
    mse: float | None
    est_mean: float | None
    status: str = "ok"
    message: str = ""
    budget: float = math.nan
    realized_cost: float | None = None
    per_run_estimates: list[float] = field(default_factory=list)

    def csv_cells(self) -> list[str]:
        return (
            [repr(self.budget_over_w1), self.method]
            + ["" if c is None else str(c) for c in self.counts]
            + [_cell(v) for v in (self.effective_budget, self.rel_mse, self.mse, self.est_mean)]
        )

    def to_dict(self) -> dict:
        return {
            "budget_over_w1": self.budget_over_w1,
            "method": self.method,
            "counts": list(self.counts),
            "effective_budget": self.effective_budget,
            "rel_mse": self.rel_mse,
            "mse": self.mse,
            "est_mean": self.est_mean,
            "status": self.status,
            "message": self.message,
            "budget": self.budget,
            "realized_cost": self.realized_cost,
            "per_run_estimates": list(self.per_run_estimates),
        }


def _cell(v: float | None) -> str:
    return "" if v is None else repr(float(v))


@dataclass
class ResultsTable:
    benchmark: str
    seed: int
    model_ids: list[str]
    w1: float
    reference: float
    reference_stderr: float
    reference_samples: int
    n_runs: int
    rows: list[TableRow]
    metadata: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.model_ids)

    @property
    def complete(self) -> bool:
        return all(r.status == "ok" for r in self.rows)

    @classmethod
    def from_pipeline(cls, res: PipelineResult) -> "ResultsTable":
        exp = res.experiment
        w1 = res.w1
        k = len(res.subset)
        rows = []
        for rep in exp.reports:
            budget_over_w1 = res.config.budgets[rep.budget_index]
            if rep.status != "ok":
                rows.append(TableRow(
                    budget_over_w1, rep.method, [None] * k, None, None, None, None,
                    status=rep.status, message=rep.message, budget=rep.budget,
                ))
                continue
            m = [int(v) for v in rep.plan.m]
            counts = m + [None] * (k - len(m))
            rows.append(TableRow(
                budget_over_w1=budget_over_w1,
                method=rep.method,
                counts=counts,
                effective_budget=rep.plan.realized_cost / w1,
                rel_mse=rep.relative_mse,
                mse=rep.empirical_mse,
                est_mean=rep.estimate_mean,
                budget=rep.budget,
                realized_cost=rep.plan.realized_cost,
                per_run_estimates=[float(v) for v in rep.per_run_estimates],
            ))
        sub = res.selected_stats
        metadata = {
            "config": res.config.to_dict(),
            "statistics": res.stats.to_dict(),
            "selection": None if res.selection is None else res.selection.to_dict(),
            "alpha": [float(res.stats.rho1[i] * res.stats.sigma[0] / res.stats.sigma[i]) for i in res.subset[1:]],
            "selected_costs": sub.costs.tolist(),
        }
        return cls(
            benchmark=res.config.benchmark,
            seed=res.config.seed,
            model_ids=[res.stats.names[i] for i in res.subset],
            w1=w1,
            reference=exp.reference,
            reference_stderr=exp.reference_stderr,
            reference_samples=exp.reference_samples,
            n_runs=res.config.n_runs,
            rows=rows,
            metadata=metadata,
        )

    # -- serializers -------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header(self.k))
        for row in self.rows:
            writer.writerow(row.csv_cells())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "benchmark": self.benchmark,
            "models": list(self.model_ids),
            "w1": self.w1,
            "reference": self.reference,
            "reference_stderr": None if math.isnan(self.reference_stderr) else self.reference_stderr,
            "reference_samples": self.reference_samples,
            "n_runs": self.n_runs,
            "complete": self.complete,
            "columns": csv_header(self.k),
            "rows": [r.to_dict() for r in self.rows],
            **self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def plot_data_csv(self) -> str:
        """Long-format per-run estimates for external plotting."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["budget_over_w1", "method", "run", "estimate", "reference"])
        for row in self.rows:
            for j, v in enumerate(row.per_run_estimates):
                writer.writerow([repr(row.budget_over_w1), row.method, j, repr(v), repr(self.reference)])
        return buf.getvalue()

    def render_text(self) -> str:
        """Fixed-width table, one block per method, MSE columns scaled."""
        lines = [
            f"# seed={self.seed} benchmark={self.benchmark} models={','.join(self.model_ids)}",
            f"# reference={self.reference!r} (M={self.reference_samples}), N={self.n_runs}",
        ]
        finite = [r.rel_mse for r in self.rows if r.rel_mse is not None and r.rel_mse > 0]
        exp = 3 * math.floor(math.log10(min(finite)) / 3) if finite else 0
        scale = 10.0**exp
        methods = list(dict.fromkeys(r.method for r in self.rows))
        for method in methods:
            lines.append("")
            lines.append(f"{METHOD_LABELS.get(method, method)}  (rel. MSE and MSE in units of 1e{exp})")
            ids = self.model_ids[:1] if method == "mc" else self.model_ids
            head = f"{'p/w1':>6} " + " ".join(f"{'#' + m:>8}" for m in ids)
            head += f" {'eff p/w1':>9} {'rel MSE':>10} {'MSE':>10}"
            lines.append(head)
            for r in self.rows:
                if r.method != method:
                    continue
                cells = f"{r.budget_over_w1:>6g} "
                if r.status != "ok":
                    lines.append(cells + f"{r.status}: {r.message}")
                    continue
                cells += " ".join(f"{c:>8d}" for c in r.counts[: len(ids)])
                cells += f" {r.effective_budget:>9.1f} {r.rel_mse / scale:>10.4g} {r.mse / scale:>10.4g}"
                lines.append(cells)
        return "\n".join(lines) + "\n"

    def write(self, directory: str | Path, emit_plot_data: bool = False) -> dict[str, Path]:
        """Write ``results.csv``, ``results.json``, ``results.txt`` and optionally ``plot_data.csv``."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "csv": (out / "results.csv", self.to_csv()),
            "json": (out / "results.json", self.to_json()),
            "text": (out / "results.txt", self.render_text()),
        }
        if emit_plot_data:
            files["plot_data"] = (out / "plot_data.csv", self.plot_data_csv())
        for path, text in files.values():
            path.write_text(text)
        return {key: path for key, (path, _) in files.items()}


def read_results_csv(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)
