"""Validation run for one phase and its serialized outputs (JSON, CSV, SVG)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .evaluation import (
    TRANSFORMS,
    BenchmarkResult,
    EvalConfig,
    LooEntry,
    LooReport,
    assemble_dataset,
    benchmark,
    kriging_baseline,
    make_plan,
    nested_loo,
)
from .svg import scatter_svg


@dataclass
class PhaseResult:
    phase: str
    horizon: int
    n_wells: int
    n_features: int
    benchmark: BenchmarkResult
    loo: LooReport
    kriging: LooEntry
    transform: str

    @property
    def top_model(self) -> str:
        """Finalist with the lowest leave-one-well-out RMSE."""
        cands = [n for n in self.loo.finalists if n in self.loo.entries]
        return min(cands, key=lambda n: (self.loo.entries[n].rmse, n)) if cands else "nested_top"


def run_phase(frame, phase: str, horizon: int, zoo, cfg: EvalConfig, n_jobs: int = 1, progress=None) -> PhaseResult:
    ds = assemble_dataset(frame, phase, horizon, transform=cfg.transform)
    plan = make_plan(ds.N, cfg.K, cfg.B, seed=cfg.seed)
    bench = benchmark(ds, zoo, plan, cfg)
    loo = nested_loo(ds, zoo, cfg, n_jobs=n_jobs, progress=progress)
    kb = kriging_baseline(ds, cfg)
    return PhaseResult(phase, horizon, ds.N, ds.p, bench, loo, kb, cfg.transform)


def _clean(v):
    """JSON-safe value: non-finite floats become null."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def phase_dict(res: PhaseResult) -> dict:
    inverse = TRANSFORMS[res.transform][1]
    entries = {name: e.to_dict(inverse) for name, e in sorted(res.loo.entries.items())}
    entries["kriging"] = res.kriging.to_dict(inverse)
    table = []
    for name in res.loo.finalists + ["kriging"]:
        src = entries.get(name)
        if src is not None:
            table.append({"method": name, "rmse": src["rmse_standardized"], "pearson": src["pearson"]})
    return _clean(
        {
            "phase": res.phase,
            "horizon_months": res.horizon,
            "n_wells": res.n_wells,
            "n_features": res.n_features,
            "target_transform": res.transform,
            "rmse_scale": "standardized (divided by the sample sd of the transformed target)",
            "benchmark": res.benchmark.to_dict(),
            "loo": {
                "label": "external",
                "finalists": res.loo.finalists,
                "first_place_counts": res.loo.first_place,
                "failed_wells": res.loo.failed_wells,
                "top_model": res.top_model,
                "entries": entries,
                "iterations": res.loo.iterations,
            },
            "table": table,
        }
    )


def report_json(phases: list[PhaseResult], config_echo: dict) -> str:
    doc = {"config": _clean(config_echo), "phases": {r.phase: phase_dict(r) for r in phases}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def predictions_csv(res: PhaseResult) -> str:
    """Per-well observed and predicted values (transformed target scale)."""
    names = sorted(res.loo.entries)
    preds = {n: dict(zip(e.well_ids, e.predicted)) for n, e in res.loo.entries.items()}
    kb = dict(zip(res.kriging.well_ids, res.kriging.predicted))
    obs = dict(zip(res.kriging.well_ids, res.kriging.observed))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["well_id", "observed"] + names + ["kriging"])
    for well in sorted(obs):
        row = [well, repr(float(obs[well]))]
        row += [repr(float(preds[n][well])) if well in preds[n] else "" for n in names]
        row.append(repr(float(kb[well])))
        w.writerow(row)
    return out.getvalue()


def scatter_plots(res: PhaseResult) -> dict[str, str]:
    """One SVG per finalist plus the kriging baseline, keyed by method."""
    out = {}
    for name in res.loo.finalists + ["kriging"]:
        e = res.kriging if name == "kriging" else res.loo.entries.get(name)
        if e is None:
            continue
        out[name] = scatter_svg(
            e.observed,
            e.predicted,
            title=f"{res.phase} {res.horizon}-month: {name}",
            rmse=e.rmse_std,
            r=e.pearson,
            xlabel=f"Observed ({res.transform})",
            ylabel=f"Predicted ({res.transform})",
        )
    return out


def summary_table(doc: dict) -> str:
    """Markdown table: finalists and kriging per phase."""
    lines = ["| phase | method | RMSE | Pearson r |", "|---|---|---|---|"]
    for phase, body in sorted(doc["phases"].items()):
        for row in body["table"]:
            r = "n/a" if row["pearson"] is None else f"{row['pearson']:.3f}"
            lines.append(f"| {phase} | {row['method']} | {row['rmse']:.3f} | {r} |")
    return "\n".join(lines) + "\n"
