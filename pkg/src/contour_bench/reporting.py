"""Report assembly: the scaling/bias summary document and its SVG plots."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from .analysis import (
    BiasSummary,
    condition_accuracy,
    log_linear_fit,
    multiple_regression,
    pearson,
)
from .placement import LEVELS

_FRAGMENTED = ("phosphene", "segment")


def _safe_pearson(x, y, label: str) -> dict:
    pairs = [(a, b) for a, b in zip(x, y)
             if np.isfinite(a) and np.isfinite(b)]
    if len(pairs) < 3:
        return {"unavailable": f"{label}: fewer than 3 models with data"}
    ax = np.array([p[0] for p in pairs])
    ay = np.array([p[1] for p in pairs])
    if ax.std() == 0 or ay.std() == 0:
        return {"unavailable": f"{label}: zero variance"}
    return pearson(ax, ay)


def _curve_with_fit(table: pd.DataFrame, seed: int) -> dict:
    """Accuracy-by-level points (with CIs) and the log-linear fit."""
    fragmented = table[table["condition"].isin(_FRAGMENTED)]
    if fragmented.empty:
        return {"points": [], "fit": None}
    acc = condition_accuracy(fragmented, group_by=["level"], seed=seed)
    points = acc.to_dict(orient="records")
    fit = None
    if len(acc) >= 3:
        fit = asdict(log_linear_fit(list(zip(acc["level"], acc["accuracy"]))))
    return {"points": points, "fit": fit}


def scaling_report(bias_summaries: list, human_table: pd.DataFrame = None,
                   out_dir=None, seed: int = 0) -> dict:
    """Assemble the cross-model scaling report.

    Emits accuracy curves with log-linear fits (human pooled and per
    condition), bias-vs-accuracy / dataset-size / robustness
    correlations, and the multiple regression with architecture-dummy
    |t| averaging. Degenerate or missing inputs are flagged in place
    rather than raised. When out_dir is given, writes report.json and
    SVG plots there.
    """
    if len(bias_summaries) < 3:
        raise ValueError("need at least 3 model summaries")
    usable = []
    for s in bias_summaries:
        if not (np.isfinite(s.accuracy_segments) and np.isfinite(s.accuracy_phosphenes)):
            warnings.warn(f"model {s.model}: missing accuracies, row excluded")
            continue
        usable.append(s)

    bias = np.array([s.integration_bias for s in usable])
    overall = np.array([s.overall_accuracy for s in usable])
    log_size = np.array([
        math.log10(s.training_dataset_size)
        if np.isfinite(s.training_dataset_size) and s.training_dataset_size > 0
        else float("nan") for s in usable])
    log_flops = np.array([
        math.log10(s.flops_per_sample)
        if np.isfinite(s.flops_per_sample) and s.flops_per_sample > 0
        else float("nan") for s in usable])
    robustness = np.array([s.robustness for s in usable])

    correlations = {
        "bias_vs_overall_accuracy": _safe_pearson(bias, overall, "bias~accuracy"),
        "bias_vs_log10_dataset_size": _safe_pearson(bias, log_size, "bias~dataset"),
        "bias_vs_robustness": _safe_pearson(bias, robustness, "bias~robustness"),
        "accuracy_vs_log10_dataset_size": _safe_pearson(overall, log_size,
                                                        "accuracy~dataset"),
        "accuracy_vs_log10_flops": _safe_pearson(overall, log_flops,
                                                 "accuracy~flops"),
    }

    regression = None
    families = sorted({s.arch_family for s in usable if s.arch_family})
    finite = np.isfinite(overall) & np.isfinite(log_size) & np.isfinite(log_flops)
    if finite.sum() > 3:
        design = {"log10_dataset_size": log_size[finite],
                  "log10_flops": log_flops[finite]}
        arch_cols = []
        for fam in families[1:]:  # first family is the dummy baseline
            col = np.array([1.0 if s.arch_family == fam else 0.0
                            for s in usable])[finite]
            if 0 < col.sum() < col.size:
                design[f"arch_{fam}"] = col
                arch_cols.append(f"arch_{fam}")
        try:
            result = multiple_regression(design, overall[finite],
                                         architecture_columns=arch_cols)
            regression = {
                "table": result.as_table().to_dict(orient="records"),
                "architecture_mean_abs_t": result.architecture_mean_abs_t,
            }
        except ValueError as err:
            regression = {"unavailable": str(err)}
    else:
        regression = {"unavailable": "needs >3 models with size+flops metadata"}

    def _finite(value):
        return value if np.isfinite(value) else None  # strict-JSON NaN guard

    report = {
        "n_models": len(usable),
        "models": [{
            "model": s.model, "arch_family": s.arch_family,
            "accuracy_segments": s.accuracy_segments,
            "accuracy_phosphenes": s.accuracy_phosphenes,
            "integration_bias": s.integration_bias,
            "overall_accuracy": _finite(s.overall_accuracy),
            "training_dataset_size": _finite(s.training_dataset_size),
            "flops_per_sample": _finite(s.flops_per_sample),
            "robustness": _finite(s.robustness),
        } for s in usable],
        "correlations": correlations,
        "regression": regression,
        "human": None,
    }

    if human_table is not None and not human_table.empty:
        human = {"pooled": _curve_with_fit(human_table, seed)}
        for condition in _FRAGMENTED:
            subset = human_table[human_table["condition"] == condition]
            if subset.empty:
                human[condition] = {"points": [], "fit": None,
                                    "unavailable": "condition absent"}
            else:
                human[condition] = _curve_with_fit(subset, seed)
        report["human"] = human

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(report, indent=1,
                                                        default=_json_default))
        _write_plots(report, out_dir)
    return report


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def _write_plots(report: dict, out_dir: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "contour-bench"  # stable SVG ids
    import matplotlib.pyplot as plt

    save_kw = {"format": "svg", "metadata": {"Date": None}}

    fig, ax = plt.subplots(figsize=(5, 4))
    human = report.get("human") or {}
    pooled = human.get("pooled", {"points": []})
    if pooled["points"]:
        level = [p["level"] for p in pooled["points"]]
        acc = [p["accuracy"] for p in pooled["points"]]
        lo = [p["ci_low"] for p in pooled["points"]]
        hi = [p["ci_high"] for p in pooled["points"]]
        ax.fill_between(level, lo, hi, alpha=0.25, color="green",
                        label="human 95% CI")
        ax.plot(level, acc, "o-", color="green", label="human")
        if pooled["fit"]:
            xs = np.linspace(min(LEVELS), max(LEVELS), 100)
            ax.plot(xs, pooled["fit"]["a"] * np.log(xs) + pooled["fit"]["b"],
                    "--", color="green", alpha=0.7)
    ax.set_xscale("log")
    ax.set_xlabel("fragmentation level (%)")
    ax.set_ylabel("accuracy")
    ax.axhline(1 / 12, color="gray", ls=":", label="chance")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_dir / "accuracy_curves.svg", **save_kw)
    plt.close(fig)

    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    models = report["models"]
    bias = [m["integration_bias"] for m in models]
    panels = [
        ("overall_accuracy", "overall accuracy", axes[0]),
        ("training_dataset_size", "training dataset size (images)", axes[1]),
        ("robustness", "external robustness score", axes[2]),
    ]
    for key, label, ax in panels:
        xs = [np.nan if m[key] is None else m[key] for m in models]
        ax.scatter(bias, xs, s=18, color="#3b6fb6")
        ax.set_xlabel("integration bias")
        ax.set_ylabel(label)
        if key == "training_dataset_size":
            finite = [v for v in xs if np.isfinite(v) and v > 0]
            if finite:
                ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(out_dir / "integration_bias.svg", **save_kw)
    plt.close(fig)
