"""Behavioral statistics: accuracies with bootstrap CIs, log-linear
scaling fits, integration bias, effect sizes, correlations, and OLS
regression with architecture-dummy |t| averaging.

Response tables are pandas DataFrames with the canonical columns
id, condition, level, stimulus, true, choice, correct, rt_ms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats as sp_stats

RESPONSE_COLUMNS = ["id", "condition", "level", "stimulus", "true", "choice",
                    "correct", "rt_ms"]

BOOTSTRAP_RESAMPLES = 10_000


@dataclass
class FitResult:
    a: float  # slope per natural-log unit
    b: float  # intercept
    r_squared: float
    p_value: float
    n: int


@dataclass
class EffectSize:
    d: float
    n1: int
    n2: int
    pooled_sd: float


@dataclass
class RegressionResult:
    names: list
    estimates: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    architecture_mean_abs_t: float = float("nan")

    def as_table(self) -> pd.DataFrame:
        return pd.DataFrame({
            "name": self.names, "estimate": self.estimates,
            "se": self.standard_errors, "t": self.t_values, "p": self.p_values,
        })


@dataclass
class BiasSummary:
    model: str
    accuracy_segments: float
    accuracy_phosphenes: float
    overall_accuracy: float = float("nan")
    training_dataset_size: float = float("nan")  # images
    flops_per_sample: float = float("nan")
    arch_family: str = ""
    robustness: float = float("nan")  # external score, e.g. ImageNet-C top1
    integration_bias: float = field(init=False)

    def __post_init__(self):
        self.integration_bias = self.accuracy_segments - self.accuracy_phosphenes


# ---------------------------------------------------------------------------
# Response tables

def make_response_table(records) -> pd.DataFrame:
    table = pd.DataFrame(records, columns=RESPONSE_COLUMNS)
    table["correct"] = (table["true"] == table["choice"]).astype(int)
    return table


def load_response_table(path) -> pd.DataFrame:
    table = pd.read_csv(path)
    missing = [c for c in RESPONSE_COLUMNS if c not in table.columns]
    if missing:
        raise ValueError(f"response table missing columns: {missing}")
    table["correct"] = (table["true"] == table["choice"]).astype(int)
    return table[RESPONSE_COLUMNS]


def save_response_table(table: pd.DataFrame, path) -> None:
    table.to_csv(path, index=False, columns=RESPONSE_COLUMNS)


def condition_accuracy(table: pd.DataFrame, group_by=("condition", "level"),
                       n_boot: int = BOOTSTRAP_RESAMPLES, seed: int = 0,
                       ci: float = 0.95) -> pd.DataFrame:
    """Per-group accuracy with subject-level percentile bootstrap CIs.

    The point estimate is the mean of per-subject accuracies; the CI
    resamples subjects with replacement. Empty groups are omitted with
    a warning.
    """
    if table.empty:
        raise ValueError("empty response table")
    group_by = list(group_by)
    rng = np.random.default_rng(seed)
    lo_q, hi_q = 100 * (1 - ci) / 2, 100 * (1 + ci) / 2
    rows = []
    for key, group in table.groupby(group_by, dropna=False, sort=True):
        if group.empty:
            warnings.warn(f"empty group {key}, omitted")
            continue
        subject_means = group.groupby("id")["correct"].mean().to_numpy()
        m = subject_means.size
        point = float(subject_means.mean())
        draws = rng.integers(0, m, size=(n_boot, m))
        boot = subject_means[draws].mean(axis=1)
        row = dict(zip(group_by, key if isinstance(key, tuple) else (key,)))
        row.update(accuracy=point,
                   ci_low=float(np.percentile(boot, lo_q)),
                   ci_high=float(np.percentile(boot, hi_q)),
                   n_subjects=int(m), n_trials=int(len(group)))
        rows.append(row)
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Scalar statistics

def log_linear_fit(points) -> FitResult:
    """OLS of accuracy on the natural log of the fragmentation percent.

    points: iterable of (percent, accuracy) pairs. The two-sided slope
    p-value uses the t distribution with n-2 df.
    """
    arr = np.asarray([(float(p), float(a)) for p, a in points], dtype=np.float64)
    if arr.shape[0] < 3:
        raise ValueError("log-linear fit needs at least 3 points")
    if np.any(arr[:, 0] <= 0):
        raise ValueError("percents must be positive")
    x = np.log(arr[:, 0])
    y = arr[:, 1]
    n = x.size
    if np.all(y == y[0]):  # constant accuracy: flat line, no trend
        return FitResult(a=0.0, b=float(y[0]), r_squared=0.0, p_value=1.0, n=n)
    x_centered = x - x.mean()
    sxx = float(np.sum(x_centered ** 2))
    if sxx == 0:
        raise ValueError("all points share one percent value")
    a = float(np.sum(x_centered * y) / sxx)
    b = float(y.mean() - a * x.mean())
    residuals = y - (a * x + b)
    sse = float(np.sum(residuals ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    r_squared = 0.0 if sst == 0 else max(0.0, 1.0 - sse / sst)
    sigma_sq = sse / (n - 2)
    se_a = np.sqrt(sigma_sq / sxx)
    if se_a == 0:
        t = 0.0 if a == 0 else np.inf
    else:
        t = a / se_a
    p = float(2.0 * sp_stats.t.sf(abs(t), n - 2)) if np.isfinite(t) else 0.0
    if a == 0 and sst == 0:
        p = 1.0
    return FitResult(a=a, b=b, r_squared=float(r_squared), p_value=p, n=n)


def integration_bias(acc_segments: float, acc_phosphenes: float) -> float:
    """Segment-condition accuracy minus phosphene-condition accuracy."""
    for v in (acc_segments, acc_phosphenes):
        if not 0.0 <= v <= 1.0:
            raise ValueError("accuracies must lie in [0, 1]")
    return acc_segments - acc_phosphenes


def cohens_d(group_phosphene, group_segment) -> EffectSize:
    """Pooled-SD Cohen's d, phosphene minus segment.

    The sign convention makes d negative when segments outperform
    phosphenes.
    """
    a = np.asarray(group_phosphene, dtype=np.float64)
    b = np.asarray(group_segment, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least 2 values")
    n1, n2 = a.size, b.size
    pooled_var = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / (n1 + n2 - 2)
    pooled_sd = float(np.sqrt(pooled_var))
    if pooled_sd == 0:
        raise ValueError("degenerate groups")
    return EffectSize(d=float((a.mean() - b.mean()) / pooled_sd),
                      n1=n1, n2=n2, pooled_sd=pooled_sd)


def pearson(x, y) -> dict:
    """Sample Pearson correlation with a two-sided t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    n = x.size
    if n < 3:
        raise ValueError("pearson needs at least 3 points")
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        raise ValueError("constant input")
    r = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return {"r": r, "p": 0.0, "n": n}
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return {"r": r, "p": float(2.0 * sp_stats.t.sf(abs(t), n - 2)), "n": n}


def welch_t_test(a, b) -> dict:
    """Welch's unequal-variance t-test (two-sided)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least 2 values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va + vb == 0:
        raise ValueError("degenerate groups")
    t = (a.mean() - b.mean()) / np.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return {"t": float(t), "p": float(2.0 * sp_stats.t.sf(abs(t), df)),
            "df": float(df)}


def multiple_regression(design, y, architecture_columns=()) -> RegressionResult:
    """OLS with intercept on named columns.

    design: mapping of column name -> values (or a DataFrame). t-values
    are estimate/se with se from the classical sigma^2 (X'X)^-1;
    architecture_mean_abs_t averages |t| over the named dummy columns.
    Rank-deficient designs raise, naming the offending columns.
    """
    if isinstance(design, pd.DataFrame):
        names = list(design.columns)
        columns = [design[c].to_numpy(dtype=np.float64) for c in names]
    else:
        names = list(design.keys())
        columns = [np.asarray(design[c], dtype=np.float64) for c in names]
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    x = np.column_stack([np.ones(n)] + columns)
    all_names = ["intercept"] + names
    p = x.shape[1]
    if n <= p + 1:
        raise ValueError(f"need more than {p + 1} observations, got {n}")
    rank = np.linalg.matrix_rank(x)
    if rank < p:
        from scipy.linalg import qr
        _, _, pivots = qr(x, mode="economic", pivoting=True)
        bad = sorted(all_names[i] for i in pivots[rank:])
        raise ValueError(f"design is rank deficient; collinear columns: {bad}")

    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ y)
    residuals = y - x @ beta
    sigma_sq = float(residuals @ residuals) / (n - p)
    cov = sigma_sq * np.linalg.inv(xtx)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    t[np.isnan(t)] = 0.0
    pvals = np.where(np.isfinite(t), 2.0 * sp_stats.t.sf(np.abs(t), n - p), 0.0)

    arch_t = float("nan")
    if architecture_columns:
        missing = [c for c in architecture_columns if c not in all_names]
        if missing:
            raise ValueError(f"unknown architecture columns: {missing}")
        idx = [all_names.index(c) for c in architecture_columns]
        arch_t = float(np.mean(np.abs(t[idx])))
    return RegressionResult(names=all_names, estimates=beta, standard_errors=se,
                            t_values=t, p_values=pvals,
                            architecture_mean_abs_t=arch_t)


# ---------------------------------------------------------------------------
# Bias summary CSV IO

BIAS_CSV_COLUMNS = ["model", "arch_family", "dataset_size", "flops",
                    "acc_seg", "acc_phos", "overall_acc", "robustness"]


def load_bias_summaries(path) -> list:
    frame = pd.read_csv(path)
    required = ["model", "acc_seg", "acc_phos"]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ValueError(f"bias summary CSV missing columns: {missing}")
    summaries = []
    for _, row in frame.iterrows():
        summaries.append(BiasSummary(
            model=str(row["model"]),
            accuracy_segments=float(row["acc_seg"]),
            accuracy_phosphenes=float(row["acc_phos"]),
            overall_accuracy=float(row.get("overall_acc", float("nan"))),
            training_dataset_size=float(row.get("dataset_size", float("nan"))),
            flops_per_sample=float(row.get("flops", float("nan"))),
            arch_family=str(row.get("arch_family", "") or ""),
            robustness=float(row.get("robustness", float("nan"))),
        ))
    return summaries


def save_bias_summaries(summaries: list, path) -> None:
    rows = [{
        "model": s.model, "arch_family": s.arch_family,
        "dataset_size": s.training_dataset_size, "flops": s.flops_per_sample,
        "acc_seg": s.accuracy_segments, "acc_phos": s.accuracy_phosphenes,
        "overall_acc": s.overall_accuracy, "robustness": s.robustness,
    } for s in summaries]
    pd.DataFrame(rows, columns=BIAS_CSV_COLUMNS).to_csv(path, index=False)
