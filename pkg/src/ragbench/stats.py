"""Evaluation statistics: paired bootstrap, exact McNemar, BH-FDR, paired t,
Pearson, Tukey outlier replacement, and timing aggregation.

All randomness flows through numpy's seeded default generator and seeds are
echoed into results. Quartiles use linear interpolation between order
statistics; percent values round half to even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


@dataclass(frozen=True)
class BootstrapResult:
    mean: float  # percent
    sd: float  # percent, sample sd over redraw means
    ci_low: float
    ci_high: float
    redraws: int
    seed: int
    redraw_means: tuple[float, ...] = field(repr=False, default=())


def bootstrap_paired(
    vectors: dict[str, list[bool]] | list[list[bool]],
    redraws: int = 1000,
    seed: int = 0,
) -> dict[str, BootstrapResult] | list[BootstrapResult]:
    """Percentile bootstrap over question redraws, identical redraws across vectors.

    Every redraw samples n indices with replacement and applies the same
    index sample to every vector, preserving pairing. Deterministic given
    the seed.
    """
    named = isinstance(vectors, dict)
    items = list(vectors.items()) if named else list(enumerate(vectors))
    if not items:
        raise ValueError("bootstrap_paired requires at least one vector")
    if redraws < 1:
        raise ValueError("redraws must be >= 1")
    lengths = {len(v) for _, v in items}
    if lengths == {0}:
        raise ValueError("bootstrap_paired requires non-empty vectors")
    if len(lengths) != 1:
        raise ValueError(f"vectors are misaligned: lengths {sorted(lengths)}")
    n = lengths.pop()
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(redraws, n))
    results = {}
    for key, vector in items:
        arr = np.asarray(vector, dtype=float)
        redraw_means = arr[indices].mean(axis=1) * 100.0
        ci_low, ci_high = np.percentile(redraw_means, [2.5, 97.5])
        sd = float(redraw_means.std(ddof=1)) if redraws > 1 else 0.0
        results[key] = BootstrapResult(
            mean=float(redraw_means.mean()),
            sd=sd,
            ci_low=float(ci_low),
            ci_high=float(ci_high),
            redraws=redraws,
            seed=seed,
            redraw_means=tuple(float(m) for m in redraw_means),
        )
    if named:
        return results
    return [results[i] for i in range(len(items))]


def mcnemar_exact(b: int, c: int) -> float:
    """Two-sided exact McNemar p-value from the discordant-pair counts.

    n = b + c; p = min(1, 2 * P(X <= min(b, c))) for X ~ Binomial(n, 1/2),
    computed with exact integer arithmetic. No discordant pairs gives p = 1.
    """
    if b < 0 or c < 0:
        raise ValueError("discordant counts must be non-negative")
    n = b + c
    if n == 0:
        return 1.0
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    return min(1.0, 2.0 * tail / 2.0**n)


def discordant_counts(first: list[bool], second: list[bool]) -> tuple[int, int]:
    """(only-first-correct, only-second-correct) over paired outcomes."""
    if len(first) != len(second):
        raise ValueError("paired outcome vectors differ in length")
    b = sum(1 for f, s in zip(first, second) if f and not s)
    c = sum(1 for f, s in zip(first, second) if s and not f)
    return b, c


def fdr_bh(pvalues: list[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjustment, returned in the original order."""
    for p in pvalues:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value outside [0, 1]: {p}")
    m = len(pvalues)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: pvalues[i])
    adjusted_sorted = [pvalues[order[i]] * m / (i + 1) for i in range(m)]
    running = math.inf
    for i in range(m - 1, -1, -1):
        running = min(running, adjusted_sorted[i])
        adjusted_sorted[i] = min(1.0, running)
    adjusted = [0.0] * m
    for rank, original_index in enumerate(order):
        adjusted[original_index] = adjusted_sorted[rank]
    return adjusted


@dataclass(frozen=True)
class PairedTResult:
    mean_diff: float
    ci_low: float
    ci_high: float
    t: float
    df: int
    p: float
    d_z: float
    degenerate: bool = False


def paired_t(x: list[float], y: list[float]) -> PairedTResult:
    """Two-sided paired t-test of x - y with t-based CI and Cohen's d_z."""
    if len(x) != len(y):
        raise ValueError("paired_t requires equal-length inputs")
    n = len(x)
    if n < 2:
        raise ValueError("paired_t requires n >= 2")
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return PairedTResult(0.0, 0.0, 0.0, 0.0, df, 1.0, 0.0)
        sign = math.copysign(math.inf, mean)
        return PairedTResult(mean, mean, mean, sign, df, 0.0, sign, degenerate=True)
    se = sd / math.sqrt(n)
    t = mean / se
    p = 2.0 * float(sps.t.sf(abs(t), df))
    half = float(sps.t.ppf(0.975, df)) * se
    return PairedTResult(
        mean_diff=mean,
        ci_low=mean - half,
        ci_high=mean + half,
        t=t,
        df=df,
        p=p,
        d_z=mean / sd,
    )


def pearson(x: list[float], y: list[float]) -> float:
    """Sample Pearson correlation; degenerate variance is an error."""
    if len(x) != len(y):
        raise ValueError("pearson requires equal-length inputs")
    if len(x) < 2:
        raise ValueError("pearson requires n >= 2")
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    return float((dx * dy).sum() / (sx * sy))


def tukey_clean(times: list[float]) -> list[float]:
    """Replace upper Tukey outliers with the mean of the remaining values.

    Only the upper fence Q3 + 1.5*IQR applies; quartiles use linear
    interpolation. Order is preserved.
    """
    if len(times) < 4:
        raise ValueError("tukey_clean requires at least 4 values")
    arr = np.asarray(times, dtype=float)
    q1, q3 = np.percentile(arr, [25, 75])
    fence = q3 + 1.5 * (q3 - q1)
    outliers = arr > fence
    if not outliers.any():
        return [float(v) for v in arr]
    replacement = float(arr[~outliers].mean())
    cleaned = arr.copy()
    cleaned[outliers] = replacement
    return [float(v) for v in cleaned]


def amortize_overhead(times: list[float], total_overhead_s: float, n_questions: int) -> list[float]:
    """Distribute a one-time overhead uniformly: each time gains total/n."""
    if len(times) != n_questions:
        raise ValueError(
            f"length mismatch: {len(times)} times for {n_questions} questions"
        )
    share = total_overhead_s / n_questions
    return [t + share for t in times]


@dataclass(frozen=True)
class TimingTableRow:
    name: str
    is_group: bool
    zs_mean: float
    zs_sd: float
    rar_mean: float
    rar_sd: float
    abs_diff: float
    rel_increase: float | None  # None when the zero-shot mean is 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "is_group": self.is_group,
            "zero_shot_mean_s": self.zs_mean,
            "zero_shot_sd_s": self.zs_sd,
            "rar_mean_s": self.rar_mean,
            "rar_sd_s": self.rar_sd,
            "abs_diff_s": self.abs_diff,
            "rel_increase": self.rel_increase,
        }


def _ratio(rar_mean: float, zs_mean: float) -> float | None:
    return rar_mean / zs_mean if zs_mean > 0 else None


def _model_row(name: str, zs: list[float], rar: list[float]) -> TimingTableRow:
    zs_arr = np.asarray(zs, dtype=float)
    rar_arr = np.asarray(rar, dtype=float)
    zs_mean = float(zs_arr.mean())
    rar_mean = float(rar_arr.mean())
    return TimingTableRow(
        name=name,
        is_group=False,
        zs_mean=zs_mean,
        zs_sd=float(zs_arr.std(ddof=1)),
        rar_mean=rar_mean,
        rar_sd=float(rar_arr.std(ddof=1)),
        abs_diff=rar_mean - zs_mean,
        rel_increase=_ratio(rar_mean, zs_mean),
    )


def timing_table(
    model_times: dict[str, tuple[list[float], list[float]]],
    groups: dict[str, list[str]] | None = None,
) -> list[TimingTableRow]:
    """Per-model and per-group timing rows from cleaned, amortized vectors.

    `model_times` maps model name to (zero-shot vector, rar vector). Group
    statistics are computed at the group level: the mean and sample standard
    deviation of the member-model means, and the group ratio of the group
    means.
    """
    rows: list[TimingTableRow] = []
    model_rows = {name: _model_row(name, zs, rar) for name, (zs, rar) in model_times.items()}
    for name, members in (groups or {}).items():
        missing = [m for m in members if m not in model_rows]
        if missing:
            raise ValueError(f"group {name}: missing timing for {missing}")
        if not members:
            raise ValueError(f"group {name}: empty group")
        zs_means = np.asarray([model_rows[m].zs_mean for m in members])
        rar_means = np.asarray([model_rows[m].rar_mean for m in members])
        abs_diffs = np.asarray([model_rows[m].abs_diff for m in members])
        ddof = 1 if len(members) > 1 else 0
        rows.append(
            TimingTableRow(
                name=name,
                is_group=True,
                zs_mean=float(zs_means.mean()),
                zs_sd=float(zs_means.std(ddof=ddof)),
                rar_mean=float(rar_means.mean()),
                rar_sd=float(rar_means.std(ddof=ddof)),
                abs_diff=float(abs_diffs.mean()),
                rel_increase=_ratio(float(rar_means.mean()), float(zs_means.mean())),
            )
        )
        rows.extend(model_rows[m] for m in members)
    grouped = {m for members in (groups or {}).values() for m in members}
    rows.extend(row for name, row in model_rows.items() if name not in grouped)
    return rows
