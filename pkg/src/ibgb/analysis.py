"""Correlation coefficients and the per-model metric table.

Coefficients: product-moment Pearson, Spearman as Pearson of average ranks
(ties get the mean rank), and tie-corrected Kendall tau-b.  Undefined
correlations (zero variance) raise and are reported as explicit nulls in the
emitted tables, never as 0.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UndefinedCorrelation
from .mi_model import rescale_model_mi


def _as_pair(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InvalidArgument("inputs must be matching 1-D arrays")
    if len(xs) < 2:
        raise InvalidArgument("need at least 2 points")
    return xs, ys


def average_ranks(xs: np.ndarray) -> np.ndarray:
    """1-based ranks with ties replaced by the mean rank of the tie group."""
    xs = np.asarray(xs)
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=np.float64)
    sx = xs[order]
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(xs, ys) -> float:
    xs, ys = _as_pair(xs, ys)
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    denom = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    if denom == 0:
        raise UndefinedCorrelation("zero variance")
    return float((xc * yc).sum() / denom)


def spearman(xs, ys) -> float:
    xs, ys = _as_pair(xs, ys)
    return pearson(average_ranks(xs), average_ranks(ys))


def kendall(xs, ys) -> float:
    """Tau-b: (P - Q) / sqrt((n0 - n1)(n0 - n2)) with tie corrections."""
    xs, ys = _as_pair(xs, ys)
    sx = np.sign(xs[:, None] - xs[None, :])
    sy = np.sign(ys[:, None] - ys[None, :])
    iu = np.triu_indices(len(xs), k=1)
    prod = sx[iu] * sy[iu]
    p_minus_q = prod.sum()
    n0 = len(xs) * (len(xs) - 1) / 2.0
    n1 = sum(t * (t - 1) / 2.0 for t in np.unique(xs, return_counts=True)[1])
    n2 = sum(t * (t - 1) / 2.0 for t in np.unique(ys, return_counts=True)[1])
    denom = np.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0:
        raise UndefinedCorrelation("all values tied")
    return float(p_minus_q / denom)


_METHODS = {"pearson": pearson, "spearman": spearman, "kendall": kendall}


def correlate(xs, ys, method: str) -> float:
    if method not in _METHODS:
        raise InvalidArgument(f"unknown method {method!r}")
    return _METHODS[method](xs, ys)


def summarize_layers(values, mode: str, layer: int | None = None) -> float:
    """Reduce per-layer values by min, max, mean, or pick a fixed layer."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidArgument("need at least one layer value")
    if mode == "min":
        return float(values.min())
    if mode == "max":
        return float(values.max())
    if mode == "mean":
        return float(values.mean())
    if mode == "fixed":
        if layer is None or not 0 <= layer < values.size:
            raise InvalidArgument(f"fixed layer index {layer} out of range")
        return float(values[layer])
    raise InvalidArgument(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# metric table


@dataclass
class MetricTable:
    model_ids: list
    metrics: dict                      # name -> (n_models,) float array
    gaps: dict                         # "loss"/"error" -> array

    def __post_init__(self):
        n = len(self.model_ids)
        for name, col in self.metrics.items():
            if len(col) != n:
                raise InvalidArgument(f"metric {name} has wrong length")
        for kind, col in self.gaps.items():
            if len(col) != n:
                raise InvalidArgument(f"gap {kind} has wrong length")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("model_id,metric,value\n")
        for kind, col in sorted(self.gaps.items()):
            for mid, v in zip(self.model_ids, col):
                buf.write(f"{mid},gap_{kind},{float(v)!r}\n")
        for name in sorted(self.metrics):
            for mid, v in zip(self.model_ids, self.metrics[name]):
                buf.write(f"{mid},{name},{float(v)!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "MetricTable":
        lines = text.strip().splitlines()
        if lines[0] != "model_id,metric,value":
            raise InvalidArgument("unexpected metric table header")
        cols: dict = {}
        ids: list = []
        for line in lines[1:]:
            mid, name, val = line.split(",")
            if mid not in ids:
                ids.append(mid)
            cols.setdefault(name, {})[mid] = float(val)
        gaps = {k[len("gap_"):]: np.array([cols[k][i] for i in ids])
                for k in cols if k.startswith("gap_")}
        metrics = {k: np.array([cols[k][i] for i in ids])
                   for k in cols if not k.startswith("gap_")}
        return MetricTable(model_ids=ids, metrics=metrics, gaps=gaps)


FEATURE_METRICS = ("mi_mc", "mi_mc_cond", "mi_jensen", "mi_jensen_cond")


def build_metric_table(records: list) -> MetricTable:
    """Assemble the metric table from per-model records.

    Each record carries the baselines, the four feature-MI estimates, and the
    model-MI estimates for its group.  Adds derived columns: m log m, the
    rescaled model MI (scale matched to the conditional MC feature MI), and
    the additive combined metrics.
    """
    if not records:
        raise InvalidArgument("no records")
    n_layers = {r.get("n_layers") for r in records}
    if len(n_layers) != 1:
        raise InvalidArgument("records mix different layer counts")
    ids = [r["model_id"] for r in records]
    col = lambda key: np.array([float(r[key]) for r in records])
    metrics = {
        "num_params": col("n_params"),
        "sum_frob": col("sum_frob"),
        "prod_frob": col("prod_frob"),
    }
    metrics["m_log_m"] = metrics["num_params"] * np.log(metrics["num_params"])
    feature_keys = [k for k in FEATURE_METRICS if k in records[0]]
    if not feature_keys:
        raise InvalidArgument("records carry no feature-MI columns")
    for key in feature_keys:
        metrics[key] = col(key)
    metrics["model_mi"] = col("model_mi")
    for extra in ("model_mi_out", "model_mi_logdomain", "model_mi_seed_avg"):
        if extra in records[0]:
            metrics[extra] = col(extra)

    scale_ref = "mi_mc_cond" if "mi_mc_cond" in metrics else feature_keys[0]
    tilde = rescale_model_mi(metrics["model_mi"], metrics[scale_ref])
    metrics["model_mi_rescaled"] = tilde
    for key in feature_keys:
        metrics[f"combined_raw_{key}"] = metrics["model_mi"] + metrics[key]
        metrics[f"combined_rescaled_{key}"] = tilde + metrics[key]
    gaps = {"loss": col("gap_loss"), "error": col("gap_error")}
    return MetricTable(model_ids=ids, metrics=metrics, gaps=gaps)


@dataclass
class CorrelationReport:
    rows: list = field(default_factory=list)   # dicts: metric, gap_kind, coefficients, n

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("metric,gap_kind,spearman,pearson,kendall,n\n")
        fmt = lambda v: "" if v is None else repr(v)
        for r in self.rows:
            buf.write(f"{r['metric']},{r['gap_kind']},{fmt(r['spearman'])},"
                      f"{fmt(r['pearson'])},{fmt(r['kendall'])},{r['n']}\n")
        return buf.getvalue()

    def lookup(self, metric: str, gap_kind: str, method: str):
        for r in self.rows:
            if r["metric"] == metric and r["gap_kind"] == gap_kind:
                return r[method]
        raise KeyError((metric, gap_kind))


def correlation_report(table: MetricTable) -> CorrelationReport:
    """All three coefficients of every metric against both gaps."""
    report = CorrelationReport()
    for name in sorted(table.metrics):
        for kind in sorted(table.gaps):
            row = {"metric": name, "gap_kind": kind, "n": len(table.model_ids)}
            for method in ("spearman", "pearson", "kendall"):
                try:
                    row[method] = correlate(table.metrics[name],
                                            table.gaps[kind], method)
                except UndefinedCorrelation:
                    row[method] = None
            report.rows.append(row)
    return report
