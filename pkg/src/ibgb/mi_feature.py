"""Feature-side mutual information estimators.

Two estimators over a labelled sample, both in nats: a Monte-Carlo estimator
(inner mixture average in the probability domain) and a Jensen upper bound
(inner average in the log domain), each with a class-conditional variant that
restricts the inner average to same-class points.  Also: noise-std selection
for deterministic features (adaptive scaling and constrained grid MLE) and
discrete binning of activations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .mlp import _pairwise_log_density, batch_latents

SIGMA_MIN = 1e-6
ADAPTIVE_BASE = 1e-3

# rows x columns budget for one pairwise log-density block (~32 MB)
_CHUNK_CELLS = 4_000_000


@dataclass
class FeatureMiEstimate:
    value: float              # nats
    estimator: str            # mc | jensen
    conditional: bool
    k: int
    n: int
    layer: int = 0


@dataclass
class SigmaSchedule:
    sigmas: np.ndarray                 # per-layer std
    method: str                        # adaptive | mle
    grid: np.ndarray = field(default_factory=lambda: np.array([]))
    mi_per_layer: np.ndarray = field(default_factory=lambda: np.array([]))
    constraint_warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64)
        if np.any(self.sigmas <= 0):
            raise InvalidArgument("sigma must be positive")


def _mixture_stats(mu, sig, z, labels=None):
    """Sample-level sums needed by every estimator variant.

    mu, sig: (n, m); z: (k, n, m) latents with z[j, i] drawn from input i.
    Returns dict with per-(j,i) own log density, log-mean and mean-log over
    the full sample, and the same over same-class subsets when labels given.
    """
    k, n, m = z.shape
    z2d = z.reshape(k * n, m)
    idx = np.tile(np.arange(n), k)
    rows_per_chunk = max(1, _CHUNK_CELLS // n)
    own = np.empty(k * n)
    logmean_all = np.empty(k * n)
    meanlog_all = np.empty(k * n)
    if labels is not None:
        labels = np.asarray(labels)
        logmean_cls = np.empty(k * n)
        meanlog_cls = np.empty(k * n)
        cols_by_class = {c: np.flatnonzero(labels == c) for c in np.unique(labels)}
    for start in range(0, k * n, rows_per_chunk):
        stop = min(start + rows_per_chunk, k * n)
        ld = _pairwise_log_density(z2d[start:stop], mu, sig)     # (R, n)
        rows = np.arange(start, stop)
        own[rows] = ld[np.arange(len(rows)), idx[rows]]
        mx = ld.max(axis=1)
        logmean_all[rows] = mx + np.log(np.exp(ld - mx[:, None]).mean(axis=1))
        meanlog_all[rows] = ld.mean(axis=1)
        if labels is not None:
            row_cls = labels[idx[rows]]
            for c, cols in cols_by_class.items():
                sel = np.flatnonzero(row_cls == c)
                if sel.size == 0:
                    continue
                sub = ld[np.ix_(sel, cols)]
                mxc = sub.max(axis=1)
                logmean_cls[rows[sel]] = mxc + np.log(
                    np.exp(sub - mxc[:, None]).mean(axis=1))
                meanlog_cls[rows[sel]] = sub.mean(axis=1)
    out = {"own": own, "logmean_all": logmean_all, "meanlog_all": meanlog_all}
    if labels is not None:
        out["logmean_cls"] = logmean_cls
        out["meanlog_cls"] = meanlog_cls
    return out


def _check_classes(labels, n_classes):
    labels = np.asarray(labels)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    for c in range(n_classes):
        if not np.any(labels == c):
            raise InvalidArgument(f"conditional estimate with empty class {c}")
    return labels


def estimate_feature_mi(latents, labels=None, estimator: str = "mc",
                        conditional: bool = False, k: int = 64, rng=None,
                        n_classes: int | None = None, layer: int = 0,
                        eps: np.ndarray | None = None) -> FeatureMiEstimate:
    """Estimate I(X; Z) or I(X; Z | Y) from per-input latent Gaussians.

    ``latents`` is an (mu, sigma) pair of (n, m) arrays (sigma may be scalar);
    latent samples are drawn from each input's own Gaussian and scored against
    the mixture over the sample (or the same-class subsample).
    """
    if estimator not in ("mc", "jensen"):
        raise InvalidArgument(f"unknown estimator {estimator!r}")
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    mu, sig = latents
    mu = np.asarray(mu, dtype=np.float64)
    sig = np.broadcast_to(np.asarray(sig, dtype=np.float64), mu.shape)
    n, m = mu.shape
    if conditional:
        labels = _check_classes(labels, n_classes)
    if eps is None:
        eps = rng.standard_normal((k, n, m))
    z = mu[None] + sig[None] * eps
    stats = _mixture_stats(mu, sig, z, labels if conditional else None)
    if estimator == "mc":
        inner = stats["logmean_cls"] if conditional else stats["logmean_all"]
    else:
        inner = stats["meanlog_cls"] if conditional else stats["meanlog_all"]
    value = float((stats["own"] - inner).mean())
    return FeatureMiEstimate(value=value, estimator=estimator,
                             conditional=conditional, k=k, n=n, layer=layer)


def estimate_feature_mi_all(latents, labels, k: int, rng,
                            layer: int = 0) -> dict:
    """All four estimates {mc, jensen} x {marginal, conditional} in one pass.

    Shares one latent draw and one pairwise log-density sweep, so the Jensen
    inequality holds exactly against the MC value on the shared samples.
    """
    mu, sig = latents
    mu = np.asarray(mu, dtype=np.float64)
    sig = np.broadcast_to(np.asarray(sig, dtype=np.float64), mu.shape)
    labels = _check_classes(labels, None)
    n, m = mu.shape
    z = mu[None] + sig[None] * rng.standard_normal((k, n, m))
    stats = _mixture_stats(mu, sig, z, labels)
    own = stats["own"]
    mk = lambda val, est, cond: FeatureMiEstimate(float(val), est, cond, k, n, layer)
    return {
        "mi_mc": mk((own - stats["logmean_all"]).mean(), "mc", False),
        "mi_jensen": mk((own - stats["meanlog_all"]).mean(), "jensen", False),
        "mi_mc_cond": mk((own - stats["logmean_cls"]).mean(), "mc", True),
        "mi_jensen_cond": mk((own - stats["meanlog_cls"]).mean(), "jensen", True),
    }


def model_feature_latents(params, x):
    """(mu, sigma) latent parameters of a trained stochastic model on inputs x."""
    return batch_latents(params, np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# noise-std selection for deterministic features


def select_sigma_adaptive(features_per_layer, base: float = ADAPTIVE_BASE) -> SigmaSchedule:
    """sigma_l^2 = base * max |activation| in layer l, floored at SIGMA_MIN."""
    if base <= 0:
        raise InvalidArgument("base must be positive")
    sigmas = []
    for feats in features_per_layer:
        peak = float(np.abs(feats).max()) if np.size(feats) else 0.0
        sigmas.append(max(np.sqrt(base * peak), SIGMA_MIN))
    return SigmaSchedule(sigmas=np.array(sigmas), method="adaptive")


def _mixture_loglik(feats, sigma, eps):
    """Mean log of the sample mixture density at noisy copies of the features."""
    n, m = feats.shape
    z = feats[None] + sigma * eps
    sig = np.full_like(feats, sigma)
    stats = _mixture_stats(feats, sig, z, None)
    return float(stats["logmean_all"].mean())


def _mc_mi(feats, sigma, eps):
    z = feats[None] + sigma * eps
    sig = np.full_like(feats, sigma)
    stats = _mixture_stats(feats, sig, z, None)
    return float((stats["own"] - stats["logmean_all"]).mean())


DEFAULT_SIGMA2_GRID = np.geomspace(1e-4, 1.0, 16)


def select_sigma_mle(features_per_layer, grid=None, k: int = 16,
                     rng=None) -> SigmaSchedule:
    """Grid MLE of the per-layer noise variance, deepest layer first.

    Chooses the variance maximizing the mixture log likelihood of noisy
    features subject to the MI estimate being non-increasing with depth
    (information processing); if no grid point satisfies the constraint the
    layer takes the point with the largest MI and records a warning.
    """
    if grid is None:
        grid = DEFAULT_SIGMA2_GRID
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0 or np.any(grid <= 0):
        raise InvalidArgument("grid must be nonempty and positive")
    if rng is None:
        rng = np.random.default_rng(0)
    n_layers = len(features_per_layer)
    sigmas = np.zeros(n_layers)
    mi_vals = np.zeros(n_layers)
    warnings = []
    floor_mi = -np.inf
    for l in range(n_layers - 1, -1, -1):
        feats = np.asarray(features_per_layer[l], dtype=np.float64)
        eps = rng.standard_normal((k,) + feats.shape)
        cand_sig = np.sqrt(grid)
        lik = np.array([_mixture_loglik(feats, s, eps) for s in cand_sig])
        mi = np.array([_mc_mi(feats, s, eps) for s in cand_sig])
        ok = mi >= floor_mi - 1e-12
        if ok.any():
            pick = int(np.flatnonzero(ok)[np.argmax(lik[ok])])
        else:
            pick = int(np.argmax(mi))
            warnings.append(l + 1)
        sigmas[l] = cand_sig[pick]
        mi_vals[l] = mi[pick]
        floor_mi = mi_vals[l]
    return SigmaSchedule(sigmas=sigmas, method="mle", grid=grid,
                         mi_per_layer=mi_vals, constraint_warnings=warnings)


# ---------------------------------------------------------------------------
# discrete binning


def bin_symbols(features: np.ndarray, n_bins: int) -> np.ndarray:
    """Per-input discrete symbol ids from uniform binning of activations.

    Bin edges span the layer-global [min, max] of the observed activations and
    are shared by every node; each input maps to the id of its bin tuple.
    """
    if n_bins < 2:
        raise InvalidArgument("n_bins must be >= 2")
    feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
    lo, hi = feats.min(), feats.max()
    if hi <= lo:
        codes = np.zeros(feats.shape, dtype=np.int64)
    else:
        edges = np.linspace(lo, hi, n_bins + 1)[1:-1]
        codes = np.searchsorted(edges, feats, side="right")
    _, ids = np.unique(codes, axis=0, return_inverse=True)
    return ids


def _plugin_entropy(ids: np.ndarray) -> float:
    _, counts = np.unique(ids, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def binned_mi(features: np.ndarray, inputs_distinct: bool = True,
              labels=None, n_bins: int = 10, input_ids=None) -> float:
    """Plug-in discrete MI of binned activations, in nats.

    With deterministic features and distinct inputs this is H(T); with labels
    it is H(T) - sum_c p(c) H(T | Y=c); with repeated inputs pass input_ids so
    H(T | X) can be computed by grouping.
    """
    ids = bin_symbols(features, n_bins)
    if labels is not None:
        labels = np.asarray(labels)
        h_t = _plugin_entropy(ids)
        h_cond = 0.0
        for c in np.unique(labels):
            sel = labels == c
            h_cond += sel.mean() * _plugin_entropy(ids[sel])
        return h_t - h_cond
    if inputs_distinct:
        return _plugin_entropy(ids)
    if input_ids is None:
        raise InvalidArgument("need input_ids when inputs are not distinct")
    input_ids = np.asarray(input_ids)
    h_t = _plugin_entropy(ids)
    h_cond = 0.0
    for xv in np.unique(input_ids):
        sel = input_ids == xv
        h_cond += sel.mean() * _plugin_entropy(ids[sel])
    return h_t - h_cond
