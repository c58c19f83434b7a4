"""Parameter-side mutual information from SWAG posteriors.

The learned parameters are modelled per training run as a diagonal Gaussian
fitted from optimizer iterates.  Mutual information between the training
dataset (as a random variable over draws) and the parameters up to layer l is
estimated by sampling parameter vectors from each posterior and comparing
log densities across the posteriors of other dataset draws, averaging in the
log domain for numerical stability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, RescaleUndefined

_LN2PI = float(np.log(2.0 * np.pi))

VAR_FLOOR = 1e-8


@dataclass
class SwagPosterior:
    """Diagonal Gaussian over the flattened parameter vector.

    ``layer_slices`` maps layer index l to the flat-prefix length covering
    parameters up to layer l; slices are nested and the largest equals the
    full dimension.
    """

    mean: np.ndarray
    var: np.ndarray
    layer_slices: dict

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.var = np.asarray(self.var, dtype=np.float64)
        if self.mean.shape != self.var.shape or self.mean.ndim != 1:
            raise InvalidArgument("mean/var must be matching 1-D arrays")
        if np.any(self.var <= 0):
            raise InvalidArgument("variance must be strictly positive")
        ends = [self.layer_slices[l] for l in sorted(self.layer_slices)]
        if any(b < a for a, b in zip(ends, ends[1:])):
            raise InvalidArgument("layer slices must be nested")
        if ends and ends[-1] != self.mean.size:
            raise InvalidArgument("largest slice must cover all coordinates")

    def prefix(self, layer: int) -> int:
        if layer not in self.layer_slices:
            raise InvalidArgument(f"unknown layer {layer}")
        return self.layer_slices[layer]

    def sample(self, layer: int, k: int, rng) -> np.ndarray:
        d = self.prefix(layer)
        eps = rng.standard_normal((k, d))
        return self.mean[:d] + np.sqrt(self.var[:d]) * eps

    # -- persistence ---------------------------------------------------------

    def save(self, path_prefix: str) -> None:
        self.mean.astype("<f8").tofile(path_prefix + ".mean.bin")
        self.var.astype("<f8").tofile(path_prefix + ".var.bin")
        with open(path_prefix + ".swag.json", "w") as fh:
            json.dump({"dim": int(self.mean.size),
                       "layer_slices": {str(k): int(v)
                                        for k, v in self.layer_slices.items()}}, fh)

    @staticmethod
    def load(path_prefix: str) -> "SwagPosterior":
        with open(path_prefix + ".swag.json") as fh:
            manifest = json.load(fh)
        mean = np.fromfile(path_prefix + ".mean.bin", dtype="<f8")
        var = np.fromfile(path_prefix + ".var.bin", dtype="<f8")
        if mean.size != manifest["dim"]:
            raise InvalidArgument("posterior file dimension mismatch")
        return SwagPosterior(mean, var,
                             {int(k): v for k, v in manifest["layer_slices"].items()})


def swag_log_density(posterior: SwagPosterior, w: np.ndarray, layer: int):
    """Diagonal-Gaussian log density restricted to slice(layer) coordinates."""
    d = posterior.prefix(layer)
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != d:
        raise InvalidArgument(f"w has dim {w.shape[-1]}, slice({layer}) = {d}")
    var = posterior.var[:d]
    u = w - posterior.mean[:d]
    val = -0.5 * (d * _LN2PI + np.log(var).sum()) - 0.5 * ((u * u) / var).sum(axis=-1)
    return float(val) if np.ndim(val) == 0 else val


@dataclass
class ModelMiEstimate:
    value: float
    variant: str          # jensen | seed_averaged
    layer: int
    n_datasets: int
    n_seeds: int
    k: int


def _as_seed_maps(posteriors):
    """Normalize {dataset: posterior} or {dataset: {seed: posterior}}."""
    out = {}
    for s, v in posteriors.items():
        out[s] = dict(v) if isinstance(v, dict) else {0: v}
    return out


def estimate_model_mi(posteriors, layer: int, k: int, variant: str, rng,
                      seed_mixture: bool = False) -> ModelMiEstimate:
    """MI between the dataset draw and parameters up to ``layer``.

    ``posteriors`` maps dataset key -> SwagPosterior (jensen, mc) or
    dataset key -> {seed key -> SwagPosterior} (seed_averaged).  The jensen
    variant averages log densities across dataset posteriors in the log
    domain (an upper bound); the mc variant scores samples against the
    mixture of dataset posteriors in the probability domain, which saturates
    near ln(number of datasets) when the posteriors separate, like the true
    mutual information.  seed_averaged additionally averages the per-seed log
    densities before differencing, excluding the seed from the learning
    algorithm; ``seed_mixture=True`` replaces that seed-wise mean of logs
    with the log of the seed-mixture density.
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    by_seed = _as_seed_maps(posteriors)
    datasets = sorted(by_seed)
    if len(datasets) < 2:
        raise InvalidArgument("MI over datasets undefined: need >= 2 datasets")
    if variant not in ("jensen", "mc", "seed_averaged"):
        raise InvalidArgument(f"unknown variant {variant!r}")

    if variant in ("jensen", "mc"):
        # one posterior per dataset: collapse seed maps that hold a single seed
        posts = []
        for s in datasets:
            seeds = sorted(by_seed[s])
            if len(seeds) != 1:
                raise InvalidArgument(f"{variant} variant expects one posterior"
                                      " per dataset")
            posts.append(by_seed[s][seeds[0]])
        total = 0.0
        for post in posts:
            w = post.sample(layer, k, rng)                     # (k, d)
            lds = np.stack([swag_log_density(q, w, layer) for q in posts])
            own = swag_log_density(post, w, layer)
            if variant == "jensen":
                total += float((own - lds.mean(axis=0)).mean())
            else:
                total += float((own - _logmeanexp(lds, axis=0)).mean())
        value = total / len(posts)
        return ModelMiEstimate(value, variant, layer, len(posts), 1, k)

    seed_sets = [tuple(sorted(by_seed[s])) for s in datasets]
    if len(set(seed_sets)) != 1:
        raise InvalidArgument("seed_averaged requires the same seed set per dataset")
    seeds = list(seed_sets[0])
    grid = [[by_seed[s][g] for g in seeds] for s in datasets]   # (D, G)
    n_d, n_g = len(datasets), len(seeds)
    total = 0.0
    for si, s in enumerate(datasets):
        for gi in range(n_g):
            w = grid[si][gi].sample(layer, k, rng)
            # (D, G, k) log densities of these draws under every posterior
            ld = np.stack([[swag_log_density(grid[sj][gj], w, layer)
                            for gj in range(n_g)] for sj in range(n_d)])
            if seed_mixture:
                own = _logmeanexp(ld[si], axis=0)
                all_ = _logmeanexp(ld.reshape(n_d * n_g, k), axis=0)
            else:
                own = ld[si].mean(axis=0)
                all_ = ld.reshape(n_d * n_g, k).mean(axis=0)
            total += float((own - all_).mean())
    value = total / (n_d * n_g)
    return ModelMiEstimate(value, "seed_averaged", layer, n_d, n_g, k)


def _logmeanexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    out = m.squeeze(axis) + np.log(np.exp(a - m).mean(axis=axis))
    return out


def rescale_model_mi(model_mi_values, feature_mi_values) -> np.ndarray:
    """Multiply each model-MI value by mu'/mu (suite-level scale matching).

    mu is the mean of the model-MI values, mu' the mean of the feature-MI
    values; rescaling preserves the ordering of the model-MI column.
    """
    model_mi_values = np.asarray(model_mi_values, dtype=np.float64)
    feature_mi_values = np.asarray(feature_mi_values, dtype=np.float64)
    if model_mi_values.size == 0 or feature_mi_values.size == 0:
        raise InvalidArgument("need nonempty value lists")
    mu = model_mi_values.mean()
    if mu == 0.0:
        raise RescaleUndefined("mean of model-MI values is zero")
    return (feature_mi_values.mean() / mu) * model_mi_values
