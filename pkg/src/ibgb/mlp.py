"""Hand-differentiated MLP with a diagonal-Gaussian latent layer.

Architecture: a ReLU trunk, two linear heads producing the latent mean and
(softplus) std at the feature layer, a sampled latent via the
reparameterization trick, and a softmax linear decoder.  The backward pass is
exact backprop through the sampled latents for the objective

    cross_entropy + mi_weight * mi_hat

where ``mi_hat`` is the in-batch Monte-Carlo mutual-information estimate of
the latents against the inputs.  Noise is shared between the two terms inside
one step so the combined gradient is consistent.

Everything is numpy; there is no autodiff anywhere in this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericError

SIGMA_FLOOR = 1e-4
_LN2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianLatent:
    """Per-input latent Normal(mean, diag(std^2))."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape:
            raise InvalidArgument("mean/std shape mismatch")
        if np.any(self.std <= 0):
            raise InvalidArgument("std must be positive")

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]


def log_density(latent: GaussianLatent, z: np.ndarray) -> float | np.ndarray:
    """Exact diagonal-Gaussian log density (nats)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != latent.dim:
        raise InvalidArgument("z dimension mismatch")
    u = (z - latent.mean) / latent.std
    val = -0.5 * latent.dim * _LN2PI - np.log(latent.std).sum(axis=-1) \
        - 0.5 * (u * u).sum(axis=-1)
    return float(val) if np.ndim(val) == 0 else val


@dataclass
class MlpParams:
    """Weights for trunk layers, the two latent heads, and the decoder.

    ``widths`` lists the trunk hidden widths followed by the latent width,
    e.g. [32, 32, 16, 16] means three ReLU layers then a 16-d latent.
    ``fixed_sigma`` freezes the latent std at a constant (deterministic-feature
    models); the std head then receives no gradient.
    """

    trunk_w: list
    trunk_b: list
    w_mu: np.ndarray
    b_mu: np.ndarray
    w_sig: np.ndarray
    b_sig: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    widths: tuple
    n_inputs: int
    n_classes: int
    fixed_sigma: float | None = None

    # -- flattening ---------------------------------------------------------

    def _arrays(self):
        out = []
        for w, b in zip(self.trunk_w, self.trunk_b):
            out += [w, b]
        out += [self.w_mu, self.b_mu, self.w_sig, self.b_sig,
                self.w_dec, self.b_dec]
        return out

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self._arrays()])

    def unflatten(self, vec: np.ndarray) -> "MlpParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != self.flatten().size:
            raise InvalidArgument("flat vector size mismatch")
        new = []
        pos = 0
        for a in self._arrays():
            new.append(vec[pos:pos + a.size].reshape(a.shape).copy())
            pos += a.size
        n_trunk = len(self.trunk_w)
        return MlpParams(
            trunk_w=new[0:2 * n_trunk:2], trunk_b=new[1:2 * n_trunk:2],
            w_mu=new[2 * n_trunk], b_mu=new[2 * n_trunk + 1],
            w_sig=new[2 * n_trunk + 2], b_sig=new[2 * n_trunk + 3],
            w_dec=new[2 * n_trunk + 4], b_dec=new[2 * n_trunk + 5],
            widths=self.widths, n_inputs=self.n_inputs,
            n_classes=self.n_classes, fixed_sigma=self.fixed_sigma,
        )

    @property
    def n_params(self) -> int:
        return int(sum(a.size for a in self._arrays()))

    @property
    def n_layers(self) -> int:
        """Layers counting trunk, the latent layer, and the decoder (= D+1)."""
        return len(self.trunk_w) + 2

    def layer_slices(self) -> dict:
        """Map layer index l to the flat-prefix length covering layers 1..l.

        The latent heads count as one layer (index D); the decoder is D+1.
        Slices are nested by construction.
        """
        sizes = []
        for w, b in zip(self.trunk_w, self.trunk_b):
            sizes.append(w.size + b.size)
        sizes.append(self.w_mu.size + self.b_mu.size
                     + self.w_sig.size + self.b_sig.size)
        sizes.append(self.w_dec.size + self.b_dec.size)
        ends = np.cumsum(sizes)
        return {l + 1: int(ends[l]) for l in range(len(sizes))}

    def per_layer_frobenius(self) -> list:
        """Frobenius norm of each layer's weight matrix (trunk, heads, decoder)."""
        norms = [float(np.linalg.norm(w)) for w in self.trunk_w]
        norms.append(float(np.sqrt(np.linalg.norm(self.w_mu) ** 2
                                   + np.linalg.norm(self.w_sig) ** 2)))
        norms.append(float(np.linalg.norm(self.w_dec)))
        return norms

    # -- checkpoint io ------------------------------------------------------

    def save(self, path_prefix: str) -> None:
        self.flatten().astype("<f8").tofile(path_prefix + ".params.bin")
        manifest = {
            "widths": list(self.widths), "n_inputs": self.n_inputs,
            "n_classes": self.n_classes, "fixed_sigma": self.fixed_sigma,
            "n_params": self.n_params,
        }
        with open(path_prefix + ".params.json", "w") as fh:
            json.dump(manifest, fh)

    @staticmethod
    def load(path_prefix: str) -> "MlpParams":
        with open(path_prefix + ".params.json") as fh:
            manifest = json.load(fh)
        proto = init_params(tuple(manifest["widths"]), manifest["n_inputs"],
                            manifest["n_classes"], np.random.default_rng(0),
                            fixed_sigma=manifest["fixed_sigma"])
        vec = np.fromfile(path_prefix + ".params.bin", dtype="<f8")
        return proto.unflatten(vec)


def init_params(widths, n_inputs: int, n_classes: int, rng,
                fixed_sigma: float | None = None,
                sigma_bias: float = 0.0) -> MlpParams:
    """He-initialised trunk, smaller-scale heads and decoder, zero biases."""
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2:
        raise InvalidArgument("need at least one trunk width and a latent width")
    trunk_dims = (n_inputs,) + widths[:-1]
    latent = widths[-1]
    trunk_w, trunk_b = [], []
    for fan_in, fan_out in zip(trunk_dims[:-1], trunk_dims[1:]):
        trunk_w.append(rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
        trunk_b.append(np.zeros(fan_out))
    head_in = trunk_dims[-1]
    # 1/sqrt(head_in * latent) keeps pairwise latent distances (and so the
    # initial in-batch MI estimate) roughly width-independent
    scale = np.sqrt(1.0 / (head_in * latent))
    b_sig = np.full(latent, float(sigma_bias))
    return MlpParams(
        trunk_w=trunk_w, trunk_b=trunk_b,
        w_mu=rng.standard_normal((latent, head_in)) * scale,
        b_mu=np.zeros(latent),
        w_sig=rng.standard_normal((latent, head_in)) * scale,
        b_sig=b_sig,
        w_dec=rng.standard_normal((n_classes, latent)) * np.sqrt(1.0 / latent),
        b_dec=np.zeros(n_classes),
        widths=widths, n_inputs=n_inputs, n_classes=n_classes,
        fixed_sigma=fixed_sigma,
    )


def _softplus(t):
    return np.logaddexp(0.0, t)


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def forward_trunk(params: MlpParams, x: np.ndarray):
    """ReLU trunk activations; returns (activations list, pre-activations list)."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    acts, pres = [a], []
    for i, (w, b) in enumerate(zip(params.trunk_w, params.trunk_b)):
        s = a @ w.T + b
        if not np.all(np.isfinite(s)):
            raise NumericError(f"non-finite activation in trunk layer {i + 1}")
        a = np.maximum(s, 0.0)
        pres.append(s)
        acts.append(a)
    return acts, pres


def latent_params(params: MlpParams, x: np.ndarray):
    """(mu, sigma, sraw, trunk cache) for a batch of inputs."""
    acts, pres = forward_trunk(params, x)
    top = acts[-1]
    mu = top @ params.w_mu.T + params.b_mu
    sraw = top @ params.w_sig.T + params.b_sig
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sraw))):
        raise NumericError("non-finite activation in latent heads")
    if params.fixed_sigma is not None:
        sig = np.full_like(mu, float(params.fixed_sigma))
    else:
        sig = _softplus(sraw) + SIGMA_FLOOR
    return mu, sig, sraw, (acts, pres)


def batch_latents(params: MlpParams, x: np.ndarray):
    """Per-input GaussianLatent parameters as (n, m) arrays (mu, sigma)."""
    mu, sig, _, _ = latent_params(params, x)
    return mu, sig


def sample_latents(params: MlpParams, x: np.ndarray, k: int, rng):
    """Draw k latents z = mu(x) + sigma(x) * eps for a single input.

    Returns (samples (k, m), GaussianLatent).
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    mu, sig, _, _ = latent_params(params, np.atleast_2d(x))
    eps = rng.standard_normal((k, mu.shape[1]))
    z = mu[0] + sig[0] * eps
    return z, GaussianLatent(mean=mu[0], std=sig[0])


def _pairwise_log_density(z2d: np.ndarray, mu: np.ndarray, sig: np.ndarray):
    """log q(z_r | x_i) for every row r of z2d and every input i.

    Shapes: z2d (R, m), mu/sig (n, m) -> (R, n).  Written as three matmuls so
    BLAS carries the O(R n m) work.
    """
    a = 1.0 / (sig * sig)                       # (n, m)
    const = -0.5 * mu.shape[1] * _LN2PI - np.log(sig).sum(axis=1)   # (n,)
    q = (z2d * z2d) @ a.T - 2.0 * (z2d @ (mu * a).T) + ((mu * mu) * a).sum(axis=1)
    return const[None, :] - 0.5 * q


def objective_and_grads(params: MlpParams, x: np.ndarray, y: np.ndarray,
                        eps: np.ndarray, mi_weight: float):
    """Loss, exact gradients, and the in-batch MI estimate for fixed noise.

    eps has shape (k, n, m); the objective is
    CE + mi_weight * mi_hat with CE the log-of-mean-softmax cross entropy and
    mi_hat the Monte-Carlo estimator over the batch.  Returns
    (loss, grads: MlpParams-shaped, ce, mi_hat).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(x) == 0:
        raise InvalidArgument("batch must be a nonempty (n, d) array")
    k, n, m = eps.shape
    if n != len(x):
        raise InvalidArgument("eps batch size mismatch")

    mu, sig, sraw, (acts, _pres) = latent_params(params, x)
    z = mu[None, :, :] + sig[None, :, :] * eps      # (k, n, m)

    # decoder and cross entropy
    logits = z @ params.w_dec.T + params.b_dec      # (k, n, C)
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite activation in decoder layer")
    logits_max = logits.max(axis=2, keepdims=True)
    lse = logits_max[..., 0] + np.log(np.exp(logits - logits_max).sum(axis=2))
    logp = logits - lse[..., None]                  # (k, n, C)
    lp_y = logp[:, np.arange(n), y]                 # (k, n)
    lp_y_max = lp_y.max(axis=0)
    mix = lp_y_max + np.log(np.exp(lp_y - lp_y_max).sum(axis=0)) - np.log(k)
    ce = float(-mix.mean())
    if not np.isfinite(ce):
        raise NumericError("non-finite cross-entropy")

    # in-batch MI estimate (unconditional, same formula as the estimators)
    z2d = z.reshape(k * n, m)
    ld = _pairwise_log_density(z2d, mu, sig)        # (kn, n)
    own = ld[np.arange(k * n), np.tile(np.arange(n), k)]
    ld_max = ld.max(axis=1)
    lse_ld = ld_max + np.log(np.exp(ld - ld_max[:, None]).sum(axis=1))
    mi_hat = float((own - lse_ld + np.log(n)).mean())

    # ---- backward ----------------------------------------------------------
    w_resp = np.exp(lp_y - (mix + np.log(k)))       # (k, n) softmax over j
    p = np.exp(logp)
    g_logits = np.zeros_like(logits)
    g_logits[:, np.arange(n), y] = w_resp
    g_logits -= w_resp[..., None] * p
    g_logits *= -1.0 / n

    gw_dec = np.einsum("jnc,jnm->cm", g_logits, z)
    gb_dec = g_logits.sum(axis=(0, 1))
    gz = g_logits @ params.w_dec                    # (k, n, m), CE path

    gmu_dens = np.zeros_like(mu)
    gsig_dens = np.zeros_like(sig)
    if mi_weight != 0.0:
        r = np.exp(ld - lse_ld[:, None])            # (kn, n) responsibilities
        d_coef = -r / (n * k)
        d_coef[np.arange(k * n), np.tile(np.arange(n), k)] += 1.0 / (n * k)
        a_inv = 1.0 / (sig * sig)
        # z-path: d mi / d z = sum_i' D * (-(z - mu_i') / sig_i'^2)
        t1 = d_coef @ a_inv                          # (kn, m)
        t2 = d_coef @ (mu * a_inv)                   # (kn, m)
        gz += mi_weight * (t2 - z2d * t1).reshape(k, n, m)
        # density-parameter path
        c0 = d_coef.sum(axis=0)                      # (n,)
        m1 = d_coef.T @ z2d                          # (n, m)
        m2 = d_coef.T @ (z2d * z2d)                  # (n, m)
        gmu_dens = mi_weight * a_inv * (m1 - mu * c0[:, None])
        sumsq = m2 - 2.0 * mu * m1 + (mu * mu) * c0[:, None]
        gsig_dens = mi_weight * (-c0[:, None] / sig + sumsq * a_inv / sig)

    # reparameterization: z = mu + sig * eps
    gmu = gz.sum(axis=0) + gmu_dens
    gsig = (gz * eps).sum(axis=0) + gsig_dens
    if params.fixed_sigma is not None:
        gsraw = np.zeros_like(sraw)
    else:
        gsraw = gsig * _sigmoid(sraw)

    top = acts[-1]
    gw_mu = gmu.T @ top
    gb_mu = gmu.sum(axis=0)
    gw_sig = gsraw.T @ top
    gb_sig = gsraw.sum(axis=0)

    ga = gmu @ params.w_mu + gsraw @ params.w_sig
    gtrunk_w, gtrunk_b = [], []
    for i in range(len(params.trunk_w) - 1, -1, -1):
        gs = ga * (acts[i + 1] > 0)
        gtrunk_w.append(gs.T @ acts[i])
        gtrunk_b.append(gs.sum(axis=0))
        ga = gs @ params.trunk_w[i]
    gtrunk_w.reverse()
    gtrunk_b.reverse()

    grads = MlpParams(
        trunk_w=gtrunk_w, trunk_b=gtrunk_b,
        w_mu=gw_mu, b_mu=gb_mu, w_sig=gw_sig, b_sig=gb_sig,
        w_dec=gw_dec, b_dec=gb_dec,
        widths=params.widths, n_inputs=params.n_inputs,
        n_classes=params.n_classes, fixed_sigma=params.fixed_sigma,
    )
    loss = ce + mi_weight * mi_hat
    return loss, grads, ce, mi_hat


def loss_and_grads(params: MlpParams, x: np.ndarray, y: np.ndarray, k: int,
                   mi_weight: float, rng):
    """Objective and gradients with fresh reparameterization noise.

    The same noise draw feeds both the cross-entropy and the MI term.
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    eps = rng.standard_normal((k, len(x), params.widths[-1]))
    loss, grads, ce, mi_hat = objective_and_grads(params, x, y, eps, mi_weight)
    return loss, grads, mi_hat, ce


def predict_proba(params: MlpParams, x: np.ndarray, k: int, rng) -> np.ndarray:
    """Class probabilities averaged over k latent draws, shape (n, C)."""
    mu, sig, _, _ = latent_params(params, x)
    n, m = mu.shape
    eps = rng.standard_normal((k, n, m))
    z = mu[None] + sig[None] * eps
    logits = z @ params.w_dec.T + params.b_dec
    logits -= logits.max(axis=2, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=2, keepdims=True)
    return probs.mean(axis=0)


def eval_losses_mean(params: MlpParams, x: np.ndarray, y: np.ndarray):
    """(mean CE, error rate, max per-point CE) with the deterministic readout.

    The latent is taken at its mean, matching inference-time use of the
    network where no noise is injected.
    """
    mu, _, _, _ = latent_params(params, x)
    logits = mu @ params.w_dec.T + params.b_dec
    logits = logits - logits.max(axis=1, keepdims=True)
    logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    y = np.asarray(y)
    per_point = -logp[np.arange(len(y)), y]
    err = float((logp.argmax(axis=1) != y).mean())
    return float(per_point.mean()), err, float(per_point.max())


def eval_losses(params: MlpParams, x: np.ndarray, y: np.ndarray, k: int, rng):
    """(mean CE loss, error rate, max per-point CE loss) over a labelled set."""
    mu, sig, _, _ = latent_params(params, x)
    n, m = mu.shape
    eps = rng.standard_normal((k, n, m))
    z = mu[None] + sig[None] * eps
    logits = z @ params.w_dec.T + params.b_dec
    logits_max = logits.max(axis=2, keepdims=True)
    lse = logits_max[..., 0] + np.log(np.exp(logits - logits_max).sum(axis=2))
    logp = logits - lse[..., None]
    lp_y = logp[:, np.arange(n), y]
    lp_max = lp_y.max(axis=0)
    per_point = -(lp_max + np.log(np.exp(lp_y - lp_max).sum(axis=0)) - np.log(k))
    probs = np.exp(logp).mean(axis=0)
    err = float((probs.argmax(axis=1) != np.asarray(y)).mean())
    return float(per_point.mean()), err, float(per_point.max())
