"""Explicit factors of the generalization bounds and their verification.

Everything here operates on enumerable worlds (`DiscreteInstance`) where every
probability, entropy, and mutual information is an exact finite sum, so the
high-probability inequalities can be checked by direct simulation.

Base conventions follow the printed formulas: typical sets and the mutual
information / entropy factors that get multiplied by ln(2) are in bits; the
additive log terms and the tilted constant C_lambda are in nats.  Conversions
happen only where a bits quantity enters a nats expression, via ln(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DiscreteInstance, entropy_bits, entropy_nats
from .errors import InvalidArgument

LN2 = float(np.log(2.0))

DEFAULT_GAMMA = 1.0
DEFAULT_LAMBDA = 0.5


# ---------------------------------------------------------------------------
# typical sets


def typical_epsilon(sensitivity: float, m: int, n: int, gamma: float) -> float:
    """Half-width (bits) of the latent typical set: c * sqrt(m ln(sqrt(n)/gamma) / 2)."""
    if gamma <= 0 or n < 1:
        raise InvalidArgument("gamma must be positive and n >= 1")
    arg = np.log(np.sqrt(n) / gamma)
    if arg < 0:
        arg = 0.0   # gamma > sqrt(n) would make the radicand negative
    return float(sensitivity * np.sqrt(m * arg / 2.0))


def typical_set(pz: np.ndarray, gamma: float, n: int, sensitivity: float,
                m: int):
    """Members of {z : -log2 P(z) - H(Z) <= eps} plus the size certificate.

    Returns (member indices over the support, eps, H bits).  The size bound
    |set| <= 2^(H + eps) is asserted.
    """
    pz = np.asarray(pz, dtype=np.float64)
    if pz.sum() <= 0:
        raise InvalidArgument("zero-probability class has no typical set")
    h_bits = entropy_bits(pz)
    eps = typical_epsilon(sensitivity, m, n, gamma)
    support = np.flatnonzero(pz > 0)
    dev = -np.log2(pz[support]) - h_bits
    members = support[dev <= eps + 1e-12]
    if len(members) > 2.0 ** (h_bits + eps) * (1 + 1e-9):
        raise AssertionError("typical set exceeded its size bound")
    return members, eps, h_bits


def encoder_sensitivity(instance: DiscreteInstance, h: int, y: int) -> float:
    """Exhaustive nuisance-swap sensitivity (bits) of hypothesis h for class y.

    The per-class input draw is modelled as a single nuisance coordinate, so
    the sensitivity is the full range of -log2 P(Z_y = phi(x)) over the
    support of X | Y=y.
    """
    pz = instance.latent_given_class(h)[y]
    sup_x = np.flatnonzero(instance.x_probs[y] > 0)
    if sup_x.size == 0:
        raise InvalidArgument(f"class {y} has empty support")
    vals = -np.log2(pz[instance.enc[h, sup_x]])
    return float(vals.max() - vals.min())


def compute_typical_set(instance: DiscreteInstance, h: int, y: int,
                        gamma: float, n: int,
                        sensitivity: float | None = None,
                        m: int | None = None):
    """Typical latent symbols of class y under hypothesis h's encoder."""
    if instance.y_prior[y] <= 0:
        raise InvalidArgument(f"class {y} has zero probability")
    if sensitivity is None:
        sensitivity = encoder_sensitivity(instance, h, y)
    if m is None:
        m = instance.nuisance_dim
    pz = instance.latent_given_class(h)[y]
    return typical_set(pz, gamma, n, sensitivity, m)


# ---------------------------------------------------------------------------
# the tilted constant and the hypothesis typical set


def compute_C_lambda(probs: np.ndarray, lam: float) -> float:
    """C_lambda = exp(-lam H) * sum_q P(q)^(1-lam), entropy in nats."""
    probs = np.asarray(probs, dtype=np.float64)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise InvalidArgument("probs must sum to 1")
    if not 0.0 < lam < 1.0:
        raise InvalidArgument("lambda must lie in (0, 1)")
    h_nats = entropy_nats(probs)
    nz = probs[probs > 0]
    return float(np.exp(-lam * h_nats) * (nz ** (1.0 - lam)).sum())


def hypothesis_typical_set(probs: np.ndarray, lam: float, delta: float):
    """{q : -ln P(q) - H <= eps} with eps = (1/lam) ln(C_lambda / delta).

    The Markov argument guarantees P(outside) <= delta; membership and the
    entropy here are in nats, and the size obeys |set| <= exp(H + eps).
    """
    probs = np.asarray(probs, dtype=np.float64)
    c_lam = compute_C_lambda(probs, lam)
    eps = float(np.log(c_lam / delta) / lam)
    h_nats = entropy_nats(probs)
    support = np.flatnonzero(probs > 0)
    members = support[-np.log(probs[support]) - h_nats <= eps + 1e-12]
    return members, eps, c_lam


# ---------------------------------------------------------------------------
# bound factors


@dataclass
class BoundFactors:
    g1: float
    g2: float
    g3: float
    g4: float
    c_lambda: float
    zeta: float
    g2_hat: float
    g2_check: float
    gamma: float
    lam: float
    delta: float
    n: int
    layer: int

    def __post_init__(self):
        vals = [self.g1, self.g2, self.g3, self.g4, self.c_lambda,
                self.zeta, self.g2_hat, self.g2_check]
        if not np.all(np.isfinite(vals)):
            raise InvalidArgument("bound factors must be finite")


def _g1(q: float, max_train_loss: float, max_loss: float, gamma: float,
        n_classes: int, delta: float, n: int) -> float:
    lead = max_train_loss * np.sqrt(2.0 * gamma * n_classes) / n ** 0.25
    return float(lead * np.sqrt(q + np.log(2.0 * n_classes / delta))
                 + gamma * max_loss)


class BoundEvaluator:
    """Per-instance bound assembly shared by the evaluators and the simulator.

    Layer convention for instances: layer 1 is the latent representation
    (encoder phi, decoder g), layer 2 is the output layer (l = D+1, whole
    hypothesis).  Precomputes per-hypothesis factor tables so simulation can
    evaluate the per-draw bound by lookup.
    """

    N_LAYERS = 2    # instances expose the latent layer and the output layer

    def __init__(self, instance: DiscreteInstance, n: int, delta: float,
                 d_set=(1, 2), gamma: float = DEFAULT_GAMMA,
                 lam: float = DEFAULT_LAMBDA, mode: str = "thm2_learned",
                 d_size: int | None = None):
        if len(d_set) == 0:
            raise InvalidArgument("the layer set must be nonempty")
        if mode not in ("thm1_fixed_encoder", "thm2_learned"):
            raise InvalidArgument(f"unknown mode {mode!r}")
        d_set = tuple(sorted(set(int(l) for l in d_set)))
        if any(l not in (1, 2) for l in d_set):
            raise InvalidArgument("instances expose layers 1 (latent) and 2 (output)")
        # the union-bound corrections use the full layer count by default so
        # that shrinking d_set can only remove candidates from the min
        self.d_size = int(d_size) if d_size is not None else self.N_LAYERS
        n_enc = len(np.unique(instance.enc, axis=0))
        if mode == "thm1_fixed_encoder":
            if n_enc != 1:
                raise InvalidArgument("thm1 mode requires a single fixed encoder")
            if 2 in d_set:
                raise InvalidArgument("thm1 covers latent layers only (l <= D)")
        self.instance = instance
        self.n = int(n)
        self.delta = float(delta)
        self.d_set = d_set
        self.gamma = float(gamma)
        self.lam = float(lam)
        self.mode = mode
        self.n_classes = instance.n_classes
        self._build()

    def _build(self):
        inst, n, delta = self.instance, self.n, self.delta
        d_size = self.d_size
        ny = self.n_classes
        hs = range(inst.n_hypotheses)

        joint = inst.joint_xy()
        self.expected_loss = np.array([inst.expected_loss(h) for h in hs])
        self.loss_cells = np.stack([inst.loss_cells(h).ravel() for h in hs])
        sup_mask = joint.ravel() > 0
        self.max_loss = np.array([
            self.loss_cells[h][sup_mask].max() for h in hs])

        # latent-layer quantities per hypothesis
        g2, g3, mi_cond = [], [], []
        for h in hs:
            pzy = inst.latent_given_class(h)
            sens = np.array([encoder_sensitivity(inst, h, y) for y in range(ny)])
            rad = np.array([typical_epsilon(sens[y], inst.nuisance_dim, n, self.gamma)
                            for y in range(ny)])
            g2.append(float(np.dot(inst.y_prior, rad))
                      + inst.h_z_given_xy_bits(h))
            best = 0.0
            for y in range(ny):
                members, _, _ = typical_set(pzy[y], self.gamma, n, sens[y],
                                            inst.nuisance_dim)
                lat_loss = inst.loss_table[inst.dec[h], y]
                term = float((lat_loss[members]
                              * np.sqrt(2.0 * ny * pzy[y][members])).sum())
                best = max(best, term)
            g3.append(best)
            mi_cond.append(inst.mi_xz_given_y_bits(h))
        self.g2 = np.array(g2)
        self.g3 = np.array(g3)
        self.mi_cond_bits = np.array(mi_cond)

        if self.mode == "thm1_fixed_encoder":
            self.c_lambda = {1: float("nan")}
            self.g4 = {1: 0.0}
            self.zeta = 0.0
            # G2-script: G2 ln2 + ln(2|Y|/delta)
            self.sqrt_inner = (self.mi_cond_bits * LN2
                               + self.g2 * LN2 + np.log(2.0 * ny / delta))
            self.g1_q = 0.0
            return

        self.mi_enc_bits = inst.mi_encoder_dataset_bits(n)
        self.mi_hyp_bits = inst.mi_hypothesis_dataset_bits(n)
        self.c_lambda = {
            1: compute_C_lambda(inst.encoder_marginal(n), self.lam),
            2: compute_C_lambda(inst.hypothesis_marginal(n), self.lam),
        }
        self.g4 = {
            1: float(np.log(self.c_lambda[1] * d_size / delta) / self.lam
                     + inst.h_encoder_given_dataset_bits(n)),
            2: float(np.log(self.c_lambda[2] * d_size / delta) / self.lam
                     + inst.h_hypothesis_given_dataset_bits(n)),
        }
        self.zeta = (self.mi_enc_bits + self.g4[1]) * LN2 + np.log(2.0 * d_size)
        g2_hat = (self.g2 + self.g4[1]) * LN2 + np.log(4.0 * ny * d_size / delta)
        self.sqrt_inner = ((self.mi_cond_bits + self.mi_enc_bits) * LN2 + g2_hat)
        self.g2_hat = g2_hat
        self.g2_check = self.g4[2] * LN2 + np.log(2.0 / delta)
        self.g1_q = self.zeta

    # -- per-draw evaluation -------------------------------------------------

    def q_latent(self, h, max_train_loss):
        """Q_1 for hypothesis index array h and per-draw max train loss."""
        h = np.asarray(h)
        a = self.g3[h] * np.sqrt(self.sqrt_inner[h] / self.n)
        g1 = (max_train_loss
              * np.sqrt(2.0 * self.gamma * self.n_classes) / self.n ** 0.25
              * np.sqrt(self.g1_q + np.log(2.0 * self.n_classes / self.delta))
              + self.gamma * self.max_loss[h])
        return a + g1 / np.sqrt(self.n)

    def q_output(self, h):
        h = np.asarray(h)
        inner = self.mi_hyp_bits * LN2 + self.g2_check
        return self.max_loss[h] * np.sqrt(inner / (2.0 * self.n))

    def bound(self, h, max_train_loss):
        """min over the layer set of Q_l, vectorized over draws."""
        qs = []
        if 1 in self.d_set:
            qs.append(self.q_latent(h, max_train_loss))
        if 2 in self.d_set:
            qs.append(self.q_output(h))
        return np.minimum.reduce(qs)

    def factors(self, h: int, max_train_loss: float, layer: int = 1) -> BoundFactors:
        """All explicit factors for one hypothesis at one layer."""
        if layer not in (1, 2):
            raise InvalidArgument("layer must be 1 (latent) or 2 (output)")
        thm2 = self.mode == "thm2_learned"
        g4 = self.g4[layer] if thm2 else 0.0
        return BoundFactors(
            g1=_g1(self.g1_q, max_train_loss, self.max_loss[h], self.gamma,
                   self.n_classes, self.delta, self.n),
            g2=float(self.g2[h]), g3=float(self.g3[h]), g4=g4,
            c_lambda=self.c_lambda[layer] if thm2 else float("nan"),
            zeta=float(self.zeta),
            g2_hat=float(self.g2_hat[h]) if thm2 else float("nan"),
            g2_check=float(self.g2_check) if thm2 else float("nan"),
            gamma=self.gamma, lam=self.lam, delta=self.delta, n=self.n,
            layer=layer,
        )


def bound_factors(instance: DiscreteInstance, h: int, max_train_loss: float,
                  gamma: float, lam: float, delta: float, n: int,
                  layer: int = 1, d_size: int = 2,
                  mode: str = "thm2_learned") -> BoundFactors:
    """Explicit Theorem-1/2 factors for one learned hypothesis."""
    d_set = (1, 2) if mode == "thm2_learned" else (1,)
    ev = BoundEvaluator(instance, n, delta, d_set=d_set, gamma=gamma,
                        lam=lam, mode=mode, d_size=d_size)
    return ev.factors(h, max_train_loss, layer=layer)


def theorem_bound(instance: DiscreteInstance, h: int, max_train_loss: float,
                  d_set, delta: float, n: int,
                  gamma: float = DEFAULT_GAMMA, lam: float = DEFAULT_LAMBDA,
                  mode: str = "thm2_learned") -> float:
    """min over the layer set of Q_l for one draw's learned hypothesis."""
    ev = BoundEvaluator(instance, n, delta, d_set=d_set, gamma=gamma,
                        lam=lam, mode=mode)
    return float(ev.bound(np.array([h]), np.array([max_train_loss]))[0])


# ---------------------------------------------------------------------------
# simulation


@dataclass
class BoundVerdict:
    bound_value: float
    empirical_violation_rate: float
    delta: float
    trials: int
    mode: str
    instance: str

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance, "mode": self.mode,
            "delta": self.delta, "bound": self.bound_value,
            "violation_rate": self.empirical_violation_rate,
            "trials": self.trials,
        }


def simulate_draws(instance: DiscreteInstance, n: int, trials: int, rng):
    """(counts over joint cells, learned hypothesis index) per trial."""
    p_joint = instance.joint_xy().ravel()
    counts = rng.multinomial(n, p_joint, size=trials)
    rule = instance.rule
    if hasattr(rule, "statistic_values"):
        t = rule.statistic_values(counts)
        rows = rule.table[t]
    else:
        rows = np.broadcast_to(rule.probs, (trials, len(rule.probs)))
    u = rng.random(trials)
    cum = rows.cumsum(axis=1)
    hyp = (u[:, None] < cum).argmax(axis=1)
    return counts, hyp


def verify_bound(instance: DiscreteInstance, n: int, delta: float,
                 trials: int, rng, mode: str = "thm2_learned",
                 d_set=None, gamma: float = DEFAULT_GAMMA,
                 lam: float = DEFAULT_LAMBDA, bound_scale: float = 1.0,
                 return_arrays: bool = False):
    """Draw datasets, learn, and compare the exact gap against the bound.

    The gap is exact: expected loss by enumeration minus the empirical loss of
    the drawn sample.  Reports the fraction of draws violating the bound.
    """
    if trials < 100:
        raise InvalidArgument("need at least 100 trials")
    if d_set is None:
        d_set = (1, 2) if mode == "thm2_learned" else (1,)
    ev = BoundEvaluator(instance, n, delta, d_set=d_set, gamma=gamma,
                        lam=lam, mode=mode)
    counts, hyp = simulate_draws(instance, n, trials, rng)
    emp_loss = (counts * ev.loss_cells[hyp]).sum(axis=1) / n
    gaps = ev.expected_loss[hyp] - emp_loss
    present = counts > 0
    masked = np.where(present, ev.loss_cells[hyp], -np.inf)
    max_train = masked.max(axis=1)
    bounds = ev.bound(hyp, max_train) * bound_scale
    viol = float((gaps > bounds).mean())
    verdict = BoundVerdict(
        bound_value=float(bounds.mean()), empirical_violation_rate=viol,
        delta=delta, trials=trials, mode=mode, instance=instance.name)
    if return_arrays:
        return verdict, gaps, bounds
    return verdict


def multinomial_concentration_sim(p, n: int, delta: float, trials: int,
                                  rng) -> np.ndarray:
    """Per-coordinate rate of p_k - count_k/n exceeding sqrt(2 p_k ln(1/delta)/n)."""
    p = np.asarray(p, dtype=np.float64)
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidArgument("p must sum to 1")
    counts = rng.multinomial(n, p, size=trials)
    dev = p[None, :] - counts / n
    thr = np.sqrt(2.0 * p * np.log(1.0 / delta) / n)
    return (dev > thr[None, :] + 1e-15).mean(axis=0)


# ---------------------------------------------------------------------------
# propositions


def prop1_g3_bound(v, alpha: float, beta: float, scale: float,
                   n_classes: int) -> float:
    """Tail bound on the loss-weighted typical-set sum.

    Requires v sorted descending with v_k <= scale * exp(-(k/beta)^alpha) for
    the tail indices k > ceil(2^(1/alpha) beta) (1-indexed); the head terms
    need no envelope.  Returns
    sqrt(2 |Y|) (sqrt(v_1) ceil(bt) + sqrt(scale) bt / (alpha e)) with
    bt = 2^(1/alpha) beta, and asserts it dominates the direct
    sqrt(2 |Y|) sum_k sqrt(v_k).  The tail constant is sqrt(scale), the value
    the integral comparison actually yields; it makes the bound homogeneous of
    degree 1/2 when v and scale are rescaled together.
    """
    v = np.asarray(v, dtype=np.float64)
    if alpha < 1 or beta <= 0 or scale <= 0:
        raise InvalidArgument("need alpha >= 1, beta > 0, scale > 0")
    if np.any(v < 0) or np.any(np.diff(v) > 1e-12):
        raise InvalidArgument("v must be nonnegative and sorted descending")
    bt = 2.0 ** (1.0 / alpha) * beta
    head = int(np.ceil(bt))
    kk = np.arange(head + 1, len(v) + 1)
    envelope = scale * np.exp(-((kk / beta) ** alpha))
    bad = np.flatnonzero(v[head:] > envelope * (1 + 1e-12))
    if bad.size:
        raise InvalidArgument(
            f"decay hypothesis violated at index {head + bad[0] + 1}")
    bound = float(np.sqrt(2.0 * n_classes)
                  * (np.sqrt(v[0]) * head + np.sqrt(scale) * bt / (alpha * np.e)))
    direct = float(np.sqrt(2.0 * n_classes) * np.sqrt(v).sum())
    if direct > bound + 1e-9:
        raise AssertionError("proposition bound failed to dominate direct sum")
    return bound


@dataclass
class Prop2Result:
    direct_c_lambda: float
    c_lambda_bound: float | None = None
    direct_entropy: float | None = None
    entropy_bound: float | None = None
    center: float | None = None
    slack: float | None = None
    probs: np.ndarray | None = None


def prop2_clambda_bound(case: str, lam: float, n_terms: int, alpha: float,
                        coef_hi: float = 1.0, coef_lo: float | None = None,
                        rng=None) -> Prop2Result:
    """Power-law checks of the tilted constant.

    fast_decay: p_i proportional to 1/i^alpha with alpha > 1; checks both the
    entropy bound and C_lambda <= coef^(1-lam) alpha(1-lam)/(alpha(1-lam)-1),
    valid for 0 < lam < 1 - 1/alpha and coef >= 1.

    slow_decay: p_i = c_i/(Z i^alpha) with 0 <= alpha < 1 and
    coef_lo <= c_i <= coef_hi; checks |ln C_lambda - center| <= slack with the
    printed center and slack.
    """
    if case == "fast_decay":
        if alpha <= 1:
            raise InvalidArgument("fast decay needs alpha > 1")
        if not 0 < lam < 1 - 1.0 / alpha:
            raise InvalidArgument("need 0 < lambda < 1 - 1/alpha")
        if coef_hi < 1:
            raise InvalidArgument("fast-decay constant must be >= 1")
        i = np.arange(1, n_terms + 1, dtype=np.float64)
        p = i ** -alpha
        p /= p.sum()
        direct_h = entropy_nats(p)
        direct_c = compute_C_lambda(p, lam)
        h_bound = 1.0 + coef_hi * alpha * (
            np.log(2) / 2 ** alpha + np.log(3) / 3 ** alpha
            + 3 ** (1 - alpha) * ((alpha - 1) * np.log(3) + 1) / (alpha - 1) ** 2)
        c_bound = coef_hi ** (1 - lam) * alpha * (1 - lam) / (alpha * (1 - lam) - 1)
        return Prop2Result(direct_c_lambda=direct_c, c_lambda_bound=float(c_bound),
                           direct_entropy=direct_h, entropy_bound=float(h_bound),
                           probs=p)
    if case == "slow_decay":
        if not 0 <= alpha < 1:
            raise InvalidArgument("slow decay needs 0 <= alpha < 1")
        if not 0 < lam < 1:
            raise InvalidArgument("lambda must lie in (0, 1)")
        if coef_lo is None:
            coef_lo = coef_hi
        if not 0 < coef_lo <= coef_hi:
            raise InvalidArgument("need 0 < coef_lo <= coef_hi")
        if rng is None:
            rng = np.random.default_rng(0)
        i = np.arange(1, n_terms + 1, dtype=np.float64)
        c_i = rng.uniform(coef_lo, coef_hi, size=n_terms)
        p = c_i / i ** alpha
        p /= p.sum()
        direct_c = compute_C_lambda(p, lam)
        center = (np.log(1 - (1 - lam) * alpha)
                  - (1 - 2 * lam) * np.log(1 - alpha))
        slack = (2 - lam) * np.log(coef_hi / coef_lo) \
            + coef_hi / (coef_lo * (1 - alpha))
        if abs(np.log(direct_c) - center) > slack + 1e-9:
            raise AssertionError("slow-decay slack band violated")
        return Prop2Result(direct_c_lambda=direct_c, center=float(center),
                           slack=float(slack), probs=p)
    raise InvalidArgument(f"unknown case {case!r}")


# ---------------------------------------------------------------------------
# binning adjustment


def reference_instances() -> dict:
    """Three shipped worlds used by the bound-verification suite.

    Returns name -> (instance, n, mode).  The learning rules depend on the
    drawn sample only through a binomial cell count, so I(phi; S) and
    H(phi | S) are exact sums.
    """
    from .dataset import CountRule, DiscreteInstance

    # overlapping class supports: inputs 3 and 4 are ambiguous, so every
    # hypothesis carries real loss and count-driven selection overfits
    y_prior = np.array([0.5, 0.5])
    x_probs = np.array([
        [3, 2, 1, 1, 1, 0, 0, 0],
        [0, 0, 0, 1, 1, 1, 2, 3],
    ]) / 8.0
    loss01 = 1.0 - np.eye(2)
    enc_fine = np.arange(8) // 2          # four latent symbols
    enc_coarse = np.arange(8) // 4        # two latent symbols

    # A: one fixed encoder, four candidate decoders picked by a cell count
    enc_a = np.tile(enc_fine, (4, 1))
    dec_a = np.array([[0, 0, 1, 1],
                      [0, 0, 0, 1],
                      [0, 1, 1, 1],
                      [0, 1, 0, 1]])
    n_a = 100
    cells_a = [2, 3, 8 + 4, 8 + 5]     # the ambiguous middle cells
    table_a = np.zeros((n_a + 1, 4))
    table_a[:21, 1] = 1.0
    table_a[21:26, 0] = 1.0
    table_a[26:31, 2] = 1.0
    table_a[31:, 3] = 1.0
    inst_a = DiscreteInstance(
        x_probs=x_probs, y_prior=y_prior, enc=enc_a, dec=dec_a,
        loss_table=loss01, rule=CountRule(cells_a, table_a), n_latent=4,
        name="fixed-encoder")

    # B: two encoders x several decoders, deterministic threshold rule
    enc_b = np.stack([enc_fine, enc_fine, enc_coarse, enc_coarse, enc_fine])
    dec_b = np.array([[0, 0, 1, 1],
                      [0, 1, 1, 1],
                      [0, 1, 0, 0],
                      [1, 0, 0, 0],
                      [0, 1, 0, 1]])
    n_b = 80
    cells_b = [3, 8 + 4]               # the crossing cells (y0,x3), (y1,x4)
    table_b = np.zeros((n_b + 1, 5))
    table_b[:7, 0] = 1.0
    table_b[7:10, 2] = 1.0
    table_b[10:13, 1] = 1.0
    table_b[13:16, 4] = 1.0
    table_b[16:, 3] = 1.0
    inst_b = DiscreteInstance(
        x_probs=x_probs, y_prior=y_prior, enc=enc_b, dec=dec_b,
        loss_table=loss01, rule=CountRule(cells_b, table_b), n_latent=4,
        name="learned-encoder")

    # C: stochastic rule (nonzero H(phi | S)) over noisier hypotheses
    enc_c = np.stack([enc_fine, enc_fine, enc_coarse, enc_coarse])
    dec_c = np.array([[0, 0, 1, 1],
                      [0, 1, 1, 0],
                      [0, 1, 0, 0],
                      [1, 0, 1, 1]])
    n_c = 50
    cells_c = [2, 3, 8 + 4]
    table_c = np.zeros((n_c + 1, 4))
    table_c[:8] = [0.4, 0.2, 0.3, 0.1]
    table_c[8:12] = [0.55, 0.2, 0.15, 0.1]
    table_c[12:] = [0.7, 0.1, 0.15, 0.05]
    inst_c = DiscreteInstance(
        x_probs=x_probs, y_prior=y_prior, enc=enc_c, dec=dec_c,
        loss_table=loss01, rule=CountRule(cells_c, table_c), n_latent=4,
        name="noisy-rule")

    return {
        "fixed-encoder": (inst_a, n_a, "thm1_fixed_encoder"),
        "learned-encoder": (inst_b, n_b, "thm2_learned"),
        "noisy-rule": (inst_c, n_c, "thm2_learned"),
    }


def binning_radius_cl(epsilon: float, n: int) -> float:
    """C_l = epsilon / sqrt(n) for a binning of per-bin radius epsilon/sqrt(n L^2)."""
    if epsilon < 0 or n < 1:
        raise InvalidArgument("need epsilon >= 0 and n >= 1")
    return float(epsilon / np.sqrt(n))


def corollary1_adjust(bound: float, c_l: float) -> float:
    """Binned-encoder correction: bound + 2 C_l."""
    if c_l < 0:
        raise InvalidArgument("C_l must be nonnegative")
    return float(bound + 2.0 * c_l)
