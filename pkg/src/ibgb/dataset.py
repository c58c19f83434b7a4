"""Synthetic data: the 2D clustered classification task and fully enumerable
discrete worlds used to verify the bound machinery exactly.

The 2D task draws one isotropic Gaussian cluster per class (centers uniform in
[-4, 4]^2, std 0.5), which is learnable but not trivially separable.

Discrete worlds are small enough that every entropy and mutual information is
an exact finite sum.  Probabilities are dyadic rationals wherever we generate
them ourselves, so sums are exact in float64.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

CLUSTER_BOX = 4.0
CLUSTER_STD = 0.5

MAX_ALPHABET = 64
MAX_HYPOTHESES = 4096


# ---------------------------------------------------------------------------
# 2D clustered task


@dataclass(frozen=True)
class LabeledDataset:
    inputs: np.ndarray        # (n, d) float64
    labels: np.ndarray        # (n,) int
    train_idx: np.ndarray     # (n_train,) int
    test_idx: np.ndarray      # (n_test,) int
    seed: int
    n_classes: int

    def __post_init__(self):
        if np.intersect1d(self.train_idx, self.test_idx).size:
            raise InvalidArgument("train and test index sets overlap")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise InvalidArgument("label out of range")

    @property
    def train_inputs(self) -> np.ndarray:
        return self.inputs[self.train_idx]

    @property
    def train_labels(self) -> np.ndarray:
        return self.labels[self.train_idx]

    @property
    def test_inputs(self) -> np.ndarray:
        return self.inputs[self.test_idx]

    @property
    def test_labels(self) -> np.ndarray:
        return self.labels[self.test_idx]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x0,x1,label,split\n")
        split = np.empty(len(self.labels), dtype=object)
        split[self.train_idx] = "train"
        split[self.test_idx] = "test"
        for i in range(len(self.labels)):
            x0, x1 = self.inputs[i]
            buf.write(f"{float(x0)!r},{float(x1)!r},{int(self.labels[i])},{split[i]}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, seed: int = 0) -> "LabeledDataset":
        lines = text.strip().splitlines()
        if lines[0] != "x0,x1,label,split":
            raise InvalidArgument("unexpected CSV header")
        xs, ys, splits = [], [], []
        for line in lines[1:]:
            x0, x1, lab, split = line.split(",")
            xs.append((float(x0), float(x1)))
            ys.append(int(lab))
            splits.append(split)
        labels = np.array(ys, dtype=np.int64)
        splits = np.array(splits)
        return LabeledDataset(
            inputs=np.array(xs, dtype=np.float64),
            labels=labels,
            train_idx=np.flatnonzero(splits == "train"),
            test_idx=np.flatnonzero(splits == "test"),
            seed=seed,
            n_classes=int(labels.max()) + 1,
        )


def _balanced_labels(n: int, n_classes: int) -> np.ndarray:
    # counts differ by at most 1: first (n % C) classes get the extra point
    counts = np.full(n_classes, n // n_classes, dtype=np.int64)
    counts[: n % n_classes] += 1
    return np.repeat(np.arange(n_classes), counts)


def _cluster_rng(seed: int):
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0x2D]))


def cluster_centers(seed: int, n_classes: int) -> np.ndarray:
    """The class centers a given dataset seed generates."""
    return _cluster_rng(seed).uniform(-CLUSTER_BOX, CLUSTER_BOX, size=(n_classes, 2))


def resample_clusters(dataset_seed: int, n_classes: int, n_points: int,
                      sample_seed: int):
    """Fresh balanced draw from the same cluster distribution as the dataset.

    Used for evaluation samples larger than the training set.
    """
    centers = cluster_centers(dataset_seed, n_classes)
    rng = np.random.default_rng(
        np.random.SeedSequence([int(dataset_seed), int(sample_seed), 0x5A]))
    labels = _balanced_labels(n_points, n_classes)
    points = centers[labels] + CLUSTER_STD * rng.standard_normal((n_points, 2))
    return points, labels


def gen_clusters(seed: int, n_train: int, n_test: int, n_classes: int) -> LabeledDataset:
    """Draw the clustered 2D classification task.

    One Gaussian cluster per class; class counts in each split are balanced to
    within one point.  Bit-identical for identical seeds.
    """
    if n_classes < 2:
        raise InvalidArgument("need at least 2 classes")
    if n_train < n_classes or n_test < n_classes:
        raise InvalidArgument("counts must be at least n_classes and nonzero")
    rng = _cluster_rng(seed)
    centers = rng.uniform(-CLUSTER_BOX, CLUSTER_BOX, size=(n_classes, 2))
    labels = np.concatenate([_balanced_labels(n_train, n_classes),
                             _balanced_labels(n_test, n_classes)])
    points = centers[labels] + CLUSTER_STD * rng.standard_normal((len(labels), 2))
    return LabeledDataset(
        inputs=points,
        labels=labels,
        train_idx=np.arange(n_train),
        test_idx=np.arange(n_train, n_train + n_test),
        seed=int(seed),
        n_classes=n_classes,
    )


# ---------------------------------------------------------------------------
# Enumerable discrete worlds

_LN2 = float(np.log(2.0))


def entropy_bits(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy_nats(p: np.ndarray) -> float:
    return entropy_bits(p) * _LN2


def _binom_pmf(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) pmf over t = 0..n, computed in the log domain."""
    from math import lgamma

    if p <= 0.0:
        out = np.zeros(n + 1); out[0] = 1.0; return out
    if p >= 1.0:
        out = np.zeros(n + 1); out[n] = 1.0; return out
    t = np.arange(n + 1, dtype=np.float64)
    log_comb = lgamma(n + 1) - np.array([lgamma(k + 1) + lgamma(n - k + 1)
                                         for k in range(n + 1)])
    return np.exp(log_comb + t * np.log(p) + (n - t) * np.log1p(-p))


class FixedRule:
    """Learning rule that ignores the dataset: P(h | s) = probs for every s."""

    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=np.float64)
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise InvalidArgument("rule probabilities must sum to 1")

    def distribution(self, counts: np.ndarray) -> np.ndarray:
        return self.probs


class CountRule:
    """Learning rule driven by the count of samples landing in a cell set.

    ``cells`` indexes joint (y, x) cells; the sufficient statistic is
    t = number of drawn samples in those cells, which is Binomial(n, p_cells).
    ``table`` has one probability row over hypotheses per value t = 0..n.
    Because P(h | s) depends on s only through t, I(h; S) and H(h | S) are
    exactly computable by summing over t.
    """

    def __init__(self, cells, table):
        self.cells = np.asarray(cells, dtype=np.int64)
        self.table = np.asarray(table, dtype=np.float64)
        if np.any(np.abs(self.table.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidArgument("rule rows must be probability vectors")

    def distribution(self, counts: np.ndarray) -> np.ndarray:
        t = int(counts.ravel()[self.cells].sum())
        return self.table[min(t, len(self.table) - 1)]

    def statistic_values(self, counts_matrix: np.ndarray) -> np.ndarray:
        """Vectorized statistic for a (trials, n_cells) counts matrix."""
        return np.minimum(counts_matrix[:, self.cells].sum(axis=1),
                          len(self.table) - 1)


@dataclass(frozen=True)
class DiscreteInstance:
    """A finite world (X, Y, hypotheses, learning rule) with exact sums.

    ``x_probs[c, x]`` is P(X = x | Y = c); ``y_prior[c]`` is P(Y = c).
    A hypothesis is an (encoder, decoder) pair of lookup tables:
    ``enc[h, x]`` a latent symbol in [0, n_latent) and ``dec[h, z]`` an output
    symbol indexing rows of ``loss_table[yhat, y]``.
    """

    x_probs: np.ndarray
    y_prior: np.ndarray
    enc: np.ndarray
    dec: np.ndarray
    loss_table: np.ndarray
    rule: object
    n_latent: int
    nuisance_dim: int = 1
    name: str = "instance"

    def __post_init__(self):
        if abs(self.y_prior.sum() - 1.0) > 1e-12:
            raise InvalidArgument("y_prior must sum to 1")
        if np.any(np.abs(self.x_probs.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidArgument("x_probs rows must sum to 1")
        if self.x_probs.shape[1] > MAX_ALPHABET:
            raise InvalidArgument(f"|X| > {MAX_ALPHABET} defeats exact enumeration")
        if self.enc.shape[0] > MAX_HYPOTHESES:
            raise InvalidArgument(f"more than {MAX_HYPOTHESES} hypotheses")

    # -- basic shapes ------------------------------------------------------

    @property
    def n_classes(self) -> int:
        return len(self.y_prior)

    @property
    def n_inputs(self) -> int:
        return self.x_probs.shape[1]

    @property
    def n_hypotheses(self) -> int:
        return self.enc.shape[0]

    def joint_xy(self) -> np.ndarray:
        """P(Y = c, X = x) as a (C, |X|) matrix."""
        return self.y_prior[:, None] * self.x_probs

    @property
    def max_loss(self) -> float:
        return float(self.loss_table.max())

    # -- exact information quantities for one encoder ----------------------

    def latent_given_class(self, h: int) -> np.ndarray:
        """P(Z = z | Y = c) under hypothesis h's encoder, shape (C, n_latent)."""
        out = np.zeros((self.n_classes, self.n_latent))
        enc = self.enc[h]
        for z in range(self.n_latent):
            out[:, z] = self.x_probs[:, enc == z].sum(axis=1)
        return out

    def latent_marginal(self, h: int) -> np.ndarray:
        return self.y_prior @ self.latent_given_class(h)

    def mi_xz_bits(self, h: int) -> float:
        """I(X; Z) for a deterministic encoder: H(Z) since H(Z|X) = 0."""
        return entropy_bits(self.latent_marginal(h))

    def mi_yz_bits(self, h: int) -> float:
        pz = self.latent_marginal(h)
        cond = self.latent_given_class(h)
        h_z_given_y = float(np.dot(self.y_prior, [entropy_bits(row) for row in cond]))
        return entropy_bits(pz) - h_z_given_y

    def mi_xz_given_y_bits(self, h: int) -> float:
        """I(X; Z | Y) = sum_c P(c) H(Z | Y=c) for deterministic encoders."""
        cond = self.latent_given_class(h)
        return float(np.dot(self.y_prior, [entropy_bits(row) for row in cond]))

    def h_z_given_xy_bits(self, h: int) -> float:
        # deterministic lookup tables: zero by construction, kept as a sum so
        # the code path is exercised rather than special-cased
        del h
        return 0.0

    def loss_cells(self, h: int) -> np.ndarray:
        """Loss of hypothesis h on each joint cell, shape (C, |X|)."""
        yhat = self.dec[h, self.enc[h]]
        return self.loss_table[yhat[None, :],
                               np.arange(self.n_classes)[:, None]].astype(np.float64)

    def expected_loss(self, h: int) -> float:
        return float((self.joint_xy() * self.loss_cells(h)).sum())

    # -- exact information quantities for the learned hypothesis -----------

    def rule_statistic_pmf(self, n: int):
        """(values t, P(T=t)) of the rule's sufficient statistic for n draws."""
        if isinstance(self.rule, FixedRule):
            return np.array([0]), np.array([1.0])
        if not isinstance(self.rule, CountRule):
            raise InvalidArgument("exact rule statistics need a FixedRule or CountRule")
        p_cells = float(self.joint_xy().ravel()[self.rule.cells].sum())
        t = np.arange(n + 1)
        return t, _binom_pmf(n, p_cells)

    def hypothesis_table(self, n: int):
        """(P(T=t), P(h | T=t)) rows aligned with rule_statistic_pmf."""
        t, pmf = self.rule_statistic_pmf(n)
        if isinstance(self.rule, FixedRule):
            rows = self.rule.probs[None, :]
        else:
            idx = np.minimum(t, len(self.rule.table) - 1)
            rows = self.rule.table[idx]
        return pmf, rows

    def mi_hypothesis_dataset_bits(self, n: int) -> float:
        """I(h; S) where h is the full learned hypothesis index."""
        pmf, rows = self.hypothesis_table(n)
        marg = pmf @ rows
        h_marg = entropy_bits(marg)
        h_cond = float(np.dot(pmf, [entropy_bits(r) for r in rows]))
        return h_marg - h_cond

    def hypothesis_marginal(self, n: int) -> np.ndarray:
        """P(h) over hypotheses after n-sample training."""
        pmf, rows = self.hypothesis_table(n)
        return pmf @ rows

    def h_hypothesis_given_dataset_bits(self, n: int) -> float:
        pmf, rows = self.hypothesis_table(n)
        return float(np.dot(pmf, [entropy_bits(r) for r in rows]))

    def _encoder_rows(self, rows: np.ndarray) -> np.ndarray:
        """Collapse hypothesis probabilities onto distinct encoders."""
        _, enc_ids = np.unique(self.enc, axis=0, return_inverse=True)
        n_enc = enc_ids.max() + 1
        out = np.zeros((rows.shape[0], n_enc))
        for h in range(self.n_hypotheses):
            out[:, enc_ids[h]] += rows[:, h]
        return out

    def mi_encoder_dataset_bits(self, n: int) -> float:
        """I(phi; S): the encoder part of the learned hypothesis vs the sample."""
        pmf, rows = self.hypothesis_table(n)
        enc_rows = self._encoder_rows(rows)
        marg = pmf @ enc_rows
        return entropy_bits(marg) - float(np.dot(pmf, [entropy_bits(r) for r in enc_rows]))

    def h_encoder_given_dataset_bits(self, n: int) -> float:
        pmf, rows = self.hypothesis_table(n)
        enc_rows = self._encoder_rows(rows)
        return float(np.dot(pmf, [entropy_bits(r) for r in enc_rows]))

    def encoder_marginal(self, n: int) -> np.ndarray:
        """P(phi = e) over distinct encoders after n-sample training."""
        pmf, rows = self.hypothesis_table(n)
        return pmf @ self._encoder_rows(rows)


def gen_discrete_instance(n_inputs: int, n_latent: int, n_hypotheses: int,
                          seed: int, n_classes: int = 2) -> DiscreteInstance:
    """Random enumerable world with dyadic-rational probabilities.

    All joint quantities are exact sums; used as a fuzz harness for the
    information identities and the bound factors.
    """
    if n_inputs > MAX_ALPHABET:
        raise InvalidArgument(f"|X| capped at {MAX_ALPHABET}")
    if n_hypotheses > MAX_HYPOTHESES:
        raise InvalidArgument(f"hypothesis count capped at {MAX_HYPOTHESES}")
    if n_inputs < 1 or n_latent < 1 or n_hypotheses < 1:
        raise InvalidArgument("sizes must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xD15C]))

    grain = 64
    def dyadic(size):
        w = rng.integers(1, 8, size=size).astype(np.float64)
        u = np.floor(w / w.sum() * grain).astype(np.int64)
        u[0] += grain - u.sum()
        return u / grain

    y_prior = dyadic(n_classes)
    x_probs = np.stack([dyadic(n_inputs) for _ in range(n_classes)])
    enc = rng.integers(0, n_latent, size=(n_hypotheses, n_inputs))
    enc[:, :n_latent] = np.arange(n_latent)  # every latent symbol reachable
    dec = rng.integers(0, n_classes, size=(n_hypotheses, n_latent))
    loss_table = 1.0 - np.eye(n_classes)      # 0-1 loss
    if n_hypotheses == 1:
        rule = FixedRule([1.0])
    else:
        cells = rng.choice(n_classes * n_inputs, size=2, replace=False)
        n_table = 33
        table = np.zeros((n_table, n_hypotheses))
        pivots = rng.integers(0, n_hypotheses, size=n_table)
        table[np.arange(n_table), pivots] = 1.0
        rule = CountRule(cells, table)
    return DiscreteInstance(
        x_probs=x_probs, y_prior=y_prior, enc=enc, dec=dec,
        loss_table=loss_table, rule=rule, n_latent=n_latent,
        name=f"random-{seed}",
    )
