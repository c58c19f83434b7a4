import numpy as np
import pytest

from ibgb import mlp, trainer
from ibgb.dataset import LabeledDataset, gen_clusters
from ibgb.errors import InvalidArgument


def separable_two_cluster(n_train=20, n_test=20):
    rng = np.random.default_rng(0)
    n = n_train + n_test
    labels = np.tile([0, 1], n // 2)
    centers = np.array([[-6.0, 0.0], [6.0, 0.0]])
    points = centers[labels] + 0.3 * rng.standard_normal((n, 2))
    return LabeledDataset(inputs=points, labels=labels,
                          train_idx=np.arange(n_train),
                          test_idx=np.arange(n_train, n),
                          seed=0, n_classes=2)


# ---------------------------------------------------------------------------
# dual update


def test_dual_update_satisfied_constraint_unchanged():
    assert trainer.dual_update(1.0, 0.1, 1.5, 1.5) == pytest.approx(1.0)


def test_dual_update_violation_raises_multiplier():
    assert trainer.dual_update(0.0, 0.1, 1.5, 2.5) == pytest.approx(0.1)


def test_dual_update_projection_at_zero():
    # derived: max(0, 0.05 - 0.1) = 0
    assert trainer.dual_update(0.05, 0.1, 1.5, 0.5) == 0.0


def test_dual_update_equality_literal_sign():
    assert trainer.dual_update_equality(0.0, 0.1, 1.5, 0.5) == pytest.approx(0.1)
    assert trainer.dual_update_equality(0.0, 0.1, 1.5, 2.5) == pytest.approx(-0.1)


# ---------------------------------------------------------------------------
# SWAG


def test_fit_swag_identical_iterates():
    v = np.array([1.0, -2.0, 3.0])
    post = trainer.fit_swag([v, v, v])
    assert np.array_equal(post.mean, v)
    assert np.all(post.var == trainer.VAR_FLOOR)


def test_fit_swag_two_point_moments():
    post = trainer.fit_swag([np.array([0.0]), np.array([2.0])])
    assert post.mean[0] == pytest.approx(1.0)
    assert post.var[0] == pytest.approx(1.0)


def test_fit_swag_monte_carlo_moments():
    rng = np.random.default_rng(0)
    draws = rng.standard_normal((10_000, 3))
    post = trainer.fit_swag(list(draws))
    assert np.all(np.abs(post.mean) < 0.05)
    assert np.all(np.abs(post.var - 1.0) < 0.05)


def test_fit_swag_requires_two_iterates():
    with pytest.raises(InvalidArgument):
        trainer.fit_swag([np.zeros(2)])


# ---------------------------------------------------------------------------
# training


def test_zero_step_training_keeps_params():
    data = separable_two_cluster()
    tc = trainer.TrainConfig(widths=(4, 4, 3, 3), weight_decay=0.0,
                             lr_theta=0.0, iterations=5, seed=0)
    m = trainer.train(tc, data)
    rng = np.random.default_rng(np.random.SeedSequence([0, 0, 0x7124]))
    init = mlp.init_params((4, 4, 3, 3), 2, 2, rng)
    assert np.array_equal(m.params.flatten(), init.flatten())


def test_training_fits_separable_data():
    data = separable_two_cluster()
    tc = trainer.TrainConfig(widths=(8, 8, 4, 4), iterations=300, seed=1)
    m = trainer.train(tc, data)
    assert m.train_error == 0.0
    assert m.accepted


def test_training_reproducible():
    data = gen_clusters(5, 30, 30, 3)
    tc = trainer.TrainConfig(widths=(8, 8, 4, 4), iterations=40, seed=3,
                             rho=1.0, constraint_mode="equality")
    a = trainer.train(tc, data)
    b = trainer.train(tc, data)
    assert np.array_equal(a.params.flatten(), b.params.flatten())
    assert np.array_equal(a.mi_history, b.mi_history)
    assert a.train_loss == b.train_loss


def test_gap_identities():
    data = gen_clusters(2, 30, 30, 3)
    tc = trainer.TrainConfig(widths=(8, 8, 4, 4), iterations=30, seed=0)
    m = trainer.train(tc, data)
    assert m.gap_loss == m.test_loss - m.train_loss
    assert m.gap_error == m.test_error - m.train_error


def test_pure_decay_step_shrinks_norm():
    rng = np.random.default_rng(0)
    for _ in range(10):
        vec = rng.standard_normal(30) * rng.uniform(0.1, 5)
        lr, wd = rng.uniform(0, 1), rng.uniform(0, 1)
        out = trainer.decay_step(vec, lr, wd)
        assert np.dot(out, out) <= np.dot(vec, vec)


def test_swag_collected_over_tail():
    data = gen_clusters(4, 30, 30, 3)
    tc = trainer.TrainConfig(widths=(6, 6, 4, 4), iterations=60, seed=2)
    m = trainer.train(tc, data)
    assert m.swag.mean.size == m.params.n_params
    assert np.all(m.swag.var > 0)
    assert max(m.swag.layer_slices) == m.params.n_layers


def test_run_record_fields():
    data = gen_clusters(4, 30, 30, 3)
    tc = trainer.TrainConfig(widths=(6, 6, 4, 4), iterations=30, seed=2)
    rec = trainer.train(tc, data).run_record()
    for key in ("config_hash", "train_loss", "test_loss", "gap_loss",
                "accepted", "final_mi"):
        assert key in rec
    assert rec["gap_loss"] == pytest.approx(rec["test_loss"] - rec["train_loss"])


def test_invalid_configs_rejected():
    with pytest.raises(InvalidArgument):
        trainer.TrainConfig(lr_theta=-1.0)
    with pytest.raises(InvalidArgument):
        trainer.TrainConfig(iterations=0)
    with pytest.raises(InvalidArgument):
        trainer.TrainConfig(rho=-1.0)
    with pytest.raises(InvalidArgument):
        trainer.TrainConfig(constraint_mode="projected")
