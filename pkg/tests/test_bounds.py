import math

import numpy as np
import pytest

from ibgb import bounds
from ibgb.dataset import CountRule, DiscreteInstance, FixedRule, entropy_bits
from ibgb.errors import InvalidArgument

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# typical sets


def test_typical_set_uniform_all_members():
    pz = np.full(4, 0.25)
    members, eps, h = bounds.typical_set(pz, gamma=1.0, n=16, sensitivity=1.0,
                                         m=2)
    assert len(members) == 4
    assert h == pytest.approx(2.0)
    assert 4 <= 2 ** (h + eps) + 1e-9


def test_typical_set_point_mass():
    pz = np.array([0.0, 1.0, 0.0])
    members, eps, h = bounds.typical_set(pz, 1.0, 100, 0.0, 1)
    assert members.tolist() == [1]
    assert h == 0.0


def test_typical_set_power_law_membership():
    # derived: membership matches a direct per-symbol check
    pz = np.array([2.0 ** -(i + 1) for i in range(7)] + [2.0 ** -7])
    gamma, n, c, m = 1.0, 100, 1.0, 2
    members, eps, h = bounds.typical_set(pz, gamma, n, c, m)
    expected_eps = c * math.sqrt(m * math.log(math.sqrt(n) / gamma) / 2)
    assert eps == pytest.approx(expected_eps)
    expected = [i for i in range(8)
                if -math.log2(pz[i]) - entropy_bits(pz) <= expected_eps + 1e-12]
    assert members.tolist() == expected
    assert len(members) <= 2 ** (h + eps) + 1e-9


def test_typical_set_zero_class_rejected():
    with pytest.raises(InvalidArgument):
        bounds.typical_set(np.zeros(3), 1.0, 10, 1.0, 1)


def test_lemma8_size_bound_randomized():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k = rng.integers(2, 20)
        pz = rng.dirichlet(np.ones(k) * rng.uniform(0.2, 3.0))
        sens = rng.uniform(0.0, 3.0)
        members, eps, h = bounds.typical_set(pz, rng.uniform(0.5, 2.0),
                                             rng.integers(4, 1000), sens,
                                             rng.integers(1, 4))
        assert len(members) <= 2 ** (h + eps) + 1e-9


# ---------------------------------------------------------------------------
# C_lambda and the hypothesis typical set


def test_c_lambda_uniform_is_one():
    for k in (2, 5, 31):
        assert bounds.compute_C_lambda(np.full(k, 1.0 / k), 0.5) == \
            pytest.approx(1.0, abs=1e-12)


def test_c_lambda_point_mass_is_one():
    assert bounds.compute_C_lambda(np.array([1.0, 0.0]), 0.3) == \
        pytest.approx(1.0, abs=1e-12)


def test_c_lambda_hand_oracle():
    # derived: two-line evaluation of exp(-lam H) * sum p^(1-lam)
    probs = np.array([0.5, 0.25, 0.25])
    h_nats = -(probs * np.log(probs)).sum()
    expected = math.exp(-0.5 * h_nats) * (math.sqrt(0.5) + 2 * math.sqrt(0.25))
    assert bounds.compute_C_lambda(probs, 0.5) == pytest.approx(expected,
                                                                rel=1e-12)


def test_c_lambda_rejects_lambda_outside_unit_interval():
    with pytest.raises(InvalidArgument):
        bounds.compute_C_lambda(np.array([0.5, 0.5]), 1.0)
    with pytest.raises(InvalidArgument):
        bounds.compute_C_lambda(np.array([0.5, 0.5]), 0.0)


def test_hypothesis_typical_set_probability_and_size():
    # the set must carry probability >= 1 - delta, by exact summation
    rng = np.random.default_rng(1)
    for _ in range(100):
        k = rng.integers(2, 40)
        p = rng.dirichlet(np.ones(k) * rng.uniform(0.1, 2.0))
        lam = rng.uniform(0.05, 0.95)
        delta = rng.uniform(0.01, 0.3)
        members, eps, c_lam = bounds.hypothesis_typical_set(p, lam, delta)
        assert p[members].sum() >= 1.0 - delta - 1e-12
        h_nats = -(p[p > 0] * np.log(p[p > 0])).sum()
        assert len(members) <= math.exp(h_nats + eps) + 1e-9


# ---------------------------------------------------------------------------
# factors against a spreadsheet-style oracle


def oracle_instance(n=100):
    x_probs = np.array([[0.5, 0.25, 0.125, 0.125],
                        [0.125, 0.125, 0.25, 0.5]])
    y_prior = np.array([0.5, 0.5])
    enc = np.array([[0, 0, 1, 1], [0, 1, 1, 1]])
    dec = np.array([[0, 1], [0, 1]])
    table = np.zeros((n + 1, 2))
    table[: n // 4, 0] = 1.0
    table[n // 4:, 1] = 1.0
    rule = CountRule([0], table)
    return DiscreteInstance(x_probs=x_probs, y_prior=y_prior, enc=enc,
                            dec=dec, loss_table=1.0 - np.eye(2), rule=rule,
                            n_latent=2, name="oracle")


def test_bound_factors_match_hand_computation():
    n, delta, gamma, lam = 100, 0.1, 1.0, 0.5
    inst = oracle_instance(n)
    f = bounds.bound_factors(inst, h=0, max_train_loss=1.0, gamma=gamma,
                             lam=lam, delta=delta, n=n, layer=1, d_size=2)

    # hand recomputation, hypothesis 0 (encoder [0,0,1,1])
    pz0 = np.array([0.75, 0.25])        # Z | Y=0
    pz1 = np.array([0.25, 0.75])        # Z | Y=1
    c0 = abs(-math.log2(0.75) + math.log2(0.25))
    radical = math.sqrt(1 * math.log(math.sqrt(n) / gamma) / 2)
    g2_hand = 0.5 * c0 * radical + 0.5 * c0 * radical + 0.0
    assert f.g2 == pytest.approx(g2_hand, rel=1e-12)

    eps = c0 * radical
    h_bits = entropy_bits(pz0)
    members0 = [z for z in range(2)
                if -math.log2(pz0[z]) - h_bits <= eps + 1e-12]
    # losses of decoder [0,1]: class 0 errs on z=1, class 1 errs on z=0
    g3_y0 = sum((1.0 if z == 1 else 0.0) * math.sqrt(2 * 2 * pz0[z])
                for z in members0)
    members1 = [z for z in range(2)
                if -math.log2(pz1[z]) - entropy_bits(pz1) <= eps + 1e-12]
    g3_y1 = sum((1.0 if z == 0 else 0.0) * math.sqrt(2 * 2 * pz1[z])
                for z in members1)
    assert f.g3 == pytest.approx(max(g3_y0, g3_y1), rel=1e-12)

    # rule statistic: count of cell (y=0, x=0), p = 0.25
    from math import comb
    pmf = np.array([comb(n, t) * 0.25 ** t * 0.75 ** (n - t)
                    for t in range(n + 1)])
    p_h0 = pmf[: n // 4].sum()
    p_enc = np.array([p_h0, 1 - p_h0])   # encoders distinct per hypothesis
    h_enc_nats = -(p_enc * np.log(p_enc)).sum()
    c_lam_hand = math.exp(-lam * h_enc_nats) * (p_enc ** (1 - lam)).sum()
    assert f.c_lambda == pytest.approx(c_lam_hand, rel=1e-12)

    g4_hand = (1 / lam) * math.log(c_lam_hand * 2 / delta) + 0.0
    assert f.g4 == pytest.approx(g4_hand, rel=1e-12)

    i_enc_bits = h_enc_nats / LN2        # deterministic rule: H(phi|S) = 0
    zeta_hand = (i_enc_bits + g4_hand) * LN2 + math.log(2 * 2)
    assert f.zeta == pytest.approx(zeta_hand, rel=1e-12)
    g2hat_hand = (g2_hand + g4_hand) * LN2 + math.log(4 * 2 * 2 / delta)
    assert f.g2_hat == pytest.approx(g2hat_hand, rel=1e-12)
    g2check_hand = g4_hand * LN2 + math.log(2 / delta)
    # layer-2 factors use the hypothesis distribution, equal to the encoder
    # distribution here because encoders are distinct per hypothesis
    f2 = bounds.bound_factors(inst, h=0, max_train_loss=1.0, gamma=gamma,
                              lam=lam, delta=delta, n=n, layer=2, d_size=2)
    assert f2.g2_check == pytest.approx(g2check_hand, rel=1e-12)

    g1_hand = (1.0 * math.sqrt(2 * gamma * 2) / n ** 0.25
               * math.sqrt(zeta_hand + math.log(2 * 2 / delta)) + gamma * 1.0)
    assert f.g1 == pytest.approx(g1_hand, rel=1e-12)

    # full Q assembly for layer 1 and the min over layers
    i_xzy_bits = 0.5 * entropy_bits(pz0) + 0.5 * entropy_bits(pz1)
    q1_hand = (f.g3 * math.sqrt(((i_xzy_bits + i_enc_bits) * LN2 + g2hat_hand)
                                / n) + g1_hand / math.sqrt(n))
    got = bounds.theorem_bound(inst, h=0, max_train_loss=1.0, d_set=(1,),
                               delta=delta, n=n, gamma=gamma, lam=lam)
    assert got == pytest.approx(q1_hand, rel=1e-12)


def test_theorem_bound_singleton_hypothesis_output_layer():
    x_probs = np.array([[0.5, 0.5], [0.25, 0.75]])
    inst = DiscreteInstance(
        x_probs=x_probs, y_prior=np.array([0.5, 0.5]),
        enc=np.array([[0, 1]]), dec=np.array([[0, 1]]),
        loss_table=1.0 - np.eye(2), rule=FixedRule([1.0]), n_latent=2)
    n, delta, lam = 64, 0.1, 0.5
    got = bounds.theorem_bound(inst, h=0, max_train_loss=1.0, d_set=(2,),
                               delta=delta, n=n, lam=lam)
    # I(phi_{D+1}; S) = 0 and C_lambda = 1 for the point mass
    g4 = (1 / lam) * math.log(1.0 * 1 / delta)
    expected = 1.0 * math.sqrt((0.0 + g4 * LN2 + math.log(2 / delta)) / (2 * n))
    assert got == pytest.approx(expected, rel=1e-12)


def test_min_over_larger_layer_set_never_increases():
    inst = oracle_instance()
    kwargs = dict(h=0, max_train_loss=1.0, delta=0.1, n=100)
    q1 = bounds.theorem_bound(inst, d_set=(1,), **kwargs)
    q2 = bounds.theorem_bound(inst, d_set=(2,), **kwargs)
    q12 = bounds.theorem_bound(inst, d_set=(1, 2), **kwargs)
    assert q12 <= min(q1, q2) + 1e-12


def test_thm1_mode_requires_fixed_encoder():
    inst = oracle_instance()
    with pytest.raises(InvalidArgument):
        bounds.theorem_bound(inst, h=0, max_train_loss=1.0, d_set=(1,),
                             delta=0.1, n=100, mode="thm1_fixed_encoder")


# ---------------------------------------------------------------------------
# simulation


def test_verify_bound_zero_loss_instance():
    x_probs = np.array([[0.5, 0.5], [0.5, 0.5]])
    inst = DiscreteInstance(
        x_probs=x_probs, y_prior=np.array([0.5, 0.5]),
        enc=np.array([[0, 1], [0, 0]]), dec=np.array([[0, 0], [1, 1]]),
        loss_table=np.zeros((2, 2)), rule=FixedRule([0.5, 0.5]), n_latent=2)
    v = bounds.verify_bound(inst, 50, 0.05, 500, np.random.default_rng(0))
    assert v.empirical_violation_rate == 0.0


def test_verify_bound_reference_instances_quick():
    rng = np.random.default_rng(1)
    for name, (inst, n, mode) in bounds.reference_instances().items():
        v = bounds.verify_bound(inst, n, 0.05, 1000, rng, mode=mode)
        se = math.sqrt(0.05 * 0.95 / 1000)
        assert v.empirical_violation_rate <= 0.05 + 3 * se, name


def test_verify_bound_shrunk_bound_violates_more():
    inst, n, mode = bounds.reference_instances()["noisy-rule"]
    rng = np.random.default_rng(2)
    full = bounds.verify_bound(inst, n, 0.05, 4000, rng, mode=mode)
    rng = np.random.default_rng(2)
    half = bounds.verify_bound(inst, n, 0.05, 4000, rng, mode=mode,
                               bound_scale=0.5)
    assert half.empirical_violation_rate > full.empirical_violation_rate


def test_verify_bound_needs_enough_trials():
    inst, n, mode = bounds.reference_instances()["noisy-rule"]
    with pytest.raises(InvalidArgument):
        bounds.verify_bound(inst, n, 0.05, 10, np.random.default_rng(0))


def test_verdict_json_fields():
    inst, n, mode = bounds.reference_instances()["fixed-encoder"]
    v = bounds.verify_bound(inst, n, 0.05, 200, np.random.default_rng(3),
                            mode=mode)
    blob = v.to_json()
    for key in ("instance_id", "mode", "delta", "bound", "violation_rate",
                "trials"):
        assert key in blob


# ---------------------------------------------------------------------------
# multinomial concentration


def test_multinomial_zero_coordinate_never_violates():
    rates = bounds.multinomial_concentration_sim(
        np.array([0.7, 0.3, 0.0]), 50, 0.1, 2000, np.random.default_rng(0))
    assert rates[2] == 0.0


def test_multinomial_rates_below_delta():
    rates = bounds.multinomial_concentration_sim(
        np.array([0.5, 0.5]), 100, 0.05, 20_000, np.random.default_rng(1))
    assert np.all(rates <= 0.05)


def test_multinomial_deviation_scale_halves_with_4n():
    rng = np.random.default_rng(2)
    p = np.array([0.5, 0.5])

    def mean_dev(n):
        counts = rng.multinomial(n, p, size=20_000)
        dev = p[None, :] - counts / n
        return np.abs(dev).mean()

    ratio = mean_dev(400) / mean_dev(100)
    assert abs(ratio - 0.5) < 0.1


# ---------------------------------------------------------------------------
# propositions


def test_prop1_single_term():
    v = np.array([1.0, 0.0, 0.0])
    got = bounds.prop1_g3_bound(v, alpha=1.0, beta=1.0, scale=1.0, n_classes=1)
    assert got >= math.sqrt(2) * 1.0 - 1e-12


def test_prop1_exponential_sequence():
    k = np.arange(1, 40)
    v = np.exp(-k.astype(float))
    got = bounds.prop1_g3_bound(v, alpha=1.0, beta=1.0, scale=1.0, n_classes=2)
    direct = math.sqrt(4) * np.sqrt(v).sum()
    assert direct <= got + 1e-12


def test_prop1_homogeneity():
    k = np.arange(1, 30)
    v = np.exp(-((k / 2.0) ** 1.5))
    a = bounds.prop1_g3_bound(v, 1.5, 2.0, 1.0, 3)
    b = bounds.prop1_g3_bound(4.0 * v, 1.5, 2.0, 4.0, 3)
    assert b == pytest.approx(2.0 * a, rel=1e-12)


def test_prop1_rejects_violated_decay():
    v = np.array([1.0, 0.9, 0.8])
    with pytest.raises(InvalidArgument, match="index 2"):
        bounds.prop1_g3_bound(v, alpha=1.0, beta=0.5, scale=1.0, n_classes=1)


def test_prop1_randomized_domination():
    rng = np.random.default_rng(3)
    for _ in range(100):
        alpha = rng.uniform(1.0, 3.0)
        beta = rng.uniform(0.5, 4.0)
        scale = rng.uniform(1.0, 5.0)
        k = np.arange(1, rng.integers(10, 80))
        envelope = scale * np.exp(-((k / beta) ** alpha))
        v = envelope * rng.uniform(0.2, 1.0, size=len(k))
        v = np.sort(v)[::-1]
        v = np.minimum(v, envelope)     # resorting may break the envelope
        ny = int(rng.integers(1, 6))
        got = bounds.prop1_g3_bound(v, alpha, beta, scale, ny)
        assert math.sqrt(2 * ny) * np.sqrt(v).sum() <= got + 1e-9


def test_prop2_fast_case_bounds_hold():
    res = bounds.prop2_clambda_bound("fast_decay", lam=0.25, n_terms=10_000,
                                     alpha=2.0, coef_hi=2.0)
    assert res.direct_c_lambda <= res.c_lambda_bound + 1e-12
    assert res.direct_entropy <= res.entropy_bound + 1e-12


def test_prop2_fast_case_n_independence():
    # decay alpha=3 makes the truncation error well below the 1e-3 budget
    a = bounds.prop2_clambda_bound("fast_decay", 0.25, 10_000, 3.0, 2.0)
    b = bounds.prop2_clambda_bound("fast_decay", 0.25, 20_000, 3.0, 2.0)
    assert abs(a.direct_c_lambda - b.direct_c_lambda) < 1e-3


def test_prop2_slow_case_uniform():
    res = bounds.prop2_clambda_bound("slow_decay", lam=0.5, n_terms=256,
                                     alpha=0.0, coef_hi=1.0, coef_lo=1.0)
    assert res.direct_c_lambda == pytest.approx(1.0, abs=1e-9)
    assert abs(math.log(res.direct_c_lambda) - res.center) <= res.slack


def test_prop2_randomized_draws():
    rng = np.random.default_rng(4)
    for _ in range(50):
        alpha = rng.uniform(1.5, 4.0)
        lam = rng.uniform(0.05, 1 - 1 / alpha - 0.02)
        res = bounds.prop2_clambda_bound("fast_decay", lam, 5000, alpha,
                                         coef_hi=rng.uniform(1.0, 4.0))
        assert res.direct_c_lambda <= res.c_lambda_bound + 1e-12
        assert res.direct_entropy <= res.entropy_bound + 1e-12
    for _ in range(50):
        alpha = rng.uniform(0.0, 0.7)
        lam = rng.uniform(0.1, 0.9)
        res = bounds.prop2_clambda_bound("slow_decay", lam, 4000, alpha,
                                         coef_hi=2.0, coef_lo=1.0, rng=rng)
        assert abs(math.log(res.direct_c_lambda) - res.center) <= res.slack


def test_prop2_rejects_bad_regimes():
    with pytest.raises(InvalidArgument):
        bounds.prop2_clambda_bound("fast_decay", 0.9, 100, alpha=2.0)
    with pytest.raises(InvalidArgument):
        bounds.prop2_clambda_bound("slow_decay", 0.5, 100, alpha=1.5)


# ---------------------------------------------------------------------------
# binning adjustment


def test_corollary1_identity_and_arithmetic():
    assert bounds.corollary1_adjust(0.7, 0.0) == 0.7
    c_l = bounds.binning_radius_cl(0.1, 100)
    assert c_l == pytest.approx(0.01)
    assert bounds.corollary1_adjust(0.5, c_l) == pytest.approx(0.52)
    with pytest.raises(InvalidArgument):
        bounds.corollary1_adjust(0.5, -0.1)


def test_corollary1_nested_binning_tradeoff():
    # finer bins: adjustment shrinks while the binned MI never decreases
    from ibgb.mi_feature import binned_mi

    rng = np.random.default_rng(5)
    feats = rng.standard_normal((40, 2))
    mis, adjustments = [], []
    for n_bins in (2, 4, 8, 16):
        mis.append(binned_mi(feats, n_bins=n_bins))
        eps = 1.0 / n_bins           # bin radius scale
        adjustments.append(2 * bounds.binning_radius_cl(eps, 100))
    assert all(a <= b + 1e-12 for a, b in zip(mis, mis[1:]))
    assert all(a >= b for a, b in zip(adjustments, adjustments[1:]))
