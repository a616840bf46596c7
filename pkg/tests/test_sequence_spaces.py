import math

import numpy as np
import pytest
from conftest import brute_convolve, operator_constant

from hillgaps import (
    ConvTrials,
    InputError,
    TwoSidedSeq,
    check_or_class,
    check_sandwich,
    compare_weights,
    conv_lemma_report,
    convolution_ratio,
    convolve,
    example_2_4_weight,
    log_power_weight,
    make_weight,
    power_weight,
    table_weight,
    weighted_norm,
)


def rand_seq(rng, n):
    return TwoSidedSeq.from_dict(
        {k - n: complex(v, w) for k, (v, w) in enumerate(zip(rng.standard_normal(2 * n + 1), rng.standard_normal(2 * n + 1)))}
    )


# ---------------------------------------------------------------- weights


def test_power_weight_values():
    w = power_weight(1.0)
    assert w(3) == 7.0
    assert w(-3) == 7.0
    assert w(0) == 1.0


def test_example_2_4_values():
    w = example_2_4_weight(0.0)
    assert w(2) == pytest.approx(math.log(3), rel=1e-15)
    assert w(3) == 1.0
    assert w(0) == 1.0


def test_table_weight_symmetric_extension():
    w = table_weight([5.0] * 10)
    assert w(-1) == 5.0
    assert w(0) == 1.0
    with pytest.raises(InputError):
        w(11)


def test_table_weight_rejects_nonpositive_with_index():
    with pytest.raises(InputError, match="k=3"):
        table_weight([1.0, 2.0, -1.0])


def test_table_weight_zero_index_ignored_with_warning():
    with pytest.warns(UserWarning):
        w = make_weight({"kind": "table", "values": {0: 99.0, 1: 2.0, 2: 3.0}})
    assert w(0) == 1.0
    assert w(1) == 2.0


def test_negative_s_only_for_power():
    assert power_weight(-1.5)(2) == pytest.approx(5.0 ** (-1.5))
    with pytest.raises(InputError):
        example_2_4_weight(-0.5)
    with pytest.raises(InputError):
        log_power_weight(-1.0, [1.0])


def test_unknown_kind_rejected():
    with pytest.raises(InputError):
        make_weight({"kind": "exp"})


def test_log_power_positive_despite_small_k():
    # loglog(1+k) is negative at k=1; the constructor clamps early indices
    w = log_power_weight(1.0, [2.0, -1.0])
    ks = np.arange(1, 200)
    assert np.all(np.asarray(w(ks)) > 0)
    assert w(0) == 1.0


def test_weight_extension_invariants_all_kinds():
    weights = [
        power_weight(1.5),
        log_power_weight(1.0, [2.0, -1.0]),
        example_2_4_weight(1.0),
        table_weight(list(np.linspace(1.0, 3.0, 10**4))),
    ]
    ks = np.arange(0, 10**4 + 1)
    for w in weights:
        vplus = np.asarray(w(ks))
        vminus = np.asarray(w(-ks))
        assert vplus[0] == 1.0
        assert np.array_equal(vplus, vminus)
        assert np.all(vplus > 0)


# ---------------------------------------------------------------- norms


def test_weighted_norm_examples():
    w1 = power_weight(1.0)
    assert weighted_norm(TwoSidedSeq.delta(3), w1) == 7.0
    assert weighted_norm(TwoSidedSeq.delta(0), example_2_4_weight(2.0)) == 1.0
    a = TwoSidedSeq.from_dict({1: 1.0, -1: 1.0})
    assert weighted_norm(a, w1) == pytest.approx(3.0 * math.sqrt(2.0), rel=1e-15)


def test_weighted_norm_zero_iff_zero():
    w = power_weight(2.0)
    assert weighted_norm(TwoSidedSeq.from_dict({}), w) == 0.0
    assert weighted_norm(TwoSidedSeq.from_dict({5: 1e-120}), w) > 0.0


def test_norm_axioms_on_random_sequences():
    rng = np.random.default_rng(7)
    w = power_weight(1.5)
    for _ in range(50):
        a = rand_seq(rng, 8)
        b = rand_seq(rng, 8)
        lam = complex(rng.standard_normal(), rng.standard_normal())
        na, nb = weighted_norm(a, w), weighted_norm(b, w)
        # homogeneity
        assert weighted_norm(a.scaled(lam), w) == pytest.approx(abs(lam) * na, rel=1e-12)
        # triangle
        assert weighted_norm(a.plus(b), w) <= na + nb + 1e-12 * (na + nb)
        # parallelogram (Hilbert norm)
        lhs = weighted_norm(a.plus(b), w) ** 2 + weighted_norm(a.plus(b.scaled(-1)), w) ** 2
        assert lhs == pytest.approx(2 * na**2 + 2 * nb**2, rel=1e-12)


def test_real_symmetric_flag_validation():
    TwoSidedSeq.from_dict({1: 1 + 2j, -1: 1 - 2j}, real_symmetric=True)
    with pytest.raises(InputError):
        TwoSidedSeq.from_dict({1: 1 + 2j, -1: 1 + 2j}, real_symmetric=True)


# ---------------------------------------------------------------- convolution


def test_convolve_identity_exact():
    rng = np.random.default_rng(3)
    a = rand_seq(rng, 6)
    assert convolve(TwoSidedSeq.delta(0), a).entries == a.entries


def test_convolve_shift():
    out = convolve(TwoSidedSeq.delta(1), TwoSidedSeq.delta(2))
    assert out.entries == ((3, 1 + 0j),)


def test_convolve_matches_double_sum_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = rand_seq(rng, 8)
        b = rand_seq(rng, 8)
        got = convolve(a, b)
        want = brute_convolve(a, b)
        assert set(dict(got.entries)) == set(want)
        for k, v in got.entries:
            assert v == pytest.approx(want[k], rel=1e-14, abs=1e-14)


def test_convolve_commutative_bit_exact():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rand_seq(rng, 7)
        b = rand_seq(rng, 4)
        assert convolve(a, b).entries == convolve(b, a).entries


def test_convolve_bilinear_and_support():
    rng = np.random.default_rng(9)
    a, b, c = rand_seq(rng, 5), rand_seq(rng, 6), rand_seq(rng, 4)
    lam = 0.37 - 1.2j
    lhs = convolve(a.plus(b.scaled(lam)), c)
    rhs = convolve(a, c).plus(convolve(b, c).scaled(lam))
    for k in range(-(lhs.support), lhs.support + 1):
        assert lhs.value(k) == pytest.approx(rhs.value(k), rel=1e-12, abs=1e-12)
    assert lhs.support <= a.plus(b).support + c.support


# ---------------------------------------------------------------- boundedness report


def test_conv_ratio_delta_pair():
    d = TwoSidedSeq.delta(0)
    assert convolution_ratio(d, d, 1.0, 1.0, 0.0) == 1.0


def test_conv_lemma_regime_classification():
    assert conv_lemma_report(1.0, 1.0, 0.0, ConvTrials(sizes=(4, 8))).regime == "bounded"
    assert conv_lemma_report(0.0, 0.0, 0.0, ConvTrials()).regime == "fails to hold"


def test_conv_lemma_rejects_bad_t():
    with pytest.raises(InputError):
        conv_lemma_report(1.0, 0.5, 0.75, ConvTrials())


def test_failure_regime_indicator_growth():
    rep = conv_lemma_report(0.0, 0.0, 0.0, ConvTrials(sizes=(8, 16, 32)))
    maxima = [s.max_ratio for s in rep.samples]
    assert maxima[0] < maxima[1] < maxima[2]
    assert rep.growth_factor >= 1.5
    # closed form for the indicator family: ||a*a||^2 = (2N+1)^2 + 2 sum_{j<=2N} j^2
    for s_ in rep.samples:
        n = s_.size
        norm2 = (2 * n + 1) ** 2 + 2 * sum(j * j for j in range(1, 2 * n + 1))
        assert s_.max_ratio == pytest.approx(math.sqrt(norm2) / (2 * n + 1), rel=1e-13)


def test_bounded_regime_random_pairs_below_constant():
    const = operator_constant(1.0, 1.0, 1.0, 16)
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(200):
        a, b = rand_seq(rng, 16), rand_seq(rng, 16)
        worst = max(worst, convolution_ratio(a, b, 1.0, 1.0, 1.0))
    assert worst <= const * (1 + 1e-9)


# ---------------------------------------------------------------- weight-class checks


def test_or_class_power_weight_passes():
    rep = check_or_class(power_weight(2.0), 2.0, 16.0, 1000.0)
    assert rep.passed
    assert rep.worst_ratio < 4.0 + 1e-9  # ratio bounded by lambda^2 = 4


def test_or_class_exponential_table_fails():
    w = table_weight([math.exp(k) for k in range(1, 101)])
    rep = check_or_class(w, 2.0, 1e6, 100.0)
    assert not rep.passed
    assert rep.worst_ratio > 1e6


def test_or_class_example_2_4_frozen_values():
    # the parity jump t=999 -> 1998 costs w(1998)/w(999) = 2 log(1999) ~ 15.2,
    # so the class constant must be at least that large on this range
    rep8 = check_or_class(example_2_4_weight(1.0), 2.0, 8.0, 1000.0)
    assert not rep8.passed
    assert rep8.worst_ratio == pytest.approx(2.0 * math.log(1999.0), rel=1e-12)
    assert (rep8.worst_t, rep8.worst_lambda) == (999.0, 2.0)
    rep16 = check_or_class(example_2_4_weight(1.0), 2.0, 16.0, 1000.0)
    assert rep16.passed


def test_or_class_rejects_bad_params():
    with pytest.raises(InputError):
        check_or_class(power_weight(1.0), 1.0, 2.0, 100.0)


def test_sandwich_power_same_s_passes():
    for s in (0.5, 1.0, 2.0):
        rep = check_sandwich(power_weight(s), s, 1000)
        assert rep.passed
        assert 2.0**s <= rep.c_low <= 3.0**s + 1e-9


def test_sandwich_example_2_4_passes():
    for s in (0.0, 1.0):
        rep = check_sandwich(example_2_4_weight(s), s, 2000)
        assert rep.passed
        assert not rep.upper_diverging


def test_sandwich_power_s_plus_2_fails_upper():
    rep = check_sandwich(power_weight(3.0), 1.0, 1000)
    assert not rep.passed
    assert rep.upper_diverging
    assert rep.upper_slope == pytest.approx(1.0, abs=0.05)


def test_compare_weights_examples():
    rep = compare_weights(power_weight(2.0), power_weight(1.0), 100)
    assert rep.sup_ratio == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert rep.at_k == 1
    same = compare_weights(power_weight(1.0), power_weight(1.0), 100)
    assert same.sup_ratio == 1.0


def test_compare_weights_matches_brute_force():
    w1, w2 = example_2_4_weight(1.0), power_weight(1.0)
    rep = compare_weights(w1, w2, 1000)
    ks = np.arange(1, 1001)
    assert rep.sup_ratio == float(np.max(np.asarray(w2(ks)) / np.asarray(w1(ks))))


def test_compare_weights_norm_inequality():
    rng = np.random.default_rng(23)
    w1, w2 = power_weight(2.0), power_weight(1.0)
    rep = compare_weights(w1, w2, 16)
    for _ in range(50):
        a = rand_seq(rng, 16)
        # embedding constant covers sequences touching the origin
        assert weighted_norm(a, w2) <= rep.embedding_constant * weighted_norm(a, w1) * (1 + 1e-12)
        # the bare sup ratio covers sequences vanishing there
        trimmed = TwoSidedSeq.from_dict({k: v for k, v in a.entries if k != 0})
        assert weighted_norm(trimmed, w2) <= rep.sup_ratio * weighted_norm(trimmed, w1) * (1 + 1e-12)
