import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from instances import random_channel, random_pmf, skewed_pmf
from mwrc.errors import DomainError, InvalidClassError, ValidationError
from mwrc.rates import (ChannelSpec, RatePoint, case1_rates, case2_rates, cover_tuncel_bound, cutset_bound,
                        kappa_with_margin, phi, swfdf_feasible, swfdf_inf_kappa, swfdf_inf_kappa_exact,
                        theorem_min_rate)
from mwrc.sources import InfoProfile, JointPmf3, NoisePmf, info_profile

NOISELESS2 = ChannelSpec(2, (NoisePmf.zero(),) * 4)


def independent_bits():
    return JointPmf3.product([0.5, 0.5], [0.5, 0.5], [0.5, 0.5])


def _strictly_feasible(kappa, ip, ch, r):
    for i in (1, 2, 3):
        j, k = (u for u in (1, 2, 3) if u != i)
        if not (kappa * r[i] > ip.h_given_others(i) and kappa * (r[j] + r[k]) > ip.h_pair(j, k)
                and r[j] + r[k] < ch.denom(i)):
            return False
    return min(r) > 0


def test_counterexample_bounds(counterexample):
    ip = info_profile(counterexample.source)
    assert phi(ip, counterexample.channel) == pytest.approx(1.0)
    assert cutset_bound(ip, counterexample.channel) == phi(ip, counterexample.channel)
    res = swfdf_feasible(1.05, ip, counterexample.channel)
    assert not res.feasible and res.witness is None and res.conflicts
    assert swfdf_inf_kappa(ip, counterexample.channel) > 1.05
    assert swfdf_inf_kappa_exact(ip, counterexample.channel) == pytest.approx(1.0625)
    report = theorem_min_rate(counterexample.source, counterexample.channel)
    assert report.case == 3 and report.kappa_star == pytest.approx(1.0)
    assert report.cover_tuncel == pytest.approx(13 / 8)


def test_xor_bounds(xor_example):
    ip = info_profile(xor_example.source)
    assert phi(ip, xor_example.channel) == pytest.approx(0.9705, abs=0.001)
    # R1 >= H(W1|W2,W3)/k and R1 + R2, R1 + R3 < D leave R2 + R3 < 2 D - 2 H(W1|W2,W3)/k,
    # which must exceed H(W2,W3|W1)/k
    d = xor_example.channel.denom(1)
    closed = (ip.h_pair(2, 3) + 2 * ip.h_given_others(1)) / (2 * d)
    inf_k = swfdf_inf_kappa(ip, xor_example.channel)
    assert inf_k == pytest.approx(closed, abs=2e-6)
    assert inf_k > phi(ip, xor_example.channel) + 0.04
    res = swfdf_feasible(closed + 1e-3, ip, xor_example.channel)
    assert _strictly_feasible(closed + 1e-3, ip, xor_example.channel, res.witness)
    assert not swfdf_feasible(closed - 1e-3, ip, xor_example.channel).feasible
    report = theorem_min_rate(xor_example.source, xor_example.channel)
    assert report.kappa_star is None and report.case is None
    d = report.to_dict()
    assert d["interval"][0] == pytest.approx(0.9705, abs=0.001)
    assert d["interval"][1] == pytest.approx(report.inf_kappa_swfdf)


def test_zero_entropy_sources():
    p = JointPmf3(np.ones((1, 1, 1)))
    ip = info_profile(p)
    ch = ChannelSpec.simple(2, [0.9, 0.1], [0.8, 0.2])
    assert phi(ip, ch) == 0
    assert cover_tuncel_bound(ip, ch) == 0


def test_independent_bits_noiseless_feasible():
    ip = info_profile(independent_bits())
    res = swfdf_feasible(10, ip, NOISELESS2)
    assert res.feasible
    r = RatePoint(0.3, 0.3, 0.3)
    assert _strictly_feasible(10, ip, NOISELESS2, r)
    assert oracles.grid_feasible(10, [1, 1, 1], {(0, 1): 2, (0, 2): 2, (1, 2): 2}, [1, 1, 1], 1.0, steps=100)
    assert _strictly_feasible(10, ip, NOISELESS2, res.witness)


def test_invalid_kappa_and_rates():
    ip = info_profile(independent_bits())
    with pytest.raises(DomainError):
        swfdf_feasible(0, ip, NOISELESS2)
    with pytest.raises(ValidationError):
        RatePoint(0.1, 0.0, 0.2)
    with pytest.raises(DomainError):
        case1_rates(ip, 1.0, delta=0)


def test_channel_validation():
    with pytest.raises(ValidationError):
        ChannelSpec.simple(2, [0.5, 0.5], [1.0])
    with pytest.raises(ValidationError):
        ChannelSpec(1, (NoisePmf.zero(),) * 4)
    ch = ChannelSpec.simple(4, [1.0], [0.5, 0.5])
    assert ch.field is None and ch.group().add(3, 2) == 1
    assert ChannelSpec.simple(5, [1.0], [1.0]).field is not None


def test_case1_examples():
    ip = info_profile(JointPmf3.product([0.5, 0.5], [0.25] * 4, [1.0]))
    r = case1_rates(ip, 1.0, 0.4)
    assert tuple(r) == pytest.approx((1.1, 2.1, 0.1))


def test_case1_symmetric_sources_equal_rates():
    t = np.zeros((2, 2, 2))
    for idx in np.ndindex(2, 2, 2):
        t[idx] = [0.3, 0.1, 0.15, 0.05][sum(idx)]
    ip = info_profile(JointPmf3(t / t.sum()))
    r = case1_rates(ip, 1.7, 0.2)
    assert r.R1 == pytest.approx(r.R2) == pytest.approx(r.R3)
    assert 1.7 * (r.R1 + r.R2) == pytest.approx(ip.h_pair(1, 2) + 0.1)


def test_case1_rejects_unbalanced(counterexample):
    with pytest.raises(InvalidClassError):
        case1_rates(info_profile(counterexample.source), 1.0)


def test_case2_counterexample_rate(counterexample):
    ip = info_profile(counterexample.source)
    r = case2_rates(ip, 2.0, 0.4)
    assert r.R1 == pytest.approx((6 + 0.1) / 2)
    a, eta = 1, 1.0
    # the slack over the floor of user B is exactly I(A;B|C)
    assert 2.0 * r.R2 - (ip.h_given_others(2) + eta / 2 + 0.1) == pytest.approx(ip.mi(1, 2))


def test_case2_rejects_balanced_boundary():
    ip = InfoProfile.from_values((1, 1, 1), {(1, 2): 0.25, (1, 3): 0.25, (2, 3): 0.5})
    with pytest.raises(InvalidClassError):
        case2_rates(ip, 1.0)


def test_cover_tuncel_exceeds_phi_for_independent_sources():
    p = JointPmf3.product([0.3, 0.7], [0.5, 0.5], [0.2, 0.3, 0.5])
    ch = ChannelSpec(3, (NoisePmf((0.8, 0.1, 0.1)), NoisePmf((0.9, 0.1)), NoisePmf((1.0,)), NoisePmf((0.95, 0.05))))
    ip = info_profile(p)
    assert cover_tuncel_bound(ip, ch) > phi(ip, ch)


def test_theorem_dispatch_for_abcmi():
    p = JointPmf3.product([0.5, 0.25, 0.25], [0.9, 0.1], [0.5, 0.5])
    ch = ChannelSpec.simple(5, [0.9, 0.1], [0.8, 0.2])
    report = theorem_min_rate(p, ch)
    assert report.case == 1
    ip = report.profile
    assert report.kappa_star == pytest.approx(phi(ip, ch))
    assert report.witness_kappa == pytest.approx(kappa_with_margin(ip, ch, report.delta))
    assert _strictly_feasible(report.witness_kappa, ip, ch, report.witness)


def test_theorem_dispatch_for_sce_needs_symmetric_channel():
    rng = np.random.default_rng(5)
    p = skewed_pmf(rng, mix=0.0)
    sym = ChannelSpec.simple(4, [0.9, 0.1], [0.85, 0.15])
    asym = ChannelSpec(4, (NoisePmf((0.9, 0.1)), NoisePmf((0.85, 0.15)), NoisePmf((1.0,)), NoisePmf((0.7, 0.3))))
    report = theorem_min_rate(p, sym)
    assert report.source_class.sce and report.case == 2
    assert _strictly_feasible(report.witness_kappa, report.profile, sym, report.witness)
    assert theorem_min_rate(p, asym).case != 2


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bisection_agrees_with_closed_form(seed):
    rng = np.random.default_rng(seed)
    p = random_pmf(rng, tuple(int(x) for x in rng.integers(2, 5, size=3)), sparsity=0.2)
    ch = random_channel(rng)
    ip = info_profile(p)
    exact = swfdf_inf_kappa_exact(ip, ch)
    assert swfdf_inf_kappa(ip, ch) == pytest.approx(exact, abs=2e-6)
    assert exact >= phi(ip, ch) - 1e-9


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.001, 3.0))
def test_feasibility_monotone_and_witness_valid(seed, factor):
    rng = np.random.default_rng(seed)
    p = random_pmf(rng, tuple(int(x) for x in rng.integers(2, 5, size=3)))
    ch = random_channel(rng)
    ip = info_profile(p)
    inf_k = swfdf_inf_kappa_exact(ip, ch)
    above = swfdf_feasible(inf_k * factor, ip, ch)
    assert above.feasible
    assert _strictly_feasible(inf_k * factor, ip, ch, above.witness)
    assert not swfdf_feasible(inf_k / factor, ip, ch).feasible
    assert swfdf_feasible(inf_k * factor * 1.5, ip, ch).feasible


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_matches_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    p = random_pmf(rng, tuple(int(x) for x in rng.integers(2, 4, size=3)))
    ch = random_channel(rng, F=int(rng.choice([2, 3, 5])))
    ip = info_profile(p)
    kappa = swfdf_inf_kappa_exact(ip, ch) * float(rng.choice([0.6, 1.6]))
    hc = [ip.h_given_others(i) for i in (1, 2, 3)]
    hp = {(i - 1, j - 1): ip.h_pair(i, j) for i, j in [(1, 2), (1, 3), (2, 3)]}
    denom = [ch.denom(i) for i in (1, 2, 3)]
    assert swfdf_feasible(kappa, ip, ch).feasible == oracles.grid_feasible(kappa, hc, hp, denom, ch.log_f, 80)


def test_phi_formula_by_hand():
    ip = InfoProfile.from_values((1, 0.5, 0.25), {(1, 2): 0.25, (1, 3): 0, (2, 3): 0.5})
    ch = ChannelSpec(4, (NoisePmf((0.5, 0.5)), NoisePmf((1.0,)), NoisePmf((0.5, 0.25, 0.25)), NoisePmf((1.0,))))
    # pairs: H(W2,W3|W1) = 1.25 over 2-1, H(W1,W3|W2) = 1.25 over 2-1.5, H(W1,W2|W3) = 1.75 over 2-1
    assert phi(ip, ch) == pytest.approx(max(1.25 / 1, 1.25 / 0.5, 1.75 / 1))
    assert math.isclose(ch.denom(2), 0.5)
