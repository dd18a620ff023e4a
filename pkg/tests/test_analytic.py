import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehcss.analytic import (DF_FORMS, OutagePair, Protocol, ProtocolPoint, Relaying, evaluate,
                            outage_ps_af, outage_ps_df, outage_ts_af, outage_ts_df,
                            rate_threshold, thresholds_for)
from ehcss.channel import SystemParams
from ehcss.errors import DomainError
from ehcss.montecarlo import estimate_outage
from ehcss.specialfn import reg_lower_gamma

ALL_COMBOS = [(p, r) for p in Protocol for r in Relaying]
TRIALS = 10 ** 6


def pt(label, alpha=0.7, beta=0.3):
    protocol, relaying = label.split("-")
    return ProtocolPoint(protocol, relaying, alpha, beta)


# -- domain types --------------------------------------------------------------

@pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.1, 0.5)])
def test_point_rejects_endpoints(alpha, beta):
    with pytest.raises(DomainError):
        ProtocolPoint("TS", "DF", alpha, beta)


def test_point_coerces_strings():
    p = ProtocolPoint("ps", " af ", 0.5, 0.5)
    assert p.protocol is Protocol.PS and p.relaying is Relaying.AF
    assert p.label == "PS-AF"
    assert ProtocolPoint(Protocol.TS, Relaying.DF, 0.5, 0.5).label == "TS-DF"
    with pytest.raises(DomainError):
        ProtocolPoint("XX", "DF", 0.5, 0.5)


def test_outage_pair_validation():
    assert tuple(OutagePair(0.25, 1)) == (0.25, 1.0)
    with pytest.raises(DomainError):
        OutagePair(1.5, 0.0)


# -- thresholds -------------------------------------------------------------------

def test_ts_decode_threshold(defaults):
    assert thresholds_for(pt("TS-DF", beta=0.5), defaults).psi_decode == pytest.approx(15.0)


def test_ps_decode_threshold(defaults):
    for beta in (0.1, 0.5, 0.9):
        assert thresholds_for(pt("PS-DF", beta=beta), defaults).psi_decode == pytest.approx(3.0)


def test_ts_relay_threshold(defaults):
    assert thresholds_for(pt("TS-DF", alpha=0.5, beta=0.5), defaults).psi_relay == pytest.approx(255.0)


def test_threshold_constants_by_substitution(defaults):
    a, b, Pp = 0.6, 0.25, defaults.Pp
    th = thresholds_for(pt("TS-DF", a, b), defaults)
    psi2 = 2 ** (2 / (a * (1 - b))) - 1
    psi3 = 2 ** (2 / ((1 - a) * (1 - b))) - 1
    assert th.z1 == pytest.approx(psi2 * a * (1 - b) / (2 * Pp * b))
    assert th.z2 == pytest.approx(psi3 * (1 - a) * (1 - b) / (2 * Pp * b))
    assert th.y1 == pytest.approx((2 ** (2 / (1 - b)) - 1) / Pp)
    th = thresholds_for(pt("PS-AF", a, b), defaults)
    assert th.y1 == pytest.approx((2 ** (2 / a) - 1) / ((1 - b) * Pp))
    assert th.z2 == pytest.approx((2 ** (2 / (1 - a)) - 1) * (1 - a) / (Pp * b))


def test_rate_threshold_saturates():
    assert rate_threshold(1.0, 1e-4) == math.inf
    assert rate_threshold(1.0, 0.5) == pytest.approx(3.0)


@settings(max_examples=50, deadline=None)
@given(label=st.sampled_from(["TS-DF", "TS-AF", "PS-DF", "PS-AF"]),
       alpha=st.floats(0.05, 0.95), beta=st.floats(0.05, 0.95))
def test_thresholds_positive(label, alpha, beta):
    th = thresholds_for(pt(label, alpha, beta), SystemParams())
    for value in (th.psi_decode, th.psi_relay, th.psi_secondary, th.z1, th.z2, th.y1):
        assert value > 0


# -- limits and landmarks -------------------------------------------------------------

def test_ts_df_no_harvest_time(defaults):
    pair = outage_ts_df(pt("TS-DF", beta=1e-7), defaults)
    assert pair.p_primary > 0.999 and pair.p_secondary > 0.999


def test_ts_df_balanced_near_crossing(defaults):
    p1, p2 = outage_ts_df(pt("TS-DF", alpha=0.65), defaults)
    assert abs(p1 - p2) / max(p1, p2) < 0.05


def test_ts_af_vanishing_secondary_rate(defaults):
    values = [outage_ts_af(pt("TS-AF"), defaults.with_(Rs=r)).p_secondary
              for r in (0.1, 1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-4


def test_af_secondary_not_above_df(defaults):
    for protocol in ("TS", "PS"):
        af = evaluate(pt(f"{protocol}-AF"), defaults)
        df = evaluate(pt(f"{protocol}-DF"), defaults)
        assert af.p_secondary <= df.p_secondary


def test_ps_df_full_power_split(defaults):
    assert outage_ps_df(pt("PS-DF", beta=1 - 1e-9), defaults).p_primary > 0.999


def test_ps_df_minimum_near_seventy_percent(defaults):
    grid = np.round(np.arange(0.1, 0.91, 0.1), 2)
    values = [outage_ps_df(pt("PS-DF", beta=b), defaults).p_primary for b in grid]
    at_07 = values[list(grid).index(0.7)]
    assert at_07 <= min(values) * 1.01


def test_ps_af_secondary_decreases_in_beta(defaults):
    grid = np.round(np.arange(0.1, 0.91, 0.1), 2)
    values = [round(outage_ps_af(pt("PS-AF", beta=b), defaults).p_secondary, 9) for b in grid]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_ps_af_no_harvest(defaults):
    assert outage_ps_af(pt("PS-AF", beta=1e-9), defaults).p_secondary > 0.999


def test_ps_af_lower_limit_includes_power_split(defaults):
    # PS-AF outage can never be below P(decode-side SNR < psi), which uses (1 - beta)
    p = pt("PS-AF", beta=0.9)
    th = thresholds_for(p, defaults)
    floor = reg_lower_gamma(1.0, th.psi_relay / ((1 - 0.9) * defaults.Pp))
    assert outage_ps_af(p, defaults).p_primary >= floor


# -- dispatch ----------------------------------------------------------------------------

def test_dispatch_identity(defaults):
    assert evaluate(pt("TS-DF"), defaults) == outage_ts_df(pt("TS-DF"), defaults)
    assert evaluate(pt("PS-AF"), defaults) == outage_ps_af(pt("PS-AF"), defaults)
    assert evaluate(pt("TS-AF"), defaults) == outage_ts_af(pt("TS-AF"), defaults)
    assert evaluate(pt("PS-DF"), defaults) == outage_ps_df(pt("PS-DF"), defaults)


def test_wrong_combo_rejected(defaults):
    with pytest.raises(DomainError):
        outage_ts_df(pt("PS-DF"), defaults)
    with pytest.raises(DomainError):
        outage_ps_af(pt("TS-AF"), defaults)


def test_unknown_df_form(defaults):
    with pytest.raises(DomainError):
        evaluate(pt("TS-DF"), defaults, df_form="exact")
    assert DF_FORMS == ("factorized", "joint")


# -- Monte Carlo oracles ----------------------------------------------------------------

ORACLE_POINTS = [("TS-DF", 0.7, 0.3), ("TS-AF", 0.7, 0.3), ("PS-DF", 0.7, 0.4), ("PS-AF", 0.7, 0.4)]


@pytest.mark.parametrize("label, alpha, beta", ORACLE_POINTS)
def test_default_form_matches_simulation(defaults, label, alpha, beta):
    p = pt(label, alpha, beta)
    pair = evaluate(p, defaults)
    for value, est in zip(pair, estimate_outage(p, defaults, TRIALS, 2718)):
        assert abs(value - est.p_hat) <= max(0.005, 4 * est.std_err)


@pytest.mark.parametrize("label, alpha, beta", ORACLE_POINTS)
def test_joint_form_within_four_standard_errors(defaults, label, alpha, beta):
    p = pt(label, alpha, beta)
    pair = evaluate(p, defaults, df_form="joint")
    for value, est in zip(pair, estimate_outage(p, defaults, TRIALS, 2718)):
        assert abs(value - est.p_hat) <= 4 * est.std_err


@pytest.mark.parametrize("label", ["TS-DF", "PS-DF"])
@pytest.mark.parametrize("alpha, beta", [(0.3, 0.2), (0.5, 0.4), (0.7, 0.6)])
def test_joint_form_at_low_shape(defaults, label, alpha, beta):
    params = defaults.with_(m=0.5)
    p = pt(label, alpha, beta)
    pair = evaluate(p, params, df_form="joint")
    for value, est in zip(pair, estimate_outage(p, params, TRIALS, 99)):
        assert abs(value - est.p_hat) <= 4 * est.std_err


def test_four_combos_distinct(defaults):
    pairs = [evaluate(ProtocolPoint(p, r, 0.5, 0.4), defaults) for p, r in ALL_COMBOS]
    assert len({tuple(x) for x in pairs}) == 4
    for pair in pairs:
        assert all(0.0 <= v <= 1.0 for v in pair)


# -- properties ----------------------------------------------------------------------------

combo = st.sampled_from(["TS-DF", "TS-AF", "PS-DF", "PS-AF"])
shape = st.sampled_from([0.5, 1.0, 1.5])


@pytest.mark.parametrize("label", ["TS-DF", "TS-AF", "PS-DF", "PS-AF"])
@pytest.mark.parametrize("beta", [0.2, 0.4, 0.6])
def test_alpha_monotonicity(defaults, label, beta):
    pairs = [evaluate(pt(label, a, beta), defaults) for a in np.linspace(0.1, 0.9, 9)]
    prim = [p.p_primary for p in pairs]
    sec = [p.p_secondary for p in pairs]
    assert all(b <= a + 1e-12 for a, b in zip(prim, prim[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(sec, sec[1:]))


@settings(max_examples=30, deadline=None)
@given(label=combo, m=shape, alpha=st.floats(0.2, 0.8), beta=st.floats(0.1, 0.7),
       eta=st.floats(0.1, 0.9), boost=st.floats(0.0, 0.1))
def test_nonincreasing_in_eta(label, m, alpha, beta, eta, boost):
    lo = evaluate(pt(label, alpha, beta), SystemParams(m=m, eta=eta))
    hi = evaluate(pt(label, alpha, beta), SystemParams(m=m, eta=eta + boost))
    assert hi.p_primary <= lo.p_primary + 1e-9
    assert hi.p_secondary <= lo.p_secondary + 1e-9


@settings(max_examples=30, deadline=None)
@given(label=combo, m=shape, alpha=st.floats(0.2, 0.8), beta=st.floats(0.1, 0.7),
       snr=st.floats(5.0, 45.0), step=st.floats(0.0, 5.0))
def test_nonincreasing_in_snr(label, m, alpha, beta, snr, step):
    lo = evaluate(pt(label, alpha, beta), SystemParams(m=m, snr_db=snr))
    hi = evaluate(pt(label, alpha, beta), SystemParams(m=m, snr_db=snr + step))
    assert hi.p_primary <= lo.p_primary + 1e-9
    assert hi.p_secondary <= lo.p_secondary + 1e-9


@settings(max_examples=30, deadline=None)
@given(protocol=st.sampled_from(["TS", "PS"]), m=shape, alpha=st.floats(0.05, 0.95),
       beta=st.floats(0.05, 0.95), snr=st.floats(0.0, 50.0))
def test_df_secondary_dominates_af(protocol, m, alpha, beta, snr):
    params = SystemParams(m=m, snr_db=snr)
    for form in DF_FORMS:
        df = evaluate(pt(f"{protocol}-DF", alpha, beta), params, df_form=form)
        af = evaluate(pt(f"{protocol}-AF", alpha, beta), params)
        assert df.p_secondary >= af.p_secondary - 1e-9


@settings(max_examples=30, deadline=None)
@given(protocol=st.sampled_from(["TS", "PS"]), m=shape, alpha=st.floats(0.05, 0.95),
       beta=st.floats(0.05, 0.95))
def test_factorized_form_is_conservative(protocol, m, alpha, beta):
    # decoding and the onward hop both improve with g1, so the product of
    # marginals understates the joint success probability
    params = SystemParams(m=m)
    fac = evaluate(pt(f"{protocol}-DF", alpha, beta), params)
    joint = evaluate(pt(f"{protocol}-DF", alpha, beta), params, df_form="joint")
    assert fac.p_primary >= joint.p_primary - 1e-9
    assert fac.p_secondary >= joint.p_secondary - 1e-9
