import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knds_spectral import (
    DegenerateTraces,
    InconsistentTraces,
    NegativeRadiusSquared,
    NonPositiveLambda,
    OutOfRange,
    ReconstructionError,
    SingularSystem,
    SpacetimeParams,
    TraceSet,
    find_horizons,
    forward_traces,
    h_of_xi,
    invert_h,
    lambda_from_traces,
    mass_charge_from_radii,
    radii_from_traces,
    reconstruct,
    spin_sq_from_traces,
    validate_regime,
)
from knds_spectral.traces import EXTERNAL, NUMERICAL

from conftest import mp_traces

KDS = SpacetimeParams(1.0, 0.3, 0.0, 0.02)


def valid(a, q, lam):
    p = SpacetimeParams(1.0, a, q, lam)
    return p if validate_regime(p).physical else None


def external(g0e, g1e, g0c, g1c):
    return TraceSet(g0e, {1: g1e}, g0c, {1: g1c}, provenance=EXTERNAL)


def test_lambda_reference(reference_params):
    assert lambda_from_traces(forward_traces(reference_params)) == pytest.approx(0.05, rel=1e-10)


def test_lambda_from_high_precision_traces():
    # traces computed independently at 50 digits, rounded once to float
    assert lambda_from_traces(external(*mp_traces(1.0, 0.1, 0.1, 0.05))) == pytest.approx(0.05, rel=1e-10)


def test_lambda_degenerate_and_nonpositive():
    with pytest.raises(DegenerateTraces) as exc:
        lambda_from_traces(external(1.2, 1.0, 1.2, 1.0))
    assert exc.value.stage == "lambda"
    # gamma0 = gamma1 on both horizons zeroes the denominator as well
    with pytest.raises(DegenerateTraces):
        lambda_from_traces(external(1.0, 1.0, 5.0, 5.0))
    with pytest.raises(NonPositiveLambda):
        lambda_from_traces(external(2.0, 1.0, 5.0, 3.0))


def test_invert_h_examples():
    assert invert_h(math.pi / 2) == pytest.approx(0.5, abs=1e-10)
    assert invert_h(h_of_xi(0.123456)) == pytest.approx(0.123456, abs=1e-10)
    with pytest.raises(OutOfRange):
        invert_h(1.0)


@given(st.floats(1e-8, 0.999))
def test_invert_h_round_trip(xi):
    assert invert_h(h_of_xi(xi)) == pytest.approx(xi, rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("params, expected", [(SpacetimeParams(1.0, 0.1, 0.1, 0.05), 0.01), (KDS, 0.09)])
def test_spin_sq_examples(params, expected):
    t = forward_traces(params)
    assert spin_sq_from_traces(t, params.xi, lambda_from_traces(t)) == pytest.approx(expected, rel=1e-9)


def test_spin_sq_rejects_perturbed_traces(reference_params):
    t = forward_traces(reference_params)
    bad = TraceSet(t.gamma0_event * 1.01, t.gammak_event, t.gamma0_cosmo, t.gammak_cosmo, provenance=EXTERNAL)
    # with Lambda taken from the same traces the two a^2 expressions agree
    # identically, so the inconsistency surfaces later in the pipeline
    with pytest.raises(ReconstructionError) as exc:
        reconstruct(bad)
    assert exc.value.stage is not None
    with pytest.raises(InconsistentTraces):
        spin_sq_from_traces(bad, reference_params.xi, 1.01 * lambda_from_traces(bad))


@pytest.mark.parametrize("params", [SpacetimeParams(1.0, 0.1, 0.1, 0.05), SpacetimeParams(1.0, 0.3, 0.2, 0.03)])
def test_radii_are_the_horizons(params):
    hs = find_horizons(params)
    r_e, r_c = radii_from_traces(forward_traces(params), params.xi, params.spin**2)
    assert r_e == pytest.approx(hs.event, rel=1e-8)
    assert r_c == pytest.approx(hs.cosmological, rel=1e-8)


def test_negative_radius_squared():
    t = external(1.5, 0.005, 40.0, 40.0)
    with pytest.raises(NegativeRadiusSquared):
        radii_from_traces(t, 0.1, 0.01)


def test_mass_charge_examples(reference_params):
    hs = find_horizons(reference_params)
    m, q2 = mass_charge_from_radii(0.05, 0.01, hs.event, hs.cosmological)
    assert m == pytest.approx(1.0, rel=1e-8) and q2 == pytest.approx(0.01, rel=1e-8)
    hs = find_horizons(KDS)
    m, q2 = mass_charge_from_radii(0.02, 0.09, hs.event, hs.cosmological)
    assert m == pytest.approx(1.0, rel=1e-8) and q2 == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(SingularSystem):
        mass_charge_from_radii(0.05, 0.01, 3.0, 3.0)


def test_reconstruct_reference(reference_params):
    res = reconstruct(forward_traces(reference_params))
    for got, want in ((res.mass, 1.0), (res.spin_sq, 0.01), (res.charge_sq, 0.01), (res.cosmological_constant, 0.05)):
        assert got == pytest.approx(want, rel=1e-8)
    d = res.diagnostics
    assert d["flags"] == []
    assert d["h_inversion_residual"] < 1e-15
    assert d["spin_sq_crosscheck"] < 1e-12
    assert res.physical and res.r_event < res.r_cosmo
    assert res.to_params().charge == pytest.approx(0.1, rel=1e-8)


def test_reconstruct_kerr_de_sitter():
    res = reconstruct(forward_traces(KDS))
    assert res.charge_sq == pytest.approx(0.0, abs=1e-8)
    assert res.mass == pytest.approx(1.0, rel=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.02, 0.5), st.floats(0.0, 0.4), st.floats(0.005, 0.1))
def test_h_target_identity(a, q, lam):
    p = valid(a, q, lam)
    if p is None:
        return
    t = forward_traces(p)
    target = (t.gamma0_event - t.gamma0_cosmo) / (t.gamma1_event - t.gamma1_cosmo)
    # relative to h - 1, the quantity that carries information
    assert (target - 1) == pytest.approx(h_of_xi(p.xi) - 1, rel=1e-6)
    assert target == pytest.approx(h_of_xi(p.xi), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.02, 0.5), st.floats(0.0, 0.4), st.floats(0.005, 0.1))
def test_round_trip_spin_and_lambda(a, q, lam):
    # mass, spin and Lambda are well conditioned over the whole box.  Q is not:
    # its relative error is unbounded as Q -> 0, and even Q^2 carries ~1e-8
    # absolute error at the corner a = 0.02, Lambda = 0.005, where correctly
    # rounded traces give the same value (scripts/roundtrip_sweep.py)
    p = valid(a, q, lam)
    if p is None:
        return
    res = reconstruct(forward_traces(p))
    assert res.mass == pytest.approx(1.0, rel=1e-7)
    assert res.spin == pytest.approx(a, rel=1e-7)
    assert res.cosmological_constant == pytest.approx(lam, rel=1e-7)
    assert res.charge_sq == pytest.approx(q * q, abs=5e-8)


def test_simplified_radii_match_literal_form():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        p = valid(rng.uniform(0.05, 0.5), rng.uniform(0, 0.4), rng.uniform(0.005, 0.1))
        if p is None:
            continue
        t = forward_traces(p)
        g0e, g0c, g1e, g1c = t.gamma0_event, t.gamma0_cosmo, t.gamma1_event, t.gamma1_cosmo
        xi = invert_h((g0e - g0c) / (g1e - g1c))
        a2 = xi / (1 - xi) * (g1c * g0e - g1e * g0c) / (g0e - g1e + g1c - g0c)
        literal = [g1 / (1 - xi) - a2 for g1 in (g1e, g1c)]
        res = reconstruct(t)
        np.testing.assert_allclose([res.r_event**2, res.r_cosmo**2], literal, rtol=1e-9)
        checked += 1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.0, 0.4), st.floats(0.01, 0.1), st.floats(0.01, 100))
def test_scale_covariance(a, q, lam, s):
    p = valid(a, q, lam)
    if p is None:
        return
    t = forward_traces(p)
    base, scaled = reconstruct(t), reconstruct(t.scaled(s))
    assert scaled.cosmological_constant == pytest.approx(base.cosmological_constant / s, rel=1e-9)
    assert scaled.spin_sq == pytest.approx(base.spin_sq * s, rel=1e-9)
    assert scaled.r_event**2 == pytest.approx(base.r_event**2 * s, rel=1e-12)
    assert scaled.r_cosmo**2 == pytest.approx(base.r_cosmo**2 * s, rel=1e-12)
    assert scaled.xi == pytest.approx(base.xi, rel=1e-9)


def test_k_choice_independence(reference_params):
    full = forward_traces(reference_params)
    for k in (2, 3):
        only_k = TraceSet(
            full.gamma0_event, {k: full.gammak_event[k]},
            full.gamma0_cosmo, {k: full.gammak_cosmo[k]},
            provenance=EXTERNAL,
        )
        res, ref = reconstruct(only_k), reconstruct(full)
        for field in ("mass", "spin_sq", "charge_sq", "cosmological_constant"):
            assert getattr(res, field) == pytest.approx(getattr(ref, field), rel=1e-9)


def test_equal_gamma1_fails_at_h_stage():
    with pytest.raises(DegenerateTraces) as exc:
        reconstruct(external(1.2, 1.0, 1.1, 1.0))
    assert exc.value.stage == "invert_h/denominator"


def test_noisy_k_modes_are_flagged(reference_params):
    t = forward_traces(reference_params)
    noisy = TraceSet(
        t.gamma0_event, {1: t.gamma1_event, 2: t.gamma1_event / 2 * (1 + 1e-6)},
        t.gamma0_cosmo, t.gammak_cosmo, provenance=NUMERICAL,
    )
    flags = reconstruct(noisy).diagnostics["flags"]
    assert any("spread" in f for f in flags)


@pytest.mark.slow
def test_reconstruct_from_numerical_traces(reference_params):
    from knds_spectral import spectral_traces

    traces, _ = spectral_traces(reference_params, ks=(1,), workers=2)
    res = reconstruct(traces)
    # measured at grid 2048: Lambda 1.3e-6, a 2.3e-6, m 4.2e-6, Q 8.8e-4 (relative)
    assert res.cosmological_constant == pytest.approx(0.05, rel=1e-4)
    assert res.spin == pytest.approx(0.1, rel=1e-4)
    assert res.mass == pytest.approx(1.0, rel=1e-4)
    assert res.charge_sq == pytest.approx(0.01, rel=0.02)
