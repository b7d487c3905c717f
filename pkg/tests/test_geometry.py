import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy import integrate

from knds_spectral import (
    DomainError,
    HorizonGeometry,
    MetricProfile,
    NotAHorizon,
    SpacetimeParams,
    area,
    derive_geometry,
    find_horizons,
    gauss_bonnet_integral,
    gauss_curvature,
    profile_eval,
)
from knds_spectral.geometry import curvature_extrema
from knds_spectral.traces import horizon_geometries

unit = st.floats(0.0, 0.95)


def f_oracle(x, xi, b2):
    # written out independently of MetricProfile
    return (1 - x * x) * (1 - xi + xi * x * x) / (1 - b2 + b2 * x * x)


def test_profile_examples():
    assert profile_eval(MetricProfile(0.0, 0.0), 0.5) == pytest.approx(0.75, rel=1e-15)
    assert profile_eval(MetricProfile(0.1, 0.3), 0.0) == pytest.approx(0.9 / 0.7, rel=1e-15)
    p = MetricProfile(0.2, 0.2)
    xs = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(p(xs), 1 - xs**2, atol=1e-15)


def test_profile_domain():
    p = MetricProfile(0.1, 0.3)
    assert profile_eval(p, 1.0) == 0.0 and profile_eval(p, -1.0) == 0.0
    for bad in (1.0000001, -1.5):
        with pytest.raises(DomainError):
            profile_eval(p, bad)
    with pytest.raises(DomainError):
        MetricProfile(1.0, 0.0)


@given(unit, unit, st.floats(-1, 1))
def test_profile_symmetric_positive(xi, b2, x):
    p = MetricProfile(xi, b2)
    assert profile_eval(p, x) == profile_eval(p, -x)
    if abs(x) < 1:
        assert profile_eval(p, x) > 0
    assert profile_eval(p, x) == pytest.approx(f_oracle(x, xi, b2), rel=1e-13, abs=1e-300)


@given(unit, unit)
def test_profile_pole_slopes(xi, b2):
    # one-sided fourth-order differences at the poles; f'(-1) = 2, f'(1) = -2
    p, h = MetricProfile(xi, b2), 1e-3
    for x0, sign in ((-1.0, 1.0), (1.0, -1.0)):
        pts = [p(x0 + sign * i * h) for i in range(5)]
        d = sign * (-25 * pts[0] + 48 * pts[1] - 36 * pts[2] + 16 * pts[3] - 3 * pts[4]) / (12 * h)
        assert d == pytest.approx(-2.0 * x0, abs=1e-6)


def test_spinless_geometry():
    p = SpacetimeParams(1.0, 0.0, 0.0, 0.01)
    g = derive_geometry(p, find_horizons(p).event)
    assert g.beta == 0.0 and g.xi == 0.0
    assert g.eta == pytest.approx(2.02779394615, rel=1e-10)


def test_not_a_horizon(reference_params):
    with pytest.raises(NotAHorizon):
        derive_geometry(reference_params, 1.0)


def test_area_examples():
    assert area(HorizonGeometry.from_shape(1.0, 0.0, 0.0)) == pytest.approx(4 * math.pi, rel=1e-15)
    assert area(HorizonGeometry.from_shape(math.sqrt(2.0), 0.3, 0.0)) == pytest.approx(8 * math.pi, rel=1e-15)


def surface_metric(params, r):
    """(g_thth, g_phph) of the horizon cross-section in Boyer-Lindquist form."""
    a2, lam = params.spin**2, params.cosmological_constant
    chi = 1 + lam * a2 / 3

    def metric(th):
        c2 = math.cos(th) ** 2
        rho2 = r * r + a2 * c2
        dth = 1 + lam * a2 * c2 / 3
        return rho2 / dth, dth * (r * r + a2) ** 2 * math.sin(th) ** 2 / (chi**2 * rho2)

    return metric


def test_area_against_surface_integral(reference_params):
    for g in horizon_geometries(reference_params):
        metric = surface_metric(reference_params, g.radius)
        val, _ = integrate.dblquad(
            lambda th, ph: math.sqrt(np.prod(metric(th))), 0, 2 * math.pi, 0, math.pi, epsabs=0, epsrel=1e-12
        )
        assert area(g) == pytest.approx(val, rel=1e-10)


def test_curvature_against_surface_metric(reference_params):
    # Brioschi formula for E dth^2 + G dph^2, finite differences in theta
    for g in horizon_geometries(reference_params):
        metric = surface_metric(reference_params, g.radius)
        sqrt_eg = lambda th: math.sqrt(np.prod(metric(th)))
        d = 1e-4
        dg = lambda th: (metric(th + d)[1] - metric(th - d)[1]) / (2 * d)
        for th in np.linspace(0.3, 2.8, 9):
            inner = lambda t: dg(t) / sqrt_eg(t)
            k_fd = -(inner(th + d) - inner(th - d)) / (2 * d) / (2 * sqrt_eg(th))
            assert gauss_curvature(g, -math.cos(th)) == pytest.approx(k_fd, rel=1e-5)


shapes = st.tuples(st.floats(0.3, 5.0), st.floats(0.01, 0.95), st.floats(0.0, 0.95))


@settings(max_examples=60, deadline=None)
@given(shapes)
def test_curvature_against_profile_differences(shape):
    g = HorizonGeometry.from_shape(*shape)
    b2, h = g.beta**2, 1e-4
    for x in np.linspace(-0.999, 0.999, 37):
        f = [f_oracle(x + i * h, g.xi, b2) for i in (-1, 0, 1)]
        k_fd = -(f[0] - 2 * f[1] + f[2]) / h**2 / (2 * g.homothety)
        assert gauss_curvature(g, x) == pytest.approx(k_fd, abs=1e-5 / g.homothety)


def test_constant_curvature_when_xi_equals_beta_sq():
    g = HorizonGeometry.from_shape(1.7, math.sqrt(0.2), 0.2)
    k = gauss_curvature(g, np.linspace(-1, 1, 101))
    np.testing.assert_allclose(k, 1 / g.homothety, rtol=1e-13)
    assert gauss_curvature(HorizonGeometry.from_shape(1.0, 0.0, 0.0), 0.3) == pytest.approx(1.0, rel=1e-15)


def test_curvature_domain():
    with pytest.raises(DomainError):
        gauss_curvature(HorizonGeometry.from_shape(1.0, 0.0, 0.0), [0.0, 1.5])


@settings(max_examples=60, deadline=None)
@given(shapes)
def test_gauss_bonnet(shape):
    assert gauss_bonnet_integral(HorizonGeometry.from_shape(*shape)) == pytest.approx(4 * math.pi, rel=1e-8)


def test_beta_event_exceeds_beta_cosmo(reference_params):
    event, cosmo = horizon_geometries(reference_params)
    assert event.beta > cosmo.beta
    lo, hi = curvature_extrema(event)
    assert lo < hi


@settings(max_examples=100, deadline=None)
@given(st.floats(0.02, 0.5), st.floats(0.0, 0.4), st.floats(0.005, 0.1))
def test_stable_ratio_identity(a, q, lam):
    from knds_spectral import validate_regime

    p = SpacetimeParams(1.0, a, q, lam)
    if not validate_regime(p).physical:
        return
    for g in horizon_geometries(p):
        assert g.xi_over_beta_sq == pytest.approx(g.xi / g.beta**2, rel=1e-12)


def test_symbolic_normalization():
    # rescaling the horizon metric by eta^2 / chi gives dx^2/f + f dphi^2 and K = -f''/2
    x, xi, b2 = sp.symbols("x xi b2", positive=True)
    f = (1 - xi * (1 - x**2)) / (1 - b2 * (1 - x**2)) * (1 - x**2)
    closed = xi / b2 + (1 - xi / b2) * (1 - b2 * (1 + 3 * x**2)) / (1 - b2 * (1 - x**2)) ** 3
    assert sp.simplify(-sp.diff(f, x, 2) / 2 - closed) == 0
    # profile from the Kerr-Newman-de Sitter surface metric with x = -cos(theta)
    r, a, lam = sp.symbols("r a Lambda", positive=True)
    chi = 1 + lam * a**2 / 3
    c2 = x**2
    rho2 = r**2 + a**2 * c2
    dth = 1 + lam * a**2 * c2 / 3
    g_phph = dth * (r**2 + a**2) ** 2 * (1 - x**2) / (chi**2 * rho2)
    eta2 = r**2 + a**2
    sub = {xi: (lam * a**2 / 3) / chi, b2: a**2 / eta2}
    assert sp.simplify(g_phph / (eta2 * (1 - sub[xi])) - f.subs(sub)) == 0
