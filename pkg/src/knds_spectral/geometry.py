"""Intrinsic metric induced on a horizon at fixed r and t.

With x = -cos(theta) every horizon metric is the homothety

    ds^2 = eta^2 (1 - xi) (dx^2 / f(x) + f(x) dphi^2)

of a normalized (area 4 pi) metric of revolution whose profile is

    f(x) = (1 - xi (1 - x^2)) / (1 - beta^2 (1 - x^2)) * (1 - x^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NotAHorizon, QuadratureFailure
from .spacetime import RESIDUAL_TOL, SpacetimeParams, delta_r, residual_scale

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class MetricProfile:
    """Profile f(x) of a normalized metric dx^2/f + f dphi^2 on the sphere."""

    xi: float
    beta_sq: float

    def __post_init__(self):
        if not 0.0 <= self.xi < 1.0:
            raise DomainError(f"xi must lie in [0, 1), got {self.xi}")
        if not 0.0 <= self.beta_sq < 1.0:
            raise DomainError(f"beta_sq must lie in [0, 1), got {self.beta_sq}")

    @classmethod
    def round(cls) -> "MetricProfile":
        return cls(0.0, 0.0)

    def shape_factor(self, x):
        """f(x) / (1 - x^2); smooth and positive on the closed interval."""
        s = 1.0 - np.square(x)
        return (1.0 - self.xi * s) / (1.0 - self.beta_sq * s)

    def __call__(self, x):
        """Vectorized f(x) with no domain check."""
        return self.shape_factor(x) * (1.0 - np.square(x))


def profile_eval(profile: MetricProfile, x: float) -> float:
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [-1, 1], got {x}")
    if abs(x) == 1.0:
        return 0.0
    return float(profile(x))


@dataclass(frozen=True)
class HorizonGeometry:
    """Per-horizon scale data.

    ``cosmological_constant`` is kept so the curvature can use the regular form
    xi / beta^2 = Lambda eta^2 (1 - xi) / 3, which stays finite as a -> 0.
    """

    radius: float
    eta: float
    beta: float
    xi: float
    cosmological_constant: float

    def __post_init__(self):
        if self.eta <= 0 or self.radius <= 0:
            raise DomainError("radius and eta must be positive")
        if not 0.0 <= self.beta < 1.0:
            raise DomainError(f"beta must lie in [0, 1), got {self.beta}")
        if not 0.0 <= self.xi < 1.0:
            raise DomainError(f"xi must lie in [0, 1), got {self.xi}")

    @classmethod
    def from_shape(cls, eta: float, beta: float, xi: float) -> "HorizonGeometry":
        """Geometry with prescribed (eta, beta, xi), not tied to a solved quartic.

        Lambda is backed out of xi = Lambda a^2 / (3 + Lambda a^2) with a = beta eta.
        """
        if beta == 0.0:
            if xi != 0.0:
                raise DomainError("xi > 0 requires nonzero spin (beta > 0)")
            lam = 0.0
        else:
            lam = 3.0 * xi / ((1.0 - xi) * (beta * eta) ** 2)
        radius = eta * math.sqrt(1.0 - beta * beta)
        return cls(radius=radius, eta=eta, beta=beta, xi=xi, cosmological_constant=lam)

    @property
    def spin(self) -> float:
        return self.beta * self.eta

    @property
    def homothety(self) -> float:
        """eta^2 (1 - xi): the factor scaling the normalized metric."""
        return self.eta**2 * (1.0 - self.xi)

    @property
    def area(self) -> float:
        return area(self)

    @property
    def xi_over_beta_sq(self) -> float:
        return self.cosmological_constant * self.eta**2 * (1.0 - self.xi) / 3.0

    @property
    def profile(self) -> MetricProfile:
        return MetricProfile(self.xi, self.beta**2)


def derive_geometry(params: SpacetimeParams, r0: float) -> HorizonGeometry:
    """Geometry of the horizon at radius ``r0``.

    Raises NotAHorizon unless r0 is a root of Delta_r to within rounding of
    its largest term.
    """
    res = abs(delta_r(params, r0))
    if not r0 > 0 or res > RESIDUAL_TOL * residual_scale(params, r0):
        raise NotAHorizon(f"r0={r0} is not a horizon: |Delta_r(r0)| = {res:.3e}")
    a = params.spin
    eta = math.hypot(r0, a)
    return HorizonGeometry(
        radius=float(r0),
        eta=eta,
        beta=a / eta,
        xi=params.xi,
        cosmological_constant=params.cosmological_constant,
    )


def area(geometry: HorizonGeometry) -> float:
    return 4.0 * math.pi * geometry.homothety


def gauss_curvature(geometry: HorizonGeometry, x):
    """Closed-form Gauss curvature K(x) on [-1, 1]; vectorized."""
    x = np.asarray(x, dtype=float)
    if np.any((x < -1.0) | (x > 1.0)):
        raise DomainError("x must lie in [-1, 1]")
    b2 = geometry.beta**2
    ratio = geometry.xi_over_beta_sq
    x2 = x * x
    shape = (1.0 - b2 * (1.0 + 3.0 * x2)) / (1.0 - b2 * (1.0 - x2)) ** 3
    k = (ratio + (1.0 - ratio) * shape) / geometry.homothety
    return float(k) if k.ndim == 0 else k


def curvature_extrema(geometry: HorizonGeometry, n: int = 2001) -> tuple[float, float]:
    x = np.linspace(-1.0, 1.0, n)
    k = gauss_curvature(geometry, x)
    return float(k.min()), float(k.max())


def quad(func, a=-1.0, b=1.0, rtol=QUAD_RTOL):
    """Adaptive Gauss-Kronrod quadrature that raises when the tolerance is missed."""
    value, err = integrate.quad(func, a, b, epsabs=0.0, epsrel=rtol, limit=200)
    if not err <= rtol * max(abs(value), np.finfo(float).tiny):
        raise QuadratureFailure(f"quadrature error {err:.2e} exceeds rtol {rtol:.0e}")
    return value


def gauss_bonnet_integral(geometry: HorizonGeometry) -> float:
    """Total curvature: 2 pi times the integral of K dA over x."""
    h = geometry.homothety
    return 2.0 * math.pi * quad(lambda x: gauss_curvature(geometry, x) * h)
