"""Closed-form Green's operator traces of the horizon Laplacians.

For a horizon with scale eta, distortion beta and rotation parameter xi

    gamma_0 = eta^2 [1 - beta^2 + (xi - beta^2) g(xi)]
    gamma_k = eta^2 (1 - xi) / |k|,   k != 0

where g(xi) = [sqrt((1-xi)/xi) arctan(sqrt(xi/(1-xi))) - 1] / xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, ZeroModeError
from .geometry import HorizonGeometry, MetricProfile, derive_geometry, quad
from .spacetime import FLAG_SPIN_ZERO, SpacetimeParams, find_horizons

G_SERIES_THRESHOLD = 0.05
_G_SERIES_TERMS = 14

CLOSED_FORM = "closed-form"
NUMERICAL = "numerical-spectrum"
EXTERNAL = "external-input"
PROVENANCES = (CLOSED_FORM, NUMERICAL, EXTERNAL)


def g_of_xi(xi: float) -> float:
    """g on [0, 1], continuous with g(0) = -1/3 and g(1) = -1.

    Below ``G_SERIES_THRESHOLD`` the direct formula loses O(eps/xi) to
    cancellation, so arctan(u)/u is expanded in t = u^2 = xi/(1-xi) instead.
    """
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"g(xi) needs xi in [0, 1], got {xi}")
    if xi == 1.0:
        return -1.0
    if xi < G_SERIES_THRESHOLD:
        # (arctan(u)/u - 1)/xi = (1/(1-xi)) * sum_{n>=1} (-1)^n t^(n-1) / (2n+1)
        t = xi / (1.0 - xi)
        acc = 0.0
        for n in range(_G_SERIES_TERMS, 0, -1):
            acc = (-1) ** n / (2 * n + 1) + t * acc
        return acc / (1.0 - xi)
    u = math.sqrt(xi / (1.0 - xi))
    return (math.atan(u) / u - 1.0) / xi


def h_minus_one(xi: float) -> float:
    """h(xi) - 1 = xi (1 + g(xi)) / (1 - xi), accurate for small xi."""
    if not 0.0 <= xi < 1.0:
        raise DomainError(f"h(xi) needs xi in [0, 1), got {xi}")
    return xi * (1.0 + g_of_xi(xi)) / (1.0 - xi)


def h_of_xi(xi: float) -> float:
    if not 0.0 <= xi < 1.0:
        raise DomainError(f"h(xi) needs xi in [0, 1), got {xi}")
    return (1.0 + xi * g_of_xi(xi)) / (1.0 - xi)


def gamma0_closed(geometry: HorizonGeometry) -> float:
    """eta^2 [1 - beta^2 + (xi - beta^2) g(xi)].

    Evaluated as gamma_1 + (1 + g) a^2 (xi/beta^2 - 1), the same expression
    regrouped, so the small difference gamma_0 - gamma_1 (which carries Lambda
    for the inverse problem) is formed without cancellation.
    """
    g = g_of_xi(geometry.xi)
    a2 = geometry.spin**2
    return geometry.homothety + (1.0 + g) * a2 * (geometry.xi_over_beta_sq - 1.0)


def gammak_closed(geometry: HorizonGeometry, k: int) -> float:
    if k == 0:
        raise ZeroModeError("k = 0 is the invariant trace; use gamma0_closed")
    return geometry.homothety / abs(k)


def gamma0_integral(profile: MetricProfile) -> float:
    """Quadrature of (1/2) * int_{-1}^{1} (1 - x^2)/f(x) dx for a normalized profile.

    The vanishing factor 1 - x^2 is cancelled analytically, leaving a smooth
    integrand.  Multiply by eta^2 (1 - xi) to get the horizon's gamma_0.
    """
    return 0.5 * quad(lambda x: 1.0 / profile.shape_factor(x))


@dataclass(frozen=True)
class TraceSet:
    """Invariant (k = 0) and equivariant traces of both physical horizons."""

    gamma0_event: float
    gammak_event: dict
    gamma0_cosmo: float
    gammak_cosmo: dict
    provenance: str = CLOSED_FORM
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        for g0, gk, side in (
            (self.gamma0_event, self.gammak_event, "event"),
            (self.gamma0_cosmo, self.gammak_cosmo, "cosmo"),
        ):
            if not (math.isfinite(g0) and g0 > 0):
                raise ValueError(f"gamma0_{side} must be positive and finite, got {g0}")
            if not gk:
                raise ValueError(f"gammak_{side} needs at least one k != 0")
            for k, v in gk.items():
                if int(k) != k or k == 0:
                    raise ValueError(f"invalid mode number {k!r} in gammak_{side}")
                if not (math.isfinite(v) and v > 0):
                    raise ValueError(f"gamma_{k} ({side}) must be positive and finite")
        object.__setattr__(self, "gammak_event", {int(k): float(v) for k, v in self.gammak_event.items()})
        object.__setattr__(self, "gammak_cosmo", {int(k): float(v) for k, v in self.gammak_cosmo.items()})
        if self.provenance == CLOSED_FORM:
            for side in ("event", "cosmo"):
                spread = self.k_gamma_spread(side)
                if spread > 1e-12:
                    raise ValueError(f"k * gamma_k not constant on {side} horizon (spread {spread:.2e})")

    def _modes(self, side: str) -> dict:
        return self.gammak_event if side == "event" else self.gammak_cosmo

    def gamma1(self, side: str) -> float:
        """gamma_1, or |k| gamma_k for the lowest supplied |k|."""
        modes = self._modes(side)
        if 1 in modes:
            return modes[1]
        if -1 in modes:
            return modes[-1]
        k = min(modes, key=lambda k: (abs(k), -k))
        return abs(k) * modes[k]

    @property
    def gamma1_event(self) -> float:
        return self.gamma1("event")

    @property
    def gamma1_cosmo(self) -> float:
        return self.gamma1("cosmo")

    def k_gamma_spread(self, side: str) -> float:
        """Max relative deviation of |k| gamma_k from its mean over supplied k."""
        vals = [abs(k) * v for k, v in self._modes(side).items()]
        mean = sum(vals) / len(vals)
        return max(abs(v - mean) for v in vals) / mean

    def scaled(self, s: float) -> "TraceSet":
        return TraceSet(
            self.gamma0_event * s,
            {k: v * s for k, v in self.gammak_event.items()},
            self.gamma0_cosmo * s,
            {k: v * s for k, v in self.gammak_cosmo.items()},
            provenance=self.provenance,
            notes=self.notes,
        )


def horizon_geometries(params: SpacetimeParams) -> tuple[HorizonGeometry, HorizonGeometry]:
    """(event, cosmological) geometries; propagates RegimeError."""
    hs = find_horizons(params)
    return derive_geometry(params, hs.event), derive_geometry(params, hs.cosmological)


def forward_traces(params: SpacetimeParams, k_max: int = 3) -> TraceSet:
    """Closed-form traces gamma_0 and gamma_1..gamma_{k_max} of both horizons."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    event, cosmo = horizon_geometries(params)
    notes = ("inverse not applicable: " + FLAG_SPIN_ZERO,) if params.spin == 0 else ()
    return TraceSet(
        gamma0_event=gamma0_closed(event),
        gammak_event={k: gammak_closed(event, k) for k in range(1, k_max + 1)},
        gamma0_cosmo=gamma0_closed(cosmo),
        gammak_cosmo={k: gammak_closed(cosmo, k) for k in range(1, k_max + 1)},
        provenance=CLOSED_FORM,
        notes=notes,
    )
