"""Kerr-Newman-de Sitter parameters, the horizon quartic and its roots.

Geometric units (G = c = 1) throughout.  Lengths share one arbitrary unit and
the cosmological constant is measured in its inverse square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeError

#: companion eigenvalue counts as real if |imag| < REAL_TOL * (1 + |real|)
REAL_TOL = 1e-10
#: event and cosmological roots are distinct if r_c - r_e > DEGENERACY_TOL * r_c
DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-10

FLAG_SPIN_ZERO = "lambda-formula-inapplicable: a=0"
FLAG_CHARGE_ZERO = "uncharged: Q=0 (Kerr-de Sitter limit)"


@dataclass(frozen=True)
class SpacetimeParams:
    """Mass ``m``, spin ``a`` (angular momentum per unit mass), charge ``Q``
    and cosmological constant ``Lambda``.

    Zero spin and zero charge are accepted as degenerate limits; mass and the
    cosmological constant must be strictly positive.
    """

    mass: float
    spin: float
    charge: float
    cosmological_constant: float

    def __post_init__(self):
        for name in ("mass", "spin", "charge", "cosmological_constant"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.cosmological_constant <= 0:
            raise ValueError(
                f"cosmological_constant must be positive, got {self.cosmological_constant}"
            )
        if self.spin < 0 or self.charge < 0:
            raise ValueError("spin and charge must be nonnegative")

    @property
    def chi(self) -> float:
        return 1.0 + self.cosmological_constant * self.spin**2 / 3.0

    @property
    def xi(self) -> float:
        s = self.cosmological_constant * self.spin**2 / 3.0
        return s / (1.0 + s)

    def quartic_coefficients(self) -> np.ndarray:
        """Coefficients of Delta_r in r, highest power first."""
        m, a, q, lam = self.mass, self.spin, self.charge, self.cosmological_constant
        return np.array(
            [-lam / 3.0, 0.0, 1.0 - lam * a * a / 3.0, -2.0 * m, a * a + q * q]
        )


def delta_r(params: SpacetimeParams, r):
    """Horizon function (r^2 + a^2)(1 - Lambda r^2 / 3) - 2 m r + Q^2.

    Accepts scalars or arrays.
    """
    a2 = params.spin**2
    r2 = np.square(r)
    return (r2 + a2) * (1.0 - params.cosmological_constant * r2 / 3.0) - 2.0 * params.mass * r + params.charge**2


def _delta_r_prime(params: SpacetimeParams, r):
    lam, a2 = params.cosmological_constant, params.spin**2
    return -4.0 * lam * r**3 / 3.0 + 2.0 * r * (1.0 - lam * a2 / 3.0) - 2.0 * params.mass


def residual_scale(params: SpacetimeParams, r: float) -> float:
    """Magnitude of the largest term of Delta_r at ``r``; sets the rounding floor."""
    a2, lam = params.spin**2, params.cosmological_constant
    return max(
        1.0,
        a2 + params.charge**2,
        r * r + a2,
        lam * r * r * (r * r + a2) / 3.0,
        2.0 * params.mass * abs(r),
    )


def _polish(params: SpacetimeParams, r: float, iters: int = 8) -> float:
    best, best_res = r, abs(delta_r(params, r))
    for _ in range(iters):
        d = _delta_r_prime(params, r)
        if d == 0.0:
            break
        r = r - delta_r(params, r) / d
        res = abs(delta_r(params, r))
        if res < best_res:
            best, best_res = r, res
        if res == 0.0:
            break
    return best


def quartic_roots(params: SpacetimeParams) -> tuple[np.ndarray, np.ndarray]:
    """All roots of Delta_r = 0 as (real roots ascending, complex roots).

    Companion-matrix eigenvalues of the monic quartic, each real root polished
    by Newton iterations on Delta_r itself.
    """
    c = params.quartic_coefficients()
    monic = c[1:] / c[0]
    companion = np.zeros((4, 4))
    companion[0, :] = -monic
    companion[1:, :-1] = np.eye(3)
    eig = np.linalg.eigvals(companion)

    is_real = np.abs(eig.imag) < REAL_TOL * (1.0 + np.abs(eig.real))
    real = [_polish(params, float(z.real)) for z in eig[is_real]]
    if params.spin == 0.0 and params.charge == 0.0 and real:
        # Delta_r = r * cubic: the root at the origin is exact
        i = int(np.argmin(np.abs(real)))
        real[i] = 0.0
    return np.sort(np.array(real)), eig[~is_real]


@dataclass(frozen=True)
class HorizonSet:
    """Classified real roots of Delta_r = 0."""

    event: float
    cosmological: float
    cauchy: float | None
    negative_root: float | None
    residuals: dict = field(default_factory=dict)
    complex_roots: tuple = ()

    @property
    def real_roots(self) -> tuple:
        roots = [self.negative_root, self.cauchy, self.event, self.cosmological]
        return tuple(r for r in roots if r is not None)


def find_horizons(params: SpacetimeParams) -> HorizonSet:
    """Locate and classify the horizons.

    The two largest positive roots are the event and cosmological horizons and
    a third positive root, if any, is the Cauchy horizon.

    Raises
    ------
    RegimeError
        Fewer than two positive real roots, or event and cosmological roots
        closer than ``DEGENERACY_TOL`` (Nariai-type coincidence).
    """
    real, cplx = quartic_roots(params)
    positive = real[real > 0.0]
    if positive.size < 2:
        raise RegimeError(
            f"Delta_r has {positive.size} positive real root(s); need event and cosmological horizons"
        )
    event, cosmo = float(positive[-2]), float(positive[-1])
    if cosmo - event <= DEGENERACY_TOL * cosmo:
        raise RegimeError(
            f"event ({event}) and cosmological ({cosmo}) horizons are degenerate"
        )
    cauchy = float(positive[-3]) if positive.size >= 3 else None
    negative = real[real < 0.0]
    negative_root = float(negative[0]) if negative.size else None

    named = {"negative_root": negative_root, "cauchy": cauchy, "event": event, "cosmological": cosmo}
    residuals = {k: float(abs(delta_r(params, v))) for k, v in named.items() if v is not None}
    return HorizonSet(
        event=event,
        cosmological=cosmo,
        cauchy=cauchy,
        negative_root=negative_root,
        residuals=residuals,
        complex_roots=tuple(complex(z) for z in cplx),
    )


@dataclass(frozen=True)
class RegimeReport:
    checks: dict
    flags: tuple
    horizons: HorizonSet | None
    degeneracy_margin: float | None
    message: str = ""

    @property
    def physical(self) -> bool:
        """An event + cosmological pair exists and is non-degenerate."""
        return self.horizons is not None

    @property
    def invertible(self) -> bool:
        """Every standing assumption of the inverse problem holds."""
        return self.physical and self.checks["spin_positive"]

    def as_dict(self) -> dict:
        return {
            "checks": dict(self.checks),
            "flags": list(self.flags),
            "degeneracy_margin": self.degeneracy_margin,
            "message": self.message,
        }


def validate_regime(params: SpacetimeParams) -> RegimeReport:
    """Check the assumptions the forward and inverse maps rely on.

    Never raises; failures are recorded in the report.
    """
    checks = {
        "mass_positive": params.mass > 0,
        "spin_positive": params.spin > 0,
        "charge_positive": params.charge > 0,
        "lambda_positive": params.cosmological_constant > 0,
    }
    flags = []
    if params.spin == 0:
        flags.append(FLAG_SPIN_ZERO)
    if params.charge == 0:
        flags.append(FLAG_CHARGE_ZERO)

    try:
        horizons = find_horizons(params)
    except RegimeError as exc:
        checks["distinct_event_cosmological"] = False
        return RegimeReport(checks, tuple(flags), None, None, str(exc))

    checks["distinct_event_cosmological"] = True
    margin = (horizons.cosmological - horizons.event) / horizons.cosmological
    return RegimeReport(checks, tuple(flags), horizons, margin)
