"""Recover (m, a, Q, Lambda) from the traces of the event and cosmological horizons.

Pipeline: Lambda from a rational function of the four traces, xi by inverting
h, a^2, both horizon radii, and finally m and Q^2 from the 2x2 linear system
Delta_r(r_e) = Delta_r(r_c) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateTraces,
    InconsistentTraces,
    NegativeRadiusSquared,
    NonPositiveLambda,
    OutOfRange,
    ReconstructionError,
    RegimeError,
    SingularSystem,
)
from .spacetime import DEGENERACY_TOL, SpacetimeParams, find_horizons
from .traces import TraceSet, h_minus_one

SPIN_CROSSCHECK_RTOL = 1e-9
RESIDUAL_RTOL = 1e-8
CHARGE_SQ_ATOL = 1e-12
_XI_MAX = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class ReconstructionResult:
    cosmological_constant: float
    xi: float
    spin_sq: float
    r_event: float
    r_cosmo: float
    mass: float
    charge_sq: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def spin(self) -> float:
        return math.sqrt(self.spin_sq)

    @property
    def charge(self) -> float:
        """sqrt(Q^2); NaN when the recovered Q^2 is negative."""
        return math.sqrt(self.charge_sq) if self.charge_sq >= 0 else math.nan

    @property
    def physical(self) -> bool:
        return self.mass > 0 and self.charge_sq >= -CHARGE_SQ_ATOL

    def to_params(self) -> SpacetimeParams:
        if not self.physical:
            raise ReconstructionError("recovered parameters are unphysical", stage="mass_charge")
        return SpacetimeParams(self.mass, self.spin, math.sqrt(max(self.charge_sq, 0.0)), self.cosmological_constant)


def _trace_pieces(traces: TraceSet):
    g0e, g0c = traces.gamma0_event, traces.gamma0_cosmo
    g1e, g1c = traces.gamma1_event, traces.gamma1_cosmo
    # (g0e - g1e) - (g0c - g1c): each inner difference is exact when the pair is close
    numerator = (g0e - g1e) - (g0c - g1c)
    denominator = g1c * g0e - g1e * g0c
    return g0e, g0c, g1e, g1c, numerator, denominator


def lambda_from_traces(traces: TraceSet) -> float:
    """Lambda = 3 (g0e - g1e + g1c - g0c) / (g1c g0e - g1e g0c)."""
    g0e, g0c, g1e, g1c, num, den = _trace_pieces(traces)
    if abs(den) < 1e-12 * (abs(g1c * g0e) + abs(g1e * g0c)):
        raise DegenerateTraces("trace denominator g1c*g0e - g1e*g0c vanishes", stage="lambda")
    lam = 3.0 * num / den
    if not lam > 0:
        raise NonPositiveLambda(f"traces give Lambda = {lam:.6g} <= 0", stage="lambda")
    return lam


def _h_target_excess(traces: TraceSet) -> float:
    """h(xi) - 1 = ((g0e - g0c) - (g1e - g1c)) / (g1e - g1c)."""
    *_, num, _ = _trace_pieces(traces)
    d1 = traces.gamma1_event - traces.gamma1_cosmo
    if abs(d1) <= 1e-14 * max(traces.gamma1_event, traces.gamma1_cosmo):
        raise DegenerateTraces("gamma_1 equal on both horizons", stage="invert_h/denominator")
    return num / d1


def _invert_excess(excess: float) -> float:
    if not excess > 1e-12:
        raise OutOfRange(f"h target 1 + {excess:.3e} is not above 1 (spin zero or inconsistent traces)")
    top = h_minus_one(_XI_MAX)
    if excess >= top:
        raise OutOfRange(f"h target exceeds representable range ({excess + 1:.3e})")
    # h - 1 ~ 2 xi / 3 near zero: bracket tightly so the relative precision of xi survives
    lo = min(0.5 * excess, 0.5)
    while h_minus_one(lo) > excess:
        lo *= 0.5
    hi = min(2.0 * excess, _XI_MAX)
    if h_minus_one(hi) < excess:
        hi = _XI_MAX
    return optimize.brentq(
        lambda x: h_minus_one(x) - excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500
    )


def invert_h(target: float) -> float:
    """xi in (0, 1) with h(xi) = target; h is strictly increasing so it is unique."""
    if not target > 1.0 + 1e-12:
        raise OutOfRange(f"h target {target} must exceed 1")
    return _invert_excess(target - 1.0)


def spin_sq_from_traces(traces: TraceSet, xi: float, lam: float) -> float:
    """a^2 from the traces, cross-checked against 3 xi / (Lambda (1 - xi))."""
    *_, num, den = _trace_pieces(traces)
    from_traces = xi / (1.0 - xi) * den / num
    from_lambda = 3.0 * xi / (lam * (1.0 - xi))
    if not (from_traces > 0 and from_lambda > 0):
        raise InconsistentTraces(f"non-positive a^2 ({from_traces:.6g}, {from_lambda:.6g})", stage="spin_sq")
    rel = abs(from_traces - from_lambda) / from_lambda
    if rel > SPIN_CROSSCHECK_RTOL:
        raise InconsistentTraces(
            f"a^2 from traces ({from_traces:.12g}) and from Lambda ({from_lambda:.12g}) "
            f"disagree by {rel:.2e}",
            stage="spin_sq",
        )
    return from_traces


def radii_from_traces(traces: TraceSet, xi: float, spin_sq: float) -> tuple[float, float]:
    """r^2 = gamma_1 / (1 - xi) - a^2 on each horizon."""
    radii = []
    for side in ("event", "cosmo"):
        r2 = traces.gamma1(side) / (1.0 - xi) - spin_sq
        if not r2 > 0:
            raise NegativeRadiusSquared(f"r_{side}^2 = {r2:.6g} <= 0", stage="radii")
        radii.append(math.sqrt(r2))
    r_e, r_c = radii
    if not r_e < r_c:
        raise ReconstructionError(f"event radius {r_e} not below cosmological radius {r_c}", stage="radii")
    return r_e, r_c


def mass_charge_from_radii(lam: float, spin_sq: float, r_event: float, r_cosmo: float) -> tuple[float, float]:
    """Solve -2 r m + Q^2 = -(r^2 + a^2)(1 - Lambda r^2 / 3) at both radii."""
    if abs(r_cosmo - r_event) <= DEGENERACY_TOL * max(abs(r_cosmo), abs(r_event)):
        raise SingularSystem("event and cosmological radii coincide", stage="mass_charge")

    def rhs(r):
        return (r * r + spin_sq) * (1.0 - lam * r * r / 3.0)

    p_e, p_c = rhs(r_event), rhs(r_cosmo)
    mass = (p_e - p_c) / (2.0 * (r_event - r_cosmo))
    charge_sq = 2.0 * r_event * mass - p_e
    return mass, charge_sq


def reconstruct(traces: TraceSet) -> ReconstructionResult:
    """Run the full inverse pipeline; stage errors carry the failing stage name."""
    lam = lambda_from_traces(traces)
    excess = _h_target_excess(traces)
    try:
        xi = _invert_excess(excess)
    except OutOfRange as exc:
        raise OutOfRange(str(exc), stage="invert_h") from exc
    spin_sq = spin_sq_from_traces(traces, xi, lam)
    r_e, r_c = radii_from_traces(traces, xi, spin_sq)
    mass, charge_sq = mass_charge_from_radii(lam, spin_sq, r_e, r_c)

    flags = []
    if charge_sq < -CHARGE_SQ_ATOL:
        flags.append("unphysical: Q^2 < 0")
    if mass <= 0:
        flags.append("unphysical: m <= 0")
    for side in ("event", "cosmo"):
        spread = traces.k_gamma_spread(side)
        if len(traces._modes(side)) > 1 and spread > 1e-9:
            flags.append(f"k*gamma_k spread {spread:.2e} on {side} horizon")

    def residual(r):
        return float(abs((r * r + spin_sq) * (1 - lam * r * r / 3) - 2 * mass * r + charge_sq))

    res_e, res_c = residual(r_e), residual(r_c)
    scale = spin_sq + abs(charge_sq) + 1.0
    if max(res_e, res_c) > RESIDUAL_RTOL * scale:
        raise InconsistentTraces(f"Delta_r residual {max(res_e, res_c):.2e} at recovered radii", stage="residual")

    # check the recovered radii really are the event/cosmological roots of the recovered quartic
    if mass > 0 and charge_sq >= 0:
        try:
            hs = find_horizons(SpacetimeParams(mass, math.sqrt(spin_sq), math.sqrt(charge_sq), lam))
            if abs(hs.event - r_e) > 1e-6 * r_e or abs(hs.cosmological - r_c) > 1e-6 * r_c:
                flags.append("recovered radii are not the outer two roots of Delta_r")
        except (RegimeError, ValueError) as exc:
            flags.append(f"horizon re-solve failed: {exc}")

    matrix = np.array([[-2.0 * r_e, 1.0], [-2.0 * r_c, 1.0]])
    diagnostics = {
        "delta_r_residual_event": res_e,
        "delta_r_residual_cosmo": res_c,
        "h_inversion_residual": abs(h_minus_one(xi) - excess),
        "spin_sq_crosscheck": abs(3 * xi / (lam * (1 - xi)) - spin_sq) / spin_sq,
        "linear_system_condition": float(np.linalg.cond(matrix)),
        "flags": flags,
    }
    return ReconstructionResult(
        cosmological_constant=lam,
        xi=xi,
        spin_sq=spin_sq,
        r_event=r_e,
        r_cosmo=r_c,
        mass=mass,
        charge_sq=charge_sq,
        diagnostics=diagnostics,
    )
