"""Direct numerical spectrum of the mode operators

    L_k = -d/dx (f d/dx) + k^2 / f     on (-1, 1)

for a normalized metric of revolution, and trace estimates built from it.

Discretization
--------------
Cell-centred finite volumes on a uniform grid in theta, x = -cos(theta).
Multiplying the eigen-equation by sin(theta) gives the self-adjoint form

    -(P u')' + Q u = lambda W u,   P = f / sin,  Q = k^2 sin / f,  W = sin,

with P vanishing at both poles.  Fluxes through the polar faces are zero, so
for k = 0 the constant vector is an exact null vector, and for k != 0 the
potential Q forces the (sin theta)^|k| decay of regular eigenfunctions.
Rescaling by sqrt(W) leaves a symmetric tridiagonal matrix.  The scheme is
second order; each eigenvalue is Richardson-extrapolated from grids N and 2N.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import digamma, polygamma

from .errors import ConvergenceError, DiscretizationError, TailModelError
from .geometry import MetricProfile
from .traces import NUMERICAL, TraceSet, horizon_geometries

MIN_GRID = 64
DEFAULT_GRID = 2048
#: eigenvalues whose grid-doubling change exceeds this (relative) are rejected
CONVERGENCE_RTOL = 0.05
ZERO_MODE_RTOL = 1e-8
CLUSTER_RTOL = 1e-6
MIN_TRACE_EIGS = 20
#: trace estimates use grid/32 eigenvalues by default: the top of a grid/4 list
#: carries O((j h)^4) discretization error that the tail fit then amplifies
TRACE_COUNT_DIVISOR = 32


def default_trace_count(grid_size: int) -> int:
    return max(MIN_TRACE_EIGS, grid_size // TRACE_COUNT_DIVISOR)


@dataclass(frozen=True)
class OperatorSpec:
    profile: MetricProfile
    k: int
    grid_size: int = DEFAULT_GRID
    homothety_factor: float = 1.0

    def __post_init__(self):
        if self.grid_size < MIN_GRID:
            raise ValueError(f"grid_size must be at least {MIN_GRID}, got {self.grid_size}")
        if not self.homothety_factor > 0:
            raise ValueError("homothety_factor must be positive")
        object.__setattr__(self, "k", int(self.k))

    def refined(self) -> "OperatorSpec":
        return OperatorSpec(self.profile, self.k, 2 * self.grid_size, self.homothety_factor)


@dataclass(frozen=True)
class DiscreteOperator:
    """Symmetric tridiagonal matrix (diagonal, off-diagonal) for one L_k."""

    spec: OperatorSpec
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    weights: np.ndarray

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)


def assemble_operator(spec: OperatorSpec) -> DiscreteOperator:
    n = spec.grid_size
    h = math.pi / n
    faces = np.arange(n + 1) * h
    centres = (np.arange(n) + 0.5) * h
    x_face = -np.cos(faces)
    x_c = -np.cos(centres)

    # f/sin at a face equals sin * shape_factor; exactly zero at the poles
    p = np.sin(faces) * spec.profile.shape_factor(x_face)
    p[0] = p[-1] = 0.0
    # exact cell measure in x, so sum(w) * h = 2
    w = (np.cos(faces[:-1]) - np.cos(faces[1:])) / h
    q = spec.k**2 / (np.sin(centres) * spec.profile.shape_factor(x_c))

    stiff_diag = (p[:-1] + p[1:]) / h**2 + q
    upper = -p[1:-1] / h**2  # coupling of cell i to i+1, seen from row i
    lower = -p[1:-1] / h**2  # coupling of cell i+1 to i, seen from row i+1
    s = np.sqrt(w)
    diag = stiff_diag / w
    off_up = upper / (s[:-1] * s[1:])
    off_lo = lower / (s[1:] * s[:-1])

    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off_up))):
        raise DiscretizationError("non-finite matrix entries")
    scale = np.max(np.abs(diag))
    asym = np.max(np.abs(off_up - off_lo), initial=0.0)
    if asym > 1e-12 * scale:
        raise DiscretizationError(f"assembled operator not symmetric (asymmetry {asym:.2e})")
    return DiscreteOperator(spec, diag, off_up, w)


def _lowest(op: DiscreteOperator, count: int) -> np.ndarray:
    # the default bisection tolerance is eps * ||T|| ~ eps N^2, which swamps
    # the small eigenvalues on fine grids; ask for full relative accuracy
    return eigh_tridiagonal(
        op.diagonal, op.offdiagonal, eigvals_only=True,
        select="i", select_range=(0, count - 1), tol=np.finfo(float).tiny,
    )


def _drop_zero_mode(vals: np.ndarray, k: int) -> np.ndarray:
    if k == 0 and vals.size > 1 and abs(vals[0]) < ZERO_MODE_RTOL * vals[1]:
        return vals[1:]
    return vals


@dataclass(frozen=True)
class EigenvalueTable:
    """Lowest positive eigenvalues of one L_k, after homothety scaling.

    ``errors`` are a-posteriori estimates from the grid-doubling change; they
    bound the error of the finer grid and overstate that of ``values``.
    """

    k: int
    values: np.ndarray
    errors: np.ndarray
    grid_size: int
    homothety: float

    def __len__(self):
        return self.values.size


def eigenvalues(op: DiscreteOperator, count: int, rtol: float = CONVERGENCE_RTOL) -> EigenvalueTable:
    """The ``count`` lowest positive eigenvalues of L_k.

    For k = 0 the constant mode (zero eigenvalue) is dropped.  Values are
    Richardson-extrapolated from this grid and its doubling.

    Raises
    ------
    ConvergenceError
        if doubling the grid moves any requested eigenvalue by more than
        ``rtol`` relative.
    """
    spec = op.spec
    if count < 1 or count > spec.grid_size // 4:
        raise ValueError(f"count must be in [1, grid_size/4 = {spec.grid_size // 4}], got {count}")
    extra = 1 if spec.k == 0 else 0
    coarse = _drop_zero_mode(_lowest(op, count + extra), spec.k)[:count]
    fine = _drop_zero_mode(_lowest(assemble_operator(spec.refined()), count + extra), spec.k)[:count]
    if coarse.size < count or fine.size < count or np.any(coarse <= 0):
        raise ConvergenceError("could not isolate the requested positive eigenvalues")

    change = np.abs(fine - coarse)
    bad = np.nonzero(change > rtol * np.abs(fine))[0]
    if bad.size:
        j = int(bad[0])
        raise ConvergenceError(
            f"k={spec.k}: eigenvalue {j + 1} moved by {change[j] / fine[j]:.2e} (relative) "
            f"under grid doubling; tolerance {rtol:.1e}"
        )
    values = (4.0 * fine - coarse) / 3.0
    errors = change / 3.0
    H = spec.homothety_factor
    return EigenvalueTable(spec.k, values / H, errors / H, spec.grid_size, H)


@dataclass(frozen=True)
class SpectrumResult:
    k: int
    eigenvalues: np.ndarray
    count_converged: int
    trace_partial: float
    trace_tail_estimate: float
    trace_total: float
    error_bound: float


def fit_weyl(eigs: np.ndarray, start: int, constant: bool = False) -> tuple[float, ...]:
    """Least-squares fit lambda_j ~ A j^2 + B j (+ C) over indices j > start (1-based j)."""
    j = np.arange(1, eigs.size + 1, dtype=float)[start:]
    cols = [j * j, j] + ([np.ones_like(j)] if constant else [])
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), eigs[start:], rcond=None)
    return tuple(float(c) for c in coef)


def weyl_tail(a: float, b: float, last: int) -> float:
    """Exact sum over j > last of 1/(a j^2 + b j).

    Partial fractions give (psi(last + 1 + c) - psi(last + 1)) / b with c = b/a.
    For small |c| that difference cancels, so its Taylor series in c is summed
    instead: sum_n c^(n-1) psi^(n)(last + 1) / (n! a).
    """
    if a <= 0:
        raise TailModelError(f"Weyl fit has non-positive leading coefficient {a}")
    c = b / a
    if last + 1 + c <= 0:
        raise TailModelError(f"Weyl model has a pole beyond the computed spectrum (c={c})")
    x = last + 1
    if abs(c) < 0.1:
        terms = [c ** (n - 1) * float(polygamma(n, x)) / math.factorial(n) for n in range(1, 12)]
        return math.fsum(terms) / a
    return float(digamma(x + c) - digamma(x)) / b


def quadratic_tail(a: float, b: float, c: float, last: int) -> float:
    """Exact sum over j > last of 1/(a j^2 + b j + c), via the roots of the quadratic."""
    if a <= 0:
        raise TailModelError(f"Weyl fit has non-positive leading coefficient {a}")
    r1, r2 = np.roots([a, b, c]).astype(complex)
    if max(r1.real, r2.real) >= last + 1 and abs(r1.imag) < 1e-12:
        raise TailModelError("Weyl model has a pole beyond the computed spectrum")
    x = last + 1
    if abs(r1 - r2) < 1e-6 * (1.0 + abs(r1)):
        return float(polygamma(1, x - ((r1 + r2) / 2).real)) / a
    return float(np.real((digamma(x - r2) - digamma(x - r1)) / (a * (r1 - r2))))


def trace_estimate(eigs, k: int, homothety: float = 1.0) -> SpectrumResult:
    """Trace sum_j 1/lambda_j from a finite eigenvalue list plus a Weyl tail.

    ``eigs`` are the eigenvalues of the *normalized* operator (an
    EigenvalueTable is unscaled first) and the result is multiplied by
    ``homothety``.  The tail uses the two-parameter Weyl fit on the last third
    of the list.  The error bound adds three pieces: the change when fitting
    the last half instead, the change when the fit gains a constant term, and
    the propagated per-eigenvalue errors.
    """
    if isinstance(eigs, EigenvalueTable):
        lam = eigs.values * eigs.homothety
        err = eigs.errors * eigs.homothety
    else:
        lam = np.asarray(eigs, dtype=float)
        err = np.zeros_like(lam)
    if lam.size < MIN_TRACE_EIGS:
        raise ValueError(f"need at least {MIN_TRACE_EIGS} eigenvalues, got {lam.size}")
    if np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
        raise ValueError("eigenvalues must be positive and strictly increasing")

    n = lam.size
    third, half = n - n // 3, n - n // 2
    partial = math.fsum(1.0 / lam)
    tail = weyl_tail(*fit_weyl(lam, third), n)
    window_change = abs(tail - weyl_tail(*fit_weyl(lam, half), n))
    model_change = abs(tail - quadratic_tail(*fit_weyl(lam, third, constant=True), n))

    fit_rel_err = float(np.max(err[half:] / lam[half:]))
    propagated = math.fsum(err / lam**2) + tail * fit_rel_err
    bound = window_change + model_change + propagated

    return SpectrumResult(
        k=k,
        eigenvalues=lam / homothety,
        count_converged=n,
        trace_partial=partial * homothety,
        trace_tail_estimate=tail * homothety,
        trace_total=(partial + tail) * homothety,
        error_bound=bound * homothety,
    )


def compute_spectrum(
    profile: MetricProfile,
    k: int,
    count: int | None = None,
    grid_size: int = DEFAULT_GRID,
    homothety: float = 1.0,
) -> tuple[EigenvalueTable, SpectrumResult | None]:
    """Eigenvalues and trace estimate of one L_k; ``count`` defaults to grid/4.

    The trace estimate is None when fewer than ``MIN_TRACE_EIGS`` are requested.
    """
    count = grid_size // 4 if count is None else count
    spec = OperatorSpec(profile, k, grid_size, homothety)
    table = eigenvalues(assemble_operator(spec), count)
    if count < MIN_TRACE_EIGS:
        return table, None
    return table, trace_estimate(table, k, homothety)


def spectra_over_k(profile, ks, count=None, grid_size=DEFAULT_GRID, homothety=1.0, workers=None):
    """Run ``compute_spectrum`` for each k, optionally in threads.

    Results come back ordered as ``ks`` regardless of completion order.
    """
    ks = list(ks)

    def job(k):
        return compute_spectrum(profile, k, count, grid_size, homothety)

    if workers and workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, ks))
    else:
        results = [job(k) for k in ks]
    return dict(zip(ks, results))


def assemble_full_spectrum(
    profile: MetricProfile,
    k_max: int,
    count_per_k: int,
    grid_size: int = DEFAULT_GRID,
    workers=None,
    cluster_rtol: float = CLUSTER_RTOL,
) -> list[tuple[float, int]]:
    """Positive spectrum of the Laplacian, as (eigenvalue, multiplicity) pairs.

    Modes |k| <= k_max contribute; each k != 0 eigenvalue counts twice
    (k and -k share it).  Eigenvalues within ``cluster_rtol`` of their
    neighbour are merged.  The list is cut where the highest-k table ends, so
    multiplicities are complete for every k <= k_max (but omit |k| > k_max).
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    tables = {}
    ks = range(k_max + 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            res = list(pool.map(lambda k: eigenvalues(
                assemble_operator(OperatorSpec(profile, k, grid_size)), count_per_k), ks))
    else:
        res = [eigenvalues(assemble_operator(OperatorSpec(profile, k, grid_size)), count_per_k) for k in ks]
    for k, table in zip(ks, res):
        tables[k] = table

    cutoff = min(t.values[-1] for t in tables.values())
    entries = sorted(
        (float(v), 1 if k == 0 else 2)
        for k, t in tables.items()
        for v in t.values
        if v <= cutoff * (1 + cluster_rtol)
    )
    merged: list[list] = []
    for value, mult in entries:
        if merged and abs(value - merged[-1][2]) <= cluster_rtol * value:
            merged[-1][1] += mult
            merged[-1][2] = value
        else:
            merged.append([value, mult, value])
    return [(v, m) for v, m, _ in merged]


def spectral_traces(params, ks=(1,), grid_size=DEFAULT_GRID, count=None, workers=None):
    """TraceSet of both horizons computed from the numerical spectrum.

    ``count`` defaults to ``default_trace_count(grid_size)``.  Returns the
    TraceSet and the per-horizon ``{k: SpectrumResult}`` maps.
    """
    ks = sorted(set(int(k) for k in ks) | {0})
    count = default_trace_count(grid_size) if count is None else count
    out = {}
    for side, geom in zip(("event", "cosmo"), horizon_geometries(params)):
        res = spectra_over_k(geom.profile, ks, count, grid_size, geom.homothety, workers)
        out[side] = {k: r[1] for k, r in res.items()}
    traces = TraceSet(
        gamma0_event=out["event"][0].trace_total,
        gammak_event={k: r.trace_total for k, r in out["event"].items() if k != 0},
        gamma0_cosmo=out["cosmo"][0].trace_total,
        gammak_cosmo={k: r.trace_total for k, r in out["cosmo"].items() if k != 0},
        provenance=NUMERICAL,
    )
    return traces, out
