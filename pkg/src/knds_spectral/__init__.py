"""Forward and inverse spectral toolkit for Kerr-Newman-de Sitter horizons.

Forward: parameters (m, a, Q, Lambda) -> horizon radii -> horizon metrics ->
Green's operator traces, both in closed form and from a numerical spectrum.
Inverse: the invariant and k = 1 traces of the event and cosmological
horizons -> all four parameters.
"""

from .errors import (
    ConvergenceError,
    DegenerateTraces,
    DiscretizationError,
    DomainError,
    InconsistentTraces,
    KNdSError,
    NegativeRadiusSquared,
    NonPositiveLambda,
    NotAHorizon,
    OutOfRange,
    QuadratureFailure,
    ReconstructionError,
    RegimeError,
    SingularSystem,
    TailModelError,
    ZeroModeError,
)
from .geometry import (
    HorizonGeometry,
    MetricProfile,
    area,
    derive_geometry,
    gauss_bonnet_integral,
    gauss_curvature,
    profile_eval,
)
from .inverse import (
    ReconstructionResult,
    invert_h,
    lambda_from_traces,
    mass_charge_from_radii,
    radii_from_traces,
    reconstruct,
    spin_sq_from_traces,
)
from .spacetime import HorizonSet, RegimeReport, SpacetimeParams, delta_r, find_horizons, validate_regime
from .spectrum import (
    DiscreteOperator,
    EigenvalueTable,
    OperatorSpec,
    SpectrumResult,
    assemble_full_spectrum,
    assemble_operator,
    compute_spectrum,
    eigenvalues,
    spectral_traces,
    trace_estimate,
)
from .traces import (
    TraceSet,
    forward_traces,
    g_of_xi,
    gamma0_closed,
    gamma0_integral,
    gammak_closed,
    h_of_xi,
)

__version__ = "0.1.0"
