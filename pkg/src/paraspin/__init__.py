"""Numerical checks of the Böcherer-type conjecture for paramodular forms of prime level.

The L-side comes from genus-2 curves (point counting, Euler factors, twisted
central values by an approximate functional equation); the form side from
binary quadratic forms and their Gamma0^(p)-orbits.
"""

from .analytic import (
    CentralValueResult,
    InsufficientTermsError,
    afe_weight,
    bessel_k,
    central_value,
    dirichlet_value,
    fit_local_factor,
    split_point_value,
    tail_bound,
)
from .curves import (
    CountTable,
    CurveSpec,
    PointCounts,
    count_points,
    extension_count,
    hecke_from_counts,
    parse_equation,
    sweep_counts,
)
from .gritsenko import JacobiCoefficientTable, LiftMeta, lift_central_value, lift_coefficient, verify_prop1
from .lseries import (
    EulerFactor,
    LSeriesCoefficients,
    SelbergData,
    bad_euler_factor,
    dirichlet_expansion,
    good_euler_factor,
    kronecker_symbol,
    selberg_data,
    twist,
)
from .quadforms import (
    BinaryForm,
    ClassData,
    FourierCoefficientTable,
    OrbitDecomposition,
    average_AD,
    class_data,
    epsilon_T,
    gamma0p_orbits,
    is_equivalent,
    minus_space_vanishing_check,
    reduced_forms,
    solvable,
)
from .verify import ConjectureReport, cmd_verify

__version__ = "0.1.0"
