"""Closed-form eigenvalue bounds for positive curvature.

Upper bounds come from the Rayleigh quotient of the normal form with the
flat-model test functions cos(pi x/D) and sin(2 pi x/D); the potential term
reduces to a single quadrature of sec^2(sqrt(K) x) against the squared test
function.  Lower bounds come from the comparison sec^2 >= 1, which needs
n >= 3 to keep the inequality pointing the right way.

For n = 2 there are explicit quartic-in-K upper bounds obtained by feeding
the minorant sec^2 t >= 1 + t^2 + 2 t^4 / 3 into the same Rayleigh quotient
(the sign of (n-1)(n-3) flips the direction, so a minorant of the integrand
majorizes the quotient).
"""

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .errors import HypothesisError, OrderingViolation
from .model import ModelParams, validate


def _as_params(params):
    return params if isinstance(params, ModelParams) else ModelParams(*params)


@dataclass(frozen=True)
class BoundReport:
    lower: float
    upper: float
    target: int
    lower_method: str
    upper_method: str


def _require(params, index, need_n3=False):
    validate(params)
    if index not in (1, 2):
        raise HypothesisError(f"index must be 1 or 2, got {index}")
    if not (params.K > 0):
        raise HypothesisError(f"bounds require K > 0, got K = {params.K}")
    if need_n3 and params.n < 3:
        raise HypothesisError(
            f"lower bounds require n >= 3 (sec^2 >= 1 comparison), got n = {params.n}"
        )


def lambda_lower(params, index):
    """Comparison lower bound (index pi/D)^2 - (n-1)K/2, valid for K>0, n>=3."""
    params = _as_params(params)
    _require(params, index, need_n3=True)
    return (index * math.pi / params.D) ** 2 - (params.n - 1) * params.K / 2.0


def lambda_upper_rayleigh(params, index):
    """Rayleigh upper bound with the flat test function of the given index.

    (index pi/D)^2 - (n-1)^2 K/4 + ((n-1)(n-3) K/D) * I, where I integrates
    sec^2(sqrt(K) x) against cos^2(pi x/D) (index 1) or sin^2(2 pi x/D)
    (index 2) over [0, D/2], by adaptive quadrature to 1e-12 absolute.
    """
    params = _as_params(params)
    _require(params, index)
    n, K, D = params.n, params.K, params.D
    rK = math.sqrt(K)
    if index == 1:
        weight = lambda x: math.cos(math.pi * x / D) ** 2
    else:
        weight = lambda x: math.sin(2 * math.pi * x / D) ** 2
    integrand = lambda x: weight(x) / math.cos(rK * x) ** 2
    val, est = quad(integrand, 0.0, D / 2, epsabs=1e-12, epsrel=1e-12, limit=200)
    return (
        (index * math.pi / D) ** 2
        - (n - 1) ** 2 * K / 4.0
        + (n - 1) * (n - 3) * K / D * val
    )


def bound_report(params, index):
    """Two-sided report for K > 0, n >= 3; raises if the sandwich inverts."""
    params = _as_params(params)
    lo = lambda_lower(params, index)
    hi = lambda_upper_rayleigh(params, index)
    if lo > hi:
        raise OrderingViolation(
            f"lower bound {lo:.12g} exceeds upper bound {hi:.12g} "
            f"for index {index} at n={params.n}, K={params.K}, D={params.D}"
        )
    return BoundReport(lower=lo, upper=hi, target=index,
                       lower_method="comparison", upper_method="rayleigh")


def _n2_upper_1(K, D):
    pi2 = math.pi**2
    return (
        pi2 / D**2
        - K / 2.0
        - (pi2 - 6.0) * D**2 * K**2 / (48.0 * pi2)
        - (120.0 - 20.0 * pi2 + pi2**2) * D**4 * K**3 / (480.0 * pi2**2)
        - 17.0
        * (pi2**3 - 42.0 * pi2**2 + 840.0 * pi2 - 5040.0)
        * D**6
        * K**4
        / (80640.0 * pi2**3)
    )


def _n2_upper_2(K, D):
    pi2 = math.pi**2
    return (
        4.0 * pi2 / D**2
        - K / 2.0
        - (pi2 - 1.5) * D**2 * K**2 / (48.0 * pi2)
        - (7.5 - 5.0 * pi2 + pi2**2) * D**4 * K**3 / (480.0 * pi2**2)
        - 17.0
        * (4.0 * pi2**3 - 42.0 * pi2**2 + 210.0 * pi2 - 315.0)
        * D**6
        * K**4
        / (322560.0 * pi2**3)
    )


def explicit_n2_bounds(params):
    """Quartic-in-K upper bounds for both eigenvalues at n = 2.

    Returns a pair of BoundReports (target 1 and target 2).  No closed-form
    lower bound exists on this side of the dichotomy, so the lower fields
    are -inf with a method tag saying why.
    """
    params = _as_params(params)
    validate(params)
    if params.n != 2:
        raise HypothesisError(f"explicit quartic bounds are the n = 2 case, got n = {params.n}")
    if not (params.K > 0):
        raise HypothesisError(f"bounds require K > 0, got K = {params.K}")
    K, D = params.K, params.D
    no_lower = "none (comparison argument needs n >= 3)"
    return (
        BoundReport(lower=-math.inf, upper=_n2_upper_1(K, D), target=1,
                    lower_method=no_lower, upper_method="quartic minorant"),
        BoundReport(lower=-math.inf, upper=_n2_upper_2(K, D), target=2,
                    lower_method=no_lower, upper_method="quartic minorant"),
    )
