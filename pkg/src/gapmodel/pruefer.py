"""Angle-radius constructions for the half-interval Robin problem.

Everything here revolves around the scalar equation

    phi'' = -(pi^2/D^2 + c / cs_K^2(z)) phi        on [0, D/2],

written in polar form phi = r cos q, phi' = r sin q.  The angle q obeys

    q' = -(c/cs_K^2 + pi^2/D^2) cos^2 q - sin^2 q,

which stays smooth where the log-derivative psi = tan q = (log phi)' blows
up, so q is what gets integrated; psi and phi are reconstructed afterward.

The Robin constant c_k is the unique c < 0 with q(D/2, 0, c) = -pi/2 +
arctan(1/k); it yields the positive eigenfunction with phi'(0) = 0,
phi(D/2) = 1/k, phi'(D/2) = -1.  Left and right log-derivative solutions
around c_k combine into the supersolution min{psi^L_{c_k-s}, psi^R_{k,c_k+s}}
used as comparison data elsewhere.

The angle never enters this module's equations through n; the dimension is
carried in params only so results can be labeled consistently.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BlowupError, BracketError, CoverageError, DomainError, HypothesisError
from .kernels import cs
from .model import GridFunction, ModelParams, validate

_ODE_TOL = 1e-13
_ANGLE_GUARD = 1e-3  # samples of tan q only where |q| < pi/2 - guard
_HALF_PI = math.pi / 2


def _as_params(params):
    return params if isinstance(params, ModelParams) else ModelParams(*params)


@dataclass(frozen=True)
class PruferTrajectory:
    """Angle-radius solution with its dense interpolant."""

    z: np.ndarray
    q: np.ndarray
    r: np.ndarray
    q0: float
    c: float
    params: ModelParams
    _sol: object = field(repr=False, compare=False, default=None)

    def q_at(self, z):
        return self._sol.sol(z)[0]

    def r_at(self, z):
        return np.exp(self._sol.sol(z)[1])

    def psi_at(self, z):
        return np.tan(self._sol.sol(z)[0])

    def phi_at(self, z):
        out = self._sol.sol(z)
        return np.exp(out[1]) * np.cos(out[0])


def _angle_rhs(c, params):
    K, D = params.K, params.D
    pi2_over_D2 = math.pi**2 / D**2

    def rhs(z, y):
        q = y[0]
        w = c / cs(z, K) ** 2 + pi2_over_D2
        cq, sq = math.cos(q), math.sin(q)
        dq = -w * cq * cq - sq * sq
        # log r instead of r keeps the radius positive by construction
        dlogr = (1.0 - w) * sq * cq
        return (dq, dlogr)

    return rhs


def integrate_q(q0, c, params, n_samples=2001):
    """Integrate the angle-radius system from z=0 with q(0)=q0, r(0)=1."""
    params = _as_params(params)
    validate(params)
    half = params.half
    sol = solve_ivp(
        _angle_rhs(c, params),
        (0.0, half),
        [float(q0), 0.0],
        method="DOP853",
        rtol=_ODE_TOL,
        atol=_ODE_TOL,
        dense_output=True,
    )
    if not sol.success:
        raise DomainError(f"angle integration failed: {sol.message}")
    z = np.linspace(0.0, half, n_samples)
    vals = sol.sol(z)
    return PruferTrajectory(
        z=z, q=vals[0], r=np.exp(vals[1]), q0=float(q0), c=float(c),
        params=params, _sol=sol,
    )


@dataclass(frozen=True)
class RiccatiSolution:
    """Branch of psi = (log phi)' on its interval of existence.

    side is "left" (psi(0) = 0, integrated forward) or "right"
    (psi(D/2) = -k, integrated backward).  Samples cover the part of the
    interval where |q| < pi/2 - 1e-3; the dense angle interpolant is kept
    for evaluation between samples.
    """

    side: str
    c: float
    k: float
    z: np.ndarray
    psi: np.ndarray
    interval: tuple
    params: ModelParams
    _sol: object = field(repr=False, compare=False, default=None)

    def psi_at(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.interval
        if np.any(z < lo - 1e-12) or np.any(z > hi + 1e-12):
            raise DomainError(f"evaluation outside existence interval {self.interval}")
        return np.tan(self._sol.sol(z)[0])

    def q_at(self, z):
        return self._sol.sol(z)[0]

    def residual_max(self, band=3.0, h=None):
        """Largest defect in psi' + psi^2 + pi^2/D^2 + c/cs^2 = 0.

        The derivative is measured with a fourth-order central difference of
        the reconstructed psi, on sample points where |psi| <= band (outside
        that band any finite-difference derivative of tan is numerically
        meaningless, which would test the measurement rather than the
        solution).
        """
        D, K = self.params.D, self.params.K
        if h is None:
            h = 2.5e-4 * D
        lo, hi = self.interval
        mask = np.abs(self.psi) <= band
        zs = self.z[mask]
        zs = zs[(zs >= lo + 2 * h) & (zs <= hi - 2 * h)]
        if zs.size == 0:
            return 0.0
        d = (
            self.psi_at(zs - 2 * h)
            - 8.0 * self.psi_at(zs - h)
            + 8.0 * self.psi_at(zs + h)
            - self.psi_at(zs + 2 * h)
        ) / (12.0 * h)
        w = np.array([self.c / cs(z, K) ** 2 for z in zs])
        resid = d + self.psi_at(zs) ** 2 + math.pi**2 / D**2 + w
        return float(np.max(np.abs(resid)))


def _sample_band(sol, lo, hi, n_samples):
    """Sample points where |q| stays clear of pi/2, so tan q is well resolved."""
    zs = np.linspace(lo, hi, 8 * n_samples)
    qs = sol.sol(zs)[0]
    kept = zs[np.abs(qs) < _HALF_PI - _ANGLE_GUARD]
    if kept.size == 0:
        return kept
    step = max(1, kept.size // n_samples)
    out = kept[::step]
    if out[-1] != kept[-1]:
        out = np.append(out, kept[-1])
    return out


def psi_left(c, params, allow_partial=False, n_samples=2001):
    """Forward log-derivative branch with psi(0) = 0.

    Raises BlowupError if q reaches -pi/2 strictly inside [0, D/2) (the
    finite Riccati solution ceases there); pass allow_partial=True to get
    the truncated branch instead.  The exception carries the location and
    the partial trajectory.
    """
    params = _as_params(params)
    validate(params)
    half = params.half

    def hit_bottom(z, y):
        return y[0] + _HALF_PI

    hit_bottom.terminal = True
    hit_bottom.direction = -1.0

    sol = solve_ivp(
        _angle_rhs(c, params), (0.0, half), [0.0, 0.0],
        method="DOP853", rtol=_ODE_TOL, atol=_ODE_TOL,
        dense_output=True, events=hit_bottom,
    )
    if not sol.success and sol.status != 1:
        raise DomainError(f"angle integration failed: {sol.message}")
    z_end = half
    blew = sol.status == 1 and sol.t_events[0].size > 0
    if blew:
        z_end = float(sol.t_events[0][0])
    if blew and z_end < half * (1.0 - 1e-9) and not allow_partial:
        zg = np.linspace(0.0, z_end, n_samples)
        vals = sol.sol(zg)
        raise BlowupError(
            f"left branch ceases at z = {z_end:.6g} (angle reached -pi/2)",
            z=z_end,
            partial=PruferTrajectory(z=zg, q=vals[0], r=np.exp(vals[1]),
                                     q0=0.0, c=float(c), params=params, _sol=sol),
        )
    zs = _sample_band(sol, 0.0, z_end, n_samples)
    return RiccatiSolution(
        side="left", c=float(c), k=float("nan"),
        z=zs, psi=np.tan(sol.sol(zs)[0]), interval=(0.0, z_end),
        params=params, _sol=sol,
    )


def psi_right(k, c, params, allow_partial=False, n_samples=2001):
    """Backward log-derivative branch with psi(D/2) = -k.

    Integrated from z = D/2 toward 0; if the angle reaches +pi/2 at some
    z_minus > 0 the branch exists only on (z_minus, D/2] and BlowupError is
    raised unless allow_partial is set.
    """
    params = _as_params(params)
    validate(params)
    if not (k > 0):
        raise DomainError(f"right-boundary slope k must be positive, got {k}")
    half = params.half

    def hit_top(z, y):
        return y[0] - _HALF_PI

    hit_top.terminal = True
    hit_top.direction = 1.0

    sol = solve_ivp(
        _angle_rhs(c, params), (half, 0.0), [-math.atan(float(k)), 0.0],
        method="DOP853", rtol=_ODE_TOL, atol=_ODE_TOL,
        dense_output=True, events=hit_top,
    )
    if not sol.success and sol.status != 1:
        raise DomainError(f"angle integration failed: {sol.message}")
    z_start = 0.0
    blew = sol.status == 1 and sol.t_events[0].size > 0
    if blew:
        z_start = float(sol.t_events[0][0])
    if blew and z_start > 1e-12 and not allow_partial:
        zs = _sample_band(sol, z_start, half, n_samples)
        raise BlowupError(
            f"right branch ceases at z = {z_start:.6g} (angle reached +pi/2)",
            z=z_start,
            partial=RiccatiSolution(side="right", c=float(c), k=float(k),
                                    z=zs, psi=np.tan(sol.sol(zs)[0]),
                                    interval=(z_start, half), params=params, _sol=sol),
        )
    zs = _sample_band(sol, z_start, half, n_samples)
    return RiccatiSolution(
        side="right", c=float(c), k=float(k),
        z=zs, psi=np.tan(sol.sol(zs)[0]), interval=(z_start, half),
        params=params, _sol=sol,
    )


def _angle_at_right_end(c, params):
    traj = integrate_q(0.0, c, params, n_samples=2)
    return traj.q_at(params.half)


def find_ck(k, params, angle_tol=1e-11):
    """Robin constant: the c < 0 with q(D/2, 0, c) = -pi/2 + arctan(1/k).

    Strict monotonicity of the end angle in c turns this into a bracketed
    root-find; the bracket [-4 pi^2/D^2, 0] is doubled up to 60 times if
    needed.  BracketError means no sign change was found, i.e. k sits below
    the existence threshold for these parameters.
    """
    params = _as_params(params)
    validate(params)
    if not (k > 0):
        raise DomainError(f"k must be positive, got {k}")
    target = -_HALF_PI + math.atan(1.0 / float(k))

    def g(c):
        return _angle_at_right_end(c, params) - target

    g_hi = g(0.0)
    if g_hi == 0.0:
        return 0.0
    c_lo = -4.0 * math.pi**2 / params.D**2
    g_lo = g(c_lo)
    doublings = 0
    while g_lo * g_hi > 0 and doublings < 60:
        c_lo *= 2.0
        g_lo = g(c_lo)
        doublings += 1
    if g_lo * g_hi > 0:
        raise BracketError(
            f"no sign change for c in [{c_lo:.6g}, 0] after {doublings} doublings; "
            f"k = {k} appears to lie below the existence threshold"
        )
    c = brentq(g, c_lo, 0.0, xtol=1e-13 * max(1.0, abs(c_lo)), rtol=8.9e-16)
    # polish the angle itself: a couple of secant steps push the end-angle
    # defect to the integration noise floor, which keeps the right-end
    # boundary conditions sharp even for large k
    gc = g(c)
    dc = 1e-9 * max(1.0, abs(c))
    for _ in range(8):
        if abs(gc) <= min(angle_tol, 1e-12):
            break
        g2 = g(c + dc)
        slope = (g2 - gc) / dc
        if slope == 0.0:
            break
        step = -gc / slope
        c += step
        gc = g(c)
        dc = max(abs(step) * 0.1, 1e-15 * max(1.0, abs(c)))
    if abs(gc) > angle_tol:
        raise BracketError(
            f"end-angle defect {abs(gc):.3e} exceeds {angle_tol} after polishing"
        )
    return float(c)


def robin_eigenfunction(k, params, n_samples=2001, return_trajectory=False):
    """Positive eigenfunction with phi'(0)=0, phi(D/2)=1/k, phi'(D/2)=-1.

    Reconstructed from the angle-radius trajectory at c_k and rescaled so
    phi(D/2) = 1/k exactly; the other two conditions then hold up to the
    root-finding and integration tolerances.
    """
    params = _as_params(params)
    ck = find_ck(k, params)
    traj = integrate_q(0.0, ck, params, n_samples=n_samples)
    phi = traj.r * np.cos(traj.q)
    scale = (1.0 / float(k)) / phi[-1]
    gf = GridFunction(z=traj.z, values=phi * scale)
    if return_trajectory:
        return gf, traj, ck
    return gf


def robin_boundary_report(k, params):
    """Measured defects of the three boundary conditions plus positivity."""
    params = _as_params(params)
    gf, traj, ck = robin_eigenfunction(k, params, return_trajectory=True)
    half = params.half
    k = float(k)
    scale = (1.0 / k) / traj.phi_at(half)
    phi_end = traj.phi_at(half) * scale
    q_end = traj.q_at(half)
    dphi_end = phi_end * math.tan(q_end)
    dphi_0 = traj.phi_at(0.0) * scale * math.tan(traj.q_at(0.0))
    return {
        "c_k": ck,
        "phi_right_defect": abs(phi_end - 1.0 / k),
        "dphi_right_defect": abs(dphi_end + 1.0),
        "dphi_left_defect": abs(dphi_0),
        "positive": bool(np.all(gf.values > 0)),
    }


def threshold_s(k, params):
    """Smallest s beyond which both decay rates below are real.

    Equals max(c_k + pi^2/D^2, -c_k - pi^2/D^2); the first entry is the
    positive one since c_k > -pi^2/D^2.
    """
    params = _as_params(params)
    ck = find_ck(k, params)
    base = ck + math.pi**2 / params.D**2
    return max(base, -base)


def supersolution(k, s, params, n_samples=2001, ck=None, z=None):
    """Pointwise minimum of the two shifted branches around c_k.

    psi_plus = min{psi^L at c_k - s, psi^R at c_k + s}.  The left branch
    exists on all of [0, D/2] for s >= 0; where the right branch has ceased
    to exist (backward blowup to +infinity) the minimum is the left branch.
    At s = 0 both branches coincide with (log phi)' of the Robin
    eigenfunction.  Pass z to sample on a caller-supplied grid instead of a
    uniform one.
    """
    params = _as_params(params)
    if s < 0:
        raise DomainError(f"shift s must be nonnegative, got {s}")
    if ck is None:
        ck = find_ck(k, params)
    left = psi_left(ck - s, params, allow_partial=True)
    right = psi_right(k, ck + s, params, allow_partial=True)
    half = params.half
    if left.interval[0] > 0.0 or max(left.interval[1], right.interval[1]) < half:
        raise CoverageError(
            f"existence intervals {left.interval} and {right.interval} "
            f"do not cover [0, {half}]"
        )
    if left.interval[1] < half * (1.0 - 1e-9) and right.interval[0] > left.interval[1]:
        raise CoverageError(
            f"gap between left branch end {left.interval[1]:.6g} and right "
            f"branch start {right.interval[0]:.6g}"
        )
    if z is None:
        z = np.linspace(0.0, half, n_samples)
    else:
        z = np.asarray(z, dtype=float)
        if z[0] < 0.0 or z[-1] > half * (1.0 + 1e-12):
            raise DomainError("supersolution grid must lie inside [0, D/2]")
    vals = np.empty_like(z)
    z_minus = right.interval[0]
    left_only = z <= z_minus
    vals[left_only] = left.psi_at(z[left_only])
    both = ~left_only
    vals[both] = np.minimum(left.psi_at(z[both]), right.psi_at(z[both]))
    return GridFunction(z=z, values=vals)


# -- explicit comparison envelopes -------------------------------------------


def _require_nonneg_K(params, what):
    if params.K < 0:
        raise HypothesisError(f"{what} requires K >= 0 (cs_K <= 1 is used)")


def upper_bound_left(c, params):
    """Envelope psi^L_c(z) <= lam_plus tanh(lam_plus z).

    The rate uses the supremum of -c/cs^2 - pi^2/D^2 over the interval
    (attained at z = D/2 for c < 0, at z = 0 otherwise), which is what the
    comparison argument actually needs.
    """
    params = _as_params(params)
    _require_nonneg_K(params, "left envelope")
    half = params.half
    cs_end = cs(half, params.K)
    worst = max(-c - math.pi**2 / params.D**2,
                -c / cs_end**2 - math.pi**2 / params.D**2, 0.0)
    lam = math.sqrt(worst)

    def bound(z):
        return lam * np.tanh(lam * np.asarray(z, dtype=float))

    return lam, bound


def upper_bound_right(k, c, params):
    """Envelope for the backward branch, valid where its denominator is positive.

    Returns (lam_minus, callable, z_from): psi^R_{k,c}(z) <= bound(z) for
    z > z_from, where bound is the fractional-linear expression in
    tan(lam_minus (D/2 - z)) pinned to -k at the right end.
    """
    params = _as_params(params)
    _require_nonneg_K(params, "right envelope")
    k = float(k)
    half = params.half
    cs_end = cs(half, params.K)
    lam2 = math.pi**2 / params.D**2 + max(c, c / cs_end**2)
    if lam2 <= 0:
        raise HypothesisError(f"rate lam_minus^2 = {lam2:.6g} is not positive")
    lam = math.sqrt(lam2)
    z_from = half - (_HALF_PI + math.atan(k / lam)) / lam

    def bound(z):
        t = np.tan(lam * (half - np.asarray(z, dtype=float)))
        return (lam * t - k) / (1.0 + (k / lam) * t)

    return lam, bound, z_from


def lower_bound_functions(k, s, params, ck=None):
    """Floors for the two shifted branches once s clears the threshold.

    For s > max(c_k + pi^2/D^2, -c_k - pi^2/D^2) both rates are real:

      lam_plus~  = sqrt(s - c_k - pi^2/D^2):  psi^L_{c_k-s} >= lam~ tanh(lam~ z)
      lam_minus~ = sqrt(s + c_k + pi^2/D^2):  psi^R >= the fractional-linear
                   floor in tan(lam~ (D/2 - z)) on (z_from, D/2]

    The left floor's validity is reported empirically by callers; the
    comparison argument itself gives it on the whole interval.
    """
    params = _as_params(params)
    _require_nonneg_K(params, "branch floors")
    if ck is None:
        ck = find_ck(k, params)
    base = ck + math.pi**2 / params.D**2
    thr = max(base, -base)
    if not (s > thr):
        raise HypothesisError(f"s = {s} does not exceed the threshold {thr:.6g}")
    k = float(k)
    half = params.half
    lam_p = math.sqrt(s - base)
    lam_m = math.sqrt(s + base)
    z_from = half - (_HALF_PI + math.atan(k / lam_m)) / lam_m

    def left_floor(z):
        return lam_p * np.tanh(lam_p * np.asarray(z, dtype=float))

    def right_floor(z):
        t = np.tan(lam_m * (half - np.asarray(z, dtype=float)))
        return (lam_m * t - k) / (1.0 + (k / lam_m) * t)

    return {
        "threshold": thr,
        "lambda_plus": lam_p,
        "lambda_minus": lam_m,
        "left_floor": left_floor,
        "right_floor": right_floor,
        "right_valid_from": z_from,
        "c_k": ck,
    }
