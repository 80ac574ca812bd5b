"""Constant-curvature trigonometric kernels.

The three kernels sn, cs, tn interpolate between circular (K > 0),
flat (K = 0) and hyperbolic (K < 0) trigonometry:

    sn(s, K) = sin(sqrt(K) s)/sqrt(K) | s       | sinh(sqrt(-K) s)/sqrt(-K)
    cs(s, K) = cos(sqrt(K) s)         | 1       | cosh(sqrt(-K) s)
    tn(s, K) = sqrt(K) tan(sqrt(K) s) | 0       | -sqrt(-K) tanh(sqrt(-K) s)

All three are real-analytic in K at fixed s. tn is the negative logarithmic
derivative of cs, i.e. tn = -cs'/cs = K sn/cs, which is the combination the
model operator uses.

Near K = 0 the closed forms lose digits to cancellation, so for |K s^2|
below W_SERIES each kernel switches to a truncated Taylor series in
w = K s^2. One series covers both signs of K, which also guarantees the
crossover is seamless. With |w| < 1e-4 the first omitted term is below
1e-19 relative, well under double rounding.

For K > 0, cs has zeros at |s| = pi/(2 sqrt(K)); tn (and the model's
potential) blow up there. Evaluation at or beyond the pole raises PoleError
rather than returning a garbage float.
"""

import math

import numpy as np

from .errors import PoleError

W_SERIES = 1e-4


def _check_pole(s, K):
    if K > 0.0:
        half_period = math.pi / (2.0 * math.sqrt(K))
        if abs(s) >= half_period:
            raise PoleError(
                f"kernel pole: |s| = {abs(s)!r} >= pi/(2 sqrt(K)) = {half_period!r} for K = {K!r}"
            )


def sn(s, K):
    """Generalized sine. Solves u'' + K u = 0, u(0) = 0, u'(0) = 1."""
    s = float(s)
    K = float(K)
    w = K * s * s
    if abs(w) < W_SERIES:
        # s (1 - w/6 (1 - w/20 (1 - w/42)))
        return s * (1.0 - w / 6.0 * (1.0 - w / 20.0 * (1.0 - w / 42.0)))
    if K > 0.0:
        r = math.sqrt(K)
        return math.sin(r * s) / r
    r = math.sqrt(-K)
    return math.sinh(r * s) / r


def cs(s, K):
    """Generalized cosine. Solves u'' + K u = 0, u(0) = 1, u'(0) = 0."""
    s = float(s)
    K = float(K)
    w = K * s * s
    if abs(w) < W_SERIES:
        return 1.0 - w / 2.0 * (1.0 - w / 12.0 * (1.0 - w / 30.0))
    if K > 0.0:
        return math.cos(math.sqrt(K) * s)
    return math.cosh(math.sqrt(-K) * s)


def tn(s, K):
    """Generalized tangent, tn = K sn/cs = -(log cs)'.

    Raises PoleError for K > 0 once |s| reaches the cs zero.
    """
    s = float(s)
    K = float(K)
    w = K * s * s
    if abs(w) < W_SERIES:
        # K s (1 + w/3 (1 + 2w/5 (1 + 17w/42)))
        return K * s * (1.0 + w / 3.0 * (1.0 + 2.0 * w / 5.0 * (1.0 + 17.0 * w / 42.0)))
    if K > 0.0:
        _check_pole(s, K)
        r = math.sqrt(K)
        return r * math.tan(r * s)
    r = math.sqrt(-K)
    return -r * math.tanh(r * s)


def cs_array(s, K):
    """Vectorized cs over a float array (K scalar). No pole handling: cs is entire."""
    s = np.asarray(s, dtype=float)
    K = float(K)
    w = K * s * s
    out = np.empty_like(s)
    small = np.abs(w) < W_SERIES
    ws = w[small]
    out[small] = 1.0 - ws / 2.0 * (1.0 - ws / 12.0 * (1.0 - ws / 30.0))
    big = ~small
    if K > 0.0:
        out[big] = np.cos(math.sqrt(K) * s[big])
    elif K < 0.0:
        out[big] = np.cosh(math.sqrt(-K) * s[big])
    else:
        out[big] = 1.0
    return out


def tn_array(s, K):
    """Vectorized tn over a float array (K scalar).

    Raises PoleError if any entry sits at or past a pole (K > 0).
    """
    s = np.asarray(s, dtype=float)
    K = float(K)
    if K > 0.0:
        half_period = math.pi / (2.0 * math.sqrt(K))
        worst = float(np.max(np.abs(s))) if s.size else 0.0
        if worst >= half_period:
            raise PoleError(
                f"kernel pole: max |s| = {worst!r} >= pi/(2 sqrt(K)) = {half_period!r} for K = {K!r}"
            )
    w = K * s * s
    out = np.empty_like(s)
    small = np.abs(w) < W_SERIES
    ws = w[small]
    ss = s[small]
    out[small] = K * ss * (1.0 + ws / 3.0 * (1.0 + 2.0 * ws / 5.0 * (1.0 + 17.0 * ws / 42.0)))
    big = ~small
    if K > 0.0:
        r = math.sqrt(K)
        out[big] = r * np.tan(r * s[big])
    elif K < 0.0:
        r = math.sqrt(-K)
        out[big] = -r * np.tanh(r * s[big])
    else:
        out[big] = 0.0
    return out
