"""Real Lambert W function, principal (W0) and lower (W-1) branches.

Both branches start from a series or asymptotic guess and are polished with
Halley's iteration on ``w*exp(w) - x``.
"""

from __future__ import annotations

import math

BRANCH_POINT = -math.exp(-1.0)
MAX_HALLEY_STEPS = 50
_REL_TOL = 1e-15


def _branch_distance(x: float) -> float:
    """``sqrt(2(e*x + 1))``; rounding just below -1/e snaps to the branch point."""
    t = math.e * x + 1.0
    if t < 0.0:
        if t > -1e-15:
            return 0.0
        raise ValueError(f"Lambert W is not real for x={x!r} < -1/e")
    return math.sqrt(2.0 * t)


def _halley(w: float, x: float) -> float:
    for _ in range(MAX_HALLEY_STEPS):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= _REL_TOL * (1.0 + abs(w)):
            break
    return w


def lambert_w0(x: float) -> float:
    """Principal branch ``W0(x)`` for ``x >= -1/e``; the result is ``>= -1``."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("Lambert W of NaN")
    if x == 0.0:
        return 0.0
    if x == math.inf:
        return math.inf
    p = _branch_distance(x)
    if p == 0.0:
        return -1.0
    if x < -0.25:
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 1.0:
        w = x - x * x + 1.5 * x**3
    else:
        l1 = math.log(x)
        l2 = math.log(l1) if l1 > 1.0 else 0.0
        w = l1 - l2 + (l2 / l1 if l1 > 0 else 0.0)
    return max(_halley(w, x), -1.0)


def lambert_wm1(x: float) -> float:
    """Lower branch ``W-1(x)`` for ``-1/e <= x < 0``; the result is ``<= -1``."""
    x = float(x)
    if not x < 0.0:
        raise ValueError(f"W-1 is defined on [-1/e, 0), got {x!r}")
    p = _branch_distance(x)
    if p == 0.0:
        return -1.0
    if x < -0.25:
        q = -p
        w = -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q**3
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    return min(_halley(w, x), -1.0)
