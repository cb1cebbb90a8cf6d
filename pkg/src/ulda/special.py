"""Regularized incomplete beta function and the Beta/F distribution layer.

The continued fraction follows the classical Lentz evaluation with the
symmetry split at x = (a+1)/(a+b+2); the quantile inverts the CDF with a
bracketed bisection/secant hybrid.  Everything here is scalar float math.
"""

import math

__all__ = [
    "log_beta",
    "beta_cdf",
    "beta_quantile",
    "f_cdf",
    "f_sf",
    "f_quantile",
]

_MACHEP = 2.220446049250313e-16
_TINY = 1e-300
_CF_MAX_ITER = 300


def log_beta(a: float, b: float) -> float:
    """log B(a, b) via log-gamma."""
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(x: float, a: float, b: float) -> float:
    # Continued fraction for I_x(a,b) (modified Lentz); converges fast for
    # x < (a+1)/(a+b+2).
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _MACHEP:
            break
    return h


def beta_cdf(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"beta_cdf requires a, b > 0, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"beta_cdf requires x in [0, 1], got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(x, a, b) / a
    return 1.0 - front * _beta_cf(1.0 - x, b, a) / b


def beta_quantile(p: float, a: float, b: float, tol: float = 1e-10,
                  max_iter: int = 200) -> float:
    """Invert ``beta_cdf``: the t with |I_t(a,b) - p| <= tol.

    Bisection on the bracket [0, 1] seeded at the distribution mean, with
    secant proposals whenever they stay inside the bracket.  Iterates
    until the bracket itself is resolved (not just the CDF residual), so
    the result round-trips through ``beta_cdf`` even in flat tails.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"beta_quantile requires p in (0, 1), got p={p}")
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"beta_quantile requires a, b > 0, got a={a}, b={b}")
    lo, hi = 0.0, 1.0
    x = a / (a + b)
    x_prev, f_prev = None, None
    stall = 0
    for _ in range(max_iter):
        f = beta_cdf(x, a, b) - p
        if f == 0.0 or (abs(f) <= tol and hi - lo <= 1e-10):
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        width = hi - lo
        if width <= 4.0 * _MACHEP * max(hi, _TINY):
            return 0.5 * (lo + hi)
        x_next = None
        if stall < 3 and f_prev is not None and f != f_prev:
            secant = x - f * (x - x_prev) / (f - f_prev)
            if lo < secant < hi:
                x_next = secant
                # repeated creeping toward one endpoint: fall back to bisection
                stall = stall + 1 if min(secant - lo, hi - secant) < 0.01 * width else 0
        if x_next is None:
            x_next = 0.5 * (lo + hi)
            stall = 0
        x_prev, f_prev = x, f
        x = x_next
    return x


def f_cdf(x: float, d1: float, d2: float) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom."""
    if d1 <= 0.0 or d2 <= 0.0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return beta_cdf(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2)


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail P(F > x); computed from the complementary beta argument."""
    if d1 <= 0.0 or d2 <= 0.0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return beta_cdf(d2 / (d2 + d1 * x), 0.5 * d2, 0.5 * d1)


def f_quantile(p: float, d1: float, d2: float) -> float:
    """Invert the F CDF through the beta quantile."""
    y = beta_quantile(p, 0.5 * d1, 0.5 * d2)
    if y >= 1.0:
        return math.inf
    return d2 * y / (d1 * (1.0 - y))
