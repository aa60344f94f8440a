"""Special functions behind the delivery-probability expressions.

The two interference groups (base stations caching the requested content and
those not caching it) contribute through two constants built from the Gauss
hypergeometric function and the Beta function:

    H(tau, beta) = 2 tau / (beta - 2) * 2F1(1, 1 - 2/beta; 2 - 2/beta; -tau)
    D(tau, beta) = (2 / beta) * tau^(2/beta) * B(2/beta, 1 - 2/beta)
    T(tau, beta) = H - D + 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass

MAX_SERIES_TERMS = 10000
SERIES_REL_TOL = 1e-16


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


def gauss_2f1_neg_arg(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for z <= 0.

    The raw power series diverges for z < -1, so the argument is first mapped
    into (0, 1) by the Pfaff transformation

        2F1(a, b; c; z) = (1 - z)^(-a) * 2F1(a, c - b; c; z / (z - 1)),

    after which the series is summed until the term drops below 1e-16
    relative (capped at 10000 terms).
    """
    if z > 0:
        raise ValueError(f"only z <= 0 is supported, got z={z}")
    if c <= 0 and c == int(c):
        raise ValueError(f"c must not be a nonpositive integer, got c={c}")
    if z == 0:
        return 1.0
    w = z / (z - 1.0)          # in (0, 1) for z < 0
    b2 = c - b
    term = 1.0
    total = 1.0
    for n in range(MAX_SERIES_TERMS):
        term *= (a + n) * (b2 + n) / ((c + n) * (n + 1.0)) * w
        total += term
        if abs(term) <= SERIES_REL_TOL * abs(total):
            return (1.0 - z) ** (-a) * total
    raise NumericalError(
        f"2F1 series did not converge after {MAX_SERIES_TERMS} terms "
        f"(a={a}, b={b}, c={c}, z={z}, transformed argument w={w}, "
        f"last relative term {abs(term) / abs(total):.3e})")


def beta_fn(x: float, y: float) -> float:
    """Beta function B(x, y) for x, y > 0, computed via log-gamma."""
    if x <= 0 or y <= 0:
        raise ValueError(f"beta_fn arguments must be positive, got x={x}, y={y}")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


@dataclass(frozen=True)
class ChannelConstants:
    """H, D and T = H - D + 1 for a given SINR threshold and path loss."""

    H: float
    D: float
    T: float
    tau: float   # linear SINR threshold
    beta: float  # path loss exponent


def channel_constants(tau: float, beta: float) -> ChannelConstants:
    """Evaluate H, D, T for tau > 0 and beta > 2."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not beta > 2:
        raise ValueError(f"beta must be > 2, got {beta}")
    h = 2.0 * tau / (beta - 2.0) * gauss_2f1_neg_arg(
        1.0, 1.0 - 2.0 / beta, 2.0 - 2.0 / beta, -tau)
    d = 2.0 / beta * tau ** (2.0 / beta) * beta_fn(2.0 / beta, 1.0 - 2.0 / beta)
    return ChannelConstants(H=h, D=d, T=h - d + 1.0, tau=tau, beta=beta)
