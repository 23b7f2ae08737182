"""Bessel functions of the first kind for integer order and real argument.

Small arguments use the ascending power series. Larger arguments, where the
alternating series loses digits to cancellation, use Miller's downward
recurrence normalized with J0 + 2 * sum J_2k = 1.
"""

from __future__ import annotations

import math

from .errors import NonFiniteArgument

MAX_ORDER = 200
_SERIES_MAX_Z = 4.0


def _series(n: int, z: float) -> float:
    # n >= 0, z >= 0
    half = 0.5 * z
    if half == 0.0:
        # also catches subnormal z, where z / 2 underflows
        return 1.0 if n == 0 else 0.0
    log_lead = n * math.log(half) - math.lgamma(n + 1)
    if log_lead < -745.0:
        return 0.0
    term = math.exp(log_lead)
    q = -half * half
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (n + k))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def _miller(n: int, z: float) -> float:
    # downward recurrence from an order far above both n and z
    start = max(n, int(z)) + 20 + int(math.sqrt(40.0 * max(n, z, 1.0)))
    start += start % 2
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    value = 0.0
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        j_prev = k * two_over_z * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalized J_{k-1}
        if k - 1 == n:
            value = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            value *= 1e-250
            norm *= 1e-250
    norm += j_cur
    return value / norm


def bessel_j(n: int, z: float) -> float:
    """J_n(z) for integer ``n`` with |n| <= 200 and finite real ``z``."""
    if not math.isfinite(z):
        raise NonFiniteArgument(f"Bessel argument must be finite, got {z}")
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise ValueError(f"order {n} outside supported range |n| <= {MAX_ORDER}")
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if z < 0:
        z = -z
        if n % 2:
            sign = -sign
    if z < _SERIES_MAX_Z or 0.25 * z * z < n + 1:
        return sign * _series(n, z)
    return sign * _miller(n, z)


def bessel_j_orders(n_max: int, z: float) -> list[float]:
    """[J_0(z), ..., J_{n_max}(z)]."""
    return [bessel_j(n, z) for n in range(n_max + 1)]
