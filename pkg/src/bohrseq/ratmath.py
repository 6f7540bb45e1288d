"""Certified rational bounds for roots, rational powers and base-2 logs.

Everything here returns plain Fractions together with a direction
guarantee (lower / upper bound of the true real value), so certificates
downstream reduce to exact Fraction comparisons.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidInputError


def iroot_floor(n: int, t: int) -> int:
    """floor(n ** (1/t)) for n >= 0, t >= 1."""
    if n < 0 or t < 1:
        raise InvalidInputError("iroot_floor needs n >= 0, t >= 1")
    if n == 0 or t == 1:
        return n if t == 1 else 0
    x = 1 << ((n.bit_length() + t - 1) // t)
    while True:
        y = ((t - 1) * x + n // x ** (t - 1)) // t
        if y >= x:
            break
        x = y
    while x ** t > n:
        x -= 1
    while (x + 1) ** t <= n:
        x += 1
    return x


def root_lower(x, t: int, bits: int = 64) -> Fraction:
    """Rational l with l**t <= x, close to x**(1/t) from below."""
    x = Fraction(x)
    if x < 0:
        raise InvalidInputError("root of a negative value")
    scale = 1 << bits
    m = (x.numerator * scale ** t) // x.denominator
    return Fraction(iroot_floor(m, t), scale)


def root_upper(x, t: int, bits: int = 64) -> Fraction:
    """Rational u with u**t >= x, close to x**(1/t) from above."""
    x = Fraction(x)
    if x < 0:
        raise InvalidInputError("root of a negative value")
    scale = 1 << bits
    num = x.numerator * scale ** t
    m = -((-num) // x.denominator)  # ceil
    r = iroot_floor(m, t)
    if r ** t == m and Fraction(m, scale ** t) == x:
        return Fraction(r, scale)
    return Fraction(r + 1, scale)


def pow_lower(x, r: Fraction, bits: int = 64) -> Fraction:
    """Lower bound of x**r for x >= 0 and rational r > 0."""
    r = Fraction(r)
    if r <= 0:
        raise InvalidInputError("exponent must be positive")
    return root_lower(Fraction(x) ** r.numerator, r.denominator, bits)


def pow_upper(x, r: Fraction, bits: int = 64) -> Fraction:
    """Upper bound of x**r for x >= 0 and rational r > 0."""
    r = Fraction(r)
    if r <= 0:
        raise InvalidInputError("exponent must be positive")
    return root_upper(Fraction(x) ** r.numerator, r.denominator, bits)


def log2_bounds(x, bits: int = 32) -> tuple[Fraction, Fraction]:
    """Rational enclosure of log2(x) for x > 0.

    Interval squaring with outward dyadic rounding; bails out with padded
    slack if the running enclosure ever straddles a power of two.
    """
    x = Fraction(x)
    if x <= 0:
        raise InvalidInputError("log2 of a non-positive value")
    e = x.numerator.bit_length() - x.denominator.bit_length()
    y = x / Fraction(2) ** e
    if y < 1:
        y *= 2
        e -= 1
    # y in [1, 2)
    grid = 1 << (bits + 8)
    ylo = yhi = y
    lo = hi = Fraction(e)
    w = Fraction(1)
    for _ in range(bits):
        w /= 2
        ylo, yhi = ylo * ylo, yhi * yhi
        ylo = Fraction((ylo.numerator * grid) // ylo.denominator, grid)
        yhi = Fraction(-((-yhi.numerator * grid) // yhi.denominator), grid)
        if ylo >= 2:
            lo += w
            hi += w
            ylo /= 2
            yhi /= 2
        elif yhi < 2:
            pass
        else:
            return lo, hi + 2 * w
        if yhi >= 4:  # rounding drift guard
            return lo, hi + 2 * w
    return lo, hi + w


def largest_dyadic_below(x) -> Fraction:
    """Largest power of two <= x (x > 0)."""
    x = Fraction(x)
    if x <= 0:
        raise InvalidInputError("need a positive value")
    j = 0
    while Fraction(1, 1 << (j + 1)) > x and j < 1 << 20:
        j += 1
    if Fraction(1) <= x:
        p = Fraction(1)
        while p * 2 <= x:
            p *= 2
        return p
    while Fraction(1, 1 << j) > x:
        j += 1
    return Fraction(1, 1 << j)
