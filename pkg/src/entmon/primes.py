"""Integer factorization for inputs up to 64 bits.

Trial division by small primes, then Brent's variant of Pollard rho with a
deterministic Miller-Rabin test (the witness set below is exact for
``n < 3.3e24``, which covers the 64-bit cap).
"""

from __future__ import annotations

import math
from collections import Counter

from .errors import UnsupportedInputError, ValidationError

MAX_FACTOR_INPUT = 2**64
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:13]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int) -> int:
    """A non-trivial factor of the odd composite ``n``."""
    for c in range(1, n):
        y, r, q, g = 2, 1, 1, 1
        m = 128
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard rho failed on {n}")  # pragma: no cover


def factorize(n: int) -> Counter[int]:
    """Prime factorization of ``1 <= n <= 2**64`` as ``Counter({prime: exponent})``."""
    if n < 1:
        raise ValidationError(f"can only factor positive integers, got {n}")
    if n > MAX_FACTOR_INPUT:
        raise UnsupportedInputError(f"{n} exceeds the 2**64 factorization cap")
    out: Counter[int] = Counter()
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] += 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] += 1
            continue
        f = _brent(m)
        stack.extend((f, m // f))
    return out
