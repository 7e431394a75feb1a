"""Exact zero / rational / transcendental decisions for entropies of rational spectra.

For a spectrum of rationals the entropy in base ``b`` is ``ln a / ln b`` with
``a = prod lambda_i ** -lambda_i``. Both logarithms are written exactly as
rational combinations of prime logarithms, which are linearly independent
over the rationals (unique factorization). The entropy is rational exactly
when the two exponent vectors are parallel; otherwise it is irrational, and
Baker's theorem on linear forms in logarithms upgrades that to
transcendental. Only the irrationality part is certified here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import UnsupportedInputError, ValidationError
from .primes import factorize

PrimeExponentVector = dict[int, Fraction]
Base = Union[str, Fraction]

ZERO = "zero"
RATIONAL = "rational"
TRANSCENDENTAL = "transcendental"


def parse_rational(value) -> Fraction:
    """Exact rational from an int, Fraction or string like ``"1/3"`` or ``"0.25"``."""
    if isinstance(value, float):
        raise ValidationError("floats are not exact; pass a string such as '1/3'")
    try:
        return Fraction(str(value).strip()) if not isinstance(value, (int, Fraction)) else Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational number: {value!r} ({exc})") from None


def _clean(vec: dict[int, Fraction]) -> PrimeExponentVector:
    return {p: e for p, e in sorted(vec.items()) if e != 0}


def prime_log_vector(q) -> PrimeExponentVector:
    """Exponents ``e_p`` with ``ln q = sum e_p ln p``."""
    q = parse_rational(q)
    if q <= 0:
        raise ValidationError(f"logarithm needs a positive rational, got {q}")
    vec: dict[int, Fraction] = {}
    for p, e in factorize(q.numerator).items():
        vec[p] = vec.get(p, Fraction(0)) + e
    for p, e in factorize(q.denominator).items():
        vec[p] = vec.get(p, Fraction(0)) - e
    return _clean(vec)


def validate_spectrum(spectrum: Sequence) -> list[Fraction]:
    lam = [parse_rational(v) for v in spectrum]
    if not lam:
        raise ValidationError("empty spectrum")
    if any(v < 0 for v in lam):
        raise ValidationError("eigenvalues must be non-negative")
    total = sum(lam, Fraction(0))
    if total != 1:
        raise ValidationError(f"eigenvalues sum to {total}, not 1")
    return lam


def entropy_log_vector(spectrum: Sequence) -> PrimeExponentVector:
    """Exponent vector of ``ln a = -sum lambda_i ln lambda_i`` over non-zero eigenvalues."""
    vec: dict[int, Fraction] = {}
    for lam in validate_spectrum(spectrum):
        if lam == 0:
            continue
        for p, e in prime_log_vector(lam).items():
            vec[p] = vec.get(p, Fraction(0)) - lam * e
    return _clean(vec)


def parallel_ratio(u: PrimeExponentVector, v: PrimeExponentVector) -> Fraction | None:
    """The rational ``r`` with ``u = r v`` exactly, or ``None``."""
    if not v:
        return None
    if set(u) != set(v):
        return None
    p0 = next(iter(v))
    r = u[p0] / v[p0]
    return r if all(u[p] == r * v[p] for p in v) else None


def parse_base(base) -> Base:
    if isinstance(base, str):
        text = base.strip().lower()
        if text == "e":
            return "e"
        if any(tok in text for tok in ("sqrt", "^", "**", "root")):
            raise UnsupportedInputError(f"irrational algebraic base {base!r} is not supported")
    b = parse_rational(base)
    if b <= 1:
        raise ValidationError(f"logarithm base must exceed 1, got {b}")
    return b


@dataclass(frozen=True)
class ClassificationResult:
    verdict: str
    value: Fraction | None
    numeric_check: float
    ln_a_vector: PrimeExponentVector
    ln_b_vector: PrimeExponentVector | None
    base: Base

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "base": str(self.base),
            "ln_a_vector": {str(p): str(e) for p, e in self.ln_a_vector.items()},
            "ln_b_vector": None if self.ln_b_vector is None
            else {str(p): str(e) for p, e in self.ln_b_vector.items()},
            "float_entropy": self.numeric_check,
        }
        if self.verdict == RATIONAL:
            out["value"] = str(self.value)
        if self.verdict == TRANSCENDENTAL:
            out["certified"] = "irrational (exact); transcendence by Baker's theorem"
        return out


def float_entropy(spectrum: Sequence, base="e") -> float:
    lam = [float(v) for v in validate_spectrum(spectrum) if v != 0]
    b = parse_base(base)
    nats = 0.0 - math.fsum(v * math.log(v) for v in lam)
    return nats if b == "e" else nats / math.log(b)


def classify(spectrum: Sequence, base="e") -> ClassificationResult:
    """Decide whether the entropy of ``spectrum`` in ``base`` is zero, rational or transcendental."""
    b = parse_base(base)
    u = entropy_log_vector(spectrum)
    numeric = float_entropy(spectrum, b)
    if b == "e":
        verdict = ZERO if not u else TRANSCENDENTAL
        return ClassificationResult(verdict, Fraction(0) if not u else None, numeric, u, None, b)
    v = prime_log_vector(b)
    if not u:
        return ClassificationResult(ZERO, Fraction(0), numeric, u, v, b)
    r = parallel_ratio(u, v)
    if r is None:
        return ClassificationResult(TRANSCENDENTAL, None, numeric, u, v, b)
    return ClassificationResult(RATIONAL, r, numeric, u, v, b)
