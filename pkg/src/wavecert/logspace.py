"""Log-space arithmetic for positive scalars.

The certificate pipeline multiplies hundreds of conservative constants; the
iterated ones overflow IEEE doubles long before the final modulus constant is
assembled.  ``LogScalar`` keeps the natural log of a positive value and does
all arithmetic there, so a constant like exp(1e120) is just the float 1e120
plus a tag.  Conversion back to a plain float is available whenever the value
is representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

Number = Union[int, float, "LogScalar"]

# Largest natural log that still converts to a finite double.
_MAX_FINITE_LN = math.log(math.sqrt(1.7976931348623157e308))  # conservative


@dataclass(frozen=True, order=False)
class LogScalar:
    """A positive real number stored as its natural logarithm."""

    ln: float

    @staticmethod
    def of(value: Number) -> "LogScalar":
        if isinstance(value, LogScalar):
            return value
        v = float(value)
        if v < 0.0:
            raise ValueError("LogScalar represents positive values only")
        if v == 0.0:
            return LogScalar(-math.inf)
        return LogScalar(math.log(v))

    # ----- conversions -------------------------------------------------

    def to_float(self) -> float:
        """Plain float value; inf when out of double range."""
        if self.ln == -math.inf:
            return 0.0
        if self.ln > 709.0:
            return math.inf
        return math.exp(self.ln)

    def log10(self) -> float:
        return self.ln / math.log(10.0)

    def mantissa_exponent(self) -> tuple[float, int]:
        """Decimal (mantissa, exponent) pair with mantissa in [1, 10)."""
        if self.ln == -math.inf:
            return 0.0, 0
        l10 = self.log10()
        e = math.floor(l10)
        m = 10.0 ** (l10 - e)
        # guard against 9.999... rounding up to 10
        if m >= 10.0:
            m /= 10.0
            e += 1
        return m, int(e)

    def __float__(self) -> float:
        return self.to_float()

    def __repr__(self) -> str:
        m, e = self.mantissa_exponent()
        return f"LogScalar({m:.6g}e{e:+d})"

    # ----- arithmetic --------------------------------------------------

    def __mul__(self, other: Number) -> "LogScalar":
        o = LogScalar.of(other)
        return LogScalar(self.ln + o.ln)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "LogScalar":
        o = LogScalar.of(other)
        return LogScalar(self.ln - o.ln)

    def __rtruediv__(self, other: Number) -> "LogScalar":
        return LogScalar.of(other) / self

    def __pow__(self, p: float) -> "LogScalar":
        if self.ln == -math.inf and p <= 0.0:
            raise ZeroDivisionError("0 to a nonpositive power")
        return LogScalar(self.ln * p)

    def __add__(self, other: Number) -> "LogScalar":
        o = LogScalar.of(other)
        a, b = self.ln, o.ln
        if a == -math.inf:
            return o
        if b == -math.inf:
            return self
        hi, lo = (a, b) if a >= b else (b, a)
        return LogScalar(hi + math.log1p(math.exp(lo - hi)))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "LogScalar":
        o = LogScalar.of(other)
        if o.ln == -math.inf:
            return self
        if o.ln >= self.ln:
            raise ValueError("LogScalar subtraction would be nonpositive")
        return LogScalar(self.ln + math.log1p(-math.exp(o.ln - self.ln)))

    # ----- comparisons -------------------------------------------------

    def _cmp_ln(self, other: Number) -> tuple[float, float]:
        return self.ln, LogScalar.of(other).ln

    def __lt__(self, other: Number) -> bool:
        a, b = self._cmp_ln(other)
        return a < b

    def __le__(self, other: Number) -> bool:
        a, b = self._cmp_ln(other)
        return a <= b

    def __gt__(self, other: Number) -> bool:
        a, b = self._cmp_ln(other)
        return a > b

    def __ge__(self, other: Number) -> bool:
        a, b = self._cmp_ln(other)
        return a >= b

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float, LogScalar)):
            a, b = self._cmp_ln(other)
            return a == b
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("LogScalar", self.ln))


def log_max(*vals: Number) -> LogScalar:
    out = LogScalar.of(vals[0])
    for v in vals[1:]:
        o = LogScalar.of(v)
        if o.ln > out.ln:
            out = o
    return out


def log_min(*vals: Number) -> LogScalar:
    out = LogScalar.of(vals[0])
    for v in vals[1:]:
        o = LogScalar.of(v)
        if o.ln < out.ln:
            out = o
    return out


def softplus_ln(x: float) -> float:
    """ln(1 + e^x), stable for any float x (branch split at 30)."""
    if x > 30.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def softplus_of_large(x: LogScalar) -> LogScalar:
    """log-space value of ln(1 + e^X) where X is the (positive) LogScalar x.

    For X > 40 the value equals X to double precision, so the result simply
    reuses x's log.  Smaller X converts through floats exactly.
    """
    xv = x.to_float()
    if xv > 40.0:
        return LogScalar(x.ln)
    return LogScalar.of(softplus_ln(xv))
