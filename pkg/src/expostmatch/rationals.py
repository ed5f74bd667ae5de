"""Exact rational arithmetic helpers.

All probability mass in this package is represented exactly.  We use
gmpy2.mpq when available (it is considerably faster for the LP solver)
and fall back to fractions.Fraction otherwise.  Both types interoperate
with ints and with each other through the same operator surface, so the
rest of the package only relies on this module's RAT constructor.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as RAT  # type: ignore
    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    RAT = Fraction
    _HAVE_GMPY2 = False

ZERO = RAT(0)
ONE = RAT(1)


def parse_rational(value):
    """Parse a JSON-level value into an exact rational.

    Accepts ints and strings of the form "a/b" or "a".  Floats and bools
    are rejected: a float in an input file almost always means silent
    precision loss upstream, and we refuse to guess what was meant.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a rational, got boolean {value!r}")
    if isinstance(value, int):
        return RAT(value)
    if isinstance(value, float):
        raise ValueError(
            f"expected an exact rational, got float {value!r}; "
            "write it as a string like \"1/3\""
        )
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                d = int(den)
                if d == 0:
                    raise ValueError
                return RAT(int(num), d)
            return RAT(int(text))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse rational from {value!r}") from None
    raise ValueError(f"cannot parse rational from {value!r}")


def format_rational(q) -> str:
    """Canonical string form: "a/b" in lowest terms, or "a" for integers."""
    return str(RAT(q))


def as_pair(q):
    """Return (numerator, denominator) as Python ints."""
    q = RAT(q)
    return int(q.numerator), int(q.denominator)
