"""Wire formats: rationals as "p/q" strings, points as [x, y] or "O".

Shared by the CLI for curve/point/spec documents, sequence term records
and pipeline reports.
"""

from __future__ import annotations

from fractions import Fraction

from .arith import PrimeSet
from .curve_q import INFINITY, CurveQ, PointQ
from .errors import InputError
from .seqlib import DivSeqTerm, QuotientAVSpec


def frac_to_str(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def frac_from_str(value) -> Fraction:
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {value!r}") from exc


def point_to_json(P: PointQ):
    if P.is_infinity:
        return "O"
    return [frac_to_str(P.x), frac_to_str(P.y)]


def point_from_json(value) -> PointQ:
    if isinstance(value, str) and value.strip().upper() == "O":
        return INFINITY
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return PointQ(frac_from_str(value[0]), frac_from_str(value[1]))
    raise InputError(f"not a point: {value!r} (expected [x, y] or \"O\")")


def point_from_cli(text: str) -> PointQ:
    text = text.strip()
    if text.upper() == "O":
        return INFINITY
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"point must be \"x,y\" or \"O\", got {text!r}")
    return PointQ(frac_from_str(parts[0]), frac_from_str(parts[1]))


def curve_to_json(E: CurveQ):
    return [frac_to_str(c) for c in E.coefficients()]


def curve_from_json(value) -> CurveQ:
    if not isinstance(value, (list, tuple)) or len(value) != 5:
        raise InputError("curve must be a list [a1, a2, a3, a4, a6]")
    return CurveQ(*(frac_from_str(c) for c in value))


def curve_from_cli(text: str) -> CurveQ:
    parts = text.split(",")
    if len(parts) != 5:
        raise InputError("--curve expects a1,a2,a3,a4,a6")
    return curve_from_json(parts)


def spec_to_json(spec: QuotientAVSpec) -> dict:
    return {
        "curve": curve_to_json(spec.base),
        "m": spec.m,
        "H": [[point_to_json(c) for c in gen] for gen in spec.h_generators],
        "L": [point_to_json(c) for c in spec.lift],
        "N": spec.exponent,
    }


def spec_from_json(doc: dict) -> QuotientAVSpec:
    if not isinstance(doc, dict):
        raise InputError("spec document must be a JSON object")
    try:
        curve = curve_from_json(doc["curve"])
        m = int(doc["m"])
        gens = [tuple(point_from_json(c) for c in gen) for gen in doc.get("H", [])]
        lift = tuple(point_from_json(c) for c in doc["L"])
    except KeyError as exc:
        raise InputError(f"spec document is missing {exc}") from exc
    exponent = doc.get("N")
    return QuotientAVSpec(curve, m, gens, lift,
                          exponent=None if exponent is None else int(exponent))


def poly_to_json(coeffs) -> list[str]:
    """Kernel polynomials: coefficient list, constant term first."""
    return [frac_to_str(c) for c in coeffs]


def term_record(term: DivSeqTerm) -> dict:
    return {
        "n": term.n,
        "radical": str(term.radical_value),
        "factors": [[str(p), e] for p, e in term.factorization.factors],
        "primitive": [str(p) for p in term.primitive_primes],
    }


def primes_to_json(s: PrimeSet) -> list[int]:
    return list(s)
