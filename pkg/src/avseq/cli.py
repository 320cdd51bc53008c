"""Command-line surface: sequences, pipeline, table reproduction, selftest.

Exit codes: 0 ok; 2 bad input; 3 math degeneracy (torsion lift, no rational
quotient point); 4 factor budget exhausted; 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
import time

from . import curve_q, fixtures, isogeny, seqlib, serialize, theorem1
from .arith import DEFAULT_RHO_BUDGET, FactorCache, PrimeSet, factor
from .curve_q import CurveQ, PointQ
from .errors import (
    AvseqError,
    BudgetError,
    DegeneracyError,
    InputError,
    InternalInvariantError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avseq",
        description="divisibility sequences attached to rank-one points on E^m/H",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=False, curve_point=False, ranged=False):
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--cache", metavar="FILE", help="persistent factorization cache")
        p.add_argument("--budget", type=int, default=DEFAULT_RHO_BUDGET,
                       help="factorization budget in rho iterations")
        p.add_argument("--aux-bound", type=int, default=10 ** 5,
                       help="search bound for auxiliary primes")
        p.add_argument("--no-timing", action="store_true",
                       help="omit the elapsed-time footer")
        if spec:
            p.add_argument("--spec", metavar="FILE", required=True,
                           help="quotient spec document (JSON)")
        if curve_point:
            p.add_argument("--curve", required=True, metavar="a1,a2,a3,a4,a6")
            p.add_argument("--point", required=True, metavar='"x,y"')
        if ranged:
            p.add_argument("--range", default="1:10", metavar="LO:HI")
            p.add_argument("--s", default="auto", metavar="auto|p1,p2,...",
                           help="primes to exclude (forced primes are always added)")
            p.add_argument("--jobs", type=int, default=1,
                           help="compute terms for distinct n in parallel")

    common(sub.add_parser("eds", help="denominator sequence B_n of a rational point"),
           curve_point=True, ranged=True)
    common(sub.add_parser("cseq-ec", help="sequence C_n on an elliptic curve"),
           curve_point=True, ranged=True)
    common(sub.add_parser("cseq-quotient", help="sequence C_n on E^m/H"),
           spec=True, ranged=True)

    velu = sub.add_parser("velu", help="quotient curve from rational kernel generators")
    common(velu)
    velu.add_argument("--curve", required=True, metavar="a1,a2,a3,a4,a6")
    velu.add_argument("--point", required=True, metavar='"x,y;x,y"',
                      help="kernel generators, semicolon separated")

    pipe = sub.add_parser("pipeline", help="period n1, quotient curve E0 and point Q0")
    common(pipe, spec=True)
    pipe.add_argument("--validate", type=int, default=theorem1.DEFAULT_VALIDATE_UP_TO)

    prim = sub.add_parser("primitive", help="primitive-divisor criterion for a spec")
    common(prim, spec=True)

    rep = sub.add_parser("reproduce", help="rebuild a bundled reference table")
    common(rep)
    rep.add_argument("fixture", choices=sorted(fixtures.FIXTURES))
    rep.add_argument("--s", default=None, metavar="p1,p2,...")
    rep.add_argument("--validate", type=int, default=theorem1.DEFAULT_VALIDATE_UP_TO)

    common(sub.add_parser("selftest", help="quick end-to-end battery"))
    return parser


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise InputError(f"--range expects LO:HI, got {text!r}") from exc
    if not 1 <= lo <= hi:
        raise InputError(f"range must satisfy 1 <= lo <= hi, got {lo}:{hi}")
    return lo, hi


def _parse_s(text: str) -> PrimeSet:
    if text is None or text == "auto":
        return PrimeSet()
    try:
        return PrimeSet(int(v) for v in text.split(",") if v.strip())
    except (ValueError, InputError) as exc:
        raise InputError(f"--s expects 'auto' or a comma list of primes: {exc}") from exc


def _load_spec(path: str) -> seqlib.QuotientAVSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"spec file is not valid JSON: {exc}") from exc
    return serialize.spec_from_json(doc)


class _Emitter:
    def __init__(self, fmt: str, no_timing: bool):
        self.fmt = fmt
        self.no_timing = no_timing
        self.started = time.monotonic()

    def terms(self, records: list[dict], columns: list[str]):
        if self.fmt == "json":
            for rec in records:
                print(json.dumps(rec, sort_keys=True))
        elif self.fmt == "csv":
            print(",".join(columns))
            for rec in records:
                print(",".join(_csv_cell(rec.get(c)) for c in columns))
        else:
            widths = {c: max([len(c)] + [len(_text_cell(r.get(c))) for r in records])
                      for c in columns}
            print("  ".join(c.ljust(widths[c]) for c in columns))
            for rec in records:
                print("  ".join(_text_cell(rec.get(c)).ljust(widths[c]) for c in columns))
        self.footer()

    def document(self, doc: dict, text_lines: list[str]):
        if self.fmt == "json":
            print(json.dumps(doc, sort_keys=True))
        else:
            for line in text_lines:
                print(line)
        self.footer()

    def footer(self):
        if self.no_timing:
            return
        elapsed = int((time.monotonic() - self.started) * 1000)
        if self.fmt == "json":
            print(json.dumps({"elapsed_ms": elapsed}))
        else:
            print(f"# elapsed_ms={elapsed}")


def _format_factors(factors) -> str:
    if not factors:
        return "1"
    return "*".join(p if e == 1 else f"{p}^{e}" for p, e in factors)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, list):
        if value and isinstance(value[0], list):
            return _format_factors(value)
        return ";".join(str(v) for v in value)
    return str(value)


def _text_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, list):
        if not value:
            return "-"
        if isinstance(value[0], list):
            return _format_factors(value)
        return ",".join(str(v) for v in value)
    return str(value)


def _factored_string(term: seqlib.DivSeqTerm) -> str:
    return str(term.factorization)


# -- sequence commands ----------------------------------------------------------

def _eds_term(E: CurveQ, P: PointQ, n: int, budget, cache) -> dict:
    den = curve_q.denominator_ideal(E, P, n)
    root = math.isqrt(den)
    b = root if root * root == den else den
    fac = factor(b, budget=budget, cache=cache)
    return {"n": n, "B": str(b), "factors": [[str(p), e] for p, e in fac.factors]}


def _run_eds(args, cache) -> None:
    E = serialize.curve_from_cli(args.curve)
    P = serialize.point_from_cli(args.point)
    if P.is_infinity:
        raise InputError("the identity has no denominator sequence")
    if curve_q.torsion_order(E, P) is not None:
        raise InputError("denominator sequences need a non-torsion point")
    lo, hi = _parse_range(args.range)
    emitter = _Emitter(args.format, args.no_timing)
    records = _parallel_map(
        args.jobs,
        _eds_term,
        [(E, P, n, args.budget, cache) for n in range(lo, hi + 1)],
    )
    emitter.terms(records, ["n", "B", "factors"])


def _cseq_records(terms: list[seqlib.DivSeqTerm]) -> list[dict]:
    reported = seqlib.primitive_report(terms) if terms and terms[0].n == 1 else terms
    return [serialize.term_record(t) for t in reported]


def _run_cseq_ec(args, cache) -> None:
    E = serialize.curve_from_cli(args.curve)
    P = serialize.point_from_cli(args.point)
    lo, hi = _parse_range(args.range)
    S = _parse_s(args.s)
    emitter = _Emitter(args.format, args.no_timing)
    terms = _parallel_map(
        args.jobs,
        seqlib.c_n_elliptic,
        [(E, P, S, n) for n in range(lo, hi + 1)],
        kwargs={"budget": args.budget, "cache": cache},
    )
    emitter.terms(_cseq_records(terms), ["n", "radical", "factors", "primitive"])


def _run_cseq_quotient(args, cache) -> None:
    spec = _load_spec(args.spec)
    lo, hi = _parse_range(args.range)
    S = _parse_s(args.s)
    emitter = _Emitter(args.format, args.no_timing)
    terms = _parallel_map(
        args.jobs,
        seqlib.c_n_quotient,
        [(spec, S, n) for n in range(lo, hi + 1)],
        kwargs={"budget": args.budget, "cache": cache},
    )
    emitter.terms(_cseq_records(terms), ["n", "radical", "factors", "primitive"])


def _call_star(payload):
    fn, args, kwargs = payload
    return fn(*args, **kwargs)


def _parallel_map(jobs: int, fn, arglists, kwargs=None):
    payloads = [(fn, a, kwargs or {}) for a in arglists]
    if jobs <= 1:
        return [_call_star(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_call_star, payloads))


# -- other commands ---------------------------------------------------------------

def _run_velu(args, cache) -> None:
    E = serialize.curve_from_cli(args.curve)
    gens = [serialize.point_from_cli(g) for g in args.point.split(";") if g.strip()]
    kernel = isogeny.kernel_from_subgroup(E, gens)
    phi = isogeny.velu_quotient(kernel)
    emitter = _Emitter(args.format, args.no_timing)
    doc = {
        "domain": serialize.curve_to_json(phi.domain),
        "codomain": serialize.curve_to_json(phi.codomain),
        "degree": phi.degree,
        "kernel_polynomial": serialize.poly_to_json(kernel.kernel_polynomial),
    }
    emitter.document(doc, [
        f"domain:   {serialize.curve_to_json(phi.domain)}",
        f"codomain: {serialize.curve_to_json(phi.codomain)}",
        f"degree:   {phi.degree}",
        f"kernel polynomial (constant first): {doc['kernel_polynomial']}",
    ])


def _pipeline_doc(res: theorem1.PipelineResult) -> dict:
    return {
        "n1": res.n1,
        "u": res.u,
        "d": res.d,
        "E0": serialize.curve_to_json(res.E0),
        "Q0": serialize.point_to_json(res.Q0),
        "S": serialize.primes_to_json(res.S_auto),
        "aux_prime": res.aux_prime,
        "verified_up_to": res.verified_up_to,
        "checks": [
            {"n": c.n,
             "lhs": None if c.lhs is None else str(c.lhs),
             "rhs": None if c.rhs is None else str(c.rhs),
             "ok": c.ok}
            for c in res.checks
        ],
    }


def _run_pipeline(args, cache) -> None:
    spec = _load_spec(args.spec)
    res = theorem1.pipeline(spec, validate_up_to=args.validate,
                            aux_bound=args.aux_bound, cache=cache)
    emitter = _Emitter(args.format, args.no_timing)
    doc = _pipeline_doc(res)
    lines = [
        f"n1 = {res.n1}  (u = {res.u}, d = {res.d}; auxiliary prime {res.aux_prime})",
        f"E0 = {doc['E0']}",
        f"Q0 = {doc['Q0']}",
        f"S  = {doc['S']}",
        f"verified n <= {res.verified_up_to}: "
        + ("all equalities hold" if all(c.ok for c in res.checks) else "FAILED"),
    ]
    for c in res.checks:
        lhs = "(unfactored)" if c.lhs is None else c.lhs
        rhs = "(unfactored)" if c.rhs is None else c.rhs
        lines.append(f"  n={c.n}: lhs={lhs} rhs={rhs} ok={c.ok}")
    emitter.document(doc, lines)


def _run_primitive(args, cache) -> None:
    spec = _load_spec(args.spec)
    dec = theorem1.decompose_auto(spec.base, theorem1.downstairs_points(spec))
    _, Z = theorem1.gn_deviations(spec, dec)
    gn = theorem1.analyze_gn(spec, dec.a, Z, aux_bound=args.aux_bound)
    verdict = theorem1.primitive_criterion(spec, dec, gn, aux_bound=args.aux_bound)
    emitter = _Emitter(args.format, args.no_timing)
    doc = {"criterion": verdict, "n1": dec.u * gn.d, "u": dec.u, "d": gn.d,
           "g0_size": gn.g0_size, "aux_prime": gn.aux_prime}
    emitter.document(doc, [
        f"primitive divisors for almost all n: {verdict}",
        f"n1 = {dec.u * gn.d} (u = {dec.u}, d = {gn.d}), "
        f"#G0 = {gn.g0_size} at auxiliary prime {gn.aux_prime}",
    ])


def _run_reproduce(args, cache) -> None:
    name = args.fixture
    spec_fn, (lo, hi), default_s = fixtures.FIXTURES[name]
    spec = spec_fn()
    S = _parse_s(args.s) if args.s else PrimeSet(default_s)
    quotient = [seqlib.c_n_quotient(spec, S, n, budget=args.budget, cache=cache)
                for n in range(lo, hi + 1)]
    if name == "ex31":
        res = theorem1.pipeline(spec, validate_up_to=args.validate,
                                aux_bound=args.aux_bound, cache=cache)
        elliptic = [seqlib.c_n_elliptic(res.E0, res.Q0, S, n,
                                        budget=args.budget, cache=cache)
                    for n in range(lo, hi + 1)]
    else:
        E, twoU = fixtures.ex35_elliptic_point()
        elliptic = [
            seqlib.c_n_elliptic(E, twoU, S, n, budget=args.budget, cache=cache)
            if n % 2 == 0 else None
            for n in range(lo, hi + 1)
        ]
    for q, e in zip(quotient, elliptic):
        if e is not None and q.radical_value != e.radical_value:
            raise InternalInvariantError(
                f"the two models disagree at n={q.n}: {q.radical_value} vs {e.radical_value}"
            )
    emitter = _Emitter(args.format, args.no_timing)
    records = []
    for q, e in zip(quotient, elliptic):
        records.append({
            "n": q.n,
            "quotient": _factored_string(q),
            "elliptic": None if e is None else _factored_string(e),
        })
    emitter.terms(records, ["n", "quotient", "elliptic"])


def _run_selftest(args, cache) -> None:
    failures = 0

    def check(label: str, ok: bool):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        if not ok:
            failures += 1

    spec31 = fixtures.ex31_spec()
    s31 = fixtures.default_s("ex31")
    for n in (1, 2, 3, 4):
        term = seqlib.c_n_quotient(spec31, s31, n, cache=cache)
        check(f"ex31 quotient term n={n}",
              term.radical_value == fixtures.EX31_EXPECTED[n - 1])
    spec35 = fixtures.ex35_spec()
    s35 = fixtures.default_s("ex35")
    for n in (1, 2, 3, 4):
        term = seqlib.c_n_quotient(spec35, s35, n, cache=cache)
        check(f"ex35 quotient term n={n}",
              term.radical_value == fixtures.EX35_EXPECTED[n - 1])
    res31 = theorem1.pipeline(spec31, validate_up_to=6, cache=cache)
    check("ex31 pipeline n1 = 1", res31.n1 == 1)
    check("ex31 quotient curve matches",
          isogeny.isomorphic_over_q(res31.E0, CurveQ(0, 8, 0, 36, 288)) is not None)
    res35 = theorem1.pipeline(spec35, validate_up_to=6, cache=cache)
    check("ex35 pipeline n1 = 2", res35.n1 == 2)
    check("ex31 primitive criterion", theorem1.primitive_criterion(spec31) is True)
    check("ex35 primitive criterion", theorem1.primitive_criterion(spec35) is False)
    if failures:
        raise InternalInvariantError(f"selftest: {failures} check(s) failed")
    print("selftest: all checks passed")


_RUNNERS = {
    "eds": _run_eds,
    "cseq-ec": _run_cseq_ec,
    "cseq-quotient": _run_cseq_quotient,
    "velu": _run_velu,
    "pipeline": _run_pipeline,
    "primitive": _run_primitive,
    "reproduce": _run_reproduce,
    "selftest": _run_selftest,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cache = None
    try:
        if getattr(args, "cache", None):
            cache = FactorCache(args.cache)
            if cache.load_warning:
                print(f"warning: {cache.load_warning}", file=sys.stderr)
        _RUNNERS[args.command](args, cache)
        if cache is not None:
            cache.save()
        return 0
    except BudgetError as exc:
        print(f"error (budget): {exc}", file=sys.stderr)
        return 4
    except DegeneracyError as exc:
        print(f"error (degenerate): {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"error (input): {exc}", file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print(f"error (internal): {exc}", file=sys.stderr)
        return 5
    except AvseqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
