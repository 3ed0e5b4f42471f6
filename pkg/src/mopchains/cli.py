"""Command-line front end: ``mopchains <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from . import io as mio
from .classical import chebyshev_chain, markov_stieltjes_ratio, power_row, stieltjes_series
from .errors import DomainError, MopError
from .gaussborel import (build_family, verify_biorthogonality, verify_typeI_orthogonality,
                         verify_typeII_orthogonality)
from .jp import calibrate_conventions, float_ratio, poincare_diagnostic, stream_limits
from .kmg import EvolutionQuery, classical_evolution, KmgEvaluator, evolve, load_queries, matrix_power_row
from .numerics import DEFAULT_DIGITS, format_scalar, to_mpf
from .sim import SimConfig, empirical_vs_kmg, simulate
from .stochastic import pair_for_family, verify_duality, verify_transposed_limit
from .weights import classify_chain, parse_system

log = logging.getLogger("mopchains")


class _Parser(argparse.ArgumentParser):
    """Treats ``-1/4`` like ``-0.25``: a positional value, not an unknown flag."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-(\d+(/\d+)?|\d*\.\d+)$")


def _system_args(p):
    p.add_argument("family", choices=["jp", "ll"])
    p.add_argument("params", nargs="*", help="alpha1 alpha2 alpha0 (jp) or a,b,c,d (ll)")
    p.add_argument("--alpha1")
    p.add_argument("--alpha2")
    p.add_argument("--alpha0")
    p.add_argument("--tuple", help="a,b,c,d for the hypergeometric family")


def _common(p, size=8, mode="exact"):
    p.add_argument("--mode", choices=["exact", "numeric"], default=mode)
    p.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    p.add_argument("--size", type=int, default=size)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--normalization", choices=["auto", "oracle", "geometric"], default="auto")


def _system_from(args):
    values = []
    for v in args.params:
        values.extend(x for x in v.split(",") if x)
    if args.family == "jp":
        flags = [args.alpha1, args.alpha2, args.alpha0]
        if any(f is not None for f in flags):
            if values or None in flags:
                raise DomainError("give jp parameters either positionally or with all three flags")
            values = flags
    elif args.tuple:
        if values:
            raise DomainError("give ll parameters either positionally or with --tuple")
        values = args.tuple.split(",")
    return parse_system(args.family, values)


def _params(system) -> dict:
    return system.params.as_strings()


def _manifest(args, command, system=None, truncation=None, seed=None):
    return mio.RunManifest(command, _params(system) if system else {}, getattr(args, "mode", "exact"),
                           getattr(args, "digits", None), truncation, seed)


def _write(out: Path | None, name: str, text: str):
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _check(name, passed, **detail):
    return {"name": name, "passed": bool(passed), **detail}


def _finish(args, checks, manifest):
    summary = {"all_passed": all(c["passed"] for c in checks), "checks": checks}
    _write(args.out, "checks.json", mio.dumps(mio.document("checks", manifest, summary)))
    print(json.dumps(summary, indent=1, default=str), file=sys.stderr)
    return 0 if summary["all_passed"] else 1


# -- subcommands ---------------------------------------------------------------------


def cmd_build(args):
    system = _system_from(args)
    t0 = time.perf_counter()
    family = build_family(system, args.size, args.mode, args.digits)
    pair = pair_for_family(family, args.normalization)
    H = family.hessenberg
    manifest = _manifest(args, "build", system, args.size)
    formats = args.format or ["json", "csv", "txt"]
    digits = args.digits

    hess = {
        "label": H.label,
        "a": mio.encode_array(H.a, digits), "b": mio.encode_array(H.b, digits),
        "c": mio.encode_array(H.c, digits),
        "B_at_1": mio.encode_array(family.B_at_1, digits), "q_at_1": mio.encode_array(family.q_at_1, digits),
        "offband": H.offband,
    }
    _write(args.out, "hessenberg.json", mio.dumps(mio.document("hessenberg", manifest, hess)))
    for chain, title in (("hat", "type II chain (hatH)"), ("check", "type I chain (checkH)")):
        rows = pair.matrix(chain)
        keep = [n for n in range(pair.size) if pair.row_status[chain][n] != "edge"]
        if "json" in formats:
            payload = mio.matrix_payload(rows, digits, chain=chain, normalization=pair.normalization,
                                         row_status={str(k): v for k, v in pair.row_status[chain].items()},
                                         row_sums=mio.encode_array([pair.row_sums[chain][n] for n in keep], digits))
            _write(args.out, f"stochastic_{chain}.json", mio.dumps(mio.document("stochastic", manifest, payload)))
        if "csv" in formats:
            _write(args.out, f"stochastic_{chain}.csv", mio.matrix_csv(rows, manifest))
        if "txt" in formats:
            _write(args.out, f"stochastic_{chain}.txt", mio.matrix_txt([rows[n] for n in keep], manifest, title))
        print(mio.format_table([rows[n] for n in keep], title))

    checks = []
    for chain in ("hat", "check"):
        interior = pair.interior_rows(chain)
        checks.append(_check(f"{chain}_interior_rows_stochastic", True, rows=len(interior)))
        boundary = {str(n): format_scalar(s) if isinstance(s, (int, Fraction)) else mpmath.nstr(mpmath.mpf(float(s)), 15)
                    for n, s in pair.row_sums[chain].items() if pair.row_status[chain][n] == "boundary"}
        checks.append(_check(f"{chain}_boundary_rows", True, mode=pair.boundary, sums=boundary))
    dual = verify_duality(pair, tol=10.0 ** (5 - digits))
    checks.append(_check("duality", dual.passed, checked=dual.checked, failures=dual.failures[:10]))
    expected = getattr(system.params, "positive", True)
    checks.append(_check("band_positivity", H.positive() or not expected,
                         positive=H.positive(), criterion_holds=expected))
    cls = classify_chain(system)
    checks.append(_check("classification", True, verdict=cls.verdict, rationale=cls.rationale,
                         readings=cls.readings))
    if args.mode == "numeric":
        checks.append(_check("offband", H.offband <= 10.0 ** (5 - digits), value=H.offband))
    if args.verify:
        upto = min(args.size - 1, 8)
        for rep in (verify_biorthogonality(family, system, upto),
                    verify_typeII_orthogonality(family, system, upto),
                    verify_typeI_orthogonality(family, system, upto)):
            checks.append(_check(rep.name, rep.passed, max_deviation=rep.max_deviation, cells=rep.cells))
    log.info("build finished in %.2f s", time.perf_counter() - t0)
    return _finish(args, checks, manifest)


def cmd_evolve(args):
    system = _system_from(args)
    if args.queries:
        queries = load_queries(args.queries)
    else:
        if None in (args.n, args.m, args.r):
            raise DomainError("evolve needs --n, --m and --r (or --queries)")
        queries = [EvolutionQuery(args.n, args.m, args.r, args.chain, args.method)]
    size = args.size or max(q.auto_size for q in queries)
    family = build_family(system, size, args.mode, args.digits)
    pair = pair_for_family(family, args.normalization)
    evaluator = KmgEvaluator(family, pair.normalization, max(args.digits, 40))
    worst = 0.0
    for q in queries:
        res = evolve(q, family, pair, max(args.digits, 40), evaluator)
        if res.discrepancy is not None:
            worst = max(worst, res.discrepancy)
        print(res.to_json())
    manifest = _manifest(args, "evolve", system, size)
    return _finish(args, [_check("kmg_vs_matrix_power", worst <= args.tol, max_discrepancy=worst)], manifest)


def cmd_classify(args):
    system = _system_from(args)
    cls = classify_chain(system)
    print(json.dumps({"params": _params(system), "verdict": cls.verdict, "rationale": cls.rationale,
                      "readings": cls.readings}, indent=1))
    return 0


def cmd_simulate(args):
    system = _system_from(args)
    config = SimConfig(args.chain, args.start, args.steps, args.trajectories, args.seed)
    size = max(args.size or 0, config.truncation)
    family = build_family(system, size, args.mode, args.digits)
    pair = pair_for_family(family, args.normalization)
    report = simulate(pair, config)
    exact = matrix_power_row(pair, args.chain, args.start, args.steps)
    cmp = empirical_vs_kmg(report, exact)
    manifest = _manifest(args, "simulate", system, size, args.seed)
    doc = report.to_json()
    doc["comparison"] = [{"m": c.m, "exact": c.exact, "empirical": c.empirical, "z": c.z} for c in cmp]
    _write(args.out, "simulation.json", mio.dumps(mio.document("simulation", manifest, doc)))
    _write(args.out, "simulation.csv", report.to_csv())
    print(json.dumps({"return_frequency": report.return_frequency, "killed": int(report.killed[-1]),
                      "max_abs_z": max((abs(c.z) for c in cmp), default=0.0)}, indent=1))
    checks = [_check("conservation", report.conserved()),
              _check("kmg_agreement", not any(c.flagged for c in cmp), flagged=[c.m for c in cmp if c.flagged])]
    return _finish(args, checks, manifest)


def cmd_calibrate(args):
    system = _system_from(args)
    if system.kind != "jacobi_pineiro":
        raise DomainError("calibration applies to the jp family only")
    family = build_family(system, args.upto + 2, "exact")
    report = calibrate_conventions(system.params, family.hessenberg, family.B_at_1, args.upto)
    print(report.to_text())
    manifest = _manifest(args, "calibrate", system, args.upto + 2)
    _write(args.out, "calibration.json", mio.dumps(mio.document("calibration", manifest, report.to_json())))
    _write(args.out, "calibration.txt", report.to_text() + "\n")
    return 0


def cmd_limits(args):
    system = _system_from(args)
    N = args.size
    family = build_family(system, N, args.mode, args.digits)
    H = family.hessenberg
    n = N - 10
    da, db, dc = stream_limits(H.a, H.b, H.c, n)
    B, q = family.B_at_1, family.q_at_1
    out = {
        "n": n,
        "band_distance": {"a": float(da), "b": float(db), "c": float(dc)},
        "B_ratio": float_ratio(B[n + 1], B[n]),
        "q_ratio": float_ratio(q[n + 1], q[n]),
    }
    diag = poincare_diagnostic(H.a, H.b, B, q)
    out["poincare"] = {"s_last": float(diag.s[-1]), "t_last": float(diag.t[-1]),
                       "s_limit": str(diag.s_limit), "t_limit": str(diag.t_limit),
                       "characteristic_factors": diag.characteristic_factors(),
                       "cd_max_residual": max((abs(float(v)) for v in diag.cd_residual), default=0.0)}
    checks = [
        _check("band_limits", max(da, db, dc) <= 1e-3, **out["band_distance"]),
        _check("B_ratio", abs(out["B_ratio"] - 8 / 27) <= 1e-3, value=out["B_ratio"]),
        _check("q_ratio", abs(out["q_ratio"] - 27 / 8) <= 1e-2, value=out["q_ratio"]),
    ]
    if N >= 30:
        pair = pair_for_family(family, args.normalization)
        rep = verify_transposed_limit(pair)
        out["transposed_limit"] = {"head": rep.head, "tail": rep.tail, "slope": rep.slope}
        checks.append(_check("transposed_limit_decreasing", rep.decreasing, head=rep.head, tail=rep.tail))
    print(json.dumps(out, indent=1))
    manifest = _manifest(args, "limits", system, N)
    _write(args.out, "limits.json", mio.dumps(mio.document("limits", manifest, out)))
    return _finish(args, checks, manifest)


def cmd_classical(args):
    chain = chebyshev_chain()
    chain.check()
    series = stieltjes_series(chain, Fraction(args.z), args.terms, args.digits)
    ratio = markov_stieltjes_ratio(chain, Fraction(args.z), args.n, args.digits)
    worst = 0.0
    for k in range(args.kmax + 1):
        for n in range(args.kmax + 1):
            row = power_row(chain, n, k)
            for m in range(args.kmax + 1):
                v = classical_evolution(chain, n, m, k, args.digits)
                worst = max(worst, abs(float(v - to_mpf(row.get(m, 0), args.digits))))
    out = {"z": args.z, "series": mpmath.nstr(series.value, 20), "remainder_bound": float(series.remainder_bound),
           "ratio": mpmath.nstr(ratio, 20), "ratio_vs_series": float(abs(ratio - series.value)),
           "evolution_max_error": worst}
    print(json.dumps(out, indent=1))
    manifest = mio.RunManifest("classical", {"z": args.z, "terms": args.terms, "n": args.n}, "numeric", args.digits)
    checks = [_check("ratio_vs_series", out["ratio_vs_series"] <= 1e-6 + float(series.remainder_bound)),
              _check("evolution_vs_powers", worst <= 1e-10)]
    return _finish(args, checks, manifest)


def build_parser():
    parser = _Parser(prog="mopchains", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="Hessenberg operator, stochastic pair and checks")
    _system_args(p)
    _common(p)
    p.add_argument("--format", action="append", choices=["json", "csv", "txt"])
    p.add_argument("--verify", action="store_true", help="also run the orthogonality suites")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("evolve", help="r-step probabilities")
    _system_args(p)
    _common(p, size=None)
    for name in ("n", "m", "r"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--chain", choices=["hat", "check"], default="hat")
    p.add_argument("--method", choices=["integral", "matrix_power", "both"], default="both")
    p.add_argument("--queries", help="JSON file (or literal) with an array of queries")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("classify", help="recurrence or transience")
    _system_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="Monte Carlo trajectories")
    _system_args(p)
    _common(p, size=None)
    p.add_argument("--chain", choices=["hat", "check"], default="hat")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--trajectories", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="compare closed-form coefficients with the factorization")
    _system_args(p)
    p.add_argument("--upto", type=int, default=8)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("limits", help="large-n behaviour of bands and values at 1")
    _system_args(p)
    _common(p, size=300, mode="numeric")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("classical", help="Chebyshev birth-death baseline")
    p.add_argument("--z", default="2")
    p.add_argument("--terms", type=int, default=60)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_classical)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except MopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
