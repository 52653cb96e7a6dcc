"""Command-line front end: ``csbi analyze|verify|identities|parse``.

Reports go to stdout (JSON by default); errors go to stderr as a JSON
object. Exit codes: 0 success or agreement, 1 input error, 2 non-finite
closed form, 3 refused (hypothesis violated), 4 verification disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time

import numpy as np

from . import __version__
from .analytic import (
    CsbiResult, LogBase, Status, convert_log_base, csbi_continuous,
    csbi_discrete, lemma2_identity, lemma4_identity, middleton_crosscheck,
    sung_crosscheck)
from .errors import CsbiError, ParseError
from .parser import format_tf, parse_tf
from .quadrature import (
    QuadOptions, QuadratureReport, QuadStatus, Sign, csbi_continuous_numeric,
    csbi_discrete_numeric, lemma2_numeric, lemma4_numeric)
from .stability import stability_by_roots
from .transfer_function import (
    Domain, LoopTF, cancel_common_factors, close_loop, detect_cancellations,
    relative_degree)

EXIT_OK, EXIT_INPUT, EXIT_NONFINITE, EXIT_REFUSED, EXIT_DISAGREE = 0, 1, 2, 3, 4
REPORT_KEYS = ("input_echo", "domain", "structure", "stability", "analytic",
               "numeric", "crosschecks", "warnings", "elapsed_ms")


def _clean(obj):
    """Make a report JSON-safe: complex -> [re, im], non-finite -> string."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _structure(L: LoopTF, cancel_tol: float) -> dict:
    return {
        "relative_degree": relative_degree(L),
        "integrator_count": L.integrators,
        "gain": L.gain,
        "zeros": list(L.zeros),
        "poles": list(L.poles),
        "cancellations": [list(p) for p in detect_cancellations(L, cancel_tol)],
    }


def _project_analytic(res: CsbiResult, base: LogBase | None) -> dict:
    out = {
        "status": res.status.value,
        "case_tag": res.case_tag.value if res.case_tag else None,
        "internal_log_base": res.log_base.value,
    }
    target = base or res.log_base
    out["log_base"] = target.value
    if res.value is not None:
        out["value"] = convert_log_base(res.value, res.log_base, target)
    out["terms"] = {
        "nmp_zero_sum": convert_log_base(res.terms.nmp_zero_sum, res.log_base, target),
        "correction": convert_log_base(res.terms.correction, res.log_base, target),
    }
    if res.reason:
        out["reason"] = res.reason
    if out["case_tag"] is None:
        del out["case_tag"]
    return out


def _project_numeric(q: QuadratureReport, native: LogBase, base: LogBase | None) -> dict:
    target = base or native
    out = {
        "status": q.status.value,
        "abs_error_estimate": convert_log_base(q.abs_error_estimate, native, target),
        "evaluations": q.evaluations,
        "notes": list(q.notes),
    }
    if q.value is not None:
        out["value"] = convert_log_base(q.value, native, target)
    if q.divergence_sign is not None:
        out["divergence_sign"] = q.divergence_sign.value
    return out


def _agreement(res: CsbiResult, q: QuadratureReport, agree_tol: float) -> bool:
    if res.status is Status.FINITE:
        if q.value is None or q.status is QuadStatus.DIVERGENCE_SUSPECTED:
            return False
        return abs(res.value - q.value) <= max(agree_tol, 3 * q.abs_error_estimate)
    if res.status in (Status.PLUS_INFINITY, Status.MINUS_INFINITY):
        want = Sign.PLUS if res.status is Status.PLUS_INFINITY else Sign.MINUS
        return (q.status is QuadStatus.DIVERGENCE_SUSPECTED
                and q.divergence_sign is want)
    return False


def _load(tf_text: str, args) -> LoopTF:
    L = parse_tf(tf_text)
    if getattr(args, "cancel", False):
        L = cancel_common_factors(L, args.cancel_tol)
    return L


def _analyze(L: LoopTF, args, verify: bool) -> tuple[dict, int]:
    start = time.perf_counter()
    base = None if args.log_base is None else LogBase(args.log_base)
    warnings: list[str] = []
    pairs = detect_cancellations(L, args.cancel_tol)
    for z, p in pairs:
        warnings.append(f"Cancellation: zero {z!r} cancels pole {p!r} "
                        "(hidden closed-loop mode)")
    report: dict = {
        "input_echo": format_tf(L),
        "domain": L.domain.value,
        "structure": _structure(L, args.cancel_tol),
    }
    kwargs = {"boundary_tol": args.boundary_tol}
    if L.domain is Domain.CONTINUOUS:
        res = csbi_continuous(L, **kwargs)
    else:
        res = csbi_discrete(L, **kwargs)
    T = None
    try:
        T = close_loop(L)
    except CsbiError as exc:
        warnings.append(f"{type(exc).__name__}: {exc}")
    if T is not None:
        v = res.stability or stability_by_roots(T)
        report["stability"] = {
            "stable": v.stable, "margin": v.margin,
            "method_agreement": v.method_agreement,
            "offenders": list(v.offenders), "marginal": v.marginal,
        }
        for note in v.notes:
            if note not in res.warnings:
                warnings.append(note)
    report["analytic"] = _project_analytic(res, base)
    warnings.extend(res.warnings)

    if res.status is Status.FINITE:
        code = EXIT_OK
    elif res.status is Status.REFUSED:
        code = EXIT_REFUSED
    else:
        code = EXIT_NONFINITE

    if verify and T is not None:
        opts = QuadOptions(abs_tol=args.tol, max_evaluations=args.max_evals)
        if L.domain is Domain.CONTINUOUS:
            q = csbi_continuous_numeric(T, opts)
        else:
            q = csbi_discrete_numeric(T, opts)
        report["numeric"] = _project_numeric(q, res.log_base, base)
        flags = {"analytic_numeric": _agreement(res, q, args.agree_tol)}
        checks: dict = {}
        if L.domain is Domain.CONTINUOUS and L.integrators >= 1 and res.is_finite:
            try:
                mid = middleton_crosscheck(T, args.boundary_tol)
                checks["middleton"] = convert_log_base(mid, res.log_base, base or res.log_base)
                flags["middleton"] = abs(mid - res.value) <= 1e-9 * max(1.0, abs(res.value))
            except CsbiError as exc:
                warnings.append(f"middleton cross-check skipped: {exc}")
        if L.domain is Domain.DISCRETE and relative_degree(L) >= 1 and res.is_finite:
            sung = sung_crosscheck(L, args.boundary_tol)
            checks["sung"] = convert_log_base(sung, res.log_base, base or res.log_base)
            flags["sung"] = abs(sung - res.value) <= 1e-12 * max(1.0, abs(res.value))
        checks["agreement_flags"] = flags
        report["crosschecks"] = checks
        if code == EXIT_OK or res.status in (Status.PLUS_INFINITY, Status.MINUS_INFINITY):
            code = EXIT_OK if all(flags.values()) else EXIT_DISAGREE

    report["warnings"] = warnings
    report["elapsed_ms"] = 1000.0 * (time.perf_counter() - start)
    return report, code


def cmd_analyze(tf_text: str, args) -> tuple[dict, int]:
    return _analyze(_load(tf_text, args), args, verify=False)


def cmd_verify(tf_text: str, args) -> tuple[dict, int]:
    return _analyze(_load(tf_text, args), args, verify=True)


def cmd_parse(tf_text: str, args) -> tuple[dict, int]:
    L = _load(tf_text, args)
    return {"input_echo": format_tf(L), "domain": L.domain.value,
            "structure": _structure(L, args.cancel_tol)}, EXIT_OK


def run_identities(count: int, seed: int, equal_pair: bool = False,
                   opts: QuadOptions = QuadOptions(abs_tol=1e-7)) -> dict:
    """Randomized closed-form vs quadrature comparisons for both identities."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    failures = []
    max_dev = 0.0
    for i in range(count):
        a = complex(*rng.uniform(-5, 5, 2))
        b = a if (equal_pair and i == 0) else complex(*rng.uniform(-5, 5, 2))
        ref = lemma2_identity(a, b)
        q = lemma2_numeric(a, b, opts)
        dev = abs(ref - q.value)
        max_dev = max(max_dev, dev)
        if not (dev <= max(1e-4, 1e-3 * abs(ref)) and q.converged):
            failures.append({"identity": "lemma2_identity", "a": a, "b": b, "analytic": ref,
                             "numeric": q.value})
        # |c| <= 4, uniform over the disk
        r = 4.0 * math.sqrt(rng.uniform())
        c = r * complex(math.cos(t := rng.uniform(-math.pi, math.pi)), math.sin(t))
        ref4 = lemma4_identity(c)
        q4 = lemma4_numeric(c, opts)
        dev4 = abs(ref4 - q4.value)
        max_dev = max(max_dev, dev4)
        if not (dev4 <= max(1e-4, 1e-3 * abs(ref4)) and q4.converged):
            failures.append({"identity": "lemma4_identity", "a": c, "analytic": ref4,
                             "numeric": q4.value})
    return {"count": count, "seed": seed, "cases": 2 * count,
            "passed": 2 * count - len(failures), "max_deviation": max_dev,
            "failures": failures}


def _emit(report: dict, fmt: str, out) -> None:
    report = _clean(report)
    if fmt == "json":
        out.write(json.dumps(report, indent=2, allow_nan=False) + "\n")
    elif fmt == "text":
        out.write(_as_text(report))
    else:
        out.write(_as_csv(report))


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            flat[key] = json.dumps(v)
        else:
            flat[key] = v
    return flat


def _as_csv(report: dict) -> str:
    flat = _flatten(report)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
    w.writeheader()
    w.writerow(flat)
    return buf.getvalue()


def _as_text(report: dict) -> str:
    flat = _flatten(report)
    width = max(len(k) for k in flat)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in flat.items())


def _error(exc: Exception, err) -> int:
    name = type(exc).__name__
    if type(exc) is ParseError:
        # public name of a plain grammar violation
        name = "SyntaxError"
    payload = {"error": name, "message": getattr(exc, "message", str(exc))}
    if isinstance(exc, ParseError):
        payload["position"] = exc.position
    err.write(json.dumps(payload) + "\n")
    return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="csbi", description="Complementary sensitivity Bode integrals.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("tf", help="transfer function, e.g. '2*(z+2)/(z+0.5)'")
        sp.add_argument("--format", choices=("json", "text", "csv"), default="json")
        sp.add_argument("--boundary-tol", type=float, default=1e-9)
        sp.add_argument("--log-base", choices=("natural", "2"), default=None)
        sp.add_argument("--cancel", action="store_true",
                        help="remove common zero/pole factors before analysis")
        sp.add_argument("--cancel-tol", type=float, default=1e-7)

    common(sub.add_parser("analyze", help="closed-form value only"))
    v = sub.add_parser("verify", help="closed form plus numerical oracle")
    common(v)
    v.add_argument("--tol", type=float, default=1e-6, help="quadrature abs tolerance")
    v.add_argument("--agree-tol", type=float, default=1e-3)
    v.add_argument("--max-evals", type=int, default=2_000_000)
    pp = sub.add_parser("parse", help="echo the parsed structure")
    common(pp)
    ids = sub.add_parser("identities", help="randomized identity checks")
    ids.add_argument("--count", type=int, default=100)
    ids.add_argument("--seed", type=int, default=0)
    ids.add_argument("--equal-pair", action="store_true",
                     help="make the first two-root case use a == b")
    ids.add_argument("--format", choices=("json", "text", "csv"), default="json")
    return p


_NEGATIVE_TF = re.compile(r"^-[\d.(sz]")


def _protect_negative_tf(argv: list[str]) -> list[str]:
    """Move a transfer function with a leading minus sign behind ``--``.

    Without this argparse would read ``-5*(s+1)/s`` as an option.
    """
    if "--" in argv:
        return argv
    tfs = [a for a in argv if _NEGATIVE_TF.match(a)]
    if not tfs:
        return argv
    return [a for a in argv if a not in tfs] + ["--"] + tfs


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_protect_negative_tf(argv))
    try:
        if args.command == "identities":
            if args.count < 1:
                raise ValueError("--count must be at least 1")
            summary = run_identities(args.count, args.seed, args.equal_pair)
            _emit(summary, args.format, out)
            return EXIT_OK if not summary["failures"] else EXIT_DISAGREE
        handler = {"analyze": cmd_analyze, "verify": cmd_verify,
                   "parse": cmd_parse}[args.command]
        report, code = handler(args.tf, args)
    except (CsbiError, ValueError) as exc:
        return _error(exc, err)
    _emit(report, args.format, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
