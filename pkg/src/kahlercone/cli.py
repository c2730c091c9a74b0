"""Command-line driver: ``kahlercone <command> [options]``.

Exit codes: 0 certified consistent / true, 1 certified obstruction / false,
2 usage or input error, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from typing import Sequence

from . import __version__
from .calabi import (
    DegenerateMetricError,
    NotInduced,
    NotPsd,
    find_inducing_multiple,
    inducibility,
    psd_check_exact,
)
from .cone import (
    ConePotential,
    cone_inducibility,
    flatness_witness,
    homothety,
    lift,
    radial_blocks,
    epsilon_submatrix,
)
from .corpus import Potential, PotentialParseError, fmt_rational, parse_potential, serialize
from .curvature import ricci_flat_check, ricci_report, sasaki_einstein_bridge
from .series import InvariantError, to_rational

SCHEMA = "kahlercone.report/1"
ORDER_ENV = "KAHLERCONE_ORDER"
DEFAULT_ORDER = 4

CONVENTIONS = {
    "monomial_order": "graded: total degree, then lexicographic with the first variable most significant",
    "metric": "g = d^2 phi / dz dzbar for omega = (i/2) dd^c phi; ricci potential = -2 log det g",
    "diastasis_constant": "D_q uses eps^(2c) so that D_q vanishes at its center",
    "verdicts": "NotInduced is conclusive; ConsistentUpTo only rules out obstructions through the stated order",
}


class UsageError(Exception):
    pass


def _q(x) -> str:
    return fmt_rational(x)


def _vec(v) -> list[str]:
    out = []
    for x in v:
        if hasattr(x, "im") and x.im:
            out.append(f"{_q(x.re)}+{_q(x.im)}i")
        else:
            out.append(_q(getattr(x, "re", x)))
    return out


def _verdict(v) -> dict:
    if isinstance(v, NotInduced):
        out = {
            "verdict": "NotInduced",
            "order": v.order,
            "witness": _vec(v.witness),
            "witness_value": _q(v.value),
            "witness_support": [
                {"monomial": list(m), "coefficient": _vec([c])[0]} for m, c in v.witness_support()
            ],
        }
        if v.radial_weight is not None:
            out["radial_weight"] = v.radial_weight
        return out
    return {"verdict": "ConsistentUpTo", "order": v.order, "rank_lower_bound": v.rank_lower_bound}


# ---------------------------------------------------------------------------
# argument helpers


def _order(args) -> int:
    if args.order is not None:
        d = args.order
    else:
        raw = os.environ.get(ORDER_ENV)
        try:
            d = int(raw) if raw else DEFAULT_ORDER
        except ValueError:
            raise UsageError(f"{ORDER_ENV}={raw!r} is not an integer")
    if d < 1 or d > 12:
        raise UsageError(f"order must be between 1 and 12, got {d}")
    return d


def _rational(text: str | None, flag: str, positive: bool = True):
    if text is None:
        return None
    try:
        x = to_rational(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise UsageError(f"{flag} expects an exact rational like 1/2, got {text!r}")
    if positive and x <= 0:
        raise UsageError(f"{flag} must be positive")
    return x


def _load(spec: str | None, flag: str, d: int) -> Potential:
    if spec is None:
        raise UsageError(f"{flag} is required")
    try:
        return parse_potential(spec, d)
    except PotentialParseError as exc:
        raise UsageError(str(exc))
    except ValueError as exc:
        raise UsageError(f"{flag} {spec}: {exc}")


def _cone(args, d: int, default_c=1) -> tuple[Potential, ConePotential]:
    """Cone from ``--psi`` with exponent ``--c`` or ``1/--a``."""
    psi = _load(args.psi, "--psi", d)
    a = _rational(args.a, "--a")
    c = _rational(args.c, "--c")
    if a is not None and c is not None and a * c != 1:
        raise UsageError("--a and --c disagree (need c = 1/a)")
    if c is None:
        c = 1 / a if a is not None else to_rational(default_c)
    base = psi.series
    if base.constant_term():
        base = base - base.constant_term().re
    return psi, lift(base, 1 / c)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, result dict, human lines)


def cmd_analyze(args, d):
    p = _load(args.potential, "--potential", d)
    v = inducibility(p.series, d)
    lines = [f"potential: {p.name} (n={p.n})", f"verdict: {v.verdict_class}({v.order})"]
    if isinstance(v, NotInduced):
        lines.append(f"witness: ({', '.join(_vec(v.witness))})  value: {_q(v.value)}")
    else:
        lines.append(f"rank lower bound: {v.rank_lower_bound}")
    return (1 if isinstance(v, NotInduced) else 0), {"potential": p.name, "n": p.n, **_verdict(v)}, lines, [p]


def cmd_multiple(args, d):
    p = _load(args.potential, "--potential", d)
    K = args.max_k if args.max_k is not None else (args.K if args.K is not None else 4)
    if K < 1:
        raise UsageError("--max-k must be at least 1")
    res = find_inducing_multiple(p.series, K, d)
    lines = [f"potential: {p.name}", f"smallest k: {res.k if res.k is not None else 'none'} (searched 1..{K})"]
    for k, w in res.witnesses.items():
        lines.append(f"  k={k}: NotInduced({w.order}) value {_q(w.value)}")
    result = {
        "potential": p.name,
        "max_k": K,
        "order": d,
        "k": res.k,
        "per_k": {str(k): _verdict(v) for k, v in res.verdicts.items()},
    }
    return (0 if res.k is not None else 1), result, lines, [p]


def _cone_desc(cp: ConePotential) -> dict:
    return {"c": _q(cp.c), "a": _q(cp.a), "n": cp.n}


def cmd_lift(args, d):
    psi, cp = _cone(args, d)
    lines = [
        f"base: {psi.name} (n={psi.n})",
        f"cone potential |z0|^(2c) e^(c psi) with c = {_q(cp.c)} (a = {_q(cp.a)})",
        f"e^(c psi): {len(cp.exp_c_psi)} nonzero terms through order {cp.d}",
    ]
    result = {"base": psi.name, "cone": _cone_desc(cp),
              "exp_c_psi": json.loads(serialize(cp.exp_c_psi))}
    return 0, result, lines, [psi]


def cmd_homothety(args, d):
    psi = _load(args.psi, "--psi", d)
    c = _rational(args.c, "--c") or to_rational(1)
    a = _rational(args.a, "--a")
    if a is None:
        raise UsageError("homothety needs the factor --a")
    base = psi.series
    K = args.K if args.K is not None else 3
    cp = lift(base, 1 / c)
    cp2 = homothety(cp, a)
    v1 = cone_inducibility(cp, K, d)
    v2 = cone_inducibility(cp2, K, d)
    lines = [
        f"base: {psi.name}",
        f"before: c = {_q(cp.c)}  {v1.verdict_class}({v1.order})",
        f"after homothety by {_q(a)}: c = {_q(cp2.c)}  {v2.verdict_class}({v2.order})",
    ]
    result = {"base": psi.name, "factor": _q(a), "before": {**_cone_desc(cp), **_verdict(v1)},
              "after": {**_cone_desc(cp2), **_verdict(v2)}, "K": K}
    return (1 if isinstance(v2, NotInduced) else 0), result, lines, [psi]


def cmd_blocks(args, d):
    psi, cp = _cone(args, d)
    K = args.K if args.K is not None else 3
    if K < 1:
        raise UsageError("--K must be at least 1")
    rb = radial_blocks(cp, K, d)
    per = []
    lines = [f"cone over {psi.name}, c = {_q(cp.c)}, K = {K}, order {d}"]
    for k, B in enumerate(rb.blocks, start=1):
        r = psd_check_exact(B, keep_factors=False)
        if isinstance(r, NotPsd):
            per.append({"k": k, "psd": False, "witness": _vec(r.witness), "witness_value": _q(r.value)})
            lines.append(f"  B_{k}: not PSD, witness value {_q(r.value)}")
        else:
            per.append({"k": k, "psd": True, "rank": r.rank})
            lines.append(f"  B_{k}: PSD, rank {r.rank}")
    v = cone_inducibility(cp, K, d)
    lines.append(f"verdict: {v.verdict_class}({v.order})")
    base_v = inducibility(psi.series * cp.c, d)
    lines.append(f"base c*psi verdict: {base_v.verdict_class}({base_v.order})")
    if base_v.verdict_class != v.verdict_class:
        raise InvariantError("cone and base verdicts disagree")
    result = {"base": psi.name, "cone": _cone_desc(cp), "K": K, "blocks": per, **_verdict(v),
              "base_verdict": base_v.verdict_class}
    return (1 if isinstance(v, NotInduced) else 0), result, lines, [psi]


def cmd_epsilon(args, d):
    psi, cp = _cone(args, d)
    eps = _rational(args.epsilon, "--epsilon")
    if eps is None:
        raise UsageError("--epsilon is required")
    try:
        E = epsilon_submatrix(cp, eps, d)
    except ValueError as exc:
        raise UsageError(str(exc))
    r = psd_check_exact(E.entries, keep_factors=False)
    lines = [
        f"cone over {psi.name}, c = {_q(cp.c)}, eps = {_q(eps)}, eps^(2c) = {_q(E.eps_2c)}",
        f"submatrix size {len(E.entries)}: " + ("PSD rank %d" % r.rank if not isinstance(r, NotPsd) else
                                               f"not PSD, witness value {_q(r.value)}"),
        f"constant offset eps^2 - eps^(2c) = {_q(E.constant_offset)}",
    ]
    result = {
        "base": psi.name, "cone": _cone_desc(cp), "epsilon": _q(eps), "eps_2c": _q(E.eps_2c),
        "constant_offset": _q(E.constant_offset),
        "entries": [[_q(x) if not hasattr(x, "im") else _vec([x])[0] for x in row] for row in E.entries],
        "psd": not isinstance(r, NotPsd),
    }
    return (1 if isinstance(r, NotPsd) else 0), result, lines, [psi]


def cmd_einstein(args, d):
    p = _load(args.potential, "--potential", d + 1)
    rep = ricci_report(p.series, d)
    lam = rep.lam
    lines = [f"potential: {p.name}", "Einstein constant: " + (_q(lam) if lam is not None else "none")]
    if lam is None:
        lines.append(f"first mismatch at z^{list(rep.mismatch[0])} zbar^{list(rep.mismatch[1])}")
    result = {"potential": p.name, "order": rep.d, "lambda": _q(lam) if lam is not None else None,
              "mismatch": [list(x) for x in rep.mismatch] if rep.mismatch else None,
              "residual_terms": len(rep.residual)}
    return (0 if lam is not None else 1), result, lines, [p]


def cmd_ricci(args, d):
    if args.psi is not None:
        psi, cp = _cone(args, d + 1)
        if cp.c.denominator != 1:
            raise UsageError("cone Ricci check needs integer c; use 'bridge' for fractional c")
        res = ricci_flat_check(cp, d)
        label, inputs = f"cone over {psi.name}, c = {_q(cp.c)}", [psi]
    else:
        p = _load(args.potential, "--potential", d + 1)
        res = ricci_flat_check(p.series, d)
        label, inputs = p.name, [p]
    lines = [label, f"Ricci-flat through order {res.d}: {str(res.flat).lower()}"]
    if not res.flat:
        m, k, c = res.residual.terms()[0]
        lines.append(f"first residual term: {c} z^{list(m)} zbar^{list(k)}")
    result = {"input": label, "order": res.d, "ricci_flat": res.flat, "residual_terms": len(res.residual)}
    return (0 if res.flat else 1), result, lines, inputs


def cmd_bridge(args, d):
    psi = _load(args.psi, "--psi", d + 1)
    a = _rational(args.a, "--a") or to_rational(1)
    rep = sasaki_einstein_bridge(psi.series, a, d)
    lam = _q(rep.lam_base) if rep.lam_base is not None else "none"
    lines = [
        f"base: {psi.name}, a = {_q(a)}, c = {_q(rep.c)}",
        f"base Einstein constant of c*psi: {lam} (2n+2 = {2 * rep.n + 2})",
        f"cone Ricci-flat: {str(rep.cone_ricci_flat).lower()}",
    ]
    result = {"base": psi.name, "a": _q(a), "c": _q(rep.c), "order": rep.d, "lambda_base": None if rep.lam_base is None else lam,
              "base_is_einstein_2n2": rep.base_is_ke, "cone_ricci_flat": rep.cone_ricci_flat}
    return (0 if rep.cone_ricci_flat else 1), result, lines, [psi]


def cmd_flatness(args, d):
    psi, cp = _cone(args, d)
    res = flatness_witness(cp)
    lines = [f"cone over {psi.name}, c = {_q(cp.c)}", f"flat normal form: {str(res.flat).lower()}"]
    if res.reason:
        lines.append(f"reason: {res.reason}")
    result = {"base": psi.name, "cone": _cone_desc(cp), "flat": res.flat, "reason": res.reason}
    if res.substituted is not None:
        result["substituted"] = json.loads(serialize(res.substituted))
    return (0 if res.flat else 1), result, lines, [psi]


def cmd_selftest(args, d):
    from .acceptance import run_all

    results = run_all()
    lines = [str(r) for r in results]
    ok = all(r.passed for r in results)
    result = {"criteria": [{"id": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                           for r in results]}
    return (0 if ok else 1), result, lines, []


COMMANDS = {
    "analyze": (cmd_analyze, "Calabi-criterion verdict for a potential"),
    "multiple": (cmd_multiple, "smallest k in 1..K with k*phi unobstructed"),
    "lift": (cmd_lift, "cone potential over a base potential"),
    "homothety": (cmd_homothety, "cone verdict before and after c -> c*a"),
    "blocks": (cmd_blocks, "radial blocks of the cone's Calabi matrix"),
    "epsilon": (cmd_epsilon, "rescaled epsilon submatrix of the cone"),
    "ricci": (cmd_ricci, "exact Ricci-flatness test"),
    "einstein": (cmd_einstein, "Einstein constant of a potential"),
    "bridge": (cmd_bridge, "base Einstein constant against cone Ricci-flatness"),
    "flatness": (cmd_flatness, "flat normal form of a cone by Laurent substitution"),
    "selftest": (cmd_selftest, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahlercone", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kahlercone {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--potential", help="builtin name (fs:2, hyp:1, ...) or potential file")
        p.add_argument("--psi", help="base potential of a cone")
        p.add_argument("--order", type=int, help=f"truncation order (default ${ORDER_ENV} or {DEFAULT_ORDER})")
        p.add_argument("--a", help="cone parameter a (c = 1/a), or the homothety factor")
        p.add_argument("--c", help="cone exponent c")
        p.add_argument("--K", type=int, help="number of radial blocks")
        p.add_argument("--epsilon", help="epsilon for the submatrix (exact rational)")
        p.add_argument("--max-k", type=int, dest="max_k", help="largest multiple to try")
        p.add_argument("--json", metavar="PATH", help="also write a structured report ('-' for stdout)")
        p.add_argument("--timing", action="store_true", help="include wall time in the report")
    return parser


def _digest(inputs: Sequence[Potential]) -> str:
    h = hashlib.sha256()
    for p in inputs:
        h.update(serialize(p).encode())
    return h.hexdigest()


def _echo(args) -> dict:
    keys = ("potential", "psi", "order", "a", "c", "K", "epsilon", "max_k")
    return {"command": args.command, **{k: getattr(args, k) for k in keys if getattr(args, k) is not None}}


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kahlercone-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    func = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        d = _order(args)
        code, result, lines, inputs = func(args, d)
    except UsageError as exc:
        print(f"kahlercone: error: {exc}", file=sys.stderr)
        return 2
    except DegenerateMetricError as exc:
        print(f"kahlercone: error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"kahlercone: internal invariant breach: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # anything unexpected is an internal failure, not a verdict
        print(f"kahlercone: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for line in lines:
        print(line)
    if args.json:
        report = {
            "schema": SCHEMA,
            "version": __version__,
            "invocation": _echo(args),
            "order": d,
            "input_sha256": _digest(inputs),
            "conventions": CONVENTIONS,
            "exit_code": code,
            "result": result,
        }
        if args.timing:
            report["timing_seconds"] = round(time.perf_counter() - start, 6)
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            try:
                write_atomic(args.json, text)
            except OSError as exc:
                print(f"kahlercone: error: cannot write {args.json}: {exc.strerror}", file=sys.stderr)
                return 2
    return code
