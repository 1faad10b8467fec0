"""Command line: ``weightedlin {analyze,linearize,flow,exp,bracket,pullback}``.

Exit codes: 0 success, 2 not admissible, 3 singular adjoint, 4 parse or
configuration error, 5 non-evaluative isotopy.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import NonEvaluative, NotADiffeo, NotAdmissible, SingularAdjoint
from .normal_form import adjoint_matrix, is_adjoint_invertible, kernel_fields, linearize
from .parsing import ParseError, parse_field, parse_time_field, parse_tuple
from .series import SeriesContext, TruncatedSeries, Weighting, format_monomial, format_series
from .spectral import (
    Unsupported,
    char_poly,
    compatible_ordering,
    enumerate_resonances,
    enumerate_resonances_float,
    float_ordering,
    is_hyperbolic,
    weighted_linear_part,
)
from .vectorfield import (
    FormalDiffeo,
    TimeVectorField,
    VectorField,
    evaluate_isotopy,
    exponential_flow,
    flow,
    format_field,
    lie_bracket,
    meets_flow_order_hypothesis,
    pullback_vf,
)
from .weighting import admissibility_witness, graded_components, weighted_linear_approximation

EXIT_OK = 0
EXIT_NOT_ADMISSIBLE = 2
EXIT_SINGULAR = 3
EXIT_CONFIG = 4
EXIT_NON_EVALUATIVE = 5

CONVENTION = (
    "phi_inverse gives the new coordinate functions; phi pulls X back by "
    "(phi^* X)(x) = D phi(x)^{-1} X(phi(x)) and phi^* X equals the weighted linear part"
)


class ConfigError(ValueError):
    pass


# -- serialization -----------------------------------------------------------


def rational(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def series_json(f: TruncatedSeries, names) -> dict:
    return {
        "text": format_series(f, names),
        "terms": [{"alpha": list(a), "coeff": rational(c)} for a, c in f.items()],
    }


def field_json(X: VectorField, names) -> dict:
    return {
        "text": format_field(X, names),
        "components": [dict(variable=names[i], **series_json(c, names)) for i, c in enumerate(X)],
    }


def diffeo_json(phi, names) -> dict:
    comps = phi.components if isinstance(phi, FormalDiffeo) else phi
    return {
        "text": ", ".join(format_series(c, names) for c in comps),
        "components": [dict(variable=names[i], **series_json(c, names)) for i, c in enumerate(comps)],
    }


def _json_value(v):
    if isinstance(v, Fraction):
        return rational(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


# -- input -------------------------------------------------------------------


def _load_field_source(args):
    """Field text from the positional argument or ``-f FILE``; JSON files may set defaults."""
    if args.file:
        raw = Path(args.file).read_text(encoding="utf-8")
        if args.file.endswith(".json") or raw.lstrip().startswith("{"):
            return _field_from_json(json.loads(raw), args)
        return raw
    if args.field is None:
        raise ConfigError("no field given (pass it inline or with -f FILE)")
    return args.field


def _field_from_json(doc, args):
    result = doc.get("result", doc)
    if args.vars is None:
        names = result.get("variables") or doc.get("variables")
        if names:
            args.vars = ",".join(names)
    if args.weights is None:
        w = doc.get("weighting") or result.get("weighting")
        if w:
            args.weights = ",".join(str(x) for x in w)
    fld = result.get("field")
    if fld is None:
        raise ConfigError("JSON input has no 'field' entry")
    if isinstance(fld, str):
        return fld
    if "text" in fld:
        return fld["text"]
    names = args.vars.split(",")
    parts = []
    for comp, name in zip(fld["components"], names):
        for term in comp["terms"]:
            mono = format_monomial(term["alpha"], names) or "1"
            parts.append(f"({term['coeff']})*{mono}*d/d{name}")
    return " + ".join(parts) or f"0*d/d{names[0]}"


def _setup(args):
    """Resolve variables, weighting (optionally permuted) and contexts."""
    if not args.vars:
        raise ConfigError("--vars is required")
    names = [v.strip() for v in args.vars.split(",")]
    if len(set(names)) != len(names) or not all(names):
        raise ConfigError("variable names must be distinct and non-empty")
    if args.weights:
        try:
            weights = [int(x) for x in args.weights.split(",")]
        except ValueError:
            raise ConfigError(f"bad weighting {args.weights!r}") from None
    else:
        weights = [1] * len(names)
    if len(weights) != len(names):
        raise ConfigError("weighting length does not match the number of variables")
    if any(x < 1 for x in weights):
        raise ConfigError("weights must be positive integers")
    permutation = None
    if any(a > b for a, b in zip(weights, weights[1:])):
        if not args.permute_weights:
            raise ConfigError("weights must be non-decreasing (use --permute-weights to sort them)")
        order = sorted(range(len(names)), key=lambda i: weights[i])
        names = [names[i] for i in order]
        weights = [weights[i] for i in order]
        permutation = names
    if args.order < 1:
        raise ConfigError("--order must be at least 1")
    ctx = SeriesContext(Weighting(tuple(weights)), args.order)
    return names, ctx, permutation


# -- commands ----------------------------------------------------------------


def _analyze(X, names, ctx, args):
    witness = admissibility_witness(X)
    slices = graded_components(X)
    result = {
        "admissible": witness is None,
        "witness": None if witness is None else {"axis": names[witness[0]], "alpha": list(witness[1])},
        "slices": [
            {"degree": k, "field": field_json(S, names)} for k, S in slices.items()
        ],
    }
    certs = []
    exactness = "exact"
    if witness is None:
        X0 = weighted_linear_approximation(X)
        for k in range(1, ctx.cutoff + 1):
            A = adjoint_matrix(X0, k)
            check = is_adjoint_invertible(A)
            cert = {"degree": k, "dimension": A.dimension, "invertible": check.invertible,
                    "determinant": check.determinant}
            if not check.invertible:
                cert["kernel"] = [field_json(K, names) for K in kernel_fields(A, check.kernel, ctx)]
            certs.append(cert)
        L = weighted_linear_part(X)
        lam = compatible_ordering(L)
        if isinstance(lam, Unsupported):
            flam = float_ordering(L)
            report = enumerate_resonances_float(flam, ctx.weighting, ctx.cutoff)
            exactness = "heuristic"
            result["eigenvalues"] = [[z.real, z.imag] for z in flam]
            result["unsupported_factors"] = {
                str(l): [{"factor": str(p), "multiplicity": m} for p, m in facs]
                for l, facs in lam.factors.items()
            }
        else:
            report = enumerate_resonances(lam, ctx.weighting, ctx.cutoff)
            result["eigenvalues"] = list(lam)
        result["char_poly"] = str(char_poly(L))
        result["resonances"] = [
            {"axis": names[i], "alpha": list(a), "degree": k} for i, a, k in report.resonances
        ]
        result["resonance_exactness"] = report.exactness
        result["hyperbolic"] = is_hyperbolic(L)
    code = EXIT_OK if witness is None else EXIT_NOT_ADMISSIBLE
    return result, certs, exactness, code


def _linearize(X, names, ctx, args):
    res = linearize(X, N=ctx.cutoff, method=args.method, threads=args.threads)
    gen = [
        {"degree": k + 1, "field": field_json(U, names)}
        for k, U in enumerate(res.generator.coefficients)
        if not U.is_zero()
    ]
    result = {
        "method": res.method,
        "convention": CONVENTION,
        "linear_part": field_json(res.linear_part, names),
        "phi": diffeo_json(res.phi, names),
        "phi_inverse": diffeo_json(res.phi_inverse, names),
        "generator": gen,
        "residual": field_json(res.residual, names),
        "verified": res.verified,
        "checks": res.checks,
    }
    return result, res.certificates, "exact", EXIT_OK


def _isotopy_result(iso, names, args):
    result = {
        "t_degree": iso.t_degree,
        "tail_vanishes": iso.tail_vanishes,
        "coefficients": [
            {"k": k, "components": diffeo_json(c, names)["components"]}
            for k, c in enumerate(iso.coefficients)
        ],
    }
    if args.at is not None:
        tau = Fraction(args.at)
        result["at"] = rational(tau)
        try:
            result["value"] = diffeo_json(evaluate_isotopy(iso, tau), names)
        except NonEvaluative as e:
            e.partial = result
            raise
    return result


def _flow(text, names, ctx, args):
    X_t = parse_time_field(text, ctx, names)
    iso = flow(X_t, t_cap=args.t_cap if args.t_cap is not None else _default_cap(X_t, ctx))
    return _isotopy_result(iso, names, args), [], "exact", EXIT_OK


def _default_cap(X_t: TimeVectorField, ctx):
    return None if meets_flow_order_hypothesis(X_t) else ctx.cutoff


def _exp(X, names, ctx, args):
    iso = exponential_flow(X, args.t_cap if args.t_cap is not None else ctx.cutoff)
    return _isotopy_result(iso, names, args), [], "exact", EXIT_OK


def _bracket(X, names, ctx, args):
    if not args.with_field:
        raise ConfigError("bracket needs --with FIELD")
    Y = parse_field(args.with_field, ctx, names)
    return {"with": field_json(Y, names), "output": field_json(lie_bracket(X, Y), names)}, [], "exact", EXIT_OK


def _pullback(X, names, ctx, args):
    if not args.diffeo:
        raise ConfigError("pullback needs --diffeo 'expr1, expr2, ...'")
    phi = FormalDiffeo(ctx, parse_tuple(args.diffeo, ctx, names))
    return {"diffeo": diffeo_json(phi, names), "output": field_json(pullback_vf(phi, X), names)}, [], "exact", EXIT_OK


COMMANDS = {
    "analyze": _analyze,
    "linearize": _linearize,
    "exp": _exp,
    "bracket": _bracket,
    "pullback": _pullback,
}


# -- text rendering ----------------------------------------------------------


def render_text(report: dict) -> str:
    lines = [f"weightedlin {report['version']}  {report['command']}  "
             f"w={tuple(report['weighting'])}  N={report['cutoff']}  ({report['exactness']})"]
    res = report["result"]
    lines.append("variables: " + ", ".join(res.get("variables", [])))
    if res.get("permutation"):
        lines.append("permutation: " + ", ".join(res["permutation"]))
    if "error" in res:
        lines.append(f"error: {res['error']}")
    cmd = report["command"]
    if cmd == "analyze" and "admissible" in res:
        lines.append(f"admissible: {res['admissible']}")
        if res["witness"]:
            lines.append(f"  witness: {res['witness']['alpha']} d/d{res['witness']['axis']}")
        for s in res["slices"]:
            lines.append(f"  X[{s['degree']}] = {s['field']['text']}")
        if "hyperbolic" in res:
            lines.append(f"char poly: {res['char_poly']}")
            lines.append(f"eigenvalues: {res['eigenvalues']}")
            lines.append(f"resonances ({res['resonance_exactness']}): "
                         + (", ".join(f"({r['axis']}, {r['alpha']}) deg {r['degree']}"
                                      for r in res["resonances"]) or "none"))
            lines.append(f"hyperbolic: {res['hyperbolic']}")
    elif cmd == "linearize" and "phi" in res:
        lines.append(f"method: {res['method']}")
        lines.append(f"X[0]  = {res['linear_part']['text']}")
        lines.append(f"phi   = ({res['phi']['text']})")
        lines.append(f"phi^-1 = ({res['phi_inverse']['text']})   [new coordinate functions]")
        for g in res["generator"]:
            lines.append(f"U[{g['degree']}] = {g['field']['text']}")
        lines.append(f"residual: {res['residual']['text']}  verified: {res['verified']}")
    elif cmd in ("flow", "exp") and "coefficients" in res:
        for c in res["coefficients"]:
            lines.append(f"t^{c['k']}: (" + ", ".join(x["text"] for x in c["components"]) + ")")
        lines.append(f"tail vanishes: {res['tail_vanishes']}")
        if "value" in res:
            lines.append(f"at t={res['at']}: ({res['value']['text']})")
    elif "output" in res:
        if "diffeo" in res:
            lines.append(f"phi = ({res['diffeo']['text']})")
        lines.append(res["output"]["text"])
    for c in report["certificates"]:
        extra = "" if c["invertible"] else f"  kernel: {[k['text'] for k in c.get('kernel', [])]}"
        lines.append(f"  degree {c['degree']}: dim {c['dimension']}, "
                     f"invertible {c['invertible']}, det {c['determinant']}{extra}")
    return "\n".join(lines) + "\n"


# -- driver ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("field", nargs="?", help="vector field, e.g. '(x + y^2)*d/dx + 2*y*d/dy'")
    common.add_argument("-f", "--file", help="read the field from a text or JSON file")
    common.add_argument("--vars", help="comma-separated variable names")
    common.add_argument("--weights", help="comma-separated positive weights (default all 1)")
    common.add_argument("--order", type=int, default=10, help="truncation order N (default 10)")
    common.add_argument("--t-cap", type=int, dest="t_cap", help="highest t-power for flow/exp")
    common.add_argument("--method", choices=["moser", "euler", "oracle"], default="moser")
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--permute-weights", action="store_true",
                        help="sort a non-monotone weighting and relabel variables")
    parser = argparse.ArgumentParser(prog="weightedlin", description="Weighted linearization of formal vector fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="admissibility, slices, adjoint certificates, resonances")
    sub.add_parser("linearize", parents=[common], help="compute phi with phi^* X = X[0]")
    for name in ("flow", "exp"):
        p = sub.add_parser(name, parents=[common], help=f"{name} isotopy of a field")
        p.add_argument("--at", help="evaluate at this rational time")
    sub.add_parser("bracket", parents=[common], help="Lie bracket [X, Y]").add_argument(
        "--with", dest="with_field", help="second field Y")
    sub.add_parser("pullback", parents=[common], help="pull X back along a diffeomorphism").add_argument(
        "--diffeo", help="comma-separated coordinate tuple")
    return parser


def run(args) -> tuple:
    """Execute one job; returns ``(exit code, report dict)``."""
    report = {
        "version": __version__,
        "command": args.command,
        "weighting": [],
        "cutoff": args.order,
        "result": {},
        "certificates": [],
        "exactness": "exact",
    }
    try:
        text = _load_field_source(args)
        names, ctx, permutation = _setup(args)
        report["weighting"] = list(ctx.weights)
        report["result"] = {"variables": names}
        if permutation:
            report["result"]["permutation"] = permutation
        if args.command == "flow":
            result, certs, exactness, code = _flow(text, names, ctx, args)
        else:
            X = parse_field(text, ctx, names)
            report["result"]["field"] = field_json(X, names)
            result, certs, exactness, code = COMMANDS[args.command](X, names, ctx, args)
        report["result"].update(result)
        report["certificates"] = certs
        report["exactness"] = exactness
        return code, report
    except NotAdmissible as e:
        report["result"]["error"] = str(e)
        report["result"]["witness"] = {"axis": _name(report, e.axis), "alpha": list(e.alpha)}
        return EXIT_NOT_ADMISSIBLE, report
    except SingularAdjoint as e:
        names = report["result"].get("variables")
        report["result"]["error"] = str(e)
        report["result"]["degree"] = e.degree
        report["result"]["kernel"] = [field_json(K, names) for K in e.kernel]
        return EXIT_SINGULAR, report
    except NonEvaluative as e:
        report["result"].update(getattr(e, "partial", {}))
        report["result"]["error"] = str(e)
        return EXIT_NON_EVALUATIVE, report
    except (ParseError, ConfigError, NotADiffeo, ValueError, OSError, json.JSONDecodeError, KeyError) as e:
        report["result"]["error"] = str(e)
        return EXIT_CONFIG, report


def _name(report, axis):
    names = report["result"].get("variables")
    return names[axis] if names else axis


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    code, report = run(args)
    report = _json_value(report)
    out = json.dumps(report, indent=2) + "\n" if args.format == "json" else render_text(report)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    if code != EXIT_OK and args.format == "text" and "error" in report["result"]:
        print(report["result"]["error"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
