"""Command line interface.

    pvadirac check FILE [--structure NAME] [--depth K]
    pvadirac bracket FILE --structure NAME --left EXPR --right EXPR [--dirac CONSTRAINTS]
    pvadirac dirac FILE --structure NAME --constraints NAME [--reduce]
    pvadirac hierarchy FILE --h0 NAME --h1 NAME --seed EXPR --steps N
    pvadirac sl3 [--emit json]

FILE is a model file path or a built-in model name (sl3min, sl3red).
Exit codes: 0 all checks pass, 1 a check failed, 2 input error, 3 degeneracy.
"""

import argparse
import json
import sys
from itertools import combinations

from .config import RunConfig
from .diffring import DenominatorVanishes, HelmholtzViolation, NonPolynomialInput
from .dirac import NotCentral, NotInvertible, NotSpecialForm, dirac_bracket, dirac_reduce, \
    dirac_modify
from .hierarchy import Mismatch, NonPolynomialGradient, NoWitness, StepFailure, run_hierarchy
from .model import emit_model, parse_model
from .parse import ParseError, parse_function
from .psdo import Degenerate
from .pva import CheckReport, UnsupportedStructure, check_compatibility, check_jacobi, \
    check_skewsymmetry, master_bracket

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3

_DEGENERATE = (NotInvertible, NoWitness, DenominatorVanishes, Degenerate)
_INPUT = (ParseError, NotSpecialForm, FileNotFoundError, UnsupportedStructure, ValueError)


class Output:
    """Collects report sections; renders text or canonical JSON."""

    def __init__(self, emit):
        self.emit = emit
        self.sections = []

    def report(self, rep):
        self.sections.append(("report", rep))

    def text(self, title, body):
        self.sections.append(("text", (title, body)))

    def render(self):
        if self.emit == "json":
            doc = []
            for kind, item in self.sections:
                if kind == "report":
                    doc.append(item.as_dict())
                else:
                    doc.append({"title": item[0], "text": item[1]})
            return json.dumps(doc, indent=2, sort_keys=True)
        out = []
        for kind, item in self.sections:
            if kind == "report":
                out.append("== %s" % item.title)
                out.append(item.text())
            else:
                out.append("== %s" % item[0])
                out.append(item[1])
        return "\n".join(out)


def _config(args):
    over = {}
    if getattr(args, "depth", None) is not None:
        over = dict(depth_d=args.depth, depth_lambda=args.depth, depth_mu=args.depth)
    emit = getattr(args, "emit", None)
    if emit:
        over["emit"] = emit
    return RunConfig.from_env(**over)


def cmd_check(args, cfg, out):
    model = parse_model(args.file, cfg)
    depths = (cfg.depth_lambda, cfg.depth_mu)
    names = [args.structure] if args.structure else list(model.structures)
    ok = True
    for name in names:
        S = model.structure(name)
        rep = check_skewsymmetry(S, depth=cfg.depth_lambda)
        out.report(rep)
        jac = check_jacobi(S, depths)
        out.report(jac)
        ok = ok and rep.passed and jac.passed
    if not args.structure:
        for a, b in combinations(names, 2):
            comp = check_compatibility(model.structure(a), model.structure(b), depths)
            out.report(comp)
            ok = ok and comp.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bracket(args, cfg, out):
    model = parse_model(args.file, cfg)
    S = model.structure(args.structure)
    f = parse_function(args.left, model.algebra)
    g = parse_function(args.right, model.algebra)
    if args.dirac:
        val = dirac_bracket(S, model.constraints(args.dirac), f, g, cfg.depth_lambda)
        title = "{%s_lambda %s}^D" % (f, g)
    else:
        val = master_bracket(S, f, g, cfg.depth_lambda)
        title = "{%s_lambda %s}" % (f, g)
    out.text(title, str(val))
    return EXIT_OK


def _emit_wnl(W, name):
    if W is None:
        return None
    return emit_model(W.algebra, [(name, W)])


def cmd_dirac(args, cfg, out):
    model = parse_model(args.file, cfg)
    S = model.structure(args.structure)
    theta = model.constraints(args.constraints)
    K = cfg.depth_d
    if args.reduce:
        res = dirac_reduce(S, theta, K)
    else:
        res = dirac_modify(S, theta, K)
    out.text("constraint matrix C", str(res.C))
    out.report(res.report)
    name = "%s_dirac" % S.name
    if res.H_tilde_wnl is not None:
        out.text("modified structure (model fragment)", _emit_wnl(res.H_tilde_wnl, name))
    else:
        out.text("modified structure (truncated at d^-%d)" % K, str(res.H_tilde))
    if args.reduce:
        if res.H_D_wnl is not None:
            out.text("reduced structure (model fragment)",
                     _emit_wnl(res.H_D_wnl, "%s_reduced" % S.name))
        else:
            out.text("reduced structure (truncated at d^-%d)" % K, str(res.H_D))
    return EXIT_OK if res.report.passed else EXIT_FAIL


def cmd_hierarchy(args, cfg, out):
    model = parse_model(args.file, cfg)
    S0, S1 = model.structure(args.h0), model.structure(args.h1)
    seed = parse_function(args.seed, model.algebra)
    if args.steps < 0:
        raise ValueError("steps must be >= 0")
    st = run_hierarchy(S0, S1, seed, args.steps)
    rep = CheckReport("hierarchy %s, %s" % (S0.name, S1.name))
    for n, (g, P, F) in enumerate(st.steps):
        rep.notes.append("g_%d = %s" % (n, g))
        if P is None:
            continue
        for i, p in enumerate(P):
            rep.notes.append("P_%d[%s] = %s" % (n, model.algebra.names[i], p))
        rep.notes.append("F_%d = (%s)" % (n, ", ".join(map(str, F))))
        rep.add("STEP %d %s: g_%d <-> P_%d" % (n, S1.name, n, n), True, "")
        rep.add("STEP %d %s: g_%d <-> P_%d" % (n, S0.name, n + 1, n), True, "")
    for m, n, ok in st.involution:
        rep.add("INVOLUTION g_%d, P_%d" % (m, n), ok, "")
    rep.notes.append("flows indexed so that P_n = H1 delta g_n = H0 delta g_(n+1)")
    out.report(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_sl3(args, cfg, out):
    from .sl3 import reproduce
    rep = reproduce(cfg)
    out.report(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="pvadirac", description="Dirac reduction for PVAs")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, file=True):
        if file:
            sp.add_argument("file")
        sp.add_argument("--depth", type=int, default=None)
        sp.add_argument("--emit", choices=("text", "json"), default=None)

    sp = sub.add_parser("check", help="skewsymmetry, Jacobi and compatibility")
    common(sp)
    sp.add_argument("--structure")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bracket", help="lambda-bracket of two expressions")
    common(sp)
    sp.add_argument("--structure", required=True)
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--dirac", metavar="CONSTRAINTS")
    sp.set_defaults(func=cmd_bracket)

    sp = sub.add_parser("dirac", help="Dirac modification and reduction")
    common(sp)
    sp.add_argument("--structure", required=True)
    sp.add_argument("--constraints", required=True)
    sp.add_argument("--reduce", action="store_true")
    sp.set_defaults(func=cmd_dirac)

    sp = sub.add_parser("hierarchy", help="Lenard-Magri recursion")
    common(sp)
    sp.add_argument("--h0", required=True)
    sp.add_argument("--h1", required=True)
    sp.add_argument("--seed", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.set_defaults(func=cmd_hierarchy)

    sp = sub.add_parser("sl3", help="reproduce the sl3 example")
    common(sp, file=False)
    sp.set_defaults(func=cmd_sl3)
    return p


def run_command(argv):
    """(exit code, rendered output)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_INPUT if exc.code else EXIT_OK), ""
    try:
        cfg = _config(args)
    except ValueError as exc:
        return EXIT_INPUT, "input error: %s" % exc
    out = Output(cfg.emit)
    try:
        code = args.func(args, cfg, out)
    except StepFailure as exc:
        code = EXIT_DEGENERATE if isinstance(exc.cause, _DEGENERATE) else EXIT_FAIL
        out.text("error", "%s: %s" % (type(exc.cause).__name__, exc))
    except _DEGENERATE as exc:
        code = EXIT_DEGENERATE
        out.text("error", "%s: %s" % (type(exc).__name__, exc))
    except (Mismatch, HelmholtzViolation, NonPolynomialGradient, NotCentral) as exc:
        code = EXIT_FAIL
        out.text("error", "%s: %s" % (type(exc).__name__, exc))
    except (NonPolynomialInput,) + _INPUT as exc:
        code = EXIT_INPUT
        out.text("error", "%s: %s" % (type(exc).__name__, exc))
    return code, out.render()


def main(argv=None):
    code, text = run_command(sys.argv[1:] if argv is None else argv)
    if text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
