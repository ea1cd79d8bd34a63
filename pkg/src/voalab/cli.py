"""Command-line front end.

Every subcommand produces one report.  Exit status: 0 when the report has no
failing instance and no error occurred, 1 on a verification failure, 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Optional, Sequence

from .linalg import Rational, fmt_rational, parse_rational
from .models import build_model, module_from_descriptor
from .models.table import AxiomViolation, emit_voa, parse_voa
from .modes import check_module_axioms
from .report import Report


class UsageError(Exception):
    pass


def _voa(args):
    if getattr(args, "input", None) and args.command in ("build", "check"):
        with open(args.input) as fh:
            return parse_voa(fh.read())
    if not args.model:
        raise UsageError("--model or --input is required")
    return build_model(args.model, _L(args, 6))


def _L(args, default) -> Rational:
    return Rational(default) if args.cutoff is None else args.cutoff


def _cutoff(text: str) -> Rational:
    try:
        c = parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid cutoff {text!r}") from exc
    if c < 0:
        raise argparse.ArgumentTypeError("cutoff must be >= 0")
    return c


# --- subcommands -------------------------------------------------------------------------------

def cmd_build(args) -> str:
    """The model description file itself (not a report)."""
    return emit_voa(_voa(args)) + "\n"


def cmd_check(args) -> Report:
    voa = _voa(args)
    module = module_from_descriptor(voa, args.module)
    return check_module_axioms(module, budget=args.budget, samples=args.samples, seed=args.seed)


def cmd_c2dim(args) -> Report:
    from .models.subspaces import cm_quotient_dim, stabilization
    cutoffs = [_cutoff(c) for c in args.cutoffs.split(",")]
    voa = build_model(args.model, max(cutoffs))
    module = module_from_descriptor(voa, args.module)
    dims = {L: cm_quotient_dim(module, args.m, L) for L in cutoffs}
    rep = Report(f"C_{args.m} quotient of {module.name}")
    rep.meta["dims"] = {fmt_rational(L): d for L, d in sorted(dims.items())}
    rep.meta["stabilized"] = stabilization(dims)
    for L, d in sorted(dims.items()):
        rep.notes.append(f"L={fmt_rational(L)} dim={d}")
    rep.notes.append(f"stabilized: {'yes' if rep.meta['stabilized'] else 'no'}")
    return rep


def cmd_zhu(args) -> Report:
    from .findim import radical
    from .zhu import TruncationUnstable, o_action_check, zhu_algebra
    voa = build_model(args.model, _L(args, 8))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationUnstable)
        q = zhu_algebra(voa, args.n, family=args.family)
    rep = Report(f"A_{args.n}({voa.name}) at L={fmt_rational(voa.cutoff)}")
    rep.extend(q.check_table())
    for desc in args.modules.split(",") if args.modules else []:
        rep.extend(o_action_check(q, module_from_descriptor(voa, desc.strip())))
    doc = q.to_json()
    rep.meta.update({k: doc[k] for k in ("dimensions", "stabilized") if k in doc})
    rep.meta["dimension"] = q.dim
    rep.meta["basis"] = q.labels()
    if q.complete:
        rep.meta["radical_dimension"] = len(radical(q.algebra()))
    if not q.stabilized:
        rep.notes.append("truncation has not stabilized; the quotient is an upper bound only")
    rep.notes.append(f"dim A_{args.n} = {q.dim}, basis {', '.join(q.labels())}")
    return rep


def _intertwiner(args):
    from . import catalog
    from .intertwiner import load_intertwiner
    if args.input:
        if not (args.model and args.W and args.U and args.T):
            raise UsageError("--input needs --model, --W, --U and --T")
        voa = build_model(args.model, _L(args, 4))
        mods = [module_from_descriptor(voa, d) for d in (args.W, args.U, args.T)]
        with open(args.input) as fh:
            return load_intertwiner(fh.read(), *mods)
    return catalog.INTERTWINERS[args.example]()


def cmd_intertwiner(args) -> Report:
    from .intertwiner import (RelationViolated, check_axioms, lemma3, log_component, modes_equal,
                              NotNilpotent, reconstruct)
    y = _intertwiner(args)
    rep = Report(f"intertwiner {y.name}")
    rep.extend(check_axioms(y, samples=args.samples, seed=args.seed))
    rep.meta["K"] = y.K
    try:
        rec = reconstruct(log_component(y, 0))
        diff = modes_equal(rec, y)
        rep.add_bool("round-trip", f"round-trip;K={rec.K}", diff is None, diff or "")
    except (RelationViolated, NotNilpotent) as exc:
        rep.add_bool("round-trip", "round-trip", False, str(exc))
    lem = lemma3(y)
    if lem.notes:
        rep.notes.extend(lem.notes)
    else:
        rep.extend(lem)
    return rep


def _extension(args):
    from .catalog import EXTENSIONS
    from .extension import load_instance
    if args.input:
        if not args.model:
            raise UsageError("--input needs --model")
        voa = build_model(args.model, _L(args, 4))
        with open(args.input) as fh:
            inp = load_instance(fh.read(), lambda d: module_from_descriptor(voa, d))
        return inp, None, None
    if args.cutoff is None:
        return EXTENSIONS[args.instance]()
    return EXTENSIONS[args.instance](args.cutoff)


def cmd_ext(args) -> Report:
    from .extension import (associativity_oracle, build_extension, InvalidDonor, mutation_sweep, verify_extension,
                            verify_submodule)
    inp, P, tops = _extension(args)
    voa = inp.voa
    rep = Report(f"extension {inp.name}")
    try:
        R = build_extension(inp, samples=args.samples)
    except InvalidDonor as exc:
        rep.extend(exc.report)
        return rep
    loc = [voa.gen_vector(g) for g in sorted(voa.generators)] + [voa.omega]
    verdict = verify_extension(R, loc, P, tops, samples=args.samples, seed=args.seed)
    for name in sorted(verdict.reports):
        r = verdict.reports[name]
        rep.extend(r)
        if "order" in r.meta:
            rep.notes.append(f"{name}: order {r.meta['order']} (bound N+1 = {r.meta['bound']})")
        if "K" in r.meta:
            rep.meta["K"] = r.meta["K"]
    for name, err in sorted(verdict.errors.items()):
        rep.add_bool("error", f"error;{name}", False, err)
    rep.extend(verify_submodule(R, args.samples, args.seed))
    rep.extend(associativity_oracle(R, args.samples, args.seed))
    if args.mutations:
        for k, (desc, failing) in enumerate(mutation_sweep(inp, args.mutations, args.seed, samples=None,
                                                           locality_with=loc)):
            rep.add_bool("mutation", f"mutation;k={k};entry={desc}", bool(failing),
                         "no verifier detected the perturbation")
    return rep


_BUILTIN_ALGEBRAS = {
    "x2": lambda fd: fd.truncated_polynomial(2),
    "x3": lambda fd: fd.truncated_polynomial(3),
    "qxq": lambda fd: fd.product_algebra(fd.truncated_polynomial(1), fd.truncated_polynomial(1)),
    "ut2": lambda fd: fd.upper_triangular(2),
    "m2": lambda fd: fd.matrix_units(2),
}


def cmd_algebra(args) -> Report:
    from . import findim as fd
    if args.input:
        with open(args.input) as fh:
            A = fd.algebra_from_json_text(fh.read())
    elif args.builtin:
        A = _BUILTIN_ALGEBRAS[args.builtin](fd)
    else:
        raise UsageError("--input or --builtin is required")
    rep = Report("algebra")
    rep.extend(A.check())
    dims, maps = fd.ses_radical(A)
    rep.extend(fd.check_exact(dims, maps, "0 -> rad A -> A -> A/rad A -> 0"))
    for k, P in enumerate(fd.projective_indecomposables(A, args.seed)):
        rep.add_bool("projective", f"projective;k={k};dim={P.dim}", fd.is_projective(P, args.seed).projective)
        cover = fd.projective_cover(fd.top(P)[0], args.seed)
        rep.add_bool("cover", f"cover;k={k}", cover.superfluous and cover.P.dim == P.dim)
    summary = fd.algebra_summary(A, args.seed)
    rep.meta.update(summary)
    rep.notes.append(f"dim {summary['dimension']}, radical {summary['radical_dimension']}, "
                     f"projectives {summary['projective_dimensions']}")
    return rep


def cmd_diagram(args) -> Report:
    from .findim import check_commutative_diagram, load_diagram
    if not args.input:
        raise UsageError("--input is required")
    with open(args.input) as fh:
        return check_commutative_diagram(load_diagram(json.load(fh)))


COMMANDS = {
    "build": cmd_build, "check": cmd_check, "c2dim": cmd_c2dim, "zhu": cmd_zhu,
    "intertwiner": cmd_intertwiner, "ext": cmd_ext, "algebra": cmd_algebra, "diagram": cmd_diagram,
}


# --- argument parsing and output ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .catalog import EXTENSIONS, INTERTWINERS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="heisenberg, ising, virasoro:<c> or minimal:<p>,<q>")
    common.add_argument("--input", help="input file (format depends on the subcommand)")
    common.add_argument("--cutoff", type=_cutoff, default=None,
                        help="truncation weight L (default depends on the subcommand)")
    common.add_argument("--budget", type=_cutoff, default=Rational(6), help="weight budget for exhaustive checks")
    common.add_argument("--samples", type=int, default=200, help="sampled instances per check above the budget")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--verbose", action="store_true", help="list passing instances too")
    common.add_argument("--replay", metavar="DESCRIPTOR", help="report only the instance with this descriptor")

    p = argparse.ArgumentParser(prog="voalab", description="Exact truncated computations with vertex algebras.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="emit a model description file")
    s = sub.add_parser("check", parents=[common], help="module axiom report")
    s.add_argument("--module", default="V", help="module descriptor (V, F(mu), J(mu), h=<weight>, dual(...))")
    s = sub.add_parser("c2dim", parents=[common], help="C_m quotient dimensions over cutoffs")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--cutoffs", default="6,7,8")
    s.add_argument("--module", default="V")
    s = sub.add_parser("zhu", parents=[common], help="A_n report")
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--family", choices=("dlm", "circ"), default="dlm")
    s.add_argument("--modules", default="", help="comma-separated module descriptors for the o-action check")
    s = sub.add_parser("intertwiner", parents=[common], help="axiom and reconstruction suite")
    s.add_argument("--example", choices=sorted(INTERTWINERS), default="jordan")
    s.add_argument("--W")
    s.add_argument("--U")
    s.add_argument("--T")
    s = sub.add_parser("ext", parents=[common], help="extension construction pipeline")
    s.add_argument("--instance", choices=sorted(EXTENSIONS), default="toy")
    s.add_argument("--mutations", type=int, default=0, help="number of seeded donor mutations to try")
    s = sub.add_parser("algebra", parents=[common], help="radical, projectives and covers")
    s.add_argument("--builtin", choices=sorted(_BUILTIN_ALGEBRAS))
    sub.add_parser("diagram", parents=[common], help="commutativity and exactness of a diagram")
    return p


def render(rep: Report, fmt: str, verbose: bool) -> str:
    if fmt == "json":
        return rep.dumps() + "\n"
    return "\n".join(rep.lines(verbose)) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rep = COMMANDS[args.command](args)
        if isinstance(rep, str):
            _write(rep, args.output)
            return 0
    except AxiomViolation as exc:
        print(f"voalab {args.command}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, FileNotFoundError, KeyError) as exc:
        # UnknownModel, ParseError, ShapeMismatch and JSONDecodeError are ValueErrors
        print(f"voalab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    verbose = args.verbose
    if args.replay:
        hits = [e for e in rep.entries if e.descriptor == args.replay]
        if not hits:
            print(f"voalab {args.command}: error: no instance {args.replay!r} in this run", file=sys.stderr)
            return 2
        replay = Report(f"{rep.title} [replay]", hits)
        rep, verbose = replay, True
    _write(render(rep, args.format, verbose), args.output)
    return 0 if rep.passed else 1


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
