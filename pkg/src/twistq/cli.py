"""Command-line front end: `twistq <command> [options]`.

Every command prints JSON (or a short text rendering) and exits nonzero when a
check fails.  Options may also come from a key=value config file.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import suite
from .identities import (
    bethe_equations,
    degenerate_bethe_check,
    numeric_consistency,
    tq_relation,
    verify_counterexamples,
    verify_qq,
)
from .lweights import fold_char, parse_param, resolve
from .qchar_engine import (
    ExpansionFailure,
    TermBudgetExceeded,
    fm_qcharacter,
    kr_qcharacter,
    neg_prefund_qchar,
    parse_monomial,
    pos_prefund_qchar,
)
from .repcheck import BUILTIN, PreconditionError, drinfeld_generators, load_builtin, qchar_from_module, verify_drinfeld, verify_presentation
from .root_data import closed_form, det_f, det_f_prime


class ConfigError(ValueError):
    pass


def read_config(path):
    """Parse key=value lines; '#' starts a comment.  Returns [(line, key, value)]."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}:1: expected key=value")
            key, value = line.split("=", 1)
            key = key.strip().replace("_", "-")
            if not key:
                raise ConfigError(f"{path}:{n}:1: empty key")
            out.append((n, key, value.strip()))
    return out


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _nodes(fd, node):
    if node is None:
        return list(fd.reps)
    i = int(node)
    if i not in fd.rep_of:
        raise ValueError(f"node {i} is not a node of {fd.name}")
    return [fd.rep_of[i][0]]


def _params(text):
    return [parse_param(p) for p in text.split(",")]


# --- commands --------------------------------------------------------------------

def cmd_qchar(args):
    fd = resolve(args.type)
    a = parse_param(args.param)
    if args.kr:
        parts = args.kr.split(",")
        if len(parts) != 3:
            raise ValueError("--kr expects i,k,a")
        i, k, a = int(parts[0]), int(parts[1]), parse_param(parts[2])
        ch = kr_qcharacter(fd, i, k, a, args.trunc, args.budget)
        what = f"KR W^({i})_{{{k},{a.render()}}}"
    elif args.monomial:
        if fd.M > 1:
            raise ValueError("--monomial needs an untwisted type; use `fold` for twisted ones")
        ch = fm_qcharacter(fd, parse_monomial(args.monomial), args.trunc, args.budget)
        what = f"L({args.monomial})"
    elif args.neg_prefund is not None:
        ch = neg_prefund_qchar(fd, args.neg_prefund, a, args.trunc, args.budget)
        what = f"L-_{{{args.neg_prefund},{a.render()}}}"
    elif args.pos_prefund is not None:
        ch = pos_prefund_qchar(fd, args.pos_prefund, a, args.trunc, args.budget)
        what = f"L+_{{{args.pos_prefund},{a.render()}}}"
    elif args.module:
        ch = qchar_from_module(load_builtin(args.module, args.trunc + 3))
        what = f"module {args.module}"
    else:
        raise ValueError("choose one of --kr, --monomial, --neg-prefund, --pos-prefund, --module")
    if args.normalize:
        ch = ch.normalized()
    return {
        "command": "qchar",
        "type": ch.datum.name,
        "character": what,
        "trunc": ch.trunc,
        "terms": ch.to_json(),
        "total": ch.total(),
    }, True


def cmd_fold(args):
    fd = resolve(args.type)
    if fd.M == 1:
        raise ValueError("fold needs a twisted type such as A2^2")
    base = fd.unfolded()
    ch = fm_qcharacter(base, parse_monomial(args.monomial), args.trunc, args.budget)
    folded = fold_char(ch, fd)
    return {
        "command": "fold",
        "type": fd.name,
        "source_type": base.name,
        "monomial": args.monomial,
        "trunc": args.trunc,
        "source_total": ch.total(),
        "terms": folded.to_json(),
        "total": folded.total(),
    }, True


def cmd_detf(args):
    fd = resolve(args.type)
    rows = []
    ok = True
    for k in _ints(args.k):
        det = det_f(fd, k) if k % fd.M == 0 else det_f_prime(fd, k)
        row = {"k": k, "kind": "det F(k)" if k % fd.M == 0 else "det F'(k)", "value": det.render()}
        try:
            cf = closed_form(fd, k)
        except ValueError:
            cf = None
        if cf is not None:
            row["closed_form"] = cf.render()
            row["status"] = "pass" if cf == det else "fail"
            ok &= cf == det
        rows.append(row)
    return {"command": "detf", "type": fd.name, "anchor": suite.ANCHORS["detf"], "results": rows}, ok


def cmd_repcheck(args):
    m = load_builtin(args.module, args.bound, fault=args.inject_fault)
    rep = verify_presentation(m)
    if args.drinfeld:
        rep += verify_drinfeld(m, drinfeld_generators(m, args.series))
    ok = all(r["status"] == "pass" for r in rep)
    return {"command": "repcheck", "module": args.module, "bound": args.bound, "anchor": suite.ANCHORS["presentation"], "relations": rep}, ok


def cmd_qq(args):
    fd = resolve(args.type)
    rep = [verify_qq(fd, i, a, args.trunc) for i in _nodes(fd, args.node) for a in _params(args.params)]
    ok = all(r["status"] == "pass" for r in rep)
    return {"command": "qq-verify", "type": fd.name, "anchor": suite.ANCHORS["qq"], "relations": rep}, ok


def cmd_tq(args):
    fd = resolve(args.type)
    out = []
    ok = True
    for i in _nodes(fd, args.node):
        r = tq_relation(fd, i, args.param)
        lhs, rhs = r.evaluate(args.trunc)
        good = lhs == rhs
        ok &= good
        out.append(
            {
                "node": i,
                "relation": r.render(),
                "cleared": r.render_cleared(),
                "terms": len(r.terms),
                "evaluation_trunc": args.trunc,
                "status": "pass" if good else "fail",
            }
        )
    return {"command": "tq", "type": fd.name, "anchor": suite.ANCHORS["tq"], "relations": out}, ok


def cmd_bae(args):
    fd = resolve(args.type)
    out = []
    ok = True
    for i in _nodes(fd, args.node):
        system = bethe_equations(fd, i)
        err = numeric_consistency(fd, i, q0=args.q0, bits=args.precision_bits)
        lhs, rhs = degenerate_bethe_check(fd, i)
        good = err < args.tolerance
        ok &= good
        entry = system.to_json()
        entry.update(
            relative_error=f"{err:.3e}",
            constant_data_rejected=bool(abs(lhs - rhs) > 0),
            status="pass" if good else "fail",
        )
        out.append(entry)
    return {"command": "bae", "type": fd.name, "anchor": suite.ANCHORS["bae"], "q0": args.q0, "precision_bits": args.precision_bits, "systems": out}, ok


def cmd_counterexamples(args):
    rep = verify_counterexamples(args.bound)
    ok = all(r["status"] == "pass" for r in rep)
    return {"command": "counterexamples", "anchor": suite.ANCHORS["counterexamples"], "checks": rep}, ok


def cmd_verify_all(args):
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    rep = suite.run_all(only, fault=args.inject_fault)
    failed = [r for r in rep if r["status"] != "pass"]
    summary = {"checks": len(rep), "passed": len(rep) - len(failed), "failed": len(failed)}
    if failed:
        summary["first_failure"] = f"{failed[0]['suite']}: {failed[0]['check']}"
    return {"command": "verify-all", "summary": summary, "checks": rep}, not failed


COMMANDS = {
    "qchar": cmd_qchar,
    "fold": cmd_fold,
    "detf": cmd_detf,
    "repcheck": cmd_repcheck,
    "qq-verify": cmd_qq,
    "tq": cmd_tq,
    "bae": cmd_bae,
    "counterexamples": cmd_counterexamples,
    "verify-all": cmd_verify_all,
}


def _common(suppress):
    c = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    c.add_argument("--config", default=default, help="key=value file; keys mirror long option names")
    c.add_argument("--output", default=default, help="write the report here instead of stdout")
    c.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS if suppress else "json")
    return c


def build_parser():
    p = argparse.ArgumentParser(
        prog="twistq",
        description="q-characters, QQ~-systems and Bethe equations for twisted quantum affine algebras",
        parents=[_common(False)],
    )
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[_common(True)], **k)

    q = sub.add_parser("qchar", help="truncated q-character")
    q.add_argument("--type", default="A2^2")
    q.add_argument("--kr", help="KR module as i,k,a")
    q.add_argument("--monomial", help='dominant monomial such as "Y[1,1]*Y[2,-q^2]"')
    q.add_argument("--neg-prefund", type=int)
    q.add_argument("--pos-prefund", type=int)
    q.add_argument("--module", choices=sorted(BUILTIN))
    q.add_argument("--param", default="1")
    q.add_argument("--trunc", type=int, default=4)
    q.add_argument("--budget", type=int, default=10**6)
    q.add_argument("--normalize", action="store_true", help="divide by the ordinary character")

    f = sub.add_parser("fold", help="fold an untwisted q-character onto a twisted type")
    f.add_argument("--type", default="A2^2")
    f.add_argument("--monomial", required=True)
    f.add_argument("--trunc", type=int, default=8)
    f.add_argument("--budget", type=int, default=10**6)

    d = sub.add_parser("detf", help="determinants of the F(k) matrices")
    d.add_argument("--type", required=True)
    d.add_argument("--k", default="1,2,3,4")

    r = sub.add_parser("repcheck", help="check relations on a built-in module")
    r.add_argument("--module", choices=sorted(BUILTIN), required=True)
    r.add_argument("--bound", type=int, default=10)
    r.add_argument("--drinfeld", action="store_true", help="also check loop-generator relations")
    r.add_argument("--series", type=int, default=8)
    r.add_argument("--inject-fault", help=argparse.SUPPRESS)

    qq = sub.add_parser("qq-verify", help="QQ~-relations in the q-character image")
    qq.add_argument("--type", required=True)
    qq.add_argument("--node")
    qq.add_argument("--params", default="1,q,-1")
    qq.add_argument("--trunc", type=int, default=6)

    t = sub.add_parser("tq", help="TQ relation from the fundamental q-character")
    t.add_argument("--type", default="A2^2")
    t.add_argument("--node")
    t.add_argument("--param", default="1")
    t.add_argument("--trunc", type=int, default=4)

    b = sub.add_parser("bae", help="Bethe equations and their numeric consistency")
    b.add_argument("--type", required=True)
    b.add_argument("--node")
    b.add_argument("--q0", default="5/4")
    b.add_argument("--precision-bits", type=int, default=200)
    b.add_argument("--tolerance", type=float, default=1e-20)

    c = sub.add_parser("counterexamples", help="A2^(2) folding counterexamples")
    c.add_argument("--bound", type=int, default=8)

    v = sub.add_parser("verify-all", help="run every verification suite")
    v.add_argument("--only", help=f"comma list of suites: {', '.join(suite.SUITES)}")
    v.add_argument("--inject-fault", help=argparse.SUPPRESS)
    return p


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _config_path(argv):
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _with_config(parser, argv):
    """Insert config entries right after the command name, so explicit flags win."""
    path = _config_path(argv)
    if path is None:
        return argv
    command = next((t for t in argv if t in COMMANDS), None)
    if command is None:
        return argv
    sp = _subparser(parser, command)
    known = {s for a in sp._actions for s in a.option_strings}
    extra = []
    for line, key, value in read_config(path):
        flag = "--" + key
        if flag not in known or key in ("config", "output", "format"):
            if key in ("output", "format"):
                extra += [flag, value]
                continue
            raise ConfigError(f"{path}:{line}:1: unknown option {key!r} for {command}")
        action = next(a for a in sp._actions if flag in a.option_strings)
        if action.nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                extra.append(flag)
        else:
            extra += [flag, value]
    k = argv.index(command)
    return argv[: k + 1] + extra + argv[k + 1 :]


def _text(report):
    lines = [f"{report['command']}"]

    def walk(obj, indent):
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)):
                    lines.append(f"{indent}{k}:")
                    walk(v, indent + "  ")
                else:
                    lines.append(f"{indent}{k}: {v}")
        elif isinstance(obj, list):
            for x in obj:
                if isinstance(x, (dict, list)):
                    lines.append(f"{indent}-")
                    walk(x, indent + "  ")
                else:
                    lines.append(f"{indent}- {x}")

    walk({k: v for k, v in report.items() if k != "command"}, "  ")
    return "\n".join(lines) + "\n"


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _with_config(parser, argv)
    except (ConfigError, OSError) as exc:
        print(f"twistq: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        report, ok = COMMANDS[args.command](args)
    except (ValueError, KeyError, TermBudgetExceeded, ExpansionFailure, PreconditionError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"twistq {args.command}: error: {msg}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n" if args.format == "json" else _text(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
