"""Named verification checks used by `twistq verify-all`.

Each check returns a report entry with an `anchor`: a short verbatim phrase of
the statement being checked, so a reader can locate it in the source text.
"""
from __future__ import annotations

from collections import Counter

from .identities import (
    bethe_equations,
    numeric_consistency,
    tq_relation,
    verify_counterexamples,
    verify_qq,
)
from .lweights import (
    LWeight,
    QCharacter,
    SpectralParam,
    alpha_weight,
    fold_char,
    make_A,
    make_psi,
    make_psi_tilde,
    parse_param,
    resolve,
)
from .qchar_engine import kr_monomial, kr_qcharacter, neg_prefund_qchar, pos_prefund_qchar
from .repcheck import (
    BUILTIN,
    PreconditionError,
    load_builtin,
    module_lweights,
    qchar_from_module,
    report_ok,
    verify_phi_vanishing,
    verify_presentation,
)
from .root_data import closed_form, det_f, det_f_prime

ANCHORS = {
    "detf": "We list the result of calculations of $D(Mk,q)$ and $D'(k,q)$",
    "presentation": "is generated by Drinfeld-Jimbo generators",
    "phi-spectrum": "the basis $v_{i,j}$ are $l$-weight vectors and the $\\phi$ actions are given by",
    "module-qchar": "It has $q$-character",
    "counterexamples": "has dimension 6, while the module",
    "qq": "Then they satisfy the equations",
    "tq": "obtained from the formula of $\\chi_q^{\\sigma}(V_{i,a})$ by replacing each $Z_{\\bar{j},b}$",
    "folding": "holds when $L(\\Psi)$ is a prefundamental representation",
    "phi-vanishing": "$\\phi_{i,p}.v =0$ for $p$ sufficiently large",
    "limits": "\\lim \\frac{\\chi_q^{\\sigma}(L(M_k))}{M_k}",
    "bae": "This coincides with the Bethe Ansatz equation",
}

SUITES = tuple(ANCHORS)

P = parse_param


def _entry(suite, name, ok, **detail):
    out = {"suite": suite, "check": name, "anchor": ANCHORS[suite], "status": "pass" if ok else "fail"}
    out.update(detail)
    return out


def _first_diff(x, y):
    keys = sorted(set(x.terms) | set(y.terms), key=lambda w: w.sort_key())
    for w in keys:
        if x.terms.get(w, 0) != y.terms.get(w, 0):
            return f"{w.render()}: {x.terms.get(w, 0)} vs {y.terms.get(w, 0)}"
    return None


# --- reference closed forms for the explicit A_2^(2) and sl_3 modules -------

def _chain(fd, i, start, length, step=SpectralParam.q(-2)):
    w = LWeight.identity(fd)
    b = start
    for _ in range(length):
        w = w / make_A(fd, i, b)
        b = b * step
    return w


def reference_neg_prefund(trunc):
    """(1-u)^-1 sum_{i<=j} A^-1_{1} ... A^-1_{q^{-2j+2}} A^-1_{-q} ... A^-1_{-q^{-2i+3}}."""
    fd = resolve("A2^2")
    top = make_psi(fd, 1, P("1"), -1)
    terms = Counter()
    for j in range(trunc + 1):
        for i in range(min(j, trunc - j) + 1):
            terms[top * _chain(fd, 1, P("1"), j) * _chain(fd, 1, P("-q"), i)] += 1
    return QCharacter(fd, dict(terms), top.const, trunc)


def reference_pos_prefund(trunc):
    """(1-u) sum_k floor((k+2)/2) [alpha]^-k."""
    fd = resolve("A2^2")
    top = make_psi(fd, 1, P("1"), 1)
    terms = {top * alpha_weight(fd, 1, -k): (k + 2) // 2 for k in range(trunc + 1)}
    return QCharacter(fd, terms, top.const, trunc)


def reference_x(trunc):
    fd = resolve("A2^2")
    top = make_psi_tilde(fd, 1, P("1"))
    terms = {top * _chain(fd, 1, P("1"), j): 1 for j in range(trunc + 1)}
    return QCharacter(fd, terms, top.const, trunc)


def reference_xtilde_sl3(trunc):
    fd = resolve("A2")
    top = make_psi_tilde(fd, 1, P("1"))
    terms = Counter()
    for k in range(trunc + 1):
        for m in range(trunc - k + 1):
            terms[top * _chain(fd, 1, P("1"), k) * alpha_weight(fd, 2, -m)] += 1
    return QCharacter(fd, dict(terms), top.const, trunc)


REFERENCE_CHARACTERS = {
    "neg_prefund_A2t": reference_neg_prefund,
    "pos_prefund_A2t": reference_pos_prefund,
    "X_A2t": reference_x,
    "Xtilde_sl3": reference_xtilde_sl3,
}


def reference_phi(i, j):
    """The closed-form l-weight of v_{i,j} in the negative prefundamental module."""
    fd = resolve("A2^2")
    roots = Counter()
    for n, m, e in [
        (6, 3, 1), (-4 * i + 4, 0, 1), (-4 * j + 2, 3, 1),
        (-4 * i + 2, 3, -1), (-4 * i + 6, 3, -1), (-4 * j, 0, -1), (-4 * j + 4, 0, -1),
    ]:
        roots[SpectralParam(n, m)] += e
    return LWeight(fd, [-(i + j)], [dict(roots)])


# --- checks ------------------------------------------------------------------

DETF_TYPES = ("A3^2", "A5^2", "D3^2", "D4^2", "E6^2", "D4^3")


def check_detf(kmax=4):
    out = []
    for name in DETF_TYPES:
        fd = resolve(name)
        for cls in ("divisible", "coprime"):
            ks = [fd.M * k for k in range(1, kmax + 1)] if cls == "divisible" else [k for k in range(1, 3 * kmax) if k % fd.M][:kmax]
            bad = []
            for k in ks:
                det = det_f(fd, k) if k % fd.M == 0 else det_f_prime(fd, k)
                if det != closed_form(fd, k):
                    bad.append(k)
            out.append(_entry("detf", f"{name} {cls} k={ks}", not bad, **({"mismatch_k": bad} if bad else {})))
    return out


def check_presentation(bound=10, fault=None):
    out = []
    for name in BUILTIN:
        rep = verify_presentation(load_builtin(name, bound, fault=fault))
        fails = [r for r in rep if r["status"] != "pass"]
        detail = {"relations": len(rep)}
        if fails:
            detail["first_failure"] = f"{fails[0]['relation']} at {fails[0].get('first_failure')}"
        out.append(_entry("presentation", f"{name} N={bound}", report_ok(rep), **detail))
    return out


def check_phi_spectrum(hmax=8):
    m = load_builtin("neg_prefund_A2t", hmax + 3)
    weights, exact = module_lweights(m)
    got = Counter()
    for h, w, dim in weights:
        if h <= hmax:
            got[w] += dim
    want = Counter(reference_phi(i, j) for j in range(hmax + 1) for i in range(j + 1) if i + j <= hmax)
    ok = got == want and exact >= hmax
    detail = {"vectors": sum(want.values())}
    if not ok:
        missing = sorted((w.render() for w in want - got))
        detail["first_failure"] = missing[0] if missing else "extra l-weights in module"
    return [_entry("phi-spectrum", f"neg_prefund_A2t l-weights, i+j <= {hmax}", ok, **detail)]


def check_module_qchar(hmax=8):
    out = []
    for name, ref in REFERENCE_CHARACTERS.items():
        ch = qchar_from_module(load_builtin(name, hmax + 3))
        if ch.trunc < hmax:
            out.append(_entry("module-qchar", f"{name} up to height {hmax}", False, first_failure=f"exact only to {ch.trunc}"))
            continue
        got, want = ch.window(hmax), ref(hmax)
        diff = _first_diff(got, want)
        if diff is None and got.top != want.top:
            diff = "leading weights differ"
        out.append(_entry("module-qchar", f"{name} up to height {hmax}", diff is None, **({"first_failure": diff} if diff else {})))
    return out


def check_counterexamples():
    return [_entry("counterexamples", r["check"], r["status"] == "pass", **{k: v for k, v in r.items() if k not in ("check", "status")}) for r in verify_counterexamples()]


QQ_TYPES = ("A2^2", "A3^2", "D3^2", "D4^3")


def check_qq(trunc=6):
    out = []
    for name in QQ_TYPES:
        fd = resolve(name)
        for i in fd.reps:
            for a in ("1", "q", "-1"):
                r = verify_qq(fd, i, a, trunc)
                out.append(_entry("qq", r["relation"] + f" trunc={trunc}", r["status"] == "pass", **({"first_failure": r["first_difference"]} if "first_difference" in r else {})))
    return out


# the three-term relation for the fundamental A_2^(2) module, written out by hand
TQ_EXPECTED_A2T = (
    "[V_{1,1}] = [-omega_1]*[L+_{1,-q^4}]/([L+_{1,-q^2}])"
    " + [L+_{1,-1}]*[L+_{1,q^3}]/([L+_{1,q}]*[L+_{1,-q^2}])"
    " + [omega_1]*[L+_{1,q^-1}]/([L+_{1,q}])"
)


def check_tq(trunc=4):
    out = []
    r = tq_relation("A2^2", 1, "1")
    text = r.render()
    out.append(_entry("tq", "A2^2 fundamental relation, symbolic", text == TQ_EXPECTED_A2T, rendered=text))
    for name in ("A2^2", "A3^2"):
        fd = resolve(name)
        for i in fd.reps:
            lhs, rhs = tq_relation(fd, i, "1").evaluate(trunc)
            out.append(_entry("tq", f"{name} node {i} evaluation trunc={trunc}", lhs == rhs))
    return out


def check_folding(trunc=6):
    out = []
    tw, base = resolve("A2^2"), resolve("A2")
    for k in (1, 2, 3):
        lhs = kr_qcharacter(tw, 1, k, "1", trunc).normalized()
        from .qchar_engine import fm_qcharacter

        rhs = fold_char(fm_qcharacter(base, kr_monomial(1, k, P("1")), trunc).normalized(), tw)
        diff = _first_diff(lhs, rhs)
        out.append(_entry("folding", f"W^(1)_{k} normalized, trunc={trunc}", diff is None, **({"first_failure": diff} if diff else {})))
    neg = qchar_from_module(load_builtin("neg_prefund_A2t", trunc + 3)).window(trunc).normalized()
    ref = fold_char(neg_prefund_qchar(base, 1, "1", trunc).normalized(), tw)
    diff = _first_diff(neg, ref)
    out.append(_entry("folding", f"negative prefundamental from module vs folded sl3 limit, trunc={trunc}", diff is None, **({"first_failure": diff} if diff else {})))
    pos_mod = load_builtin("pos_prefund_A2t", trunc + 3)
    pos = qchar_from_module(pos_mod).window(trunc)
    top = [w for w in pos.terms if pos.height(w) == 0][0]
    a = top.roots[0][0][0]
    ref = fold_char(pos_prefund_qchar(base, 1, a, trunc).normalized(), tw)
    diff = _first_diff(pos.normalized(), ref)
    out.append(_entry("folding", f"positive prefundamental from module vs folded sl3, a={a.render()}, trunc={trunc}", diff is None, **({"first_failure": diff} if diff else {})))
    return out


def check_phi_vanishing(bound=10):
    out = []
    for name in ("pos_prefund_A2t", "X_A2t"):
        try:
            rep = verify_phi_vanishing(load_builtin(name, bound))
        except PreconditionError as exc:
            out.append(_entry("phi-vanishing", f"{name} N={bound}", False, first_failure=str(exc)))
            continue
        fails = [r for r in rep if r["status"] != "pass"]
        out.append(_entry("phi-vanishing", f"{name} N={bound}", not fails, checks=len(rep), **({"first_failure": fails[0]["relation"]} if fails else {})))
    return out


LIMIT_TYPES = ("A2^2", "A3^2", "D4^3")


def check_limits(hmax=6, extra=2):
    out = []
    for name in LIMIT_TYPES:
        fd = resolve(name)
        for i in fd.reps:
            norms = {}
            for k in range(1, hmax + extra + 1):
                start = SpectralParam(2 - 4 * k, 0)
                ch = kr_qcharacter(fd, i, k, start, hmax)
                norms[k] = ch * kr_monomial(i, k, start).lweight(fd).inverse()
            bad = [
                (h, k)
                for h in range(hmax + 1)
                for k in range(h + 2, hmax + extra + 1)
                if norms[k].window(h) != norms[h + 1].window(h)
            ]
            out.append(_entry("limits", f"{name} node {i} h<={hmax}, k>=h+1", not bad, **({"first_failure": f"height {bad[0][0]}, k={bad[0][1]}"} if bad else {})))
    return out


# hand-instantiated ratio templates: (node) -> [(neighbour, shift c)] with Q_j(a0 q c)/Q_j(a0 q^-1 c)
BAE_TEMPLATES = {
    ("A3^2", 1): [(2, "1")],
    ("A3^2", 2): [(1, "-1"), (1, "1")],
    ("D4^3", 1): [(2, "1")],
    ("D4^3", 2): [(1, "1"), (1, "w^2"), (1, "w^4")],
}


def check_bae(q0="5/4", bits=200, tol=1e-20):
    out = []
    for (name, i), tmpl in BAE_TEMPLATES.items():
        system = bethe_equations(name, i)
        got = sorted(system.factors)
        want = sorted((j, P(c)) for j, c in tmpl)
        err = numeric_consistency(name, i, q0=q0, bits=bits)
        ok = got == want and err < tol
        out.append(_entry("bae", f"{name} node {i}", ok, equation=system.render(), relative_error=f"{err:.3e}"))
    return out


CHECKS = {
    "detf": check_detf,
    "presentation": check_presentation,
    "phi-spectrum": check_phi_spectrum,
    "module-qchar": check_module_qchar,
    "counterexamples": check_counterexamples,
    "qq": check_qq,
    "tq": check_tq,
    "folding": check_folding,
    "phi-vanishing": check_phi_vanishing,
    "limits": check_limits,
    "bae": check_bae,
}


def run_all(only=None, fault=None):
    only = list(only) if only else list(SUITES)
    unknown = [s for s in only if s not in CHECKS]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}; available: {', '.join(SUITES)}")
    report = []
    for name in SUITES:
        if name not in only:
            continue
        if name == "presentation":
            report += check_presentation(fault=fault)
        else:
            report += CHECKS[name]()
    return report
