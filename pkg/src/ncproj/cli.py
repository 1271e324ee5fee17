"""Command-line front end.

Every subcommand builds a report dictionary; ``--json`` prints it with the
schema tag, otherwise a short text rendering is written.  Exit codes:
0 success, 1 verified failure, 2 usage or parse error, 3 internal
invariant violation (two independent computations disagree).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import cohomology as coh
from . import nc_algebra as nca
from .diff_ops import (apply, build_D, build_delta, build_delta_jk, build_nabla, build_nabla_jk,
                       build_nabla_prime, render as render_op)
from .hall_lie import dimensions_by_degree, necklace_dimension
from .ideals_chains import (FAIL, chain_sum_ideal_check, check_operator, compare_with_chain,
                            decompose_nc_graded, divisibility_fast_path, infinite_quantization_check,
                            is_closure_certificate,
                            is_chain, is_differential_chain, reverify_witness, single_operator)
from .localization import chart_commutator, chart_multiply, render as render_chart
from .parsing import ParseError, UnknownSymbol, parse, parse_poly
from .poly import Poly
from .quantization import (QuotientReducer, build_quotients, free_sheaf_series, layer_counts,
                           lie_space_quotient, series_invariant)
from .series import SeriesError, series_from_expr
from .session import Session, SessionError, load_dict, load_file

SCHEMA = "ncproj/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Report:
    def __init__(self, command: str):
        self.data: Dict[str, Any] = {"schema": SCHEMA, "command": command}
        self.lines: List[str] = []
        self.code = EXIT_OK

    def set(self, **kw):
        self.data.update(kw)

    def line(self, text: str = ""):
        self.lines.append(text)

    def fail(self, code: int):
        self.code = max(self.code, code)


# session helpers ---------------------------------------------------------------

def _params(items: Optional[Sequence[str]]) -> Dict[str, int]:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects NAME=INT, got '{item}'")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise UsageError(f"--param {key}: '{val}' is not an integer") from None
    return out


def _session(args, need_config: bool = False) -> Session:
    params = _params(getattr(args, "param", None))
    config = getattr(args, "config", None)
    if config:
        return load_file(config, params)
    if need_config:
        raise UsageError("this command needs a configuration file")
    if args.n is None or args.q is None:
        raise UsageError("give a configuration file or both --n and --q")
    if args.n < 0 or args.q < 1:
        raise UsageError("need n >= 0 and q >= 1")
    return load_dict({"signature": {"n": args.n, "q": args.q}}, params)


def _require_chain(s: Session):
    if s.chain is None:
        raise UsageError(f"configuration '{s.name}' defines no chain")
    return s.chain


def _oracle_modes(mode: str) -> Tuple[bool, bool]:
    """(run the primary computation, run the oracle)."""
    return mode in ("off", "both"), mode in ("on", "both")


# hall ----------------------------------------------------------------------------

def cmd_hall(args, rep: Report):
    s = _session(args)
    basis = s.alg.basis
    elements = [{"index": i, "label": basis.label(i), "bracket": basis.bracket_label(i),
                 "degree": el.degree, "word": list(el.word)}
                for i, el in enumerate(basis.elements)]
    dims = dimensions_by_degree(basis)
    rep.set(signature={"n": s.n, "q": s.q}, elements=elements, dims_by_degree=dims)
    rep.line(f"Hall basis of the free {s.q}-step nilpotent Lie algebra on {s.n + 1} generators")
    for e in elements:
        rep.line(f"  {e['label']:<8} {e['bracket']:<20} degree {e['degree']}")
    rep.line("dims by degree: " + " ".join(map(str, dims)))
    if args.oracle != "off":
        neck = [necklace_dimension(s.n + 1, d) for d in range(1, s.q + 1)]
        agree = neck == dims
        rep.set(necklace=neck, oracle_agrees=agree)
        rep.line("necklace count: " + " ".join(map(str, neck)) + ("  (agrees)" if agree else "  (DISAGREES)"))
        if not agree:
            rep.fail(EXIT_INTERNAL)


# mul -------------------------------------------------------------------------------

def _is_ordered_poly(a: nca.NCPoly) -> Optional[Poly]:
    f = nca.epsilon(a)
    return f if nca.tau(a.alg, f) == a else None


def cmd_mul(args, rep: Report):
    s = _session(args)
    texts = [s.expand(t) for t in args.exprs]
    charts = [parse(t).chart for t in texts]
    chart_name = next((c for c in charts if c), None)
    if chart_name is None:
        values = [s.nc(t) for t in texts]
        if len(values) == 1:
            result = values[0]
        elif args.commutator:
            result = nca.commutator(values[0], values[1])
        else:
            result = nca.multiply(values[0], values[1])
        rep.set(kind="nc", result=nca.render(result))
        rep.line(nca.render(result))
        if len(values) == 2 and not args.commutator and args.oracle != "off":
            f, g = _is_ordered_poly(values[0]), _is_ordered_poly(values[1])
            if s.q == 2 and f is not None and g is not None:
                other = nca.star_product_q2(s.alg, f, g)
                agree = other == result
                rep.set(oracle="closed q=2 product formula", oracle_agrees=agree)
                rep.line(f"closed q=2 product formula: {'agrees' if agree else 'DISAGREES: ' + nca.render(other)}")
                if not agree:
                    rep.fail(EXIT_INTERNAL)
        return
    M = args.truncation
    values = [s.chart_value(t, M, chart_name) for t in texts]
    if len(values) == 1:
        result = values[0]
    elif args.commutator:
        result = chart_commutator(values[0], values[1])
    else:
        result = chart_multiply(values[0], values[1])
    rep.set(kind="chart", chart=chart_name, truncation=M, result=render_chart(result))
    rep.line(render_chart(result))
    if args.reduce:
        chain = _require_chain(s)
        red = QuotientReducer(chain, result.chart, args.degree).reduce(result)
        rep.set(reduced=render_chart(red))
        rep.line(f"on the quantized scheme: {render_chart(red)}")


# op-apply --------------------------------------------------------------------------

_OP = re.compile(r"^(Delta|Nabla'|Nabla|D|L|R)_(\d+)(?:,(\d+))?$")


def _build_named_op(alg, name: str):
    m = _OP.match(name.replace(" ", ""))
    if not m:
        raise UsageError(f"unknown operator '{name}' (use Delta_j, Nabla_j, Nabla'_j, "
                         "Delta_j,k, Nabla_j,k, D_i,l, L_j or R_j)")
    kind, a, b = m.group(1), int(m.group(2)), m.group(3)
    b = None if b is None else int(b)
    if a >= alg.nvars:
        raise UsageError(f"index {a} out of range (algebra has {alg.nvars} basis elements)")
    try:
        if kind == "Delta":
            return kind, a, build_delta(alg, a) if b is None else build_delta_jk(alg, a, b)
        if kind == "Nabla":
            return kind, a, build_nabla(alg, a) if b is None else build_nabla_jk(alg, a, b)
        if kind == "Nabla'":
            return kind, a, build_nabla_prime(alg, a)
        if kind == "D":
            if b is None:
                raise UsageError("D needs two indices: D_i,l")
            return kind, a, build_D(alg, a, b)
        return kind, a, None
    except IndexError as exc:
        raise UsageError(f"operator {name}: {exc}") from None


def cmd_op_apply(args, rep: Report):
    s = _session(args)
    alg = s.alg
    a = s.nc(args.expr)
    kind, j, op = _build_named_op(alg, args.op)
    run_main, run_oracle = _oracle_modes(args.oracle)
    rep.set(operator=args.op, input=nca.render(a))
    if kind in ("L", "R"):
        main = None
        if run_main:
            inner = build_delta(alg, j) if kind == "L" else build_nabla(alg, j)
            main = nca.diagonal_mul(j, a) + apply(inner, a)
            rep.set(result=nca.render(main))
            rep.line(nca.render(main))
        if run_oracle:
            z = alg.gen(j)
            direct = nca.multiply(z, a) if kind == "L" else nca.multiply(a, z)
            rep.set(pbw_product=nca.render(direct))
            if main is None:
                rep.line(nca.render(direct))
            else:
                agree = direct == main
                if kind == "R":
                    alt = nca.diagonal_mul(j, a) + apply(build_nabla_prime(alg, j), a)
                    agree = agree and alt == main
                rep.set(oracle_agrees=agree)
                rep.line(f"PBW product: {'agrees' if agree else 'DISAGREES: ' + nca.render(direct)}")
                if not agree:
                    rep.fail(EXIT_INTERNAL)
        return
    out = apply(op, a)
    rep.set(result=nca.render(out), operator_terms=render_op(op))
    if args.show_operator:
        rep.line(f"{args.op} = {render_op(op)}")
    rep.line(nca.render(out))


# chain-verify ------------------------------------------------------------------------

def _single_operator(s: Session, text: str):
    coeff, sep, var = text.partition(",")
    if not sep:
        raise UsageError("--single-operator expects COEFF,VARIABLE such as y1,x1")
    labels = s.alg.labels()
    var = var.strip()
    if var not in labels:
        raise UsageError(f"unknown variable '{var}'")
    c = s.nc(coeff)
    return single_operator(s.alg, c, labels.index(var), name=f"R({coeff.strip()}) d/d{var}")


def cmd_chain_verify(args, rep: Report):
    s = _session(args, need_config=True)
    chain = _require_chain(s)
    D = args.degree
    if args.single_operator:
        op = _single_operator(s, args.single_operator)
        report = check_operator(chain, op, D, op.name)
    elif args.predicate == "chain":
        report = is_chain(chain, D)
    elif args.predicate == "ideal":
        report = chain_sum_ideal_check(chain, D)
    else:
        report = is_differential_chain(chain, D)
    data = report.as_dict()
    rep.set(config=s.name, params=s.params, report=data)
    rep.line(f"{report.predicate} up to degree {D}: {report.result} ({report.checked} checks)")
    for n in report.notes:
        rep.line(f"  note: {n}")
    if report.result == FAIL:
        w = data["witness"]
        sound = reverify_witness(chain, report)
        rep.set(witness_reverified=sound)
        rep.line(f"  witness: {w['operator']} maps {w['element']} (layer {w['source_layer']}, "
                 f"degree {w['degree']})")
        rep.line(f"           to {w['image']}, outside layer {w['target_layer']}")
        rep.line(f"           residual {w['residual']}; re-verified: {'yes' if sound else 'NO'}")
        rep.fail(EXIT_FAIL if sound else EXIT_INTERNAL)


# decompose -----------------------------------------------------------------------------

def cmd_decompose(args, rep: Report):
    s = _session(args)
    if args.exprs:
        gens = [s.nc(t) for t in args.exprs]
    elif s.base_ideal:
        gens = [nca.tau(s.alg, f) for f in s.base_ideal]
    else:
        raise UsageError("give generator expressions or a configuration with base_ideal")
    res = decompose_nc_graded(s.alg, gens, args.degree)
    pieces = {f"{m},{d}": len(b) for (m, d), b in sorted(res.pieces.items())}
    rep.set(generators=[nca.render(g) for g in gens], nc_graded=res.ok, D=args.degree,
            dims={str(d): v for d, v in sorted(res.dims.items())}, layer_dims=pieces)
    if not res.ok:
        rep.set(offending=nca.render(res.offending), offending_degree=res.offending_degree)
        rep.line(f"not NC-graded: {nca.render(res.offending)} (degree {res.offending_degree}) "
                 "has a layer component outside the ideal")
        rep.fail(EXIT_FAIL)
        return
    rep.line(f"NC-graded up to degree {args.degree}")
    rep.line("dim I^d: " + " ".join(f"{d}:{v}" for d, v in sorted(res.dims.items())))
    for (m, d), b in sorted(res.pieces.items()):
        rep.line(f"  layer m={m} degree {d}: dim {len(b)}")
    if s.chain is not None:
        diff = compare_with_chain(res, s.chain)
        rep.set(matches_chain=diff is None, first_difference=list(diff) if diff else None)
        rep.line("layers match the configured chain" if diff is None
                 else f"differs from the configured chain at (m, d) = {diff}")
        if diff is not None:
            rep.fail(EXIT_FAIL)


# quantize --------------------------------------------------------------------------------

def _when_ok(entry: Dict, params: Dict[str, int]) -> bool:
    return all(params.get(k) == v for k, v in entry.get("when", {}).items())


def cmd_quantize(args, rep: Report):
    s = _session(args, need_config=True)
    if s.raw.get("kind") == "lie_space":
        return _lie_space(s, args, rep)
    chain = _require_chain(s)
    m_max = _weighted_m(s, args.m_max)
    layers = build_quotients(chain, m_max, args.degree, s.aliases())
    rep.set(config=s.name, params=s.params, m_max=m_max, layers=[lay.as_dict() for lay in layers])
    for lay in layers:
        comps = lay.nonzero_components()
        rep.line(f"layer m={lay.m} (twist {lay.twist}): {len(comps)} nonzero component(s)")
        for c in comps:
            rep.line(f"  {c.name}: {c.cls.label()}")
    products = []
    for pr in s.raw.get("products", []):
        if not _when_ok(pr, s.params):
            continue
        text = s.expand(pr["expr"])
        name = parse(text).chart
        w = s.chart_value(text, args.truncation)
        exp = s.chart_value(pr["expected"], args.truncation, name)
        if pr.get("reduce", True):
            red = QuotientReducer(chain, w.chart, args.degree)
            got, want = red.reduce(w), red.reduce(exp)
        else:
            got, want = w, exp
        ok = got == want
        products.append({"expr": pr["expr"], "result": render_chart(got), "expected": pr["expected"],
                         "reduced": pr.get("reduce", True), "ok": ok})
        rep.line(f"{pr['expr']} = {render_chart(got)}  [{'ok' if ok else 'MISMATCH, expected ' + pr['expected']}]")
        if not ok:
            rep.fail(EXIT_FAIL)
    rep.set(products=products)


def _lie_space(s: Session, args, rep: Report):
    m_max = args.m_max
    dims = lie_space_quotient(s.alg, 2 * m_max if s.q == 2 else m_max)
    rep.set(config=s.name, signature={"n": s.n, "q": s.q},
            dims={str(m): v for m, v in sorted(dims.items())})
    rep.line(f"Lie-space quotient dimensions (n={s.n}, q={s.q}):")
    for m, v in sorted(dims.items()):
        rep.line(f"  m={m}: {v}")
    if s.q == 2 and args.oracle != "off":
        oracle = {m: comb(s.n + 1, m) for m in dims}
        agree = all(dims[m] == oracle[m] for m in dims)
        rep.set(even_forms=[comb(s.n + 1, 2 * k) for k in range(m_max + 1)], oracle_agrees=agree)
        rep.line("even exterior powers: " + " ".join(str(comb(s.n + 1, 2 * k)) for k in range(m_max + 1))
                 + ("  (agrees)" if agree else "  (DISAGREES)"))
        if not agree:
            rep.fail(EXIT_INTERNAL)


def _weighted_m(s: Session, m: int) -> int:
    """Layer bounds on the command line follow the configuration's layer index."""
    if s.raw.get("layer_index") == "halved" and s.q == 2:
        return 2 * m
    return m


# series ------------------------------------------------------------------------------------

def cmd_series(args, rep: Report):
    s = _session(args)
    order = args.m_max
    if s.chain is None or args.free:
        ser = free_sheaf_series(s.alg, order)
        counts = [nca.layer_dimension(s.alg, 0, m) for m in range(order + 1)]
        totals = [int(c) for c in ser.weight_totals()]
        agree = totals == counts
        rep.set(kind="free", series=ser.to_str(), order=order, layer_dims=counts, agrees=agree)
        rep.line(f"free sheaf series: {ser}")
        rep.line("dim R^m: " + " ".join(map(str, counts)) + ("  (agrees)" if agree else "  (DISAGREES)"))
        if not agree:
            rep.fail(EXIT_INTERNAL)
        return
    if not s.series_binding:
        raise UsageError(f"configuration '{s.name}' has no series_binding")
    layers = build_quotients(s.chain, order, args.degree, s.aliases())
    inv = series_invariant(layers, s.series_radicals(), s.alg, s.aliases())
    ser = inv.series
    counts = layer_counts(layers)
    totals = ser.weight_totals()
    count_ok = all(totals[m] == counts.get(m, 0) for m in range(order + 1))
    rep.set(config=s.name, params=s.params, order=order, invariant=inv.as_dict(),
            layer_counts={str(m): c for m, c in sorted(counts.items())}, count_agreement=count_ok)
    rep.line(f"series invariant to order {order}: {ser}")
    for v, info in inv.legend.items():
        rep.line(f"  {v} (weight {info['weight']}): {', '.join(info['radicals'])}; "
                 f"{'; '.join(info['classes'])}")
    rep.line("components per layer: " + " ".join(f"{m}:{c}" for m, c in sorted(counts.items())))
    if not count_ok:
        rep.fail(EXIT_INTERNAL)
    for key in ("closed_series", "reference_series"):
        text = s.raw.get(key)
        if not text:
            continue
        try:
            target = series_from_expr(text, ser.names, ser.weights, order)
        except SeriesError as exc:
            raise UsageError(f"{key}: {exc}") from None
        ok = target == ser
        diff = ser - target
        rep.set(**{key.replace("_series", "_form"): {"expr": text, "matches": ok,
                                                     "difference": diff.to_str() or "0"}})
        label = "closed form" if key == "closed_series" else "reference form"
        rep.line(f"{label} {text}: " + ("matches" if ok else f"differs by {diff.to_str()}"))
        if key == "closed_series" and not ok:
            rep.fail(EXIT_FAIL)


# cohomology ----------------------------------------------------------------------------------

def cmd_cohomology(args, rep: Report):
    run_formula, run_oracle = _oracle_modes(args.oracle)
    if args.shape:
        return _cohomology_shape(args, rep, run_formula, run_oracle)
    s = _session(args, need_config=True)
    if s.chain is None:
        if len(s.base_ideal) == 1 and s.n == 2:
            return _cohomology_curve(s.base_ideal[0], args, rep, run_formula, run_oracle)
        raise UsageError(f"configuration '{s.name}' has neither a chain nor a plane curve")
    halved_index = s.raw.get("layer_index") == "halved" and s.q == 2
    m_max = _weighted_m(s, args.m_max)
    layers = build_quotients(s.chain, m_max, args.degree, s.aliases())
    try:
        table = coh.h1_quantized(layers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    shape = s.raw.get("cohomology_shape")
    d = s.params.get("d")
    rows = []
    rep.line("i  layer  twist  dim  provenance" + ("  formula" if shape == "two_lines" else ""))
    for r in table.rows:
        row = r.as_dict()
        k = r.m // 2 if halved_index else r.m
        row["index"] = k
        line = f"{r.i}  {r.m:>5}  {-r.m:>5}  {r.dim:>3}  {r.provenance}"
        if shape == "two_lines" and r.i == 1 and d is not None and (not halved_index or r.m % 2 == 0):
            f = coh.two_lines_r_formula(d, k)
            row["formula"] = f
            line += f"  r_{k} = {f}"
            if f != r.dim:
                rep.fail(EXIT_INTERNAL)
        rows.append(row)
        rep.line(line)
    if shape == "two_lines" and d is not None:
        coh.two_lines_notes(table, d, args.m_max)
        for r, row in zip(table.rows, rows):
            row["notes"] = list(r.notes)
        for r in table.rows:
            for n in r.notes:
                rep.line(f"note (layer {r.m}): {n}")
    if any(r.provenance == "disagree" for r in table.rows):
        rep.fail(EXIT_INTERNAL)
    rep.set(config=s.name, params=s.params, rows=rows, notes=table.notes)


def _cohomology_rows(f: Poly, shape, ms, rep: Report, run_formula: bool, run_oracle: bool):
    rows = []
    rep.line("m    h0   h1  provenance")
    for m in ms:
        h1_o = coh.h1_plane_curve_oracle(f, m) if run_oracle else None
        h1_f = coh.h1_plane_curve_formula(shape[0], shape[1], m) if (run_formula and shape) else None
        if h1_o is not None and h1_f is not None:
            prov = "both-agree" if h1_o == h1_f else "disagree"
        elif h1_o is not None:
            prov = "oracle"
        elif h1_f is not None:
            prov = "closed-formula"
        else:
            raise UsageError("no closed formula for this curve; rerun with --oracle on")
        h1 = h1_o if h1_o is not None else h1_f
        h0 = coh.h0_plane_curve(f, m)
        euler_ok = h0 - h1 == coh.euler_characteristic_plane_curve(f.homogeneous_degree(), m)
        rows.append({"m": m, "h0": h0, "h1": h1, "provenance": prov, "euler_ok": euler_ok})
        rep.line(f"{m:>3}  {h0:>3}  {h1:>3}  {prov}")
        if prov == "disagree" or not euler_ok:
            rep.fail(EXIT_INTERNAL)
    rep.set(rows=rows)


def _m_range(args, d: int) -> range:
    if args.m_range:
        lo, sep, hi = args.m_range.partition(":")
        try:
            return range(int(lo), int(hi) + 1)
        except ValueError:
            raise UsageError("--m-range expects LO:HI") from None
    return range(-8, d + 1)


def _cohomology_shape(args, rep, run_formula, run_oracle):
    if args.d is None:
        raise UsageError("--shape needs --d")
    try:
        f = coh.shape_form(args.shape, args.d)
        coh.h1_plane_curve_formula(args.shape, args.d, 0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep.set(shape=args.shape, d=args.d, form=str(f))
    rep.line(f"Z({f}) in P^2")
    _cohomology_rows(f, (args.shape, args.d), _m_range(args, args.d), rep, run_formula, run_oracle)


def _cohomology_curve(f: Poly, args, rep, run_formula, run_oracle):
    shape = coh.detect_shape(f)
    d = f.homogeneous_degree()
    rep.set(form=str(f), shape=list(shape) if shape else None)
    rep.line(f"Z({f}) in P^2" + (f", shape {shape[0]} of degree {shape[1]}" if shape else ""))
    _cohomology_rows(f, shape, _m_range(args, d), rep, run_formula, run_oracle or shape is None)


# closure -------------------------------------------------------------------------------------

def cmd_closure(args, rep: Report):
    if args.form:
        if args.n is None:
            raise UsageError("--form needs --n")
        gens = [parse_poly(args.form, args.n + 1, _params(args.param))]
        name = args.form
    else:
        s = _session(args, need_config=True)
        if not s.base_ideal:
            raise UsageError(f"configuration '{s.name}' has no base_ideal")
        gens = s.base_ideal
        name = s.name
    if args.q not in (None, 2):
        raise UsageError("the closure criterion is stated for q = 2")
    method = args.method
    verdict = infinite_quantization_check(gens, args.degree, "closure" if method == "both" else method)
    data = {"input": name, "generators": [str(g) for g in gens], "answer": verdict.answer,
            "definitive": verdict.definitive, "method": verdict.method, "summary": verdict.summary(),
            "closures": [{"pair": list(c.pair), "proper": c.proper, "verdict": c.verdict(),
                          "minimal_generators": [str(g) for g in c.minimal_generators]}
                         for c in verdict.closures]}
    rep.line(verdict.summary())
    for c in verdict.closures:
        gens_txt = ", ".join(str(g) for g in c.minimal_generators)
        rep.line(f"  pair (x{c.pair[0]}, x{c.pair[1]}): {c.verdict()}; J = ({gens_txt})")
    if method == "both" and len(gens) == 1 and gens[0].nvars == 3:
        idx = divisibility_fast_path(gens[0])
        agree = (idx is not None) == verdict.answer
        data.update(fast_path={"dividing_variable": idx, "agrees": agree})
        rep.line(f"divisibility fast path: {'x%d divides f' % idx if idx is not None else 'no variable divides f'}"
                 f" ({'agrees' if agree else 'DISAGREES'})")
        if not agree:
            rep.fail(EXIT_INTERNAL)
        if idx is not None:
            pair = tuple(i for i in range(3) if i != idx)
            cert = is_closure_certificate(gens, [Poly.var(3, idx)], pair, args.degree)
            data["certificate"] = {"ideal": f"x{idx}", "pair": list(pair), "valid": cert}
            rep.line(f"certificate J = (x{idx}) for pair (x{pair[0]}, x{pair[1]}): "
                     f"{'valid' if cert else 'INVALID'}")
            if not cert:
                rep.fail(EXIT_INTERNAL)
    rep.set(**data)


# argument parsing ------------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--param", action="append", metavar="NAME=INT",
                        help="override a configuration parameter such as d=3")

    sig = argparse.ArgumentParser(add_help=False)
    sig.add_argument("--n", type=int, help="projective dimension (n + 1 generators)")
    sig.add_argument("--q", type=int, help="nilpotency index")

    def oracle(p, default="both"):
        p.add_argument("--oracle", choices=("on", "off", "both"), default=default,
                       help="run the independent oracle (on), the primary method (off) or both")

    top = argparse.ArgumentParser(prog="ncproj", description="Exact computations in S_q and its projective schemes.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hall", parents=[common, sig], help="Hall basis and dimensions")
    p.add_argument("config", nargs="?")
    oracle(p)
    p.set_defaults(func=cmd_hall)

    p = sub.add_parser("mul", parents=[common, sig], help="products in S_q or on a chart")
    p.add_argument("exprs", nargs="+", metavar="EXPR")
    p.add_argument("--config", "-c")
    p.add_argument("--commutator", action="store_true", help="commutator of the two operands")
    p.add_argument("--truncation", type=int, default=8, metavar="M", help="chart filtration bound")
    p.add_argument("--reduce", action="store_true", help="restrict coefficients to the quantized scheme")
    p.add_argument("--degree", type=int, default=8, metavar="D", help="degree bound for component ideals")
    oracle(p)
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("op-apply", parents=[common, sig], help="apply a differential operator")
    p.add_argument("op", metavar="OP", help="Delta_j, Nabla_j, Nabla'_j, Delta_j,k, Nabla_j,k, D_i,l, L_j or R_j")
    p.add_argument("expr", metavar="EXPR")
    p.add_argument("--config", "-c")
    p.add_argument("--show-operator", action="store_true")
    oracle(p)
    p.set_defaults(func=cmd_op_apply)

    p = sub.add_parser("chain-verify", parents=[common], help="verify a (differential) chain")
    p.add_argument("config")
    p.add_argument("--degree", type=int, default=8, metavar="D")
    p.add_argument("--predicate", choices=("differential", "chain", "ideal"), default="differential")
    p.add_argument("--single-operator", metavar="COEFF,VAR",
                   help="check only the operator R(COEFF) d/dVAR, e.g. y1,x1")
    p.set_defaults(func=cmd_chain_verify)

    p = sub.add_parser("decompose", parents=[common, sig], help="NC-graded decomposition of a two-sided ideal")
    p.add_argument("exprs", nargs="*", metavar="EXPR")
    p.add_argument("--config", "-c")
    p.add_argument("--degree", type=int, default=5, metavar="D")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("quantize", parents=[common], help="quotient sheaves, component classes and chart products")
    p.add_argument("config")
    p.add_argument("--m-max", type=int, default=2)
    p.add_argument("--degree", type=int, default=6, metavar="D", help="Hilbert-function degree bound")
    p.add_argument("--truncation", type=int, default=8, metavar="M")
    oracle(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("series", parents=[common, sig], help="series invariant of a quantization")
    p.add_argument("config", nargs="?")
    p.add_argument("--m-max", type=int, default=8, help="series order (weighted)")
    p.add_argument("--degree", type=int, default=6, metavar="D", help="Hilbert-function degree bound")
    p.add_argument("--free", action="store_true", help="series of the free sheaf instead")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("cohomology", parents=[common], help="cohomology dimensions")
    p.add_argument("config", nargs="?")
    p.add_argument("--m-max", type=int, default=5)
    p.add_argument("--degree", type=int, default=3, metavar="D", help="Hilbert-function degree bound")
    p.add_argument("--shape", choices=coh.SHAPES)
    p.add_argument("--d", type=int)
    p.add_argument("--m-range", metavar="LO:HI")
    oracle(p)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("closure", parents=[common, sig], help="infinite-quantization criterion")
    p.add_argument("config", nargs="?")
    p.add_argument("--form", help="a form in x0..xn instead of a configuration")
    p.add_argument("--degree", type=int, default=12, metavar="D")
    p.add_argument("--method", choices=("closure", "divisibility", "auto", "both"), default="both")
    p.set_defaults(func=cmd_closure)
    return top


def _emit(rep: Report, as_json: bool, out):
    if as_json:
        rep.data["exit_code"] = rep.code
        out.write(json.dumps(rep.data, sort_keys=True, indent=2, default=str) + "\n")
    else:
        out.write("\n".join(rep.lines) + "\n")


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    rep = Report(args.command)
    try:
        args.func(args, rep)
    except (UsageError, SessionError, ParseError, UnknownSymbol, SeriesError) as exc:
        return _error(rep, args, str(exc), EXIT_USAGE, out)
    except (ValueError, KeyError, IndexError, ZeroDivisionError) as exc:
        # malformed mathematical input (non-homogeneous generators, bad indices, ...)
        return _error(rep, args, f"{type(exc).__name__}: {exc}", EXIT_USAGE, out)
    except Exception as exc:  # pragma: no cover - reported as an internal failure
        return _error(rep, args, f"internal error: {type(exc).__name__}: {exc}", EXIT_INTERNAL, out)
    _emit(rep, args.json, out)
    return rep.code


def _error(rep: Report, args, message: str, code: int, out) -> int:
    if getattr(args, "json", False):
        rep.data.update(error=message, exit_code=code)
        out.write(json.dumps(rep.data, sort_keys=True, indent=2, default=str) + "\n")
    else:
        sys.stderr.write(f"ncproj {rep.data['command']}: error: {message}\n")
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
