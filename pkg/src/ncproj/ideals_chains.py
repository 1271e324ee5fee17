"""Graded submodules I_m of S (x) R^m, chains, differential chains and
NC-graded ideals, checked degree by degree with exact linear algebra.

Layer m always means radical weighted degree m.  Elements of a layer are
NCPoly values whose terms all have radical weight m; the S-module action
is diagonal multiplication by x-monomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .diff_ops import DiffOp, apply, build_delta_jk, build_nabla_jk
from .linalg import Echelon
from .nc_algebra import (EnvelopingAlgebra, NCPoly, diagonal_mul, homogeneous_degree,
                         layers as nc_layers, multiply, render)
from .poly import Exp, Poly, add_exp, monomials_of_degree, weighted_monomials

PASS = "pass-up-to-D"
FAIL = "fail"


class NotHomogeneous(ValueError):
    pass


# graded submodules -----------------------------------------------------------

class GradedSubmodule:
    """S-submodule of S (x) R^m spanned by x-multiples of generators.

    kind is "span" (generators given), "full" or "zero".
    """

    def __init__(self, alg: EnvelopingAlgebra, m: int, generators: Sequence[NCPoly] = (),
                 kind: str = "span"):
        if kind not in ("span", "full", "zero"):
            raise ValueError("kind must be span, full or zero")
        self.alg = alg
        self.m = m
        self.kind = kind
        gens = []
        for g in generators:
            if not g:
                continue
            if g.alg != alg:
                raise ValueError("basis mismatch")
            if homogeneous_degree(g) is None:
                raise NotHomogeneous(f"generator {g} is not homogeneous")
            if any(alg.radical_weight(e) != m for e in g.terms):
                raise ValueError(f"generator {g} is not supported in layer {m}")
            gens.append(g)
        self.generators: List[NCPoly] = gens
        self._span: Dict[int, Echelon] = {}

    @staticmethod
    def full(alg, m):
        return GradedSubmodule(alg, m, (), "full")

    @staticmethod
    def zero(alg, m):
        return GradedSubmodule(alg, m, (), "zero")

    def ambient_monomials(self, d: int) -> List[Exp]:
        """PBW monomials of total degree d in this layer."""
        alg = self.alg
        k = alg.n_plus_1
        e = d - self.m
        if e < 0:
            return []
        ys = weighted_monomials(alg.weights[k:], self.m)
        xs = monomials_of_degree(k, e)
        return [x + y for x in xs for y in ys]

    def ambient_dim(self, d: int) -> int:
        return len(self.ambient_monomials(d))

    def span(self, d: int) -> Echelon:
        hit = self._span.get(d)
        if hit is not None:
            return hit
        alg = self.alg
        k = alg.n_plus_1
        ech = Echelon()
        if self.kind == "full":
            for mono in self.ambient_monomials(d):
                ech.add({mono: Fraction(1)})
        elif self.kind == "span":
            pad = (0,) * (alg.nvars - k)
            for g in self.generators:
                gd = homogeneous_degree(g)
                if gd > d:
                    continue
                for beta in monomials_of_degree(k, d - gd):
                    shift = beta + pad
                    ech.add({add_exp(e, shift): c for e, c in g.terms.items()})
        self._span[d] = ech
        return ech

    def dim(self, d: int) -> int:
        if self.kind == "full":
            return self.ambient_dim(d)
        if self.kind == "zero":
            return 0
        return self.span(d).dim

    def is_full_at(self, d: int) -> bool:
        return self.kind == "full" or self.dim(d) == self.ambient_dim(d)

    def contains(self, f: NCPoly, d: Optional[int] = None) -> bool:
        """Membership of a homogeneous element of this layer in degree d."""
        if not f:
            return True
        fd = homogeneous_degree(f)
        if fd is None:
            raise NotHomogeneous("membership needs a homogeneous element")
        if d is not None and d != fd:
            return False
        if any(self.alg.radical_weight(e) != self.m for e in f.terms):
            return False
        if self.kind == "full":
            return True
        if self.kind == "zero":
            return False
        return self.span(fd).contains(f.terms)

    def residual(self, f: NCPoly) -> NCPoly:
        fd = homogeneous_degree(f)
        if self.kind == "full" or not f:
            return self.alg.zero()
        if self.kind == "zero":
            return f
        return NCPoly(self.alg, self.span(fd).reduce(f.terms))

    def basis(self, d: int) -> List[NCPoly]:
        if self.kind == "zero":
            return []
        return [NCPoly(self.alg, row) for row in self.span(d).basis()]

    def alpha_ideal_dims(self, alpha: Exp, d: int) -> Echelon:
        """{c in S^{d-m} : c y^alpha in I_m^d}, as an echelon over x-monomials."""
        k = self.alg.n_plus_1
        e = d - self.m
        ech = Echelon()
        if e < 0 or self.kind == "zero":
            return ech
        if self.kind == "full":
            for x in monomials_of_degree(k, e):
                ech.add({x: Fraction(1)})
            return ech
        # intersect the span with the coordinate subspace of y^alpha
        span = self.span(d)
        rows = span.basis()
        # eliminate the other coordinates: kernel of the projection onto them
        comb = Echelon()
        tagged = []
        for idx, row in enumerate(rows):
            vec = {("o",) + mono: c for mono, c in row.items() if mono[k:] != alpha}
            vec[("z", idx)] = Fraction(1)
            tagged.append(vec)
        for vec in tagged:
            comb.add(vec)
        for p, row in comb.rows.items():
            if p[0] == "z":
                # combination of rows with zero projection onto other coordinates
                total: Dict[Exp, Fraction] = {}
                for key, c in row.items():
                    if key[0] == "z":
                        for mono, v in rows[key[1]].items():
                            if mono[k:] == alpha:
                                total[mono[:k]] = total.get(mono[:k], 0) + c * v
                ech.add(total)
        return ech


# tail rules -------------------------------------------------------------------

@dataclass(frozen=True)
class PatternRule:
    support: Tuple[int, ...]        # radical positions (0-based within y)
    ideal: Tuple[Poly, ...]         # commutative generators in x; empty means full


@dataclass(frozen=True)
class TailRule:
    kind: str = "zero"              # zero | full | pattern
    rules: Tuple[PatternRule, ...] = ()
    default: str = "full"

    def layer(self, alg: EnvelopingAlgebra, m: int) -> GradedSubmodule:
        if self.kind == "zero":
            return GradedSubmodule.zero(alg, m)
        if self.kind == "full":
            return GradedSubmodule.full(alg, m)
        k = alg.n_plus_1
        pad_x = (0,) * k
        gens = []
        all_full = True
        for alpha in weighted_monomials(alg.weights[k:], m):
            supp = {t for t, v in enumerate(alpha) if v}
            rule = next((r for r in self.rules if supp <= set(r.support)), None)
            if rule is None:
                if self.default == "full":
                    gens.append(alg.monomial(pad_x + alpha))
                else:
                    all_full = False
                continue
            if not rule.ideal:
                gens.append(alg.monomial(pad_x + alpha))
                continue
            all_full = False
            for f in rule.ideal:
                gens.append(NCPoly(alg, {x + alpha: c for x, c in f.terms.items()}))
        if all_full:
            return GradedSubmodule.full(alg, m)
        return GradedSubmodule(alg, m, gens)


@dataclass
class ChainSpec:
    alg: EnvelopingAlgebra
    layers: Dict[int, GradedSubmodule]
    tail: TailRule = field(default_factory=TailRule)
    name: str = ""
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self._tail_cache: Dict[int, GradedSubmodule] = {}

    @property
    def m_max(self) -> int:
        return max(self.layers, default=-1)

    def layer(self, m: int) -> GradedSubmodule:
        if m in self.layers:
            return self.layers[m]
        if m < 0:
            raise ValueError("negative layer")
        if m <= self.m_max:
            # unspecified intermediate layers are empty (for example odd m when q=2)
            hit = self._tail_cache.get(m)
            if hit is None:
                hit = self._tail_cache[m] = GradedSubmodule.zero(self.alg, m)
                if not weighted_monomials(self.alg.weights[self.alg.n_plus_1:], m):
                    hit = self._tail_cache[m] = GradedSubmodule.full(self.alg, m)
            return hit
        hit = self._tail_cache.get(m)
        if hit is None:
            hit = self._tail_cache[m] = self.tail.layer(self.alg, m)
        return hit

    def sum_generators(self, up_to: int) -> List[NCPoly]:
        """Generators of every layer m <= up_to (full layers give their monomials)."""
        out = []
        k = self.alg.n_plus_1
        for m in range(up_to + 1):
            lay = self.layer(m)
            if lay.kind == "full":
                for alpha in weighted_monomials(self.alg.weights[k:], m):
                    out.append(self.alg.monomial((0,) * k + alpha))
            elif lay.kind == "span":
                out.extend(lay.generators)
        return out

    def contains(self, f: NCPoly) -> Tuple[bool, Optional[NCPoly], Optional[int]]:
        """Membership of a homogeneous element of S_q in the sum of the layers."""
        for (e, m), part in nc_layers(f).items():
            lay = self.layer(m)
            if not lay.contains(part):
                return False, lay.residual(part), m
        return True, None, None


def trivial_chain(alg: EnvelopingAlgebra) -> ChainSpec:
    """I_m = S (x) R^m for every m >= 1 and I_0 = 0."""
    return ChainSpec(alg, {0: GradedSubmodule.zero(alg, 0)}, TailRule("full"), "trivial")


def full_chain(alg: EnvelopingAlgebra) -> ChainSpec:
    return ChainSpec(alg, {0: GradedSubmodule.full(alg, 0)}, TailRule("full"), "full")


# reports ---------------------------------------------------------------------

@dataclass
class Witness:
    operator: str
    element: NCPoly
    source_layer: int
    degree: int
    target_layer: int
    image: NCPoly
    residual: NCPoly

    def as_dict(self):
        return {"operator": self.operator, "element": render(self.element),
                "source_layer": self.source_layer, "degree": self.degree,
                "target_layer": self.target_layer, "image": render(self.image),
                "residual": render(self.residual)}


@dataclass
class VerificationReport:
    predicate: str
    D: int
    result: str
    witness: Optional[Witness] = None
    checked: int = 0
    notes: List[str] = field(default_factory=list)
    operator: Optional[Callable] = None

    @property
    def passed(self) -> bool:
        return self.result != FAIL

    def as_dict(self):
        return {"predicate": self.predicate, "D": self.D, "result": self.result,
                "checked": self.checked, "notes": list(self.notes),
                "witness": self.witness.as_dict() if self.witness else None}


def _layer_range(chain: ChainSpec, D: int) -> range:
    return range(0, D + 1)


def _check_ops(chain: ChainSpec, D: int, predicate: str,
               ops: Sequence[Tuple[str, Callable[[NCPoly], NCPoly], int]],
               source_layers: Optional[Iterable[int]] = None) -> VerificationReport:
    """Apply each (name, op, weight shift) to spanning elements of degree <= D."""
    alg = chain.alg
    checked = 0
    layers = list(source_layers) if source_layers is not None else list(_layer_range(chain, D))
    for m in layers:
        lay = chain.layer(m)
        if lay.kind == "zero":
            continue
        for d in range(m, D + 1):
            basis = None
            for name, op, shift in ops:
                if shift is not None and chain.layer(m + shift).is_full_at(d + shift):
                    continue
                if basis is None:
                    basis = lay.basis(d)
                for el in basis:
                    img = op(el)
                    checked += 1
                    if not img:
                        continue
                    ok, res, tm = chain.contains(img)
                    if not ok:
                        w = Witness(name, el, m, d, tm, img, res)
                        rep = VerificationReport(predicate, D, FAIL, w, checked)
                        rep.operator = op
                        return rep
    return VerificationReport(predicate, D, PASS, None, checked)


def is_chain(chain: ChainSpec, D: int) -> VerificationReport:
    """y_j I_m inside I_{m+e_j} for every radical j, up to total degree D."""
    alg = chain.alg
    k = alg.n_plus_1
    ops = []
    for j in range(k, alg.nvars):
        ops.append((f"mul_{alg.basis.label(j)}", (lambda a, j=j: diagonal_mul(j, a)), alg.weights[j]))
    rep = _check_ops(chain, D, "chain", ops)
    rep.notes.append("S-module stability holds by construction (layers are spans of x-multiples)")
    return rep


def differential_ops(alg: EnvelopingAlgebra) -> List[Tuple[str, DiffOp, int]]:
    out = []
    for j in range(alg.nvars):
        for k in range(alg.q - alg.weights[j] + 1):
            for build, tag in ((build_delta_jk, "Delta"), (build_nabla_jk, "Nabla")):
                op = build(alg, j, k)
                if op.is_zero():
                    continue
                out.append((f"{tag}_{j},{k}", op, alg.weights[j] + k))
    return out


def is_differential_chain(chain: ChainSpec, D: int, require_chain: bool = True) -> VerificationReport:
    """Delta_{j,k}(I_m) + Nabla_{j,k}(I_m) inside I_{m+e_j+k}, up to degree D."""
    if require_chain:
        rep = is_chain(chain, D)
        if not rep.passed:
            rep.predicate = "differential-chain (chain precondition)"
            return rep
    ops = [(name, (lambda a, op=op: apply(op, a)), shift)
           for name, op, shift in differential_ops(chain.alg)]
    return _check_ops(chain, D, "differential-chain", ops)


def check_operator(chain: ChainSpec, op: Union[DiffOp, Callable], D: int, name: str = "",
                   shift: Optional[int] = None, source_layers=None) -> VerificationReport:
    """Stability of the chain under a single operator."""
    fn = (lambda a: apply(op, a)) if isinstance(op, DiffOp) else op
    label = name or getattr(op, "name", "") or "operator"
    return _check_ops(chain, D, f"stable under {label}", [(label, fn, shift)], source_layers)


def reverify_witness(chain: ChainSpec, report: VerificationReport) -> bool:
    """Re-apply the recorded operator and confirm the membership failure."""
    if report.passed or report.witness is None or report.operator is None:
        return False
    w = report.witness
    img = report.operator(w.element)
    if img != w.image:
        return False
    ok, _, _ = chain.contains(img)
    return not ok


def single_operator(alg: EnvelopingAlgebra, coeff: NCPoly, deriv_index: int, scalar=1,
                    name: str = "") -> DiffOp:
    """The building block R(coeff) o d/dz_i."""
    beta = [0] * alg.nvars
    beta[deriv_index] = 1
    return DiffOp.build(alg, [(coeff, tuple(beta), Fraction(scalar), "R")],
                        name or f"R({coeff}) d{alg.basis.label(deriv_index)}")


def base_layer_product_check(chain: ChainSpec, D: int) -> VerificationReport:
    """I_0 times (S (x) R^m) inside I_m, through diagonal products with radical monomials."""
    alg = chain.alg
    k = alg.n_plus_1
    lay0 = chain.layer(0)
    checked = 0
    for d in range(0, D + 1):
        if lay0.kind == "zero":
            break
        for el in lay0.basis(d):
            for m in range(1, D - d + 1):
                for alpha in weighted_monomials(alg.weights[k:], m):
                    img = NCPoly(alg, {add_exp(e, (0,) * k + alpha): c for e, c in el.terms.items()})
                    checked += 1
                    ok, res, tm = chain.contains(img)
                    if not ok:
                        return VerificationReport("I_0 * (S (x) R^m) in I_m", D, FAIL,
                                                  Witness(f"mul_y^{alpha}", el, 0, d, tm, img, res),
                                                  checked)
    return VerificationReport("I_0 * (S (x) R^m) in I_m", D, PASS, None, checked)


def chain_sum_ideal_check(chain: ChainSpec, D: int) -> VerificationReport:
    """Left and right multiplication by each z_j preserve the sum of the layers."""
    alg = chain.alg
    ops = []
    for j in range(alg.nvars):
        z = alg.gen(j)
        ops.append((f"L_{alg.basis.label(j)}", (lambda a, z=z: multiply(z, a)), None))
        ops.append((f"R_{alg.basis.label(j)}", (lambda a, z=z: multiply(a, z)), None))
    rep = _check_ops(chain, D, "two-sided ideal", ops)
    if rep.passed:
        sub = base_layer_product_check(chain, D)
        rep.checked += sub.checked
        if not sub.passed:
            return sub
        rep.notes.append("I_0 * (S (x) R^m) in I_m holds up to D")
    return rep


# NC-graded ideals --------------------------------------------------------------

@dataclass
class DecompositionResult:
    ok: bool
    D: int
    pieces: Dict[Tuple[int, int], List[NCPoly]] = field(default_factory=dict)   # (m, d) -> basis
    dims: Dict[int, int] = field(default_factory=dict)                            # d -> dim I^d
    offending: Optional[NCPoly] = None
    offending_degree: Optional[int] = None

    def layer_dim(self, m: int, d: int) -> int:
        return len(self.pieces.get((m, d), []))

    def to_chain_spec(self, alg: EnvelopingAlgebra) -> ChainSpec:
        layers: Dict[int, List[NCPoly]] = {}
        for (m, d), basis in self.pieces.items():
            layers.setdefault(m, []).extend(basis)
        mods = {m: GradedSubmodule(alg, m, gens) for m, gens in layers.items()}
        for m in range(self.D + 1):
            mods.setdefault(m, GradedSubmodule.zero(alg, m))
        return ChainSpec(alg, mods, TailRule("zero"), "decomposed",
                         {"valid_up_to_degree": self.D})


def decompose_nc_graded(alg: EnvelopingAlgebra, generators: Sequence[NCPoly], D: int) -> DecompositionResult:
    """Two-sided ideal up to degree D, NC-gradedness test, and its layers."""
    by_deg: Dict[int, List[NCPoly]] = {}
    for g in generators:
        if not g:
            continue
        gd = homogeneous_degree(g)
        if gd is None:
            raise NotHomogeneous(f"generator {g} is not homogeneous")
        by_deg.setdefault(gd, []).append(g)
    xs = [alg.gen(i) for i in range(alg.n_plus_1)]
    prev: List[NCPoly] = []
    result = DecompositionResult(True, D)
    for d in range(D + 1):
        ech = Echelon()
        for g in by_deg.get(d, []):
            ech.add(g.terms)
        for b in prev:
            for x in xs:
                ech.add(multiply(x, b).terms)
                ech.add(multiply(b, x).terms)
        basis = [NCPoly(alg, r) for r in ech.basis()]
        result.dims[d] = len(basis)
        pieces: Dict[int, Echelon] = {}
        for b in basis:
            for (e, m), part in nc_layers(b).items():
                if not ech.contains(part.terms):
                    result.ok = False
                    result.offending = b
                    result.offending_degree = d
                    return result
                pieces.setdefault(m, Echelon()).add(part.terms)
        for m, pe in pieces.items():
            result.pieces[(m, d)] = [NCPoly(alg, r) for r in pe.basis()]
        prev = basis
    return result


def compare_with_chain(result: DecompositionResult, chain: ChainSpec) -> Optional[Tuple[int, int]]:
    """First (m, d) where the decomposed layer differs from the chain's layer, else None."""
    for d in range(result.D + 1):
        for m in range(d + 1):
            lay = chain.layer(m)
            mine = result.pieces.get((m, d), [])
            if len(mine) != lay.dim(d):
                return (m, d)
            if any(not lay.contains(b) for b in mine):
                return (m, d)
    return None


# differential closure and the infinite-quantization criterion ------------------

@dataclass
class ClosureResult:
    pair: Tuple[int, int]
    generators: List[Poly]
    proper: bool
    definitive: bool
    unit_witness: Optional[Poly] = None
    hilbert: Dict[int, int] = field(default_factory=dict)   # d -> dim J^d
    minimal_generators: List[Poly] = field(default_factory=list)

    def verdict(self) -> str:
        if not self.proper:
            return "improper (definitive): reaches a unit"
        return "proper (definitive)" if self.definitive else "proper (up to D)"


def _ideal_span(gens: Sequence[Poly], nvars: int, d: int) -> Echelon:
    ech = Echelon()
    for g in gens:
        gd = g.homogeneous_degree()
        if gd is None or gd > d:
            continue
        for beta in monomials_of_degree(nvars, d - gd):
            ech.add({add_exp(e, beta): c for e, c in g.terms.items()})
    return ech


def minimal_generators(gens: Sequence[Poly], nvars: int, max_degree: int) -> List[Poly]:
    """Degree-by-degree minimal homogeneous generators of the ideal (gens)."""
    out: List[Poly] = []
    for d in range(max_degree + 1):
        have = _ideal_span(out, nvars, d)
        for g in gens:
            if g.homogeneous_degree() != d:
                continue
            r = have.reduce(g.terms)
            if r:
                out.append(Poly(nvars, r).monic())
                have.add(r)
    return out


def differential_closure(I0: Sequence[Poly], pair: Tuple[int, int], D: int, q: int = 2) -> ClosureResult:
    """Smallest ideal containing I0 and stable under d/dx_i, d/dx_j."""
    if q != 2:
        raise ValueError("the differential-closure criterion is stated for q = 2 only")
    if not I0:
        raise ValueError("empty ideal")
    nvars = I0[0].nvars
    i, j = pair
    for g in I0:
        if g.homogeneous_degree() is None:
            raise NotHomogeneous("closure needs homogeneous generators")
    seen = set()
    frontier = [g for g in I0 if g]
    gens: List[Poly] = []
    while frontier:
        g = frontier.pop()
        key = g.monic()
        if key in seen:
            continue
        seen.add(key)
        gens.append(g)
        for v in (i, j):
            dg = g.diff(v)
            if dg:
                frontier.append(dg)
    units = [g for g in gens if g.is_constant()]
    max_deg = max(g.degree() for g in gens)
    mins = minimal_generators(gens, nvars, max_deg)
    res = ClosureResult(pair, gens, not units, True, units[0] if units else None,
                        minimal_generators=mins)
    for d in range(D + 1):
        res.hilbert[d] = _ideal_span(gens, nvars, d).dim
    return res


def is_closure_certificate(I0: Sequence[Poly], J: Sequence[Poly], pair: Tuple[int, int], D: int) -> bool:
    """J proper, I0 + d_i I0 + d_j I0 inside J and d_i J + d_j J inside J, degreewise up to D."""
    if any(g.is_constant() and g for g in J):
        return False
    nvars = J[0].nvars
    needed = list(I0)
    for g in I0:
        needed += [g.diff(pair[0]), g.diff(pair[1])]
    for g in J:
        needed += [g.diff(pair[0]), g.diff(pair[1])]
    for f in needed:
        if not f:
            continue
        fd = f.homogeneous_degree()
        if fd > D:
            continue
        if not _ideal_span(J, nvars, fd).contains(f.terms):
            return False
    return True


@dataclass
class InfiniteQuantizationVerdict:
    answer: bool
    definitive: bool
    method: str
    closures: List[ClosureResult] = field(default_factory=list)
    dividing_variable: Optional[int] = None

    def summary(self) -> str:
        word = "YES" if self.answer else "NO"
        tag = "definitive" if self.definitive else "up to D"
        if not self.answer and self.method == "closure":
            return f"{word} ({tag}): all pairs reach a unit"
        if self.answer and self.method == "closure":
            good = [c.pair for c in self.closures if c.proper]
            return f"{word} ({tag}): proper closure for pair {good[0]}"
        if self.method == "divisibility":
            if self.answer:
                return f"{word} ({tag}): x{self.dividing_variable} divides f"
            return f"{word} ({tag}): no variable divides f"
        return f"{word} ({tag})"


def divisibility_fast_path(f: Poly) -> Optional[int]:
    """Index of a variable dividing f, or None."""
    for i in range(f.nvars):
        if all(e[i] > 0 for e in f.terms):
            return i
    return None


def infinite_quantization_check(I0: Sequence[Poly], D: int, method: str = "auto") -> InfiniteQuantizationVerdict:
    nvars = I0[0].nvars
    plane_curve = len(I0) == 1 and nvars == 3
    if method in ("auto", "divisibility") and plane_curve:
        idx = divisibility_fast_path(I0[0])
        return InfiniteQuantizationVerdict(idx is not None, True, "divisibility", [], idx)
    if method == "divisibility":
        raise ValueError("the divisibility criterion applies to a single form in three variables")
    closures = []
    for i in range(nvars):
        for j in range(i + 1, nvars):
            closures.append(differential_closure(I0, (i, j), D))
    answer = any(c.proper for c in closures)
    definitive = all(c.definitive for c in closures)
    return InfiniteQuantizationVerdict(answer, definitive, "closure", closures)


# projective q-scheme local criterion ------------------------------------------

def projective_q_scheme_local_check(chain: ChainSpec, i: int, M: int, D: int,
                                    max_saturation: int = 3) -> VerificationReport:
    """Chart operators (1/x_i^l) L_i^l and (1/x_i) R_i preserve the localized ideal on U_i."""
    from .localization import (Chart, ChartElement, RationalFn, build_S, from_ncpoly,
                               right_mult, _x_inv)

    alg = chain.alg
    chart = Chart.standard(alg, [i])
    ops = [(f"S_{l}", build_S(chart, i, l, M)) for l in range(1, alg.q + 1)]
    R = right_mult(chart, M, i)
    inv1 = _x_inv(chart, i, 1)
    ops.append(("(1/x_i)R_i", lambda w: R(w).coeff_mul(inv1)))
    checked = 0
    for m in range(0, min(M, D + 1)):
        lay = chain.layer(m)
        if lay.kind == "zero":
            continue
        for d in range(m, D + 1):
            basis = lay.basis(d)
            for el in basis:
                w = from_ncpoly(chart, M, el).coeff_mul(_x_inv(chart, i, d))
                for name, op in ops:
                    img = op(w)
                    checked += 1
                    ok, bad_m, poly_el = _localized_member(chain, img, i, max_saturation)
                    if not ok:
                        wit = Witness(name, el, m, d, bad_m, poly_el, poly_el)
                        return VerificationReport(f"local criterion on U_{i}", D, FAIL, wit, checked,
                                                  [f"truncation M={M}", f"saturation exponent <= {max_saturation}"])
    return VerificationReport(f"local criterion on U_{i}", D, PASS, None, checked,
                              [f"truncation M={M}", f"saturation exponent <= {max_saturation}"])


def _localized_member(chain: ChainSpec, w, i: int, max_k: int):
    """Layerwise: clear the x_i denominators, then test x_i^K * numerator in I_m."""
    alg = chain.alg
    k = alg.n_plus_1
    by_m: Dict[int, Dict] = {}
    for a, r in w.layers.items():
        m = alg.radical_weight((0,) * k + a)
        by_m.setdefault(m, {})[a] = r
    for m, parts in sorted(by_m.items()):
        E = max(r.den[0] for r in parts.values())
        terms = {}
        for a, r in parts.items():
            num = r._lift((E,))
            for x, c in num.terms.items():
                terms[x + a] = terms.get(x + a, 0) + c
        el = NCPoly(alg, terms)
        if not el:
            continue
        lay = chain.layer(m)
        ok = False
        cur = el
        for _ in range(max_k + 1):
            if lay.contains(cur):
                ok = True
                break
            cur = diagonal_mul(i, cur)
        if not ok:
            return False, m, el
    return True, None, None
