"""Free nilpotent Lie algebras with a Lyndon-word Hall basis.

Basis elements are the Lyndon words of length at most ``q`` over the
alphabet ``0..n``, bracketed by their standard factorization and sorted by
(length, word).  Brackets are normalized by expanding into the tensor
algebra and peeling off leading Lyndon words, which works because the
standard bracketing of a Lyndon word ``w`` is ``w`` plus lexicographically
larger words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

Word = Tuple[int, ...]


@dataclass(frozen=True)
class AlgebraSignature:
    n_plus_1: int
    q: int

    def __post_init__(self):
        if self.n_plus_1 < 1:
            raise ValueError("need at least one generator")
        if self.q < 1:
            raise ValueError("nilpotency index q must be >= 1")

    @property
    def n(self) -> int:
        return self.n_plus_1 - 1


@dataclass(frozen=True)
class HallElement:
    index: int
    degree: int
    word: Word
    left: Optional[int] = None
    right: Optional[int] = None

    @property
    def is_generator(self) -> bool:
        return self.left is None


def is_lyndon(word: Word) -> bool:
    k = len(word)
    return k > 0 and all(word < word[i:] + word[:i] for i in range(1, k))


def lyndon_words(alphabet: int, max_len: int) -> Iterator[Word]:
    """Duval's algorithm; yields Lyndon words in lexicographic order."""
    if alphabet <= 0:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == alphabet - 1:
            w.pop()


def standard_factorization(word: Word) -> Tuple[Word, Word]:
    """Split a Lyndon word as uv with v its longest proper Lyndon suffix."""
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise ValueError("single letters have no factorization")


def mobius(k: int) -> int:
    result, p, m = 1, 2, k
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def necklace_dimension(generators: int, degree: int) -> int:
    """Witt's formula for the degree-k piece of a free Lie algebra."""
    total = sum(mobius(dd) * generators ** (degree // dd)
                for dd in range(1, degree + 1) if degree % dd == 0)
    return total // degree


def _word_poly_mul(a: Dict[Word, int], b: Dict[Word, int]) -> Dict[Word, int]:
    out: Dict[Word, int] = {}
    for u, cu in a.items():
        for v, cv in b.items():
            w = u + v
            out[w] = out.get(w, 0) + cu * cv
    return out


def _word_poly_bracket(a, b):
    out = _word_poly_mul(a, b)
    for w, c in _word_poly_mul(b, a).items():
        out[w] = out.get(w, 0) - c
    return {w: c for w, c in out.items() if c}


class HallBasis:
    """Ordered basis z = x + y of the free q-step nilpotent Lie algebra."""

    def __init__(self, sig: AlgebraSignature):
        self.sig = sig
        words = sorted(lyndon_words(sig.n_plus_1, sig.q), key=lambda w: (len(w), w))
        self.elements: List[HallElement] = []
        self.index_of: Dict[Word, int] = {}
        for idx, w in enumerate(words):
            if len(w) == 1:
                el = HallElement(idx, 1, w)
            else:
                u, v = standard_factorization(w)
                el = HallElement(idx, len(w), w, self.index_of[u], self.index_of[v])
            self.elements.append(el)
            self.index_of[w] = idx
        self.degrees: Tuple[int, ...] = tuple(e.degree for e in self.elements)
        self._expansion_cache: Dict[int, Dict[Word, int]] = {}
        self._bracket_cache: Dict[Tuple[int, int], Dict[int, Fraction]] = {}

    # basic facts -----------------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def n_generators(self) -> int:
        return self.sig.n_plus_1

    @property
    def radical_indices(self) -> range:
        return range(self.sig.n_plus_1, self.size)

    def __eq__(self, other):
        return isinstance(other, HallBasis) and other.sig == self.sig

    def __hash__(self):
        return hash(self.sig)

    def label(self, idx: int) -> str:
        el = self.elements[idx]
        if el.is_generator:
            return f"x{el.word[0]}"
        return "y" + "".join(map(str, el.word))

    def bracket_label(self, idx: int) -> str:
        el = self.elements[idx]
        if el.is_generator:
            return f"x{el.word[0]}"
        return f"[{self.bracket_label(el.left)},{self.bracket_label(el.right)}]"

    # bracket normalization -------------------------------------------------
    def word_expansion(self, idx: int) -> Dict[Word, int]:
        cached = self._expansion_cache.get(idx)
        if cached is None:
            el = self.elements[idx]
            if el.is_generator:
                cached = {el.word: 1}
            else:
                cached = _word_poly_bracket(self.word_expansion(el.left),
                                            self.word_expansion(el.right))
            self._expansion_cache[idx] = cached
        return cached

    def decompose_words(self, poly: Dict[Word, Fraction]) -> Dict[int, Fraction]:
        """Express a Lie polynomial given in words through the Hall basis."""
        poly = {w: Fraction(c) for w, c in poly.items() if c}
        out: Dict[int, Fraction] = {}
        while poly:
            w = min(poly)
            if len(w) > self.sig.q:
                raise ValueError("word longer than the nilpotency index")
            idx = self.index_of.get(w)
            if idx is None:
                raise ValueError(f"not a Lie polynomial: leading word {w} is not Lyndon")
            c = poly[w]
            out[idx] = c
            for u, cu in self.word_expansion(idx).items():
                nv = poly.get(u, 0) - c * cu
                if nv:
                    poly[u] = nv
                else:
                    poly.pop(u, None)
        return out

    def bracket_basis(self, i: int, j: int) -> Dict[int, Fraction]:
        """[z_i, z_j] expanded in the basis; zero above degree q."""
        key = (i, j)
        cached = self._bracket_cache.get(key)
        if cached is not None:
            return cached
        if i == j or self.degrees[i] + self.degrees[j] > self.sig.q:
            result: Dict[int, Fraction] = {}
        elif (j, i) in self._bracket_cache:
            result = {k: -c for k, c in self._bracket_cache[(j, i)].items()}
        else:
            words = _word_poly_bracket(self.word_expansion(i), self.word_expansion(j))
            result = self.decompose_words(words)
        self._bracket_cache[key] = result
        return result


@lru_cache(maxsize=None)
def build_hall_basis(sig: AlgebraSignature) -> HallBasis:
    return HallBasis(sig)


def dimensions_by_degree(basis: HallBasis) -> List[int]:
    counts = [0] * basis.sig.q
    for d in basis.degrees:
        counts[d - 1] += 1
    return counts


@dataclass(frozen=True)
class LieElement:
    basis: HallBasis
    terms: Tuple[Tuple[int, Fraction], ...] = field(default=())

    @staticmethod
    def from_dict(basis: HallBasis, terms: Dict[int, Fraction]) -> "LieElement":
        return LieElement(basis, tuple(sorted((i, Fraction(c)) for i, c in terms.items() if c)))

    @staticmethod
    def generator(basis: HallBasis, idx: int) -> "LieElement":
        return LieElement(basis, ((idx, Fraction(1)),))

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> Optional[int]:
        """Common degree of all terms, or None when mixed or zero."""
        degs = {self.basis.degrees[i] for i, _ in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def _check(self, other):
        if self.basis != other.basis:
            raise ValueError("basis mismatch")

    def __add__(self, other):
        self._check(other)
        d = self.as_dict()
        for i, c in other.terms:
            d[i] = d.get(i, 0) + c
        return LieElement.from_dict(self.basis, d)

    def __neg__(self):
        return LieElement(self.basis, tuple((i, -c) for i, c in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LieElement":
        c = Fraction(c)
        if not c:
            return LieElement(self.basis)
        return LieElement(self.basis, tuple((i, c * v) for i, v in self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, c in self.terms:
            name = self.basis.bracket_label(i)
            parts.append(name if c == 1 else f"-{name}" if c == -1 else f"{c}*{name}")
        return " + ".join(parts).replace("+ -", "- ")


def bracket(a: LieElement, b: LieElement) -> LieElement:
    a._check(b)
    out: Dict[int, Fraction] = {}
    for i, ci in a.terms:
        for j, cj in b.terms:
            for k, ck in a.basis.bracket_basis(i, j).items():
                out[k] = out.get(k, 0) + ci * cj * ck
    return LieElement.from_dict(a.basis, out)


def eval_bracket_expr(basis: HallBasis, text: str, names: Optional[Dict[str, LieElement]] = None) -> LieElement:
    """Parse a bracket expression such as "[x0,[x1,x2]] - 2*[x0,x1]"."""
    from .parsing import parse, evaluate_lie
    return evaluate_lie(parse(text), basis, names or {})
