"""Sparse exact row reduction keyed by monomials.

Rows are dicts monomial -> Fraction.  The pivot of a row is its
lexicographically smallest monomial, which makes reduction deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional

Row = Dict[Hashable, Fraction]


class Echelon:
    __slots__ = ("rows",)

    def __init__(self, vectors: Iterable[Row] = ()):
        self.rows: Dict[Hashable, Row] = {}
        for v in vectors:
            self.add(v)

    def __len__(self):
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Row) -> Row:
        v = {k: Fraction(c) for k, c in v.items() if c}
        rows = self.rows
        done = set()
        while True:
            cands = [k for k in v if k in rows and k not in done]
            if not cands:
                return v
            p = min(cands)
            c = v.get(p)
            if c:
                for k, rc in rows[p].items():
                    nv = v.get(k, 0) - c * rc
                    if nv:
                        v[k] = nv
                    else:
                        v.pop(k, None)
            done.add(p)

    def add(self, v: Row) -> bool:
        """Insert v; returns True when it enlarged the span."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        c = r[p]
        self.rows[p] = {k: x / c for k, x in r.items()}
        return True

    def contains(self, v: Row) -> bool:
        return not self.reduce(v)

    def basis(self) -> List[Row]:
        return [self.rows[p] for p in sorted(self.rows)]
