"""Built-in homotopy data and the linking matrix.

The linking matrix takes values in the abelian group generated by the
symbols subject to ``a + tau(a) = 0``.  Elements are kept in a canonical
coordinate form: one integer coordinate per free tau-orbit (indexed by its
lexicographically smallest symbol) and one bit per tau-fixed symbol.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .core import EMPTY, HomotopyData, Nanophrase, check

VIRTUAL_ALPHA = frozenset({"a+", "a-", "b+", "b-"})

_TAU_V = {"a+": "b-", "b-": "a+", "a-": "b+", "b+": "a-"}
_NU_V = {"a+": "b+", "b+": "a+", "a-": "b-", "b-": "a-"}
_SIGMA_V = {"a+": "a-", "a-": "a+", "b+": "b-", "b-": "b+"}


def _virtual_triples() -> list[tuple[str, str, str]]:
    out = []
    for x, y in (("a+", "a-"), ("a-", "a+"), ("b+", "b-"), ("b-", "b+")):
        out += [(x, x, x), (x, x, y), (x, y, y)]
    return out


_WELDED_EXTRA = [
    ("a+", "a+", EMPTY), ("a+", "b-", EMPTY), ("b-", "a+", EMPTY), ("b-", "b-", EMPTY),
    ("a-", EMPTY, "b-"), ("b+", EMPTY, "a+"), ("a-", EMPTY, "a+"), ("b+", EMPTY, "b-"),
    (EMPTY, "a-", "a-"), (EMPTY, "a-", "b+"), (EMPTY, "b+", "a-"), (EMPTY, "b+", "b+"),
]


@lru_cache(maxsize=None)
def builtin_virtual() -> HomotopyData:
    return HomotopyData(VIRTUAL_ALPHA, _TAU_V, _NU_V, _SIGMA_V, frozenset(_virtual_triples()), name="virtual")


@lru_cache(maxsize=None)
def builtin_welded() -> HomotopyData:
    triples = frozenset(_virtual_triples() + _WELDED_EXTRA)
    return HomotopyData(VIRTUAL_ALPHA, _TAU_V, _NU_V, _SIGMA_V, triples, name="welded")


def builtin(name: str) -> HomotopyData:
    try:
        return {"virtual": builtin_virtual, "welded": builtin_welded}[name]()
    except KeyError:
        raise ValueError(f"unknown built-in homotopy data {name!r}") from None


# ---------------------------------------------------------------------------
# the group pi


@dataclass(frozen=True)
class _Basis:
    free: tuple[str, ...]
    torsion: tuple[str, ...]
    # symbol -> (kind, index, sign); kind 0 = free coordinate, 1 = Z/2 bit
    where: Mapping[str, tuple[int, int, int]]


@lru_cache(maxsize=None)
def _basis(alpha: frozenset, tau_items: frozenset) -> _Basis:
    tau = dict(tau_items)
    free, torsion = [], []
    for a in sorted(alpha):
        if tau[a] == a:
            torsion.append(a)
        elif a < tau[a]:
            free.append(a)
    where = {}
    for i, a in enumerate(free):
        where[a] = (0, i, 1)
        where[tau[a]] = (0, i, -1)
    for i, a in enumerate(torsion):
        where[a] = (1, i, 1)
    return _Basis(tuple(free), tuple(torsion), where)


def basis(h: HomotopyData) -> _Basis:
    return _basis(h.alpha, frozenset(h.tau.items()))


@dataclass(frozen=True)
class LinkingElement:
    basis: tuple[str, ...]
    coords: tuple[int, ...]
    torsion_basis: tuple[str, ...] = ()
    torsion: tuple[int, ...] = ()

    def __add__(self, other: "LinkingElement") -> "LinkingElement":
        if (self.basis, self.torsion_basis) != (other.basis, other.torsion_basis):
            raise ValueError("elements live in different groups")
        return LinkingElement(
            self.basis,
            tuple(a + b for a, b in zip(self.coords, other.coords)),
            self.torsion_basis,
            tuple((a + b) % 2 for a, b in zip(self.torsion, other.torsion)),
        )

    def __neg__(self) -> "LinkingElement":
        return LinkingElement(self.basis, tuple(-a for a in self.coords), self.torsion_basis, self.torsion)

    def is_zero(self) -> bool:
        return not any(self.coords) and not any(self.torsion)

    def __str__(self) -> str:
        terms = []
        for c, a in zip(self.coords, self.basis):
            if c:
                terms.append(f"{c}*{a}")
        for c, a in zip(self.torsion, self.torsion_basis):
            if c:
                terms.append(f"{a} (mod 2)")
        return " + ".join(terms) if terms else "0"


def zero_element(h: HomotopyData) -> LinkingElement:
    b = basis(h)
    return LinkingElement(b.free, (0,) * len(b.free), b.torsion, (0,) * len(b.torsion))


def reduce_linking(combination: Mapping[str, int] | Iterable[str], h: HomotopyData) -> LinkingElement:
    """Canonical form of a formal integer combination of symbols.

    ``combination`` is either a mapping symbol -> multiplicity or an
    iterable of symbols (each counted once per appearance).
    """
    if not isinstance(combination, Mapping):
        combination = Counter(combination)
    b = basis(h)
    coords = [0] * len(b.free)
    bits = [0] * len(b.torsion)
    for sym, mult in combination.items():
        if sym not in b.where:
            raise ValueError(f"symbol {sym!r} is not in alpha")
        kind, idx, sign = b.where[sym]
        if kind == 0:
            coords[idx] += sign * mult
        else:
            bits[idx] = (bits[idx] + mult) % 2
    return LinkingElement(b.free, tuple(coords), b.torsion, tuple(bits))


@dataclass(frozen=True)
class LinkingMatrix:
    n: int
    entries: tuple[tuple[LinkingElement, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> LinkingElement:
        i, j = ij
        return self.entries[i - 1][j - 1]

    def to_json(self) -> dict:
        basis_names = list(self.entries[0][0].basis) if self.n else []
        out = {"n": self.n, "basis": basis_names, "entries": [[list(e.coords) for e in row] for row in self.entries]}
        if self.n and self.entries[0][0].torsion_basis:
            out["torsion_basis"] = list(self.entries[0][0].torsion_basis)
            out["torsion"] = [[list(e.torsion) for e in row] for row in self.entries]
        return out


def linking_matrix(p: Nanophrase, h: HomotopyData) -> LinkingMatrix:
    check(p, h)
    where: dict[str, list[int]] = {}
    for addr, x in p.occurrences():
        where.setdefault(x, []).append(addr.component)
    sums: dict[tuple[int, int], Counter] = {}
    for x, (ci, cj) in where.items():
        if ci != cj:
            key = (min(ci, cj), max(ci, cj))
            sums.setdefault(key, Counter())[p.projection[x]] += 1
    zero = zero_element(h)
    rows = []
    for i in range(1, p.n + 1):
        row = []
        for j in range(1, p.n + 1):
            key = (min(i, j), max(i, j))
            row.append(reduce_linking(sums[key], h) if i != j and key in sums else zero)
        rows.append(tuple(row))
    return LinkingMatrix(p.n, tuple(rows))
