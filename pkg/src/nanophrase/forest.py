"""Recursion forests of the rho expansion and signed subforest counts.

Each root is a signed letter of ``w_i``; the children of a node are the
letters inserted around it one stage later (the expansion of its prefix
word and of that word's inverse).  Counting ancestor-closed selections
whose labels spell a given index sequence, split by the parity of negative
signs, reproduces a series coefficient as ``even - odd``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .core import Nanophrase
from .magnus import PhraseData, SignedLetter, SignedWord, SeriesCalculator, _check_component, _check_q


@dataclass
class ForestNode:
    location: int
    letter: str
    eta_index: int
    sign: int
    depth: int
    children: list["ForestNode"] = field(default_factory=list)

    def walk(self) -> Iterator["ForestNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    @property
    def label(self) -> tuple[int, str, int, int]:
        return (self.location, self.letter, self.eta_index, self.sign)


@dataclass
class Forest:
    roots: list[ForestNode]
    q: int

    def nodes(self) -> Iterator[ForestNode]:
        for r in self.roots:
            yield from r.walk()

    def flatten(self) -> SignedWord:
        ordered = sorted(self.nodes(), key=lambda v: v.location)
        return SignedWord(SignedLetter(v.letter, v.sign) for v in ordered)

    def max_depth(self) -> int:
        return max((v.depth for v in self.nodes()), default=-1)

    def dump(self) -> str:
        lines = []

        def visit(v: ForestNode):
            lines.append(f"{'  ' * v.depth}g={v.location} {v.letter}^{v.sign} k={v.eta_index} d={v.depth}")
            for c in v.children:
                visit(c)

        for r in self.roots:
            visit(r)
        return "\n".join(lines)


def build_forest(p: Nanophrase | PhraseData, i: int, q: int) -> Forest:
    _check_q(q)
    data = p if isinstance(p, PhraseData) else PhraseData(p)
    _check_component(data, i)
    counter = [0]

    def grow(sl: SignedLetter, stage: int, depth: int) -> ForestNode:
        # in-order numbering: left subtrees, then this node, then right subtrees
        node = ForestNode(0, sl.letter, data.eta[sl.letter], sl.exponent, depth)
        if stage > 2:
            x = data.prefix[sl.letter]
            node.children.extend(grow(y, stage - 1, depth + 1) for y in x.inverse())
            counter[0] += 1
            node.location = counter[0]
            node.children.extend(grow(y, stage - 1, depth + 1) for y in x)
        else:
            counter[0] += 1
            node.location = counter[0]
        return node

    return Forest([grow(sl, q, 0) for sl in data.signed[i - 1]], q)


def closed_selections(forest: Forest, labels: set[int] | None = None, max_size: int | None = None):
    """Yield every ancestor-closed vertex selection as a list of nodes.

    Only vertices whose third label lies in ``labels`` may be selected, and
    no two selected vertices share a third label.
    """

    def extend(selected: list[ForestNode], candidates: list[ForestNode], used: frozenset):
        yield selected
        if max_size is not None and len(selected) >= max_size:
            return
        for idx, v in enumerate(candidates):
            if labels is not None and v.eta_index not in labels:
                continue
            if v.eta_index in used:
                continue
            yield from extend(selected + [v], candidates[idx + 1:] + v.children, used | {v.eta_index})

    yield from extend([], list(forest.roots), frozenset())


def subforest_counts(forest: Forest, c: Sequence[int]) -> tuple[int, int]:
    """(even, odd) counts of valid selections spelling ``c`` in location order."""
    c = tuple(c)
    if len(set(c)) != len(c):
        raise ValueError(f"index sequence {c} has repeated entries")
    even = odd = 0
    for sel in closed_selections(forest, set(c), len(c)):
        if len(sel) != len(c):
            continue
        ordered = sorted(sel, key=lambda v: v.location)
        if tuple(v.eta_index for v in ordered) != c:
            continue
        if sum(1 for v in sel if v.sign == -1) % 2:
            odd += 1
        else:
            even += 1
    return even, odd


def oracle_check(p: Nanophrase | PhraseData, i: int, c: Sequence[int], q: int) -> bool:
    data = p if isinstance(p, PhraseData) else PhraseData(p)
    even, odd = subforest_counts(build_forest(data, i, q), c)
    coeff = SeriesCalculator(data, len(c)).component(i, q)[tuple(c)]
    return coeff == even - odd
