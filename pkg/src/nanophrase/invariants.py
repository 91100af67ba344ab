"""mu, Delta and mu-bar with an explicit stabilization check.

``mu(p; c_1..c_u, i)`` is the coefficient of ``k_c1 ... k_cu`` in the limit
of the Magnus series of component ``i``.  The coefficient at stage ``q`` is
read from :class:`~nanophrase.magnus.SeriesCalculator`; the stage starts at
``u + 1`` and is accepted only once it agrees with the next stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .core import Nanophrase
from .magnus import PhraseData, SeriesCalculator

DEFAULT_EXTRA_STAGES = 3


class StabilizationError(RuntimeError):
    """Coefficient did not settle within the stage cap."""

    def __init__(self, sequence: "IndexSequence", values: dict[int, int]):
        self.sequence = sequence
        self.values = dict(values)
        shown = ", ".join(f"q={q}: {v}" for q, v in sorted(values.items()))
        super().__init__(f"mu{sequence} did not stabilize ({shown})")


@dataclass(frozen=True)
class IndexSequence:
    prefix: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(c) for c in self.prefix))
        if not self.prefix:
            raise ValueError("an index sequence needs at least one prefix index")

    @classmethod
    def of(cls, *indices: int) -> "IndexSequence":
        """``IndexSequence.of(2, 3, 1)`` is ``(c_1, c_2; i) = (2, 3; 1)``."""
        if len(indices) == 1 and not isinstance(indices[0], int):
            indices = tuple(indices[0])
        if len(indices) < 2:
            raise ValueError("an index sequence needs at least two entries")
        return cls(tuple(indices[:-1]), indices[-1])

    @property
    def u(self) -> int:
        return len(self.prefix)

    def as_tuple(self) -> tuple[int, ...]:
        return self.prefix + (self.target,)

    @property
    def distinct(self) -> bool:
        t = self.as_tuple()
        return len(set(t)) == len(t)

    def check_range(self, n: int) -> None:
        for c in self.as_tuple():
            if not 1 <= c <= n:
                raise IndexError(f"index {c} out of range 1..{n}")

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.as_tuple()) + ")"


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 0:
            raise ValueError("modulus must be nonnegative")
        if self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def __str__(self) -> str:
        return f"{self.value} (mod {self.modulus})"


@dataclass
class MuResult:
    sequence: IndexSequence
    mu: int
    q_used: int
    values: dict[int, int] = field(default_factory=dict)


class Invariants:
    """Per-phrase cache shared by all mu/Delta queries on one phrase.

    ``extra_stages`` bounds the search: stages ``u+1 .. u+1+extra_stages``
    are tried before giving up.  ``start`` overrides the first stage.
    """

    def __init__(self, p: Nanophrase, extra_stages: int = DEFAULT_EXTRA_STAGES, start: int | None = None):
        self.phrase = p
        self.data = PhraseData(p)
        self.extra_stages = extra_stages
        self.start = start
        self._calcs: dict[int, SeriesCalculator] = {}
        self._mu: dict[IndexSequence, MuResult] = {}

    def _calc(self, bound: int) -> SeriesCalculator:
        if bound not in self._calcs:
            self._calcs[bound] = SeriesCalculator(self.data, bound)
        return self._calcs[bound]

    def coefficient(self, s: IndexSequence, q: int) -> int:
        return self._calc(s.u).component(s.target, q)[s.prefix]

    def mu_result(self, s: IndexSequence) -> MuResult:
        if s in self._mu:
            return self._mu[s]
        s.check_range(self.data.n)
        first = self.start if self.start is not None else s.u + 1
        first = max(first, 2)
        last = s.u + 1 + self.extra_stages
        values = {first: self.coefficient(s, first)}
        q = first
        while q < last:
            values[q + 1] = self.coefficient(s, q + 1)
            if values[q] == values[q + 1]:
                res = MuResult(s, values[q], q, values)
                self._mu[s] = res
                return res
            q += 1
        raise StabilizationError(s, values)

    def mu(self, s: IndexSequence) -> int:
        return self.mu_result(s).mu

    def delta(self, s: IndexSequence) -> int:
        g = 0
        for d in delta_subsequences(s):
            g = math.gcd(g, self.mu(d))
        return g

    def mu_bar(self, s: IndexSequence) -> Residue:
        return Residue(self.mu(s), self.delta(s))

    def report(self, s: IndexSequence) -> dict:
        r = self.mu_result(s)
        mb = self.mu_bar(s)
        return {
            "sequence": list(s.as_tuple()),
            "mu": r.mu,
            "delta": mb.modulus,
            "mubar": {"value": mb.value, "modulus": mb.modulus},
            "q_used": r.q_used,
        }


def _as_seq(s) -> IndexSequence:
    return s if isinstance(s, IndexSequence) else IndexSequence.of(*s)


def mu(p: Nanophrase, s: IndexSequence | Sequence[int], **kw) -> int:
    return Invariants(p, **kw).mu(_as_seq(s))


def delta(p: Nanophrase, s: IndexSequence | Sequence[int], **kw) -> int:
    return Invariants(p, **kw).delta(_as_seq(s))


def mu_bar(p: Nanophrase, s: IndexSequence | Sequence[int], **kw) -> Residue:
    return Invariants(p, **kw).mu_bar(_as_seq(s))


def delta_subsequences(s: IndexSequence | Sequence[int]) -> list[IndexSequence]:
    """Proper order-preserving subsequences of length >= 2, with all rotations.

    Order of the result: by length, then by the position of the kept
    indices, then by rotation offset; duplicates dropped.
    """
    full = _as_seq(s).as_tuple()
    seen: dict[tuple[int, ...], None] = {}
    for t in range(2, len(full)):
        for keep in combinations(range(len(full)), t):
            sub = tuple(full[k] for k in keep)
            for r in range(t):
                seen.setdefault(sub[r:] + sub[:r], None)
    return [IndexSequence(d[:-1], d[-1]) for d in seen]


def distinct_sequences(n: int, max_len: int) -> Iterable[IndexSequence]:
    """All pairwise-distinct sequences over 1..n of length 2..max_len."""
    from itertools import permutations

    for t in range(2, min(max_len, n) + 1):
        for perm in permutations(range(1, n + 1), t):
            yield IndexSequence(perm[:-1], perm[-1])
