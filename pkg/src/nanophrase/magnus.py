"""Signed components, the rho expansion, eta, and truncated Magnus series.

Everything here assumes projections in ``{a+, a-, b+, b-}``.  Signed words
are never freely reduced: ``A A^-1`` stays two letters.

The naive route (``rho_expand`` -> ``eta_word`` -> ``phi_series``) builds
the expansion word literally and grows exponentially in ``q``.
``component_series`` reaches the same series by recursing on per-letter
series with memoization; the two are checked against each other in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Nanophrase, check
from .homotopy import VIRTUAL_ALPHA


@dataclass(frozen=True)
class SignedLetter:
    letter: str | int
    exponent: int

    def __post_init__(self):
        if self.exponent not in (1, -1):
            raise ValueError(f"exponent must be +1 or -1, got {self.exponent}")

    def inverse(self) -> "SignedLetter":
        return SignedLetter(self.letter, -self.exponent)

    def __str__(self) -> str:
        name = f"a_{self.letter}" if isinstance(self.letter, int) else self.letter
        return name if self.exponent == 1 else f"{name}^-1"


class SignedWord(tuple):
    """An immutable sequence of :class:`SignedLetter` with formal inversion."""

    def __new__(cls, letters: Iterable[SignedLetter] = ()):
        return super().__new__(cls, letters)

    def inverse(self) -> "SignedWord":
        return SignedWord(x.inverse() for x in reversed(self))

    def __add__(self, other) -> "SignedWord":
        return SignedWord(tuple.__add__(self, other))

    def __getitem__(self, key):
        out = tuple.__getitem__(self, key)
        return SignedWord(out) if isinstance(key, slice) else out

    def __str__(self) -> str:
        return " ".join(str(x) for x in self) if self else "∅"

    def __repr__(self) -> str:
        return f"SignedWord({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "SignedWord":
        """Inverse of ``str``: tokens ``X`` or ``X^-1``; ``a_k`` names become ints."""
        out = []
        for tok in text.split():
            if tok == "∅":
                continue
            name, _, exp = tok.partition("^")
            e = -1 if exp == "-1" else 1
            if exp not in ("", "-1", "1"):
                raise ValueError(f"bad exponent in {tok!r}")
            if name.startswith("a_") and name[2:].isdigit():
                out.append(SignedLetter(int(name[2:]), e))
            else:
                out.append(SignedLetter(name, e))
        return cls(out)

    def dense(self) -> str:
        """Dense notation, e.g. ``EC^{-1}D`` or ``a_4a_2^{-1}``."""
        parts = []
        for x in self:
            name = f"a_{x.letter}" if isinstance(x.letter, int) else x.letter
            parts.append(name if x.exponent == 1 else name + "^{-1}")
        return "".join(parts) if parts else "∅"


# ---------------------------------------------------------------------------
# signs and eta


def _require_virtual(p: Nanophrase) -> None:
    for x, sym in p.projection.items():
        if sym not in VIRTUAL_ALPHA:
            raise ValueError(f"letter {x} projects to {sym!r}; only a+, a-, b+, b- are supported")


def _sign(sym: str, here: int, there: int) -> int:
    if here < there:
        return {"b+": 1, "a-": -1}.get(sym, 0)
    if here > there:
        return {"a+": 1, "b-": -1}.get(sym, 0)
    return 0


@dataclass(frozen=True)
class _Occ:
    component: int
    position: int


class PhraseData:
    """Per-phrase tables for the signed components, prefixes and eta."""

    def __init__(self, p: Nanophrase):
        check(p)
        _require_virtual(p)
        self.phrase = p
        self.n = p.n
        where: dict[str, list[_Occ]] = {}
        for addr, x in p.occurrences():
            where.setdefault(x, []).append(_Occ(addr.component, addr.position))
        self.where = where
        # sign of each occurrence
        self.sign: dict[_Occ, int] = {}
        for x, (o1, o2) in where.items():
            sym = p.projection[x]
            self.sign[o1] = _sign(sym, o1.component, o2.component)
            self.sign[o2] = _sign(sym, o2.component, o1.component)
        self.signed: list[SignedWord] = []
        for ci, comp in enumerate(p.components, 1):
            word = []
            for pi, x in enumerate(comp, 1):
                e = self.sign[_Occ(ci, pi)]
                if e:
                    word.append(SignedLetter(x, e))
            self.signed.append(SignedWord(word))
        self.eta: dict[str, int] = {}
        self.prefix: dict[str, SignedWord] = {}
        for x, (o1, o2) in where.items():
            s1, s2 = self.sign[o1], self.sign[o2]
            if s1 == 0 and s2 == 0:
                self.eta[x] = o1.component
                continue
            live, dead = (o1, o2) if s1 else (o2, o1)
            self.eta[x] = dead.component
            # signed letters of the partner component strictly before the partner
            comp = p.components[dead.component - 1]
            self.prefix[x] = SignedWord(
                SignedLetter(y, self.sign[_Occ(dead.component, j)])
                for j, y in enumerate(comp[: dead.position - 1], 1)
                if self.sign[_Occ(dead.component, j)]
            )


def signed_component(p: Nanophrase, i: int) -> SignedWord:
    data = PhraseData(p)
    _check_component(data, i)
    return data.signed[i - 1]


def eta_index(p: Nanophrase, letter: str) -> int:
    data = PhraseData(p)
    if letter not in data.eta:
        raise KeyError(f"unknown letter {letter!r}")
    return data.eta[letter]


def _check_component(data: PhraseData, i: int) -> None:
    if not 1 <= i <= data.n:
        raise IndexError(f"component {i} out of range 1..{data.n}")


def _check_q(q: int) -> None:
    if q < 2:
        raise ValueError(f"expansion stage q must be >= 2, got {q}")


def rho_expand(p: Nanophrase | PhraseData, i: int, q: int) -> SignedWord:
    """The literal expansion word of the i-th signed component at stage q."""
    _check_q(q)
    data = p if isinstance(p, PhraseData) else PhraseData(p)
    _check_component(data, i)
    memo: dict[tuple[str, int], SignedWord] = {}

    def conj(x: str, r: int) -> SignedWord:
        # rho^r(prefix_x)
        key = (x, r)
        if key not in memo:
            memo[key] = expand(data.prefix[x], r)
        return memo[key]

    def expand(word: Sequence[SignedLetter], r: int) -> SignedWord:
        out: list[SignedLetter] = []
        for sl in word:
            if r == 2:
                out.append(sl)
            else:
                c = conj(sl.letter, r - 1)
                out.extend(c.inverse())
                out.append(sl)
                out.extend(c)
        return SignedWord(out)

    return expand(data.signed[i - 1], q)


def rho_expand_word(p: Nanophrase | PhraseData, word: Sequence[SignedLetter], q: int) -> SignedWord:
    """Apply rho^q letter by letter to an arbitrary signed word.

    Each signed letter is expanded from its own definition, inverse letters
    included, with no shortcut through word inversion.
    """
    _check_q(q)
    data = p if isinstance(p, PhraseData) else PhraseData(p)

    def expand(w: Sequence[SignedLetter], r: int) -> list[SignedLetter]:
        out: list[SignedLetter] = []
        for sl in w:
            if r == 2:
                out.append(sl)
            else:
                x = data.prefix[sl.letter]
                out.extend(expand(x.inverse(), r - 1))
                out.append(sl)
                out.extend(expand(x, r - 1))
        return out

    return SignedWord(expand(word, q))


def eta_word(p: Nanophrase | PhraseData, w: Iterable[SignedLetter]) -> SignedWord:
    data = p if isinstance(p, PhraseData) else PhraseData(p)
    out = []
    for sl in w:
        if sl.letter not in data.eta:
            raise KeyError(f"unknown letter {sl.letter!r}")
        out.append(SignedLetter(data.eta[sl.letter], sl.exponent))
    return SignedWord(out)


# ---------------------------------------------------------------------------
# truncated non-commutative power series

Monomial = tuple


class MagnusSeries:
    """Integer series in non-commuting variables, truncated above ``bound``.

    Monomials are tuples of variable indices; ``()`` is the constant term.
    Zero coefficients are never stored.
    """

    __slots__ = ("bound", "terms")

    def __init__(self, terms: Mapping[Monomial, int] | None = None, bound: int = 0):
        if bound < 0:
            raise ValueError("bound must be >= 0")
        self.bound = bound
        self.terms: dict[Monomial, int] = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if c and len(m) <= bound:
                self.terms[m] = self.terms.get(m, 0) + c
        self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def one(cls, bound: int) -> "MagnusSeries":
        return cls({(): 1}, bound)

    @classmethod
    def generator(cls, h: int, exponent: int, bound: int) -> "MagnusSeries":
        """phi(a_h) = 1 + k_h, phi(a_h^-1) = 1 - k_h + k_h^2 - ..."""
        if exponent == 1:
            return cls({(): 1, (h,): 1}, bound)
        return cls({(h,) * d: (-1) ** d for d in range(bound + 1)}, bound)

    def __getitem__(self, m: Iterable[int]) -> int:
        return self.terms.get(tuple(m), 0)

    def coefficient(self, m: Iterable[int]) -> int:
        m = tuple(m)
        if len(m) > self.bound:
            raise ValueError(f"monomial of degree {len(m)} exceeds bound {self.bound}")
        return self.terms.get(m, 0)

    def truncate(self, bound: int) -> "MagnusSeries":
        return MagnusSeries(self.terms, min(bound, self.bound))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MagnusSeries):
            return NotImplemented
        return self.bound == other.bound and self.terms == other.terms

    def __hash__(self):
        return hash((self.bound, frozenset(self.terms.items())))

    def __add__(self, other: "MagnusSeries") -> "MagnusSeries":
        bound = min(self.bound, other.bound)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return MagnusSeries(out, bound)

    def __neg__(self) -> "MagnusSeries":
        return MagnusSeries({m: -c for m, c in self.terms.items()}, self.bound)

    def __sub__(self, other: "MagnusSeries") -> "MagnusSeries":
        return self + (-other)

    def __mul__(self, other: "MagnusSeries") -> "MagnusSeries":
        bound = min(self.bound, other.bound)
        out: dict[Monomial, int] = {}
        right = sorted(other.terms.items(), key=lambda kv: len(kv[0]))
        for m1, c1 in self.terms.items():
            room = bound - len(m1)
            if room < 0:
                continue
            for m2, c2 in right:
                if len(m2) > room:
                    break
                m = m1 + m2
                out[m] = out.get(m, 0) + c1 * c2
        return MagnusSeries(out, bound)

    def inverse(self) -> "MagnusSeries":
        return series_inverse(self)

    def items(self) -> Iterator[tuple[Monomial, int]]:
        return iter(sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])))

    def lines(self) -> list[str]:
        """``"monomial: coefficient"`` lines in degree-then-lexicographic order."""
        return [f"{format_monomial(m)}: {c}" for m, c in self.items()]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.items():
            mono = format_monomial(m)
            if not m:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"MagnusSeries({str(self)!r}, bound={self.bound})"


def format_monomial(m: Monomial) -> str:
    return "1" if not m else "*".join(f"k{h}" for h in m)


def series_inverse(s: MagnusSeries) -> MagnusSeries:
    """Inverse of a series with constant term 1, exact up to its bound.

    Uses ``(1 + r)^-1 = sum_k (-r)^k``; the sum terminates because ``r``
    has no constant term.
    """
    if s[()] != 1:
        raise ValueError("series inverse requires constant term 1")
    r = MagnusSeries({m: c for m, c in s.terms.items() if m}, s.bound)
    neg_r = -r
    total = MagnusSeries.one(s.bound)
    power = MagnusSeries.one(s.bound)
    for _ in range(s.bound):
        power = power * neg_r
        if not power.terms:
            break
        total = total + power
    return total


def phi_series(w: Iterable[SignedLetter], bound: int) -> MagnusSeries:
    """Magnus image of a word in the component generators ``a_1..a_n``."""
    out = MagnusSeries.one(bound)
    for sl in w:
        out = out * MagnusSeries.generator(sl.letter, sl.exponent, bound)
    return out


class SeriesCalculator:
    """Memoized ``phi(eta(rho^q(w_i)))`` for one phrase.

    The series of a signed letter ``A^e`` at stage ``q`` is
    ``P^-1 * phi(a_k^e) * P`` with ``P`` the stage ``q-1`` series of the
    letter's prefix word.  Tables are keyed by ``(letter, q)`` at a fixed
    bound.
    """

    def __init__(self, p: Nanophrase | PhraseData, bound: int):
        self.data = p if isinstance(p, PhraseData) else PhraseData(p)
        self.bound = bound
        self._prefix: dict[tuple[str, int], tuple[MagnusSeries, MagnusSeries]] = {}
        self._component: dict[tuple[int, int], MagnusSeries] = {}

    def _prefix_series(self, letter: str, q: int) -> tuple[MagnusSeries, MagnusSeries]:
        key = (letter, q)
        hit = self._prefix.get(key)
        if hit is None:
            s = self.word_series(self.data.prefix[letter], q)
            hit = (s, series_inverse(s))
            self._prefix[key] = hit
        return hit

    def letter_series(self, sl: SignedLetter, q: int) -> MagnusSeries:
        gen = MagnusSeries.generator(self.data.eta[sl.letter], sl.exponent, self.bound)
        if q == 2:
            return gen
        pre, pre_inv = self._prefix_series(sl.letter, q - 1)
        return pre_inv * gen * pre

    def word_series(self, word: Iterable[SignedLetter], q: int) -> MagnusSeries:
        out = MagnusSeries.one(self.bound)
        for sl in word:
            out = out * self.letter_series(sl, q)
        return out

    def component(self, i: int, q: int) -> MagnusSeries:
        _check_q(q)
        _check_component(self.data, i)
        key = (i, q)
        if key not in self._component:
            self._component[key] = self.word_series(self.data.signed[i - 1], q)
        return self._component[key]


def component_series(p: Nanophrase | PhraseData, i: int, q: int, bound: int) -> MagnusSeries:
    return SeriesCalculator(p, bound).component(i, q)


def naive_component_series(p: Nanophrase | PhraseData, i: int, q: int, bound: int) -> MagnusSeries:
    data = p if isinstance(p, PhraseData) else PhraseData(p)
    return phi_series(eta_word(data, rho_expand(data, i, q)), bound)
