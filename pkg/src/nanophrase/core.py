"""Symbols, homotopy data, and nanophrases with a plain-text format.

A nanophrase is stored as a projection table (letter name -> symbol) and a
tuple of components, each a tuple of letter names.  The text format is::

    letters: A:b+ B:b+ C:b+ D:b- E:a- F:a-
    phrase: A B | C D B | D E A | F F C E

Empty components are written ``.`` and ``phrase:`` with nothing after it is
the phrase with no components.
"""

from __future__ import annotations

import enum
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence


class Empty(enum.Enum):
    """The out-of-alphabet marker allowed in extended triple sets."""

    EMPTY = "_"

    def __repr__(self) -> str:
        return "EMPTY"

    def __str__(self) -> str:
        return "_"


EMPTY = Empty.EMPTY

LETTER_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_]*\Z")
SYMBOL_RE = re.compile(r"[^\s:|(),<>]+\Z")


class ParseError(ValueError):
    """Raised on malformed text input; ``pos`` is a 0-based character offset."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at offset {pos})"
        super().__init__(message)


class InvalidPhrase(ValueError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


# ---------------------------------------------------------------------------
# homotopy data


def _check_involution(name: str, alpha: frozenset, mapping: Mapping[str, str]) -> None:
    for a in alpha:
        b = mapping.get(a, a)
        if b not in alpha:
            raise ValueError(f"{name} sends {a!r} outside alpha")
        if mapping.get(b, b) != a:
            raise ValueError(f"{name} is not an involution at {a!r}")


@dataclass(frozen=True)
class HomotopyData:
    """The symbol set with its involutions and the H3 triple set.

    ``tau`` constrains H2, ``nu`` acts in shift moves, ``sigma`` in
    self-crossing moves.  Triples may carry at most one ``EMPTY`` slot; such
    triples license extended H3 moves only.
    """

    alpha: frozenset
    tau: Mapping[str, str]
    nu: Mapping[str, str]
    sigma: Mapping[str, str]
    triples: frozenset
    name: str = "custom"
    allow_shift: bool = True
    allow_self_crossing: bool = True

    def __post_init__(self):
        alpha = frozenset(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        for sym in alpha:
            if not isinstance(sym, str) or not SYMBOL_RE.match(sym):
                raise ValueError(f"bad symbol name {sym!r}")
        for label in ("tau", "nu", "sigma"):
            full = {a: dict(getattr(self, label)).get(a, a) for a in alpha}
            _check_involution(label, alpha, full)
            object.__setattr__(self, label, _FrozenDict(full))
        triples = frozenset(tuple(t) for t in self.triples)
        for t in triples:
            if len(t) != 3:
                raise ValueError(f"triple {t!r} does not have three slots")
            if sum(1 for s in t if s is EMPTY) > 1:
                raise ValueError(f"triple {t!r} has more than one empty slot")
            for s in t:
                if s is not EMPTY and s not in alpha:
                    raise ValueError(f"triple {t!r} uses a symbol outside alpha")
        object.__setattr__(self, "triples", triples)

    @property
    def plain_triples(self) -> frozenset:
        return frozenset(t for t in self.triples if EMPTY not in t)

    @property
    def extended_triples(self) -> frozenset:
        return frozenset(t for t in self.triples if EMPTY in t)


def _fmt_involution(alpha, mapping) -> str:
    pairs = []
    for a in sorted(alpha):
        b = mapping[a]
        if a < b:
            pairs.append(f"{a}<->{b}")
    return " ".join(pairs)


def render_homotopy_data(h: HomotopyData) -> str:
    triples = sorted(h.triples, key=lambda t: tuple(str(s) for s in t))
    lines = [
        f"name: {h.name}",
        "alpha: " + " ".join(sorted(h.alpha)),
        "tau: " + _fmt_involution(h.alpha, h.tau),
        "nu: " + _fmt_involution(h.alpha, h.nu),
        "sigma: " + _fmt_involution(h.alpha, h.sigma),
        "S: " + " ".join("(" + ",".join(str(s) for s in t) + ")" for t in triples),
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_homotopy_data(text: str) -> HomotopyData:
    """Read the ``alpha:/tau:/nu:/sigma:/S:`` line format.

    Symbols missing from an involution line are fixed points.  ``_`` in a
    triple is the empty slot.
    """
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        if key not in ("name", "alpha", "tau", "nu", "sigma", "S"):
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        fields[key] = rest.strip()
    if "alpha" not in fields:
        raise ParseError("missing 'alpha:' line")
    alpha = fields["alpha"].split()

    def involution(key):
        out = {}
        for tok in fields.get(key, "").split():
            a, sep, b = tok.partition("<->")
            if not sep:
                raise ParseError(f"{key}: expected x<->y, got {tok!r}")
            out[a] = b
            out[b] = a
        return out

    triples = []
    for m in re.finditer(r"\(([^)]*)\)", fields.get("S", "")):
        slots = [s.strip() for s in m.group(1).split(",")]
        triples.append(tuple(EMPTY if s == "_" else s for s in slots))
    try:
        return HomotopyData(
            alpha=frozenset(alpha),
            tau=involution("tau"),
            nu=involution("nu"),
            sigma=involution("sigma"),
            triples=frozenset(triples),
            name=fields.get("name", "custom"),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# nanophrases


@dataclass(frozen=True)
class OccurrenceAddress:
    """1-based (component, position) slot of a letter occurrence."""

    component: int
    position: int

    def as_list(self) -> list[int]:
        return [self.component, self.position]


@dataclass(frozen=True)
class Nanophrase:
    projection: Mapping[str, str]
    components: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(tuple(c) for c in self.components))
        object.__setattr__(self, "projection", _FrozenDict(self.projection))

    @classmethod
    def from_words(cls, words: Iterable[Sequence[str] | str], projection: Mapping[str, str]):
        """Build from component words; a ``str`` word is split into characters."""
        comps = []
        for w in words:
            comps.append(tuple(w) if isinstance(w, str) else tuple(w))
        return cls(dict(projection), tuple(comps))

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def letters(self) -> frozenset:
        return frozenset(self.projection)

    def __len__(self) -> int:
        return sum(len(c) for c in self.components)

    def occurrences(self) -> Iterator[tuple[OccurrenceAddress, str]]:
        for ci, comp in enumerate(self.components, 1):
            for pi, letter in enumerate(comp, 1):
                yield OccurrenceAddress(ci, pi), letter

    def addresses_of(self, letter: str) -> tuple[OccurrenceAddress, ...]:
        return tuple(a for a, x in self.occurrences() if x == letter)

    def letter_at(self, addr: OccurrenceAddress) -> str:
        return self.components[addr.component - 1][addr.position - 1]

    def with_projection(self, updates: Mapping[str, str]) -> "Nanophrase":
        proj = dict(self.projection)
        proj.update(updates)
        return Nanophrase(proj, self.components)

    def __str__(self) -> str:
        return render_nanophrase(self)


class _FrozenDict(dict):
    """Read-only dict so that phrases can be hashed and shared freely."""

    def _blocked(self, *args, **kwargs):
        raise TypeError("projection is immutable")

    __setitem__ = __delitem__ = clear = pop = popitem = setdefault = update = _blocked

    def __hash__(self):
        return hash(frozenset(self.items()))

    def __reduce__(self):
        return (_FrozenDict, (dict(self),))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class GaussViolation:
    letter: str
    count: int

    def __str__(self):
        return f"letter {self.letter} occurs {self.count} times (expected 2)"


@dataclass(frozen=True)
class ProjectionViolation:
    letter: str
    symbol: str | None

    def __str__(self):
        if self.symbol is None:
            return f"letter {self.letter} has no projection"
        return f"letter {self.letter} projects to {self.symbol!r}, which is not in alpha"


@dataclass(frozen=True)
class NameViolation:
    letter: str

    def __str__(self):
        return f"{self.letter!r} is not a valid letter name"


Violation = GaussViolation | ProjectionViolation | NameViolation


def validate(p: Nanophrase, h: HomotopyData | None = None) -> list:
    """Return the list of violations; empty means ``p`` is a nanophrase over ``h``.

    With ``h=None`` only the Gauss condition and projection coverage are
    checked.
    """
    out: list = []
    counts = Counter(x for comp in p.components for x in comp)
    for letter in sorted(set(counts) | set(p.projection)):
        if not isinstance(letter, str) or not LETTER_RE.match(letter):
            out.append(NameViolation(letter))
        c = counts.get(letter, 0)
        if c != 2:
            out.append(GaussViolation(letter, c))
        if letter not in p.projection:
            out.append(ProjectionViolation(letter, None))
        elif h is not None and p.projection[letter] not in h.alpha:
            out.append(ProjectionViolation(letter, p.projection[letter]))
    return out


def check(p: Nanophrase, h: HomotopyData | None = None) -> Nanophrase:
    violations = validate(p, h)
    if violations:
        raise InvalidPhrase(violations)
    return p


# ---------------------------------------------------------------------------
# text format

_EMPTY_TOKENS = {".", "∅"}


def parse_nanophrase(text: str, h: HomotopyData | None = None) -> Nanophrase:
    """Parse the two-line text format and validate the result.

    When every declared letter name is a single character, component words
    may be written without spaces (``phrase: AB|CDB``).
    """
    letters_line = phrase_line = None
    offset = 0
    for raw in text.splitlines(keepends=True):
        stripped = raw.strip()
        start = offset + (len(raw) - len(raw.lstrip()))
        offset += len(raw)
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, rest = stripped.partition(":")
        if not sep or key.strip() not in ("letters", "phrase"):
            raise ParseError("expected a 'letters:' or 'phrase:' line", start)
        body_start = start + len(key) + 1 + (len(rest) - len(rest.lstrip()))
        if key.strip() == "letters":
            if letters_line is not None:
                raise ParseError("duplicate 'letters:' line", start)
            letters_line = (rest, body_start)
        else:
            if phrase_line is not None:
                raise ParseError("duplicate 'phrase:' line", start)
            phrase_line = (rest, body_start)
    if letters_line is None:
        raise ParseError("missing 'letters:' line", 0)
    if phrase_line is None:
        raise ParseError("missing 'phrase:' line", len(text))

    projection: dict[str, str] = {}
    body, base = letters_line
    for m in re.finditer(r"\S+", body):
        tok, pos = m.group(0), base + m.start() - (len(body) - len(body.lstrip()))
        name, sep, sym = tok.rpartition(":")
        if not sep or not name:
            raise ParseError(f"expected name:projection, got {tok!r}", pos)
        if not LETTER_RE.match(name):
            raise ParseError(f"bad letter name {name!r}", pos)
        if not SYMBOL_RE.match(sym):
            raise ParseError(f"bad projection token {sym!r}", pos)
        if h is not None and sym not in h.alpha:
            raise ParseError(f"unknown projection {sym!r} for letter {name}", pos)
        if name in projection:
            raise ParseError(f"letter {name} declared twice", pos)
        projection[name] = sym

    single_char = all(len(x) == 1 for x in projection)
    body, base = phrase_line
    base -= len(body) - len(body.lstrip())
    components: list[tuple[str, ...]] = []
    if body.strip():
        chunk_start = 0
        for chunk in body.split("|"):
            toks = chunk.split()
            chunk_pos = base + chunk_start
            chunk_start += len(chunk) + 1
            if len(toks) == 1 and toks[0] in _EMPTY_TOKENS:
                components.append(())
                continue
            if not toks:
                raise ParseError("empty component must be written '.'", chunk_pos)
            word: list[str] = []
            for tok in toks:
                if tok in _EMPTY_TOKENS:
                    raise ParseError("'.' must stand alone in its component", chunk_pos)
                if tok not in projection and single_char and len(tok) > 1:
                    word.extend(tok)
                else:
                    word.append(tok)
            for x in word:
                if x not in projection:
                    raise ParseError(f"letter {x} has no projection", chunk_pos)
            components.append(tuple(word))

    p = Nanophrase(projection, tuple(components))
    violations = validate(p, h)
    if violations:
        raise InvalidPhrase(violations)
    return p


def render_nanophrase(p: Nanophrase) -> str:
    letters = " ".join(f"{x}:{p.projection[x]}" for x in sorted(p.projection))
    comps = " | ".join(" ".join(c) if c else "." for c in p.components)
    return f"letters: {letters}".rstrip() + "\n" + f"phrase: {comps}".rstrip()


def compact_word(p: Nanophrase) -> str:
    """Dense ``AB|CDB|...`` rendering; only meaningful for 1-char names."""
    return "|".join("".join(c) if c else "∅" for c in p.components)


def phrase_to_json(p: Nanophrase) -> dict:
    return {
        "letters": {x: p.projection[x] for x in sorted(p.projection)},
        "components": [list(c) for c in p.components],
    }


def phrase_from_json(obj: Mapping | str, h: HomotopyData | None = None) -> Nanophrase:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return check(Nanophrase(dict(obj["letters"]), tuple(tuple(c) for c in obj["components"])), h)


# ---------------------------------------------------------------------------
# isomorphism


def canonical_form(p: Nanophrase) -> tuple:
    """Rename letters by order of first occurrence; return a comparable key."""
    rename: dict[str, int] = {}
    comps = []
    for comp in p.components:
        out = []
        for x in comp:
            if x not in rename:
                rename[x] = len(rename)
            out.append(rename[x])
        comps.append(tuple(out))
    projs = tuple(p.projection[x] for x, _ in sorted(rename.items(), key=lambda kv: kv[1]))
    return tuple(comps), projs


def isomorphic(p1: Nanophrase, p2: Nanophrase) -> bool:
    return canonical_form(p1) == canonical_form(p2)


def canonical_rename(p: Nanophrase, prefix: str = "L") -> Nanophrase:
    key: dict[str, str] = {}
    for _, x in p.occurrences():
        key.setdefault(x, f"{prefix}{len(key) + 1}")
    return Nanophrase(
        {key[x]: p.projection[x] for x in key},
        tuple(tuple(key[x] for x in c) for c in p.components),
    )
