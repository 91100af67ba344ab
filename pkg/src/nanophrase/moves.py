"""Enumeration and application of rewriting moves, plus seeded random walks.

Pattern conventions: matched letter pairs are adjacent inside a single
component, while the gap words between matched pieces may run across
component boundaries.  Insertion slots are ``(component, offset)`` with
``offset`` in ``0..len(component)``; a letter inserted at offset ``o``
lands just after the first ``o`` letters.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .core import EMPTY, HomotopyData, Nanophrase, OccurrenceAddress, render_nanophrase
from .homotopy import builtin_virtual

H1_REMOVE = "H1_remove"
H1_INSERT = "H1_insert"
H2_REMOVE = "H2_remove"
H2_INSERT = "H2_insert"
H3 = "H3"
H3EXT = "H3ext"
SHIFT = "Shift"
SELF_CROSS = "SelfCross"
NOOP = "Noop"

ALL_KINDS = frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, H3, H3EXT, SHIFT, SELF_CROSS})
INSERT_KINDS = frozenset({H1_INSERT, H2_INSERT})

VARIANT_KINDS = {
    "open_M": frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, H3, SELF_CROSS}),
    "M": frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, H3, SELF_CROSS, SHIFT}),
    "welded_M": frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, H3, H3EXT, SELF_CROSS, SHIFT}),
}

FRESH_PREFIX = "n_"
_FRESH_RE = re.compile(r"n_(\d+)\Z")

FORWARD = "forward"
BACKWARD = "backward"

# H3 templates as three ordered units over letter slots 0=A, 1=B, 2=C.
_H3_UNITS = {
    FORWARD: ((0, 1), (0, 2), (1, 2)),
    BACKWARD: ((1, 0), (2, 0), (2, 1)),
}


class MoveError(ValueError):
    """A site does not apply to the phrase it was given."""


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


@dataclass(frozen=True)
class MoveSite:
    kind: str
    direction: str = FORWARD
    addresses: tuple[OccurrenceAddress, ...] = ()
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "addresses", tuple(
            a if isinstance(a, OccurrenceAddress) else OccurrenceAddress(*a) for a in self.addresses))
        items = self.params.items() if isinstance(self.params, Mapping) else self.params
        object.__setattr__(self, "params", tuple(sorted((k, _freeze(v)) for k, v in items)))

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def with_params(self, **updates) -> "MoveSite":
        merged = dict(self.params)
        merged.update(updates)
        return replace(self, params=tuple(merged.items()))

    def to_json(self) -> dict:
        def plain(v):
            if v is EMPTY:
                return None
            if isinstance(v, tuple):
                return [plain(x) for x in v]
            return v

        return {
            "kind": self.kind,
            "direction": self.direction,
            "addresses": [a.as_list() for a in self.addresses],
            "params": {k: plain(v) for k, v in self.params},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "MoveSite":
        return cls(
            obj["kind"],
            obj.get("direction", FORWARD),
            tuple(OccurrenceAddress(*a) for a in obj.get("addresses", ())),
            tuple((obj.get("params") or {}).items()),
        )

    def describe(self) -> str:
        addrs = " ".join(f"{a.component}.{a.position}" for a in self.addresses)
        ps = " ".join(f"{k}={_short(v)}" for k, v in self.params if v is not None)
        return " ".join(x for x in (self.kind, self.direction if self.kind in (H3, H3EXT) else "", addrs, ps) if x)


def _short(v) -> str:
    if isinstance(v, tuple):
        return ",".join("_" if x is None else str(x) for x in v)
    return str(v)


# ---------------------------------------------------------------------------
# flat view


class _Flat:
    """Global left-to-right view of the occurrences of a phrase."""

    def __init__(self, p: Nanophrase):
        self.p = p
        self.cells: list[tuple[int, int, str]] = []
        self.occ: dict[str, list[int]] = {}
        for addr, x in p.occurrences():
            self.occ.setdefault(x, []).append(len(self.cells))
            self.cells.append((addr.component, addr.position, x))

    def adjacent(self, g: int) -> bool:
        return g + 1 < len(self.cells) and self.cells[g][0] == self.cells[g + 1][0]

    def addr(self, g: int) -> OccurrenceAddress:
        c, pos, _ = self.cells[g]
        return OccurrenceAddress(c, pos)

    def letter(self, g: int) -> str:
        return self.cells[g][2]

    def index(self, a: OccurrenceAddress) -> int:
        comps = self.p.components
        if not (1 <= a.component <= len(comps) and 1 <= a.position <= len(comps[a.component - 1])):
            raise MoveError(f"address {a.component}.{a.position} is outside the phrase")
        return sum(len(c) for c in comps[: a.component - 1]) + a.position - 1

    def other(self, g: int) -> int:
        a, b = self.occ[self.letter(g)]
        return b if a == g else a


def _slots(p: Nanophrase) -> list[tuple[int, int]]:
    return [(c, o) for c, comp in enumerate(p.components, 1) for o in range(len(comp) + 1)]


def phrase_hash(p: Nanophrase) -> str:
    return hashlib.sha256(render_nanophrase(p).encode()).hexdigest()[:16]


def fresh_names(p: Nanophrase, k: int, start: int | None = None) -> list[str]:
    if start is None:
        start = next_fresh_index(p)
    return [f"{FRESH_PREFIX}{start + j}" for j in range(k)]


def next_fresh_index(p: Nanophrase) -> int:
    top = 0
    for x in p.projection:
        m = _FRESH_RE.match(x)
        if m:
            top = max(top, int(m.group(1)))
    return top + 1


# ---------------------------------------------------------------------------
# H3 matching


def _h3_units(direction: str, erased: int | None):
    units = _H3_UNITS[direction]
    if erased is None:
        return units
    return tuple(tuple(s for s in u if s != erased) for u in units)


def _h3_match(flat: _Flat, letters: Sequence[str | None], units) -> list[int] | None:
    """Global indices matched by ``units`` under the slot->letter assignment."""
    used = [x for x in letters if x is not None]
    if len(set(used)) != len(used):
        return None
    seen = [0, 0, 0]
    positions: list[list[int]] = []
    for unit in units:
        pos = []
        for s in unit:
            x = letters[s]
            if x is None or x not in flat.occ:
                return None
            pos.append(flat.occ[x][seen[s]])
            seen[s] += 1
        positions.append(pos)
    for pos in positions:
        if len(pos) == 2 and not (pos[1] == pos[0] + 1 and flat.adjacent(pos[0])):
            return None
    for a, b in zip(positions, positions[1:]):
        if max(a) >= min(b):
            return None
    return [g for pos in positions for g in pos]


def _h3_sites(flat: _Flat, h: HomotopyData, extended: bool) -> list[MoveSite]:
    p = flat.p
    triples = h.extended_triples if extended else h.plain_triples
    if not triples:
        return []
    erasures = (0, 1, 2) if extended else (None,)
    kind = H3EXT if extended else H3
    out: dict[tuple, MoveSite] = {}
    for direction in (FORWARD, BACKWARD):
        for erased in erasures:
            units = _h3_units(direction, erased)
            anchor = next(u for u in units if len(u) == 2)
            for g in range(len(flat.cells) - 1):
                if not flat.adjacent(g):
                    continue
                letters: list[str | None] = [None, None, None]
                letters[anchor[0]] = flat.letter(g)
                letters[anchor[1]] = flat.letter(g + 1)
                missing = [s for s in range(3) if s != erased and letters[s] is None]
                if missing:
                    # the third letter sits next to an occurrence of A or B
                    cands = set()
                    for s in anchor:
                        for gg in flat.occ[letters[s]]:
                            for nb in (gg - 1, gg + 1):
                                if 0 <= nb < len(flat.cells):
                                    cands.add(flat.letter(nb))
                    choices = sorted(cands)
                else:
                    choices = [None]
                for extra in choices:
                    trial = list(letters)
                    if missing:
                        trial[missing[0]] = extra
                    matched = _h3_match(flat, trial, units)
                    if matched is None:
                        continue
                    sym = tuple(EMPTY if s == erased else p.projection[trial[s]] for s in range(3))
                    if sym not in triples:
                        continue
                    key = (direction, erased, tuple(matched))
                    if key in out:
                        continue
                    out[key] = MoveSite(
                        kind, direction, tuple(flat.addr(x) for x in matched),
                        {"letters": tuple(trial), "erased": erased},
                    )
    return sorted(out.values(), key=_site_key)


def _site_key(site: MoveSite):
    return (site.kind, site.direction, tuple((a.component, a.position) for a in site.addresses), repr(site.params))


# ---------------------------------------------------------------------------
# enumeration


def enumerate_sites(p: Nanophrase, h: HomotopyData | None = None, kinds: Iterable[str] | None = None) -> list[MoveSite]:
    """All applicable sites of the requested kinds, in a stable order.

    Insertion kinds are returned as schemas with ``projection=None``; the
    caller fills in a projection (and optionally names) before applying.
    """
    h = h or builtin_virtual()
    kinds = ALL_KINDS if kinds is None else frozenset(kinds)
    unknown = kinds - ALL_KINDS
    if unknown:
        raise ValueError(f"unknown move kinds {sorted(unknown)}")
    flat = _Flat(p)
    out: list[MoveSite] = []
    n_cells = len(flat.cells)

    if H1_REMOVE in kinds:
        for g in range(n_cells - 1):
            if flat.adjacent(g) and flat.letter(g) == flat.letter(g + 1):
                out.append(MoveSite(H1_REMOVE, FORWARD, (flat.addr(g), flat.addr(g + 1))))

    if H2_REMOVE in kinds:
        for g in range(n_cells - 1):
            if not flat.adjacent(g):
                continue
            a, b = flat.letter(g), flat.letter(g + 1)
            if a == b or h.tau.get(p.projection[a]) != p.projection[b]:
                continue
            g3 = flat.other(g + 1)
            if g3 > g + 1 and flat.adjacent(g3) and flat.letter(g3 + 1) == a:
                out.append(MoveSite(H2_REMOVE, FORWARD, tuple(flat.addr(x) for x in (g, g + 1, g3, g3 + 1))))

    if H3 in kinds:
        out.extend(_h3_sites(flat, h, extended=False))
    if H3EXT in kinds:
        out.extend(_h3_sites(flat, h, extended=True))

    if SHIFT in kinds and h.allow_shift:
        for c in range(1, p.n + 1):
            out.append(MoveSite(SHIFT, FORWARD, (), {"component": c}))

    if SELF_CROSS in kinds and h.allow_self_crossing:
        seen = set()
        for g in range(n_cells):
            x = flat.letter(g)
            a, b = flat.occ[x]
            if x not in seen and flat.cells[a][0] == flat.cells[b][0]:
                seen.add(x)
                out.append(MoveSite(SELF_CROSS, FORWARD, (flat.addr(a), flat.addr(b)), {"letter": x}))

    if H1_INSERT in kinds:
        for c, o in _slots(p):
            out.append(MoveSite(H1_INSERT, FORWARD, (), {"slot": (c, o), "name": None, "projection": None}))

    if H2_INSERT in kinds:
        slots = _slots(p)
        for k, s1 in enumerate(slots):
            for s2 in slots[k:]:
                out.append(MoveSite(H2_INSERT, FORWARD, (), {
                    "slots": (s1, s2), "names": None, "projection": None}))
    return out


# ---------------------------------------------------------------------------
# application


def _insert(components: list[list[str]], slot: tuple[int, int], letters: Sequence[str]) -> None:
    c, o = slot
    if not (1 <= c <= len(components) and 0 <= o <= len(components[c - 1])):
        raise MoveError(f"slot {slot} is outside the phrase")
    components[c - 1][o:o] = list(letters)


def _check_fresh(p: Nanophrase, names: Sequence[str]) -> None:
    from .core import LETTER_RE

    if len(set(names)) != len(names):
        raise MoveError(f"fresh names {names} repeat")
    for x in names:
        if x in p.projection:
            raise MoveError(f"fresh name {x!r} collides with an existing letter")
        if not LETTER_RE.match(x):
            raise MoveError(f"{x!r} is not a valid letter name")


def apply_move(p: Nanophrase, site: MoveSite, h: HomotopyData | None = None) -> Nanophrase:
    """Rewrite ``p`` at ``site``; the site is re-validated against ``p`` first."""
    h = h or builtin_virtual()
    flat = _Flat(p)
    comps = [list(c) for c in p.components]
    proj = dict(p.projection)
    kind = site.kind
    idx = [flat.index(a) for a in site.addresses]

    if kind == H1_REMOVE:
        if len(idx) != 2 or idx[1] != idx[0] + 1 or not flat.adjacent(idx[0]) or flat.letter(idx[0]) != flat.letter(idx[1]):
            raise MoveError("stale H1 site: no adjacent repeated letter there")
        x = flat.letter(idx[0])
        c, pos, _ = flat.cells[idx[0]]
        del comps[c - 1][pos - 1: pos + 1]
        del proj[x]

    elif kind == H2_REMOVE:
        if len(idx) != 4:
            raise MoveError("H2 site needs four addresses")
        g1, g2, g3, g4 = idx
        a, b = flat.letter(g1), flat.letter(g2)
        ok = (g2 == g1 + 1 and g4 == g3 + 1 and g3 > g2 and flat.adjacent(g1) and flat.adjacent(g3)
              and a != b and flat.letter(g3) == b and flat.letter(g4) == a
              and h.tau.get(proj[a]) == proj[b])
        if not ok:
            raise MoveError("stale H2 site")
        for g in sorted(idx, reverse=True):
            c, pos, _ = flat.cells[g]
            del comps[c - 1][pos - 1]
        del proj[a], proj[b]

    elif kind in (H3, H3EXT):
        letters = list(site.param("letters") or ())
        erased = site.param("erased")
        if len(letters) != 3:
            raise MoveError("H3 site needs three letter slots")
        units = _h3_units(site.direction, erased)
        matched = _h3_match(flat, letters, units)
        if matched is None or matched != idx:
            raise MoveError("stale H3 site: pattern not present")
        if (erased is None) != (kind == H3):
            raise MoveError("H3 kind and erased slot disagree")
        sym = tuple(EMPTY if s == erased else proj[letters[s]] for s in range(3))
        if sym not in (h.plain_triples if kind == H3 else h.extended_triples):
            raise MoveError(f"triple {sym} is not licensed by the homotopy data")
        k = 0
        for unit in units:
            if len(unit) == 2:
                g = matched[k]
                c, pos, _ = flat.cells[g]
                comps[c - 1][pos - 1], comps[c - 1][pos] = comps[c - 1][pos], comps[c - 1][pos - 1]
            k += len(unit)

    elif kind == SHIFT:
        c = site.param("component")
        if not isinstance(c, int) or not 1 <= c <= p.n:
            raise MoveError(f"shift component {c!r} out of range")
        comp = comps[c - 1]
        if len(comp) > 1:
            head, rest = comp[0], comp[1:]
            if head in rest:
                proj[head] = h.nu[proj[head]]
            comps[c - 1] = rest + [head]

    elif kind == SELF_CROSS:
        x = site.param("letter")
        if x not in flat.occ:
            raise MoveError(f"stale self-crossing site: no letter {x!r}")
        a, b = flat.occ[x]
        if flat.cells[a][0] != flat.cells[b][0]:
            raise MoveError(f"letter {x!r} does not occur twice in one component")
        proj[x] = h.sigma[proj[x]]

    elif kind == H1_INSERT:
        sym = site.param("projection")
        if sym is None:
            raise MoveError("H1 insertion needs a projection")
        if sym not in h.alpha:
            raise MoveError(f"projection {sym!r} is not in alpha")
        name = site.param("name") or fresh_names(p, 1)[0]
        _check_fresh(p, [name])
        _insert(comps, tuple(site.param("slot")), [name, name])
        proj[name] = sym

    elif kind == H2_INSERT:
        sym = site.param("projection")
        if sym is None:
            raise MoveError("H2 insertion needs a projection")
        if sym not in h.alpha:
            raise MoveError(f"projection {sym!r} is not in alpha")
        names = site.param("names") or tuple(fresh_names(p, 2))
        a, b = names
        _check_fresh(p, [a, b])
        s1, s2 = (tuple(s) for s in site.param("slots"))
        if s1 > s2:
            raise MoveError("H2 insertion slots must be in phrase order")
        if s1 == s2:
            _insert(comps, s1, [a, b, b, a])
        else:
            _insert(comps, s2, [b, a])
            _insert(comps, s1, [a, b])
        proj[a] = sym
        proj[b] = h.tau[sym]

    else:
        raise MoveError(f"unknown move kind {kind!r}")

    return Nanophrase(proj, tuple(tuple(c) for c in comps))


def mirror_site(p_after: Nanophrase, site: MoveSite) -> MoveSite:
    """The H3/H3ext site that undoes ``site`` on the rewritten phrase."""
    if site.kind not in (H3, H3EXT):
        raise ValueError("only H3 sites have mirrors")
    direction = BACKWARD if site.direction == FORWARD else FORWARD
    flat = _Flat(p_after)
    letters = list(site.param("letters"))
    matched = _h3_match(flat, letters, _h3_units(direction, site.param("erased")))
    if matched is None:
        raise MoveError("mirror pattern not found")
    return MoveSite(site.kind, direction, tuple(flat.addr(g) for g in matched), site.params)


# ---------------------------------------------------------------------------
# random walks


@dataclass
class TraceStep:
    site: MoveSite
    result_hash: str

    def to_json(self) -> dict:
        out = self.site.to_json()
        out["result_hash"] = self.result_hash
        return out


@dataclass
class WalkTrace:
    seed: int
    variant: str
    start_hash: str = ""
    steps: list[TraceStep] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant,
            "start_hash": self.start_hash,
            "steps": [s.to_json() for s in self.steps],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "WalkTrace":
        if isinstance(obj, str):
            obj = json.loads(obj)
        steps = [TraceStep(MoveSite.from_json(s), s["result_hash"]) for s in obj["steps"]]
        return cls(obj["seed"], obj["variant"], obj.get("start_hash", ""), steps)


def variant_kinds(variant: str) -> frozenset:
    try:
        return VARIANT_KINDS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(VARIANT_KINDS)}") from None


class Walker:
    """Stateful random walk; one RNG per walker, never shared."""

    def __init__(self, p: Nanophrase, h: HomotopyData, variant: str, seed: int,
                 max_letters: int = 12, insert_prob: float = 0.3):
        self.phrase = p
        self.h = h
        self.variant = variant
        self.kinds = variant_kinds(variant)
        self.rng = random.Random(seed)
        self.max_letters = max_letters
        self.insert_prob = insert_prob
        self.counter = next_fresh_index(p)
        self.trace = WalkTrace(seed, variant, phrase_hash(p))
        self._alpha = sorted(h.alpha)

    def _insertion(self, kind: str) -> MoveSite:
        p = self.phrase
        schemas = enumerate_sites(p, self.h, {kind})
        site = schemas[self.rng.randrange(len(schemas))]
        sym = self._alpha[self.rng.randrange(len(self._alpha))]
        if kind == H1_INSERT:
            names = fresh_names(p, 1, self.counter)
            self.counter += 1
            return site.with_params(projection=sym, name=names[0])
        names = fresh_names(p, 2, self.counter)
        self.counter += 2
        return site.with_params(projection=sym, names=tuple(names))

    def choose(self) -> MoveSite | None:
        p = self.phrase
        room = self.max_letters - len(p.projection)
        growers = [k for k in sorted(self.kinds & INSERT_KINDS) if room >= (1 if k == H1_INSERT else 2)]
        sites = enumerate_sites(p, self.h, self.kinds - INSERT_KINDS)
        if growers and (not sites or self.rng.random() < self.insert_prob):
            return self._insertion(growers[self.rng.randrange(len(growers))])
        if sites:
            return sites[self.rng.randrange(len(sites))]
        return None

    def step(self) -> tuple[Nanophrase, MoveSite]:
        before = self.phrase
        site = self.choose()
        if site is None:
            site = MoveSite(NOOP)
        else:
            self.phrase = apply_move(before, site, self.h)
        self.trace.steps.append(TraceStep(site, phrase_hash(self.phrase)))
        return before, site


def random_walk(p: Nanophrase, h: HomotopyData, variant: str, steps: int, seed: int,
                max_letters: int = 12, insert_prob: float = 0.3) -> tuple[Nanophrase, WalkTrace]:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    w = Walker(p, h, variant, seed, max_letters, insert_prob)
    for _ in range(steps):
        w.step()
    return w.phrase, w.trace


def replay(p: Nanophrase, h: HomotopyData, trace: WalkTrace) -> list[Nanophrase]:
    """Re-apply a trace; returns every intermediate phrase (start included).

    Raises :class:`MoveError` at the first step whose hash does not match.
    """
    if trace.start_hash and phrase_hash(p) != trace.start_hash:
        raise MoveError("start phrase does not match the trace")
    out = [p]
    for k, st in enumerate(trace.steps):
        if st.site.kind != NOOP:
            p = apply_move(p, st.site, h)
        if phrase_hash(p) != st.result_hash:
            raise MoveError(f"hash mismatch at step {k}")
        out.append(p)
    return out
