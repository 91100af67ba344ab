"""Named example phrases.

Fixed examples ship as text files under ``data/``; the two infinite
families (``torus:n`` and ``vlink:n``) are generated.
"""

from __future__ import annotations

from importlib import resources

from .core import Nanophrase, check, parse_nanophrase, render_nanophrase

STATIC = ("ex32", "borromean", "ex4", "ex5")
FAMILIES = ("torus", "vlink")


def names() -> list[str]:
    return list(STATIC) + [f"{f}:n" for f in FAMILIES]


def torus(n: int) -> Nanophrase:
    """``A_1 B_1 ... A_n B_n | A_1 B_1 ... A_n B_n`` with A_j -> b+, B_j -> a+."""
    if n < 1:
        raise ValueError("torus family needs n >= 1")
    word = [x for j in range(1, n + 1) for x in (f"A_{j}", f"B_{j}")]
    proj = {f"A_{j}": "b+" for j in range(1, n + 1)} | {f"B_{j}": "a+" for j in range(1, n + 1)}
    return check(Nanophrase(proj, (tuple(word), tuple(word))))


def vlink(n: int) -> Nanophrase:
    """``A_1 ... A_n | A_1 ... A_n`` with every letter -> b+."""
    if n < 1:
        raise ValueError("vlink family needs n >= 1")
    word = tuple(f"A_{j}" for j in range(1, n + 1))
    return check(Nanophrase({x: "b+" for x in word}, (word, word)))


def text(name: str) -> str:
    if name in STATIC:
        return resources.files("nanophrase").joinpath("data").joinpath(f"{name}.txt").read_text()
    return render_nanophrase(load(name)) + "\n"


def load(name: str) -> Nanophrase:
    if name in STATIC:
        return parse_nanophrase(text(name))
    family, sep, arg = name.partition(":")
    if family in FAMILIES and sep:
        try:
            n = int(arg)
        except ValueError:
            raise KeyError(f"bad family parameter in {name!r}") from None
        return torus(n) if family == "torus" else vlink(n)
    raise KeyError(f"unknown example {name!r}; known: {', '.join(names())}")
