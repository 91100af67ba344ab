"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (bad phrase, index out of
range, stale site, invariance violation), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixtures
from .core import (
    HomotopyData, InvalidPhrase, ParseError, parse_homotopy_data, parse_nanophrase,
    phrase_to_json, render_nanophrase, validate,
)
from .forest import build_forest
from .homotopy import builtin, linking_matrix
from .invariants import IndexSequence, Invariants, StabilizationError
from .magnus import PhraseData, SeriesCalculator, eta_word, rho_expand
from .moves import ALL_KINDS, INSERT_KINDS, MoveError, MoveSite, apply_move, enumerate_sites, random_walk, VARIANT_KINDS


class DomainError(Exception):
    pass


def load_data(name: str | None, default: str = "virtual") -> HomotopyData:
    name = name or default
    if name in ("virtual", "welded"):
        return builtin(name)
    path = Path(name)
    if not path.exists():
        raise DomainError(f"homotopy data {name!r} is neither built-in nor a file")
    return parse_homotopy_data(path.read_text())


def load_phrase(source: str, h: HomotopyData):
    if source.startswith("examples:"):
        try:
            text = fixtures.text(source[len("examples:"):])
        except KeyError as exc:
            raise DomainError(str(exc.args[0])) from None
    elif source == "-":
        text = sys.stdin.read()
    else:
        path = Path(source)
        if not path.exists():
            raise DomainError(f"no such phrase file: {source}")
        text = path.read_text()
    return parse_nanophrase(text, h)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _parse_indices(raw: str) -> IndexSequence:
    try:
        vals = [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"indices must be comma-separated integers, got {raw!r}") from None
    if len(vals) < 2:
        raise argparse.ArgumentTypeError("need at least two indices (the last one is the target)")
    return IndexSequence.of(*vals)


# ---------------------------------------------------------------------------
# commands


def cmd_compute(args) -> int:
    h = load_data(args.data)
    p = load_phrase(args.phrase, h)
    s: IndexSequence = args.indices
    if not s.distinct:
        print("warning: indices repeat; mu-bar is not claimed to be an invariant for such sequences", file=sys.stderr)
    inv = Invariants(p, extra_stages=args.extra_stages, start=args.q)
    try:
        rep = inv.report(s)
    except IndexError as exc:
        raise DomainError(str(exc)) from None
    mb = rep["mubar"]
    _emit(args, rep, f"mu={rep['mu']} delta={rep['delta']} mubar={mb['value']} (mod {mb['modulus']}) q_used={rep['q_used']}")
    return 0


def cmd_expand(args) -> int:
    h = load_data(args.data)
    p = load_phrase(args.phrase, h)
    data = PhraseData(p)
    if not 1 <= args.component <= p.n:
        raise DomainError(f"component {args.component} out of range 1..{p.n}")
    if args.q < 2:
        raise DomainError("q must be >= 2")
    signed = data.signed[args.component - 1]
    word = rho_expand(data, args.component, args.q)
    image = eta_word(data, word)
    degree = args.degree if args.degree is not None else args.q - 1
    series = SeriesCalculator(data, degree).component(args.component, args.q)
    payload = {
        "component": args.component,
        "q": args.q,
        "signed": str(signed),
        "rho": str(word),
        "eta": str(image),
        "degree": degree,
        "series": [{"monomial": list(m), "coefficient": c} for m, c in series.items()],
    }
    lines = [f"w^eps: {signed}", f"rho^{args.q}: {word}", f"eta: {image}", f"series (degree <= {degree}):"]
    lines += [f"  {line}" for line in series.lines()]
    if args.forest:
        forest = build_forest(data, args.component, args.q)
        payload["forest"] = forest.dump()
        lines += ["forest:"] + [f"  {line}" for line in forest.dump().splitlines()]
    _emit(args, payload, "\n".join(lines))
    return 0


def _moves_data(args) -> HomotopyData:
    default = "welded" if getattr(args, "variant", None) == "welded_M" else "virtual"
    return load_data(args.data, default)


def cmd_moves_list(args) -> int:
    h = _moves_data(args)
    p = load_phrase(args.phrase, h)
    kinds = set(args.kinds.split(",")) if args.kinds else ALL_KINDS - (INSERT_KINDS if not args.with_inserts else set())
    bad = set(kinds) - ALL_KINDS
    if bad:
        raise DomainError(f"unknown move kinds: {sorted(bad)}")
    sites = enumerate_sites(p, h, kinds)
    payload = {"sites": [dict(id=k, **s.to_json()) for k, s in enumerate(sites)]}
    text = "\n".join(f"{k}: {s.describe()}" for k, s in enumerate(sites)) or "(no sites)"
    _emit(args, payload, text)
    return 0


def cmd_moves_apply(args) -> int:
    h = _moves_data(args)
    p = load_phrase(args.phrase, h)
    kinds = set(args.kinds.split(",")) if args.kinds else ALL_KINDS - (INSERT_KINDS if not args.with_inserts else set())
    sites = enumerate_sites(p, h, kinds)
    if args.site_json:
        site = MoveSite.from_json(json.loads(args.site_json))
    else:
        if args.site is None:
            raise DomainError("give --site ID or --site-json")
        if not 0 <= args.site < len(sites):
            raise DomainError(f"stale site id {args.site}; {len(sites)} sites available")
        site = sites[args.site]
    if site.kind in INSERT_KINDS:
        updates = {}
        if args.projection:
            updates["projection"] = args.projection
        if args.names:
            names = args.names.split(",")
            if site.kind == "H1_insert":
                updates["name"] = names[0]
            else:
                updates["names"] = tuple(names)
        site = site.with_params(**updates)
    q = apply_move(p, site, h)
    _emit(args, {"site": site.to_json(), "phrase": phrase_to_json(q), "text": render_nanophrase(q)}, render_nanophrase(q))
    return 0


def cmd_moves_walk(args) -> int:
    h = _moves_data(args)
    p = load_phrase(args.phrase, h)
    q, trace = random_walk(p, h, args.variant, args.steps, args.seed, max_letters=args.max_letters)
    if args.trace_out:
        Path(args.trace_out).write_text(trace.dumps())
    lines = [f"{k}: {st.site.describe()} -> {st.result_hash}" for k, st in enumerate(trace.steps)]
    lines.append(render_nanophrase(q))
    _emit(args, {"trace": trace.to_json(), "phrase": phrase_to_json(q), "text": render_nanophrase(q)}, "\n".join(lines))
    return 0


def cmd_fuzz(args) -> int:
    from .fuzz import replay_bundle, run_campaign

    if args.replay:
        b = json.loads(Path(args.replay).read_text())
        failure = replay_bundle(b)
        _emit(args, {"reproduced": failure is not None, "failure": failure},
              "reproduced: " + json.dumps(failure, indent=2) if failure else "not reproduced")
        return 1 if failure else 0
    result = run_campaign(
        args.trials, args.steps, args.variant, args.seed, max_seq_len=args.max_seq_len,
        workers=args.workers, out_dir=args.out, data=args.data,
    )
    summary = result.summary()
    text = json.dumps(summary)
    if result.failures:
        text += "\n" + "\n".join(json.dumps(f["failure"]) for f in result.failures)
    _emit(args, dict(summary, counterexamples=result.failures), text)
    return 0 if result.ok else 1


def cmd_examples(args) -> int:
    if args.name is None:
        print("\n".join(fixtures.names()))
        return 0
    try:
        text = fixtures.text(args.name)
    except KeyError as exc:
        raise DomainError(str(exc.args[0])) from None
    if args.json:
        print(json.dumps(phrase_to_json(parse_nanophrase(text)), indent=2))
    else:
        print(text, end="" if text.endswith("\n") else "\n")
    return 0


def cmd_validate(args) -> int:
    h = load_data(args.data)
    source = args.phrase
    if source.startswith("examples:") or source == "-":
        p = load_phrase(source, h)
        violations = []
    else:
        path = Path(source)
        if not path.exists():
            raise DomainError(f"no such phrase file: {source}")
        try:
            p = parse_nanophrase(path.read_text(), None)
        except InvalidPhrase as exc:
            p, violations = None, exc.violations
        else:
            violations = validate(p, h)
    msgs = [str(v) for v in violations]
    payload = {"valid": not msgs, "violations": msgs}
    if p is not None and not msgs:
        payload["linking_matrix"] = linking_matrix(p, h).to_json()
    _emit(args, payload, "ok" if not msgs else "\n".join(msgs))
    return 0 if not msgs else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--data", default=argparse.SUPPRESS, help="virtual, welded, or a homotopy data file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")

    parser = argparse.ArgumentParser(prog="nanophrase", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="mu, Delta and mu-bar for an index sequence")
    p.add_argument("phrase", help="phrase file, '-' for stdin, or examples:<name>")
    p.add_argument("--indices", required=True, type=_parse_indices, help="c_1,...,c_u,i (last is the target)")
    p.add_argument("--q", type=int, default=None, help="first expansion stage to try (default u+1)")
    p.add_argument("--extra-stages", type=int, default=3, help="stages tried beyond u+1 before giving up")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("expand", parents=[common], help="print the expansion word, its eta image and series")
    p.add_argument("phrase")
    p.add_argument("-i", "--component", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--degree", type=int, default=None, help="series truncation degree (default q-1)")
    p.add_argument("--forest", action="store_true", help="also dump the recursion forest")
    p.set_defaults(func=cmd_expand)

    moves = sub.add_parser("moves", parents=[common], help="list, apply, or walk rewriting moves")
    msub = moves.add_subparsers(dest="moves_command", required=True)
    for name, func in (("list", cmd_moves_list), ("apply", cmd_moves_apply)):
        m = msub.add_parser(name, parents=[common])
        m.add_argument("phrase")
        m.add_argument("--kinds", help="comma-separated move kinds (default: all non-insertion kinds)")
        m.add_argument("--with-inserts", action="store_true", help="include insertion schemas")
        m.set_defaults(func=func)
        if name == "apply":
            m.add_argument("--site", type=int, help="site id from 'moves list' with the same --kinds")
            m.add_argument("--site-json", help="explicit site as JSON")
            m.add_argument("--projection", help="projection for insertion moves")
            m.add_argument("--names", help="comma-separated fresh letter names for insertion moves")
    m = msub.add_parser("walk", parents=[common])
    m.add_argument("phrase")
    m.add_argument("--steps", type=int, default=20)
    m.add_argument("--variant", choices=sorted(VARIANT_KINDS), default="M")
    m.add_argument("--max-letters", type=int, default=12)
    m.add_argument("--trace-out", help="write the walk trace JSON here")
    m.set_defaults(func=cmd_moves_walk)

    p = sub.add_parser("fuzz", parents=[common], help="randomized move-invariance campaign")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--variant", choices=sorted(VARIANT_KINDS), default="M")
    p.add_argument("--max-seq-len", type=int, default=3, help="longest index sequence checked")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="fuzz-counterexamples", help="directory for counterexample bundles")
    p.add_argument("--replay", help="re-run a saved counterexample bundle")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("examples", parents=[common], help="print a named example phrase")
    p.add_argument("name", nargs="?", help="ex32, borromean, ex4, ex5, torus:n, vlink:n")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("validate", parents=[common], help="check a phrase file")
    p.add_argument("phrase")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, default in (("json", False), ("data", None), ("seed", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        return args.func(args)
    except (DomainError, ParseError, InvalidPhrase, MoveError, StabilizationError, ValueError, IndexError, KeyError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        if args.json:
            print(json.dumps({"error": msg, "type": type(exc).__name__}))
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
