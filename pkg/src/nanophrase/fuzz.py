"""Randomized move-invariance campaigns.

A trial draws a start phrase, runs a seeded walk, and after every step
compares the invariants of the phrase before and after the move.  Which
invariants must survive depends on the move kind:

* every move: component count, linking matrix, Delta and mu-bar for
  pairwise-distinct index sequences;
* every move except Shift: exact mu for pairwise-distinct sequences;
* H1, H2 and self-crossing: exact mu for one repeated-index sequence
  chosen per trial.

Failures are returned together with enough state to replay them.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .core import EMPTY, HomotopyData, Nanophrase, parse_homotopy_data, phrase_to_json, render_nanophrase
from .homotopy import VIRTUAL_ALPHA, builtin, linking_matrix
from .invariants import IndexSequence, Invariants, distinct_sequences
from .moves import (
    H1_INSERT, H1_REMOVE, H2_INSERT, H2_REMOVE, H3, H3EXT, NOOP, SELF_CROSS,
    Walker, WalkTrace,
)

EXACT_MU_KINDS = frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, H3, H3EXT, SELF_CROSS})
REPEATED_MU_KINDS = frozenset({H1_REMOVE, H1_INSERT, H2_REMOVE, H2_INSERT, SELF_CROSS})

DEFAULT_DATA = {"open_M": "virtual", "M": "virtual", "welded_M": "welded"}


def resolve_data(data: str | HomotopyData | None, variant: str) -> HomotopyData:
    """A built-in name, a path to a data file, or a ready object."""
    if isinstance(data, HomotopyData):
        return data
    data = data or DEFAULT_DATA[variant]
    if data in ("virtual", "welded"):
        return builtin(data)
    return _load_data_file(str(Path(data).resolve()))


@lru_cache(maxsize=None)
def _load_data_file(path: str) -> HomotopyData:
    return parse_homotopy_data(Path(path).read_text())


def derive_seed(master: int, *path) -> int:
    digest = hashlib.sha256(":".join(str(x) for x in (master,) + path).encode()).hexdigest()
    return int(digest[:16], 16)


def random_phrase(rng: random.Random, max_letters: int = 8, max_components: int = 4,
                  min_components: int = 1, alpha=None, prefix: str = "L") -> Nanophrase:
    """Uniform-ish random Gauss phrase with random projections."""
    alpha = sorted(alpha or VIRTUAL_ALPHA)
    n = rng.randint(min_components, max_components)
    k = rng.randint(0, max_letters)
    names = [f"{prefix}{j}" for j in range(1, k + 1)]
    cells = names + names
    rng.shuffle(cells)
    cuts = sorted(rng.randint(0, len(cells)) for _ in range(n - 1))
    comps, last = [], 0
    for c in cuts + [len(cells)]:
        comps.append(tuple(cells[last:c]))
        last = c
    return Nanophrase({x: alpha[rng.randrange(len(alpha))] for x in names}, tuple(comps))


def plant_h3(rng: random.Random, p: Nanophrase, h: HomotopyData, extended: bool = False,
             prefix: str = "P") -> Nanophrase:
    """Insert a fresh H3 (or extended H3) pattern at random ordered slots."""
    triples = sorted(h.extended_triples if extended else h.plain_triples, key=lambda t: tuple(map(str, t)))
    if not triples:
        return p
    t = triples[rng.randrange(len(triples))]
    names = [f"{prefix}{j}" for j in range(1, 4)]
    while any(x in p.projection for x in names):
        prefix += "x"
        names = [f"{prefix}{j}" for j in range(1, 4)]
    units = [(0, 1), (0, 2), (1, 2)]
    if rng.random() < 0.5:
        units = [(1, 0), (2, 0), (2, 1)]
    pieces = [[names[s] for s in u if t[s] is not EMPTY] for u in units]
    slots = [(c, o) for c, comp in enumerate(p.components, 1) for o in range(len(comp) + 1)]
    if not slots:
        return p
    chosen = sorted(rng.choice(slots) for _ in range(3))
    comps = [list(c) for c in p.components]
    # insert right to left so earlier offsets stay valid; at a shared slot the
    # later piece goes in first so the pieces end up in unit order
    for (c, o), _, piece in sorted(zip(chosen, range(3), pieces), key=lambda z: z[:2], reverse=True):
        comps[c - 1][o:o] = piece
    proj = dict(p.projection)
    for s, x in enumerate(names):
        if t[s] is not EMPTY:
            proj[x] = t[s]
    return Nanophrase(proj, tuple(tuple(c) for c in comps))


@dataclass
class Profile:
    n: int
    linking: object
    mu: dict
    delta: dict
    repeated: int | None


def profile(p: Nanophrase, h: HomotopyData, max_seq_len: int, repeated: IndexSequence | None) -> Profile:
    inv = Invariants(p)
    mus, deltas = {}, {}
    for s in distinct_sequences(p.n, max_seq_len):
        mus[s] = inv.mu(s)
        deltas[s] = inv.delta(s)
    rep = inv.mu(repeated) if repeated is not None else None
    return Profile(p.n, linking_matrix(p, h), mus, deltas, rep)


def compare(before: Profile, after: Profile, kind: str) -> list[str]:
    bad = []
    if before.n != after.n:
        bad.append(f"component count {before.n} -> {after.n}")
        return bad
    if before.linking != after.linking:
        bad.append("linking matrix changed")
    for s, d in before.delta.items():
        if after.delta[s] != d:
            bad.append(f"Delta{s} {d} -> {after.delta[s]}")
            continue
        shift = before.mu[s] - after.mu[s]
        if (shift % d) if d else shift:
            bad.append(f"mubar{s} {before.mu[s]} mod {d} -> {after.mu[s]} mod {d}")
    if kind in EXACT_MU_KINDS:
        for s, m in before.mu.items():
            if after.mu[s] != m:
                bad.append(f"mu{s} {m} -> {after.mu[s]}")
    if kind in REPEATED_MU_KINDS and before.repeated != after.repeated:
        bad.append(f"repeated-index mu {before.repeated} -> {after.repeated}")
    return bad


def repeated_sequence(rng: random.Random, n: int, max_len: int) -> IndexSequence:
    length = rng.randint(2, max(2, max_len))
    idx = [rng.randint(1, n) for _ in range(length)]
    if len(set(idx)) == len(idx):
        idx[rng.randrange(length - 1)] = idx[-1]
    return IndexSequence(tuple(idx[:-1]), idx[-1])


@dataclass
class TrialResult:
    trial: int
    seed: int
    start: Nanophrase
    trace: WalkTrace
    kinds: Counter
    checks: int
    failure: dict | None = None


def run_trial(trial: int, master_seed: int, variant: str, steps: int, data: str | HomotopyData | None = None,
              max_seq_len: int = 3, max_letters: int = 8, max_components: int = 4,
              walk_max_letters: int = 12, plant_prob: float = 0.5) -> TrialResult:
    h = resolve_data(data, variant)
    seed = derive_seed(master_seed, variant, trial)
    rng = random.Random(seed)
    start = random_phrase(rng, max_letters, max_components)
    if rng.random() < plant_prob:
        start = plant_h3(rng, start, h, extended=bool(h.extended_triples) and rng.random() < 0.5)
    rep = repeated_sequence(rng, start.n, max_seq_len)
    walker = Walker(start, h, variant, derive_seed(seed, "walk"), max_letters=max(walk_max_letters, len(start.projection)))
    kinds: Counter = Counter()
    checks = 0
    prof = profile(start, h, max_seq_len, rep)
    for k in range(steps):
        before, site = walker.step()
        kinds[site.kind] += 1
        if site.kind == NOOP:
            continue
        after = walker.phrase
        new = profile(after, h, max_seq_len, rep)
        bad = compare(prof, new, site.kind)
        checks += 1
        if bad:
            failure = {
                "step": k,
                "site": site.to_json(),
                "before": render_nanophrase(before),
                "after": render_nanophrase(after),
                "violations": bad,
                "repeated_sequence": list(rep.as_tuple()),
            }
            return TrialResult(trial, seed, start, walker.trace, kinds, checks, failure)
        prof = new
    return TrialResult(trial, seed, start, walker.trace, kinds, checks)


def _run_trial_star(args):
    return run_trial(*args[0], **args[1])


@dataclass
class CampaignResult:
    variant: str
    seed: int
    trials: int
    steps: int
    checks: int = 0
    kinds: Counter = field(default_factory=Counter)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "seed": self.seed,
            "trials": self.trials,
            "steps": self.steps,
            "checks": self.checks,
            "moves": dict(sorted(self.kinds.items())),
            "failures": len(self.failures),
        }


def bundle(result: TrialResult, variant: str, master_seed: int, data_name: str, trial_params: dict) -> dict:
    return {
        "variant": variant,
        "data": data_name,
        "master_seed": master_seed,
        "trial": result.trial,
        "trial_seed": result.seed,
        "steps": len(result.trace.steps),
        "trial_params": trial_params,
        "start": phrase_to_json(result.start),
        "start_text": render_nanophrase(result.start),
        "trace": result.trace.to_json(),
        "failure": result.failure,
    }


def run_campaign(trials: int, steps: int, variant: str, seed: int, max_seq_len: int = 3,
                 workers: int = 1, out_dir: str | Path | None = None, data: str | None = None,
                 **trial_kw) -> CampaignResult:
    data_name = data or DEFAULT_DATA[variant]
    jobs = [((t, seed, variant, steps, data_name), dict(max_seq_len=max_seq_len, **trial_kw)) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_trial_star, jobs))
    else:
        results = [_run_trial_star(j) for j in jobs]
    out = CampaignResult(variant, seed, trials, steps)
    for r in results:
        out.checks += r.checks
        out.kinds.update(r.kinds)
        if r.failure:
            b = bundle(r, variant, seed, data_name, jobs[r.trial][1])
            out.failures.append(b)
            if out_dir is not None:
                path = Path(out_dir)
                path.mkdir(parents=True, exist_ok=True)
                (path / f"counterexample-{variant}-{seed}-{r.trial}.json").write_text(json.dumps(b, indent=2))
    return out


def replay_bundle(b: dict) -> dict:
    """Re-run a persisted counterexample; returns the recomputed failure (or None)."""
    r = run_trial(b["trial"], b["master_seed"], b["variant"], b["steps"], b["data"], **b.get("trial_params", {}))
    return r.failure
