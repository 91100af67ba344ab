import json
import random
from itertools import product

import pytest

from nanophrase.core import render_homotopy_data, HomotopyData
from nanophrase.fuzz import (
    Profile, compare, derive_seed, plant_h3, profile, random_phrase, replay_bundle, run_campaign, run_trial,
)
from nanophrase.homotopy import builtin_virtual
from nanophrase.invariants import IndexSequence
from nanophrase.moves import H1_INSERT, H3, SHIFT, enumerate_sites

V = builtin_virtual()


def test_derive_seed_stable_and_spread():
    assert derive_seed(7, "M", 0) == derive_seed(7, "M", 0)
    assert len({derive_seed(7, "M", t) for t in range(50)}) == 50
    assert derive_seed(7, "M", 0) != derive_seed(7, "open_M", 0)


def test_random_phrase_is_valid():
    rng = random.Random(1)
    for _ in range(50):
        p = random_phrase(rng, 6, 3, 2)
        assert 2 <= p.n <= 3 and len(p.projection) <= 6


def test_plant_creates_site():
    rng = random.Random(4)
    for _ in range(30):
        p = plant_h3(rng, random_phrase(rng, 4, 3), V)
        assert enumerate_sites(p, V, {H3})


@pytest.mark.parametrize("variant", ["open_M", "M", "welded_M"])
def test_small_campaign_clean(variant):
    r = run_campaign(15, 15, variant, seed=3)
    assert r.ok, r.failures
    assert r.checks > 0
    assert r.summary()["failures"] == 0


def test_workers_do_not_change_results():
    a = run_campaign(6, 10, "M", seed=11, workers=1).summary()
    b = run_campaign(6, 10, "M", seed=11, workers=2).summary()
    assert a == b


def test_compare_rules_per_kind():
    s = IndexSequence.of(2, 3, 1)
    before = Profile(3, None, {s: 1}, {s: 2}, 0)
    shifted = Profile(3, None, {s: 3}, {s: 2}, 0)
    assert compare(before, shifted, SHIFT) == []
    assert compare(before, shifted, H3) == ["mu(2,3,1) 1 -> 3"]
    off = Profile(3, None, {s: 2}, {s: 2}, 0)
    assert compare(before, off, SHIFT) == ["mubar(2,3,1) 1 mod 2 -> 2 mod 2"]
    rep = Profile(3, None, {s: 1}, {s: 2}, 5)
    assert compare(before, rep, SHIFT) == [] and compare(before, rep, H1_INSERT)
    assert compare(before, Profile(2, None, {}, {}, 0), H3) == ["component count 3 -> 2"]


def _all_triples_data(tmp_path):
    alpha = sorted(V.alpha)
    loose = HomotopyData(V.alpha, V.tau, V.nu, V.sigma, frozenset(product(alpha, repeat=3)), name="loose")
    path = tmp_path / "loose.txt"
    path.write_text(render_homotopy_data(loose))
    return str(path)


def test_illegal_moves_are_caught_and_replayable(tmp_path):
    data = _all_triples_data(tmp_path)
    out = tmp_path / "bundles"
    r = run_campaign(40, 20, "open_M", seed=5, data=data, out_dir=out)
    assert not r.ok
    files = sorted(out.glob("counterexample-*.json"))
    assert len(files) == len(r.failures)
    b = json.loads(files[0].read_text())
    assert b["failure"]["site"]["kind"] in ("H3",)
    assert replay_bundle(b) == b["failure"]


def test_trial_is_deterministic():
    a = run_trial(3, 99, "welded_M", 12)
    b = run_trial(3, 99, "welded_M", 12)
    assert a.trace.to_json() == b.trace.to_json() and a.start == b.start


def test_repeated_sequence_tracked():
    r = run_trial(0, 1, "M", 5)
    assert r.failure is None
    p = r.start
    prof = profile(p, V, 2, IndexSequence.of(1, 1))
    assert prof.repeated is not None
