import random

import pytest
from hypothesis import given, strategies as st

from nanophrase import fixtures
from nanophrase.core import OccurrenceAddress, parse_nanophrase, validate
from nanophrase.fuzz import plant_h3, random_phrase
from nanophrase.homotopy import builtin_virtual, builtin_welded
from nanophrase.moves import (
    H1_INSERT, H1_REMOVE, H2_INSERT, H2_REMOVE, H3, H3EXT, SELF_CROSS, SHIFT, MoveError, MoveSite,
    WalkTrace, apply_move, enumerate_sites, fresh_names, mirror_site, phrase_hash, random_walk, replay,
)

from conftest import phrases

V, W = builtin_virtual(), builtin_welded()


def P(text):
    return parse_nanophrase(text, V)


def test_h1_remove():
    p = P("letters: A:a+ B:b+\nphrase: BAAB")
    (site,) = enumerate_sites(p, V, {H1_REMOVE})
    assert site.addresses == (OccurrenceAddress(1, 2), OccurrenceAddress(1, 3))
    assert apply_move(p, site, V) == P("letters: B:b+\nphrase: BB")


def test_h1_needs_same_component():
    p = P("letters: A:a+\nphrase: A|A")
    assert enumerate_sites(p, V, {H1_REMOVE}) == []


def test_h2_remove_respects_tau():
    good = P("letters: A:a+ B:b-\nphrase: AB|BA")
    bad = P("letters: A:a+ B:b+\nphrase: AB|BA")
    (site,) = enumerate_sites(good, V, {H2_REMOVE})
    q = apply_move(good, site, V)
    assert q.components == ((), ()) and not q.projection
    assert enumerate_sites(bad, V, {H2_REMOVE}) == []


def test_h3_forward_and_mirror():
    p = P("letters: A:a+ B:a+ C:a+\nphrase: AB|AC|BC")
    sites = enumerate_sites(p, V, {H3})
    assert len(sites) == 1
    q = apply_move(p, sites[0], V)
    assert q.components == (("B", "A"), ("C", "A"), ("C", "B"))
    back = mirror_site(q, sites[0])
    assert apply_move(q, back, V) == p


def test_h3_rejects_unlicensed_triple():
    p = P("letters: A:a+ B:a- C:a+\nphrase: AB|AC|BC")
    assert enumerate_sites(p, V, {H3}) == []


def test_h3ext_only_in_welded():
    p = plant_h3(random.Random(3), P("letters:\nphrase: ."), W, extended=True)
    assert enumerate_sites(p, W, {H3EXT})
    assert enumerate_sites(p, V, {H3EXT}) == []


def test_shift_applies_nu_to_self_letters():
    p = P("letters: A:a+ B:b+\nphrase: ABA|B")
    q = apply_move(p, MoveSite(SHIFT, params={"component": 1}), V)
    assert q.components == (("B", "A", "A"), ("B",))
    assert q.projection == {"A": "b+", "B": "b+"}


def test_self_crossing_applies_sigma():
    p = P("letters: A:a+\nphrase: AA")
    (site,) = enumerate_sites(p, V, {SELF_CROSS})
    assert apply_move(p, site, V).projection["A"] == "a-"


def test_insert_schemas_need_projection():
    p = P("letters:\nphrase: .")
    (schema,) = enumerate_sites(p, V, {H1_INSERT})
    with pytest.raises(MoveError):
        apply_move(p, schema, V)
    q = apply_move(p, schema.with_params(projection="b-"), V)
    assert q.components == (("n_1", "n_1"),) and q.projection == {"n_1": "b-"}


def test_h2_insert_names_and_tau():
    p = P("letters:\nphrase: . | .")
    site = MoveSite(H2_INSERT, params={"slots": ((1, 0), (2, 0)), "names": ("X", "Y"), "projection": "a+"})
    q = apply_move(p, site, V)
    assert q.components == (("X", "Y"), ("Y", "X"))
    assert q.projection == {"X": "a+", "Y": "b-"}


def test_fresh_name_collision():
    p = P("letters: X:a+\nphrase: XX")
    site = MoveSite(H1_INSERT, params={"slot": (1, 0), "name": "X", "projection": "a+"})
    with pytest.raises(MoveError):
        apply_move(p, site, V)


def test_stale_site():
    p = P("letters: A:a+ B:b+\nphrase: BAAB")
    (site,) = enumerate_sites(p, V, {H1_REMOVE})
    q = apply_move(p, site, V)
    with pytest.raises(MoveError):
        apply_move(q, site, V)


def test_site_json_round_trip():
    p = P("letters: A:a+ B:a+ C:a+\nphrase: AB|AC|BC")
    for s in enumerate_sites(p, V):
        assert MoveSite.from_json(s.to_json()) == s


def test_fresh_names_skip_taken():
    p = P("letters: n_1:a+\nphrase: n_1 n_1")
    assert fresh_names(p, 2) == ["n_2", "n_3"]


@given(phrases(), st.sampled_from(["a+", "a-", "b+", "b-"]), st.data())
def test_h1_insert_then_remove(p, sym, data):
    slots = enumerate_sites(p, V, {H1_INSERT})
    site = data.draw(st.sampled_from(slots)).with_params(projection=sym)
    q = apply_move(p, site, V)
    c, o = site.param("slot")
    rm = MoveSite(H1_REMOVE, addresses=((c, o + 1), (c, o + 2)))
    assert apply_move(q, rm, V) == p


@given(phrases(), st.sampled_from(["a+", "a-", "b+", "b-"]), st.data())
def test_h2_insert_then_remove(p, sym, data):
    schemas = enumerate_sites(p, V, {H2_INSERT})
    site = data.draw(st.sampled_from(schemas)).with_params(projection=sym)
    q = apply_move(p, site, V)
    removals = [s for s in enumerate_sites(q, V, {H2_REMOVE}) if apply_move(q, s, V) == p]
    assert removals


@given(st.integers(0, 2**63 - 1), st.booleans())
def test_h3_mirror_is_inverse(seed, welded):
    rng = random.Random(seed)
    h = W if welded else V
    p = plant_h3(rng, random_phrase(rng, 5, 3), h, extended=welded and rng.random() < 0.5)
    sites = enumerate_sites(p, h, {H3, H3EXT})
    assert sites
    for s in sites:
        q = apply_move(p, s, h)
        assert apply_move(q, mirror_site(q, s), h) == p


@given(phrases())
def test_shift_full_turn_is_identity(p):
    for c in range(1, p.n + 1):
        q = p
        for _ in range(max(1, len(p.components[c - 1]))):
            q = apply_move(q, MoveSite(SHIFT, params={"component": c}), V)
        assert q == p


@given(phrases())
def test_self_crossing_is_involution(p):
    for s in enumerate_sites(p, V, {SELF_CROSS}):
        assert apply_move(apply_move(p, s, V), s, V) == p


@given(phrases(), st.integers(0, 2**32), st.sampled_from(["open_M", "M", "welded_M"]))
def test_walk_is_valid_and_replayable(p, seed, variant):
    h = W if variant == "welded_M" else V
    q, trace = random_walk(p, h, variant, 10, seed)
    assert validate(q, h) == []
    again, trace2 = random_walk(p, h, variant, 10, seed)
    assert again == q and trace2.to_json() == trace.to_json()
    chain = replay(p, h, WalkTrace.from_json(trace.dumps()))
    assert chain[0] == p and chain[-1] == q


def test_walk_zero_steps_is_identity():
    p = fixtures.load("ex32")
    q, trace = random_walk(p, V, "M", 0, 1)
    assert q == p and trace.steps == [] and trace.start_hash == phrase_hash(p)


def test_open_variant_never_shifts():
    p = fixtures.load("ex5")
    _, trace = random_walk(p, V, "open_M", 40, 9)
    assert all(s.site.kind != SHIFT for s in trace.steps)


def test_replay_detects_tampering():
    p = fixtures.load("ex32")
    _, trace = random_walk(p, V, "M", 5, 2)
    trace.steps[-1].result_hash = "0" * 16
    with pytest.raises(MoveError):
        replay(p, V, trace)


def test_unknown_variant():
    with pytest.raises(ValueError):
        random_walk(fixtures.load("ex32"), V, "closed", 1, 0)
