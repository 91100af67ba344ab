import pytest
from hypothesis import given

from nanophrase import fixtures
from nanophrase.core import parse_nanophrase
from nanophrase.invariants import (
    IndexSequence, Invariants, Residue, StabilizationError, delta, delta_subsequences, distinct_sequences, mu, mu_bar,
)

from conftest import phrases

S = IndexSequence.of

BORROMEAN_MU = {(2, 1): 0, (3, 1): 0, (2, 3, 1): -1, (1, 2): 0, (1, 3): 0, (2, 3): 0, (3, 2): 0}
EX4_MU = {(2, 1): 2, (3, 1): 0, (2, 3, 1): -1, (3, 2, 1): 1, (1, 2): 0, (3, 2): -1, (1, 3): 0, (2, 3): -1}
EX5_MU = {(2, 1): 2, (3, 1): 0, (2, 3, 1): 1, (1, 2): 2, (3, 2): 1, (1, 3): 0, (2, 3): 1}


@pytest.mark.parametrize("name, table", [("borromean", BORROMEAN_MU), ("ex4", EX4_MU), ("ex5", EX5_MU)])
def test_fixture_mu(name, table):
    inv = Invariants(fixtures.load(name))
    for seq, value in table.items():
        assert inv.mu(S(*seq)) == value, seq


def test_borromean_mu_bar():
    p = fixtures.load("borromean")
    assert delta(p, (2, 3, 1)) == 0
    assert mu_bar(p, (2, 3, 1)) == Residue(-1, 0)


def test_ex4_ex5_mu_bar():
    p4, p5 = fixtures.load("ex4"), fixtures.load("ex5")
    for s in ((2, 3, 1), (3, 2, 1)):
        assert delta(p4, s) == 1 and mu_bar(p4, s) == Residue(0, 1)
    assert delta(p5, (2, 3, 1)) == 1 and mu_bar(p5, (2, 3, 1)) == Residue(0, 1)


@pytest.mark.parametrize("n", range(1, 9))
def test_families(n):
    t, v = fixtures.torus(n), fixtures.vlink(n)
    assert mu(t, (2, 1)) == n and mu(t, (1, 2)) == n
    assert mu(v, (2, 1)) == n and mu(v, (1, 2)) == 0


def test_empty_two_component_phrase():
    p = parse_nanophrase("letters:\nphrase: . | .")
    assert Invariants(p).report(S(1, 2)) == {
        "sequence": [1, 2], "mu": 0, "delta": 0, "mubar": {"value": 0, "modulus": 0}, "q_used": 2}


def test_q_used_is_u_plus_one():
    r = Invariants(fixtures.load("borromean")).mu_result(S(2, 3, 1))
    assert r.q_used == 3 and r.values == {3: -1, 4: -1}


def test_forced_disagreement_reports_stages():
    inv = Invariants(fixtures.load("borromean"), extra_stages=0, start=2)
    with pytest.raises(StabilizationError) as exc:
        inv.mu(S(2, 3, 1))
    assert exc.value.values == {2: 0, 3: -1}
    assert "q=2: 0" in str(exc.value) and "q=3: -1" in str(exc.value)


def test_escalation_recovers_from_early_start():
    r = Invariants(fixtures.load("borromean"), extra_stages=1, start=2).mu_result(S(2, 3, 1))
    assert r.mu == -1 and r.q_used == 3


def test_index_out_of_range():
    with pytest.raises(IndexError):
        mu(fixtures.load("borromean"), (2, 5))


def test_sequence_helpers():
    s = S(2, 3, 1)
    assert s.prefix == (2, 3) and s.target == 1 and s.u == 2 and s.distinct
    assert not S(1, 1).distinct
    assert str(s) == "(2,3,1)"
    with pytest.raises(ValueError):
        S(1)


def test_delta_subsequences_three():
    got = {d.as_tuple() for d in delta_subsequences((2, 3, 1))}
    assert got == {(2, 3), (3, 2), (2, 1), (1, 2), (3, 1), (1, 3)}


def test_delta_subsequences_four_keep_order():
    got = {d.as_tuple() for d in delta_subsequences((1, 2, 3, 4))}
    assert (1, 2, 4) in got and (2, 4, 1) in got and (4, 1, 2) in got
    assert (2, 1, 4) not in got
    assert (1, 2, 3, 4) not in got


def test_residue_canonical():
    assert Residue(-1, 3) == Residue(2, 3)
    assert Residue(-1, 0).value == -1
    with pytest.raises(ValueError):
        Residue(1, -2)


def test_distinct_sequences_count():
    assert len(list(distinct_sequences(3, 3))) == 6 + 6
    assert len(list(distinct_sequences(2, 5))) == 2


@given(phrases(max_letters=6, max_components=3))
def test_stabilizes_by_u_plus_one(p):
    inv = Invariants(p)
    for s in distinct_sequences(p.n, 3):
        assert inv.coefficient(s, s.u + 1) == inv.coefficient(s, s.u + 3)
