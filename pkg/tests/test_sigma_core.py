import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import MEDIUM, SMALL
from sigmasite.exceptions import DomainError, InconsistencyError, PreconditionError
from sigmasite.sigma_core import (
    ChaumPedersen,
    Schnorr,
    Statement,
    Transcript,
    dump_transcript,
    load_transcript,
    make_protocol,
)

PROTOCOLS = [Schnorr(SMALL), ChaumPedersen(SMALL), Schnorr(MEDIUM), ChaumPedersen(MEDIUM)]


def brute_accepting(pr, statement):
    """Oracle: test every (a, e, z) over the full commitment domain."""
    return sorted(
        Transcript(a, e, z)
        for a in pr.commitment_domain()
        for e in range(pr.q)
        for z in range(pr.q)
        if pr.verify(statement, Transcript(a, e, z))
    )


@pytest.mark.parametrize("pr", PROTOCOLS[:2], ids=["schnorr", "cp"])
def test_accepting_set_matches_brute_force(pr):
    statement, _ = pr.keygen(3)
    assert pr.accepting_transcripts(statement) == brute_accepting(pr, statement)
    assert len(pr.accepting_transcripts(statement)) == pr.q**2


@pytest.mark.parametrize("pr", PROTOCOLS, ids=["s23", "cp23", "s47", "cp47"])
def test_simulator_outputs_verify_and_hit_every_accepting_transcript(pr):
    statement, witness = pr.keygen(5)
    sims = {pr.simulate(statement, e, z) for e in range(pr.q) for z in range(pr.q)}
    honest = {pr.honest_transcript(witness, r, e) for r in range(pr.q) for e in range(pr.q)}
    assert sims == honest
    assert all(pr.verify(statement, t) for t in sims)


@given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))
def test_schnorr_verify_equation(x, r, e):
    pr = Schnorr(SMALL)
    statement, witness = pr.keygen(x)
    t = pr.honest_transcript(witness, r, e)
    p = SMALL.p
    assert t.a == pow(2, r, p)
    assert t.z == (r + e * x) % 11
    assert pow(2, t.z, p) == t.a * pow(statement.y, e, p) % p


@given(st.integers(0, 22), st.integers(0, 22), st.data())
def test_extractor_recovers_witness(x, r, data):
    pr = ChaumPedersen(MEDIUM)
    statement, witness = pr.keygen(x)
    e1, e2 = data.draw(st.lists(st.integers(0, 22), min_size=2, max_size=2, unique=True))
    t1 = pr.honest_transcript(witness, r, e1)
    t2 = pr.honest_transcript(witness, r, e2)
    assert pr.extract(statement, t1, t2) == witness


def test_extractor_preconditions():
    pr = Schnorr(SMALL)
    statement, w = pr.keygen(3)
    t = pr.honest_transcript(w, 1, 2)
    with pytest.raises(PreconditionError):
        pr.extract(statement, t, pr.honest_transcript(w, 2, 3))
    with pytest.raises(PreconditionError):
        pr.extract(statement, t, t)
    with pytest.raises(PreconditionError):
        pr.extract(statement, t, Transcript(t.a, 5, 0))


def test_extractor_detects_inconsistent_statement():
    class Broken(Schnorr):
        def statement_of(self, x):
            return Statement(self.params.exp((x + 1) % self.q))

    pr = Broken(SMALL)
    real = Schnorr(SMALL)
    statement, w = real.keygen(3)
    t1, t2 = real.honest_transcript(w, 0, 1), real.honest_transcript(w, 0, 2)
    with pytest.raises(InconsistencyError):
        pr.extract(statement, t1, t2)


def test_verify_rejects_out_of_domain_components():
    pr = Schnorr(SMALL)
    statement, w = pr.keygen(3)
    t = pr.honest_transcript(w, 4, 5)
    assert pr.verify(statement, t)
    for bad in (Transcript(5, t.e, t.z), Transcript(t.a, 11, t.z), Transcript(t.a, t.e, -1)):
        assert not pr.verify(statement, bad)
    assert not ChaumPedersen(SMALL).verify(ChaumPedersen(SMALL).keygen(3)[0], t)


def test_chaum_pedersen_default_second_generator():
    pr = ChaumPedersen(SMALL)
    assert pr.h == 4
    assert pr.keygen(3)[0].y == (8, 18)
    with pytest.raises(DomainError):
        ChaumPedersen(SMALL, h=1)
    with pytest.raises(DomainError):
        ChaumPedersen(SMALL, h=5)


def test_shift_transcript_stays_accepting():
    for pr in PROTOCOLS[:2]:
        statement, w = pr.keygen(3)
        for r, e, s in itertools.product(range(pr.q), range(pr.q), (1, 4)):
            t = pr.honest_transcript(w, r, e)
            assert pr.shift_transcript(t, s) == pr.honest_transcript(w, (r + s) % pr.q, e)


def test_nonce_of():
    for pr in PROTOCOLS[:2]:
        for r in range(pr.q):
            assert pr.nonce_of(pr.commit(r)) == r
    with pytest.raises(DomainError):
        ChaumPedersen(SMALL).nonce_of((2, 2))


def test_keygen_and_factory_validation():
    with pytest.raises(DomainError):
        Schnorr(SMALL).keygen(11)
    with pytest.raises(DomainError):
        make_protocol("okamoto", SMALL)
    with pytest.raises(DomainError):
        make_protocol("schnorr", SMALL, h=4)
    with pytest.raises(DomainError):
        Schnorr(type(SMALL)(23, 12, 2))


@pytest.mark.parametrize("pr", PROTOCOLS[:2], ids=["schnorr", "cp"])
def test_transcript_record_round_trip(pr):
    statement, w = pr.keygen(3)
    t = pr.honest_transcript(w, 7, 9)
    text = dump_transcript(pr, statement, t)
    assert "\n" not in text and " " not in text
    pr2, st2, t2 = load_transcript(text)
    assert (type(pr2), pr2.params, st2, t2) == (type(pr), pr.params, statement, t)
    assert dump_transcript(pr2, st2, t2) == text


def test_transcript_record_format():
    pr = Schnorr(SMALL)
    statement, w = pr.keygen(3)
    text = dump_transcript(pr, statement, pr.honest_transcript(w, 0, 0))
    assert text == '{"a":"1","e":"0","g":"2","p":"23","protocol":"schnorr","q":"11","y":"8","z":"0"}'


def test_load_rejects_statement_outside_subgroup():
    text = '{"a":"1","e":"0","g":"2","p":"23","protocol":"schnorr","q":"11","y":"5","z":"0"}'
    with pytest.raises(DomainError):
        load_transcript(text)
