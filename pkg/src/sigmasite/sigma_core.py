"""Sigma-protocol engine: honest runs, verification, simulation, extraction.

Randomness never enters these functions. Nonces and challenges are
explicit arguments so that every distribution can be enumerated exactly;
sampling lives in the CLI layer.

Two instantiations share the :class:`SigmaProtocol` interface:

* :class:`Schnorr`, proving knowledge of ``x`` with ``y = g**x``;
* :class:`ChaumPedersen`, proving ``log_g y1 == log_h y2``. Its commitment
  is an element pair, so views over it exercise a non-scalar commitment.
"""
from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Union

from .exceptions import DomainError, InconsistencyError, PreconditionError
from .group_arith import GroupParams, dlog_bruteforce, inv_mod, scalar

Commitment = Union[int, tuple]


@dataclass(frozen=True)
class Statement:
    y: Commitment


@dataclass(frozen=True)
class Witness:
    x: int


@dataclass(frozen=True, order=True)
class Transcript:
    a: Commitment
    e: int
    z: int

    def components(self) -> dict:
        return {"a": self.a, "e": self.e, "z": self.z}


class SigmaProtocol(ABC):
    """Three-move protocol bound to one group.

    Subclasses supply the algebra for commitments and statements; the
    generic parts (response, extraction, honest runs, enumeration) are
    shared.
    """

    name: str

    def __init__(self, params: GroupParams):
        self.params = params.checked()

    # -- protocol-specific algebra -------------------------------------
    @abstractmethod
    def statement_of(self, x: int) -> Statement: ...

    @abstractmethod
    def commit(self, r: int) -> Commitment: ...

    @abstractmethod
    def verify(self, statement: Statement, t: Transcript) -> bool: ...

    @abstractmethod
    def simulate(self, statement: Statement, e: int, z: int) -> Transcript: ...

    @abstractmethod
    def commitment_domain(self) -> list:
        """Every value a commitment may take (sorted)."""

    @abstractmethod
    def shift_commitment(self, a: Commitment, t: int) -> Commitment:
        """Commitment after re-randomizing the nonce by ``t``."""

    @abstractmethod
    def nonce_of(self, a: Commitment) -> int:
        """Brute-force the nonce behind an honest commitment."""

    @abstractmethod
    def is_statement(self, statement: Statement) -> bool: ...

    # -- generic -------------------------------------------------------
    @property
    def q(self) -> int:
        return self.params.q

    def keygen(self, x: int) -> tuple[Statement, Witness]:
        scalar(x, self.params)
        return self.statement_of(x), Witness(x)

    def respond(self, witness: Witness, r: int, e: int) -> int:
        return (r + e * witness.x) % self.q

    def honest_transcript(self, witness: Witness, r: int, e: int) -> Transcript:
        return Transcript(self.commit(r), e, self.respond(witness, r, e))

    def check_witness(self, statement: Statement, witness: Witness) -> None:
        if self.statement_of(witness.x) != statement:
            raise DomainError("witness does not match statement")

    def extract(self, statement: Statement, t1: Transcript, t2: Transcript) -> Witness:
        """Special-soundness extractor.

        Needs two accepting transcripts with a shared commitment and
        distinct challenges; the result is checked against the statement.
        """
        if t1.a != t2.a:
            raise PreconditionError("transcripts have different commitments")
        if t1.e == t2.e:
            raise PreconditionError("transcripts have equal challenges")
        if not (self.verify(statement, t1) and self.verify(statement, t2)):
            raise PreconditionError("transcript does not verify")
        q = self.q
        x = (t1.z - t2.z) * inv_mod((t1.e - t2.e) % q, q) % q
        if self.statement_of(x) != statement:
            raise InconsistencyError(f"extracted x={x} does not reproduce the statement")
        return Witness(x)

    def accepting_transcripts(self, statement: Statement) -> list[Transcript]:
        """All accepting transcripts over the commitment domain, sorted.

        For each (e, z) the verification equations pin the commitment down
        uniquely, so solving them enumerates the accepting set in q**2 steps.
        """
        self.params.check_scale()
        out = []
        for e in range(self.q):
            for z in range(self.q):
                t = self.simulate(statement, e, z)
                if not self.verify(statement, t):
                    raise InconsistencyError(f"solved transcript {t} does not verify")
                out.append(t)
        out.sort()
        return out

    def shift_transcript(self, t: Transcript, s: int) -> Transcript:
        return Transcript(self.shift_commitment(t.a, s), t.e, (t.z + s) % self.q)

    def _in_scalars(self, *vals) -> bool:
        return all(isinstance(v, int) and 0 <= v < self.q for v in vals)

    def __repr__(self):
        p = self.params
        return f"{type(self).__name__}(p={p.p}, q={p.q}, g={p.g})"


class Schnorr(SigmaProtocol):
    name = "schnorr"

    def statement_of(self, x):
        return Statement(self.params.exp(x))

    def commit(self, r):
        scalar(r, self.params)
        return self.params.exp(r)

    def verify(self, statement, t):
        p = self.params.p
        if not (self.params.contains(t.a) and self._in_scalars(t.e, t.z)):
            return False
        return self.params.exp(t.z) == t.a * pow(statement.y, t.e, p) % p

    def simulate(self, statement, e, z):
        p = self.params.p
        a = self.params.exp(z) * inv_mod(pow(statement.y, e, p), p) % p
        return Transcript(a, e, z)

    def commitment_domain(self):
        return self.params.elements()

    def shift_commitment(self, a, t):
        return a * self.params.exp(t) % self.params.p

    def nonce_of(self, a):
        return dlog_bruteforce(a, self.params)

    def is_statement(self, statement):
        return isinstance(statement.y, int) and self.params.contains(statement.y)


class ChaumPedersen(SigmaProtocol):
    """Equality of discrete logs to bases g and h = g**2 (by default)."""

    name = "chaum_pedersen"

    def __init__(self, params: GroupParams, h: int | None = None):
        super().__init__(params)
        self.h = pow(params.g, 2, params.p) if h is None else h
        if not params.contains(self.h) or self.h == 1:
            raise DomainError(f"second generator h={self.h} must be a non-identity subgroup element")

    def _hexp(self, r):
        return pow(self.h, r % self.q, self.params.p)

    def statement_of(self, x):
        return Statement((self.params.exp(x), self._hexp(x)))

    def commit(self, r):
        scalar(r, self.params)
        return (self.params.exp(r), self._hexp(r))

    def verify(self, statement, t):
        p = self.params.p
        if not (isinstance(t.a, tuple) and len(t.a) == 2):
            return False
        a1, a2 = t.a
        if not (self.params.contains(a1) and self.params.contains(a2) and self._in_scalars(t.e, t.z)):
            return False
        y1, y2 = statement.y
        return (
            self.params.exp(t.z) == a1 * pow(y1, t.e, p) % p
            and self._hexp(t.z) == a2 * pow(y2, t.e, p) % p
        )

    def simulate(self, statement, e, z):
        p = self.params.p
        y1, y2 = statement.y
        a1 = self.params.exp(z) * inv_mod(pow(y1, e, p), p) % p
        a2 = self._hexp(z) * inv_mod(pow(y2, e, p), p) % p
        return Transcript((a1, a2), e, z)

    def commitment_domain(self):
        els = self.params.elements()
        return [(u, v) for u in els for v in els]

    def shift_commitment(self, a, t):
        p = self.params.p
        return (a[0] * self.params.exp(t) % p, a[1] * self._hexp(t) % p)

    def nonce_of(self, a):
        r = dlog_bruteforce(a[0], self.params)
        if self._hexp(r) != a[1]:
            raise DomainError(f"{a} is not an honest commitment pair")
        return r

    def is_statement(self, statement):
        y = statement.y
        return (
            isinstance(y, tuple)
            and len(y) == 2
            and all(isinstance(v, int) and self.params.contains(v) for v in y)
        )

    def __repr__(self):
        p = self.params
        return f"ChaumPedersen(p={p.p}, q={p.q}, g={p.g}, h={self.h})"


PROTOCOLS = {"schnorr": Schnorr, "chaum_pedersen": ChaumPedersen}


def make_protocol(name: str, params: GroupParams, h: int | None = None) -> SigmaProtocol:
    if name not in PROTOCOLS:
        raise DomainError(f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}")
    if name == "chaum_pedersen":
        return ChaumPedersen(params, h)
    if h is not None:
        raise DomainError("second generator h only applies to chaum_pedersen")
    return Schnorr(params)


# -- transcript records ----------------------------------------------------

def _enc(v: Commitment):
    return [str(u) for u in v] if isinstance(v, tuple) else str(v)


def _dec(v) -> Commitment:
    if isinstance(v, list):
        return tuple(int(u) for u in v)
    return int(v)


def dump_transcript(protocol: SigmaProtocol, statement: Statement, t: Transcript) -> str:
    """One-line JSON record with decimal-string integers and sorted keys."""
    p = protocol.params
    rec = {
        "protocol": protocol.name,
        "p": str(p.p),
        "q": str(p.q),
        "g": str(p.g),
        "y": _enc(statement.y),
        "a": _enc(t.a),
        "e": str(t.e),
        "z": str(t.z),
    }
    if isinstance(protocol, ChaumPedersen):
        rec["h"] = str(protocol.h)
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def load_transcript(text: str) -> tuple[SigmaProtocol, Statement, Transcript]:
    rec = json.loads(text)
    params = GroupParams(int(rec["p"]), int(rec["q"]), int(rec["g"]))
    h = int(rec["h"]) if "h" in rec else None
    protocol = make_protocol(rec["protocol"], params, h)
    statement = Statement(_dec(rec["y"]))
    if not protocol.is_statement(statement):
        raise DomainError("statement outside the subgroup")
    return protocol, statement, Transcript(_dec(rec["a"]), int(rec["e"]), int(rec["z"]))
