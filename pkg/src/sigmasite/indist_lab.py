"""Exact transcript distributions and statistical distance.

All masses are :class:`fractions.Fraction`; nothing in here touches
floating point, so equality of distributions is literal equality.
"""
from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping
from fractions import Fraction

from .exceptions import DomainError
from .sigma_core import SigmaProtocol, Statement, Transcript, Witness


class ExactDistribution(Mapping):
    """Finite distribution with rational masses summing to exactly 1.

    Outcomes with zero mass are dropped, so two distributions are equal as
    mappings iff they assign the same mass to every outcome.
    """

    def __init__(self, masses: Mapping):
        cleaned = {}
        total = Fraction(0)
        for o, m in masses.items():
            m = Fraction(m)
            if m < 0:
                raise DomainError(f"negative mass {m} on {o!r}")
            if m:
                cleaned[o] = m
                total += m
        if total != 1:
            raise DomainError(f"total mass is {total}, not 1")
        self._m = cleaned
        self._by_view = None

    @classmethod
    def uniform(cls, outcomes: Iterable) -> ExactDistribution:
        counts = defaultdict(int)
        n = 0
        for o in outcomes:
            counts[o] += 1
            n += 1
        if not n:
            raise DomainError("uniform distribution over an empty set")
        return cls({o: Fraction(c, n) for o, c in counts.items()})

    @classmethod
    def point(cls, outcome) -> ExactDistribution:
        return cls({outcome: 1})

    def __getitem__(self, o) -> Fraction:
        return self._m.get(o, Fraction(0))

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __contains__(self, o):
        return o in self._m

    def __eq__(self, other):
        if isinstance(other, ExactDistribution):
            return self._m == other._m
        return NotImplemented

    __hash__ = None

    def over(self, view) -> list:
        """``(outcome, mass)`` pairs of transcripts agreeing with ``view``."""
        if self._by_view is None:
            from .attacker_site import ALL_SHAPES, ViewObject

            index = defaultdict(list)
            for o, m in self._m.items():
                if isinstance(o, Transcript):
                    for shape in ALL_SHAPES:
                        index[ViewObject.of_transcript(o, shape)].append((o, m))
            self._by_view = index
        return self._by_view.get(view, [])

    def mass(self, predicate: Callable) -> Fraction:
        return sum((m for o, m in self._m.items() if predicate(o)), Fraction(0))

    def items_sorted(self):
        return sorted(self._m.items(), key=lambda kv: _sort_key(kv[0]))

    def dump(self) -> str:
        """Stable text listing ``outcome -> num/den``, one per line."""
        lines = [f"{_fmt_outcome(o)} -> {m.numerator}/{m.denominator}" for o, m in self.items_sorted()]
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self):
        return f"ExactDistribution({len(self)} outcomes)"


def _sort_key(o):
    key = getattr(o, "sort_key", None)
    if key is not None:
        return key()
    return o


def _fmt_outcome(o) -> str:
    if isinstance(o, Transcript):
        return f"(a={_fmt_value(o.a)}, e={o.e}, z={o.z})"
    return str(o)


def _fmt_value(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(str(u) for u in v) + ")"
    return str(v)


# -- distributions of the protocol -----------------------------------------

Simulator = Callable[[Statement, int, int], Transcript]


def real_distribution(protocol: SigmaProtocol, witness: Witness) -> ExactDistribution:
    """Honest transcripts with nonce and challenge uniform over Z_q."""
    protocol.params.check_scale()
    q = protocol.q
    return ExactDistribution.uniform(
        protocol.honest_transcript(witness, r, e) for r in range(q) for e in range(q)
    )


def simulated_distribution(
    protocol: SigmaProtocol, statement: Statement, simulator: Simulator | None = None
) -> ExactDistribution:
    """Pushforward of uniform (e, z) through the simulator."""
    protocol.params.check_scale()
    sim = simulator or protocol.simulate
    q = protocol.q
    return ExactDistribution.uniform(sim(statement, e, z) for e in range(q) for z in range(q))


def constant_response_simulator(protocol: SigmaProtocol, z0: int = 0) -> Simulator:
    """A broken simulator that ignores the sampled response and uses ``z0``.

    Used for fault injection: its commitment marginal is still uniform but
    conditioned on a commitment it collapses to a point mass.
    """

    def sim(statement, e, z):
        return protocol.simulate(statement, e, z0)

    return sim


def condition_on_view(d: ExactDistribution, view) -> ExactDistribution:
    """Condition a transcript distribution on agreement with ``view``."""
    over = d.over(view)
    total = sum((m for _, m in over), Fraction(0))
    if total == 0:
        raise DomainError(f"view {view} has zero mass")
    return ExactDistribution({o: m / total for o, m in over})


def statistical_distance(d1: Mapping, d2: Mapping) -> Fraction:
    """Total variation distance, ``1/2 * sum |d1(o) - d2(o)|``."""
    support = set(d1) | set(d2)
    return sum((abs(d1.get(o, 0) - d2.get(o, 0)) for o in support), Fraction(0)) / 2


def marginal_on_shape(d: ExactDistribution, shape) -> ExactDistribution:
    """Pushforward along the erasure to ``shape`` (a ViewShape)."""
    from .attacker_site import ViewObject

    out = defaultdict(Fraction)
    for o, m in d.items():
        out[ViewObject.of_transcript(o, shape)] += m
    return ExactDistribution(out)


def amalgamate(simulated: ExactDistribution, members: Iterable) -> ExactDistribution:
    """Glue simulator data over a family of member views.

    A member view is drawn with probability proportional to its simulated
    mass and a full transcript is then drawn from the simulator conditioned
    on that member. Transcripts lying under no member are never produced,
    so a family that fails to exhaust its target is penalised.
    """
    local = [simulated.over(v) for v in members]
    total = sum((m for over in local for _, m in over), Fraction(0))
    if total == 0:
        raise DomainError("simulator puts no mass on any member of the family")
    # member weight w/total times conditional m/w collapses to m/total
    out = defaultdict(Fraction)
    for over in local:
        for o, m in over:
            out[o] += m / total
    return ExactDistribution(out)
