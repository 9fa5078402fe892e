"""The transcript presheaf over the attacker site, and its checks.

A section over a view is an internal state ``(r, e)`` of an honest run
whose transcript agrees with the view. Erasing components can only enlarge
the set of compatible states, so along a morphism ``V -> U`` the
restriction is the inclusion ``F(V) -> F(U)``; read backwards it is the
partial map keeping a state iff it is still compatible with ``V``.

The prover-state projection (``literal_section``) recovers the fibers as
usually written down: the nonce alone over a commitment, nonce and response
over ``(a, e)``, a single point over a full transcript.
"""
from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from .attacker_site import (
    ALL_SHAPES,
    COMMIT,
    EMPTY,
    FULL,
    AttackerSite,
    ViewObject,
    ViewShape,
    shift_view,
    validate_covering_by_simulation,
)
from .exceptions import PreconditionError, SigmaSiteError
from .indist_lab import ExactDistribution
from .sigma_core import SigmaProtocol, Statement, Witness

MAX_MATCHING_FAMILIES = 1_000_000

State = tuple  # (r, e)


@dataclass
class PresheafTable:
    protocol: SigmaProtocol
    statement: Statement
    witness: Witness
    site: AttackerSite
    fibers: dict
    # (source, target) -> {state: state}; empty for the honest table
    overrides: dict = field(default_factory=dict)

    def __getitem__(self, view: ViewObject) -> frozenset:
        return self.fibers[view]

    def restrict(self, source: ViewObject, target: ViewObject, state: State) -> State:
        """Restriction along ``source -> target`` applied to one section."""
        mapping = self.overrides.get((source, target))
        if mapping is not None and state in mapping:
            return mapping[state]
        return state

    def transcript(self, state: State):
        r, e = state
        return self.protocol.honest_transcript(self.witness, r, e)

    def with_corrupted_restriction(self, source, target, mapping) -> PresheafTable:
        overrides = dict(self.overrides)
        overrides[(source, target)] = dict(mapping)
        return PresheafTable(self.protocol, self.statement, self.witness, self.site, self.fibers, overrides)

    def with_fibers(self, fibers) -> PresheafTable:
        return PresheafTable(self.protocol, self.statement, self.witness, self.site, dict(fibers), self.overrides)


def build_presheaf(protocol: SigmaProtocol, statement: Statement, witness: Witness, site: AttackerSite) -> PresheafTable:
    protocol.check_witness(statement, witness)
    q = protocol.q
    buckets = defaultdict(set)
    for r in range(q):
        for e in range(q):
            t = protocol.honest_transcript(witness, r, e)
            for shape in ALL_SHAPES:
                buckets[ViewObject.of_transcript(t, shape)].add((r, e))
    fibers = {v: frozenset(buckets.get(v, ())) for v in site.objects}
    return PresheafTable(protocol, statement, witness, site, fibers)


def literal_section(F: PresheafTable, view: ViewObject, state: State) -> tuple:
    """Project an internal state to the prover data held at ``view``."""
    if view.shape == FULL:
        return ()
    r, e = state
    if "e" in view.shape and "z" not in view.shape:
        return (r, F.protocol.respond(F.witness, r, e))
    return (r,)


def literal_fiber(F: PresheafTable, view: ViewObject) -> list:
    return sorted({literal_section(F, view, s) for s in F[view]})


# -- functoriality ------------------------------------------------------

@dataclass
class FunctorialityReport:
    morphisms_checked: int = 0
    pairs_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_record(self):
        return {
            "morphisms_checked": self.morphisms_checked,
            "composable_pairs_checked": self.pairs_checked,
            "violations": [str(v) for v in self.violations],
        }


def check_functoriality(F: PresheafTable) -> FunctorialityReport:
    """Identity and composition laws, plus well-definedness of every map."""
    site = F.site
    report = FunctorialityReport()
    for v in site.objects:
        for u in site.above(v):
            report.morphisms_checked += 1
            for s in F[v]:
                image = F.restrict(v, u, s)
                if u == v and image != s:
                    report.violations.append(f"identity law fails at {v} on {s}")
                elif image not in F[u]:
                    report.violations.append(f"restriction {v} -> {u} sends {s} outside F({u})")
    for w in site.objects:
        for v in site.above(w):
            for u in site.above(v):
                report.pairs_checked += 1
                for s in F[w]:
                    lhs = F.restrict(v, u, F.restrict(w, v, s))
                    rhs = F.restrict(w, u, s)
                    if lhs != rhs:
                        report.violations.append(f"composition {w} -> {v} -> {u} fails on {s}: {lhs} != {rhs}")
    return report


# -- literal gluing -------------------------------------------------------

@dataclass
class GluingCount:
    family: object
    matching: int = 0
    gluable: int = 0
    non_gluable: int = 0
    multi_gluable: int = 0
    skipped: bool = False

    def to_record(self):
        return {
            "target": str(self.family.target),
            "label": self.family.label,
            "members": len(self.family.members),
            "matching_families": self.matching,
            "gluable": self.gluable,
            "non_gluable": self.non_gluable,
            "multi_gluable": self.multi_gluable,
            "skipped": self.skipped,
        }


@dataclass
class LiteralGluingReport:
    counts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.non_gluable == 0 and c.multi_gluable == 0 and not c.skipped for c in self.counts)

    def for_target(self, target, label=None):
        return [c for c in self.counts if c.family.target == target and (label is None or c.family.label == label)]

    def to_record(self):
        totals = Counter()
        for c in self.counts:
            totals["matching_families"] += c.matching
            totals["gluable"] += c.gluable
            totals["non_gluable"] += c.non_gluable
            totals["multi_gluable"] += c.multi_gluable
        return {
            "coverings": len(self.counts),
            "totals": dict(sorted(totals.items())),
            "non_identity": [c.to_record() for c in self.counts if not c.family.is_identity],
        }


def _preimage(F: PresheafTable, over: ViewObject, held_at: ViewObject, sigma: tuple) -> frozenset:
    """States over ``over`` whose prover data at ``held_at`` is ``sigma``."""
    return frozenset(s for s in F[over] if literal_section(F, held_at, s) == sigma)


def check_sheaf_literal(F: PresheafTable, site: AttackerSite | None = None) -> LiteralGluingReport:
    """Count matching families per covering and how many glue uniquely.

    Two local sections are compatible when their restrictions to every
    common refinement coincide; members with no common refinement impose
    no constraint. A section over the target glues a matching family when
    its restriction to each member is that member's section.
    """
    site = site or F.site
    report = LiteralGluingReport()
    for fam in site.families:
        count = GluingCount(fam)
        report.counts.append(count)
        members = fam.members
        fibers = [literal_fiber(F, m) for m in members]
        if prod(len(f) for f in fibers) > MAX_MATCHING_FAMILIES:
            count.skipped = True
            continue
        refinements = {}
        for i, j in itertools.combinations(range(len(members)), 2):
            meet = site.meet(members[i], members[j])
            refinements[i, j] = site.below(meet) if meet is not None else []
        candidates = literal_fiber(F, fam.target)
        for choice in itertools.product(*fibers):
            if not all(
                _preimage(F, w, members[i], choice[i]) == _preimage(F, w, members[j], choice[j])
                for (i, j), ws in refinements.items()
                for w in ws
            ):
                continue
            count.matching += 1
            glue = [
                sigma
                for sigma in candidates
                if all(
                    _preimage(F, m, fam.target, sigma) == _preimage(F, m, m, choice[k])
                    for k, m in enumerate(members)
                )
            ]
            if not glue:
                count.non_gluable += 1
            elif len(glue) == 1:
                count.gluable += 1
            else:
                count.multi_gluable += 1
    return report


# -- distributional gluing ---------------------------------------------------

@dataclass
class DistributionalGluingReport:
    epsilon: Fraction
    verdicts: list = field(default_factory=list)
    support_violations: list = field(default_factory=list)

    @property
    def max_distance(self) -> Fraction:
        return max((v.distance for v in self.verdicts), default=Fraction(0))

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts) and not self.support_violations

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def to_record(self):
        return {
            "epsilon": _frac(self.epsilon),
            "coverings": len(self.verdicts),
            "max_distance": _frac(self.max_distance),
            "failures": [f"{v.family} at distance {_frac(v.distance)}" for v in self.failures()],
            "support_violations": [str(v) for v in self.support_violations],
        }


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def check_sheaf_distributional(
    F: PresheafTable, real: ExactDistribution, simulated: ExactDistribution,
    epsilon=Fraction(0), site: AttackerSite | None = None,
) -> DistributionalGluingReport:
    """Real conditional law on each covered view versus the law glued from
    simulator data on the covering members; pass iff distance <= epsilon.
    """
    site = site or F.site
    report = DistributionalGluingReport(Fraction(epsilon))
    for fam in site.families:
        report.verdicts.append(validate_covering_by_simulation(fam, real, simulated, epsilon))
    # local data handed to the gluing must be transcripts of actual sections
    empty = ViewObject(EMPTY, ())
    if empty in site:
        honest = {F.transcript(s) for s in F[empty]}
        report.support_violations.extend(t for t in sorted(simulated) if t not in honest)
    return report


# -- torsor --------------------------------------------------------------

@dataclass
class FiberwiseResult:
    view: ViewObject
    size: int
    invariant: bool
    free: bool
    transitive: bool
    orbits: int

    def to_record(self):
        return {"view": str(self.view), "size": self.size, "invariant": self.invariant,
                "free": self.free, "transitive": self.transitive, "orbits": self.orbits}


@dataclass
class TorsorReport:
    fiberwise: list = field(default_factory=list)
    object_bijection: dict = field(default_factory=dict)
    morphisms_preserved: dict = field(default_factory=dict)
    coverings_preserved: dict = field(default_factory=dict)
    fiber_bijections: dict = field(default_factory=dict)
    composition_law: bool = True
    violations: list = field(default_factory=list)

    def shape_summary(self) -> dict:
        out = {}
        for shape in ALL_SHAPES:
            rows = [r for r in self.fiberwise if r.view.shape == shape]
            if rows:
                out[str(shape)] = {
                    "views": len(rows),
                    "invariant": all(r.invariant for r in rows),
                    "free": all(r.free for r in rows),
                    "transitive": all(r.transitive for r in rows),
                    "orbits_per_view": sorted({r.orbits for r in rows}),
                }
        return out

    @property
    def fixed_challenge_torsor(self) -> bool:
        rows = [r for r in self.fiberwise if r.view.shape == ViewShape(("e",))]
        return bool(rows) and all(r.invariant and r.free and r.transitive for r in rows)

    @property
    def base_change_ok(self) -> bool:
        return all(
            all(d.values())
            for d in (self.object_bijection, self.morphisms_preserved, self.coverings_preserved, self.fiber_bijections)
        ) and self.composition_law

    @property
    def passed(self):
        return self.fixed_challenge_torsor and self.base_change_ok

    def to_record(self):
        return {
            "fiberwise": self.shape_summary(),
            "fixed_challenge_torsor": self.fixed_challenge_torsor,
            "base_change": {
                "shifts": len(self.object_bijection),
                "site_automorphisms": all(self.object_bijection.values())
                and all(self.morphisms_preserved.values())
                and all(self.coverings_preserved.values()),
                "fiber_bijections": all(self.fiber_bijections.values()),
                "composition_law": self.composition_law,
            },
            "violations": [str(v) for v in self.violations[:20]],
        }


def act(q: int, t: int, state: State) -> State:
    """Nonce re-randomization ``t . (r, e) = (r + t, e)``."""
    r, e = state
    return ((r + t) % q, e)


def check_torsor(F: PresheafTable, site: AttackerSite | None = None) -> TorsorReport:
    """Fiberwise action on commitment-hiding views, and base change along
    the site automorphisms induced by shifting the nonce.
    """
    site = site or F.site
    q = F.protocol.q
    report = TorsorReport()
    for v in site.objects:
        if "a" in v.shape:
            continue
        fiber = F[v]
        invariant = all(act(q, t, s) in fiber for s in fiber for t in range(q))
        free = all(act(q, t, s) != s for s in fiber for t in range(1, q))
        orbits = {frozenset(act(q, t, s) for t in range(q)) & fiber for s in fiber}
        transitive = invariant and len(orbits) <= 1
        if invariant and transitive:
            # any two sections are related by exactly one shift
            transitive = all(
                sum(act(q, t, s1) == s2 for t in range(q)) == 1 for s1 in fiber for s2 in fiber
            )
        report.fiberwise.append(FiberwiseResult(v, len(fiber), invariant, free, transitive, len(orbits)))

    shifts = {t: {v: shift_view(F.protocol, v, t) for v in site.objects} for t in range(q)}
    objects = set(site.objects)
    for t, sigma in shifts.items():
        image = set(sigma.values())
        report.object_bijection[t] = image == objects and len(image) == len(objects)
        report.morphisms_preserved[t] = all(
            sigma[v].refines(sigma[u]) for v in site.objects for u in site.above(v)
        )
        cov = True
        for fam in site.families:
            members = {sigma[m] for m in fam.members}
            if not site.generates_covering(members, sigma[fam.target]):
                cov = False
                report.violations.append(f"shift {t} breaks {fam}")
        report.coverings_preserved[t] = cov
        fib = True
        for v in site.objects:
            if {act(q, t, s) for s in F[v]} != F[sigma[v]]:
                fib = False
                report.violations.append(f"shift {t} is not a bijection F({v}) -> F({sigma[v]})")
        report.fiber_bijections[t] = fib
    for s, t in itertools.product(range(q), repeat=2):
        st = shifts[(s + t) % q]
        if any(shifts[t][shifts[s][v]] != st[v] for v in site.objects):
            report.composition_law = False
            report.violations.append(f"shift {t} after {s} differs from shift {(s + t) % q}")
    return report


# -- local triviality --------------------------------------------------------

@dataclass
class TrivializationReport:
    members_checked: int = 0
    trivialized: int = 0
    sections: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return self.members_checked > 0 and not self.failures

    def to_record(self):
        return {"members_checked": self.members_checked, "trivialized": self.trivialized,
                "failures": [str(f) for f in self.failures]}


def simulator_section(protocol: SigmaProtocol, statement: Statement, view: ViewObject, simulator=None):
    """Find a simulated transcript lying over ``view`` without the witness."""
    sim = simulator or protocol.simulate
    d = view.as_dict()
    es = [d["e"]] if "e" in d else range(protocol.q)
    zs = [d["z"]] if "z" in d else range(protocol.q)
    for e in es:
        for z in zs:
            t = sim(statement, e, z)
            if view.agrees(t):
                return t
    return None


def local_triviality_witness(F: PresheafTable, site: AttackerSite | None = None, simulator=None) -> TrivializationReport:
    """Simulator-produced sections on every member of every covering of a
    commitment view, checked against the witness-free fiber (accepting
    transcripts agreeing with the member).
    """
    site = site or F.site
    report = TrivializationReport()
    for fam in site.families:
        if fam.target.shape != COMMIT:
            continue
        for m in fam.members:
            report.members_checked += 1
            t = simulator_section(F.protocol, F.statement, m, simulator)
            if t is not None and F.protocol.verify(F.statement, t) and m.agrees(t):
                report.trivialized += 1
                report.sections[m] = t
            else:
                report.failures.append(m)
    return report


# -- global sections ----------------------------------------------------------

@dataclass
class GlobalSectionReport:
    global_sections: int
    degenerate: bool
    recoveries: int = 0
    attempts: int = 0
    extracted: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.errors and (self.degenerate or self.global_sections == 0 or self.recoveries == self.attempts)

    def to_record(self):
        return {
            "global_sections": str(self.global_sections),
            "degenerate": self.degenerate,
            "extraction_attempts": self.attempts,
            "witness_recoveries": self.recoveries,
            "extracted_witnesses": sorted({w for ws in self.extracted.values() for w in ws}),
            "errors": [str(e) for e in self.errors],
            "reading": "every global section, pinned on two full views sharing a commitment, reveals the witness",
        }


def global_section_analysis(F: PresheafTable, site: AttackerSite | None = None) -> GlobalSectionReport:
    """Count global sections and extract the witness from each of them.

    A global section picks one state in every fiber. Only its values over
    full views enter extraction, so sections are grouped by those values:
    for each commitment and each ordered pair of distinct challenges, every
    choice of states over the two full views is run through the extractor.
    """
    site = site or F.site
    count = prod(len(F[v]) for v in site.objects) if site.objects else 0
    full_by_commitment = defaultdict(list)
    for v in site.by_shape(FULL):
        full_by_commitment[v.value("a")].append(v)
    degenerate = not any(len({v.value("e") for v in vs}) > 1 for vs in full_by_commitment.values())
    report = GlobalSectionReport(count, degenerate)
    if count == 0 or degenerate:
        return report
    for a, views in sorted(full_by_commitment.items()):
        found = set()
        for v1, v2 in itertools.permutations(views, 2):
            if v1.value("e") == v2.value("e"):
                continue
            for s1 in F[v1]:
                for s2 in F[v2]:
                    report.attempts += 1
                    t1, t2 = F.transcript(s1), F.transcript(s2)
                    try:
                        if not (v1.agrees(t1) and v2.agrees(t2)):
                            raise PreconditionError(f"section {s1} or {s2} disagrees with its view")
                        x = F.protocol.extract(F.statement, t1, t2).x
                    except SigmaSiteError as exc:
                        report.errors.append(exc)
                        continue
                    found.add(x)
                    if x == F.witness.x:
                        report.recoveries += 1
        report.extracted[a] = found
    return report
