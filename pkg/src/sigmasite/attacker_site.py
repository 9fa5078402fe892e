"""The finite site of attacker views.

Objects are *consistent* partial transcripts: an assignment of values to a
subset of the components ``a, e, z`` that extends to at least one accepting
transcript. There is a morphism ``V -> U`` exactly when ``U`` is obtained
from ``V`` by forgetting components, so the category is thin and a morphism
is identified with its (source, target) pair.

A family of morphisms into ``U`` is *covering* when the sieve it generates
contains the sieve of some declared family on ``U``. The declared families
are generated by :func:`declare_standard_coverings` and closed under
pullback and composition so that :func:`check_topology_axioms` passes.
"""
from __future__ import annotations

import copy
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from .exceptions import DomainError
from .sigma_core import SigmaProtocol, Statement, Transcript

COMPONENTS = ("a", "e", "z")

MAX_COMPOSITE_CHOICES = 100_000


@dataclass(frozen=True)
class ViewShape:
    """Subset of the transcript components that a view reveals."""

    components: tuple[str, ...] = ()

    def __post_init__(self):
        unknown = set(self.components) - set(COMPONENTS)
        if unknown:
            raise DomainError(f"unknown transcript components {sorted(unknown)}")
        if len(set(self.components)) != len(self.components):
            raise DomainError(f"repeated component in {self.components}")
        object.__setattr__(self, "components", tuple(c for c in COMPONENTS if c in self.components))
        object.__setattr__(self, "_hash", hash(self.components))

    def __hash__(self):
        return self._hash

    @classmethod
    def of(cls, spec) -> ViewShape:
        """Build from ``"a,e"``, ``"ae"``, ``"{a,e}"`` or an iterable."""
        if isinstance(spec, ViewShape):
            return spec
        if isinstance(spec, str):
            spec = [c for c in spec if c not in "{}, "]
        return cls(tuple(spec))

    def __le__(self, other: ViewShape) -> bool:
        return set(self.components) <= set(other.components)

    def __lt__(self, other: ViewShape) -> bool:
        return self <= other and self != other

    def __contains__(self, c: str) -> bool:
        return c in self.components

    def __len__(self):
        return len(self.components)

    def subshapes(self) -> list[ViewShape]:
        return [
            ViewShape(sub)
            for k in range(len(self.components) + 1)
            for sub in itertools.combinations(self.components, k)
        ]

    def sort_key(self):
        return (len(self.components), tuple(COMPONENTS.index(c) for c in self.components))

    def __str__(self):
        return "{" + ",".join(self.components) + "}"


FULL = ViewShape(COMPONENTS)
EMPTY = ViewShape(())
ALL_SHAPES = FULL.subshapes()
COMMIT = ViewShape(("a",))


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(str(u) for u in v) + ")"
    return str(v)


@dataclass(frozen=True)
class ViewObject:
    """A partial transcript: values for the components in ``shape``."""

    shape: ViewShape
    values: tuple = ()

    def __post_init__(self):
        if len(self.values) != len(self.shape):
            raise DomainError(f"shape {self.shape} needs {len(self.shape)} values, got {self.values!r}")
        object.__setattr__(self, "_hash", hash((self.shape, self.values)))

    def __hash__(self):
        return self._hash

    @classmethod
    def of_transcript(cls, t: Transcript, shape) -> ViewObject:
        shape = ViewShape.of(shape)
        comps = t.components()
        return cls(shape, tuple(comps[c] for c in shape.components))

    def value(self, c: str):
        return self.values[self.shape.components.index(c)]

    def as_dict(self) -> dict:
        return dict(zip(self.shape.components, self.values))

    def agrees(self, t: Transcript) -> bool:
        comps = t.components()
        return all(comps[c] == v for c, v in zip(self.shape.components, self.values))

    def restrict(self, shape) -> ViewObject:
        shape = ViewShape.of(shape)
        if not shape <= self.shape:
            raise DomainError(f"cannot erase {self.shape} to non-subshape {shape}")
        d = self.as_dict()
        return ViewObject(shape, tuple(d[c] for c in shape.components))

    def refines(self, other: ViewObject) -> bool:
        """True iff there is a morphism ``self -> other``."""
        return other.shape <= self.shape and self.restrict(other.shape) == other

    def sort_key(self):
        return (self.shape.sort_key(), self.values)

    def __str__(self):
        return f"{self.shape}(" + ",".join(_fmt(v) for v in self.values) + ")"


@dataclass(frozen=True)
class ViewMorphism:
    """Erasure map ``source -> target``."""

    source: ViewObject
    target: ViewObject

    def __post_init__(self):
        if not self.source.refines(self.target):
            raise DomainError(f"no erasure from {self.source} to {self.target}")

    @property
    def is_identity(self) -> bool:
        return self.source == self.target

    def __str__(self):
        return f"{self.source} -> {self.target}"


def erasure(view: ViewObject, target_shape) -> ViewMorphism:
    """The unique morphism forgetting everything outside ``target_shape``."""
    return ViewMorphism(view, view.restrict(target_shape))


@dataclass(frozen=True)
class CoveringFamily:
    target: ViewObject
    members: tuple[ViewObject, ...]
    label: str = "declared"

    def __post_init__(self):
        members = tuple(sorted(set(self.members), key=ViewObject.sort_key))
        for m in members:
            if not m.refines(self.target):
                raise DomainError(f"member {m} does not map to {self.target}")
        object.__setattr__(self, "members", members)

    @property
    def morphisms(self) -> list[ViewMorphism]:
        return [ViewMorphism(m, self.target) for m in self.members]

    @property
    def is_identity(self) -> bool:
        return self.members == (self.target,)

    def key(self):
        return (self.target.sort_key(), tuple(m.sort_key() for m in self.members))

    def same_members(self, other: CoveringFamily) -> bool:
        return self.target == other.target and self.members == other.members

    def __str__(self):
        return f"{self.label} family on {self.target} with {len(self.members)} members"


# -- the site ---------------------------------------------------------------

@dataclass(frozen=True)
class AttackerSite:
    """Consistent views of one statement plus declared covering families."""

    protocol: SigmaProtocol
    statement: Statement
    objects: tuple[ViewObject, ...]
    families: tuple[CoveringFamily, ...] = ()
    quarantine_counts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        objs = tuple(sorted(self.objects, key=ViewObject.sort_key))
        object.__setattr__(self, "objects", objs)
        index = set(objs)
        above = {v: [u for u in (v.restrict(s) for s in v.shape.subshapes()) if u in index] for v in objs}
        below = defaultdict(list)
        for v, ups in above.items():
            for u in ups:
                below[u].append(v)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_above", above)
        object.__setattr__(self, "_below", dict(below))
        object.__setattr__(self, "_meets", {})  # shared by with_families copies
        self._set_families(self.families)

    def _set_families(self, families) -> None:
        fams = tuple(sorted(families, key=CoveringFamily.key))
        for fam in fams:
            if fam.target not in self._index or any(m not in self._index for m in fam.members):
                raise DomainError(f"{fam} mentions a view that is not an object of the site")
        on = defaultdict(list)
        for fam in fams:
            on[fam.target].append(fam)
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "_on", dict(on))

    # -- category structure
    def __contains__(self, v) -> bool:
        return v in self._index

    def above(self, v: ViewObject) -> list[ViewObject]:
        """Objects ``u`` with a morphism ``v -> u`` (including ``v``)."""
        return self._above[v]

    def below(self, u: ViewObject) -> list[ViewObject]:
        """Objects ``v`` with a morphism ``v -> u`` (including ``u``)."""
        return self._below.get(u, [])

    def by_shape(self, shape) -> list[ViewObject]:
        shape = ViewShape.of(shape)
        return [v for v in self.objects if v.shape == shape]

    def morphisms(self) -> list[ViewMorphism]:
        return [ViewMorphism(v, u) for v in self.objects for u in self.above(v)]

    def meet(self, v: ViewObject, w: ViewObject) -> ViewObject | None:
        """Greatest common refinement of two views, if it is an object."""
        key = (v, w)
        if key not in self._meets:
            self._meets[key] = self._meet(v, w)
        return self._meets[key]

    def _meet(self, v, w):
        dv, dw = v.as_dict(), w.as_dict()
        if any(dv[c] != dw[c] for c in dv.keys() & dw.keys()):
            return None
        merged = {**dv, **dw}
        shape = ViewShape(tuple(merged))
        m = ViewObject(shape, tuple(merged[c] for c in shape.components))
        return m if m in self._index else None

    def families_on(self, u: ViewObject) -> list[CoveringFamily]:
        return self._on.get(u, [])

    # -- coverage
    def generates_covering(self, members, target: ViewObject) -> bool:
        """Does the sieve generated by ``members`` contain a declared sieve on ``target``?"""
        mset = members if isinstance(members, (set, frozenset)) else set(members)
        return any(self._sieve_contains(mset, fam) for fam in self.families_on(target))

    def _sieve_contains(self, mset: set, fam: CoveringFamily) -> bool:
        return all(any(u in mset for u in self._above[d]) for d in fam.members)

    def pullback(self, fam: CoveringFamily, v: ViewObject) -> CoveringFamily:
        """Base change of ``fam`` along the morphism ``v -> fam.target``."""
        return CoveringFamily(v, tuple(self.pullback_members(fam, v)), "pullback")

    def pullback_members(self, fam: CoveringFamily, v: ViewObject) -> set[ViewObject]:
        meets = (self.meet(x, v) for x in fam.members)
        return {m for m in meets if m is not None}

    def minimal_families(self, u: ViewObject) -> list[CoveringFamily]:
        """Declared families on ``u`` whose sieve is minimal (first of equals kept)."""
        fams = self.families_on(u)
        sieve_le = lambda f, g: self._sieve_contains(set(g.members), f)  # noqa: E731
        minimal = []
        for i, f in enumerate(fams):
            if not any(
                sieve_le(g, f) and (not sieve_le(f, g) or j < i)
                for j, g in enumerate(fams)
                if j != i
            ):
                minimal.append(f)
        return minimal

    def composites(self, fam: CoveringFamily):
        """Families obtained by covering every member of ``fam`` by a declared covering.

        Only minimal coverings of each member are used: any other choice
        yields a larger sieve, which is covering whenever the minimal one is.
        """
        options = [self.minimal_families(m) for m in fam.members]
        if any(not o for o in options):
            return
        if prod(len(o) for o in options) > MAX_COMPOSITE_CHOICES:
            raise DomainError(f"too many composite choices for {fam}")
        for choice in itertools.product(*options):
            members = {x for f in choice for x in f.members}
            yield CoveringFamily(fam.target, tuple(members), "composite")

    def with_families(self, families) -> AttackerSite:
        """Same category, different declaration (indices are shared)."""
        site = copy.copy(self)
        site._set_families(tuple(families))
        return site

    def without_family(self, fam: CoveringFamily) -> AttackerSite:
        return self.with_families(f for f in self.families if not f.same_members(fam))


def enumerate_views(protocol: SigmaProtocol, statement: Statement) -> list[ViewObject]:
    """Every consistent view of every shape, sorted by shape then values."""
    protocol.params.check_scale()
    accepting = protocol.accepting_transcripts(statement)
    views = {ViewObject.of_transcript(t, s) for t in accepting for s in ALL_SHAPES}
    return sorted(views, key=ViewObject.sort_key)


def quarantine_counts(protocol: SigmaProtocol, objects) -> dict[str, int]:
    """Per shape, how many candidate views were pruned as inconsistent."""
    domain = {"a": len(protocol.commitment_domain()), "e": protocol.q, "z": protocol.q}
    present = defaultdict(int)
    for v in objects:
        present[str(v.shape)] += 1
    return {
        str(s): prod(domain[c] for c in s.components) - present[str(s)]
        for s in ALL_SHAPES
    }


def quarantined_views(site: AttackerSite, shape):
    """Lazily list the inconsistent candidate views of ``shape``."""
    shape = ViewShape.of(shape)
    domain = {"a": site.protocol.commitment_domain(), "e": range(site.protocol.q), "z": range(site.protocol.q)}
    for values in itertools.product(*(domain[c] for c in shape.components)):
        v = ViewObject(shape, values)
        if v not in site:
            yield v


def build_site(protocol: SigmaProtocol, statement: Statement) -> AttackerSite:
    """Enumerate views and declare the standard coverings."""
    objects = enumerate_views(protocol, statement)
    bare = AttackerSite(protocol, statement, tuple(objects), (), quarantine_counts(protocol, objects))
    return declare_standard_coverings(bare)


def declare_standard_coverings(site: AttackerSite) -> AttackerSite:
    """Declare identity, commitment and challenge families, then close.

    * identity ``{U -> U}`` for every object;
    * for each commitment view ``a``: ``{(a,e) -> a}_e`` together with
      ``{(a,z) -> a}_z``;
    * for each ``(a,e)``: the full views above it, ``{(a,e,z) -> (a,e)}``.

    The closure adds every pullback and composite that the declaration
    does not already cover, until :func:`check_topology_axioms` has nothing
    to report.
    """
    fams = [CoveringFamily(u, (u,), "identity") for u in site.objects]
    by_target = defaultdict(list)
    for v in site.objects:
        if len(v.shape) == 2 and "a" in v.shape:
            by_target[v.restrict(COMMIT)].append(v)
    for a in site.by_shape(COMMIT):
        fams.append(CoveringFamily(a, tuple(by_target[a]), "commitment"))
    for ae in site.by_shape("a,e"):
        full = [v for v in site.below(ae) if v.shape == FULL]
        fams.append(CoveringFamily(ae, tuple(full), "challenge"))
    return close_coverings(site.with_families(fams))


def close_coverings(site: AttackerSite) -> AttackerSite:
    while True:
        added = []
        seen = {f.key() for f in site.families}

        def consider(fam, target):
            if fam.key() not in seen and not site.generates_covering(fam.members, target):
                seen.add(fam.key())
                added.append(fam)

        for fam in site.families:
            if fam.is_identity:
                continue
            for v in site.below(fam.target):
                if v != fam.target:
                    consider(site.pullback(fam, v), v)
            for comp in site.composites(fam):
                consider(comp, fam.target)
        if not added:
            return site
        site = site.with_families(list(site.families) + added)


# -- axioms -------------------------------------------------------------------

@dataclass
class AxiomReport:
    identity_violations: list = field(default_factory=list)
    stability_violations: list = field(default_factory=list)
    transitivity_violations: list = field(default_factory=list)
    families_checked: int = 0
    morphisms_checked: int = 0

    @property
    def passed(self) -> bool:
        return not (self.identity_violations or self.stability_violations or self.transitivity_violations)

    def to_record(self) -> dict:
        return {
            "families_checked": self.families_checked,
            "morphisms_checked": self.morphisms_checked,
            "identity": {"passed": not self.identity_violations,
                         "violations": [str(v) for v in self.identity_violations]},
            "stability": {"passed": not self.stability_violations,
                          "violations": [f"{f} pulled back to {v}" for f, v in self.stability_violations]},
            "transitivity": {"passed": not self.transitivity_violations,
                             "violations": [f"{f} refined by {len(c.members)}-member composite"
                                            for f, c in self.transitivity_violations]},
        }


def check_topology_axioms(site: AttackerSite, first_only: bool = False) -> AxiomReport:
    """Check identity, stability and transitivity on the finite site.

    Every violation is recorded with the offending family; ``first_only``
    stops at the first one (used by fault-injection sweeps). The only
    isomorphisms of the (thin, skeletal) view category are identities, so
    the identity axiom reduces to ``{U -> U}`` being covering for every U.
    """
    report = AxiomReport(families_checked=len(site.families))

    def done():
        return first_only and not report.passed

    for u in site.objects:
        if not site.generates_covering([u], u):
            report.identity_violations.append(u)
            if done():
                return report
    for fam in site.families:
        contains_target = fam.target in fam.members
        for v in site.below(fam.target):
            report.morphisms_checked += 1
            if contains_target:
                # the pullback contains id_v, so it generates the maximal sieve
                ok = bool(site.families_on(v))
            else:
                ok = site.generates_covering(site.pullback_members(fam, v), v)
            if not ok:
                report.stability_violations.append((fam, v))
                if done():
                    return report
        for comp in site.composites(fam):
            if not site.generates_covering(comp.members, fam.target):
                report.transitivity_violations.append((fam, comp))
                if done():
                    return report
    return report


def removal_sweep(site: AttackerSite) -> dict:
    """Remove each non-identity family in turn and re-check the axioms.

    Returns ``{family: detected}`` where detected means some axiom fails
    on the reduced declaration.
    """
    return {
        fam: not check_topology_axioms(site.without_family(fam), first_only=True).passed
        for fam in site.families
        if not fam.is_identity
    }


# -- coverings as simulation ---------------------------------------------------

@dataclass(frozen=True)
class CoveringVerdict:
    family: CoveringFamily
    distance: Fraction
    epsilon: Fraction

    @property
    def passed(self) -> bool:
        return self.distance <= self.epsilon


def validate_covering_by_simulation(family: CoveringFamily, real, simulated, epsilon=Fraction(0)) -> CoveringVerdict:
    """Compare the real distribution over ``family.target`` with the one
    glued from simulator data on the members (see ``indist_lab.amalgamate``).
    """
    from .indist_lab import amalgamate, condition_on_view, statistical_distance

    target_real = condition_on_view(real, family.target)
    try:
        glued = amalgamate(simulated, family.members)
    except DomainError:
        return CoveringVerdict(family, Fraction(1), Fraction(epsilon))
    return CoveringVerdict(family, statistical_distance(target_real, glued), Fraction(epsilon))


# -- dump -----------------------------------------------------------------

def dump_site(site: AttackerSite) -> str:
    p = site.protocol.params
    lines = [f"site protocol={site.protocol.name} p={p.p} q={p.q} g={p.g} y={_fmt(site.statement.y)}",
             f"objects {len(site.objects)}"]
    for shape in ALL_SHAPES:
        objs = site.by_shape(shape)
        lines.append(f"shape {shape} count={len(objs)} quarantined={site.quarantine_counts.get(str(shape), 0)}")
        lines.extend(f"  {v}" for v in objs)
    lines.append(f"families {len(site.families)}")
    for fam in site.families:
        lines.append(f"family {fam.label} on {fam.target} members={len(fam.members)}")
        lines.extend(f"  {m}" for m in fam.members)
    return "\n".join(lines) + "\n"


def shift_view(protocol: SigmaProtocol, view: ViewObject, t: int) -> ViewObject:
    """Image of a view under nonce re-randomization by ``t``."""
    d = view.as_dict()
    if "a" in d:
        d["a"] = protocol.shift_commitment(d["a"], t)
    if "z" in d:
        d["z"] = (d["z"] + t) % protocol.q
    return ViewObject(view.shape, tuple(d[c] for c in view.shape.components))
