from fractions import Fraction

import pytest

from conftest import SMALL
from sigmasite.attacker_site import COMMIT, EMPTY, FULL, ViewObject, ViewShape, build_site
from sigmasite.exceptions import DomainError
from sigmasite.indist_lab import constant_response_simulator, real_distribution, simulated_distribution
from sigmasite.sigma_core import ChaumPedersen, Schnorr
from sigmasite.transcript_sheaf import (
    act,
    build_presheaf,
    check_functoriality,
    check_sheaf_distributional,
    check_sheaf_literal,
    check_torsor,
    global_section_analysis,
    literal_fiber,
    literal_section,
    local_triviality_witness,
    simulator_section,
)


def fiber_oracle(F, view):
    """States (r, e) whose honest transcript agrees with ``view``."""
    return {
        (r, e)
        for r in range(F.protocol.q) for e in range(F.protocol.q)
        if view.agrees(F.protocol.honest_transcript(F.witness, r, e))
    }


def test_fibers_match_oracle(small_sheaf, small_site):
    for v in small_site.objects:
        assert small_sheaf[v] == fiber_oracle(small_sheaf, v)


def test_fiber_sizes_by_shape(small_sheaf, small_site):
    expected = {"{}": 121, "{a}": 11, "{e}": 11, "{z}": 11, "{a,e}": 1, "{a,z}": 1, "{e,z}": 1, "{a,e,z}": 1}
    for v in small_site.objects:
        assert len(small_sheaf[v]) == expected[str(v.shape)]


def test_restriction_is_inclusion(small_sheaf, small_site):
    for v in small_site.objects:
        for u in small_site.above(v):
            assert small_sheaf[v] <= small_sheaf[u]


def test_functoriality_passes(small_sheaf):
    rep = check_functoriality(small_sheaf)
    assert rep.passed and rep.pairs_checked > rep.morphisms_checked > 0


def test_corrupted_restriction_is_caught(small_sheaf, small_site):
    v = small_site.by_shape(FULL)[0]
    u = v.restrict(COMMIT)
    (s,) = small_sheaf[v]
    other = next(x for x in small_sheaf[u] if x != s)
    bad = small_sheaf.with_corrupted_restriction(v, u, {s: other})
    rep = check_functoriality(bad)
    assert any("composition" in m for m in rep.violations)


def test_restriction_outside_fiber_is_caught(small_sheaf, small_site):
    v = small_site.by_shape(FULL)[0]
    u = v.restrict("a,e")
    (s,) = small_sheaf[v]
    bad = small_sheaf.with_corrupted_restriction(v, u, {s: (99, 99)})
    assert any("outside" in m for m in check_functoriality(bad).violations)


def test_literal_projection(small_sheaf, small_site):
    a = small_site.by_shape(COMMIT)[0]
    ae = next(v for v in small_site.below(a) if v.shape == ViewShape.of("ae"))
    full = next(v for v in small_site.below(ae) if v.shape == FULL)
    (s,) = small_sheaf[ae]
    r, e = s
    assert literal_section(small_sheaf, ae, s) == (r, (r + 3 * e) % 11)
    assert literal_section(small_sheaf, a, s) == (r,)
    assert literal_section(small_sheaf, full, s) == ()
    assert len(literal_fiber(small_sheaf, ViewObject(EMPTY, ()))) == 11


def test_literal_gluing_commitment_coverings(small_sheaf):
    rep = check_sheaf_literal(small_sheaf)
    commit = [c for c in rep.counts if c.family.label == "commitment"]
    assert len(commit) == 11
    assert all((c.matching, c.gluable, c.non_gluable, c.multi_gluable) == (1, 1, 0, 0) for c in commit)
    assert rep.passed


def test_distributional_gluing(schnorr_small, small_sheaf):
    pr, st, w = schnorr_small
    real, sim = real_distribution(pr, w), simulated_distribution(pr, st)
    rep = check_sheaf_distributional(small_sheaf, real, sim)
    assert rep.passed and rep.max_distance == 0
    faulty = simulated_distribution(pr, st, constant_response_simulator(pr))
    bad = check_sheaf_distributional(small_sheaf, real, faulty)
    assert not bad.passed and bad.max_distance > 0
    assert check_sheaf_distributional(small_sheaf, real, faulty, epsilon=1).support_violations == []


def test_action_oracle():
    assert act(11, 3, (9, 4)) == (1, 4)
    for s in [(r, e) for r in range(11) for e in range(11)]:
        assert act(11, 0, s) == s
        assert act(11, 5, act(11, 7, s)) == act(11, 1, s)


def test_torsor_report(small_sheaf):
    rep = check_torsor(small_sheaf)
    summary = rep.shape_summary()
    assert summary["{e}"] == {"views": 11, "invariant": True, "free": True, "transitive": True, "orbits_per_view": [1]}
    # the empty view carries 11 orbits (one per challenge), so it is free but not transitive
    assert summary["{}"]["free"] and not summary["{}"]["transitive"]
    # a shift moves z, so fibers over views holding z are not stable
    assert not summary["{z}"]["invariant"]
    assert rep.fixed_challenge_torsor and rep.base_change_ok and rep.passed


def test_local_triviality(small_sheaf):
    rep = local_triviality_witness(small_sheaf)
    assert rep.passed and rep.members_checked == rep.trivialized > 0
    pr = small_sheaf.protocol
    for m, t in rep.sections.items():
        assert m.agrees(t) and pr.verify(small_sheaf.statement, t)


def test_local_triviality_without_witness_access(small_sheaf, small_site):
    # the simulator never sees the witness, but still lands on every member
    view = small_site.by_shape("a,e")[5]
    t = simulator_section(small_sheaf.protocol, small_sheaf.statement, view)
    assert view.agrees(t)


def test_constant_z_simulator_cannot_trivialize(small_sheaf):
    sim = constant_response_simulator(small_sheaf.protocol)
    rep = local_triviality_witness(small_sheaf, simulator=sim)
    assert not rep.passed and rep.failures


def test_global_sections(small_sheaf):
    rep = global_section_analysis(small_sheaf)
    assert rep.global_sections == 121 * 11**33
    assert not rep.degenerate
    assert rep.attempts == rep.recoveries == 1210
    assert all(ws == {3} for ws in rep.extracted.values()) and len(rep.extracted) == 11


def test_global_section_analysis_flags_degenerate_site(schnorr_small, small_site):
    pr, st, w = schnorr_small
    keep_e = 0
    objs = [v for v in small_site.objects if "e" not in v.shape or v.value("e") == keep_e]
    from sigmasite.attacker_site import AttackerSite

    site = AttackerSite(pr, st, tuple(objs))
    F = build_presheaf(pr, st, w, site)
    rep = global_section_analysis(F)
    assert rep.degenerate and rep.attempts == 0 and rep.passed


def test_wrong_witness_rejected(schnorr_small, small_site):
    pr, st, _ = schnorr_small
    with pytest.raises(DomainError):
        build_presheaf(pr, st, pr.keygen(4)[1], small_site)


@pytest.mark.parametrize("cls", [Schnorr, ChaumPedersen])
def test_full_pipeline_other_witnesses(cls):
    pr = cls(SMALL)
    for x in (0, 7):
        st, w = pr.keygen(x)
        F = build_presheaf(pr, st, w, build_site(pr, st))
        assert check_functoriality(F).passed
        rep = global_section_analysis(F)
        assert rep.recoveries == 1210 and rep.extracted and all(v == {x} for v in rep.extracted.values())
        assert check_sheaf_distributional(F, real_distribution(pr, w), simulated_distribution(pr, st)).max_distance == Fraction(0)
