"""Suite configuration, execution and report rendering."""
from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import attacker_site as site_mod
from . import indist_lab as lab
from . import transcript_sheaf as sheaf
from .exceptions import ConfigError, DomainError
from .group_arith import GroupParams, is_prime, validate_group
from .sigma_core import make_protocol

CHECKS = (
    "group",
    "completeness",
    "tamper",
    "hvzk",
    "topology",
    "covering",
    "functoriality",
    "gluing_literal",
    "gluing_distributional",
    "torsor",
    "local_triviality",
    "extraction",
)
INFORMATIONAL = {"gluing_literal"}
FAULTS = ("constant_z_simulator",)
KEYS = {"protocol", "p", "q", "g", "h", "x", "seed", "epsilon", "checks", "emit", "fault"}
COUNTEREXAMPLE_LIMIT = 20


@dataclass(frozen=True)
class SuiteConfig:
    protocol: str
    p: int
    q: int
    g: int
    x: int
    h: int | None = None
    seed: int | None = None
    x_random: bool = False
    epsilon: Fraction = Fraction(0)
    checks: tuple[str, ...] = CHECKS
    emit: str = "machine"
    fault: str | None = None

    @property
    def params(self) -> GroupParams:
        return GroupParams(self.p, self.q, self.g)


def _as_int(value, key, errors):
    if isinstance(value, bool):
        errors.append((key, "expected an integer"))
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value)
    errors.append((key, f"expected a decimal integer, got {value!r}"))
    return None


def parse_epsilon(text) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into a non-negative Fraction."""
    s = str(text).strip()
    num, sep, den = s.partition("/")
    if not num.strip().lstrip("-").isdigit() or (sep and not den.strip().isdigit()):
        raise ValueError(f"epsilon must look like num/den, got {text!r}")
    eps = Fraction(int(num), int(den) if sep else 1)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    return eps


def parse_config(text: str) -> SuiteConfig:
    """Parse a JSON config; raise ConfigError listing every problem found."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([(f"line {exc.lineno} col {exc.colno}", exc.msg)]) from None
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "config must be a JSON object")])
    errors = []
    for key in sorted(set(raw) - KEYS):
        errors.append((key, "unknown key"))
    for key in ("protocol", "p", "q", "g", "x"):
        if key not in raw:
            errors.append((key, "missing required key"))
    protocol = raw.get("protocol")
    if protocol is not None and protocol not in ("schnorr", "chaum_pedersen"):
        errors.append(("protocol", f"unknown protocol {protocol!r}"))
    p, q, g = (_as_int(raw[k], k, errors) if k in raw else None for k in ("p", "q", "g"))
    h = _as_int(raw["h"], "h", errors) if raw.get("h") is not None else None
    if h is not None and protocol == "schnorr":
        errors.append(("h", "second generator only applies to chaum_pedersen"))
    seed = _as_int(raw["seed"], "seed", errors) if raw.get("seed") is not None else None

    if None not in (p, q, g):
        if not is_prime(q):
            errors.append(("q", "q not prime"))
        if not is_prime(p):
            errors.append(("p", "p not prime"))
        for failure in validate_group(GroupParams(p, q, g)).failures:
            if failure not in ("p not prime", "q not prime"):
                errors.append(("g" if "generator" in failure else "q", failure))
        if h is not None and not GroupParams(p, q, g).contains(h):
            errors.append(("h", "h is not in the subgroup"))

    x_random = False
    x = None
    if "x" in raw:
        if raw["x"] == "random":
            x_random = True
            if seed is None:
                errors.append(("seed", "seed required when x is random"))
            elif q is not None and q > 0:
                x = random.Random(seed).randrange(q)
        else:
            x = _as_int(raw["x"], "x", errors)
            if x is not None and q is not None and not 0 <= x < q:
                errors.append(("x", f"witness must lie in [0, {q})"))

    epsilon = Fraction(0)
    if "epsilon" in raw:
        try:
            epsilon = parse_epsilon(raw["epsilon"])
        except ValueError as exc:
            errors.append(("epsilon", str(exc)))

    checks = CHECKS
    if "checks" in raw:
        if not isinstance(raw["checks"], list):
            errors.append(("checks", "expected a list of check names"))
        else:
            unknown = [c for c in raw["checks"] if c not in CHECKS]
            if unknown:
                errors.append(("checks", f"unknown checks {unknown}"))
            checks = tuple(c for c in CHECKS if c in raw["checks"])

    emit = raw.get("emit", "machine")
    if emit not in ("machine", "human"):
        errors.append(("emit", "expected machine or human"))
    fault = raw.get("fault")
    if fault is not None and fault not in FAULTS:
        errors.append(("fault", f"unknown fault {fault!r}"))

    if errors:
        raise ConfigError(errors)
    return SuiteConfig(protocol, p, q, g, x, h, seed, x_random, epsilon, checks, emit, fault)


# -- report ---------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    verdict: str  # pass | fail | info
    details: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    seconds: float = 0.0


@dataclass
class SuiteReport:
    config: SuiteConfig
    checks: list = field(default_factory=list)

    @property
    def overall(self) -> str:
        return "fail" if any(c.verdict == "fail" for c in self.checks) else "pass"

    @property
    def degenerate(self) -> bool:
        return not self.checks

    def check(self, name) -> CheckResult:
        return next(c for c in self.checks if c.name == name)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class _Context:
    """Lazily built artifacts shared between checks."""

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.protocol = make_protocol(config.protocol, config.params, config.h)
        self.statement, self.witness = self.protocol.keygen(config.x)
        self.simulator = (
            lab.constant_response_simulator(self.protocol)
            if config.fault == "constant_z_simulator"
            else self.protocol.simulate
        )
        self._site = self._F = self._real = self._sim = None

    @property
    def site(self):
        if self._site is None:
            self._site = site_mod.build_site(self.protocol, self.statement)
        return self._site

    @property
    def F(self):
        if self._F is None:
            self._F = sheaf.build_presheaf(self.protocol, self.statement, self.witness, self.site)
        return self._F

    @property
    def real(self):
        if self._real is None:
            self._real = lab.real_distribution(self.protocol, self.witness)
        return self._real

    @property
    def sim(self):
        if self._sim is None:
            self._sim = lab.simulated_distribution(self.protocol, self.statement, self.simulator)
        return self._sim


def _check_group(ctx):
    report = validate_group(ctx.config.params)
    return report.valid, {"p": ctx.config.p, "q": ctx.config.q, "g": ctx.config.g}, list(report.failures)


def _check_completeness(ctx):
    pr, q = ctx.protocol, ctx.protocol.q
    bad = [
        (r, e) for r in range(q) for e in range(q)
        if not pr.verify(ctx.statement, pr.honest_transcript(ctx.witness, r, e))
    ]
    return not bad, {"transcripts": q * q, "accepted": q * q - len(bad)}, bad


def _check_tamper(ctx):
    pr, q = ctx.protocol, ctx.protocol.q
    domain = pr.commitment_domain()
    tried = 0
    false_accepts = []
    for r in range(q):
        for e in range(q):
            t = pr.honest_transcript(ctx.witness, r, e)
            for alt in tamper_variants(t, domain, q):
                tried += 1
                if pr.verify(ctx.statement, alt):
                    false_accepts.append(alt)
    return not false_accepts, {"substitutions": tried, "false_accepts": len(false_accepts)}, false_accepts


def tamper_variants(t, commitment_domain, q):
    """Every transcript differing from ``t`` in exactly one component."""
    from .sigma_core import Transcript

    for a in commitment_domain:
        if a != t.a:
            yield Transcript(a, t.e, t.z)
    for e in range(q):
        if e != t.e:
            yield Transcript(t.a, e, t.z)
    for z in range(q):
        if z != t.z:
            yield Transcript(t.a, t.e, z)


def _check_hvzk(ctx):
    d = lab.statistical_distance(ctx.real, ctx.sim)
    return d <= ctx.config.epsilon, {"distance": _frac(d), "epsilon": _frac(ctx.config.epsilon),
                                     "outcomes_real": len(ctx.real), "outcomes_simulated": len(ctx.sim)}, []


def _check_topology(ctx):
    rep = site_mod.check_topology_axioms(ctx.site)
    details = rep.to_record()
    details["objects"] = len(ctx.site.objects)
    details["quarantined"] = dict(ctx.site.quarantine_counts)
    return rep.passed, details, (rep.identity_violations + [f for f, _ in rep.stability_violations]
                                 + [f for f, _ in rep.transitivity_violations])


def _check_covering(ctx):
    verdicts = [
        site_mod.validate_covering_by_simulation(f, ctx.real, ctx.sim, ctx.config.epsilon)
        for f in ctx.site.families
    ]
    failed = [v for v in verdicts if not v.passed]
    worst = max((v.distance for v in verdicts), default=Fraction(0))
    return not failed, {"families": len(verdicts), "max_distance": _frac(worst)}, [
        f"{v.family} distance {_frac(v.distance)}" for v in failed
    ]


def _check_functoriality(ctx):
    rep = sheaf.check_functoriality(ctx.F)
    return rep.passed, rep.to_record(), rep.violations


def _check_gluing_literal(ctx):
    rep = sheaf.check_sheaf_literal(ctx.F)
    bad = [c.to_record() for c in rep.counts if c.non_gluable or c.multi_gluable or c.skipped]
    return rep.passed, rep.to_record(), bad


def _check_gluing_distributional(ctx):
    rep = sheaf.check_sheaf_distributional(ctx.F, ctx.real, ctx.sim, ctx.config.epsilon)
    failures = [f"{v.family} distance {_frac(v.distance)}" for v in rep.failures()]
    return rep.passed, rep.to_record(), failures + rep.support_violations


def _check_torsor(ctx):
    rep = sheaf.check_torsor(ctx.F)
    return rep.passed, rep.to_record(), rep.violations


def _check_local_triviality(ctx):
    rep = sheaf.local_triviality_witness(ctx.F, simulator=ctx.simulator)
    return rep.passed, rep.to_record(), rep.failures


def _check_extraction(ctx):
    rep = sheaf.global_section_analysis(ctx.F)
    return rep.passed, rep.to_record(), rep.errors


_RUNNERS = {
    "group": _check_group,
    "completeness": _check_completeness,
    "tamper": _check_tamper,
    "hvzk": _check_hvzk,
    "topology": _check_topology,
    "covering": _check_covering,
    "functoriality": _check_functoriality,
    "gluing_literal": _check_gluing_literal,
    "gluing_distributional": _check_gluing_distributional,
    "torsor": _check_torsor,
    "local_triviality": _check_local_triviality,
    "extraction": _check_extraction,
}


def run_suite(config: SuiteConfig) -> SuiteReport:
    """Run the selected checks in their canonical order."""
    config.params.check_scale()
    report = SuiteReport(config)
    if not config.checks:
        return report
    ctx = _Context(config)
    for name in CHECKS:
        if name not in config.checks:
            continue
        start = time.perf_counter()
        ok, details, counterexamples = _RUNNERS[name](ctx)
        verdict = "info" if name in INFORMATIONAL else ("pass" if ok else "fail")
        report.checks.append(CheckResult(
            name, verdict, details,
            [str(c) for c in counterexamples[:COUNTEREXAMPLE_LIMIT]],
            time.perf_counter() - start,
        ))
    return report


# -- rendering -----------------------------------------------------------

def _stringify(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return _frac(obj)
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    return obj if isinstance(obj, str) else str(obj)


def report_record(report: SuiteReport) -> dict:
    c = report.config
    return _stringify({
        "config": {
            "protocol": c.protocol, "p": c.p, "q": c.q, "g": c.g, "h": c.h,
            "x": c.x, "x_random": c.x_random, "seed": c.seed,
            "epsilon": c.epsilon, "fault": c.fault,
        },
        "overall": report.overall,
        "degenerate": report.degenerate,
        "checks": [
            {"name": ch.name, "verdict": ch.verdict, "details": ch.details,
             "counterexamples": ch.counterexamples}
            for ch in report.checks
        ],
    })


def emit_report(report: SuiteReport, fmt: str = "machine") -> str:
    """Machine format is JSON with sorted keys and no timings (byte-stable)."""
    if fmt == "machine":
        return json.dumps(report_record(report), sort_keys=True, indent=2) + "\n"
    if fmt != "human":
        raise DomainError(f"unknown report format {fmt!r}")
    c = report.config
    lines = [f"{c.protocol} over p={c.p} q={c.q} g={c.g}" + (f" h={c.h}" if c.h else "")
             + f", witness x={c.x}, epsilon={_frac(c.epsilon)}" + (f", fault={c.fault}" if c.fault else "")]
    if report.degenerate:
        lines.append("no checks selected (degenerate run)")
    for ch in report.checks:
        summary = ", ".join(f"{k}={v}" for k, v in ch.details.items() if not isinstance(v, (dict, list)))
        lines.append(f"  [{ch.verdict.upper():4}] {ch.name:<22} {ch.seconds:6.2f}s  {summary}")
        for ce in ch.counterexamples[:5]:
            lines.append(f"         ! {ce}")
    lines.append(f"overall: {report.overall}")
    return "\n".join(lines) + "\n"
