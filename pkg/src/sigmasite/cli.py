"""Command-line front end: ``sigmasite {suite,demo,site,dist}``.

Exit status is 0 when every selected check passes, 1 when one fails and
2 for configuration errors.
"""
from __future__ import annotations

import argparse
import random
import sys
from importlib import resources

from . import attacker_site as site_mod
from . import indist_lab as lab
from .attacker_site import ViewShape
from .exceptions import ConfigError, SigmaSiteError
from .sigma_core import dump_transcript, make_protocol
from .suite import CHECKS, emit_report, parse_config, parse_epsilon, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def default_config_text() -> str:
    return resources.files("sigmasite").joinpath("data/schnorr_default.json").read_text()


def _load(path):
    if path is None:
        return parse_config(default_config_text())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([(path, exc.strerror or str(exc))]) from None
    return parse_config(text)


def _setup(config):
    protocol = make_protocol(config.protocol, config.params, config.h)
    statement, witness = protocol.keygen(config.x)
    return protocol, statement, witness


def cmd_suite(args, out):
    config = _load(args.config)
    changes = {}
    if args.epsilon is not None:
        try:
            changes["epsilon"] = parse_epsilon(args.epsilon)
        except ValueError as exc:
            raise ConfigError([("--epsilon", str(exc))]) from None
    if args.checks is not None:
        names = [c for c in args.checks.split(",") if c]
        unknown = [c for c in names if c not in CHECKS]
        if unknown:
            raise ConfigError([("--checks", f"unknown checks {unknown}")])
        changes["checks"] = tuple(c for c in CHECKS if c in names)
    if changes:
        from dataclasses import replace

        config = replace(config, **changes)
    report = run_suite(config)
    out.write(emit_report(report, args.emit or config.emit))
    return EXIT_PASS if report.overall == "pass" else EXIT_FAIL


def cmd_demo(args, out):
    config = _load(args.config)
    protocol, statement, witness = _setup(config)
    rng = random.Random(args.seed)
    q = protocol.q
    r, e = rng.randrange(q), rng.randrange(q)
    se, sz = rng.randrange(q), rng.randrange(q)
    honest = protocol.honest_transcript(witness, r, e)
    simulated = protocol.simulate(statement, se, sz)
    ok = True
    for label, t in (("honest", honest), ("simulated", simulated)):
        accepted = protocol.verify(statement, t)
        ok &= accepted
        out.write(f"{label:<9} {'accept' if accepted else 'reject'} {dump_transcript(protocol, statement, t)}\n")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_site(args, out):
    config = _load(args.config)
    protocol, statement, _ = _setup(config)
    out.write(site_mod.dump_site(site_mod.build_site(protocol, statement)))
    return EXIT_PASS


def cmd_dist(args, out):
    config = _load(args.config)
    try:
        shape = ViewShape.of(args.shape)
    except SigmaSiteError as exc:
        raise ConfigError([("--shape", str(exc))]) from None
    protocol, statement, witness = _setup(config)
    real = lab.real_distribution(protocol, witness)
    simulator = (
        lab.constant_response_simulator(protocol)
        if config.fault == "constant_z_simulator"
        else protocol.simulate
    )
    sim = lab.simulated_distribution(protocol, statement, simulator)
    rm, sm = lab.marginal_on_shape(real, shape), lab.marginal_on_shape(sim, shape)
    d = lab.statistical_distance(rm, sm)
    out.write(f"# real marginal on {shape}\n{rm.dump()}")
    out.write(f"# simulated marginal on {shape}\n{sm.dump()}")
    out.write(f"# distance {d.numerator}/{d.denominator}\n")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigmasite", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", help="JSON config file (defaults to the bundled Schnorr example)")
        return p

    s = with_config(sub.add_parser("suite", help="run the check suite"))
    s.add_argument("--emit", choices=("machine", "human"))
    s.add_argument("--epsilon", help="tolerance as num/den")
    s.add_argument("--checks", help="comma-separated subset of: " + ",".join(CHECKS))
    s.set_defaults(func=cmd_suite)

    d = with_config(sub.add_parser("demo", help="sample one honest and one simulated transcript"))
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_demo)

    with_config(sub.add_parser("site", help="dump views and covering families")).set_defaults(func=cmd_site)

    t = with_config(sub.add_parser("dist", help="real vs simulated marginal on a view shape"))
    t.add_argument("--shape", default="a,e,z")
    t.set_defaults(func=cmd_dist)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        for loc, msg in exc.errors:
            err.write(f"config error: {loc}: {msg}\n")
        return EXIT_CONFIG
    except SigmaSiteError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
