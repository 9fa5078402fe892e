import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from sigmasite.cli import default_config_text, main
from sigmasite.exceptions import ConfigError
from sigmasite.suite import CHECKS, emit_report, parse_config, parse_epsilon, run_suite

BASE = {"protocol": "schnorr", "p": "23", "q": "11", "g": "2", "x": "3"}


def cfg(**over):
    d = dict(BASE)
    d.update(over)
    return json.dumps({k: v for k, v in d.items() if v is not None})


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="c.json"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_defaults():
    c = parse_config(cfg())
    assert (c.p, c.q, c.g, c.x, c.epsilon, c.checks, c.emit) == (23, 11, 2, 3, Fraction(0), CHECKS, "machine")


def test_parse_accepts_plain_integers_too():
    assert parse_config(json.dumps({**BASE, "p": 23, "x": 3})).p == 23


def test_random_witness_is_seeded():
    a = parse_config(cfg(x="random", seed="9"))
    b = parse_config(cfg(x="random", seed="9"))
    assert a.x == b.x and a.x_random and 0 <= a.x < 11


def test_config_errors_are_located():
    with pytest.raises(ConfigError) as exc:
        parse_config(cfg(q="12", x="random", extra=1))
    errors = exc.value.errors
    assert ("extra", "unknown key") in errors
    assert ("q", "q not prime") in errors
    assert ("seed", "seed required when x is random") in errors
    assert "q: q not prime" in str(exc.value)


@pytest.mark.parametrize(
    "over, loc",
    [
        ({"protocol": "okamoto"}, "protocol"),
        ({"p": "abc"}, "p"),
        ({"g": "5"}, "g"),
        ({"x": "11"}, "x"),
        ({"epsilon": "1/0x"}, "epsilon"),
        ({"checks": ["nope"]}, "checks"),
        ({"emit": "xml"}, "emit"),
        ({"fault": "other"}, "fault"),
        ({"h": "4"}, "h"),
        ({"x": None}, "x"),
    ],
)
def test_single_config_error(over, loc):
    with pytest.raises(ConfigError) as exc:
        parse_config(cfg(**over))
    assert loc in dict(exc.value.errors)


def test_malformed_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


def test_parse_epsilon():
    assert parse_epsilon("1/4") == Fraction(1, 4)
    assert parse_epsilon("0") == 0
    for bad in ("-1/2", "x", "1/", "0.5"):
        with pytest.raises(ValueError):
            parse_epsilon(bad)


def test_bundled_config_parses():
    c = parse_config(default_config_text())
    assert (c.protocol, c.p, c.q, c.g, c.x) == ("schnorr", 23, 11, 2, 3)


def test_empty_check_selection_is_degenerate_pass():
    report = run_suite(parse_config(cfg(checks=[])))
    assert report.overall == "pass" and report.degenerate
    assert json.loads(emit_report(report))["degenerate"] is True


def test_suite_machine_report_schema(tmp_path):
    code, out, _ = run(["suite", "--config", write(tmp_path, cfg())])
    assert code == 0
    rec = json.loads(out)
    assert rec["overall"] == "pass"
    assert [c["name"] for c in rec["checks"]] == list(CHECKS)
    assert rec["config"]["p"] == "23"
    assert "seconds" not in out
    hvzk = next(c for c in rec["checks"] if c["name"] == "hvzk")
    assert hvzk["details"]["distance"] == "0/1"


def test_machine_integers_are_strings(tmp_path):
    _, out, _ = run(["suite", "--config", write(tmp_path, cfg()), "--checks", "completeness"])

    def walk(o):
        if isinstance(o, dict):
            for v in o.values():
                walk(v)
        elif isinstance(o, list):
            for v in o:
                walk(v)
        else:
            assert not isinstance(o, (int, float)) or isinstance(o, bool)

    walk(json.loads(out))


def test_fault_makes_suite_fail(tmp_path):
    path = write(tmp_path, cfg(fault="constant_z_simulator"))
    code, out, _ = run(["suite", "--config", path])
    rec = json.loads(out)
    verdicts = {c["name"]: c["verdict"] for c in rec["checks"]}
    assert code == 1 and rec["overall"] == "fail"
    assert verdicts["hvzk"] == verdicts["covering"] == verdicts["gluing_distributional"] == "fail"
    assert verdicts["completeness"] == "pass"


def test_epsilon_override_tolerates_fault(tmp_path):
    path = write(tmp_path, cfg(fault="constant_z_simulator", checks=["hvzk"]))
    assert run(["suite", "--config", path])[0] == 1
    assert run(["suite", "--config", path, "--epsilon", "10/11"])[0] == 0
    assert run(["suite", "--config", path, "--epsilon", "bad"])[0] == 2


def test_human_report(tmp_path):
    code, out, _ = run(["suite", "--config", write(tmp_path, cfg()), "--emit", "human", "--checks", "group,hvzk"])
    assert code == 0
    assert "[PASS] group" in out and "overall: pass" in out


def test_config_error_exit_code(tmp_path):
    code, _, err = run(["suite", "--config", write(tmp_path, cfg(q="12"))])
    assert code == 2 and "q: q not prime" in err
    code, _, err = run(["suite", "--config", str(tmp_path / "missing.json")])
    assert code == 2
    assert run(["suite", "--checks", "bogus"])[0] == 2


def test_demo_is_reproducible(tmp_path):
    path = write(tmp_path, cfg())
    first = run(["demo", "--config", path, "--seed", "4"])
    assert first == run(["demo", "--config", path, "--seed", "4"])
    code, out, _ = first
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2
    assert lines[0].startswith("honest    accept {") and lines[1].startswith("simulated accept {")


def test_site_and_dist_commands(tmp_path):
    path = write(tmp_path, cfg(protocol="chaum_pedersen"))
    code, out, _ = run(["site", "--config", path])
    assert code == 0 and "objects 518" in out
    code, out, _ = run(["dist", "--config", path, "--shape", "a"])
    assert code == 0 and out.rstrip().endswith("# distance 0/1")
    assert run(["dist", "--config", path, "--shape", "q"])[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sigmasite", "suite", "--checks", "group"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["overall"] == "pass"
