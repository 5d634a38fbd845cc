"""End-to-end checks of the nicedyn executable: exit codes, determinism and schema."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

binary, source = sys.argv[1], pathlib.Path(sys.argv[2])
configs = source / "tests" / "configs"
schema = json.loads((source / "docs" / "report.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)
failures = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def run(command, config, out, *extra):
    proc = subprocess.run([binary, command, "--config", str(config), "--out", str(out), *extra],
                          capture_output=True, text=True)
    return proc.returncode


def report(out, command):
    return json.loads((pathlib.Path(out) / f"report_{command}.json").read_text())


def stripped(out, command):
    text = (pathlib.Path(out) / f"report_{command}.json").read_text()
    data = json.loads(text)
    data.pop("timing")
    return text, data


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    stages = {
        "chebyshev.json": ["orbit", "niceset", "returnmap", "density", "spread", "criterion"],
        "tangent.json": ["orbit", "tail", "criterion"],
        "quadratic.json": ["orbit", "niceset", "returnmap"],
    }
    for name, commands in stages.items():
        texts = []
        for rep in range(2):
            out = tmp / f"{name}.{rep}"
            for c in commands:
                code = run(c, configs / name, out)
                check(code == 0, f"{name} {c} exits 0 (got {code})")
            texts.append({c: stripped(out, c)[1] for c in commands})
        for c in commands:
            a, b = texts[0][c], texts[1][c]
            a["config"]["output"] = b["config"]["output"] = ""
            check(a == b, f"{name} {c} report identical across runs")
            errors = list(validator.iter_errors(report(tmp / f"{name}.0", c)))
            check(not errors, f"{name} {c} report matches schema {[e.message[:120] for e in errors[:2]]}")

    orbit = report(tmp / "chebyshev.json.0", "orbit")["results"]["points"]
    check(orbit == [[1.0, 0.0], [0.0, 0.0], "inf"], "chebyshev orbit at depth 5 is {1, 0, inf}")
    ks = report(tmp / "tangent.json.0", "criterion")["results"]
    check(ks["verdict"]["verdict"] == "finite", "tangent KS verdict is finite")

    # byte identity, not just JSON equality, with the same output directory
    out = tmp / "bytes"
    run("niceset", configs / "chebyshev.json", out)
    first = (out / "report_niceset.json").read_text()
    run("niceset", configs / "chebyshev.json", out)
    second = (out / "report_niceset.json").read_text()
    strip = lambda t: "\n".join(l for l in t.splitlines() if '"seconds"' not in l)
    check(strip(first) == strip(second), "niceset report bytes identical apart from timing")

    code = run("returnmap", configs / "chebyshev.json", tmp / "empty")
    err = report(tmp / "empty", "returnmap")
    check(code == 1 and "'niceset'" in err["results"]["error"]["message"], "missing artifact exits 1 naming niceset")
    check(not list(validator.iter_errors(err)), "error report matches schema")

    corrupt = json.loads((configs / "chebyshev.json").read_text())
    corrupt["niceset"]["test_hook"] = {"corrupt_boundary": 0.01}
    (tmp / "corrupt.json").write_text(json.dumps(corrupt))
    code = run("niceset", tmp / "corrupt.json", tmp / "corrupt")
    viol = report(tmp / "corrupt", "niceset")["results"]["niceness"]["violations"]
    check(code == 2 and viol >= 1, f"corrupted boundary exits 2 with violations (code {code}, {viol})")

    bad = json.loads((configs / "tangent.json").read_text())
    bad["niceset"] = {"kappa": 0.9}
    (tmp / "bad.json").write_text(json.dumps(bad))
    proc = subprocess.run([binary, "orbit", "--config", str(tmp / "bad.json")], capture_output=True, text=True)
    check(proc.returncode == 1 and "kappa must exceed 1" in proc.stderr, "invalid config exits 1 with the reason")

    seeded = tmp / "seeded"
    run("criterion", configs / "chebyshev.json", seeded, "--seed", "99")
    check(report(seeded, "criterion")["config"]["seed"] == 99, "--seed overrides the config")

    oracle = {"map": {"kind": "tangent"}, "oracle": {"integrand": "sine_semicircle", "r": 50}}
    (tmp / "oracle.json").write_text(json.dumps(oracle))
    code = run("oracle", tmp / "oracle.json", tmp / "oracle")
    res = report(tmp / "oracle", "oracle")["results"]
    check(code == 0 and abs(res["value"] - 200) < 1e-6, "hidden oracle subcommand reproduces 4r")

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
