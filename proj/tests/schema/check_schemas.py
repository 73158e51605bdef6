"""Runs each fixture through the CLI and validates every JSON output against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

cli, root = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "schemas").glob("*.schema.json")}
registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())


def validator(name, ref=None):
    schema = {"$ref": f"{name}#/$defs/{ref}"} if ref else schemas[name]
    return Draft202012Validator(schema, registry=registry)


runs = [
    ("verify-hellinger-bounds", "hellinger_three_bernoulli.json", ["--seed", "7"]),
    ("verify-hellinger-bounds", "row_inequality.json", ["--seed", "7", "--depth", "4"]),
    ("markov-tail", "markov_tail_three_bernoulli.json", []),
    ("chain-lemma", "chain_lemma.json", ["--seed", "7"]),
    ("chain-lemma", "chain_lemma_vectors.json", []),
    ("quasimeasure", "quasimeasure_leaky.json", []),
    ("w-vs-d", "w_vs_d.json", ["--seed", "7"]),
    ("deficiency", "deficiency_point_mass.json", []),
    ("leftmost-alpha", "leftmost_canonical.json", []),
    ("leftmost-alpha", "leftmost_canonical_partial_sum.json", []),
    ("e2i", "e2i_indicator.json", ["--seed", "7"]),
    ("prop8", "prop8_three_measures.json", ["--seed", "7"]),
    ("counterexample", "counterexample_canonical.json", []),
]

failures = 0


def check(v, doc, what):
    global failures
    errors = list(v.iter_errors(doc))
    for e in errors[:3]:
        print(f"FAIL {what}: {e.message} at {list(e.absolute_path)}")
    failures += bool(errors)


for sub, fixture, extra in runs:
    spec = json.loads((root / "fixtures" / fixture).read_text())
    check(validator("experiment.schema.json", sub), spec, fixture)
    with tempfile.TemporaryDirectory() as out:
        cmd = [str(cli), sub, "--spec", str(root / "fixtures" / fixture), "--out", out, "--format", "json", "--quiet", *extra]
        code = subprocess.run(cmd).returncode
        if code not in (0, 3):
            print(f"FAIL {fixture}: exit {code}")
            failures += 1
        out = pathlib.Path(out)
        check(validator("verdicts.schema.json"), json.loads((out / "verdicts.json").read_text()), f"{fixture} verdicts")
        check(validator("manifest.schema.json"), json.loads((out / "manifest.json").read_text()), f"{fixture} manifest")
        for table in out.glob("*.json"):
            if table.name in ("verdicts.json", "manifest.json"):
                continue
            v = {"report.json": validator("report.schema.json", sub), "alpha.json": validator("alpha.schema.json")}.get(
                table.name, validator("table.schema.json"))
            check(v, json.loads(table.read_text()), f"{fixture} {table.name}")

env = json.loads((root / "fixtures" / "three_bernoulli_env.json").read_text())
check(validator("environment.schema.json"), env, "three_bernoulli_env.json")
print("schema checks:", "ok" if failures == 0 else f"{failures} failed")
sys.exit(1 if failures else 0)
