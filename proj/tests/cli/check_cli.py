#!/usr/bin/env python3
"""End-to-end checks of the rydpol command line: output formats, schemas,
exit codes, determinism and the worked inversion examples."""

import argparse
import csv
import json
import math
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

FAILURES = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        FAILURES.append(what)


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


class Cli:
    def __init__(self, binary, schema_dir):
        self.binary = binary
        self.schema_dir = schema_dir
        self.registry = load_registry(schema_dir)

    def run(self, *args, expect=0):
        p = subprocess.run([str(self.binary), *map(str, args)],
                           capture_output=True, text=True)
        check(p.returncode == expect,
              f"exit {p.returncode} (want {expect}): {' '.join(map(str, args))}")
        return p

    def validate(self, path, schema):
        doc = json.loads(pathlib.Path(path).read_text())
        schema_doc = json.loads((self.schema_dir / schema).read_text())
        v = jsonschema.Draft202012Validator(schema_doc, registry=self.registry)
        errors = list(v.iter_errors(doc))
        check(not errors, f"{pathlib.Path(path).name} matches {schema}"
              + (f": {errors[0].message}" if errors else ""))
        return doc


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    check(all(len(r) == len(header) for r in body),
          f"{path.name}: every row has {len(header)} columns")
    finite = True
    for r in body:
        for cell in r:
            try:
                finite = finite and math.isfinite(float(cell))
            except ValueError:
                pass
    check(finite, f"{path.name}: all numeric cells finite")
    return header, body


def same_bytes(a, b):
    return pathlib.Path(a).read_bytes() == pathlib.Path(b).read_bytes()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", required=True, type=pathlib.Path)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--scenarios", required=True, type=pathlib.Path)
    args = ap.parse_args()
    cli = Cli(args.bin, args.schemas)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)

        for sc in sorted(args.scenarios.glob("*.json")):
            cli.validate(sc, "scenario.schema.json")

        # Eigenvalue spectrogram of 1/2^0 against the closed form (scaled).
        cli.run("spectrogram", "--J2", 1, "--p", 0, "--phi-steps", 361, "--out", tmp / "sg")
        header, body = read_csv(tmp / "sg" / "spectrogram.csv")
        check(header == ["phi", "band_index", "eigenvalue"], "spectrogram header")
        check(len(body) == 361 * 4, "361 x 4 eigenvalue rows")
        worst = 0.0
        for k in range(361):
            phi = float(body[4 * k][0])
            want = sorted(2 / 3 * math.cos(phi / 2 + (2 * n - 1) * math.pi / 4)
                          for n in range(1, 5))
            got = [float(body[4 * k + b][2]) for b in range(4)]
            worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
        check(worst < 1e-8, f"1/2^0 bands follow the closed form (max err {worst:.2e})")
        cli.validate(tmp / "sg" / "spectrogram.json", "spectrogram.schema.json")
        cli.validate(tmp / "sg" / "spectrogram.manifest.json", "manifest.schema.json")

        cli.run("spectrogram", "--J2", 3, "--p", 1, "--envelopes", "exact",
                "--phi-steps", 37, "--out", tmp / "env")
        header, body = read_csv(tmp / "env" / "spectrogram.csv")
        check(header[3:] == ["eo_plus", "eo_minus", "ei_plus", "ei_minus",
                             "exact_or_approx"], "envelope columns appended")
        check(len(body) == 37 * 10, "3/2^+ has 10 bands")
        cli.validate(tmp / "env" / "spectrogram.json", "spectrogram.schema.json")

        p = cli.run("spectrogram", "--J2", 0, "--p", 0, "--out", tmp / "bad0", expect=2)
        check(not (tmp / "bad0").exists(), "usage error leaves no files")
        check("J2" in p.stderr, "usage error names the offending flag")

        cli.run("envelopes", "--phi-steps", 9, "--degrees", "--out", tmp / "ev")
        header, body = read_csv(tmp / "ev" / "envelopes.csv")
        check(header == ["phi", "eo_plus", "eo_minus", "ei_plus", "ei_minus",
                         "exact_or_approx"], "envelopes header")
        check(float(body[-1][0]) == 360.0, "--degrees converts the angle column")

        # EIT spectrograms from the shipped scenarios (coarse phi grids).
        cli.run("eit", "--scenario", args.scenarios / "fig3c_half0.json",
                "--phi-steps", 5, "--out", tmp / "e1")
        header, body = read_csv(tmp / "e1" / "eit.csv")
        check(header == ["phi", "delta_c_mhz", "response"], "eit header")
        check(len(body) == 5 * 481, "eit rows = phi x delta_c")
        cli.validate(tmp / "e1" / "eit.json", "eit.schema.json")
        cli.validate(tmp / "e1" / "eit.manifest.json", "manifest.schema.json")

        cli.run("eit", "--scenario", args.scenarios / "d32.json", "--third-level", 100,
                "--phi-steps", 3, "--delta-points", 121, "--out", tmp / "e3")
        doc = cli.validate(tmp / "e3" / "eit.json", "eit.schema.json")
        check(doc.get("third_level") == {"J2": 5, "delta_mhz": 100.0},
              "--third-level adds the fine-structure partner of r2")

        bad = tmp / "bad.json"
        bad.write_text(json.dumps({"class": {"J2": 3, "p": 1},
                                   "params": {"omega_probe": -1, "gamma_i": "x"},
                                   "optics": "sideways"}))
        p = cli.run("eit", "--scenario", bad, "--out", tmp / "bad", expect=3)
        check(p.stderr.count("\n  - ") == 3, "all scenario problems reported at once")
        check(not (tmp / "bad").exists(), "validation error leaves no files")

        # Determinism: rerun and replay are byte-identical.
        cli.run("eit", "--J2", 1, "--p", 0, "--phi-steps", 4, "--noise", 0.01,
                "--seed", 11, "--out", tmp / "d1")
        cli.run("eit", "--J2", 1, "--p", 0, "--phi-steps", 4, "--noise", 0.01,
                "--seed", 11, "--out", tmp / "d2")
        cli.run("replay", tmp / "d1" / "eit.manifest.json", "--out", tmp / "d3")
        for name in ["eit.csv", "eit.json", "eit.manifest.json"]:
            check(same_bytes(tmp / "d1" / name, tmp / "d2" / name), f"rerun: {name} identical")
            check(same_bytes(tmp / "d1" / name, tmp / "d3" / name), f"replay: {name} identical")

        # Inversion examples.
        cli.run("eit", "--J2", 1, "--p", 0, "--phi", 45, "--degrees", "--out", tmp / "s1")
        cli.validate(tmp / "s1" / "eit.spectrum.json", "spectrum.schema.json")
        cli.run("invert", "--spectrum", tmp / "s1" / "eit.spectrum.json", "--degrees",
                "--out", tmp / "i1")
        rep = cli.validate(tmp / "i1" / "invert.json", "inversion_report.schema.json")
        want = [45, 135, 225, 315]
        check(len(rep["candidates"]) == 4 and
              all(abs(a - b) < 0.5 for a, b in zip(rep["candidates"], want)),
              f"1/2^0 at 45 deg gives {{45, 135, 225, 315}} (got {rep['candidates']})")
        check(rep["ambiguity"] == "fourfold", "1/2^0 ambiguity is fourfold")

        for optics, name in [("standard", "std"), ("rotated-circular", "rot")]:
            cli.run("eit", "--J2", 3, "--p", 1, "--phi", 120, "--degrees",
                    "--optics", optics, "--name", name, "--out", tmp / "s2")
        cli.run("invert", "--spectrum", tmp / "s2" / "rot.spectrum.json",
                "--spectrum", tmp / "s2" / "std.spectrum.json", "--degrees",
                "--out", tmp / "i2")
        rep = cli.validate(tmp / "i2" / "invert.json", "inversion_report.schema.json")
        check(rep["ambiguity"] == "unique" and abs(rep["pruned"][0] - 120) < 5,
              f"3/2^+ with both optics is unique near 120 deg (got {rep['pruned']})")

        cli.run("eit", "--J2", 3, "--p", 0, "--phi", 1.0, "--out", tmp / "s3")
        p = cli.run("invert", "--spectrum", tmp / "s3" / "eit.spectrum.json",
                    "--out", tmp / "i3", expect=3)
        check("NotInvertible" in p.stderr and "1/2^0" in p.stderr,
              "3/2^0 is rejected naming the supported classes")

        cli.run("roundtrip", "--J2", 3, "--p", 1, "--phi", "30,200", "--degrees",
                "--out", tmp / "rt")
        rep = cli.validate(tmp / "rt" / "roundtrip.json", "roundtrip.schema.json")
        check(all(c["recovered"] for c in rep["cases"]), "eigenvalue-level round trips recover phi")

        p = cli.run("wigner", "3j", "1/2", "1", "1/2", "1/2", "-1", "1/2")
        check(abs(float(p.stdout) - (-math.sqrt(1 / 3))) < 1e-15,
              "wigner 3j (1/2 1 1/2; 1/2 -1 1/2) = -1/sqrt3")
        cli.run("wigner", "6j", "1/2", "x", "1", "1", "1", "1", expect=3)

    print(f"{len(FAILURES)} failure(s)")
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
