"""Superposed geometries and the file/CLI workflow.

A finite convex mixture of Dirac-sea systems with different masses over a
shared mode set models a superposition of space-time geometries: the support
of the mixed measure is the union of the component supports.  The same
systems round-trip through the JSON file format that the command-line
interface consumes.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from cfslab import MinkowskiConfig, MixtureSpec, build_system, mix_systems
from cfslab.io import read_system, system_to_json, write_system

samples = ((0.0, 0.0, 0.0, 0.0), (0.3, 0.05, 0.0, 0.0))
light = build_system(MinkowskiConfig(mass=1.0, kmax=1, sample_points=samples))
heavy = build_system(MinkowskiConfig(mass=1.6, kmax=1, sample_points=samples))

mixed = mix_systems(MixtureSpec((light, heavy), (0.5, 0.5)))
print(f"mixture: {len(mixed)} points over f = {mixed.f}, weights "
      f"{[e.weight for e in mixed.points]}")
print("ids:", mixed.ids)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "mixture.json"
    write_system(mixed, path)
    again = read_system(path)
    print("round-trip byte-stable:", path.read_text() == system_to_json(again))

    config = {
        "kind": "minkowski",
        "mass": 1.0,
        "eps": 1e-3,
        "torus_radius": 0.8,
        "kmax": 1,
        "sample_points": [
            [0.0, 0.02, 0.0, 0.0],
            [0.22, 0.0, 0.0, 0.0],
            [0.44, 0.015, 0.0, 0.0],
        ],
    }
    cfg_path = Path(tmp) / "config.json"
    cfg_path.write_text(json.dumps(config))
    sys_path = Path(tmp) / "system.json"
    out_dir = Path(tmp) / "reports"

    def run(*args):
        proc = subprocess.run(
            [sys.executable, "-m", "cfslab.cli", *args],
            capture_output=True,
            text=True,
        )
        print(f"$ cfslab {' '.join(args)}\n  -> exit {proc.returncode}: "
              f"{proc.stdout.strip() or proc.stderr.strip()}")
        return proc

    run("generate", "--config", str(cfg_path), "--out", str(sys_path))
    run("validate", "--system", str(sys_path))
    run("classify", "--system", str(sys_path), "--out", str(out_dir))
    run("distance", "--system", str(sys_path), "--lmin", "3.0", "--lmax", "3.5",
        "--out", str(out_dir))
    print("\nclassification matrix:")
    for line in (out_dir / "classification.csv").read_text().splitlines():
        if not line.startswith("#"):
            print("  ", line)
