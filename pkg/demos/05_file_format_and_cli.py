"""The VLEB bundle format and the command-line pipeline.

Writes and inspects an embedding bundle byte by byte, then drives the full
CLI: generate a dataset, reason over one scene, evaluate with the context
ablation, and render the report table.
Run with:  python demos/05_file_format_and_cli.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from vlscene import read_bundle, write_bundle
from vlscene.cli import main

work = Path(tempfile.mkdtemp(prefix="vlscene_demo_"))
print(f"working in {work}")
print()

# A bundle is 20 header bytes, a JSON metadata blob, then float32 rows.
path = work / "example.vleb"
write_bundle(
    np.array([[1.0, 0.5, -0.25], [0.0, -0.0, 2.0]]),
    {"kind": "text", "labels": ["hello", "world"], "extra": {"note": "demo"}},
    path,
)
raw = path.read_bytes()
print(f"bundle size: {len(raw)} bytes; header: magic={raw[:4]!r} version={raw[4]}")
rows, meta = read_bundle(path)
print(f"read back: shape {rows.shape}, labels {meta['labels']}")
print()

# Full CLI pipeline.
ds_dir = work / "dataset"
print("$ vlscene gen-scenes --scenes 40 --noise 0.25 --clutter 0.5 --out", ds_dir)
main(["gen-scenes", "--scenes", "40", "--noise", "0.25", "--clutter", "0.5",
      "--seed", "9", "--out", str(ds_dir)])
print()

manifest = json.loads((ds_dir / "manifest.json").read_text())
scene_file = ds_dir / manifest["scenes"][0]["file"]
result_file = work / "result.json"
print(f"$ vlscene reason --scene {scene_file.name} --prompts prompts.vleb --out result.json")
main(["reason", "--scene", str(scene_file), "--prompts", str(ds_dir / "prompts.vleb"),
      "--out", str(result_file)])
result = json.loads(result_file.read_text())
print(f"  truth was: {manifest['scenes'][0]['truth_label']}, "
      f"ambiguity {result['ambiguity']:.3f}")
print()

report_file = work / "report.json"
print("$ vlscene evaluate --ablate context --out report.json")
main(["evaluate", "--dataset", str(ds_dir), "--ablate", "context",
      "--out", str(report_file)])
print()

print("$ vlscene report --in report.json --format md")
main(["report", "--in", str(report_file), "--format", "md"])
