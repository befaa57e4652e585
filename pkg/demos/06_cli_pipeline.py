"""The whole pipeline through the command-line interface.

Writes a camera-set file, then drives the epiview CLI exactly as a shell
session would: masks -> plucker -> render -> sample -> eval.  Everything
lands in demos/output/cli/.
"""

import json
from pathlib import Path

from epiview.cli import main

OUT = Path(__file__).parent / "output" / "cli"
OUT.mkdir(parents=True, exist_ok=True)

cameras = {
    "fov_deg": 40.26,
    "width": 96,
    "height": 96,
    "views": [
        {"elevation_deg": 10.0, "azimuth_deg": 15.0, "distance": 3.5},
        {"elevation_deg": 20.0, "azimuth_deg": 105.0, "distance": 3.5},
        {"elevation_deg": -10.0, "azimuth_deg": 225.0, "distance": 3.5},
    ],
    "steps": 80,
    "blob_steps": 8,
    "seed": 0,
}
cam_file = OUT / "cameras.json"
cam_file.write_text(json.dumps(cameras, indent=2))
print(f"camera set: {cam_file}\n")

for argv in [
    ["masks", "--cameras", str(cam_file), "--res", "16", "--out", str(OUT / "masks")],
    ["plucker", "--cameras", str(cam_file), "--res", "16", "--out", str(OUT / "plucker")],
    ["render", "--cameras", str(cam_file), "--out", str(OUT / "render")],
    ["sample", "--cameras", str(cam_file), "--views", "3", "--seed", "0",
     "--out", str(OUT / "sample")],
    ["eval", str(OUT / "render"), str(OUT / "sample"), "--out", str(OUT / "report")],
]:
    print(f"$ epiview {' '.join(argv)}")
    code = main(argv)
    assert code == 0, f"command failed with exit code {code}"
    print()

print("report:", (OUT / "report" / "report.csv").read_text(), sep="\n")
