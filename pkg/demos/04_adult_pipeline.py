"""The full command pipeline on the UCI Adult census data.

Place ``adult.data`` under ``data/adult/`` (or point ``TSPBN_DATA`` at a
directory containing ``adult/adult.data``) and run this script. It is the
same as running ``tspbn ingest``, ``tspbn learn`` and ``tspbn evaluate`` with
``configs/adult.yaml``.
"""

import json
import os
import sys
from pathlib import Path

from tspbn import cli

root = Path(__file__).resolve().parents[1]
data = Path(os.environ.get("TSPBN_DATA", root / "data")) / "adult" / "adult.data"
if not data.exists():
    sys.exit(f"{data} not found; download it from the UCI repository first")

out = root / "runs" / "adult-demo"
args = ["--config", str(root / "configs" / "adult.yaml"), "--data", str(data), "--out", str(out)]
for command in ("ingest", "learn", "evaluate"):
    code = cli.main([command, *args])
    if code:
        sys.exit(code)

report = json.loads((out / "learn_report.json").read_text())
print(f"\n{len(report['edges'])} edges learned in {report['wall_time_s']:.1f}s:")
for u, v in report["edges"]:
    print(f"  {u} -> {v}")
print(f"\nGraphviz rendering: dot -Tpng {out / 'network.dot'} -o adult.png")
