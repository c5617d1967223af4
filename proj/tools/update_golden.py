#!/usr/bin/env python3
"""Regenerate tests/golden/default_summary.json from a fresh run of the default suite."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cli", default=str(ROOT / "build" / "heatreg"), help="path to the heatreg executable")
    parser.add_argument("--config", default=str(ROOT / "configs" / "default.json"))
    parser.add_argument("--out", default=str(ROOT / "tests" / "golden" / "default_summary.json"))
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        report_path = pathlib.Path(tmp) / "report.json"
        run = subprocess.run([args.cli, "verify", "--config", args.config, "--out", str(report_path)])
        if run.returncode != 0:
            print(f"verify exited with {run.returncode}; goldens not updated", file=sys.stderr)
            return 1
        report = json.loads(report_path.read_text())

    summary = {
        "config": str(pathlib.Path(args.config).resolve().relative_to(ROOT)),
        "total": report["counts"]["total"],
        "worst_slack": report["worst_slack"],
    }
    pathlib.Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}: {summary['total']} records, {len(summary['worst_slack'])} families")
    return 0


if __name__ == "__main__":
    sys.exit(main())
