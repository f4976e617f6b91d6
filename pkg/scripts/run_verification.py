"""Run the full verification battery on both bundled scenarios.

Invokes `pensiongame verify` for the game-1 bull scenario and the game-2
bear scenario, streaming the per-check PASS/FAIL lines, then exits
nonzero if either suite reported a failure. The game-2 suite runs a
barrier Monte-Carlo estimate and takes a few tens of seconds.

Usage: python3 scripts/run_verification.py [--out DIR]
"""

import argparse
import pathlib
import subprocess
import sys

CONFIGS = ("configs/bull_game1.toml", "configs/bear_game2.toml")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/verify", help="report output directory")
    args = ap.parse_args()
    root = pathlib.Path(__file__).resolve().parents[1]
    worst = 0
    for cfg in CONFIGS:
        out_dir = pathlib.Path(args.out) / pathlib.Path(cfg).stem
        out_dir.mkdir(parents=True, exist_ok=True)
        cmd = [
            sys.executable,
            "-m",
            "pensiongame.cli",
            "verify",
            "--config",
            str(root / cfg),
            "--out",
            str(out_dir),
        ]
        print(f"== {cfg} ==", flush=True)
        rc = subprocess.run(cmd).returncode
        worst = max(worst, rc)
    sys.exit(worst)


if __name__ == "__main__":
    main()
