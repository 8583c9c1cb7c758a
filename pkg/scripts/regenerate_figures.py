"""Regenerate the CSV data for every figure recipe and print the shape verdicts.

    python3 scripts/regenerate_figures.py --out-dir results
"""

import argparse
import json
import time
from pathlib import Path

from cavent.sweep import DEFAULT_POINTS, RECIPE_NAMES, describe_spec, run_recipe


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--points", type=int, default=DEFAULT_POINTS)
    parser.add_argument("--t-max", type=float, default=None, help="override the recipes' t_max (s)")
    parser.add_argument("names", nargs="*", default=list(RECIPE_NAMES))
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    failures = 0
    for name in args.names:
        result = run_recipe(name, args.points, args.t_max)
        (out_dir / f"{name}.csv").write_bytes(result.to_csv().encode("utf-8"))
        meta = {"spec": describe_spec(result.spec), "verdicts": [v.__dict__ for v in result.verdicts]}
        (out_dir / f"{name}.meta.json").write_text(json.dumps(meta, indent=2, default=str) + "\n")
        print(f"{name}: {len(result.rows)} rows -> {out_dir / (name + '.csv')}")
        for v in result.verdicts:
            failures += not v.passed
            print(f"    [{'pass' if v.passed else 'FAIL'}] {v.claim}: {v.detail}")
    print(f"done in {time.perf_counter() - start:.1f} s, {failures} soft verdict(s) not met")


if __name__ == "__main__":
    main()
