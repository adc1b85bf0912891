"""Run one or more sweep configs and write a CSV (and JSON) per config.

    python scripts/run_sweep.py scripts/configs/*.cfg --out results --frames 20
"""

import argparse
import logging
import pathlib
import time

from ddest.config import load_config
from ddest.experiment import rows_to_csv, rows_to_json, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="+", type=pathlib.Path)
    p.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    p.add_argument("--frames", type=int, help="override num_frames")
    p.add_argument("--workers", type=int)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args.out.mkdir(parents=True, exist_ok=True)
    for path in args.configs:
        exp = load_config(path)
        if args.frames:
            exp.num_frames = args.frames
        t0 = time.perf_counter()
        rows = run_experiment(exp, workers=args.workers)
        stem = args.out / path.stem
        stem.with_suffix(".csv").write_text(rows_to_csv(rows))
        stem.with_suffix(".json").write_text(rows_to_json(rows))
        logging.info("%s: %d rows in %.1f s -> %s.csv", path.name, len(rows), time.perf_counter() - t0, stem)
        print(rows_to_csv(rows))


if __name__ == "__main__":
    main()
