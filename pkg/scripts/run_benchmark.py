"""
Generate a synthetic suite, estimate every room and evaluate, reading the knobs from
.env (BENCH_OUT, BENCH_ROOMS, BENCH_SEED, BENCH_JOBS, BENCH_CONFIG).
"""

import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from panolayout.main import main

load_dotenv(override=True)

OUT = Path(os.getenv("BENCH_OUT", "runs/benchmark"))
ROOMS = os.getenv("BENCH_ROOMS", "20")
SEED = os.getenv("BENCH_SEED", "0")
JOBS = os.getenv("BENCH_JOBS", "8")
CONFIG = os.getenv("BENCH_CONFIG")

config = ["--config", CONFIG] if CONFIG else []
dataset, results = OUT / "dataset", OUT / "results"

steps = [
    ["generate", *config, "--seed", SEED, "--rooms", ROOMS, "--jobs", JOBS, "--out", str(dataset)],
    ["estimate", *config, "--seed", SEED, "--jobs", JOBS, str(dataset), "--out", str(results)],
    ["eval", str(dataset), str(results)],
]
for argv in steps:
    code = main(argv)
    if code != 0:
        print(f"step {argv[0]} failed with exit code {code}", file=sys.stderr)
        sys.exit(code)
