"""
Surface cost of every generated room's ground truth over a grid of scales around the true
one. Reports how often the minimum lands within one grid step of the truth. Reads
SWEEP_DATASET, SWEEP_STEP and SWEEP_SPAN from .env.
"""

import json
import os
import sys
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from panolayout.dependencies import get_dataset_repository, get_model_library
from panolayout.layout.objects import rasterize_detection_mask
from panolayout.posterior.surface import sweep_scale

load_dotenv(override=True)

DATASET = Path(os.getenv("SWEEP_DATASET", "runs/benchmark/dataset"))
STEP = float(os.getenv("SWEEP_STEP", "0.05"))
SPAN = int(os.getenv("SWEEP_SPAN", "6"))

repository = get_dataset_repository()
models = get_model_library()
manifest = repository.read_manifest(DATASET)

rows, hits = [], 0
for entry in manifest.rooms:
    truth = repository.read_scene(DATASET / entry.scene, models)
    observed, detections, _ = repository.read_observation(DATASET / entry.room_id)
    mask = rasterize_detection_mask(detections, observed.width, observed.height)
    scales = truth.scale + STEP * np.arange(-SPAN, SPAN + 1)
    sweep = sweep_scale(observed, mask, truth, models, scales / truth.scale)
    best_scale, best_cost = min(sweep, key=lambda sc: sc[1])
    hit = abs(best_scale - truth.scale) <= STEP + 1e-9
    hits += hit
    rows.append({"room_id": entry.room_id, "true_scale": truth.scale, "best_scale": best_scale,
                 "best_cost": best_cost, "within_one_step": bool(hit)})

repository.write_json(DATASET / "scale_sweep.json", rows)
json.dump({"rooms": len(rows), "within_one_step": hits / max(len(rows), 1)}, sys.stdout, indent=2)
sys.stdout.write("\n")
