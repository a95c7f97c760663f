"""
evaluation_service.py

Error metrics of estimated hypotheses against the generated ground truth.

Overview:
---------
- Objects are matched per class: all (truth, estimate) pairs of the same class within
  `gate` meters are sorted by centroid distance and taken greedily, ties by truth index
  then estimate index. Unmatched truth objects are misses and stay out of the averages.
- Position error is the 2D centroid distance in cm, orientation error the minimal
  circular yaw difference in degrees (plants have none). The wall-height error of a room
  is |2.5 * scale_est - H_true| in cm.
- Both the initialisation and the final stage are evaluated; the report is one CSV row
  per ground-truth object and stage plus a text table rendered from a Jinja2 template.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from jinja2 import Environment

from panolayout.exceptions import DatasetIOError
from panolayout.models import REFERENCE_WALL_HEIGHT, ModelSpec, ObjectClass, SceneParameters
from panolayout.ports.dataset_repository_port import DatasetRepositoryPort
from panolayout.schemas import ErrorRow
from panolayout.services.pipeline_service import FINAL_FILE, INIT_FILE
from panolayout.utils import circular_difference

logger = logging.getLogger(__name__)

STAGES = (("init", INIT_FILE), ("final", FINAL_FILE))
MATCH_GATE = 1.0
ERRORS_FILE = "errors.csv"
REPORT_FILE = "report.txt"


@dataclass(frozen=True)
class ClassSummary:
    stage: str
    category: ObjectClass
    matched: int
    misses: int
    position_mean: Optional[float]
    position_std: Optional[float]
    orientation_mean: Optional[float]
    orientation_std: Optional[float]


@dataclass
class ErrorReport:
    rows: list[ErrorRow] = field(default_factory=list)
    wall_height_errors: dict[str, list[float]] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)

    def summaries(self) -> list[ClassSummary]:
        out = []
        for stage, _ in STAGES:
            for category in ObjectClass:
                rows = [r for r in self.rows if r.stage == stage and r.category == category]
                if not rows:
                    continue
                hits = [r for r in rows if r.matched]
                pos = [r.position_error_cm for r in hits]
                ori = [r.orientation_error_deg for r in hits if r.orientation_error_deg is not None]
                out.append(ClassSummary(stage=stage, category=category, matched=len(hits),
                                        misses=len(rows) - len(hits),
                                        position_mean=_mean(pos), position_std=_std(pos),
                                        orientation_mean=_mean(ori) if category.has_orientation else None,
                                        orientation_std=_std(ori) if category.has_orientation else None))
        return out

    def wall_height_summary(self) -> dict[str, tuple[Optional[float], Optional[float]]]:
        return {stage: (_mean(self.wall_height_errors.get(stage, [])), _std(self.wall_height_errors.get(stage, [])))
                for stage, _ in STAGES}


def _mean(values: list[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def _std(values: list[float]) -> Optional[float]:
    return float(np.std(values)) if values else None


def match_objects(truth: SceneParameters, estimate: SceneParameters,
                  gate: float = MATCH_GATE) -> list[Optional[int]]:
    """
    Estimate index matched to each truth object, None for a miss.

    Matching is one-to-one and never crosses classes.
    """

    pairs = []
    for i, t in enumerate(truth.objects):
        for j, e in enumerate(estimate.objects):
            if t.category != e.category:
                continue
            d = float(np.hypot(t.position[0] - e.position[0], t.position[1] - e.position[1]))
            if d <= gate:
                pairs.append((d, i, j))
    matches: list[Optional[int]] = [None] * len(truth.objects)
    used = set()
    for _, i, j in sorted(pairs):
        if matches[i] is None and j not in used:
            matches[i] = j
            used.add(j)
    return matches


def object_errors(room_id: str, stage: str, truth: SceneParameters, estimate: SceneParameters,
                  gate: float = MATCH_GATE) -> list[ErrorRow]:
    rows = []
    for t, j in zip(truth.objects, match_objects(truth, estimate, gate)):
        if j is None:
            rows.append(ErrorRow(room_id=room_id, stage=stage, category=t.category, matched=False))
            continue
        e = estimate.objects[j]
        pos = 100.0 * float(np.hypot(t.position[0] - e.position[0], t.position[1] - e.position[1]))
        ori = circular_difference(t.orientation, e.orientation) if t.category.has_orientation else None
        rows.append(ErrorRow(room_id=room_id, stage=stage, category=t.category, matched=True,
                             position_error_cm=pos, orientation_error_deg=ori))
    return rows


def wall_height_error(truth: SceneParameters, estimate: SceneParameters) -> float:
    """|2.5 * scale_est - H_true| in cm."""
    return 100.0 * abs(REFERENCE_WALL_HEIGHT * estimate.scale - truth.wall_height)


class EvaluationService:
    """
    Attributes:
        repository (DatasetRepositoryPort): Reads scenes and the manifest, writes the report.
        models (dict[str, ModelSpec]): Model library, to rebuild scenes.
        template_env (Environment): Jinja2 environment holding `eval/report.txt.jinja2`.
        gate (float): Matching gate in meters.
    """

    def __init__(self, repository: DatasetRepositoryPort, models: dict[str, ModelSpec], template_env: Environment,
                 gate: float = MATCH_GATE):
        self.repository = repository
        self.models = models
        self.report_template = template_env.get_template("eval/report.txt.jinja2")
        self.gate = gate

    def evaluate(self, dataset_dir: Path, results_dir: Path) -> ErrorReport:
        """
        Compare every room of the dataset manifest with its estimates.

        Rooms without result files (for instance rooms whose estimation failed) are listed as
        missing and contribute nothing.
        """

        dataset_dir, results_dir = Path(dataset_dir), Path(results_dir)
        manifest = self.repository.read_manifest(dataset_dir)
        report = ErrorReport(wall_height_errors={stage: [] for stage, _ in STAGES})
        for entry in manifest.rooms:
            truth = self.repository.read_scene(dataset_dir / entry.scene, self.models)
            try:
                estimates = {stage: self.repository.read_scene(results_dir / entry.room_id / name, self.models)
                             for stage, name in STAGES}
            except DatasetIOError as e:
                logger.warning("%s: no estimates (%s)", entry.room_id, e)
                report.missing.append(entry.room_id)
                continue
            for stage, estimate in estimates.items():
                report.rows.extend(object_errors(entry.room_id, stage, truth, estimate, self.gate))
                report.wall_height_errors[stage].append(wall_height_error(truth, estimate))
        logger.info("evaluated %d rooms, %d missing", len(manifest.rooms) - len(report.missing),
                    len(report.missing))
        return report

    def render_report(self, report: ErrorReport) -> str:
        return self.report_template.render(summaries=report.summaries(), walls=report.wall_height_summary(),
                                           missing=report.missing, stages=[s for s, _ in STAGES])

    def write_report(self, report: ErrorReport, out_dir: Path) -> str:
        text = self.render_report(report)
        self.repository.write_rows(Path(out_dir) / ERRORS_FILE, report.rows)
        self.repository.write_text(Path(out_dir) / REPORT_FILE, text)
        return text
