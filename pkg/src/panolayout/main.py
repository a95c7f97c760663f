"""
main.py

Command-line entry point of panolayout.

Overview:
---------
Subcommands, each working inside a run directory:

- `generate`  synthesize rooms (scene, observed panorama, detections, crops) and a manifest.
- `estimate`  run layout initialisation, pose estimation and MAP sampling on every room;
              per-room failures are recorded in `errors.json` and the run continues.
- `eval`      compare init and final hypotheses with the ground truth (CSV + text report).
- `floormap`  draw a scene file as an SVG floor map.
- `render`    render a scene's orientation panorama and object mask, or with `--library`
              the whole pose library as grayscale PNGs plus a manifest.

Rooms are independent and run in a process pool with `--jobs > 1`; results are collected
in room order so the output does not depend on scheduling. Exit codes follow the error
hierarchy: 0 success, 1 domain failure, 2 configuration, 3 validation, 4 I/O.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import ValidationError
from tqdm import tqdm

from panolayout.config import RunConfig, settings
from panolayout.dependencies import (
    get_dataset_repository,
    get_evaluation_service,
    get_floormap_service,
    get_generation_service,
    get_model_library,
    get_pipeline_service,
)
from panolayout.exceptions import ConfigurationError, PanoLayoutError
from panolayout.pose.library import iter_library_views
from panolayout.rendering.panorama import render_object_masks, render_orientation_pano
from panolayout.schemas import ManifestEntry, PoseLibraryRow, PoseRecord, RoomFailure

logger = logging.getLogger(__name__)

ERRORS_FILE = "errors.json"
LIBRARY_MANIFEST = "library.json"


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def load_config(args: argparse.Namespace) -> RunConfig:
    """Run configuration from `--config` with the command-line overrides applied."""

    config = RunConfig.load(args.config)
    dataset, sampler = {}, {}
    if getattr(args, "seed", None) is not None:
        dataset["master_seed"] = args.seed
        sampler["master_seed"] = args.seed
    if getattr(args, "rooms", None) is not None and args.command == "generate":
        dataset["rooms"] = args.rooms
    try:
        return RunConfig.model_validate({
            **config.model_dump(),
            "dataset": {**config.dataset.model_dump(), **dataset},
            "sampler": {**config.sampler.model_dump(), **sampler},
        })
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


def _map_rooms(worker: Callable, jobs: list[tuple], n_jobs: int, desc: str) -> list:
    """Run `worker` on every job tuple, in a process pool when `n_jobs > 1`; results in job order."""

    if n_jobs <= 1:
        return [worker(*job) for job in tqdm(jobs, desc=desc, disable=len(jobs) < 2)]
    results: list = [None] * len(jobs)
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        futures = {pool.submit(worker, *job): i for i, job in enumerate(jobs)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc):
            results[futures[future]] = future.result()
    return results


def _generate_room(config: RunConfig, index: int, out_dir: Path, master_seed: int) -> ManifestEntry:
    return get_generation_service(config).generate(index, out_dir, master_seed)


def _estimate_room(config: RunConfig, room_dir: Path, results_dir: Path) -> Optional[RoomFailure]:
    try:
        get_pipeline_service(config).estimate_room(room_dir, results_dir)
    except PanoLayoutError as e:
        logger.warning("%s failed: %s: %s", room_dir.name, type(e).__name__, e)
        return RoomFailure(room_id=room_dir.name, error=type(e).__name__, message=str(e))
    return None


def cmd_generate(args: argparse.Namespace) -> int:
    config = load_config(args)
    out_dir = Path(args.out)
    service = get_generation_service(config)
    seed = config.dataset.master_seed
    jobs = [(config, i, out_dir, seed) for i in range(config.dataset.rooms)]
    entries = _map_rooms(_generate_room, jobs, args.jobs, "generate")
    service.write_manifest(out_dir, seed, entries)
    logger.info("wrote %d rooms to %s", len(entries), out_dir)
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    config = load_config(args)
    dataset_dir, out_dir = Path(args.dataset), Path(args.out)
    repository = get_dataset_repository()
    manifest = repository.read_manifest(dataset_dir)
    rooms = manifest.rooms if args.rooms is None else manifest.rooms[:args.rooms]
    jobs = [(config, dataset_dir / r.room_id, out_dir / r.room_id) for r in rooms]
    failures = [f for f in _map_rooms(_estimate_room, jobs, args.jobs, "estimate") if f is not None]
    repository.write_json(out_dir / ERRORS_FILE, [f.model_dump() for f in failures])
    logger.info("estimated %d rooms, %d failed", len(rooms) - len(failures), len(failures))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    service = get_evaluation_service()
    report = service.evaluate(Path(args.dataset), Path(args.results))
    text = service.write_report(report, Path(args.out) if args.out else Path(args.results))
    sys.stdout.write(text)
    return 0


def cmd_floormap(args: argparse.Namespace) -> int:
    repository = get_dataset_repository()
    scene = repository.read_scene(Path(args.scene), get_model_library())
    repository.write_text(Path(args.out), get_floormap_service().render(scene))
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    config = load_config(args)
    repository = get_dataset_repository()
    models = get_model_library()
    out_dir = Path(args.out)
    if args.library:
        rows = []
        for view in tqdm(iter_library_views(models, config.render.model_view_size, config.render.fill_fraction),
                         desc="library"):
            name = f"{view.model_id}/yaw{view.pose.yaw:05.1f}_pitch{view.pose.pitch:04.1f}.png"
            repository.write_gray(out_dir / name, view.intensity)
            rows.append(PoseLibraryRow(category=models[view.model_id].category, model_id=view.model_id,
                                       pose=PoseRecord(yaw=view.pose.yaw, pitch=view.pose.pitch), image_path=name))
        repository.write_json(out_dir / LIBRARY_MANIFEST, [r.model_dump(mode="json", by_alias=True) for r in rows])
        logger.info("rendered %d library views", len(rows))
        return 0
    if args.scene is None:
        raise ConfigurationError("render needs a scene file or --library")
    scene = repository.read_scene(Path(args.scene), models)
    w, h = config.render.pano_width, config.render.pano_height
    repository.write_labels(out_dir / "orientation.png", render_orientation_pano(scene, w, h).labels)
    repository.write_gray(out_dir / "mask.png", render_object_masks(scene, models, w, h))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="panolayout", description="Room layout and object pose from panoramas.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None, help="run configuration JSON")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--jobs", type=int, default=settings.jobs, help="rooms processed in parallel")

    p = sub.add_parser("generate", help="synthesize a room dataset")
    common(p)
    p.add_argument("--out", required=True, help="dataset directory")
    p.add_argument("--rooms", type=int, default=None, help="number of rooms")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="estimate every room of a dataset")
    common(p)
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--out", required=True, help="results directory")
    p.add_argument("--rooms", type=int, default=None, help="only the first N rooms")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", help="evaluate results against the ground truth")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("results", help="results directory")
    p.add_argument("--out", default=None, help="report directory (defaults to the results directory)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("floormap", help="draw a scene file as an SVG floor map")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("--out", required=True, help="SVG file")
    p.set_defaults(func=cmd_floormap)

    p = sub.add_parser("render", help="render a scene or the pose library")
    common(p)
    p.add_argument("scene", nargs="?", default=None, help="scene JSON")
    p.add_argument("--library", action="store_true", help="render the pose library instead")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(settings.log_level)
    try:
        return args.func(args)
    except PanoLayoutError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
