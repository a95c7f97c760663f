"""
sampler.py

Best-of-samples MAP search over scene hypotheses.

Each proposal redraws the global scale from the wall-height interval and moves every
object with an anisotropic normal step: wide along the camera-object ray, narrow across
it, both variances proportional to the camera-object distance. Orientations get a small
normal perturbation. Rescaling moves the objects with the walls, so a proposal keeps the
seed's arrangement relative to the room. Proposals of an epoch are drawn around the epoch
seed; the proposal with the largest context prior seeds the next epoch, and the hypothesis
with the largest log posterior over all epochs (the initial hypothesis included) is returned.

Every proposal has its own generator addressed by `(master_seed, sample_seed)`, with
sample seeds counting up across epochs, so the trace does not depend on how proposals
are scheduled.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from panolayout.config import SamplerConfig
from panolayout.models import REFERENCE_WALL_HEIGHT, PosteriorBreakdown, SceneParameters
from panolayout.posterior.context import context_log_prior
from panolayout.schemas import TraceRow
from panolayout.utils import make_rng, wrap_degrees

logger = logging.getLogger(__name__)

Scorer = Callable[[SceneParameters], PosteriorBreakdown]

# trace seed of an epoch seed rescaled to the epoch's best surface fit
RESCALED_SEED = -2


@dataclass
class MapResult:
    best: SceneParameters
    breakdown: PosteriorBreakdown
    trace: list[TraceRow] = field(default_factory=list)
    initial: PosteriorBreakdown | None = None


def propose(current: SceneParameters, config: SamplerConfig, sample_seed: int) -> SceneParameters:
    """
    One proposal around `current`, deterministic in `(config.master_seed, sample_seed)`.

    Draw order: the scale, then per object the along-ray step, the across-ray step and the
    orientation step.
    """

    rng = make_rng(config.master_seed, sample_seed)
    low, high = config.scale_range
    scaled = current.with_scale(rng.uniform(low, high) / REFERENCE_WALL_HEIGHT)
    objects = []
    for obj in scaled.objects:
        p = np.asarray(obj.position, dtype=float)
        dist = float(np.hypot(*p))
        along = p / dist if dist > 0.0 else np.array([1.0, 0.0])
        perp = np.array([-along[1], along[0]])
        step_along = rng.normal(0.0, np.sqrt(config.loc_var_along * dist))
        step_perp = rng.normal(0.0, np.sqrt(config.loc_var_perp * dist))
        turn = np.rad2deg(rng.normal(0.0, config.orient_sigma))
        position = p + step_along * along + step_perp * perp
        objects.append(obj.moved(position=position, orientation=wrap_degrees(obj.orientation + turn)))
    return scaled.with_objects(objects)


def sample_counts(config: SamplerConfig) -> list[int]:
    """
    Proposals per epoch. Without an override every epoch draws `samples_per_epoch`; with
    `total_override` the total is split as evenly as possible, earlier epochs taking the remainder.
    """

    if config.total_override is None:
        return [config.samples_per_epoch] * config.epochs
    base, extra = divmod(config.total_override, config.epochs)
    return [base + (1 if e < extra else 0) for e in range(config.epochs)]


def _prior(b: PosteriorBreakdown, mu: float) -> float:
    return context_log_prior(b.e_ow, b.e_oo, mu)


def run_map(score: Scorer, init: SceneParameters, config: SamplerConfig, mu: float = 0.25) -> MapResult:
    """
    Epoch-seeded best-of-samples search.

    With `config.rescale_seed`, the next epoch's seed is the prior-best proposal rescaled to
    the scale of the epoch's lowest surface cost. That seed is scored like a proposal and
    traced with seed RESCALED_SEED and index `count`.

    Args:
        score (Callable): Maps a hypothesis to its PosteriorBreakdown.
        init (SceneParameters): Initial hypothesis, also a candidate.
        config (SamplerConfig): Epoch layout, variances and seeds.
        mu (float): Overlap weight of the context prior used for epoch seeding.

    Returns:
        MapResult: Best hypothesis, its breakdown and one trace row per scored hypothesis.
    """

    init_score = score(init)
    result = MapResult(best=init, breakdown=init_score, initial=init_score)

    def record(candidate: SceneParameters, b: PosteriorBreakdown, epoch: int, index: int, seed: int) -> None:
        result.trace.append(TraceRow(epoch=epoch, index=index, seed=seed, scale=candidate.scale, e_s=b.e_s,
                                     e_o=b.e_o, e_ow=b.e_ow, e_oo=b.e_oo, log_posterior=b.log_posterior))
        if b.log_posterior > result.breakdown.log_posterior:
            result.best, result.breakdown = candidate, b

    seed_scene = init
    counter = 0
    for epoch, count in enumerate(sample_counts(config)):
        epoch_best, epoch_prior = None, -np.inf
        surface_best, surface_cost = None, np.inf
        for index in range(count):
            sample_seed = counter
            counter += 1
            candidate = propose(seed_scene, config, sample_seed)
            b = score(candidate)
            record(candidate, b, epoch, index, sample_seed)
            prior = _prior(b, mu)
            if prior > epoch_prior:
                epoch_best, epoch_prior = candidate, prior
            if b.e_s < surface_cost:
                surface_best, surface_cost = candidate, b.e_s
        if epoch_best is None:
            continue
        seed_scene = epoch_best
        if config.rescale_seed and surface_best.scale != epoch_best.scale:
            seed_scene = epoch_best.with_scale(surface_best.scale)
            b = score(seed_scene)
            record(seed_scene, b, epoch, count, RESCALED_SEED)
            epoch_prior = _prior(b, mu)
        logger.info("epoch %d: %d samples, best log posterior %.4f, seed prior %.4f at scale %.3f", epoch, count,
                    result.breakdown.log_posterior, epoch_prior, seed_scene.scale)
    return result
