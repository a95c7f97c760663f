"""
posterior_service.py

Scoring of room hypotheses against one observed bundle. The crop descriptors of the
bundle are computed once per service, so the sampler's hundreds of calls only pay for
rendering and the context terms.
"""

import logging

from panolayout.config import PosteriorConfig
from panolayout.models import ModelSpec, ObservedBundle, PosteriorBreakdown, SceneParameters
from panolayout.pose.library import PoseLibrary
from panolayout.posterior.score import crop_descriptors, log_posterior
from panolayout.schemas import PosteriorRow

logger = logging.getLogger(__name__)


class PosteriorService:
    """
    Attributes:
        bundle (ObservedBundle): Observation every hypothesis is scored against.
        library (PoseLibrary): Rendered pose library.
        models (dict[str, ModelSpec]): Model library.
        config (PosteriorConfig): Weights and variants of the posterior terms.
    """

    def __init__(self, bundle: ObservedBundle, library: PoseLibrary, models: dict[str, ModelSpec],
                 config: PosteriorConfig):
        self.bundle = bundle
        self.library = library
        self.models = models
        self.config = config
        self.descriptors = crop_descriptors(bundle.crops)

    def score(self, hypothesis: SceneParameters) -> PosteriorBreakdown:
        return log_posterior(self.bundle, hypothesis, self.config, self.library, self.models, self.descriptors)

    def __call__(self, hypothesis: SceneParameters) -> PosteriorBreakdown:
        return self.score(hypothesis)

    def row(self, seed: int, hypothesis: SceneParameters, breakdown: PosteriorBreakdown | None = None) -> PosteriorRow:
        b = breakdown if breakdown is not None else self.score(hypothesis)
        return PosteriorRow(seed=seed, scale=hypothesis.scale, e_s=b.e_s, e_o=b.e_o, e_ow=b.e_ow, e_oo=b.e_oo,
                            log_posterior=b.log_posterior)
