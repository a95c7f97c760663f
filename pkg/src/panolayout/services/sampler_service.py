"""
sampler_service.py

MAP search for one room: runs the epoch sampler against a PosteriorService, or, with
sampling disabled, scores the initial hypothesis and returns it unchanged.
"""

import logging

from panolayout.config import PosteriorConfig, SamplerConfig
from panolayout.models import SceneParameters
from panolayout.sampler import MapResult, run_map
from panolayout.services.posterior_service import PosteriorService

logger = logging.getLogger(__name__)


class SamplerService:
    def __init__(self, config: SamplerConfig, posterior: PosteriorConfig):
        self.config = config
        self.posterior = posterior

    def run_map(self, scorer: PosteriorService, init: SceneParameters) -> MapResult:
        if not self.config.enabled:
            breakdown = scorer.score(init)
            logger.info("sampling disabled; keeping the initial hypothesis (log posterior %.4f)",
                        breakdown.log_posterior)
            return MapResult(best=init, breakdown=breakdown, initial=breakdown)
        result = run_map(scorer.score, init, self.config, mu=self.posterior.mu)
        logger.info("MAP after %d samples: log posterior %.4f (initial %.4f), scale %.3f", len(result.trace),
                    result.breakdown.log_posterior, result.initial.log_posterior, result.best.scale)
        return result
