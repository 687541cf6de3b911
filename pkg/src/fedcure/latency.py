"""Coalition upload latency: ground-truth generator and conjugate estimator."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidFrequency, InvalidObservation

# floor on the observation std relative to the prior mean, used when noise_sigma = 0
MIN_REL_OBS_STD = 1e-6


@dataclass(frozen=True)
class LatencyModel:
    comp_load: np.ndarray  # per client, cycles / local step
    comm_delay: np.ndarray  # per client, s
    edge_cloud_delay: np.ndarray  # per coalition, s
    noise_sigma: float = 0.0  # log-space std of the multiplicative straggler factor
    tau_c: int = 1
    tau_e: int = 1

    def __post_init__(self):
        for name in ("comp_load", "comm_delay", "edge_cloud_delay"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.comm_delay < 0) or np.any(self.edge_cloud_delay < 0):
            raise ValueError("delays must be nonnegative")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    def deterministic_latency(self, coalition: int, members: Sequence[int], freqs: Sequence[float]) -> float:
        """Latency with the noise factor fixed at 1."""
        members = np.asarray(members, dtype=int)
        f = np.asarray(freqs, dtype=float)
        if members.size == 0:
            raise ValueError("coalition has no members")
        if f.shape != members.shape:
            raise ValueError("one frequency per member required")
        if np.any(~(f > 0)):
            raise InvalidFrequency("frequencies must be strictly positive")
        step = self.tau_c * self.comp_load[members] / f + self.comm_delay[members]
        return float(self.tau_e * step.max() + self.edge_cloud_delay[coalition])


def realize_latency(
    model: LatencyModel,
    coalition: int,
    members: Sequence[int],
    freqs: Sequence[float],
    rng: np.random.Generator,
) -> float:
    """tau_e * max_n(tau_c c_n / f_n + comm_n) * LogNormal(0, sigma) + edge-cloud delay.

    Exactly one normal draw is consumed per call, even when sigma = 0, so a
    coalition's noise sequence does not depend on the noise level.
    """
    members = np.asarray(members, dtype=int)
    f = np.asarray(freqs, dtype=float)
    if members.size == 0:
        raise ValueError("coalition has no members")
    if np.any(~(f > 0)):
        raise InvalidFrequency("frequencies must be strictly positive")
    step = model.tau_c * model.comp_load[members] / f + model.comm_delay[members]
    factor = float(np.exp(model.noise_sigma * rng.standard_normal()))
    return float(model.tau_e * step.max() * factor + model.edge_cloud_delay[coalition])


@dataclass(frozen=True)
class LatencyBelief:
    """Normal prior on the mean latency, Normal likelihood with known variance."""

    prior_mean: float
    prior_var: float
    obs_var: float
    n_obs: int = 0
    obs_sum: float = 0.0

    def __post_init__(self):
        if not (self.prior_var > 0 and self.obs_var > 0):
            raise ValueError("prior_var and obs_var must be > 0")
        if self.n_obs < 0:
            raise ValueError("n_obs must be >= 0")

    @property
    def precision(self) -> float:
        return 1.0 / self.prior_var + self.n_obs / self.obs_var

    @property
    def posterior_var(self) -> float:
        return 1.0 / self.precision

    @property
    def posterior_mean(self) -> float:
        return (self.prior_mean / self.prior_var + self.obs_sum / self.obs_var) / self.precision

    @property
    def prior_weight(self) -> float:
        """Weight of the prior mean in the posterior mean (the rest goes to the sample mean)."""
        return (1.0 / self.prior_var) / self.precision

    @classmethod
    def from_first_observation(cls, latency: float, noise_sigma: float) -> "LatencyBelief":
        """Prior centred on an initial measurement, sd equal to it; obs sd = sigma * mu0."""
        if not latency > 0:
            raise InvalidObservation(f"latency must be > 0, got {latency!r}")
        obs_sd = max(noise_sigma, MIN_REL_OBS_STD) * latency
        return cls(prior_mean=latency, prior_var=latency**2, obs_var=obs_sd**2)


def update_belief(belief: LatencyBelief, observation: float) -> LatencyBelief:
    if not observation > 0:
        raise InvalidObservation(f"latency observation must be > 0, got {observation!r}")
    return replace(belief, n_obs=belief.n_obs + 1, obs_sum=belief.obs_sum + float(observation))


def estimate(belief: LatencyBelief) -> float:
    return belief.posterior_mean
