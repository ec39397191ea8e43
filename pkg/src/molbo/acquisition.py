"""Acquisition functions and the adaptive acquisition ensemble.

EI, UCB and a top-two variant of EI (TTEI) score candidates from the GP
posterior.  The optimizer samples one acquisition per iteration from an
adaptive multiplicative-weights distribution: the acquisition used has
its weight multiplied by ``exp(eta)`` whenever the iteration improved
the incumbent, and weights are renormalized after every update.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

DEFAULT_TT_EPSILON = 0.3
ENSEMBLE_ETA = 0.5


class AcquisitionKind(enum.Enum):
    EI = "EI"
    UCB = "UCB"
    TTEI = "TTEI"


def ucb_beta_schedule(t: int) -> float:
    """2 log(t^2 pi^2 / 6), clamped below at 0.5."""
    if t < 1:
        raise ValueError("iteration index starts at 1")
    return max(0.5, 2.0 * math.log(t * t * math.pi * math.pi / 6.0))


@dataclass(frozen=True)
class AcquisitionState:
    kind: AcquisitionKind
    best_observed: float
    iteration_t: int
    ucb_beta: float
    tt_epsilon: float
    rng_seed: int

    @classmethod
    def for_iteration(
        cls,
        kind: AcquisitionKind,
        best_observed: float,
        iteration_t: int,
        tt_epsilon: float = DEFAULT_TT_EPSILON,
        rng_seed: int = 0,
    ) -> "AcquisitionState":
        return cls(
            kind=kind,
            best_observed=best_observed,
            iteration_t=iteration_t,
            ucb_beta=ucb_beta_schedule(iteration_t),
            tt_epsilon=tt_epsilon,
            rng_seed=rng_seed,
        )


def ei(mu, sigma, best):
    """Expected improvement over ``best``; exact max(0, mu - best) at
    sigma = 0.  Accepts scalars or arrays."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be nonnegative")
    safe = np.where(sigma > 0, sigma, 1.0)
    z = (mu - best) / safe
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    value = (mu - best) * ndtr(z) + safe * pdf
    value = np.where(sigma > 0, value, np.maximum(0.0, mu - best))
    return float(value) if value.ndim == 0 else value


def ucb(mu, sigma, beta_t):
    """Upper confidence bound mu + sqrt(beta_t) * sigma."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be nonnegative")
    if beta_t <= 0:
        raise ValueError("beta_t must be positive")
    value = mu + math.sqrt(beta_t) * sigma
    return float(value) if value.ndim == 0 else value


def ttei(candidates, best, epsilon, rng: np.random.Generator) -> np.ndarray:
    """Top-two expected improvement.

    With probability ``1 - epsilon`` this is plain EI against ``best``;
    otherwise the anchor is re-based at the posterior mean of the EI
    argmax candidate (if higher), drawn once per call.
    """
    pairs = list(candidates)
    if not pairs:
        raise ValueError("ttei needs at least one candidate")
    mu = np.array([p[0] for p in pairs], dtype=float)
    sigma = np.array([p[1] for p in pairs], dtype=float)
    base = np.atleast_1d(ei(mu, sigma, best))
    if rng.random() >= epsilon:
        return base
    anchor = max(best, float(mu[int(np.argmax(base))]))
    return np.atleast_1d(ei(mu, sigma, anchor))


@dataclass
class EnsembleWeights:
    """Adaptive multiplicative weights over {EI, UCB, TTEI}.

    Weights start at one each; ``update`` multiplies the used
    acquisition's weight by ``exp(eta * reward)`` (reward 1 on incumbent
    improvement, else 0) and renormalizes.
    """

    weights: np.ndarray = field(default_factory=lambda: np.ones(3))
    eta: float = ENSEMBLE_ETA

    _KINDS = (AcquisitionKind.EI, AcquisitionKind.UCB, AcquisitionKind.TTEI)

    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def update(self, kind: AcquisitionKind, improved: bool):
        reward = 1.0 if improved else 0.0
        self.weights[self._KINDS.index(kind)] *= math.exp(self.eta * reward)
        self.weights = self.weights / self.weights.sum()


def ensemble_pick(weights: EnsembleWeights, rng: np.random.Generator) -> AcquisitionKind:
    """Sample the acquisition to use this iteration."""
    idx = int(rng.choice(3, p=weights.probabilities()))
    return EnsembleWeights._KINDS[idx]
