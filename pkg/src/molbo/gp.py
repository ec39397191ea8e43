"""Gaussian-process regression over molecules.

The covariance is ``signal_scale**2 * PSD(K) + noise_var * I`` where K is
the raw kernel Gram over training molecules, PSD-projected once per fit;
cross-covariances with query molecules use raw kernel values scaled by
``signal_scale**2``.  The mean is a fitted constant.  Hyperparameters are
chosen by maximizing the log marginal likelihood with a seeded random
search followed by multiplicative coordinate refinement; the mean
constant is profiled out analytically (its generalized-least-squares
optimum given the other parameters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CholeskyFailure, FitFailure
from .kernel import (
    ALPHA_RANGE,
    BETA_RANGE,
    FingerprintTanimoto,
    GramMatrix,
    KernelCache,
    KernelSpec,
    OTExpSum,
    SumKernel,
    cross_gram,
    gram,
    kernel_value,
    psd_project,
)
from .molgraph import Molecule

NOISE_RANGE = (1e-8, 10.0)
SIGNAL_RANGE = (1e-3, 1e3)

N_SEARCH_SAMPLES = 64
N_REFINE_PASSES = 3
REFINE_FACTOR = 1.5

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GpHyperparams:
    kernel_spec: KernelSpec
    noise_var: float
    mean_const: float
    signal_scale: float

    def __post_init__(self):
        if not NOISE_RANGE[0] <= self.noise_var <= NOISE_RANGE[1]:
            raise ValueError(f"noise_var outside {NOISE_RANGE}")
        if not SIGNAL_RANGE[0] <= self.signal_scale <= SIGNAL_RANGE[1]:
            raise ValueError(f"signal_scale outside {SIGNAL_RANGE}")


@dataclass
class GpPosterior:
    """Fitted GP state: Cholesky factor of the training covariance and the
    dual weights solving it against the centered targets."""

    train_molecules: list[Molecule]
    train_values: np.ndarray
    hyper: GpHyperparams
    chol_factor: np.ndarray
    alpha_vec: np.ndarray
    cache: KernelCache


def _covariance(k_psd: np.ndarray, noise_var: float, signal_scale: float) -> np.ndarray:
    n = k_psd.shape[0]
    return signal_scale**2 * k_psd + noise_var * np.eye(n)


def _cholesky(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(
            "covariance not positive definite; retry with 10x noise floor"
        ) from exc


def _lml_terms(
    k_psd: np.ndarray, ys: np.ndarray, noise_var: float, signal_scale: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Cholesky factor, whitened targets and log-determinant half-term."""
    ktilde = _covariance(k_psd, noise_var, signal_scale)
    chol = _cholesky(ktilde)
    white = solve_triangular(chol, ys, lower=True)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    return chol, white, half_logdet


def log_marginal_likelihood(
    mols: list[Molecule],
    ys,
    hyper: GpHyperparams,
    cache: KernelCache | None = None,
) -> float:
    """Gaussian log evidence of the observations under the prior,
    computed via Cholesky factorization."""
    ys = np.asarray(ys, dtype=float)
    if len(mols) != ys.shape[0] or ys.shape[0] < 1:
        raise ValueError("need equally many molecules and values (at least one)")
    if cache is None:
        cache = KernelCache()
    k_psd = psd_project(gram(mols, hyper.kernel_spec, cache)).values
    r = ys - hyper.mean_const
    chol, white, half_logdet = _lml_terms(k_psd, r, hyper.noise_var, hyper.signal_scale)
    n = ys.shape[0]
    return float(-0.5 * white @ white - half_logdet - 0.5 * n * _LOG_2PI)


# ---------------------------------------------------------------------------
# Hyperparameter fitting
# ---------------------------------------------------------------------------


class _FamilyEvaluator:
    """LML evaluation for one training set with precomputed structure.

    Distances and the fingerprint Gram do not depend on the searched
    hyperparameters, so they are assembled once; each candidate then
    costs one eigendecomposition and one Cholesky factorization.
    """

    def __init__(self, mols, ys, family: KernelSpec, cache: KernelCache):
        self.mols = mols
        self.ys = np.asarray(ys, dtype=float)
        self.family = family
        n = len(mols)
        self.n = n
        self.dist = None
        self.k_fp = None
        if isinstance(family, (OTExpSum, SumKernel)):
            d = np.zeros((4, n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    d[:, i, j] = d[:, j, i] = cache.distance_vector(mols[i], mols[j])
            self.dist = d
        if isinstance(family, (FingerprintTanimoto, SumKernel)):
            fp_spec = family if isinstance(family, FingerprintTanimoto) else family.fingerprint
            self.k_fp = gram(mols, fp_spec, cache).values

    def param_names(self) -> list[str]:
        names = ["noise_var", "signal_scale"]
        if isinstance(self.family, OTExpSum):
            names += [f"beta{i}" for i in range(4)]
        elif isinstance(self.family, SumKernel):
            names += ["alpha1", "alpha2"] + [f"beta{i}" for i in range(4)]
        return names

    def sample(self, rng: np.random.Generator) -> dict[str, float]:
        def log_uniform(lo, hi):
            return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

        params = {
            "noise_var": log_uniform(*NOISE_RANGE),
            "signal_scale": log_uniform(*SIGNAL_RANGE),
        }
        if isinstance(self.family, OTExpSum):
            for i in range(4):
                params[f"beta{i}"] = log_uniform(*BETA_RANGE)
        elif isinstance(self.family, SumKernel):
            params["alpha1"] = float(rng.uniform(*ALPHA_RANGE))
            params["alpha2"] = float(rng.uniform(*ALPHA_RANGE))
            for i in range(4):
                params[f"beta{i}"] = log_uniform(*BETA_RANGE)
        return params

    @staticmethod
    def clamp(name: str, value: float) -> float:
        if name == "noise_var":
            lo, hi = NOISE_RANGE
        elif name == "signal_scale":
            lo, hi = SIGNAL_RANGE
        elif name.startswith("alpha"):
            lo, hi = ALPHA_RANGE
        else:
            lo, hi = BETA_RANGE
        return min(max(value, lo), hi)

    def spec_from(self, params: dict[str, float]) -> KernelSpec:
        if isinstance(self.family, OTExpSum):
            return OTExpSum(tuple(params[f"beta{i}"] for i in range(4)))
        if isinstance(self.family, SumKernel):
            return replace(
                self.family,
                alpha1=params["alpha1"],
                alpha2=params["alpha2"],
                ot=OTExpSum(tuple(params[f"beta{i}"] for i in range(4))),
            )
        return self.family

    def raw_gram(self, params: dict[str, float]) -> np.ndarray:
        if isinstance(self.family, FingerprintTanimoto):
            return self.k_fp
        betas = np.array([params[f"beta{i}"] for i in range(4)])
        k_ot = np.exp(-np.tensordot(betas, self.dist, axes=1))
        if isinstance(self.family, OTExpSum):
            return k_ot
        return params["alpha1"] * self.k_fp + params["alpha2"] * k_ot

    def lml(self, params: dict[str, float]) -> tuple[float, float]:
        """(log marginal likelihood, profiled mean constant)."""
        k_psd = psd_project(GramMatrix(self.raw_gram(params))).values
        ktilde = _covariance(k_psd, params["noise_var"], params["signal_scale"])
        chol = _cholesky(ktilde)
        wy = solve_triangular(chol, self.ys, lower=True)
        w1 = solve_triangular(chol, np.ones(self.n), lower=True)
        mean = float(w1 @ wy / (w1 @ w1))
        white = wy - mean * w1
        half_logdet = float(np.sum(np.log(np.diag(chol))))
        value = float(-0.5 * white @ white - half_logdet - 0.5 * self.n * _LOG_2PI)
        return value, mean


def fit(
    mols: list[Molecule],
    ys,
    spec_family: KernelSpec,
    rng: np.random.Generator,
    cache: KernelCache | None = None,
) -> GpHyperparams:
    """Maximize the marginal likelihood over the family's hyperparameters.

    Seeded random search (64 draws from the documented ranges) followed
    by three greedy coordinate passes with multiplicative steps of 1.5.
    Deterministic given the generator state.
    """
    if len(mols) < 3:
        raise ValueError("fit needs at least three observations")
    if cache is None:
        cache = KernelCache()
    ev = _FamilyEvaluator(mols, ys, spec_family, cache)

    best_params = None
    best_value = -np.inf
    best_mean = 0.0
    for _ in range(N_SEARCH_SAMPLES):
        params = ev.sample(rng)
        try:
            value, mean = ev.lml(params)
        except CholeskyFailure:
            continue
        if value > best_value:
            best_params, best_value, best_mean = params, value, mean
    if best_params is None:
        raise FitFailure("all hyperparameter candidates failed to factorize")

    for _ in range(N_REFINE_PASSES):
        for name in ev.param_names():
            for factor in (REFINE_FACTOR, 1.0 / REFINE_FACTOR):
                trial = dict(best_params)
                trial[name] = ev.clamp(name, trial[name] * factor)
                if trial[name] == best_params[name]:
                    continue
                try:
                    value, mean = ev.lml(trial)
                except CholeskyFailure:
                    continue
                if value > best_value:
                    best_params, best_value, best_mean = trial, value, mean

    return GpHyperparams(
        kernel_spec=ev.spec_from(best_params),
        noise_var=best_params["noise_var"],
        mean_const=best_mean,
        signal_scale=best_params["signal_scale"],
    )


# ---------------------------------------------------------------------------
# Posterior
# ---------------------------------------------------------------------------


def build_posterior(
    mols: list[Molecule],
    ys,
    hyper: GpHyperparams,
    cache: KernelCache | None = None,
) -> GpPosterior:
    """Factorize the training covariance and precompute dual weights."""
    ys = np.asarray(ys, dtype=float)
    if cache is None:
        cache = KernelCache()
    k_psd = psd_project(gram(mols, hyper.kernel_spec, cache)).values
    ktilde = _covariance(k_psd, hyper.noise_var, hyper.signal_scale)
    chol = _cholesky(ktilde)
    white = solve_triangular(chol, ys - hyper.mean_const, lower=True)
    alpha_vec = solve_triangular(chol.T, white, lower=False)
    return GpPosterior(
        train_molecules=list(mols),
        train_values=ys,
        hyper=hyper,
        chol_factor=chol,
        alpha_vec=alpha_vec,
        cache=cache,
    )


def posterior_batch(gp: GpPosterior, xs: list[Molecule]) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at each query molecule."""
    hyper = gp.hyper
    s2 = hyper.signal_scale**2
    k_cross = s2 * cross_gram(gp.train_molecules, xs, hyper.kernel_spec, gp.cache)
    mu = hyper.mean_const + k_cross.T @ gp.alpha_vec
    w = solve_triangular(gp.chol_factor, k_cross, lower=True)
    prior = np.array([s2 * kernel_value(x, x, hyper.kernel_spec, gp.cache) for x in xs])
    var = np.maximum(0.0, prior - np.sum(w * w, axis=0))
    return mu, var


def posterior(gp: GpPosterior, x: Molecule) -> tuple[float, float]:
    """Posterior mean and (clamped nonnegative) variance at one molecule."""
    mu, var = posterior_batch(gp, [x])
    return float(mu[0]), float(var[0])
