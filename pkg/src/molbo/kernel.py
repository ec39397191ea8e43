"""Kernel families over molecules and Gram-matrix machinery.

Three families: Tanimoto similarity of path fingerprints, an exponential
sum over the four transport dissimilarities (``exp(-sum_i beta_i d_i)``),
and their weighted sum ``alpha1 * k_fp + alpha2 * k_ot``.  The transport
kernel is not known to be positive definite, so training Gram matrices
are projected onto the PSD cone by eigenvalue clamping before GP use;
cross-covariances keep raw kernel values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigenFailure
from .fingerprint import (
    DEFAULT_MAX_PATH_LEN,
    DEFAULT_N_BITS,
    Fingerprint,
    path_fingerprint,
    tanimoto,
)
from .molgraph import Molecule
from .otdist import distance_vector

#: Hyperparameter search ranges (log-uniform for betas).
BETA_RANGE = (1e-4, 10.0)
ALPHA_RANGE = (0.0, 10.0)

DEFAULT_PSD_FLOOR = 1e-10


@dataclass(frozen=True)
class FingerprintTanimoto:
    """Tanimoto similarity of path fingerprints."""

    n_bits: int = DEFAULT_N_BITS
    max_path_len: int = DEFAULT_MAX_PATH_LEN


@dataclass(frozen=True)
class OTExpSum:
    """exp(-sum_i beta_i d_i) over the four transport dissimilarities."""

    betas: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if len(self.betas) != 4:
            raise ValueError("OTExpSum takes exactly four betas")
        if any(b < 0 for b in self.betas):
            raise ValueError("betas must be nonnegative")


@dataclass(frozen=True)
class SumKernel:
    """alpha1 * fingerprint kernel + alpha2 * transport kernel."""

    alpha1: float = 1.0
    alpha2: float = 1.0
    fingerprint: FingerprintTanimoto = field(default_factory=FingerprintTanimoto)
    ot: OTExpSum = field(default_factory=OTExpSum)

    def __post_init__(self):
        lo, hi = ALPHA_RANGE
        if not (lo <= self.alpha1 <= hi and lo <= self.alpha2 <= hi):
            raise ValueError(f"alphas must lie in [{lo}, {hi}]")


KernelSpec = FingerprintTanimoto | OTExpSum | SumKernel


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    psd_projected: bool = False


class KernelCache:
    """Memo for pairwise distance vectors and per-molecule fingerprints.

    Keyed by canonical form, so isomorphic molecules share entries.  A
    cache is plain state owned by one optimization run; kernel functions
    stay pure with or without it.
    """

    def __init__(self):
        self._distances: dict[tuple[str, str], np.ndarray] = {}
        self._fingerprints: dict[tuple[str, int, int], Fingerprint] = {}

    def distance_vector(self, x: Molecule, y: Molecule) -> np.ndarray:
        kx, ky = x.canonical_form, y.canonical_form
        key = (kx, ky) if kx <= ky else (ky, kx)
        vec = self._distances.get(key)
        if vec is None:
            vec = distance_vector(x, y)
            self._distances[key] = vec
        return vec

    def fingerprint(self, x: Molecule, spec: FingerprintTanimoto) -> Fingerprint:
        key = (x.canonical_form, spec.n_bits, spec.max_path_len)
        fp = self._fingerprints.get(key)
        if fp is None:
            fp = path_fingerprint(x, spec.n_bits, spec.max_path_len)
            self._fingerprints[key] = fp
        return fp


def kernel_value(
    x: Molecule, y: Molecule, spec: KernelSpec, cache: KernelCache | None = None
) -> float:
    """Kernel between two molecules under the given family."""
    if cache is None:
        cache = KernelCache()
    if isinstance(spec, FingerprintTanimoto):
        return tanimoto(cache.fingerprint(x, spec), cache.fingerprint(y, spec))
    if isinstance(spec, OTExpSum):
        d = cache.distance_vector(x, y)
        return float(np.exp(-float(np.dot(spec.betas, d))))
    if isinstance(spec, SumKernel):
        return spec.alpha1 * kernel_value(x, y, spec.fingerprint, cache) + (
            spec.alpha2 * kernel_value(x, y, spec.ot, cache)
        )
    raise TypeError(f"unknown kernel spec: {spec!r}")


def gram(
    mols: list[Molecule], spec: KernelSpec, cache: KernelCache | None = None
) -> GramMatrix:
    """Pairwise kernel matrix; deterministic, symmetric by construction.

    Pair evaluations are independent and could fan out to workers; this
    implementation fills the upper triangle sequentially.
    """
    if not mols:
        raise ValueError("gram() needs at least one molecule")
    if cache is None:
        cache = KernelCache()
    n = len(mols)
    values = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            values[i, j] = values[j, i] = kernel_value(mols[i], mols[j], spec, cache)
    return GramMatrix(values=values, psd_projected=False)


def cross_gram(
    rows: list[Molecule],
    cols: list[Molecule],
    spec: KernelSpec,
    cache: KernelCache | None = None,
) -> np.ndarray:
    """Raw kernel values between two molecule lists (no projection)."""
    if cache is None:
        cache = KernelCache()
    out = np.empty((len(rows), len(cols)))
    for i, x in enumerate(rows):
        for j, y in enumerate(cols):
            out[i, j] = kernel_value(x, y, spec, cache)
    return out


def psd_project(g: GramMatrix, floor: float = DEFAULT_PSD_FLOOR) -> GramMatrix:
    """Clamp eigenvalues below ``floor`` up to it and reconstruct.

    Identity (up to the floor) on matrices already in the cone.
    """
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    values = g.values
    if not np.allclose(values, values.T, atol=1e-12, rtol=0.0):
        raise ValueError("psd_project expects a symmetric matrix")
    try:
        w, v = np.linalg.eigh(values)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if w[0] >= floor:
        return GramMatrix(values=values.copy(), psd_projected=True)
    w = np.maximum(w, floor)
    projected = (v * w) @ v.T
    projected = (projected + projected.T) / 2.0
    return GramMatrix(values=projected, psd_projected=True)
