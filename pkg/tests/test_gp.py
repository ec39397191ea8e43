import math
import random

import numpy as np
import pytest

import oracles
from conftest import random_molecule
from molbo.gp import (
    GpHyperparams,
    build_posterior,
    fit,
    log_marginal_likelihood,
    posterior,
    posterior_batch,
)
from molbo.kernel import KernelCache, OTExpSum, gram, kernel_value, psd_project
from molbo.molgraph import add_explicit_hydrogens, parse_smiles

BETAS = (0.5, 0.0, 0.05, 0.0)
SPEC = OTExpSum(BETAS)


def expand(text):
    return add_explicit_hydrogens(parse_smiles(text))


def distinct_molecules(rng, count, max_heavy=6):
    out = {}
    while len(out) < count:
        m = random_molecule(rng, max_heavy=max_heavy)
        out.setdefault(m.canonical_form, m)
    return list(out.values())


def hyper(noise=1e-4, mean=0.0, signal=1.0, spec=SPEC):
    return GpHyperparams(kernel_spec=spec, noise_var=noise, mean_const=mean,
                         signal_scale=signal)


class TestLogMarginalLikelihood:
    def test_single_point_closed_form(self):
        mol = expand("CCO")
        h = hyper(noise=1e-8, mean=0.5, signal=1.0)
        got = log_marginal_likelihood([mol], [0.5], h)
        # unit kernel value, zero residual: -0.5 log(2 pi (1 + 1e-8))
        assert got == pytest.approx(-0.5 * math.log(2 * math.pi * (1 + 1e-8)), abs=1e-10)

    def test_matches_dense_oracle_small_n(self):
        rng = random.Random(0)
        nprng = np.random.default_rng(0)
        for n in (1, 2, 3):
            for _ in range(10):
                mols = distinct_molecules(rng, n)
                ys = nprng.normal(size=n)
                h = hyper(noise=0.05, mean=float(nprng.normal()), signal=1.3)
                cache = KernelCache()
                k_psd = psd_project(gram(mols, h.kernel_spec, cache)).values
                want = oracles.dense_lml(k_psd, ys, h.mean_const, h.noise_var,
                                         h.signal_scale)
                assert log_marginal_likelihood(mols, ys, h, cache) == pytest.approx(
                    want, abs=1e-8
                )

    def test_quadratic_term_scaling(self):
        rng = random.Random(1)
        mols = distinct_molecules(rng, 4)
        ys = np.array([0.3, -0.2, 0.8, 0.1])
        h = hyper(noise=0.1, mean=0.0)
        n = len(mols)
        base = log_marginal_likelihood(mols, ys, h)
        doubled = log_marginal_likelihood(mols, 2 * ys, h)
        cache = KernelCache()
        k_psd = psd_project(gram(mols, h.kernel_spec, cache)).values
        logdet_part = oracles.dense_lml(k_psd, np.zeros(n), 0.0, h.noise_var,
                                        h.signal_scale)
        quad_base = base - logdet_part
        quad_doubled = doubled - logdet_part
        assert quad_doubled == pytest.approx(4 * quad_base, rel=1e-9)

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            log_marginal_likelihood([expand("C")], [1.0, 2.0], hyper())


class TestPosterior:
    def test_interpolates_training_points(self):
        rng = random.Random(3)
        mols = distinct_molecules(rng, 8)
        ys = np.linspace(-1, 1, len(mols))
        gp = build_posterior(mols, ys, hyper(noise=1e-8))
        for m, y in zip(mols, ys):
            mu, var = posterior(gp, m)
            assert abs(mu - y) <= 1e-3
            assert var <= 1e-3

    def test_prior_reversion_far_away(self):
        # huge betas drive the kernel to ~0 for any distinct pair
        spec = OTExpSum((10.0, 10.0, 10.0, 10.0))
        mols = [expand(s) for s in ("CCCCCCCC", "NCCN", "OCCO")]
        ys = np.array([5.0, 6.0, 7.0])
        h = hyper(noise=1e-6, mean=1.25, signal=2.0, spec=spec)
        gp = build_posterior(mols, ys, h)
        mu, var = posterior(gp, expand("S=C=S"))
        assert mu == pytest.approx(1.25, abs=1e-3)
        assert var == pytest.approx(4.0 * kernel_value(expand("S=C=S"), expand("S=C=S"), spec), abs=1e-3)

    def test_variance_nonnegative_everywhere(self):
        rng = random.Random(4)
        mols = distinct_molecules(rng, 6)
        ys = np.arange(6.0)
        gp = build_posterior(mols, ys, hyper(noise=1e-8, signal=3.0))
        queries = [random_molecule(rng) for _ in range(200)]
        _, var = posterior_batch(gp, queries)
        assert np.all(var >= 0.0)

    def test_variance_bounded_by_prior(self):
        rng = random.Random(5)
        mols = distinct_molecules(rng, 5)
        ys = np.zeros(5)
        h = hyper(noise=0.01, signal=2.0)
        gp = build_posterior(mols, ys, h)
        for _ in range(40):
            q = random_molecule(rng)
            _, var = posterior(gp, q)
            prior = h.signal_scale**2 * kernel_value(q, q, h.kernel_spec)
            assert var <= prior + 1e-8

    def test_adding_a_point_never_increases_variance(self):
        rng = random.Random(6)
        nprng = np.random.default_rng(6)
        for _ in range(25):
            mols = distinct_molecules(rng, 6)
            train, extra = mols[:4], mols[4]
            query = mols[5]
            ys = nprng.normal(size=4)
            h = hyper(noise=0.01)
            gp_small = build_posterior(train, ys, h)
            gp_big = build_posterior(
                train + [extra], np.append(ys, nprng.normal()), h
            )
            _, var_small = posterior(gp_small, query)
            _, var_big = posterior(gp_big, query)
            assert var_big <= var_small + 1e-6


class TestFit:
    def test_deterministic_given_seed(self):
        rng = random.Random(8)
        mols = distinct_molecules(rng, 6)
        ys = np.linspace(0, 1, 6)
        h1 = fit(mols, ys, OTExpSum(), np.random.default_rng(42))
        h2 = fit(mols, ys, OTExpSum(), np.random.default_rng(42))
        assert h1 == h2

    def test_constant_targets_fit_mean(self):
        rng = random.Random(9)
        mols = distinct_molecules(rng, 5)
        ys = np.full(5, 2.5)
        h = fit(mols, ys, OTExpSum(), np.random.default_rng(0))
        assert abs(h.mean_const - 2.5) <= 0.1

    def test_reaches_lml_of_generating_params(self):
        # self-consistency: the fitted optimum is at least as good (up to
        # a small slack) as the parameters that generated the data
        rng = random.Random(10)
        nprng = np.random.default_rng(10)
        mols = distinct_molecules(rng, 10)
        true = hyper(noise=0.01, mean=0.0, signal=1.0)
        cache = KernelCache()
        k = psd_project(gram(mols, true.kernel_spec, cache)).values
        cov = true.signal_scale**2 * k + true.noise_var * np.eye(len(mols))
        ys = np.linalg.cholesky(cov) @ nprng.standard_normal(len(mols))
        fitted = fit(mols, ys, OTExpSum(), np.random.default_rng(1), cache)
        lml_true = log_marginal_likelihood(mols, ys, true, cache)
        lml_fit = log_marginal_likelihood(mols, ys, fitted, cache)
        assert lml_fit >= lml_true - 0.1

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            fit([expand("C"), expand("CC")], [0.0, 1.0], OTExpSum(),
                np.random.default_rng(0))

    def test_cholesky_failure_raises(self):
        from molbo.errors import CholeskyFailure
        from molbo.gp import _cholesky

        with pytest.raises(CholeskyFailure):
            _cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
