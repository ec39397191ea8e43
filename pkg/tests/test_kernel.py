import random

import numpy as np
import pytest

from conftest import random_molecule
from molbo.kernel import (
    FingerprintTanimoto,
    GramMatrix,
    KernelCache,
    OTExpSum,
    SumKernel,
    gram,
    kernel_value,
    psd_project,
)
from molbo.molgraph import add_explicit_hydrogens, parse_smiles


def expand(text):
    return add_explicit_hydrogens(parse_smiles(text))


class TestKernelValue:
    def test_ot_self_similarity_is_one(self):
        mol = expand("CC(=O)O")
        assert kernel_value(mol, mol, OTExpSum((1, 2, 3, 4))) == 1.0

    def test_ot_zero_betas(self):
        a, b = expand("C"), expand("CCCCO")
        assert kernel_value(a, b, OTExpSum((0, 0, 0, 0))) == 1.0

    def test_sum_degenerates_to_tanimoto(self):
        a, b = expand("CCO"), expand("CCC")
        spec = SumKernel(alpha1=1.0, alpha2=0.0)
        assert kernel_value(a, b, spec) == pytest.approx(
            kernel_value(a, b, spec.fingerprint), abs=1e-15
        )

    def test_symmetry_and_ranges(self):
        rng = random.Random(1)
        for _ in range(10):
            a, b = random_molecule(rng), random_molecule(rng)
            ot = kernel_value(a, b, OTExpSum((0.5, 1.0, 0.02, 1.0)))
            fp = kernel_value(a, b, FingerprintTanimoto())
            both = kernel_value(a, b, SumKernel(alpha1=2.0, alpha2=3.0))
            assert 0.0 < ot <= 1.0
            assert 0.0 <= fp <= 1.0
            assert 0.0 <= both <= 5.0
            assert ot == pytest.approx(
                kernel_value(b, a, OTExpSum((0.5, 1.0, 0.02, 1.0))), abs=1e-12
            )

    def test_beta_validation(self):
        with pytest.raises(ValueError):
            OTExpSum((-1.0, 0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            OTExpSum((1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            SumKernel(alpha1=11.0)


class TestGram:
    def test_single_molecule(self):
        g = gram([expand("CCO")], OTExpSum())
        assert g.values.shape == (1, 1)
        assert g.values[0, 0] == 1.0

    def test_ot_diagonal_ones(self):
        mols = [expand(s) for s in ("C", "CC", "CCO", "CC(C)C")]
        g = gram(mols, OTExpSum((0.3, 1.0, 0.02, 1.0)))
        assert np.allclose(np.diag(g.values), 1.0)

    def test_symmetric(self):
        mols = [expand(s) for s in ("C", "CC", "CCO", "CC(C)C", "CCCN")]
        g = gram(mols, SumKernel())
        assert np.abs(g.values - g.values.T).max() <= 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gram([], OTExpSum())


class TestPsdProject:
    def test_identity_on_psd(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(6, 6))
        psd = a @ a.T
        out = psd_project(GramMatrix(psd), floor=0.0)
        assert out.psd_projected
        assert np.abs(out.values - psd).max() <= 1e-10

    def test_hand_derived_two_by_two(self):
        # eigenvalues 3 and -1 with eigenvectors (1,1)/sqrt2, (1,-1)/sqrt2
        g = GramMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
        out = psd_project(g, floor=0.0)
        assert np.abs(out.values - np.array([[1.5, 1.5], [1.5, 1.5]])).max() <= 1e-9

    def test_random_indefinite_matrices(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            a = rng.normal(size=(20, 20))
            sym = (a + a.T) / 2
            out = psd_project(GramMatrix(sym))
            assert np.linalg.eigvalsh(out.values)[0] >= -1e-8

    def test_quadratic_form_after_projection(self):
        rng = np.random.default_rng(2)
        mols = [expand(s) for s in ("C", "CC", "CCO", "CC(C)C", "CCCN", "COC")]
        g = psd_project(gram(mols, OTExpSum((0.5, 1, 0.02, 1))))
        for _ in range(50):
            z = rng.normal(size=6)
            assert z @ g.values @ z >= -1e-6 * (z @ z)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            psd_project(GramMatrix(np.array([[1.0, 0.5], [0.2, 1.0]])))

    def test_rejects_negative_floor(self):
        with pytest.raises(ValueError):
            psd_project(GramMatrix(np.eye(2)), floor=-1.0)


def test_cache_shares_isomorphic_entries():
    cache = KernelCache()
    a1, a2 = expand("CCO"), expand("OCC")
    v1 = cache.distance_vector(a1, expand("CC"))
    v2 = cache.distance_vector(a2, expand("CC"))
    assert v1 is v2  # same canonical pair hits the same entry
