import itertools

import numpy as np
import pytest

from sgfem.multi_index import build_multi_index_set
from sgfem.orthopoly import hermite_family, legendre_family
from sgfem.triple_product import build_triple_product_tensor


def kl_tensor(dims, degree, family=None):
    basis = build_multi_index_set(dims, degree)
    coeff = build_multi_index_set(dims, 1)
    return build_triple_product_tensor(basis, coeff, family or legendre_family())


def test_block_counts_match_structure_figures():
    assert kl_tensor(4, 4).n_blocks == 350
    assert kl_tensor(4, 7).n_blocks == 2010


def test_constant_chaos_single_entry():
    t = kl_tensor(3, 0)
    entries = list(t.entries())
    assert entries == [(0, 0, 0, 1.0)]
    assert t.n_blocks == 1


def test_identity_coupling_for_constant_coefficient():
    t = kl_tensor(2, 3)
    c0 = t.coupling[0].toarray()
    off = c0 - np.diag(np.diag(c0))
    assert np.all(off == 0.0)          # selection rules give exact zeros
    assert np.allclose(np.diag(c0), 1.0, atol=1e-13)


def test_diagonal_blocks_are_scalar_multiples():
    # c_ikk = 0 exactly for every i >= 1 in the linear/Legendre case
    for dims, degree in [(2, 3), (4, 4), (3, 5)]:
        t = kl_tensor(dims, degree)
        for Ci in t.coupling[1:]:
            assert np.all(Ci.diagonal() == 0.0)


@pytest.mark.parametrize("dims,degree", [(2, 4), (3, 3), (5, 2)])
def test_same_degree_blocks_diagonal(dims, degree):
    t = kl_tensor(dims, degree)
    assert t.has_block_diagonal_levels()


def test_multivariate_values_against_univariate_products():
    fam = legendre_family()
    t = kl_tensor(2, 3, fam)
    basis, coeff = t.basis, t.coeff_set
    rng = np.random.default_rng(7)
    checked = 0
    for i, j, k, v in t.entries():
        if rng.random() < 0.5:
            expect = 1.0
            for d in range(2):
                expect *= fam.triple_product(coeff.indices[i][d],
                                             basis.indices[j][d],
                                             basis.indices[k][d])
            assert v == pytest.approx(expect, abs=1e-12)
            checked += 1
    assert checked > 5


def test_full_permutation_symmetry_when_bases_match():
    # i, j, k all over the same order-2 basis
    basis = build_multi_index_set(2, 2)
    t = build_triple_product_tensor(basis, basis, legendre_family())
    n = len(basis)
    full = np.array([t.coupling[i].toarray() for i in range(n)])
    for perm in itertools.permutations((0, 1, 2)):
        assert np.allclose(full, np.transpose(full, perm), atol=1e-13)


def test_hermite_coefficient_expansion_dense_pattern():
    basis = build_multi_index_set(2, 2)
    coeff = build_multi_index_set(2, 4)
    t = build_triple_product_tensor(basis, coeff, hermite_family())
    assert t.n_blocks == len(basis) ** 2
    assert not t.has_block_diagonal_levels()


def test_dimension_mismatch_rejected():
    basis = build_multi_index_set(2, 2)
    coeff = build_multi_index_set(3, 1)
    with pytest.raises(ValueError):
        build_triple_product_tensor(basis, coeff, legendre_family())


def test_tensor_exports(tmp_path):
    t = kl_tensor(2, 2)
    entries_path = tmp_path / "tensor.txt"
    pattern_path = tmp_path / "pattern.csv"
    t.write_entries(entries_path)
    t.write_block_pattern_csv(pattern_path)

    lines = entries_path.read_text().strip().splitlines()
    assert len(lines) == sum(1 for _ in t.entries())
    i, j, k, v = lines[0].split()
    assert (int(i), int(j), int(k)) == (0, 0, 0) and float(v) == 1.0

    mask = np.loadtxt(pattern_path, delimiter=",")
    assert mask.shape == (6, 6)
    assert int(mask.sum()) == t.n_blocks
    assert set(np.unique(mask)) <= {0.0, 1.0}


def test_block_pattern_counts_small_case():
    # N=1, P=4: tridiagonal block pattern, 5 + 2*4 = 13 blocks
    t = kl_tensor(1, 4)
    assert t.n_blocks == 13
    assert t.n_diag_blocks == 5


def test_linear_fast_path_matches_general_build():
    from sgfem.triple_product import _build_general
    fam = legendre_family()
    basis = build_multi_index_set(3, 3)
    coeff = build_multi_index_set(3, 1)
    fast = build_triple_product_tensor(basis, coeff, fam)
    table = fam.triple_product_table(1, 3)
    slow = _build_general(basis, coeff, fam, table)
    for cf, cs in zip(fast.coupling, slow.coupling):
        assert np.allclose(cf.toarray(), cs.toarray(), atol=1e-14)
    assert fast.n_blocks == slow.n_blocks


def test_work_count_scale_is_fast():
    import time
    t0 = time.perf_counter()
    kl_tensor(8, 4)
    kl_tensor(4, 8)
    assert time.perf_counter() - t0 < 1.0
