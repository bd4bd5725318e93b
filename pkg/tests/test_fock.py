import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_bh import fock
from photonic_bh.fock import CapacityError, FockBasis, dimension, enumerate_basis, index_of

# rows N_S, columns N_B = 2, 3, 4, 5, 8, 16
TABLE_I = {
    2: [3, 4, 5, 6, 9, 17],
    3: [6, 10, 15, 21, 45, 153],
    4: [10, 20, 35, 56, 165, 969],
    8: [36, 120, 330, 792, 6435, 245157],
}
TABLE_I_BOSONS = [2, 3, 4, 5, 8, 16]


def brute_force_configs(n_sites, n_bosons):
    return [c for c in itertools.product(range(n_bosons + 1), repeat=n_sites) if sum(c) == n_bosons]


@pytest.mark.parametrize("n_sites", sorted(TABLE_I))
def test_dimension_matches_table(n_sites):
    assert [dimension(n_sites, nb) for nb in TABLE_I_BOSONS] == TABLE_I[n_sites]


def test_dimension_edge_cases():
    assert dimension(5, 0) == 1
    assert dimension(1, 7) == 1
    with pytest.raises(ValueError):
        dimension(0, 3)
    with pytest.raises(ValueError):
        dimension(2, -1)


def test_small_enumerations():
    assert enumerate_basis(2, 2).configs == [(2, 0), (1, 1), (0, 2)]
    b = enumerate_basis(3, 1)
    assert b.configs == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert enumerate_basis(4, 5).dim == 56


@pytest.mark.parametrize("n_sites", range(1, 6))
@pytest.mark.parametrize("n_bosons", range(0, 7))
def test_enumeration_is_reverse_lexicographic_and_complete(n_sites, n_bosons):
    basis = enumerate_basis(n_sites, n_bosons)
    expected = sorted(brute_force_configs(n_sites, n_bosons), reverse=True)
    assert basis.configs == expected
    assert basis.dim == dimension(n_sites, n_bosons)


@pytest.mark.parametrize("n_sites", [1, 2, 3, 4, 8])
def test_table_bases_have_table_lengths(n_sites):
    for nb in range(0, 9):
        assert enumerate_basis(n_sites, nb).dim == dimension(n_sites, nb)


def test_largest_table_basis():
    basis = enumerate_basis(8, 16)
    assert basis.dim == 245157
    assert basis.config_of(0) == (16, 0, 0, 0, 0, 0, 0, 0)
    assert basis.config_of(basis.dim - 1) == (0, 0, 0, 0, 0, 0, 0, 16)
    assert np.all(basis.occupations.sum(axis=1) == 16)
    idx = basis.indices_of(basis.occupations)
    assert np.array_equal(idx, np.arange(basis.dim))


def test_index_round_trip_exhaustive():
    for n_sites in range(1, 6):
        for n_bosons in range(0, 9):
            basis = enumerate_basis(n_sites, n_bosons)
            if basis.dim > 1000:
                continue
            for i, cfg in enumerate(basis.configs):
                assert basis.index_of(cfg) == i
                assert basis.lookup(cfg) == i
                assert basis.config_of(i) == cfg


def test_index_of_matches_linear_scan():
    basis = enumerate_basis(2, 2)
    scan = next(i for i, c in enumerate(basis.configs) if c == (1, 1))
    assert index_of(basis, (1, 1)) == scan == 1
    assert index_of(basis, basis.configs[0]) == 0


def test_index_of_rejects_foreign_configs():
    basis = enumerate_basis(3, 4)
    with pytest.raises(ValueError):
        basis.index_of((1, 1, 1))
    with pytest.raises(ValueError):
        basis.index_of((2, 2))
    with pytest.raises(ValueError):
        basis.index_of((5, -1, 0))


def test_capacity_limit():
    with pytest.raises(CapacityError):
        enumerate_basis(8, 16, capacity=1000)
    assert enumerate_basis(3, 3, capacity=10).dim == 10


def test_enumeration_is_stable():
    first = enumerate_basis(4, 3).to_text()
    fresh = fock._cached_basis.__wrapped__(4, 3)
    assert fresh.to_text() == first
    assert first.splitlines()[0] == "3 0 0 0"


def test_text_round_trip():
    basis = enumerate_basis(3, 2)
    assert FockBasis.from_text(basis.to_text()) is basis
    with pytest.raises(ValueError):
        FockBasis.from_text("0 2\n2 0\n1 1\n")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 7), st.data())
def test_vectorized_ranking_agrees(n_sites, n_bosons, data):
    basis = enumerate_basis(n_sites, n_bosons)
    rows = data.draw(st.lists(st.integers(0, basis.dim - 1), min_size=1, max_size=20))
    occ = basis.occupations[rows]
    assert basis.indices_of(occ).tolist() == [basis.index_of(tuple(r)) for r in occ]
