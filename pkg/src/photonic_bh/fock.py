"""Fixed-particle-number bosonic Fock basis.

Configurations are occupation tuples ``(n_0, ..., n_{S-1})`` summing to ``N``.
They are ordered reverse-lexicographically, so the monomodal state
``(N, 0, ..., 0)`` has index 0 and ``(0, ..., 0, N)`` is last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CAPACITY = 10_000_000


class CapacityError(ValueError):
    """Raised when a basis would exceed the configured size limit."""


def dimension(n_sites: int, n_bosons: int) -> int:
    """Number of ways to distribute ``n_bosons`` bosons on ``n_sites`` modes.

    Python integers are unbounded, so the binomial never overflows.
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if n_bosons < 0:
        raise ValueError(f"n_bosons must be >= 0, got {n_bosons}")
    return comb(n_bosons + n_sites - 1, n_bosons)


@lru_cache(maxsize=None)
def _ranking_table(n_sites: int, n_bosons: int) -> np.ndarray:
    # table[s, m] = number of configs of m bosons on s modes
    table = np.zeros((n_sites + 1, n_bosons + 1), dtype=np.int64)
    table[1:, 0] = 1
    for s in range(1, n_sites + 1):
        for m in range(n_bosons + 1):
            table[s, m] = comb(m + s - 1, m)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _prefix_counts(n_sites: int, n_bosons: int) -> np.ndarray:
    # cum[s, M] = sum_{m <= M} table[s, m]
    cum = np.cumsum(_ranking_table(n_sites, n_bosons), axis=1)
    cum.setflags(write=False)
    return cum


def _generate(n_sites: int, n_bosons: int) -> Iterable[tuple[int, ...]]:
    if n_sites == 1:
        yield (n_bosons,)
        return
    for first in range(n_bosons, -1, -1):
        for rest in _generate(n_sites - 1, n_bosons - first):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Ordered list of all occupation configurations of a fixed-N sector.

    Attributes:
        n_sites: number of modes.
        n_bosons: total boson (photon) number.
        occupations: ``(dim, n_sites)`` read-only integer array, one row per
            configuration in enumeration order.
    """

    n_sites: int
    n_bosons: int
    occupations: np.ndarray = field(repr=False)
    _lookup: dict = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    def __len__(self) -> int:
        return self.dim

    @property
    def configs(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.occupations]

    def config_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise IndexError(f"index {index} out of range for basis of dimension {self.dim}")
        return tuple(int(x) for x in self.occupations[index])

    def index_of(self, config: Sequence[int]) -> int:
        """Position of ``config`` by combinatorial ranking."""
        self._check_config(config)
        table = _ranking_table(self.n_sites, self.n_bosons)
        rank = 0
        remaining = self.n_bosons
        for pos in range(self.n_sites - 1):
            n = int(config[pos])
            modes_left = self.n_sites - pos - 1
            # configs sharing the prefix but with more bosons at this position
            # come first; count them
            for k in range(n + 1, remaining + 1):
                rank += int(table[modes_left, remaining - k])
            remaining -= n
        return rank

    def indices_of(self, occupations: np.ndarray) -> np.ndarray:
        """Vectorized ``index_of`` over the rows of an ``(m, n_sites)`` array.

        Rows are assumed to be valid members of the basis.
        """
        occ = np.asarray(occupations, dtype=np.int64).reshape(-1, self.n_sites)
        cum = _prefix_counts(self.n_sites, self.n_bosons)
        rank = np.zeros(occ.shape[0], dtype=np.int64)
        remaining = np.full(occ.shape[0], self.n_bosons, dtype=np.int64)
        for pos in range(self.n_sites - 1):
            n = occ[:, pos]
            gap = remaining - n - 1
            hit = gap >= 0
            rank[hit] += cum[self.n_sites - pos - 1, gap[hit]]
            remaining = remaining - n
        return rank

    def lookup(self, config: Sequence[int]) -> int:
        """Hash-map lookup, kept as an independent check on ``index_of``."""
        self._check_config(config)
        return self._lookup[tuple(int(x) for x in config)]

    def _check_config(self, config: Sequence[int]) -> None:
        if len(config) != self.n_sites:
            raise ValueError(f"config {tuple(config)} has {len(config)} modes, basis has {self.n_sites}")
        if any(int(n) < 0 for n in config):
            raise ValueError(f"negative occupation in {tuple(config)}")
        if sum(int(n) for n in config) != self.n_bosons:
            raise ValueError(
                f"config {tuple(config)} holds {sum(config)} bosons, basis holds {self.n_bosons}"
            )

    def to_text(self) -> str:
        """One configuration per line, space-separated integers."""
        return "".join(" ".join(str(int(x)) for x in row) + "\n" for row in self.occupations)

    @classmethod
    def from_text(cls, text: str) -> "FockBasis":
        rows = [tuple(int(tok) for tok in line.split()) for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("empty basis text")
        basis = enumerate_basis(len(rows[0]), sum(rows[0]))
        if rows != basis.configs:
            raise ValueError("text does not match the canonical enumeration order")
        return basis


@lru_cache(maxsize=64)
def _cached_basis(n_sites: int, n_bosons: int) -> FockBasis:
    occ = np.array(list(_generate(n_sites, n_bosons)), dtype=np.int64).reshape(-1, n_sites)
    occ.setflags(write=False)
    lookup = {tuple(int(x) for x in row): i for i, row in enumerate(occ)}
    return FockBasis(n_sites, n_bosons, occ, lookup)


def enumerate_basis(n_sites: int, n_bosons: int, capacity: int = DEFAULT_CAPACITY) -> FockBasis:
    """Build the Fock basis for ``n_bosons`` bosons on ``n_sites`` modes.

    Raises:
        CapacityError: if the dimension exceeds ``capacity``.
    """
    dim = dimension(n_sites, n_bosons)
    if dim > capacity:
        raise CapacityError(f"basis dimension {dim} exceeds capacity {capacity}")
    return _cached_basis(n_sites, n_bosons)


def index_of(basis: FockBasis, config: Sequence[int]) -> int:
    return basis.index_of(config)


def config_of(basis: FockBasis, index: int) -> tuple[int, ...]:
    return basis.config_of(index)
