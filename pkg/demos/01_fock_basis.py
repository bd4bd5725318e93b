"""Fixed-particle Fock bases: sizes, ordering and ranking.

Run with ``python3 demos/01_fock_basis.py``.
"""

from photonic_bh.fock import dimension, enumerate_basis

# Hilbert-space sizes for a few mode/photon counts
print("modes  N=1  N=2  N=4  N=8")
for s in (2, 3, 4, 5):
    print(f"{s:>5}", *(f"{dimension(s, n):>4}" for n in (1, 2, 4, 8)))

# Configurations are listed in reverse-lexicographic order and ranked in O(S)
basis = enumerate_basis(3, 2)
for config in basis.configs:
    print(config, "->", basis.index_of(config))
