import itertools

import numpy as np
import pytest

from photonic_bh.ansatz import (UNIFORM_STAIR_ANGLES, AnsatzSpec, Family, bind, build,
                                mesh_pairs, noninteracting_params, stair_pairs,
                                uniform_stair_angles)
from photonic_bh.engine import fidelity
from photonic_bh.fock import enumerate_basis
from photonic_bh.gates import BeamSplitter, Kerr, Rotation, apply_circuit
from photonic_bh.model import BHModel, ring_edges, solve
from photonic_bh.state import StateVector, fock_state, random_state

FLAGS = [(z, r) for z in (False, True) for r in (False, True)]


@pytest.mark.parametrize("n_sites", range(2, 7))
def test_bs_kerr_counts_exhaustive(n_sites):
    for n_layers in range(1, 13):
        spec = AnsatzSpec(Family.BS_KERR, n_sites, n_layers)
        t = build(spec)
        assert spec.gate_count == n_layers * (2 * n_sites - 1) == len(t.slots)
        assert spec.parameter_count == n_layers * (2 * n_sites - 1) == t.n_params
        assert spec.kerr_count == n_layers * n_sites


@pytest.mark.parametrize("n_sites", range(2, 7))
def test_interferometer_counts_exhaustive(n_sites):
    s = n_sites
    for n_layers, (zero_phi, rot) in itertools.product(range(1, 13), FLAGS):
        spec = AnsatzSpec(Family.INTERFEROMETER_KERR, s, n_layers, zero_phi, rot)
        t = build(spec)
        n_bs = s * (s - 1) // 2
        gates = n_layers * (n_bs + s + (s if rot else 0))
        params = n_layers * (n_bs * (1 if zero_phi else 2) + s + (s if rot else 0))
        assert spec.gate_count == gates == len(t.slots)
        assert spec.parameter_count == params == t.n_params
        if rot and not zero_phi:
            assert gates == n_layers * s * (s + 3) // 2
            assert params == n_layers * s * (s + 1)
        # every parameter index used exactly once
        used = sorted(i for i, _, _ in t.slot_map())
        assert used == list(range(params))


def test_count_examples():
    assert AnsatzSpec(Family.BS_KERR, 3, 10).gate_count == 50
    assert AnsatzSpec(Family.BS_KERR, 2, 1).gate_count == 3
    assert AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 6).gate_count == 54
    assert AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 1).parameter_count == 12
    assert AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 1, True, False).parameter_count == 6


def test_bs_kerr_forces_its_flags():
    spec = AnsatzSpec("bs_kerr", 3, 2, zero_bs_phases=False, include_rotations=True)
    assert spec.zero_bs_phases and not spec.include_rotations
    assert all(s.kind != "rot" and s.phi is None for s in build(spec).slots)


def test_invalid_specs():
    with pytest.raises(ValueError):
        AnsatzSpec(Family.BS_KERR, 1, 2)
    with pytest.raises(ValueError):
        AnsatzSpec("nope", 3, 2)
    with pytest.raises(ValueError):
        bind(build(AnsatzSpec(Family.BS_KERR, 2, 1)), [0.0, 0.0])


def test_stair_alternates():
    assert stair_pairs(4, 0) == [(0, 1), (1, 2), (2, 3)]
    assert stair_pairs(4, 1) == [(2, 3), (1, 2), (0, 1)]
    t = build(AnsatzSpec(Family.BS_KERR, 4, 2))
    kinds = [(s.kind, s.modes) for s in t.slots]
    assert kinds[:3] == [("bs", (0, 1)), ("bs", (1, 2)), ("bs", (2, 3))]
    assert kinds[3:7] == [("kerr", (p,)) for p in range(4)]
    assert kinds[7:10] == [("bs", (2, 3)), ("bs", (1, 2)), ("bs", (0, 1))]
    for s in range(2, 7):
        for layer in range(6):
            pairs = set(stair_pairs(s, layer)) | set(stair_pairs(s, layer + 1))
            assert pairs == {(p, p + 1) for p in range(s - 1)}


def test_mesh_layout():
    assert mesh_pairs(3) == [(0, 1), (1, 2), (0, 1)]
    assert mesh_pairs(4) == [(0, 1), (2, 3), (1, 2), (0, 1), (2, 3), (1, 2)]
    for s in range(2, 7):
        assert len(mesh_pairs(s)) == s * (s - 1) // 2
    t = build(AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 1))
    assert [s.kind for s in t.slots] == ["bs"] * 3 + ["rot"] * 3 + ["kerr"] * 3


def test_bind_zero_is_identity():
    b = enumerate_basis(3, 3)
    psi = random_state(b, np.random.default_rng(2))
    for spec in [AnsatzSpec(Family.BS_KERR, 3, 3), AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 2)]:
        t = build(spec)
        out = apply_circuit(psi, bind(t, np.zeros(t.n_params)))
        assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-14)


def test_bind_slot_map_round_trip():
    t = build(AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 2))
    params = np.arange(t.n_params, dtype=float) + 0.5
    gates = bind(t, params)
    for idx, g, field in t.slot_map():
        assert getattr(gates[g], field) == params[idx]
    assert isinstance(gates[0], BeamSplitter)
    assert isinstance(gates[3], Rotation)
    assert isinstance(gates[-1], Kerr)


@pytest.mark.parametrize("spec", [AnsatzSpec(Family.BS_KERR, 3, 2),
                                  AnsatzSpec(Family.INTERFEROMETER_KERR, 4, 1),
                                  AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 2, True, False)])
def test_run_matches_bound_circuit(spec):
    b = enumerate_basis(spec.n_sites, 3)
    rng = np.random.default_rng(7)
    t = build(spec)
    params = rng.uniform(-np.pi, np.pi, t.n_params)
    psi = random_state(b, rng)
    fast = t.run(b, psi.amplitudes, params)
    slow = apply_circuit(psi, bind(t, params)).amplitudes
    assert np.allclose(fast, slow, atol=1e-13)


def test_spec_dict_round_trip():
    spec = AnsatzSpec(Family.INTERFEROMETER_KERR, 4, 3, True, False)
    assert AnsatzSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        AnsatzSpec.from_dict({**spec.to_dict(), "depth": 2})


def test_closed_form_angles():
    for s, ang in UNIFORM_STAIR_ANGLES.items():
        assert np.allclose(uniform_stair_angles(s), ang, atol=1e-15)
    assert UNIFORM_STAIR_ANGLES[4][0] == pytest.approx(np.pi / 3)


def _network(n_sites, n_bosons):
    edges = None if n_sites == 2 else ring_edges(n_sites)
    return BHModel.from_lambda(n_sites, n_bosons, 0.0, edges=edges)


@pytest.mark.parametrize("n_sites,max_bosons", [(2, 8), (3, 8), (4, 5)])
def test_noninteracting_stair_is_exact(n_sites, max_bosons):
    t = build(AnsatzSpec(Family.BS_KERR, n_sites, 1))
    params = noninteracting_params(n_sites)
    for n_bosons in range(1, max_bosons + 1):
        model = _network(n_sites, n_bosons)
        gs = solve(model)
        b = gs.vector.basis
        psi = fock_state(b, (n_bosons,) + (0,) * (n_sites - 1))
        out = StateVector(b, t.run(b, psi.amplitudes, params))
        assert fidelity(out, gs.vector) >= 1 - 1e-10


@pytest.mark.parametrize("spec", [AnsatzSpec(Family.BS_KERR, 2, 3),
                                  AnsatzSpec(Family.INTERFEROMETER_KERR, 3, 2),
                                  AnsatzSpec(Family.INTERFEROMETER_KERR, 4, 1, True, False)])
def test_run_batch_matches_run(spec):
    b = enumerate_basis(spec.n_sites, 4)
    rng = np.random.default_rng(1)
    t = build(spec)
    params = rng.uniform(-4, 4, (7, t.n_params))
    psi = random_state(b, rng)
    cols = t.run_batch(b, psi.amplitudes, params)
    assert cols.shape == (b.dim, 7)
    for k in range(7):
        assert np.allclose(cols[:, k], t.run(b, psi.amplitudes, params[k]), atol=1e-13)
