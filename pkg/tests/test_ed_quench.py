import numpy as np
import pytest

from sunladder.ed import (
    SectorHamiltonian,
    Wavefunction,
    enumerate_sector,
    false_vacuum_state,
    measure_dimerization,
    quench_false_vacuum,
)
from sunladder.lattice import build_lattice


def odd_bond_dimer_state(basis, geometry):
    """Product of singlets on odd bonds of a periodic chain (mirror vacuum)."""
    n = basis.n_colors
    mask = np.ones(basis.dim, dtype=bool)
    count = 0
    for b in range(geometry.n_bonds):
        x = int(geometry.coords[geometry.bonds[b, 0], 0])
        if x % 2 == 1:
            pi, pj = basis.position_of[geometry.bonds[b]]
            mask &= basis.colors[:, pi] == basis.colors[:, pj]
            count += 1
    amps = np.zeros(basis.dim)
    amps[mask] = n ** (-count / 2.0)
    return Wavefunction(basis, amps)


def test_false_vacuum_normalized():
    g = build_lattice(6, 1, "open")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    psi = false_vacuum_state(basis)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_even_dimer_product_values_small():
    g = build_lattice(6, 1, "open")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    psi = false_vacuum_state(basis)
    per_bond, total = measure_dimerization(psi, g)
    # bonds (0,1),(2,3),(4,5) are singlets at +16/3; (1,2),(3,4) vanish
    expected = np.array([16 / 3, 0.0, 16 / 3, 0.0, 16 / 3])
    assert np.abs(per_bond - expected).max() < 1e-10
    assert total == pytest.approx(3 * 16 / 3, abs=1e-10)


def test_mirror_state_on_ring():
    # odd-bond dimer cover exists on a ring; D flips sign exactly
    g = build_lattice(8, 1, "periodic")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    even = false_vacuum_state(basis)
    odd = odd_bond_dimer_state(basis, g)
    _, d_even = measure_dimerization(even, g)
    _, d_odd = measure_dimerization(odd, g)
    assert d_even == pytest.approx(4 * 16 / 3, abs=1e-10)
    assert d_odd == pytest.approx(-4 * 16 / 3, abs=1e-10)


def test_symmetric_mixture_vanishes():
    # equal-weight mixture of the two dimer coverings on a ring: D(even) + D(odd) = 0;
    # as an expectation over the symmetrized ensemble the order parameter cancels
    g = build_lattice(8, 1, "periodic")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    _, d_even = measure_dimerization(false_vacuum_state(basis), g)
    _, d_odd = measure_dimerization(odd_bond_dimer_state(basis, g), g)
    assert d_even + d_odd == pytest.approx(0.0, abs=1e-10)


def test_multi_leg_rejected():
    g = build_lattice(4, 2, "open")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    rng = np.random.default_rng(0)
    v = rng.normal(size=basis.dim)
    v /= np.linalg.norm(v)
    with pytest.raises(ValueError):
        measure_dimerization(Wavefunction(basis, v), g)


def test_quench_requires_open_even_chain():
    with pytest.raises(ValueError):
        quench_false_vacuum(build_lattice(6, 1, "periodic"), 1.0, 0.05, 0.1)
    with pytest.raises(ValueError):
        quench_false_vacuum(build_lattice(4, 2, "open"), 1.0, 0.05, 0.1)


def test_quench_short_run_small_chain():
    g = build_lattice(6, 1, "open")
    res = quench_false_vacuum(g, J=1.0, dt=0.05, t_max=2.0, energy_check_interval=5)
    assert res.times.shape == (41,)
    assert res.total[0] == pytest.approx(3 * 16 / 3, abs=1e-10)
    assert res.norm_drift < 1e-8
    assert res.energy_drift < 1e-6
    # D(t) actually moves
    assert res.total.min() < res.total[0] - 1e-3


def test_quench_initial_slope_vanishes():
    # real initial state + Hermitian H: d/dt D(0) = 0, so the first-step
    # change must scale quadratically in dt
    g = build_lattice(6, 1, "open")
    deltas = []
    for dt in (0.04, 0.02):
        res = quench_false_vacuum(g, J=1.0, dt=dt, t_max=dt)
        deltas.append(res.total[1] - res.total[0])
    ratio = deltas[0] / deltas[1]
    assert ratio == pytest.approx(4.0, rel=0.05)
