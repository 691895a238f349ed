import itertools

import numpy as np
import pytest

from sunladder.ed import EmptySectorError, enumerate_sector, sector_dimension
from sunladder.lattice import build_lattice, sample_defects


def brute_force_sector(geometry, charge, n_colors):
    """Enumerate the sector by scanning every product state."""
    n_act = geometry.n_active
    subl = geometry.sublattice[geometry.active_sites]
    states = []
    for colors in itertools.product(range(n_colors), repeat=n_act):
        q = [0] * n_colors
        for c, s in zip(colors, subl):
            q[c] += 1 if s == 0 else -1
        if tuple(q) == tuple(charge):
            packed = sum(c * n_colors**k for k, c in enumerate(colors))
            states.append(packed)
    return sorted(states)


def test_two_site_balanced_sector():
    g = build_lattice(2, 1, "open")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    assert basis.dim == 3
    # the three aligned states |m,m>
    for r in range(3):
        c = basis.state_colors(r)
        assert c[0] == c[1]


def test_two_site_charged_sector():
    g = build_lattice(2, 1, "open")
    basis = enumerate_sector(g, (1, -1, 0), 3)
    assert basis.dim == 1
    c = basis.state_colors(0)
    assert c[0] == 0 and c[1] == 1  # A-fermion color 1, B-hole color 2 (1-based)


def test_brute_force_agreement():
    g = build_lattice(4, 1, "periodic")
    for charge in [(0, 0, 0), (1, -1, 0), (2, -1, -1), (0, 1, -1)]:
        expected = brute_force_sector(g, charge, 3)
        if not expected:
            with pytest.raises(EmptySectorError):
                enumerate_sector(g, charge, 3)
            continue
        basis = enumerate_sector(g, charge, 3)
        assert basis.states.tolist() == expected
        assert basis.dim == sector_dimension(g, charge, 3)


def test_all_sectors_partition_full_space():
    g = build_lattice(2, 2, "open")  # 4 sites
    n_colors = 3
    total = 0
    seen = set()
    n_a = 2
    for qa in itertools.product(range(-2, 3), repeat=3):
        if sum(qa) != 0:
            continue
        d = sector_dimension(g, qa, n_colors)
        if d == 0:
            continue
        basis = enumerate_sector(g, qa, n_colors)
        assert basis.dim == d
        total += d
        chunk = set(basis.states.tolist())
        assert not (chunk & seen)
        seen |= chunk
    assert total == n_colors**4


def test_unachievable_charge_rejected():
    g = build_lattice(2, 1, "open")
    with pytest.raises(EmptySectorError):
        enumerate_sector(g, (1, 0, 0), 3)  # charge sum must be |A|-|B| = 0
    with pytest.raises(EmptySectorError):
        enumerate_sector(g, (2, -2, 0), 3)  # out of combinatorial bounds


def test_sector_with_defects():
    g = build_lattice(6, 1, "open")
    real = sample_defects(g, 0.2, seed=5)
    pruned = g.with_defects(real.removed)
    subl = pruned.sublattice[pruned.active_sites]
    n_a = int(np.sum(subl == 0))
    n_b = int(np.sum(subl == 1))
    charge = [0, 0, n_a - n_b]
    basis = enumerate_sector(pruned, charge, 3)
    assert basis.states.tolist() == brute_force_sector(pruned, charge, 3)


def test_lookup_and_search_agree():
    g = build_lattice(4, 1, "periodic")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    assert basis.lookup is not None
    for r in range(basis.dim):
        assert basis.index_of(int(basis.states[r])) == r
    # colors (0,0,0,1) has charge (1,-1,0), so it cannot be in the Q=0 sector
    with pytest.raises(KeyError):
        basis.index_of(27)


def test_pack_unpack_roundtrip():
    g = build_lattice(6, 1, "open")
    basis = enumerate_sector(g, (0, 0, 0), 3)
    for r in (0, basis.dim // 2, basis.dim - 1):
        colors = basis.state_colors(r)
        assert basis.pack(colors) == int(basis.states[r])
        assert basis.index_of(basis.pack(colors)) == r


def test_l14_sector_dimension():
    # the quench sector: L=14, N=3, Q=0
    g = build_lattice(14, 1, "open")
    assert sector_dimension(g, (0, 0, 0), 3) == 272835
