import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunladder.lattice import (
    build_lattice,
    load_realization,
    sample_defects,
    save_realization,
)


def test_ring_of_four():
    g = build_lattice(4, 1, "periodic")
    assert g.n_bonds == 4
    assert np.all(g.bond_direction == 0)
    assert g.theta == pytest.approx(np.pi)


def test_open_chain_fourteen():
    g = build_lattice(14, 1, "open")
    assert g.n_bonds == 13
    # sublattice alternates along every bond
    for i, j in g.bonds:
        assert g.sublattice[i] != g.sublattice[j]
    assert g.theta == pytest.approx(np.pi)


def test_six_by_four_bond_count():
    g = build_lattice(6, 4, "periodic")
    longitudinal = int(np.sum(g.bond_direction == 0))
    transverse = int(np.sum(g.bond_direction == 1))
    assert longitudinal == 24
    assert transverse == 18
    assert g.n_bonds == 42
    assert g.theta == pytest.approx(0.0)


def test_brute_force_bond_enumeration():
    # every nearest-neighbor pair of a 6x4 periodic-x ladder appears exactly once
    g = build_lattice(6, 4, "periodic")
    expected = set()
    for y in range(4):
        for x in range(6):
            i = y * 6 + x
            j = y * 6 + (x + 1) % 6
            expected.add(frozenset((i, j)))
            if y + 1 < 4:
                expected.add(frozenset((i, y * 6 + x + 6)))
    got = [frozenset((int(i), int(j))) for i, j in g.bonds]
    assert len(got) == len(set(got))  # stored once
    assert set(got) == expected


def test_validation_errors():
    with pytest.raises(ValueError):
        build_lattice(5, 2, "periodic")  # odd L periodic breaks bipartiteness
    with pytest.raises(ValueError):
        build_lattice(0, 2, "open")
    with pytest.raises(ValueError):
        build_lattice(4, 0, "open")
    with pytest.raises(ValueError):
        build_lattice(4, 2, "twisted")


def test_theta_parity():
    for n in range(1, 7):
        g = build_lattice(4, n, "open")
        assert g.theta == pytest.approx(np.pi * (n % 2))


def test_defect_sampling_counts_and_determinism():
    g = build_lattice(100, 4, "periodic")
    real = sample_defects(g, 0.01, seed=7)
    assert len(real.removed) == 4
    assert len(set(real.removed)) == 4
    again = sample_defects(g, 0.01, seed=7)
    assert real == again
    other = sample_defects(g, 0.01, seed=8)
    assert other.removed != real.removed


def test_zero_concentration_noop():
    g = build_lattice(10, 2, "periodic")
    real = sample_defects(g, 0.0, seed=1)
    assert real.removed == ()
    assert g.with_defects(real.removed) == g


def test_defect_pruning_matches_degree_count():
    g = build_lattice(100, 4, "periodic")
    real = sample_defects(g, 0.01, seed=3)
    pruned = g.with_defects(real.removed)
    removed = set(real.removed)
    # count bonds of the clean lattice touching removed sites (brute force)
    touching = sum(1 for i, j in g.bonds if int(i) in removed or int(j) in removed)
    assert g.n_bonds - pruned.n_bonds == touching
    for i, j in pruned.bonds:
        assert int(i) not in removed and int(j) not in removed


def test_concentration_bounds():
    g = build_lattice(10, 2, "periodic")
    with pytest.raises(ValueError):
        sample_defects(g, -0.1, seed=0)
    with pytest.raises(ValueError):
        sample_defects(g, 0.5, seed=0)


@settings(max_examples=25, deadline=None)
@given(
    length=st.integers(min_value=2, max_value=20).map(lambda k: 2 * k),
    legs=st.integers(min_value=1, max_value=5),
    p=st.floats(min_value=0.0, max_value=0.2),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_bipartite_after_defects(length, legs, p, seed):
    g = build_lattice(length, legs, "periodic")
    pruned = g.with_defects(sample_defects(g, p, seed).removed)
    # sublattice labels are a two-coloring certificate for every remaining bond
    for i, j in pruned.bonds:
        assert pruned.sublattice[i] != pruned.sublattice[j]
    assert set(np.asarray(pruned.bonds).ravel()) <= set(pruned.active_sites.tolist())


def test_serialization_roundtrip(tmp_path):
    g = build_lattice(12, 3, "periodic")
    real = sample_defects(g, 0.1, seed=42)
    path = tmp_path / "realization.txt"
    save_realization(path, g, real)
    g2, real2 = load_realization(path)
    assert g2.length == 12 and g2.legs == 3 and g2.boundary_x == "periodic"
    assert real2 is not None
    assert real2.removed == real.removed
    assert real2.seed == 42
    assert g2.removed_sites == real.removed


def test_serialization_without_realization(tmp_path):
    g = build_lattice(6, 2, "open")
    path = tmp_path / "geom.txt"
    save_realization(path, g)
    g2, real2 = load_realization(path)
    assert real2 is None
    assert g2 == g
