"""Color-charge sector bases in the particle-hole encoding.

Every active site carries one color label in 0..N-1: on sublattice A the
fermion color (fundamental representation), on sublattice B the hole color
(antifundamental, particle-hole basis).  In this encoding every bond term is
color-aligning, |c,c> <-> |c',c'>, which gives uniform code paths for any N.

States are packed as base-N integers over the active-site list (position 0
is the least significant digit).  The conserved Cartan charges are

    Q_m = (# A sites with color m) - (# B sites with color m),

and a sector basis enumerates all states with a fixed charge vector,
meet-in-the-middle over the two sublattices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmptySectorError",
    "SectorBasis",
    "Wavefunction",
    "charge_vector",
    "enumerate_sector",
    "sector_dimension",
]

# Largest direct state->rank lookup table (entries); beyond this the kernels
# fall back to binary search over the sorted state keys.
LOOKUP_TABLE_MAX = 50_000_000


class EmptySectorError(ValueError):
    """The requested charge vector admits no states."""


def charge_vector(colors: np.ndarray, geometry, n_colors: int) -> np.ndarray:
    """Charge vector Q_m of a color assignment (given per active site)."""
    colors = np.asarray(colors)
    subl = geometry.sublattice[geometry.active_sites]
    q = np.zeros(n_colors, dtype=np.int64)
    for m in range(n_colors):
        q[m] = np.sum((colors == m) & (subl == 0)) - np.sum((colors == m) & (subl == 1))
    return q


def _half_enumeration(
    positions: np.ndarray, powers: np.ndarray, n_colors: int
) -> dict[tuple[int, ...], np.ndarray]:
    """All colorings of one sublattice, grouped by color-count vector.

    Returns {count_vector: packed partial-state values}; the partial value of
    a coloring is sum_k c_k * N**position_k, so full states are A-part + B-part.
    """
    k = len(positions)
    if k == 0:
        return {(0,) * n_colors: np.zeros(1, dtype=np.uint64)}
    total = n_colors**k
    idx = np.arange(total, dtype=np.int64)
    packed = np.zeros(total, dtype=np.uint64)
    counts = np.zeros((total, n_colors), dtype=np.int16)
    for i, pos in enumerate(positions):
        digit = (idx // n_colors**i) % n_colors
        packed += digit.astype(np.uint64) * powers[pos]
        for m in range(n_colors):
            counts[:, m] += digit == m
    uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    boundaries = np.searchsorted(inverse[order], np.arange(len(uniq)))
    groups: dict[tuple[int, ...], np.ndarray] = {}
    for g, cvec in enumerate(uniq):
        start = boundaries[g]
        stop = boundaries[g + 1] if g + 1 < len(uniq) else total
        groups[tuple(int(c) for c in cvec)] = packed[order[start:stop]]
    return groups


def sector_dimension(geometry, charge, n_colors: int) -> int:
    """Exact multinomial count of the sector dimension (no enumeration).

    dim = sum over A-color-count compositions a of multinom(|A|; a) *
    multinom(|B|; a - Q).
    """
    charge = tuple(int(q) for q in charge)
    subl = geometry.sublattice[geometry.active_sites]
    n_a = int(np.sum(subl == 0))
    n_b = int(np.sum(subl == 1))
    if sum(charge) != n_a - n_b:
        return 0

    def _compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in _compositions(total - first, parts - 1):
                yield (first, *rest)

    dim = 0
    for a in _compositions(n_a, n_colors):
        b = tuple(ai - qi for ai, qi in zip(a, charge))
        if any(bi < 0 for bi in b) or sum(b) != n_b:
            continue
        dim += _multinomial(n_a, a) * _multinomial(n_b, b)
    return dim


def _multinomial(n: int, parts) -> int:
    out = 1
    rem = n
    for p in parts:
        out *= math.comb(rem, p)
        rem -= p
    return out


class SectorBasis:
    """Enumerated basis of one color-charge sector.

    Attributes
    ----------
    states : sorted uint64 array of packed states (the rank order)
    colors : (dim, n_active) int8 digit matrix, colors[r, k] of position k
    powers : uint64 N**k per active-site position
    lookup : direct packed->rank table (int32, -1 invalid) or None when the
        full space is too large; kernels then binary-search ``states``.
    """

    def __init__(self, geometry, n_colors: int, charge, states: np.ndarray):
        self.geometry = geometry
        self.n_colors = int(n_colors)
        self.charge = tuple(int(q) for q in charge)
        self.states = states
        n_act = geometry.n_active
        self.powers = n_colors ** np.arange(n_act, dtype=np.uint64)
        # position of each site in the active list (-1 for removed sites)
        pos = np.full(geometry.n_sites, -1, dtype=np.int64)
        pos[geometry.active_sites] = np.arange(n_act)
        self.position_of = pos

        dim = states.size
        self.colors = np.empty((dim, n_act), dtype=np.int8)
        for k in range(n_act):
            self.colors[:, k] = ((states // self.powers[k]) % np.uint64(n_colors)).astype(
                np.int8
            )

        full = n_colors**n_act
        if full <= LOOKUP_TABLE_MAX:
            table = np.full(full, -1, dtype=np.int32)
            table[states] = np.arange(dim, dtype=np.int32)
            self.lookup = table
        else:
            self.lookup = None
        self._ham_cache: dict = {}

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def index_of(self, packed: int) -> int:
        if self.lookup is not None:
            r = int(self.lookup[int(packed)])
            if r < 0:
                raise KeyError(f"state {packed} not in sector")
            return r
        r = int(np.searchsorted(self.states, np.uint64(packed)))
        if r >= self.dim or self.states[r] != np.uint64(packed):
            raise KeyError(f"state {packed} not in sector")
        return r

    def pack(self, colors) -> int:
        colors = np.asarray(colors, dtype=np.uint64)
        return int(np.sum(colors * self.powers))

    def state_colors(self, rank: int) -> np.ndarray:
        return self.colors[rank].copy()

    def __repr__(self) -> str:
        return (
            f"SectorBasis(N={self.n_colors}, Q={self.charge}, dim={self.dim}, "
            f"geometry={self.geometry!r})"
        )


def enumerate_sector(geometry, charge, n_colors: int) -> SectorBasis:
    """Enumerate all states with the given charge vector.

    Raises EmptySectorError when the charge vector is unachievable.  The
    result is complete and duplicate-free; its dimension equals the exact
    multinomial count.
    """
    n_colors = int(n_colors)
    if n_colors < 2:
        raise ValueError(f"n_colors must be >= 2, got {n_colors}")
    charge = tuple(int(q) for q in charge)
    if len(charge) != n_colors:
        raise ValueError(f"charge vector must have length {n_colors}, got {len(charge)}")
    n_act = geometry.n_active
    if n_act * math.log2(n_colors) > 62:
        raise ValueError(f"system too large for packed states: {n_act} sites at N={n_colors}")

    subl = geometry.sublattice[geometry.active_sites]
    a_pos = np.flatnonzero(subl == 0)
    b_pos = np.flatnonzero(subl == 1)
    if sum(charge) != len(a_pos) - len(b_pos):
        raise EmptySectorError(
            f"charge sum {sum(charge)} != |A| - |B| = {len(a_pos) - len(b_pos)}"
        )

    powers = n_colors ** np.arange(n_act, dtype=np.uint64)
    groups_a = _half_enumeration(a_pos, powers, n_colors)
    groups_b = _half_enumeration(b_pos, powers, n_colors)

    chunks = []
    for a_counts, a_packed in groups_a.items():
        b_counts = tuple(a - q for a, q in zip(a_counts, charge))
        if any(b < 0 for b in b_counts):
            continue
        b_packed = groups_b.get(b_counts)
        if b_packed is None:
            continue
        chunks.append(np.add.outer(a_packed, b_packed).ravel())
    if not chunks:
        raise EmptySectorError(f"no states with charge {charge}")
    states = np.sort(np.concatenate(chunks))

    expected = sector_dimension(geometry, charge, n_colors)
    if states.size != expected:
        raise AssertionError(
            f"sector enumeration produced {states.size} states, expected {expected}"
        )
    return SectorBasis(geometry, n_colors, charge, states)


@dataclass
class Wavefunction:
    """Amplitude vector over one sector basis."""

    sector: SectorBasis
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Wavefunction":
        return Wavefunction(self.sector, self.amplitudes / self.norm())

    def overlap(self, other: "Wavefunction") -> complex:
        if other.sector is not self.sector and other.sector.charge != self.sector.charge:
            raise ValueError("overlap between different sectors")
        return complex(np.vdot(self.amplitudes, other.amplitudes))
