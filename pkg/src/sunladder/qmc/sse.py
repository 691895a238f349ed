"""Stochastic series expansion for the SU(N) singlet-projector ladder.

The bond Hamiltonian is shifted to H_b - (2J/N) = -2NJ P_s, so the sampled
operators A_b = 2NJ P_s have non-negative matrix elements: the diagonal
element is 2J whenever the two (particle-hole) bond colors match and zero
otherwise, and every allowed vertex carries the same weight 2J regardless
of its colors.  The dropped constant (2J/N per bond) is restored in the
energy estimator.

Operator string: a fixed-capacity array of slots, each either null or a
bond operator carrying its lower (incoming) and upper (outgoing) pair
color; diagonal means c_in == c_out.  A diagonal update sweeps the slots,
inserting/removing diagonal operators with the standard Metropolis ratios
min(1, N_b beta w_d / (M - n)) and min(1, (M - n + 1)/(N_b beta w_d)),
while off-diagonal slots only propagate the state.

Loop update: the projector factorizes as <mn|P_s|m'n'> = d_mn d_m'n'/N, so
within each vertex the two lower legs pair with each other and the two
upper legs pair with each other; together with the periodic worldline
links this decomposes all legs (including operator-free worldlines) into
closed loops.  Every loop is recolored uniformly at random among the N
colors -- rejection-free, since all vertex weights are equal -- and the
diagonal/off-diagonal labels are re-derived from the new colors.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import next_below, next_double, seed_state

__all__ = ["SseConfiguration", "diagonal_update", "loop_update", "validate_configuration"]


@njit(cache=True)
def _fill_random_colors(state, n_colors, rng):
    for i in range(state.size):
        state[i] = next_below(rng, n_colors)


@njit(cache=True)
def _diagonal_update_kernel(state, op_bond, op_cin, op_cout, bonds, insert_factor, n_ops, rng):
    """One pass over all slots.  Returns (n_ops, saturated, attempts, accepts).

    insert_factor = N_bonds * beta * 2J.  When the string saturates (n == M)
    the pass continues propagation-only so the state returns to imaginary
    time zero; the caller grows the string and re-enters.
    """
    m = op_bond.size
    n_bonds = bonds.shape[0]
    n = n_ops
    saturated = False
    attempts = 0
    accepts = 0
    for p in range(m):
        op = op_bond[p]
        if op < 0:
            if saturated:
                continue
            b = next_below(rng, n_bonds)
            s0 = bonds[b, 0]
            s1 = bonds[b, 1]
            if state[s0] == state[s1]:
                attempts += 1
                if next_double(rng) * (m - n) < insert_factor:
                    op_bond[p] = b
                    op_cin[p] = state[s0]
                    op_cout[p] = state[s0]
                    n += 1
                    accepts += 1
                    if n == m:
                        saturated = True
        elif op_cin[p] == op_cout[p]:
            if saturated:
                continue
            attempts += 1
            if next_double(rng) * insert_factor < (m - n + 1):
                op_bond[p] = -1
                n -= 1
                accepts += 1
        else:
            s0 = bonds[op, 0]
            s1 = bonds[op, 1]
            state[s0] = op_cout[p]
            state[s1] = op_cout[p]
    return n, saturated, attempts, accepts


@njit(cache=True)
def _loop_update_kernel(
    state, op_bond, op_cin, op_cout, bonds, n_colors, rng, link, leg_color, first_in, last_out
):
    """Deterministic leg pairing + uniform loop recoloring.  Returns loop count.

    Legs of vertex p are 4p..4p+3: (lower-left, lower-right, upper-left,
    upper-right); v ^ 1 is the same-time-side partner.  link[] holds the
    worldline pairing between an outgoing leg and the next incoming leg on
    the same site, wrapped periodically.
    """
    m = op_bond.size
    n_sites = state.size

    for s in range(n_sites):
        first_in[s] = -1
        last_out[s] = -1

    for p in range(m):
        b = op_bond[p]
        if b < 0:
            continue
        base = 4 * p
        for side in range(2):
            site = bonds[b, side]
            in_leg = base + side
            out_leg = base + 2 + side
            prev = last_out[site]
            if prev >= 0:
                link[prev] = in_leg
                link[in_leg] = prev
            else:
                first_in[site] = in_leg
            last_out[site] = out_leg
    for s in range(n_sites):
        if first_in[s] >= 0:
            link[last_out[s]] = first_in[s]
            link[first_in[s]] = last_out[s]

    n_loops = 0
    for p in range(m):
        if op_bond[p] < 0:
            continue
        base = 4 * p
        leg_color[base] = -1
        leg_color[base + 1] = -1
        leg_color[base + 2] = -1
        leg_color[base + 3] = -1
    for p in range(m):
        if op_bond[p] < 0:
            continue
        base = 4 * p
        for l in range(4):
            v0 = base + l
            if leg_color[v0] >= 0:
                continue
            c = next_below(rng, n_colors)
            n_loops += 1
            v = v0
            while True:
                leg_color[v] = c
                u = v ^ 1
                leg_color[u] = c
                v = link[u]
                if v == v0:
                    break

    for p in range(m):
        if op_bond[p] < 0:
            continue
        base = 4 * p
        op_cin[p] = leg_color[base]
        op_cout[p] = leg_color[base + 2]

    for s in range(n_sites):
        if first_in[s] >= 0:
            state[s] = leg_color[first_in[s]]
        else:
            state[s] = next_below(rng, n_colors)  # free worldline, its own loop
            n_loops += 1
    return n_loops


@njit(cache=True)
def _validate_kernel(state, op_bond, op_cin, op_cout, bonds, scratch):
    """Count contract violations: imaginary-time periodicity, color matching
    at diagonal vertices, proper off-diagonal propagation."""
    n_sites = state.size
    for s in range(n_sites):
        scratch[s] = state[s]
    violations = 0
    for p in range(op_bond.size):
        b = op_bond[p]
        if b < 0:
            continue
        s0 = bonds[b, 0]
        s1 = bonds[b, 1]
        if scratch[s0] != op_cin[p] or scratch[s1] != op_cin[p]:
            violations += 1
        if op_cin[p] == op_cout[p]:
            continue
        scratch[s0] = op_cout[p]
        scratch[s1] = op_cout[p]
    for s in range(n_sites):
        if scratch[s] != state[s]:
            violations += 1
    return violations


@njit(cache=True)
def _snapshot_kernel(state, op_bond, op_cout, bonds, marks, out, scratch):
    """Record the propagated state at the given (sorted) slot positions."""
    n_sites = state.size
    for s in range(n_sites):
        scratch[s] = state[s]
    k = 0
    n_marks = marks.size
    for p in range(op_bond.size):
        while k < n_marks and marks[k] == p:
            for s in range(n_sites):
                out[k, s] = scratch[s]
            k += 1
        b = op_bond[p]
        if b >= 0:
            # diagonal ops leave the colors unchanged (cout equals them)
            scratch[bonds[b, 0]] = op_cout[p]
            scratch[bonds[b, 1]] = op_cout[p]
    while k < n_marks:
        for s in range(n_sites):
            out[k, s] = scratch[s]
        k += 1


class SseConfiguration:
    """Markov-chain state: site colors, operator string, private RNG stream."""

    def __init__(self, geometry, n_colors: int, seed: int, initial_capacity: int = 64):
        self.geometry = geometry
        self.n_colors = int(n_colors)
        self.bonds = np.ascontiguousarray(geometry.bonds, dtype=np.int64)
        if self.bonds.shape[0] == 0:
            raise ValueError("geometry has no active bonds")
        self.rng = seed_state(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
        self.state = np.empty(geometry.n_sites, dtype=np.int8)
        _fill_random_colors(self.state, self.n_colors, self.rng)
        self.n_ops = 0
        self._allocate(int(initial_capacity))

    def _allocate(self, capacity: int) -> None:
        self.capacity = capacity
        self.op_bond = np.full(capacity, -1, dtype=np.int64)
        self.op_cin = np.zeros(capacity, dtype=np.int8)
        self.op_cout = np.zeros(capacity, dtype=np.int8)
        self._link = np.empty(4 * capacity, dtype=np.int64)
        self._leg_color = np.empty(4 * capacity, dtype=np.int8)
        self._first_in = np.empty(self.state.size, dtype=np.int64)
        self._last_out = np.empty(self.state.size, dtype=np.int64)
        self._scratch = np.empty(self.state.size, dtype=np.int8)

    def grow(self, new_capacity: int | None = None) -> None:
        """Extend the operator string (M -> M + M/3 by default), keeping slots."""
        if new_capacity is None:
            new_capacity = self.capacity + max(self.capacity // 3, 1)
        old_bond, old_cin, old_cout = self.op_bond, self.op_cin, self.op_cout
        m_old = self.capacity
        self._allocate(int(new_capacity))
        self.op_bond[:m_old] = old_bond
        self.op_cin[:m_old] = old_cin
        self.op_cout[:m_old] = old_cout

    def snapshot_slices(self, n_slices: int) -> np.ndarray:
        """Propagated color fields at n_slices evenly spaced string positions."""
        n_slices = max(1, int(n_slices))
        marks = np.unique((np.arange(n_slices, dtype=np.int64) * self.capacity) // n_slices)
        out = np.empty((marks.size, self.state.size), dtype=np.int8)
        _snapshot_kernel(
            self.state, self.op_bond, self.op_cout, self.bonds, marks, out, self._scratch
        )
        return out


def diagonal_update(config: SseConfiguration, beta: float, J: float = 1.0):
    """Insert/remove diagonal operators at inverse temperature beta.

    Saturation grows the string by a third and re-enters the pass (never a
    rejection).  Returns (attempts, accepts) Metropolis statistics.
    """
    insert_factor = config.bonds.shape[0] * beta * 2.0 * J
    attempts = accepts = 0
    while True:
        n, saturated, att, acc = _diagonal_update_kernel(
            config.state,
            config.op_bond,
            config.op_cin,
            config.op_cout,
            config.bonds,
            insert_factor,
            config.n_ops,
            config.rng,
        )
        config.n_ops = n
        attempts += att
        accepts += acc
        if not saturated:
            break
        config.grow()
    # keep headroom so saturation stays exceptional
    while config.n_ops >= 0.75 * config.capacity:
        config.grow()
    return attempts, accepts


def loop_update(config: SseConfiguration) -> int:
    """Recolor all operator loops and free worldlines; returns the loop count."""
    return _loop_update_kernel(
        config.state,
        config.op_bond,
        config.op_cin,
        config.op_cout,
        config.bonds,
        config.n_colors,
        config.rng,
        config._link,
        config._leg_color,
        config._first_in,
        config._last_out,
    )


def validate_configuration(config: SseConfiguration) -> int:
    """Number of internal-consistency violations (0 for a valid configuration)."""
    return _validate_kernel(
        config.state,
        config.op_bond,
        config.op_cin,
        config.op_cout,
        config.bonds,
        config._scratch,
    )
