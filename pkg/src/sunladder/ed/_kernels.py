"""Numba kernels shared by the exact-diagonalization engines.

All kernels work on packed base-N states.  A bond term acting on a matched
pair |c,c> connects to |c',c'| with amplitude -2*w; the diagonal element is
w*(2/N - 2*delta_{ci,cj}).  States are looked up either through a direct
table (small full spaces) or by binary search over the sorted key array.

The matvec gathers contributions into out[r] so each output element is
written by exactly one thread: results are bit-identical for any thread
count.
"""

import numpy as np
from numba import njit, prange

U64_ZERO = np.uint64(0)


@njit(cache=True)
def _rank_of(keys, x):
    lo = 0
    hi = keys.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, parallel=True)
def apply_bond_hamiltonian(
    states, colors, diag, amps, out, bond_pos, bond_w, pair_pow, n_colors, table, use_table
):
    dim = states.size
    n_bonds = bond_pos.shape[0]
    for r in prange(dim):
        acc = diag[r] * amps[r]
        s = states[r]
        for b in range(n_bonds):
            ci = colors[r, bond_pos[b, 0]]
            cj = colors[r, bond_pos[b, 1]]
            if ci == cj:
                pp = pair_pow[b]
                base = s - np.uint64(ci) * pp
                tot = 0.0 * amps[r]
                for c2 in range(n_colors):
                    if c2 != ci:
                        s2 = base + np.uint64(c2) * pp
                        if use_table:
                            r2 = table[s2]
                        else:
                            r2 = _rank_of(states, s2)
                        tot += amps[r2]
                acc += (-2.0 * bond_w[b]) * tot
        out[r] = acc


@njit(cache=True, parallel=True)
def bond_diagonal_sums(colors, bond_pos, bond_w, n_colors):
    """diag[r] = sum_b w_b * (2/N - 2*delta_{ci,cj})."""
    dim = colors.shape[0]
    n_bonds = bond_pos.shape[0]
    two_over_n = 2.0 / n_colors
    diag = np.zeros(dim, dtype=np.float64)
    for r in prange(dim):
        acc = 0.0
        for b in range(n_bonds):
            ci = colors[r, bond_pos[b, 0]]
            cj = colors[r, bond_pos[b, 1]]
            if ci == cj:
                acc += bond_w[b] * (two_over_n - 2.0)
            else:
                acc += bond_w[b] * two_over_n
        diag[r] = acc
    return diag


@njit(cache=True, parallel=True)
def bond_kernel_expectations(
    states, colors, amps, bond_pos, pair_pow, n_colors, table, use_table
):
    """Per-bond <psi| K_b |psi> of the unit-weight kernel (real for Hermitian K)."""
    dim = states.size
    n_bonds = bond_pos.shape[0]
    two_over_n = 2.0 / n_colors
    out = np.zeros(n_bonds, dtype=np.float64)
    for b in prange(n_bonds):
        pi = bond_pos[b, 0]
        pj = bond_pos[b, 1]
        pp = pair_pow[b]
        acc = 0.0
        for r in range(dim):
            w = (amps[r].conjugate() * amps[r]).real
            ci = colors[r, pi]
            cj = colors[r, pj]
            if ci == cj:
                acc += w * (two_over_n - 2.0)
                s = states[r]
                base = s - np.uint64(ci) * pp
                cross = 0.0 * amps[r]
                for c2 in range(n_colors):
                    if c2 != ci:
                        s2 = base + np.uint64(c2) * pp
                        if use_table:
                            r2 = table[s2]
                        else:
                            r2 = _rank_of(states, s2)
                        cross += amps[r2]
                acc += -2.0 * (amps[r].conjugate() * cross).real
            else:
                acc += w * two_over_n
        out[b] = acc
    return out
