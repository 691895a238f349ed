"""Independent dense oracles used across the test suite.

Everything here is built from explicit generator sums and np.kron-style
embeddings, deliberately bypassing the packed-state kernels it is used to
check.  Only small systems (N^sites <= ~10^4) are densified.
"""

from __future__ import annotations

import numpy as np

from sunladder.algebra import gell_mann


def bond_kernel_from_generators(n_colors: int) -> np.ndarray:
    """sum_a l^a (x) (-conj(l^a)) in the product color basis, via generators."""
    g = gell_mann(n_colors).generators
    k = np.zeros((n_colors**2, n_colors**2), dtype=complex)
    for a in g:
        k += np.kron(a, -a.conj())
    assert np.abs(k.imag).max() < 1e-12
    return k.real


def embed_pair(op: np.ndarray, pos_i: int, pos_j: int, n_sites: int, n_colors: int):
    """Embed a two-site operator on positions (i, j) of an n-site chain.

    The full-space index convention matches the packed-state one:
    index = sum_k c_k * N**k (position 0 least significant).
    """
    dim = n_colors**n_sites
    full = np.zeros((dim, dim), dtype=op.dtype)
    op4 = op.reshape(n_colors, n_colors, n_colors, n_colors)  # [mi, mj, mi', mj']
    pi = n_colors**pos_i
    pj = n_colors**pos_j
    for s in range(dim):
        ci = s // pi % n_colors
        cj = s // pj % n_colors
        base = s - ci * pi - cj * pj
        for ci2 in range(n_colors):
            for cj2 in range(n_colors):
                amp = op4[ci2, cj2, ci, cj]
                if amp != 0:
                    full[base + ci2 * pi + cj2 * pj, s] += amp
    return full


def dense_hamiltonian(
    geometry, n_colors: int, tau: float = 1.0, J: float = 1.0, dimer_bonds=(), mu=None
) -> np.ndarray:
    """Full-space H(tau) built from explicit generator sums (oracle path)."""
    n_act = geometry.n_active
    pos_of = {int(s): k for k, s in enumerate(geometry.active_sites)}
    kernel = bond_kernel_from_generators(n_colors)
    dim = n_colors**n_act
    h = np.zeros((dim, dim))
    dimer = set(dimer_bonds)
    for b in range(geometry.n_bonds):
        w = tau * J + ((1.0 - tau) * J if b in dimer else 0.0)
        if w == 0.0:
            continue
        i, j = geometry.bonds[b]
        h += w * embed_pair(kernel, pos_of[int(i)], pos_of[int(j)], n_act, n_colors)
    if mu is not None:
        mu3, mu8 = mu
        g = gell_mann(n_colors).generators
        l3 = np.real(np.diag(g[-2]))
        l8 = np.real(np.diag(g[-1]))
        site_e = -(mu3 * l3 + mu8 * l8)
        for site in geometry.active_sites:
            k = pos_of[int(site)]
            sign = 1.0 if geometry.sublattice[site] == 0 else -1.0
            diag = np.zeros(dim)
            for s in range(dim):
                diag[s] = sign * site_e[s // n_colors**k % n_colors]
            h += np.diag(diag)
    return h


def heisenberg_hamiltonian(geometry, J: float = 1.0) -> np.ndarray:
    """S=1/2 Heisenberg model on the same bond list (Pauli-kron route)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
    sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
    ss = sum(np.kron(s, s) for s in (sx, sy, sz))
    n_act = geometry.n_active
    pos_of = {int(s): k for k, s in enumerate(geometry.active_sites)}
    dim = 2**n_act
    h = np.zeros((dim, dim), dtype=complex)
    for i, j in geometry.bonds:
        h += J * embed_pair(ss, pos_of[int(i)], pos_of[int(j)], n_act, 2)
    assert np.abs(h.imag).max() < 1e-12
    return h.real


def sector_restriction(h_full: np.ndarray, packed_states: np.ndarray) -> np.ndarray:
    idx = np.asarray(packed_states, dtype=np.int64)
    return h_full[np.ix_(idx, idx)]


def thermal_expectations(h: np.ndarray, beta: float, observables: dict) -> dict:
    """<O> at inverse temperature beta for diagonal-friendly dense observables."""
    vals, vecs = np.linalg.eigh(h)
    w = np.exp(-beta * (vals - vals.min()))
    z = w.sum()
    out = {}
    for name, op in observables.items():
        ov = vecs.conj().T @ op @ vecs
        out[name] = float(np.real(np.sum(w * np.diag(ov))) / z)
    return out
