"""Sector Hamiltonians for the ladder model and its adiabatic ramp.

The full Hamiltonian is H = J * sum_bonds K_b with the two-site kernel K of
:mod:`sunladder.algebra`.  The ramp interpolates

    H(tau) = (1 - tau) * J * sum_{dimer bonds} K_b  +  tau * H,

so each bond carries weight w_b(tau) = tau*J + (1-tau)*J*[b in dimer set].
Optional chemical potentials couple to the two diagonal su(3) generators
and are diagonal in the color basis: an A site in color c contributes
-mu3*l3_cc - mu8*l8_cc, a B site with hole color c the opposite sign
(the trace over the N-1 occupied colors flips it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator

from . import _kernels
from .basis import SectorBasis, Wavefunction

__all__ = [
    "RampSpec",
    "SectorHamiltonian",
    "apply_hamiltonian",
    "default_ramp",
    "dimer_bond_indices",
]


def dimer_bond_indices(geometry) -> tuple[int, ...]:
    """Longitudinal bonds whose left endpoint has even x (the tau=0 dimers)."""
    out = []
    for b in range(geometry.n_bonds):
        if geometry.bond_direction[b] != 0:
            continue
        i = geometry.bonds[b, 0]
        x = int(geometry.coords[i, 0])
        if x % 2 == 0:
            out.append(b)
    return tuple(out)


@dataclass(frozen=True)
class RampSpec:
    """Adiabatic-ramp definition: tau grid, coupling, and the tau=0 dimer bonds."""

    tau_grid: tuple[float, ...]
    J: float
    dimer_bonds: tuple[int, ...]

    def __post_init__(self) -> None:
        taus = tuple(float(t) for t in self.tau_grid)
        if any(t < 0.0 or t > 1.0 for t in taus):
            raise ValueError("tau values must lie in [0, 1]")
        if list(taus) != sorted(taus):
            raise ValueError("tau grid must be sorted")
        object.__setattr__(self, "tau_grid", taus)
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")


def default_ramp(geometry, J: float = 1.0, tau_points: int = 21) -> RampSpec:
    grid = tuple(np.linspace(0.0, 1.0, int(tau_points)))
    return RampSpec(tau_grid=grid, J=float(J), dimer_bonds=dimer_bond_indices(geometry))


# diagonal entries of the two Cartan generators for N=3
_L3_DIAG = np.array([1.0, -1.0, 0.0])
_L8_DIAG = np.array([1.0, 1.0, -2.0]) / np.sqrt(3.0)


class SectorHamiltonian:
    """Matrix-free action of H(tau) + H_mu on one sector.

    Precomputes the per-state diagonal sums for the full and the dimer bond
    sets so that the per-call work is one fused diagonal + off-diagonal
    kernel pass.
    """

    def __init__(
        self,
        basis: SectorBasis,
        J: float,
        dimer_bonds: tuple[int, ...] = (),
        mu3: float = 0.0,
        mu8: float = 0.0,
    ):
        self.basis = basis
        self.J = float(J)
        self.dimer_bonds = tuple(int(b) for b in dimer_bonds)
        self.mu3 = float(mu3)
        self.mu8 = float(mu8)
        geom = basis.geometry

        bonds = geom.bonds
        self.bond_pos = basis.position_of[bonds].astype(np.int64)
        if np.any(self.bond_pos < 0):
            raise ValueError("geometry bond touches an inactive site")
        self.pair_pow = (
            basis.powers[self.bond_pos[:, 0]] + basis.powers[self.bond_pos[:, 1]]
        )
        if self.lookup is not None:
            self._table = self.basis.lookup
            self._use_table = True
        else:
            self._table = np.empty(0, dtype=np.int32)
            self._use_table = False

        ones = np.ones(len(bonds), dtype=np.float64)
        self._diag_full = _kernels.bond_diagonal_sums(
            basis.colors, self.bond_pos, ones, basis.n_colors
        )
        dimer_w = np.zeros(len(bonds), dtype=np.float64)
        dimer_w[list(self.dimer_bonds)] = 1.0
        self._dimer_mask = dimer_w
        if self.dimer_bonds:
            self._diag_dimer = _kernels.bond_diagonal_sums(
                basis.colors, self.bond_pos, dimer_w, basis.n_colors
            )
        else:
            self._diag_dimer = np.zeros(basis.dim, dtype=np.float64)

        self._mu_diag = self._chemical_potential_diagonal()

    @property
    def lookup(self):
        return self.basis.lookup

    def _chemical_potential_diagonal(self) -> np.ndarray:
        if self.mu3 == 0.0 and self.mu8 == 0.0:
            return np.zeros(self.basis.dim, dtype=np.float64)
        if self.basis.n_colors != 3:
            raise ValueError("chemical potentials are defined for N=3 only")
        geom = self.basis.geometry
        site_energy = -(self.mu3 * _L3_DIAG + self.mu8 * _L8_DIAG)
        subl = geom.sublattice[geom.active_sites].astype(np.float64)
        sign = 1.0 - 2.0 * subl  # +1 on A, -1 on B (hole trace flips the sign)
        per_pos = sign[:, None] * site_energy[None, :]  # (n_active, 3)
        colors = self.basis.colors
        n_act = colors.shape[1]
        diag = np.zeros(self.basis.dim, dtype=np.float64)
        for k in range(n_act):
            diag += per_pos[k, colors[:, k]]
        return diag

    def bond_weights(self, tau: float) -> np.ndarray:
        w = np.full(self.bond_pos.shape[0], tau * self.J, dtype=np.float64)
        w += (1.0 - tau) * self.J * self._dimer_mask
        return w

    def diagonal(self, tau: float) -> np.ndarray:
        return (
            self.J * (tau * self._diag_full + (1.0 - tau) * self._diag_dimer)
            + self._mu_diag
        )

    def apply(self, amplitudes: np.ndarray, tau: float = 1.0, out=None) -> np.ndarray:
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {tau}")
        amplitudes = np.ascontiguousarray(amplitudes)
        if out is None:
            out = np.empty_like(amplitudes)
        _kernels.apply_bond_hamiltonian(
            self.basis.states,
            self.basis.colors,
            self.diagonal(tau),
            amplitudes,
            out,
            self.bond_pos,
            self.bond_weights(tau),
            self.pair_pow,
            self.basis.n_colors,
            self._table,
            self._use_table,
        )
        return out

    def expectation(self, amplitudes: np.ndarray, tau: float = 1.0) -> float:
        return float(np.vdot(amplitudes, self.apply(amplitudes, tau)).real)

    def linear_operator(self, tau: float = 1.0, dtype=np.float64) -> LinearOperator:
        dim = self.basis.dim
        return LinearOperator(
            (dim, dim),
            matvec=lambda v: self.apply(np.asarray(v, dtype=dtype).ravel(), tau),
            dtype=dtype,
        )

    def dense(self, tau: float = 1.0, limit: int = 4096) -> np.ndarray:
        """Materialize the sector matrix (test/small-sector path)."""
        dim = self.basis.dim
        if dim > limit:
            raise ValueError(f"refusing to densify a {dim}-dimensional sector")
        h = np.empty((dim, dim))
        e = np.zeros(dim)
        for r in range(dim):
            e[r] = 1.0
            h[:, r] = self.apply(e, tau)
            e[r] = 0.0
        return h

    def per_bond_expectations(self, amplitudes: np.ndarray) -> np.ndarray:
        """<K_b> per geometry bond at unit weight (no J)."""
        return _kernels.bond_kernel_expectations(
            self.basis.states,
            self.basis.colors,
            np.ascontiguousarray(amplitudes),
            self.bond_pos,
            self.pair_pow,
            self.basis.n_colors,
            self._table,
            self._use_table,
        )


def _cached_hamiltonian(
    basis: SectorBasis, J, dimer_bonds, mu3, mu8
) -> SectorHamiltonian:
    key = (float(J), tuple(dimer_bonds), float(mu3), float(mu8))
    ham = basis._ham_cache.get(key)
    if ham is None:
        ham = SectorHamiltonian(basis, J, tuple(dimer_bonds), mu3, mu8)
        basis._ham_cache[key] = ham
    return ham


def apply_hamiltonian(
    psi: Wavefunction,
    tau: float,
    ramp: RampSpec,
    mu3: float = 0.0,
    mu8: float = 0.0,
) -> Wavefunction:
    """H(tau) psi + H_mu psi, matrix-free, output in the same sector."""
    ham = _cached_hamiltonian(psi.sector, ramp.J, ramp.dimer_bonds, mu3, mu8)
    return Wavefunction(psi.sector, ham.apply(psi.amplitudes, tau))
