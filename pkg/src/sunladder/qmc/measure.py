"""Binned estimators: energy, equal-time color correlations, S(k).

The equal-time correlation compares particle-hole colors, in which the
antiferromagnetic order is uniform (no staggering):

    C(x) = N/(N-1) * ( <delta_{c(0), c(x)}> - 1/N ),

averaged over reference sites, legs, and a sampled set of imaginary-time
slices; only pairs of active (non-defect) sites count.  Structure factors
S(0) and S(2 pi / L) are the cosine transforms of the same connected field,
so S(0) >= S(k1) >= 0 in the ordered phase.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Estimators"]


class Estimators:
    """Per-sweep measurement and fixed-width binning for one chain."""

    def __init__(
        self,
        geometry,
        n_colors: int,
        J: float,
        beta: float,
        bin_size: int,
        n_slices: int = 4,
        measure_correlations: bool = True,
    ):
        self.geometry = geometry
        self.n_colors = int(n_colors)
        self.J = float(J)
        self.beta = float(beta)
        self.bin_size = max(1, int(bin_size))
        self.n_slices = max(1, int(n_slices))
        self.measure_correlations = measure_correlations and geometry.boundary_x == "periodic"

        length = geometry.length
        legs = geometry.legs
        self._active_grid = geometry.active_mask.reshape(legs, length)
        if self.measure_correlations:
            f = np.fft.rfft(self._active_grid.astype(np.float64), axis=-1)
            self._pairs = np.fft.irfft((f * f.conj()).real.sum(axis=0), n=length)
            self._pairs = np.maximum(np.rint(self._pairs), 0.0)
            self._cos_k1 = np.cos(2 * np.pi * np.arange(length) / length)

        self._bin_n = 0
        self._sum_nops = 0.0
        self._sum_loops = 0.0
        if self.measure_correlations:
            self._sum_c = np.zeros(length)
        self.nops_bins: list[float] = []
        self.loop_bins: list[float] = []
        self.c_bins: list[np.ndarray] = []

    def measure(self, config, n_loops: int = 0) -> None:
        self._sum_nops += config.n_ops
        self._sum_loops += n_loops
        if self.measure_correlations:
            self._sum_c += self._correlation_sample(config)
        self._bin_n += 1
        if self._bin_n == self.bin_size:
            self._close_bin()

    def _correlation_sample(self, config) -> np.ndarray:
        length = self.geometry.length
        legs = self.geometry.legs
        n = self.n_colors
        snaps = config.snapshot_slices(self.n_slices)  # (S, n_sites)
        grid = snaps.reshape(-1, legs, length)
        one_hot = (grid[:, :, None, :] == np.arange(n, dtype=np.int8)[None, None, :, None])
        one_hot = one_hot & self._active_grid[None, :, None, :]
        f = np.fft.rfft(one_hot.astype(np.float64), axis=-1)
        power = (f * f.conj()).real.sum(axis=(0, 1, 2))
        match = np.fft.irfft(power, n=length) / snaps.shape[0]
        with np.errstate(invalid="ignore", divide="ignore"):
            c_match = np.where(self._pairs > 0, match / self._pairs, 1.0 / n)
        return (n / (n - 1.0)) * (c_match - 1.0 / n)

    def _close_bin(self) -> None:
        self.nops_bins.append(self._sum_nops / self._bin_n)
        self.loop_bins.append(self._sum_loops / self._bin_n)
        if self.measure_correlations:
            self.c_bins.append(self._sum_c / self._bin_n)
            self._sum_c = np.zeros_like(self._sum_c)
        self._sum_nops = 0.0
        self._sum_loops = 0.0
        self._bin_n = 0

    # -- binned results -----------------------------------------------------

    @property
    def n_bins(self) -> int:
        return len(self.nops_bins)

    def energy_bins(self) -> np.ndarray:
        """Total-energy bins via <H> = -<n>/beta + (2J/N) * N_bonds."""
        shift = (2.0 * self.J / self.n_colors) * self.geometry.n_bonds
        return -np.asarray(self.nops_bins) / self.beta + shift

    def correlation_bins_folded(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, bins) with C folded to x = 0..L/2 (periodic symmetrization)."""
        length = self.geometry.length
        half = length // 2
        full = np.asarray(self.c_bins)  # (nb, L)
        folded = np.empty((full.shape[0], half + 1))
        folded[:, 0] = full[:, 0]
        for x in range(1, half):
            folded[:, x] = 0.5 * (full[:, x] + full[:, length - x])
        folded[:, half] = full[:, half]
        return np.arange(half + 1), folded

    def structure_factor_bins(self) -> tuple[np.ndarray, np.ndarray]:
        """(S(0) bins, S(2pi/L) bins) from the full connected correlation."""
        full = np.asarray(self.c_bins)
        s0 = full.sum(axis=1)
        s1 = full @ self._cos_k1
        return s0, s1

    def binning_warnings(self) -> list[str]:
        """Flag observables whose binning has not plateaued (error still growing)."""
        warnings = []
        for name, bins in (("n_ops", np.asarray(self.nops_bins)),):
            if bins.size >= 8:
                e1 = bins.std(ddof=1) / np.sqrt(bins.size)
                pair = 0.5 * (bins[: bins.size // 2 * 2 : 2] + bins[1 : bins.size // 2 * 2 : 2])
                e2 = pair.std(ddof=1) / np.sqrt(pair.size)
                if e2 > 1.5 * e1:
                    warnings.append(
                        f"binning-not-plateaued: {name} (error grows {e2 / e1:.2f}x on rebin)"
                    )
        return warnings
