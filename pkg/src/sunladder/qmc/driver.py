"""Chain driver: thermalization, measurement, binning, disorder ensembles.

One sweep = one diagonal-update pass + one full loop update + one
measurement.  A chain is strictly sequential and bit-reproducible from its
seed; parallelism only ever happens across chains/realizations, merged in
a fixed order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..analysis import CorrelationFunction, jackknife, jackknife_map
from ..lattice import DisorderRealization, LadderGeometry, sample_defects
from .measure import Estimators
from .sse import SseConfiguration, diagonal_update, loop_update, validate_configuration

__all__ = [
    "RunSpec",
    "BinnedEstimate",
    "ObservableSeries",
    "DisorderEnsemble",
    "run_chain",
    "disorder_ensemble",
]

MIN_THERMALIZATION = 10_000


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one chain."""

    geometry: LadderGeometry
    n_colors: int
    beta: float  # in units 1/J
    sweeps: int
    J: float = 1.0
    thermalization: int | None = None  # default: max(1e4, sweeps/10)
    seed: int = 0
    disorder: DisorderRealization | None = None
    bins: int = 32
    n_slices: int = 4
    debug_checks: bool = False

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.sweeps <= 0:
            raise ValueError(f"sweeps must be positive, got {self.sweeps}")

    @property
    def effective_thermalization(self) -> int:
        if self.thermalization is not None:
            return int(self.thermalization)
        return max(MIN_THERMALIZATION, self.sweeps // 10)


@dataclass
class BinnedEstimate:
    mean: float
    error: float
    bins: np.ndarray


@dataclass
class ObservableSeries:
    """Binned chain output with jackknife errors and full provenance."""

    energy: BinnedEstimate
    energy_density: BinnedEstimate
    s0: BinnedEstimate | None
    s1: BinnedEstimate | None
    correlation: CorrelationFunction | None
    mean_n_ops: float
    warnings: list[str]
    metadata: dict


def run_chain(spec: RunSpec) -> ObservableSeries:
    """Thermalize and measure one chain (deterministic given the seed)."""
    geometry = spec.geometry
    if spec.disorder is not None and spec.disorder.removed:
        geometry = geometry.with_defects(spec.disorder.removed)

    config = SseConfiguration(geometry, spec.n_colors, seed=spec.seed)
    therm = spec.effective_thermalization
    insert_stats = np.zeros(2, dtype=np.int64)
    for _ in range(therm):
        diagonal_update(config, spec.beta, spec.J)
        loop_update(config)

    bin_size = max(1, spec.sweeps // spec.bins)
    est = Estimators(
        geometry,
        spec.n_colors,
        spec.J,
        spec.beta,
        bin_size=bin_size,
        n_slices=spec.n_slices,
    )
    violations = 0
    for _ in range(spec.sweeps):
        att, acc = diagonal_update(config, spec.beta, spec.J)
        insert_stats += (att, acc)
        n_loops = loop_update(config)
        if spec.debug_checks:
            violations += validate_configuration(config)
        est.measure(config, n_loops)

    warnings = est.binning_warnings()
    if est.n_bins < 20:
        warnings.append(f"low-statistics: only {est.n_bins} bins (want >= 20)")
    if violations:
        raise AssertionError(f"configuration contract violated {violations} times")

    e_bins = est.energy_bins()
    e_mean, e_err = jackknife(e_bins[:, None])
    n_act = geometry.n_active
    energy = BinnedEstimate(float(e_mean[0]), float(e_err[0]), e_bins)
    density = BinnedEstimate(float(e_mean[0]) / n_act, float(e_err[0]) / n_act, e_bins / n_act)

    s0 = s1 = corr = None
    if est.measure_correlations:
        s0_bins, s1_bins = est.structure_factor_bins()
        s0m, s0e = jackknife(s0_bins[:, None])
        s1m, s1e = jackknife(s1_bins[:, None])
        s0 = BinnedEstimate(float(s0m[0]), float(s0e[0]), s0_bins)
        s1 = BinnedEstimate(float(s1m[0]), float(s1e[0]), s1_bins)
        xs, c_bins = est.correlation_bins_folded()
        c_mean, c_err = jackknife(c_bins)
        corr = CorrelationFunction(
            x=xs,
            values=c_mean,
            errors=c_err,
            length=geometry.length,
            boundary=geometry.boundary_x,
            bins=c_bins,
        )

    metadata = {
        "L": geometry.length,
        "legs": geometry.legs,
        "boundary_x": geometry.boundary_x,
        "n_colors": spec.n_colors,
        "J": spec.J,
        "beta": spec.beta,
        "seed": spec.seed,
        "sweeps": spec.sweeps,
        "thermalization": therm,
        "bins": est.n_bins,
        "bin_size": bin_size,
        "n_slices": spec.n_slices,
        "n_defects": len(geometry.removed_sites),
        "defect_seed": spec.disorder.seed if spec.disorder else None,
        "concentration": spec.disorder.concentration if spec.disorder else 0.0,
        "final_string_capacity": config.capacity,
        "insert_attempts": int(insert_stats[0]),
        "insert_accepts": int(insert_stats[1]),
    }
    return ObservableSeries(
        energy=energy,
        energy_density=density,
        s0=s0,
        s1=s1,
        correlation=corr,
        mean_n_ops=float(np.mean(est.nops_bins)),
        warnings=warnings,
        metadata=metadata,
    )


@dataclass
class DisorderEnsemble:
    """Quenched average over defect realizations at one concentration."""

    concentration: float
    xi_mean: float
    xi_error: float
    xi_values: np.ndarray
    xi_errors: np.ndarray
    results: list[ObservableSeries]
    failures: list[tuple[int, str]]
    metadata: dict


def _xi2_of_series(series: ObservableSeries) -> tuple[float, float]:
    """Second-moment correlation length with end-to-end jackknife error."""
    length = series.metadata["L"]
    pairs = np.stack([series.s0.bins, series.s1.bins], axis=1)

    def to_xi2(mean_pair):
        s0m, s1m = mean_pair
        if s0m <= s1m or s1m <= 0:
            return np.nan
        return length / (2 * np.pi) * np.sqrt(s0m / s1m - 1.0)

    return jackknife_map(pairs, to_xi2)


def _run_realization(args):
    spec, index = args
    series = run_chain(spec)
    xi, xi_err = _xi2_of_series(series)
    return index, series, xi, xi_err


def disorder_ensemble(
    run_spec: RunSpec,
    concentration: float,
    n_realizations: int,
    seeds=None,
    max_workers: int = 1,
) -> DisorderEnsemble:
    """Independent chains over defect realizations; quenched-averaged xi.

    Seeds for (chain, defects) pairs derive deterministically from
    run_spec.seed unless an explicit seed list is given.  A failing
    realization is recorded and skipped, never fatal for the ensemble.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    if seeds is None:
        children = np.random.SeedSequence(run_spec.seed).spawn(n_realizations)
        seeds = [int(c.generate_state(1, np.uint64)[0]) for c in children]
    if len(seeds) != n_realizations:
        raise ValueError("need one seed per realization")

    jobs = []
    for r in range(n_realizations):
        defect_seed = seeds[r] ^ 0x5EED
        realization = sample_defects(run_spec.geometry, concentration, defect_seed)
        spec_r = replace(run_spec, seed=seeds[r], disorder=realization)
        jobs.append((spec_r, r))

    outputs = []
    failures: list[tuple[int, str]] = []
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = {pool.submit(_run_realization, job): job[1] for job in jobs}
            for future, index in futures.items():
                try:
                    outputs.append(future.result())
                except Exception as exc:  # noqa: BLE001 - per-realization isolation
                    failures.append((index, repr(exc)))
    else:
        for job in jobs:
            try:
                outputs.append(_run_realization(job))
            except Exception as exc:  # noqa: BLE001 - per-realization isolation
                failures.append((job[1], repr(exc)))
    outputs.sort(key=lambda t: t[0])
    if not outputs:
        raise RuntimeError("all disorder realizations failed")

    xi_vals = np.array([o[2] for o in outputs])
    xi_errs = np.array([o[3] for o in outputs])
    r_eff = len(outputs)
    mean = float(np.mean(xi_vals))
    stat = float(np.sqrt(np.sum(xi_errs**2)) / r_eff)
    scatter = float(np.std(xi_vals, ddof=1) / np.sqrt(r_eff)) if r_eff > 1 else 0.0
    combined = float(np.hypot(stat, scatter))

    metadata = {
        "concentration": concentration,
        "n_realizations": n_realizations,
        "n_succeeded": r_eff,
        "seeds": list(seeds),
        "defect_seeds": [s ^ 0x5EED for s in seeds],
        "estimator": "second_moment",
        "failures": failures,
    }
    return DisorderEnsemble(
        concentration=float(concentration),
        xi_mean=mean,
        xi_error=combined,
        xi_values=xi_vals,
        xi_errors=xi_errs,
        results=[o[1] for o in outputs],
        failures=failures,
        metadata=metadata,
    )
