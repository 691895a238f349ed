"""Matrix-free exact diagonalization in conserved color-charge sectors."""

from .basis import (
    EmptySectorError,
    SectorBasis,
    Wavefunction,
    charge_vector,
    enumerate_sector,
    sector_dimension,
)
from .hamiltonian import (
    RampSpec,
    SectorHamiltonian,
    apply_hamiltonian,
    default_ramp,
    dimer_bond_indices,
)
from .spectra import GapScan, LanczosError, adiabatic_gap_scan, lanczos_spectrum
from .krylov import PropagationError, krylov_propagate
from .quench import (
    QuenchResult,
    false_vacuum_state,
    measure_dimerization,
    quench_false_vacuum,
)

__all__ = [
    "EmptySectorError",
    "SectorBasis",
    "Wavefunction",
    "charge_vector",
    "enumerate_sector",
    "sector_dimension",
    "RampSpec",
    "SectorHamiltonian",
    "apply_hamiltonian",
    "default_ramp",
    "dimer_bond_indices",
    "GapScan",
    "LanczosError",
    "adiabatic_gap_scan",
    "lanczos_spectrum",
    "PropagationError",
    "krylov_propagate",
    "QuenchResult",
    "false_vacuum_state",
    "measure_dimerization",
    "quench_false_vacuum",
]
