"""Simulator for antiferromagnetic SU(N) spin ladders in mixed
fundamental/antifundamental representations.

Subpackages:

* :mod:`sunladder.algebra` -- generalized Gell-Mann generators, two-site bond
  operators, superexchange couplings.
* :mod:`sunladder.lattice` -- ladder geometries, boundary conditions, quenched
  defect realizations.
* :mod:`sunladder.ed` -- matrix-free exact diagonalization: charge-sector
  bases, Lanczos spectra, Krylov real-time propagation, dimerization.
* :mod:`sunladder.qmc` -- stochastic series expansion Monte Carlo with
  operator-loop updates.
* :mod:`sunladder.analysis` -- correlation-length estimators, exponential
  width-scaling fits, quench summaries.
* :mod:`sunladder.cli` -- command-line front end.
"""

__version__ = "0.1.0"
