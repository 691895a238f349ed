"""Krylov-subspace real-time propagation, exp(-i H dt) psi.

Each step builds a short Lanczos recurrence (default dimension 12, fully
reorthogonalized within the subspace), exponentiates the tridiagonal
projection, and estimates the local error from the first neglected
coupling; steps whose estimate exceeds the tolerance are rejected and
recursively halved.  The small-subspace exponential is exactly unitary, so
the norm is preserved to roundoff.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .basis import Wavefunction
from .hamiltonian import SectorHamiltonian

__all__ = ["PropagationError", "krylov_propagate"]


class PropagationError(RuntimeError):
    """Local error estimate could not be brought under tolerance."""


def _lanczos_decomposition(ham, tau, v, m):
    """m-step Lanczos of the Hermitian operator from start vector v (unit norm).

    Returns (V, alpha, beta, m_eff, breakdown) with V of shape (dim, m_eff);
    beta has length m_eff: beta[j] couples v_j to v_{j+1}, beta[m_eff-1] is
    the first neglected coupling (zero on breakdown).
    """
    dim = v.size
    vmat = np.empty((m, dim), dtype=v.dtype)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    vmat[0] = v
    breakdown = False
    m_eff = m
    for j in range(m):
        w = ham.apply(vmat[j], tau)
        a = np.vdot(vmat[j], w).real
        alpha[j] = a
        w -= a * vmat[j]
        if j > 0:
            w -= beta[j - 1] * vmat[j - 1]
        # full reorthogonalization inside the small subspace
        coeffs = vmat[: j + 1].conj() @ w
        w -= coeffs @ vmat[: j + 1]
        b = np.linalg.norm(w)
        beta[j] = b
        if b < 1e-13 * max(1.0, abs(a)):
            m_eff = j + 1
            breakdown = True
            break
        if j + 1 < m:
            vmat[j + 1] = w / b
    return vmat[:m_eff], alpha[:m_eff], beta[:m_eff], m_eff, breakdown


def _expm_apply(ham, tau, psi, dt, m, tol, depth, max_depth):
    """exp(-i H dt) psi via one Krylov step, splitting the step on rejection."""
    norm = np.linalg.norm(psi)
    vmat, alpha, beta, m_eff, breakdown = _lanczos_decomposition(ham, tau, psi / norm, m)
    theta, u = eigh_tridiagonal(alpha, beta[: m_eff - 1])
    phases = np.exp(-1j * dt * theta)
    coeff = u @ (phases * u[0].conj())
    if breakdown:
        err = 0.0
    else:
        err = abs(beta[m_eff - 1] * coeff[-1]) * abs(dt)
    if err > tol:
        if depth >= max_depth:
            raise PropagationError(
                f"step error estimate {err:.3e} > tol {tol:.3e} at minimal step"
            )
        half = _expm_apply(ham, tau, psi, dt / 2, m, tol / 2, depth + 1, max_depth)
        return _expm_apply(ham, tau, half, dt / 2, m, tol / 2, depth + 1, max_depth)
    return (norm * coeff) @ vmat


def krylov_propagate(
    psi: Wavefunction,
    hamiltonian: SectorHamiltonian,
    dt: float,
    steps: int,
    *,
    tau: float = 1.0,
    krylov_dim: int = 12,
    step_tol: float = 1e-10,
    max_splits: int = 20,
):
    """Yield (t, Wavefunction) along exp(-i H t), starting with (0, psi).

    dt is bounded by 0.1/J to keep single Krylov steps in their convergence
    regime; the initial state must be normalized.
    """
    j = hamiltonian.J
    if dt * j > 0.1 + 1e-12:
        raise ValueError(f"dt*J = {dt * j:.3f} exceeds the 0.1 step bound")
    if abs(psi.norm() - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    amps = np.asarray(psi.amplitudes, dtype=np.complex128).copy()
    yield 0.0, Wavefunction(psi.sector, amps)
    for step in range(1, int(steps) + 1):
        amps = _expm_apply(hamiltonian, tau, amps, dt, krylov_dim, step_tol, 0, max_splits)
        yield step * dt, Wavefunction(psi.sector, amps)
