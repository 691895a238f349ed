"""SU(N) generator algebra for mixed fundamental/antifundamental spin pairs.

Generators are the generalized Gell-Mann matrices normalized to
``Tr[l^a l^b] = 2 delta_ab``, ordered with the N(N-1)/2 symmetric
off-diagonal matrices first, then the N(N-1)/2 antisymmetric ones, and the
N-1 diagonal matrices last (so that for N=3 the two diagonal generators sit
at fixed indices -3 and -1 and match diag(1,-1,0) and diag(1,1,-2)/sqrt(3)).

A site carrying the antifundamental representation uses the conjugate
generators ``-conj(l^a)``.  The two-site coupling

    K = sum_a  l^a (x) (-conj(l^a))

acting on the product color basis ``|m> (x) |n>`` (n being the hole color of
the antifundamental site) has the closed form

    K[(m,n),(m',n')] = -2 (d_mn d_m'n' - d_mm' d_nn' / N)
                     = -2N P_s + (2/N) Id,

where ``P_s`` projects onto the color-aligned singlet ``sum_m |m,m>/sqrt(N)``.
Everything downstream (exact diagonalization, Monte Carlo vertex weights)
consumes these matrix elements; dense matrices exist only for small N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GellMannBasis",
    "BondOperator",
    "CouplingParams",
    "SuperexchangeResult",
    "CouplingPoleError",
    "gell_mann",
    "bond_matrix",
    "bond_matrix_from_generators",
    "superexchange_coupling",
    "same_rep_coupling",
]

# Dense N^2 x N^2 bond matrices are only materialized up to this size;
# larger systems must use the closed-form matrix elements.
MAX_DENSE_COLORS = 6


class CouplingPoleError(ValueError):
    """A superexchange denominator vanished (second-order theory breaks down)."""


@dataclass(frozen=True)
class GellMannBasis:
    """The N^2 - 1 generalized Gell-Mann generators of su(N).

    ``generators`` has shape (N^2-1, N, N); each matrix is Hermitian,
    traceless and trace-orthonormalized to ``Tr[l^a l^b] = 2 delta_ab``.
    """

    n_colors: int
    generators: np.ndarray

    def antifundamental(self) -> np.ndarray:
        """Generators of the conjugate representation, ``-conj(l^a)``."""
        return -self.generators.conj()

    def structure_constants(self) -> np.ndarray:
        """Real antisymmetric f_abc defined by [l^a, l^b] = i f_abc l^c.

        Recovered numerically as f = -(i/2) Tr([l^a, l^b] l^c); with the
        Tr[l^a l^b] = 2 delta_ab normalization this closes the commutators
        exactly (for N=2 it gives f_abc = 2 eps_abc).
        """
        g = self.generators
        comm = np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g)
        f = -0.5j * np.einsum("abik,cki->abc", comm, g)
        return f.real

    @property
    def diagonal_indices(self) -> tuple[int, ...]:
        """Indices of the N-1 diagonal (Cartan) generators, last in order."""
        d = self.n_colors**2 - 1
        return tuple(range(d - (self.n_colors - 1), d))

    def casimir(self) -> np.ndarray:
        """sum_a (l^a)^2; equals 2(N^2-1)/N times the identity."""
        return np.einsum("aij,ajk->ik", self.generators, self.generators)


@dataclass(frozen=True)
class BondOperator:
    """Two-site kernel of a fundamental/antifundamental pair.

    ``matrix`` is the real N^2 x N^2 representation of
    sum_a l^a (x) (-conj(l^a)) in the product color basis (row index
    m*N + n), ``singlet_projector`` the rank-one projector P_s onto the
    color-aligned singlet.  Spectrum: -2N + 2/N once, +2/N with
    multiplicity N^2 - 1.
    """

    n_colors: int
    matrix: np.ndarray
    singlet_projector: np.ndarray

    @property
    def singlet_energy(self) -> float:
        return -2.0 * self.n_colors + 2.0 / self.n_colors

    @property
    def adjoint_energy(self) -> float:
        return 2.0 / self.n_colors

    def singlet_vector(self) -> np.ndarray:
        """The uniform color-aligned singlet sum_m |m,m>/sqrt(N)."""
        n = self.n_colors
        v = np.zeros(n * n)
        v[:: n + 1] = 1.0 / np.sqrt(n)
        return v


def gell_mann(n_colors: int) -> GellMannBasis:
    """Build the generalized Gell-Mann basis for su(n_colors).

    Ordering: symmetric off-diagonal pairs (j<k lexicographic), then
    antisymmetric pairs, then the N-1 diagonal generators
    ``sqrt(2/(l(l+1))) diag(1,...,1,-l,0,...,0)``.
    """
    n = int(n_colors)
    if n < 2:
        raise ValueError(f"n_colors must be >= 2, got {n_colors}")
    gens = np.zeros((n * n - 1, n, n), dtype=complex)
    idx = 0
    for j in range(n):
        for k in range(j + 1, n):
            gens[idx, j, k] = 1.0
            gens[idx, k, j] = 1.0
            idx += 1
    for j in range(n):
        for k in range(j + 1, n):
            gens[idx, j, k] = -1.0j
            gens[idx, k, j] = 1.0j
            idx += 1
    for l in range(1, n):
        scale = np.sqrt(2.0 / (l * (l + 1)))
        gens[idx, range(l), range(l)] = scale
        gens[idx, l, l] = -l * scale
        idx += 1
    return GellMannBasis(n_colors=n, generators=gens)


def bond_matrix(n_colors: int) -> BondOperator:
    """Dense bond kernel from the closed-form matrix elements.

    Only available for n_colors <= 6; larger N must use the matrix elements
    directly (the engines never touch dense bond matrices).
    """
    n = int(n_colors)
    if n < 2:
        raise ValueError(f"n_colors must be >= 2, got {n_colors}")
    if n > MAX_DENSE_COLORS:
        raise ValueError(
            f"dense bond matrices are limited to n_colors <= {MAX_DENSE_COLORS}; "
            "use the closed-form matrix elements instead"
        )
    eye = np.eye(n)
    # K[(m,n),(m',n')] = -2 (d_mn d_m'n' - d_mm' d_nn'/N), row index m*N + n
    k = -2.0 * (
        np.einsum("mn,op->mnop", eye, eye) - np.einsum("mo,np->mnop", eye, eye) / n
    ).reshape(n * n, n * n)
    p_s = np.einsum("mn,op->mnop", eye, eye).reshape(n * n, n * n) / n
    return BondOperator(n_colors=n, matrix=k, singlet_projector=p_s)


def bond_matrix_from_generators(basis: GellMannBasis) -> np.ndarray:
    """Explicit generator sum sum_a l^a (x) (-conj(l^a)); cross-checks bond_matrix."""
    g = basis.generators
    k = np.einsum("aij,akl->ikjl", g, -g.conj()).reshape(
        basis.n_colors**2, basis.n_colors**2
    )
    if np.abs(k.imag).max() > 1e-12:
        raise AssertionError("bond kernel acquired an imaginary part")
    return k.real


@dataclass(frozen=True)
class CouplingParams:
    """Hubbard-derived parameters: tunneling t, on-site U, sublattice offset V."""

    t: float
    U: float
    V: float
    n_colors: int = 3

    def __post_init__(self) -> None:
        if self.U <= 0:
            raise ValueError(f"U must be positive, got {self.U}")
        if self.t < 0:
            raise ValueError(f"t must be non-negative, got {self.t}")
        if self.n_colors < 2:
            raise ValueError(f"n_colors must be >= 2, got {self.n_colors}")


@dataclass(frozen=True)
class SuperexchangeResult:
    """Second-order exchange coupling with regime flags."""

    value: float
    antiferromagnetic: bool
    static_impurity_regime: bool


def _check_pole(denominator: float, scale: float, what: str) -> None:
    if abs(denominator) <= 1e-12 * max(scale, 1.0):
        raise CouplingPoleError(f"superexchange pole: {what} vanishes")


def superexchange_coupling(params: CouplingParams) -> SuperexchangeResult:
    """J = t^2 U / ((-V + U(N-3)) (V - U(N-1))) for a mixed-representation bond.

    Flags whether the coupling is antiferromagnetic (J > 0) and whether the
    parameters sit in the static-impurity window 2U > V > U where partially
    filled defect sites stay immobile.
    """
    t, u, v, n = params.t, params.U, params.V, params.n_colors
    scale = abs(v) + u * n
    d1 = -v + u * (n - 3)
    d2 = v - u * (n - 1)
    _check_pole(d1, scale, "-V + U(N-3)")
    _check_pole(d2, scale, "V - U(N-1)")
    j = t * t * u / (d1 * d2)
    return SuperexchangeResult(
        value=j,
        antiferromagnetic=j > 0,
        static_impurity_regime=(2 * u > v > u),
    )


def same_rep_coupling(params: CouplingParams) -> float:
    """J' = t^2 U / (V^2 - U^2) between two spins of the same representation."""
    t, u, v = params.t, params.U, params.V
    d = v * v - u * u
    _check_pole(d, (abs(v) + u) ** 2, "V^2 - U^2")
    return t * t * u / d
