"""Bipartite L x n ladder geometries with defects.

Sites live on an L x n rectangle (L along the long direction, n legs);
site indices are row-major in (y, x), i.e. ``index = y*L + x``, which is
part of the on-disk contract for per-bond observable dumps.  Sublattice A
is x+y even, B is x+y odd.  The boundary along the legs is always open;
the long direction is either open or periodic (periodic requires even L to
keep the lattice bipartite).

Quenched defects are empty sites: a removed site appears in no bond and is
excluded from all observables.  Realizations are reproducible from
(geometry, concentration, seed) and serializable to a plain-text format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LadderGeometry",
    "DisorderRealization",
    "build_lattice",
    "sample_defects",
    "save_realization",
    "load_realization",
]

LONGITUDINAL = 0
TRANSVERSE = 1


class LadderGeometry:
    """Immutable ladder geometry; all derived arrays are built up front.

    Attributes
    ----------
    length, legs : int
        L and n.  The transverse extent is L' = n * a.
    boundary_x : str
        "periodic" or "open" (legs are always open).
    coords : (n_sites, 2) int array of (x, y)
    sublattice : (n_sites,) int8, 0 for A (x+y even), 1 for B
    bonds : (n_bonds, 2) int32 of site indices, each stored once, both
        endpoints active; ordered longitudinal-first, then transverse,
        row-major in (y, x).
    bond_direction : (n_bonds,) int8, 0 longitudinal / 1 transverse
    removed_sites : tuple of removed (defect) site indices
    active_mask, active_sites : defect-filtered site set
    theta : float, the vacuum angle label n*pi mod 2*pi
    """

    def __init__(
        self,
        length: int,
        legs: int,
        boundary_x: str = "periodic",
        removed_sites: tuple[int, ...] = (),
    ):
        length = int(length)
        legs = int(legs)
        if length < 2:
            raise ValueError(f"length must be >= 2, got {length}")
        if legs < 1:
            raise ValueError(f"legs must be >= 1, got {legs}")
        if boundary_x not in ("periodic", "open"):
            raise ValueError(f"boundary_x must be 'periodic' or 'open', got {boundary_x!r}")
        if boundary_x == "periodic" and length % 2 != 0:
            raise ValueError("periodic boundary in x requires even length (bipartiteness)")

        self.length = length
        self.legs = legs
        self.boundary_x = boundary_x
        self.n_sites = length * legs

        removed = tuple(sorted(int(s) for s in removed_sites))
        if len(set(removed)) != len(removed):
            raise ValueError("removed sites must be distinct")
        for s in removed:
            if not 0 <= s < self.n_sites:
                raise ValueError(f"removed site {s} out of range")
        self.removed_sites = removed

        xs = np.arange(self.n_sites) % length
        ys = np.arange(self.n_sites) // length
        self.coords = np.stack([xs, ys], axis=1).astype(np.int32)
        self.sublattice = ((xs + ys) % 2).astype(np.int8)

        self.active_mask = np.ones(self.n_sites, dtype=bool)
        self.active_mask[list(removed)] = False
        self.active_sites = np.flatnonzero(self.active_mask).astype(np.int32)

        bonds: list[tuple[int, int]] = []
        direction: list[int] = []
        x_max = length if boundary_x == "periodic" else length - 1
        for y in range(legs):
            for x in range(x_max):
                i = y * length + x
                j = y * length + (x + 1) % length
                bonds.append((i, j))
                direction.append(LONGITUDINAL)
        for y in range(legs - 1):
            for x in range(length):
                i = y * length + x
                j = (y + 1) * length + x
                bonds.append((i, j))
                direction.append(TRANSVERSE)
        bonds_arr = np.asarray(bonds, dtype=np.int32).reshape(-1, 2)
        dir_arr = np.asarray(direction, dtype=np.int8)
        keep = self.active_mask[bonds_arr[:, 0]] & self.active_mask[bonds_arr[:, 1]]
        self.bonds = bonds_arr[keep]
        self.bond_direction = dir_arr[keep]

        # every bond must connect A to B
        if self.bonds.size:
            sa = self.sublattice[self.bonds[:, 0]]
            sb = self.sublattice[self.bonds[:, 1]]
            if np.any(sa == sb):
                raise AssertionError("bond connecting same sublattice; lattice not bipartite")

        self.theta = math.pi * (legs % 2)

    # -- basic queries ----------------------------------------------------

    @property
    def n_active(self) -> int:
        return int(self.active_sites.size)

    @property
    def n_bonds(self) -> int:
        return int(self.bonds.shape[0])

    def site_index(self, x: int, y: int) -> int:
        return y * self.length + x

    def longitudinal_bonds(self) -> np.ndarray:
        return np.flatnonzero(self.bond_direction == LONGITUDINAL)

    def with_defects(self, removed_sites) -> "LadderGeometry":
        """New geometry with the given sites emptied (bonds pruned)."""
        return LadderGeometry(
            self.length, self.legs, self.boundary_x, tuple(int(s) for s in removed_sites)
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LadderGeometry)
            and self.length == other.length
            and self.legs == other.legs
            and self.boundary_x == other.boundary_x
            and self.removed_sites == other.removed_sites
        )

    def __hash__(self) -> int:
        return hash((self.length, self.legs, self.boundary_x, self.removed_sites))

    def __repr__(self) -> str:
        extra = f", defects={len(self.removed_sites)}" if self.removed_sites else ""
        return (
            f"LadderGeometry(L={self.length}, n={self.legs}, "
            f"boundary_x={self.boundary_x!r}{extra})"
        )


@dataclass(frozen=True)
class DisorderRealization:
    """A reproducible defect draw: round(p * n_sites) distinct removed sites."""

    seed: int
    concentration: float
    removed: tuple[int, ...]


def build_lattice(length_L: int, legs_n: int, boundary_x: str = "periodic") -> LadderGeometry:
    """Construct a clean L x n ladder (see LadderGeometry for conventions)."""
    return LadderGeometry(length_L, legs_n, boundary_x)


def sample_defects(
    geometry: LadderGeometry, concentration: float, seed: int
) -> DisorderRealization:
    """Draw distinct defect sites uniformly over the lattice, without replacement.

    The draw is deterministic given the seed; the removed-site count is
    round(p * L * n).
    """
    p = float(concentration)
    if not 0.0 <= p < 0.5:
        raise ValueError(f"concentration must satisfy 0 <= p < 0.5, got {p}")
    n_remove = int(round(p * geometry.n_sites))
    rng = np.random.default_rng(seed)
    if n_remove:
        removed = np.sort(rng.choice(geometry.n_sites, size=n_remove, replace=False))
        removed_t = tuple(int(s) for s in removed)
    else:
        removed_t = ()
    return DisorderRealization(seed=int(seed), concentration=p, removed=removed_t)


# -- plain-text serialization ---------------------------------------------
#
# header: length / legs / boundaries (and seed + concentration when a
# realization is attached); body: removed site indices, one per line.


def save_realization(
    path, geometry: LadderGeometry, realization: DisorderRealization | None = None
) -> None:
    lines = [
        "# sunladder lattice v1",
        f"length {geometry.length}",
        f"legs {geometry.legs}",
        f"boundary_x {geometry.boundary_x}",
        "boundary_y open",
    ]
    removed = geometry.removed_sites
    if realization is not None:
        lines.append(f"seed {realization.seed}")
        lines.append(f"concentration {realization.concentration!r}")
        removed = realization.removed
    lines.append("removed")
    lines.extend(str(s) for s in removed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def load_realization(path) -> tuple[LadderGeometry, DisorderRealization | None]:
    """Reconstruct (geometry-with-defects, realization) from save_realization output."""
    header: dict[str, str] = {}
    removed: list[int] = []
    in_body = False
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "removed":
            in_body = True
            continue
        if in_body:
            removed.append(int(line))
        else:
            key, _, value = line.partition(" ")
            header[key] = value.strip()
    try:
        length = int(header["length"])
        legs = int(header["legs"])
        boundary_x = header["boundary_x"]
    except KeyError as exc:
        raise ValueError(f"lattice file {path} missing header field {exc}") from exc
    geom = LadderGeometry(length, legs, boundary_x, tuple(removed))
    realization = None
    if "seed" in header:
        realization = DisorderRealization(
            seed=int(header["seed"]),
            concentration=float(header.get("concentration", "0")),
            removed=tuple(removed),
        )
    return geom, realization
