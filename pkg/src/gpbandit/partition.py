"""Adaptive hypercube cover of the unit box.

The cover starts as a uniform grid whose cardinality stays within T^q and is
refined by bisecting any cell whose sample count outgrows its diameter-derived
capacity: a cell of diameter rho splits once rho^(-1/b) < count + 1.  Each
cell owns an independent GP over the observations falling inside it.

Cell ownership is half-open ([lower, upper) per axis) except on faces that
coincide with the domain's upper boundary, which are closed; this gives every
point exactly one owning cell even though neighbouring boxes share faces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .gp import GpModel
from .kernels import KernelSpec


def split_constants(d: int, nu: float) -> tuple[float, float]:
    """Capacity exponent b and cover-cardinality exponent q for dimension d."""
    b = (d + 1) / (d + 2.0 * nu)
    q = d * (d + 1) / (d * (d + 2) + 2.0 * nu)
    return b, q


@dataclass(eq=False)
class Cell:
    """Axis-aligned box with its own local dataset and GP."""

    lower: np.ndarray
    upper: np.ndarray
    model: GpModel
    created_at: int = 1

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if not np.all(self.lower < self.upper):
            raise ValueError("cell must have lower < upper componentwise")

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def local_count(self) -> int:
        return self.model.n

    def contains(self, x: np.ndarray) -> bool:
        """Ownership test: half-open, closed on domain-boundary upper faces."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lower):
            return False
        at_domain_face = self.upper >= 1.0
        ok_upper = np.where(at_domain_face, x <= self.upper, x < self.upper)
        return bool(np.all(ok_upper))


@dataclass
class Cover:
    """Set of cells tiling [0,1]^d, plus the split-rule constants."""

    cells: list[Cell]
    b: float
    q: float
    horizon_T: int
    kernel: KernelSpec
    lam: float
    dim: int
    total_created: int = field(init=False)

    def __post_init__(self):
        self.total_created = len(self.cells)

    @property
    def cell_count(self) -> int:
        return len(self.cells)


def initial_cover(d: int, T: int, kernel: KernelSpec, lam: float, nu: float) -> Cover:
    """Uniform grid with max(1, floor(T^(q/d))) cells per side."""
    if T < 1:
        raise ValueError("horizon must be >= 1")
    b, q = split_constants(d, nu)
    m = max(1, math.floor(T ** (q / d)))
    edges = np.linspace(0.0, 1.0, m + 1)
    cells = []
    for idx in itertools.product(range(m), repeat=d):
        lower = np.array([edges[i] for i in idx])
        upper = np.array([edges[i + 1] for i in idx])
        cells.append(Cell(lower, upper, GpModel(kernel, lam), created_at=1))
    return Cover(cells, b, q, T, kernel, lam, d)


def locate(cover: Cover, x) -> Cell:
    """Unique cell owning x; raises if x falls outside the unit box."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"point outside domain: {x}")
    for cell in cover.cells:
        if cell.contains(x):
            return cell
    raise ValueError(f"no cell owns point {x}")  # tiling violated


def should_split(cover: Cover, cell: Cell) -> bool:
    """Diameter-vs-count capacity rule, strict inequality."""
    return cell.diameter ** (-1.0 / cover.b) < cell.local_count + 1


def split_cell(cover: Cover, cell: Cell, iteration: int) -> list[Cell]:
    """Bisect every side into 2^d children, redistributing the local data."""
    mid = 0.5 * (cell.lower + cell.upper)
    d = cover.dim
    children = []
    for corner in itertools.product((0, 1), repeat=d):
        corner = np.asarray(corner)
        lower = np.where(corner == 0, cell.lower, mid)
        upper = np.where(corner == 0, mid, cell.upper)
        children.append(
            Cell(lower, upper, GpModel(cover.kernel, cover.lam), created_at=iteration)
        )
    pts, obs = cell.model.points, cell.model.observations
    for x, y in zip(pts, obs):
        for child in children:
            if child.contains(x):
                child.model.update(x, y)
                break
        else:
            raise RuntimeError(f"orphaned point {x} during split")
    return children


def maybe_split(cover: Cover, cell: Cell, iteration: int) -> list[Cell]:
    """Apply the split rule to one cell, updating the cover in place.

    Returns the replacement cells ([cell] itself when no split happens).
    Children that immediately violate the rule are left for later passes.
    """
    if not should_split(cover, cell):
        return [cell]
    children = split_cell(cover, cell, iteration)
    pos = cover.cells.index(cell)
    cover.cells[pos : pos + 1] = children
    cover.total_created += len(children)
    return children


def split_pass(cover: Cover, iteration: int) -> int:
    """One pass of the split rule over all cells; returns cells split."""
    n_split = 0
    for cell in list(cover.cells):
        if len(maybe_split(cover, cell, iteration)) > 1:
            n_split += 1
    return n_split
