"""
Uniform cell-centred 1-D grid shared by the Fokker-Planck solver and histogram reconstruction
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError

MIN_CELLS = 4


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n_cells: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ArgumentError(f"grid needs a < b, got [{self.a}, {self.b}]")
        if int(self.n_cells) < MIN_CELLS:
            raise ArgumentError(f"grid needs at least {MIN_CELLS} cells, got {self.n_cells}")

    @property
    def dw(self) -> float:
        return (self.b - self.a) / self.n_cells

    @cached_property
    def edges(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_cells + 1)

    @cached_property
    def centres(self) -> np.ndarray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.dw

    def refine(self, factor: int) -> "Grid1D":
        return Grid1D(self.a, self.b, self.n_cells * int(factor))

    def cell_average(self, func, order: int = 8) -> np.ndarray:
        """(1/dw) * integral of func over each cell, Gauss-Legendre per cell"""
        x, wts = np.polynomial.legendre.leggauss(order)
        half = 0.5 * self.dw
        points = self.centres[:, None] + half * x[None, :]
        return 0.5 * (np.asarray(func(points), dtype=float) * wts[None, :]).sum(axis=1)

    def project(self, values: np.ndarray, target: "Grid1D") -> np.ndarray:
        """Piecewise-constant density on this grid onto `target`, by exact cell overlap"""
        cumulative = np.concatenate(([0.0], np.cumsum(np.asarray(values, dtype=float) * self.dw)))
        mass_at_edges = np.interp(target.edges, self.edges, cumulative, left=0.0, right=cumulative[-1])
        return np.diff(mass_at_edges) / target.dw
