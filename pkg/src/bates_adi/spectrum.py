"""Eigenvalue cloud of the jump quadrature matrix J.

J is block diagonal with one dense block repeated over all v-levels, so
its spectrum is the spectrum of the single interior block. The cloud sits
inside the closed complex unit disk; for wide jump-size distributions it
hugs the real interval [0, 1], while narrow distributions disperse it
through the disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import SpatialGrid
from .linalg import dense_eigenvalues
from .model import BatesParams
from .operators import jump_block


@dataclass(frozen=True)
class SpectrumExport:
    """Jump-matrix eigenvalues with the case metadata needed to plot them."""

    case: str
    m1: int
    m2: int
    values: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag)))

    def to_csv(self) -> str:
        lines = ["case,m1,m2,re,im"]
        lines += [
            f"{self.case},{self.m1},{self.m2},{float(v.real)!r},{float(v.imag)!r}"
            for v in self.values
        ]
        return "\n".join(lines) + "\n"


def jump_spectrum(grid: SpatialGrid, params: BatesParams, case: str = "custom") -> SpectrumExport:
    """Eigenvalues of the dense interior block of J.

    The block is the raw quadrature matrix, before the lam multiplier, so
    the cloud does not depend on the jump intensity.
    """
    block = jump_block(grid, params).interior
    result = dense_eigenvalues(block)
    return SpectrumExport(case=case, m1=grid.m1, m2=grid.m2, values=result.values)
