"""Spatial discretization of the pricing PIDE.

Semidiscretizing the Bates PIDE on the grid of :mod:`bates_adi.grid` gives
an ODE system  U'(t) = A U(t) + G(t)  on the m = (m1-1)*(m2+1) interior
unknowns (j-major ordering). ``A`` splits into four parts used by the ADI
steppers:

* ``a1``   - all s-direction derivative terms minus (r+lam)/2 * I; strictly
  tridiagonal in the j-major ordering.
* ``a2``   - all v-direction derivative terms minus (r+lam)/2 * I; banded
  with lower bandwidth 1 and upper bandwidth 2 in the i-major ordering
  (the extra superdiagonal comes from the one-sided formula at v = 0).
* ``a0d``  - the nine-point mixed-derivative stencil.
* ``a0j``  - lam * J, where J is the block-diagonal quadrature matrix for
  the jump integral; one dense (m1-1) x (m1-1) block replicated over all
  v-levels, stored once.

``G(t)`` collects every stencil/quadrature reference to the Dirichlet data
u(0, v, t) = exp(-r t) K and u(Smax, v, t) = 0.  Each reference is
attributed to the split part whose stencil generated it, so the G parts
split exactly like A.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.special import erf, erfc

from .grid import SpatialGrid
from .model import BatesParams

SQRT2 = np.sqrt(2.0)


def _erf_diff(hi, lo):
    """erf(hi) - erf(lo), evaluated through erfc when both arguments sit in
    the same tail so the difference keeps full relative precision."""
    both_pos = (lo >= 0) & (hi >= 0)
    both_neg = (lo <= 0) & (hi <= 0)
    via_upper = erfc(lo) - erfc(hi)
    via_lower = erfc(-hi) - erfc(-lo)
    direct = erf(hi) - erf(lo)
    return np.where(both_pos, via_upper, np.where(both_neg, via_lower, direct))


class StencilWeights(NamedTuple):
    """Weights of a three-point finite-difference stencil."""

    left: float
    center: float
    right: float


def central_first(dl: float, dr: float) -> StencilWeights:
    """Central first-derivative weights on nodes (x-dl, x, x+dr).

    Exact on quadratics for any positive widths.
    """
    if dl <= 0 or dr <= 0:
        raise ValueError("stencil widths must be positive")
    return StencilWeights(
        left=-dr / (dl * (dl + dr)),
        center=(dr - dl) / (dl * dr),
        right=dl / ((dl + dr) * dr),
    )


def central_second(dl: float, dr: float) -> StencilWeights:
    """Central second-derivative weights on nodes (x-dl, x, x+dr)."""
    if dl <= 0 or dr <= 0:
        raise ValueError("stencil widths must be positive")
    return StencilWeights(
        left=2.0 / (dl * (dl + dr)),
        center=-2.0 / (dl * dr),
        right=2.0 / ((dl + dr) * dr),
    )


def forward_first_v0(d1: float, d2: float) -> StencilWeights:
    """One-sided first-derivative weights on nodes (v0, v1, v2).

    Used for the v-convection on the v = 0 boundary row, where no node
    exists below. Exact on quadratics.
    """
    if d1 <= 0 or d2 <= 0:
        raise ValueError("stencil widths must be positive")
    return StencilWeights(
        left=-(2.0 * d1 + d2) / (d1 * (d1 + d2)),
        center=(d1 + d2) / (d1 * d2),
        right=-d1 / ((d1 + d2) * d2),
    )


@dataclass(frozen=True)
class JumpBlock:
    """Quadrature weights for the jump integral, one row per interior s-node.

    ``interior`` maps interior samples u_1..u_{m1-1}; ``col_left`` and
    ``col_right`` hold the weights attached to the boundary nodes s_0 and
    s_{m1}, returned separately because they multiply Dirichlet data.
    All weights are nonnegative and every full row sums to at most one
    (it is the probability mass of the jump destination below Smax).
    """

    interior: np.ndarray
    col_left: np.ndarray
    col_right: np.ndarray

    @property
    def raw(self) -> np.ndarray:
        """(m1-1) x (m1+1) matrix acting on samples at every s-node."""
        return np.hstack(
            [self.col_left[:, None], self.interior, self.col_right[:, None]]
        )

    def row_sums(self) -> np.ndarray:
        return self.col_left + self.interior.sum(axis=1) + self.col_right


def jump_block(grid: SpatialGrid, params: BatesParams) -> JumpBlock:
    """Quadrature weights approximating integral_0^inf u(s_i y) f(y) dy.

    ``u`` is piecewise linear between s-nodes and taken to vanish for
    s >= Smax; f is the log-normal jump density. The weights come out in
    closed form through the error function; the conventions log(0) = -inf
    and erf(inf) = 1 make the first cell (which starts at s_0 = 0) exact.
    """
    s = grid.s_nodes
    m1 = grid.m1
    gamma, delta = params.gamma, params.delta
    s_int = s[1:-1][:, None]  # one row per interior node i = 1..m1-1

    with np.errstate(divide="ignore"):
        log_s = np.log(s)  # log_s[0] = -inf by convention
    # log(s_k / s_i) for every row i and node k
    log_ratio = log_s[None, :] - np.log(s_int)

    for d in (0, 1):
        args = (gamma + d * delta**2 - log_ratio) / (delta * SQRT2)
        c = np.exp(d * (gamma + 0.5 * delta**2)) * _erf_diff(args[:, 1:], args[:, :-1])
        if d == 0:
            c0 = c
        else:
            c1 = c
    # Recombining the moment terms cancels large products; extended
    # precision keeps the row sums from creeping past their exact bound 1.
    c0 = c0.astype(np.longdouble)
    c1 = c1.astype(np.longdouble)
    s_long = s.astype(np.longdouble)
    s_int_long = s_int.astype(np.longdouble)
    inv_2ds = 1.0 / (2.0 * grid.ds.astype(np.longdouble))[None, :]
    weights = np.zeros((m1 - 1, m1 + 1), dtype=np.longdouble)
    w_lower = (c1 * s_int_long - c0 * s_long[None, 1:]) * inv_2ds  # weight on u_k
    w_upper = (c0 * s_long[None, :-1] - c1 * s_int_long) * inv_2ds  # weight on u_{k+1}
    weights[:, :-1] += w_lower
    weights[:, 1:] += w_upper
    weights = weights.astype(np.float64)

    interior = np.ascontiguousarray(weights[:, 1:-1])
    return JumpBlock(
        interior=interior,
        col_left=np.ascontiguousarray(weights[:, 0]),
        col_right=np.ascontiguousarray(weights[:, -1]),
    )


class GParts(NamedTuple):
    """Boundary-source vectors of the four split operators at one time."""

    g0j: np.ndarray
    g0d: np.ndarray
    g1: np.ndarray
    g2: np.ndarray


class _CooBuilder:
    """Accumulates (row, col, value) triples for one sparse operator."""

    def __init__(self):
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows, cols, vals):
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        self.rows.append(np.asarray(rows, dtype=np.int64).ravel())
        self.cols.append(np.asarray(cols, dtype=np.int64).ravel())
        self.vals.append(np.asarray(vals, dtype=np.float64).ravel())

    def build(self, m: int) -> sparse.csr_matrix:
        if not self.rows:
            return sparse.csr_matrix((m, m))
        coo = sparse.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(m, m),
        )
        return coo.tocsr()


class SplitOperators:
    """The assembled four-way operator splitting plus boundary sources.

    Treat instances as immutable once assembled; they are safe to share.
    ``jump_matvec_count`` only instruments how often the dense jump block
    is applied.
    """

    def __init__(
        self,
        grid: SpatialGrid,
        params: BatesParams,
        a1: sparse.csr_matrix,
        a2: sparse.csr_matrix,
        a0d: sparse.csr_matrix,
        jump: JumpBlock,
        g1_unit: np.ndarray,
        g0d_unit: np.ndarray,
        g0j_unit: np.ndarray,
    ):
        self.grid = grid
        self.params = params
        self.a1 = a1
        self.a2 = a2
        self.a0d = a0d
        self.jump = jump
        self.a0j_block = params.lam * jump.interior
        self.g1_unit = g1_unit
        self.g0d_unit = g0d_unit
        self.g0j_unit = g0j_unit
        self.g2_unit = np.zeros(grid.m)
        self.jump_matvec_count = 0

    # -- boundary data -------------------------------------------------
    def boundary_value(self, t: float) -> float:
        """Dirichlet value at s = 0: the discounted strike exp(-r t) K."""
        return self.params.K * np.exp(-self.params.r * t)

    def g_parts(self, t: float) -> GParts:
        bv = self.boundary_value(t)
        return GParts(
            g0j=self.g0j_unit * bv,
            g0d=self.g0d_unit * bv,
            g1=self.g1_unit * bv,
            g2=self.g2_unit * bv,
        )

    def g0j(self, t: float) -> np.ndarray:
        return self.g0j_unit * self.boundary_value(t)

    def g0d(self, t: float) -> np.ndarray:
        return self.g0d_unit * self.boundary_value(t)

    def g1(self, t: float) -> np.ndarray:
        return self.g1_unit * self.boundary_value(t)

    def g2(self, t: float) -> np.ndarray:
        return self.g2_unit * self.boundary_value(t)

    # -- operator actions ----------------------------------------------
    def apply_a1(self, u: np.ndarray) -> np.ndarray:
        return self.a1 @ u

    def apply_a2(self, u: np.ndarray) -> np.ndarray:
        return self.a2 @ u

    def apply_a0d(self, u: np.ndarray) -> np.ndarray:
        return self.a0d @ u

    def apply_a0j_matrix(self, u: np.ndarray) -> np.ndarray:
        """lam * J applied to u: the single dense block once per v-level.

        Each level goes through an identical product, so levels holding
        identical s-slices come out bitwise identical.
        """
        self.jump_matvec_count += 1
        n_i = self.grid.m1 - 1
        n_j = self.grid.m2 + 1
        u_levels = np.ascontiguousarray(u.reshape(n_j, n_i))
        res = np.empty_like(u_levels)
        for j in range(n_j):
            np.dot(self.a0j_block, u_levels[j], out=res[j])
        return res.reshape(n_j * n_i)

    def a0j_matrix(self) -> sparse.csr_matrix:
        """Full sparse lam*J (block diagonal); intended for small grids."""
        blocks = [sparse.csr_matrix(self.a0j_block)] * (self.grid.m2 + 1)
        return sparse.block_diag(blocks, format="csr")


def apply_a0j(ops: SplitOperators, u: np.ndarray, t: float) -> np.ndarray:
    """Jump part of the right-hand side: lam*J u + G0J(t)."""
    if u.shape != (ops.grid.m,):
        raise ValueError(f"expected vector of length {ops.grid.m}, got shape {u.shape}")
    return ops.apply_a0j_matrix(u) + ops.g0j(t)


def _s_direction_entries(
    grid: SpatialGrid, params: BatesParams, builder: _CooBuilder, g1_unit: np.ndarray
) -> None:
    """Convection + diffusion in s, minus (r+lam)/2 on the diagonal."""
    s = grid.s_nodes
    v = grid.v_nodes
    n_i = grid.m1 - 1
    n_j = grid.m2 + 1
    conv = (params.r - params.lam * params.eps) * s[1:-1]
    half_react = 0.5 * (params.r + params.lam)

    for i in range(1, grid.m1):
        dl, dr = grid.ds[i - 1], grid.ds[i]
        w1 = central_first(dl, dr)
        w2 = central_second(dl, dr)
        diff = 0.5 * s[i] ** 2 * v  # varies over the v-levels
        rows = np.arange(n_j) * n_i + (i - 1)
        w_left = conv[i - 1] * w1.left + diff * w2.left
        w_center = conv[i - 1] * w1.center + diff * w2.center - half_react
        w_right = conv[i - 1] * w1.right + diff * w2.right
        builder.add(rows, rows, w_center)
        if i - 1 >= 1:
            builder.add(rows, rows - 1, w_left)
        else:
            g1_unit[rows] += w_left  # references u(0, v, t)
        if i + 1 <= grid.m1 - 1:
            builder.add(rows, rows + 1, w_right)
        # i + 1 == m1 references u(Smax, v, t) = 0: no contribution


def _v_direction_entries(grid: SpatialGrid, params: BatesParams, builder: _CooBuilder) -> None:
    """Convection + diffusion in v, minus (r+lam)/2 on the diagonal.

    Row j = 0 uses the one-sided convection formula (diffusion vanishes
    with v); row j = m2 enforces the Neumann condition by mirror ghost
    reflection, under which the convection term cancels identically.
    """
    v = grid.v_nodes
    dv = grid.dv
    n_i = grid.m1 - 1
    half_react = 0.5 * (params.r + params.lam)
    i_cols = np.arange(n_i)

    for j in range(grid.m2 + 1):
        conv = params.kappa * (params.eta - v[j])
        rows = j * n_i + i_cols
        if j == 0:
            w = forward_first_v0(dv[0], dv[1])
            builder.add(rows, rows, conv * w.left - half_react)
            builder.add(rows, rows + n_i, conv * w.center)
            builder.add(rows, rows + 2 * n_i, conv * w.right)
        elif j == grid.m2:
            h = dv[j - 1]
            w_mirror = 0.5 * params.sigma**2 * v[j] * (2.0 / h**2)
            builder.add(rows, rows - n_i, w_mirror)
            builder.add(rows, rows, -w_mirror - half_react)
        else:
            w1 = central_first(dv[j - 1], dv[j])
            w2 = central_second(dv[j - 1], dv[j])
            diff = 0.5 * params.sigma**2 * v[j]
            builder.add(rows, rows - n_i, conv * w1.left + diff * w2.left)
            builder.add(rows, rows, conv * w1.center + diff * w2.center - half_react)
            builder.add(rows, rows + n_i, conv * w1.right + diff * w2.right)


def _mixed_entries(
    grid: SpatialGrid, params: BatesParams, builder: _CooBuilder, g0d_unit: np.ndarray
) -> None:
    """Nine-point product stencil for rho*sigma*s*v * d2u/(ds dv).

    The stencil is the outer product of the two one-dimensional central
    first-derivative stencils. The coefficient vanishes at v = 0 and the
    Neumann condition kills the term at v = Vmax, so only interior
    v-levels contribute.
    """
    s = grid.s_nodes
    v = grid.v_nodes
    n_i = grid.m1 - 1
    coeff0 = params.rho * params.sigma

    # s-stencil weight arrays over the interior nodes i = 1..m1-1
    dl, dr = grid.ds[:-1], grid.ds[1:]
    ws_by_shift = {
        -1: -dr / (dl * (dl + dr)),
        0: (dr - dl) / (dl * dr),
        1: dl / ((dl + dr) * dr),
    }
    i_offsets = np.arange(n_i)

    for j in range(1, grid.m2):
        wv = central_first(grid.dv[j - 1], grid.dv[j])
        coeff = coeff0 * s[1:-1] * v[j]
        rows = j * n_i + i_offsets
        for di, ws in ws_by_shift.items():
            for dj, wvj in zip((-1, 0, 1), wv):
                vals = coeff * ws * wvj
                if di == -1:
                    # i = 1 references the Dirichlet data at s = 0
                    g0d_unit[rows[0]] += vals[0]
                    builder.add(rows[1:], (j + dj) * n_i + i_offsets[1:] - 1, vals[1:])
                elif di == 1:
                    # i = m1-1 references the zero Dirichlet data at Smax
                    builder.add(rows[:-1], (j + dj) * n_i + i_offsets[:-1] + 1, vals[:-1])
                else:
                    builder.add(rows, (j + dj) * n_i + i_offsets, vals)


def assemble(grid: SpatialGrid, params: BatesParams) -> SplitOperators:
    """Assemble the four split operators and the boundary-source parts."""
    m = grid.m
    b1 = _CooBuilder()
    b2 = _CooBuilder()
    b0d = _CooBuilder()
    g1_unit = np.zeros(m)
    g0d_unit = np.zeros(m)

    _s_direction_entries(grid, params, b1, g1_unit)
    _v_direction_entries(grid, params, b2)
    _mixed_entries(grid, params, b0d, g0d_unit)

    block = jump_block(grid, params)
    g0j_unit = params.lam * np.tile(block.col_left, grid.m2 + 1)

    return SplitOperators(
        grid=grid,
        params=params,
        a1=b1.build(m),
        a2=b2.build(m),
        a0d=b0d.build(m),
        jump=block,
        g1_unit=g1_unit,
        g0d_unit=g0d_unit,
        g0j_unit=g0j_unit,
    )


class UnsplitOperator:
    """A and G assembled in one pass, without the four-way attribution.

    Serves as an independent reference for the splitting identity
    a1 + a2 + a0d + a0j = A and g1 + g2 + g0d + g0j = G.
    """

    def __init__(self, matrix: sparse.csr_matrix, g_unit: np.ndarray, params: BatesParams):
        self.matrix = matrix
        self.g_unit = g_unit
        self._params = params

    def g(self, t: float) -> np.ndarray:
        return self.g_unit * (self._params.K * np.exp(-self._params.r * t))

    def apply(self, u: np.ndarray, t: float) -> np.ndarray:
        return self.matrix @ u + self.g(t)


def assemble_unsplit(grid: SpatialGrid, params: BatesParams) -> UnsplitOperator:
    """Assemble A = D - (r+lam) I + lam J directly."""
    m = grid.m
    builder = _CooBuilder()
    g_unit = np.zeros(m)
    _s_direction_entries(grid, params, builder, g_unit)
    _v_direction_entries(grid, params, builder)
    _mixed_entries(grid, params, builder, g_unit)
    matrix = builder.build(m)

    block = jump_block(grid, params)
    jump_full = sparse.block_diag(
        [sparse.csr_matrix(block.interior)] * (grid.m2 + 1), format="csr"
    )
    matrix = (matrix + params.lam * jump_full).tocsr()
    g_unit = g_unit + params.lam * np.tile(block.col_left, grid.m2 + 1)
    return UnsplitOperator(matrix, g_unit, params)
