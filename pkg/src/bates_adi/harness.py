"""Experiment driver: temporal-error sweeps, pricing and file output.

The temporal error of a run with N steps is measured against a fine-step
reference solution in the maximum norm over the region of interest
K/2 < s < 3K/2, 0 < v < 1 (strict inequalities), which is where option
values matter in practice.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cases import CaseConfig
from .grid import SpatialGrid, build_grid, payoff_vector
from .model import BatesParams
from .operators import SplitOperators, assemble
from .schemes import REFERENCE_N_STEPS, SchemeConfig, reference_solution, run

DEFAULT_N_SWEEP = 20
SWEEP_CSV_HEADER = "case,adaptation,family,theta,N,error"


def default_n_values(n_min: int = 10, n_max: int = 1000, count: int = DEFAULT_N_SWEEP) -> list[int]:
    """Log-spaced step counts covering the benchmark abscissa range."""
    raw = np.geomspace(n_min, n_max, count)
    values = sorted({int(round(x)) for x in raw})
    return values


def build_case_grid(case: CaseConfig) -> SpatialGrid:
    return build_grid(
        case.params,
        case.m1,
        case.m2,
        smax_mult=case.smax_mult,
        vmax=case.vmax,
        stretch_s=case.stretch_s,
        stretch_v=case.stretch_v,
    )


def region_of_interest_mask(grid: SpatialGrid, params: BatesParams) -> np.ndarray:
    """Boolean mask over the solution vector; depends only on the grid."""
    s = grid.s_nodes[1:-1]
    v = grid.v_nodes
    s_ok = (s > 0.5 * params.K) & (s < 1.5 * params.K)
    v_ok = (v > 0.0) & (v < 1.0)
    return np.outer(v_ok, s_ok).ravel()


def temporal_error(
    ops: SplitOperators,
    cfg: SchemeConfig,
    u0: np.ndarray,
    u_reference: np.ndarray,
) -> float:
    """Max-norm error over the region of interest at t = T.

    A run that blows up to non-finite values reports an infinite error.
    """
    result = run(ops, cfg, u0)
    mask = region_of_interest_mask(ops.grid, ops.params)
    diff = np.abs(result.u_final[mask] - u_reference[mask])
    if not np.all(np.isfinite(diff)):
        return math.inf
    return float(np.max(diff))


@dataclass(frozen=True)
class SweepRow:
    """One temporal-error measurement."""

    case: str
    adaptation: int
    family: str
    theta: float
    n: int
    error: float

    def csv_line(self) -> str:
        return (
            f"{self.case},{self.adaptation},{self.family},"
            f"{float(self.theta)!r},{self.n},{float(self.error)!r}"
        )


def rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER] + [row.csv_line() for row in rows]
    return "\n".join(lines) + "\n"


def sweep(
    case: CaseConfig,
    schemes: list[tuple[int, str, float]],
    n_values: list[int] | None = None,
    n_ref: int = REFERENCE_N_STEPS,
    threads: int = 1,
    cache_dir: Path | str | None = None,
    out: Path | str | None = None,
) -> tuple[list[SweepRow], str]:
    """Temporal errors for every (adaptation, family, theta) x N combination.

    Rows keep the order of the inputs regardless of thread count, so the
    CSV is byte-identical across reruns. Partial results are flushed to
    ``out`` as soon as all jobs finish.
    """
    if n_values is None:
        n_values = default_n_values()
    grid = build_case_grid(case)
    ops = assemble(grid, case.params)
    u0 = payoff_vector(grid, case.params)
    u_ref = reference_solution(ops, u0, n_ref=n_ref, cache_dir=cache_dir)

    jobs = [
        (adaptation, family, theta, n)
        for (adaptation, family, theta) in schemes
        for n in n_values
    ]

    def run_job(job):
        adaptation, family, theta, n = job
        cfg = SchemeConfig(
            adaptation=adaptation, family=family, theta=theta, n_steps=n, t_end=case.params.T
        )
        return temporal_error(ops, cfg, u0, u_ref)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(run_job, jobs))
    else:
        errors = [run_job(job) for job in jobs]

    rows = [
        SweepRow(case=case.name, adaptation=a, family=f, theta=t, n=n, error=err)
        for (a, f, t, n), err in zip(jobs, errors)
    ]
    csv_text = rows_to_csv(rows)
    if out is not None:
        Path(out).write_text(csv_text)
    return rows, csv_text


def check_error_monotone(errors: list[float], slack: float = 0.05) -> bool:
    """Errors should fall as N grows; tolerate one plateau bump of <= slack."""
    bumps = 0
    for prev, nxt in zip(errors, errors[1:]):
        if nxt > prev:
            if nxt > prev * (1.0 + slack):
                return False
            bumps += 1
    return bumps <= 1


def interpolate_solution(
    grid: SpatialGrid,
    params: BatesParams,
    u_final: np.ndarray,
    query_points: list[tuple[float, float]],
) -> np.ndarray:
    """Bilinear interpolation of U_N at (s, v) points inside the domain.

    The solution vector is embedded in the full grid first, with the
    time-T Dirichlet values exp(-r T) K and 0 on the s-boundaries. Queries
    that hit a node reproduce the stored value exactly.
    """
    s = grid.s_nodes
    v = grid.v_nodes
    full = np.empty((grid.m2 + 1, grid.m1 + 1))
    full[:, 1:-1] = u_final.reshape(grid.m2 + 1, grid.m1 - 1)
    full[:, 0] = params.K * np.exp(-params.r * params.T)
    full[:, -1] = 0.0

    values = np.empty(len(query_points))
    for k, (sq, vq) in enumerate(query_points):
        if not (s[0] <= sq <= s[-1]) or not (v[0] <= vq <= v[-1]):
            raise ValueError(f"query point ({sq}, {vq}) lies outside the domain")
        i = min(int(np.searchsorted(s, sq, side="right") - 1), grid.m1 - 1)
        j = min(int(np.searchsorted(v, vq, side="right") - 1), grid.m2 - 1)
        ws = (sq - s[i]) / (s[i + 1] - s[i])
        wv = (vq - v[j]) / (v[j + 1] - v[j])
        values[k] = (
            (1.0 - ws) * (1.0 - wv) * full[j, i]
            + ws * (1.0 - wv) * full[j, i + 1]
            + (1.0 - ws) * wv * full[j + 1, i]
            + ws * wv * full[j + 1, i + 1]
        )
    return values


def price(
    case: CaseConfig,
    scheme: tuple[int, str, float],
    n_steps: int,
    query_points: list[tuple[float, float]],
) -> np.ndarray:
    """Price the European put at the query points."""
    grid = build_case_grid(case)
    ops = assemble(grid, case.params)
    u0 = payoff_vector(grid, case.params)
    adaptation, family, theta = scheme
    cfg = SchemeConfig(
        adaptation=adaptation, family=family, theta=theta, n_steps=n_steps, t_end=case.params.T
    )
    result = run(ops, cfg, u0)
    return interpolate_solution(grid, case.params, result.u_final, query_points)
