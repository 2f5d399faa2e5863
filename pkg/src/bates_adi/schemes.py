"""Time stepping: three adaptations of the MCS scheme and Douglas reductions.

All three adaptations treat the mixed-derivative part and the dense jump
part explicitly, and solve two unidirectional banded systems per sweep
with matrices I - theta*dt*A1 and I - theta*dt*A2 factored once up front.
They differ in how the jump part enters:

* adaptation 1 folds it into the explicit stage values together with the
  mixed term (two dense multiplications per step),
* adaptation 2 applies an explicit trapezoidal predictor to it at the top
  of the step (two dense multiplications per step),
* adaptation 3 extrapolates it from the two previous steps in
  Adams-Bashforth fashion (one fresh dense multiplication per step; the
  lagged evaluation is cached). Its first step is taken with adaptation 1.

The Douglas ("do") family stops after the first corrector sweep and takes
U_n = Y2. Stage arithmetic is kept in the exact written order so that for
lam = 0 all three adaptations produce identical trajectories.

Every stepper also runs unchanged on 1x1 complex systems
(:class:`ScalarTestSystem`), which ties the steppers to the amplification
factors in :mod:`bates_adi.stability`.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .linalg import BandedLU, factor_banded, solve_banded
from .operators import SplitOperators

FAMILIES = ("mcs", "do")
DEFAULT_CACHE_DIR = Path(os.environ.get("BATES_ADI_CACHE_DIR", "~/.cache/bates-adi"))
REFERENCE_N_STEPS = 10_000
REFERENCE_THETA = 1.0 / 3.0


@dataclass(frozen=True)
class SchemeConfig:
    """Which stepper to run and with what step size."""

    adaptation: int
    family: str
    theta: float
    n_steps: int
    t_end: float

    def __post_init__(self):
        if self.adaptation not in (1, 2, 3):
            raise ValueError(f"adaptation must be 1, 2 or 3, got {self.adaptation}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be at least 1, got {self.n_steps}")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps


class OperatorSystem:
    """Split operators coupled with the factored implicit-stage solvers.

    A2 is solved in the i-major ordering, where it is banded with lower
    bandwidth 1 and upper bandwidth 2; the permutation is applied around
    the banded solve.
    """

    def __init__(self, ops: SplitOperators, theta: float, dt: float):
        self.ops = ops
        self.theta = theta
        self.dt = dt
        m = ops.grid.m
        eye = sparse.identity(m, format="csr")
        self._lu1: BandedLU = factor_banded(eye - theta * dt * ops.a1, 1, 1)
        perm = ops.grid.imajor_permutation()
        self._perm = perm
        self._inv_perm = np.argsort(perm)
        a2_imajor = ops.a2[perm, :][:, perm]
        self._lu2: BandedLU = factor_banded(eye - theta * dt * a2_imajor, 1, 2)

    @property
    def jump_matvec_count(self) -> int:
        return self.ops.jump_matvec_count

    def apply_a1(self, u):
        return self.ops.apply_a1(u)

    def apply_a2(self, u):
        return self.ops.apply_a2(u)

    def apply_a0d(self, u):
        return self.ops.apply_a0d(u)

    def apply_a0j(self, u):
        return self.ops.apply_a0j_matrix(u)

    def g1(self, t):
        return self.ops.g1(t)

    def g2(self, t):
        return self.ops.g2(t)

    def g0d(self, t):
        return self.ops.g0d(t)

    def g0j(self, t):
        return self.ops.g0j(t)

    def solve1(self, rhs):
        return solve_banded(self._lu1, rhs)

    def solve2(self, rhs):
        permuted = solve_banded(self._lu2, rhs[self._perm])
        return permuted[self._inv_perm]


class ScalarTestSystem:
    """1x1 complex system for checking the steppers against theory.

    The four split operators degenerate to multiplication by lam0, mu0,
    mu1, mu2 and the boundary sources vanish.
    """

    def __init__(self, lam0: complex, mu0: complex, mu1: complex, mu2: complex,
                 theta: float, dt: float):
        self.lam0 = complex(lam0)
        self.mu0 = complex(mu0)
        self.mu1 = complex(mu1)
        self.mu2 = complex(mu2)
        self.theta = theta
        self.dt = dt
        self.jump_matvec_count = 0
        self._zero = np.zeros(1, dtype=complex)
        d1 = 1.0 - theta * dt * self.mu1
        d2 = 1.0 - theta * dt * self.mu2
        if d1 == 0 or d2 == 0:
            raise ZeroDivisionError("implicit stage factor vanishes")
        self._d1 = d1
        self._d2 = d2

    def apply_a1(self, u):
        return self.mu1 * u

    def apply_a2(self, u):
        return self.mu2 * u

    def apply_a0d(self, u):
        return self.mu0 * u

    def apply_a0j(self, u):
        self.jump_matvec_count += 1
        return self.lam0 * u

    def g1(self, t):
        return self._zero

    g2 = g1
    g0d = g1
    g0j = g1

    def solve1(self, rhs):
        return rhs / self._d1

    def solve2(self, rhs):
        return rhs / self._d2


def _explicit_parts(system, u, t_prev):
    """F1, F2, F0D at (t_prev, u) plus their sum F^(D)."""
    f1 = system.apply_a1(u) + system.g1(t_prev)
    f2 = system.apply_a2(u) + system.g2(t_prev)
    f0d = system.apply_a0d(u) + system.g0d(t_prev)
    fd = f0d + f1 + f2
    return f1, f2, f0d, fd


def _implicit_sweep(system, y0, f1_prev, f2_prev, t_new, theta_dt):
    y1 = system.solve1(y0 + theta_dt * (system.g1(t_new) - f1_prev))
    y2 = system.solve2(y1 + theta_dt * (system.g2(t_new) - f2_prev))
    return y2


def step_adaptation1(system, u, t_prev, dt, theta, douglas=False):
    """One step of adaptation 1 (jump handled with the mixed term).

    Returns (U_n, F0J(t_prev, u)); the jump evaluation is reused by the
    two-step startup of adaptation 3.
    """
    t_new = t_prev + dt
    theta_dt = theta * dt
    f1_0, f2_0, f0d_0, fd_0 = _explicit_parts(system, u, t_prev)
    f0j_0 = system.apply_a0j(u) + system.g0j(t_prev)

    y0 = u + dt * (fd_0 + f0j_0)
    y2 = _implicit_sweep(system, y0, f1_0, f2_0, t_new, theta_dt)
    if douglas:
        return y2, f0j_0

    f0d_n = system.apply_a0d(y2) + system.g0d(t_new)
    f0j_n = system.apply_a0j(y2) + system.g0j(t_new)
    f1_n = system.apply_a1(y2) + system.g1(t_new)
    f2_n = system.apply_a2(y2) + system.g2(t_new)
    fd_n = f0d_n + f1_n + f2_n

    y0_hat = y0 + theta_dt * ((f0d_n - f0d_0) + (f0j_n - f0j_0))
    y0_til = y0_hat + (0.5 - theta) * dt * ((fd_n - fd_0) + (f0j_n - f0j_0))
    y2_til = _implicit_sweep(system, y0_til, f1_0, f2_0, t_new, theta_dt)
    return y2_til, f0j_0


def step_adaptation2(system, u, t_prev, dt, theta, douglas=False):
    """One step of adaptation 2 (explicit trapezoidal jump predictor)."""
    t_new = t_prev + dt
    theta_dt = theta * dt
    f1_0, f2_0, f0d_0, fd_0 = _explicit_parts(system, u, t_prev)
    f0j_0 = system.apply_a0j(u) + system.g0j(t_prev)

    x0 = u + dt * (fd_0 + f0j_0)
    f0j_x = system.apply_a0j(x0) + system.g0j(t_new)
    y0 = x0 + 0.5 * dt * (f0j_x - f0j_0)
    y2 = _implicit_sweep(system, y0, f1_0, f2_0, t_new, theta_dt)
    if douglas:
        return y2, f0j_0

    f0d_n = system.apply_a0d(y2) + system.g0d(t_new)
    f1_n = system.apply_a1(y2) + system.g1(t_new)
    f2_n = system.apply_a2(y2) + system.g2(t_new)
    fd_n = f0d_n + f1_n + f2_n

    y0_hat = y0 + theta_dt * (f0d_n - f0d_0)
    y0_til = y0_hat + (0.5 - theta) * dt * (fd_n - fd_0)
    y2_til = _implicit_sweep(system, y0_til, f1_0, f2_0, t_new, theta_dt)
    return y2_til, f0j_0


def step_adaptation3(system, u, f0j_lagged, t_prev, dt, theta, douglas=False):
    """One step of adaptation 3 (two-step Adams-Bashforth jump treatment).

    ``f0j_lagged`` must be F0J(t_{n-2}, U_{n-2}) cached from the previous
    step, so only one fresh dense multiplication happens here.
    """
    t_new = t_prev + dt
    theta_dt = theta * dt
    f1_0, f2_0, f0d_0, fd_0 = _explicit_parts(system, u, t_prev)

    x0 = u + dt * fd_0
    f0j_0 = system.apply_a0j(u) + system.g0j(t_prev)
    y0 = x0 + 1.5 * dt * f0j_0 - 0.5 * dt * f0j_lagged
    y2 = _implicit_sweep(system, y0, f1_0, f2_0, t_new, theta_dt)
    if douglas:
        return y2, f0j_0

    f0d_n = system.apply_a0d(y2) + system.g0d(t_new)
    f1_n = system.apply_a1(y2) + system.g1(t_new)
    f2_n = system.apply_a2(y2) + system.g2(t_new)
    fd_n = f0d_n + f1_n + f2_n

    y0_hat = y0 + theta_dt * (f0d_n - f0d_0)
    y0_til = y0_hat + (0.5 - theta) * dt * (fd_n - fd_0)
    y2_til = _implicit_sweep(system, y0_til, f1_0, f2_0, t_new, theta_dt)
    return y2_til, f0j_0


@dataclass
class RunResult:
    """Final state of a time-stepping run plus per-step diagnostics."""

    u_final: np.ndarray
    config: SchemeConfig
    jump_matvecs_per_step: list[int] = field(default_factory=list)


def advance(system, cfg: SchemeConfig, u0: np.ndarray) -> RunResult:
    """Drive any stepper-compatible system from U_0 to U_N.

    Adaptation 3 starts with one step of adaptation 1 (same family) and
    afterwards reuses the cached jump evaluation of the previous step.
    """
    douglas = cfg.family == "do"
    u = np.array(u0, copy=True)
    f0j_lagged: np.ndarray | None = None
    counts: list[int] = []

    for n in range(1, cfg.n_steps + 1):
        t_prev = (n - 1) * cfg.dt
        before = system.jump_matvec_count
        if cfg.adaptation == 1 or (cfg.adaptation == 3 and n == 1):
            u, f0j_lagged = step_adaptation1(system, u, t_prev, cfg.dt, cfg.theta, douglas)
        elif cfg.adaptation == 2:
            u, f0j_lagged = step_adaptation2(system, u, t_prev, cfg.dt, cfg.theta, douglas)
        else:
            u, f0j_lagged = step_adaptation3(
                system, u, f0j_lagged, t_prev, cfg.dt, cfg.theta, douglas
            )
        counts.append(system.jump_matvec_count - before)

    return RunResult(u_final=u, config=cfg, jump_matvecs_per_step=counts)


def run(ops: SplitOperators, cfg: SchemeConfig, u0: np.ndarray) -> RunResult:
    """Advance U_0 -> U_N with the configured scheme.

    The implicit-stage matrices are factored once; boundary sources are
    evaluated at the exact stage times.
    """
    if u0.shape != (ops.grid.m,):
        raise ValueError(f"u0 must have shape ({ops.grid.m},), got {u0.shape}")
    system = OperatorSystem(ops, cfg.theta, cfg.dt)
    return advance(system, cfg, np.asarray(u0, dtype=float))


def _reference_cache_key(ops: SplitOperators, n_ref: int) -> str:
    payload = {
        "params": ops.params.as_dict(),
        "n_ref": n_ref,
        "scheme": {"adaptation": 1, "family": "mcs", "theta": REFERENCE_THETA},
    }
    digest = hashlib.sha256()
    digest.update(json.dumps(payload, sort_keys=True).encode())
    digest.update(ops.grid.s_nodes.tobytes())
    digest.update(ops.grid.v_nodes.tobytes())
    return digest.hexdigest()


def reference_solution(
    ops: SplitOperators,
    u0: np.ndarray,
    n_ref: int = REFERENCE_N_STEPS,
    cache_dir: Path | str | None = None,
) -> np.ndarray:
    """High-accuracy U(T) via adaptation 1 (MCS, theta=1/3) with n_ref steps.

    Results are cached on disk as .npy vectors keyed by a content hash of
    the model parameters, the grid nodes and n_ref; a .json sidecar records
    the inputs. Delete the cache directory to force recomputation.
    """
    directory = Path(cache_dir).expanduser() if cache_dir else DEFAULT_CACHE_DIR.expanduser()
    key = _reference_cache_key(ops, n_ref)
    vec_path = directory / f"{key}.npy"
    if vec_path.exists():
        cached = np.load(vec_path)
        if cached.shape == (ops.grid.m,):
            return cached

    cfg = SchemeConfig(
        adaptation=1, family="mcs", theta=REFERENCE_THETA, n_steps=n_ref, t_end=ops.params.T
    )
    result = run(ops, cfg, u0)

    directory.mkdir(parents=True, exist_ok=True)
    np.save(vec_path, result.u_final)
    meta = {
        "params": ops.params.as_dict(),
        "m1": ops.grid.m1,
        "m2": ops.grid.m2,
        "n_ref": n_ref,
        "scheme": {"adaptation": 1, "family": "mcs", "theta": REFERENCE_THETA},
    }
    (directory / f"{key}.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return result.u_final
