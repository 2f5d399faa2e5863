"""Amplification factors of the three ADI adaptations and their theory.

Applying one time step of each adaptation to the scalar test equation
u' = (lam0 + mu0 + mu1 + mu2) u  gives, with w0 = lam0*dt and zj = mu_j*dt,

* adaptation 1:  U_n = R(w0, z0, z1, z2) U_{n-1}
* adaptation 2:  U_n = S(w0, z0, z1, z2) U_{n-1}
* adaptation 3:  U_n = T1(...) U_{n-1} + T0(...) U_{n-2}

with rational functions evaluated here. The module also hosts the nested
eigenvalue-domain conditions (cond1/cond2/cond3/cond5), the Schur root
test for the two-step recurrence, structured random samplers over the
condition sets, and `verify_theorem`, which checks the proved stability
bounds (and reproduces the proved counterexamples) by sampling.

All evaluators broadcast over numpy arrays.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

VIOLATION_TOL = 1e-12
THETA_MIN_ADAPT2 = math.sqrt(2.0) / 2.0
THETA_MIN_ADAPT3 = (9.0 + math.sqrt(33.0)) / 16.0


@dataclass(frozen=True)
class StabilityPoint:
    """A quadruple of scaled eigenvalues (w0 = lam0*dt, zj = mu_j*dt)."""

    w0: complex
    z0: complex
    z1: complex
    z2: complex

    @property
    def z(self) -> complex:
        return self.w0 + self.z0 + self.z1 + self.z2

    def p(self, theta: float) -> complex:
        return (1.0 - theta * self.z1) * (1.0 - theta * self.z2)

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.w0, self.z0, self.z1, self.z2)


def _check_pole(p) -> None:
    if np.any(p == 0):
        raise ZeroDivisionError("stability function pole: (1-theta z1)(1-theta z2) = 0")


def eval_R(w0, z0, z1, z2, theta: float):
    """One-step amplification factor of adaptation 1."""
    p = (1.0 - theta * z1) * (1.0 - theta * z2)
    _check_pole(p)
    z = w0 + z0 + z1 + z2
    return 1.0 + z / p + theta * (w0 + z0) * z / p**2 + (0.5 - theta) * z**2 / p**2


def eval_S(w0, z0, z1, z2, theta: float):
    """One-step amplification factor of adaptation 2."""
    p = (1.0 - theta * z1) * (1.0 - theta * z2)
    _check_pole(p)
    z = w0 + z0 + z1 + z2
    inner = z / p + theta * z0 * z / p**2 + (0.5 - theta) * (z0 + z1 + z2) * z / p**2
    return 1.0 + (1.0 + 0.5 * w0) * inner


def eval_Q(z0, z1, z2, theta: float):
    """Shared rational kernel of the two-step coefficients."""
    p = (1.0 - theta * z1) * (1.0 - theta * z2)
    _check_pole(p)
    return 1.0 / p + theta * z0 / p**2 + (0.5 - theta) * (z0 + z1 + z2) / p**2


def eval_T(w0, z0, z1, z2, theta: float):
    """Two-step recurrence coefficients (T1, T0) of adaptation 3."""
    q = eval_Q(z0, z1, z2, theta)
    z = w0 + z0 + z1 + z2
    t1 = 1.0 + (z + 0.5 * w0) * q
    t0 = -0.5 * w0 * q
    return t1, t0


# ---------------------------------------------------------------------------
# condition sets
# ---------------------------------------------------------------------------

def _cond_core(z0, za, zb):
    """|z0| <= 2 sqrt(Re za * Re zb) with Re za <= 0, Re zb <= 0."""
    ra, rb = np.real(za), np.real(zb)
    ok_sign = (ra <= 0) & (rb <= 0)
    return ok_sign & (np.abs(z0) ** 2 <= 4.0 * ra * rb)


def cond1(z0, z1_tilde, z2_tilde):
    """Mixed-derivative condition on the pre-shift eigenvalues."""
    return _cond_core(z0, z1_tilde, z2_tilde)


def cond2(w0, z0, z1, z2):
    """|z0|+|w0| <= 2 sqrt(Re z1 Re z2), Re zj <= -|w0|/2."""
    r1, r2 = np.real(z1), np.real(z2)
    half_w = 0.5 * np.abs(w0)
    ok_sign = (r1 <= -half_w) & (r2 <= -half_w)
    return ok_sign & ((np.abs(z0) + np.abs(w0)) ** 2 <= 4.0 * r1 * r2)


def cond3(w0, z0, z1, z2):
    """cond1 with the jump eigenvalue folded into z0 (z0 + w0)."""
    return _cond_core(z0 + w0, z1, z2)


def cond5(z0, z1, z2):
    """cond1 posed on the post-shift eigenvalues; used for the Q bound."""
    return _cond_core(z0, z1, z2)


def cond_membership(
    pt: StabilityPoint,
    which: str,
    aux: tuple[complex, complex] | None = None,
):
    """Exact membership of a point in one of the condition sets.

    ``cond1`` concerns the pre-shift eigenvalues, which the test-equation
    point does not carry, so they must be supplied through ``aux``.
    """
    if which == "cond1":
        if aux is None:
            raise ValueError("cond1 requires the pre-shift pair (z1_tilde, z2_tilde)")
        return bool(cond1(pt.z0, aux[0], aux[1]))
    if which == "cond2":
        return bool(cond2(pt.w0, pt.z0, pt.z1, pt.z2))
    if which == "cond3":
        return bool(cond3(pt.w0, pt.z0, pt.z1, pt.z2))
    if which == "cond5":
        return bool(cond5(pt.z0, pt.z1, pt.z2))
    raise ValueError(f"unknown condition {which!r}")


# ---------------------------------------------------------------------------
# Schur / root condition for the two-step recurrence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootReport:
    """Roots of zeta^2 - t1 zeta - t0 and the root-condition verdict."""

    roots: tuple[complex, complex]
    moduli: tuple[float, float]
    all_moduli_at_most_one: bool
    unit_roots_simple: bool
    stable: bool
    schur_inequalities: bool | None  # real-coefficient criterion, if applicable


def _quadratic_roots(t1, t0):
    """Roots of zeta^2 - t1 zeta - t0 via the stable quadratic formula."""
    t1 = complex(t1)
    t0 = complex(t0)
    disc = np.sqrt(complex(t1 * t1 + 4.0 * t0))
    # pick the branch that avoids cancellation in t1 + disc
    if (t1.conjugate() * disc).real < 0:
        disc = -disc
    big = 0.5 * (t1 + disc)
    if big == 0:
        return 0.0 + 0.0j, 0.0 + 0.0j
    return big, -t0 / big


def schur_stable(t1, t0, tol: float = 0.0, multiple_root_tol: float = 1e-12) -> RootReport:
    """Root condition for the recurrence u_n = t1 u_{n-1} + t0 u_{n-2}.

    Stable iff both roots have modulus at most one (within ``tol``) and any
    root of modulus one is simple. For real coefficients the algebraic
    criterion |t0| <= 1 and t0 + |t1| <= 1 is evaluated as well.
    """
    r1, r2 = _quadratic_roots(t1, t0)
    m1, m2 = abs(r1), abs(r2)
    within = (m1 <= 1.0 + tol) and (m2 <= 1.0 + tol)
    double_unit = abs(r1 - r2) <= multiple_root_tol and abs(m1 - 1.0) <= max(tol, multiple_root_tol)
    simple = not double_unit
    schur = None
    if complex(t1).imag == 0.0 and complex(t0).imag == 0.0:
        t1_r, t0_r = float(np.real(t1)), float(np.real(t0))
        schur = (abs(t0_r) <= 1.0 + tol) and (t0_r + abs(t1_r) <= 1.0 + tol)
    return RootReport(
        roots=(r1, r2),
        moduli=(m1, m2),
        all_moduli_at_most_one=within,
        unit_roots_simple=simple,
        stable=within and simple,
        schur_inequalities=schur,
    )


def root_moduli_max(t1, t0):
    """Vectorized max root modulus of zeta^2 - t1 zeta - t0."""
    t1 = np.asarray(t1, dtype=complex)
    t0 = np.asarray(t0, dtype=complex)
    disc = np.sqrt(t1 * t1 + 4.0 * t0)
    sign = np.where((np.conj(t1) * disc).real < 0, -1.0, 1.0)
    disc = disc * sign
    big = 0.5 * (t1 + disc)
    small = np.where(big != 0, -t0 / np.where(big != 0, big, 1.0), 0.0)
    return np.maximum(np.abs(big), np.abs(small))


# ---------------------------------------------------------------------------
# samplers over the condition sets
# ---------------------------------------------------------------------------

def _log_uniform(rng: np.random.Generator, n: int, lo: float = 1e-3, hi: float = 1e3):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))


def _with_phase(rng: np.random.Generator, magnitude: np.ndarray, complex_values: bool):
    if complex_values:
        return magnitude * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=len(magnitude)))
    return magnitude * rng.choice((-1.0, 1.0), size=len(magnitude))


def sample_cond2(
    rng: np.random.Generator,
    n: int,
    complex_values: bool = False,
    w0_nonnegative: bool = False,
):
    """Random quadruples satisfying cond2.

    Re z1, Re z2 are log-uniform in magnitude over [1e-3, 1e3] (negative),
    imaginary parts uniform within 3x the real part in magnitude for the
    complex variant; |z0| is drawn inside the budget 2 sqrt(Re z1 Re z2)
    and |w0| inside what cond2 leaves over.
    """
    re1 = -_log_uniform(rng, n)
    re2 = -_log_uniform(rng, n)
    if complex_values:
        z1 = re1 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re1)
        z2 = re2 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re2)
    else:
        z1 = re1.astype(complex)
        z2 = re2.astype(complex)
    cap = 2.0 * np.sqrt(re1 * re2)
    z0_mag = rng.uniform(0.0, 1.0, n) * cap
    z0 = _with_phase(rng, z0_mag, complex_values)
    w_budget = np.minimum(cap - z0_mag, 2.0 * np.minimum(-re1, -re2))
    w0_mag = rng.uniform(0.0, 1.0, n) * w_budget
    if w0_nonnegative:
        w0 = w0_mag.astype(complex)
    else:
        w0 = _with_phase(rng, w0_mag, complex_values)
    return w0, z0, z1, z2


def sample_cond5(rng: np.random.Generator, n: int, complex_values: bool = False):
    """Random triples satisfying cond5."""
    re1 = -_log_uniform(rng, n)
    re2 = -_log_uniform(rng, n)
    if complex_values:
        z1 = re1 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re1)
        z2 = re2 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re2)
    else:
        z1 = re1.astype(complex)
        z2 = re2.astype(complex)
    cap = 2.0 * np.sqrt(re1 * re2)
    z0 = _with_phase(rng, rng.uniform(0.0, 1.0, n) * cap, complex_values)
    return z0, z1, z2


def sample_cond1_mapped(rng: np.random.Generator, n: int):
    """Draws satisfying cond1 with |nu| <= 1, mapped to test-equation points.

    Returns (w0, z0, z1, z2) built as w0 = x*nu, zj = zj_tilde - y/2 with
    x = lam*dt <= y = (r+lam)*dt, plus the generating pre-shift pair.
    """
    re1 = -_log_uniform(rng, n)
    re2 = -_log_uniform(rng, n)
    z1t = re1 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re1)
    z2t = re2 + 1j * rng.uniform(-3.0, 3.0, n) * np.abs(re2)
    cap = 2.0 * np.sqrt(re1 * re2)
    z0 = _with_phase(rng, rng.uniform(0.0, 1.0, n) * cap, True)
    nu = _with_phase(rng, rng.uniform(0.0, 1.0, n), True)
    y = _log_uniform(rng, n)
    x = rng.uniform(0.0, 1.0, n) * y
    w0 = x * nu
    z1 = z1t - 0.5 * y
    z2 = z2t - 0.5 * y
    return w0, z0, z1, z2, z1t, z2t


# ---------------------------------------------------------------------------
# theorem verification
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    """Outcome of one sampled stability-theory check."""

    theorem: str
    theta: float
    samples: int
    seed: int
    passed: bool
    max_abs: float | None = None
    bound: float | None = None
    witness: dict | None = None
    details: dict = field(default_factory=dict)
    shard_maxima: list[float] = field(default_factory=list)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"theorem: {self.theorem}\n")
        out.write(f"theta: {self.theta!r}\n")
        out.write(f"samples: {self.samples}\n")
        out.write(f"seed: {self.seed}\n")
        out.write(f"passed: {self.passed}\n")
        if self.max_abs is not None:
            out.write(f"max_abs: {self.max_abs!r}\n")
        if self.bound is not None:
            out.write(f"bound: {self.bound!r}\n")
        if self.witness is not None:
            for key, val in self.witness.items():
                out.write(f"witness.{key}: {val!r}\n")
        for key, val in self.details.items():
            out.write(f"detail.{key}: {val!r}\n")
        return out.getvalue()

    def shard_csv(self) -> str:
        lines = ["shard,max_abs"]
        lines += [f"{k},{v!r}" for k, v in enumerate(self.shard_maxima)]
        return "\n".join(lines) + "\n"


THEOREM_IDS = (
    "T1a",
    "T1b",
    "T2a",
    "T2b_neg",
    "T3a",
    "T3b",
    "L1",
    "L2",
    "Thm2b",
    "Thm3b",
)

_SHARDS = 8


def _sharded(n: int) -> Iterable[int]:
    base = n // _SHARDS
    sizes = [base] * _SHARDS
    sizes[-1] += n - base * _SHARDS
    return [s for s in sizes if s > 0]


def theorem2_construction_S(x, xi, theta: float):
    """Closed form of S on the proof family w0=x, z0=0, z1=-x/2-xi, z2=-x/2."""
    p = (1.0 + 0.5 * theta * x + theta * xi) * (1.0 + 0.5 * theta * x)
    factor = (1.0 + 0.5 * x) * xi / p
    return 1.0 - factor * (1.0 - (0.5 - theta) * (x + xi) / p)


def _companion_power_max_norm(t1: np.ndarray, t0: np.ndarray, n_power: int) -> np.ndarray:
    """Max-norm of the n-th power of the 2x2 companion matrices.

    Iterates M <- M @ C batched over the samples; 2x2 products are written
    out explicitly to keep it vectorized.
    """
    a, b = t1.astype(complex), t0.astype(complex)
    # companion C = [[t1, t0], [1, 0]]; M starts at C
    m11, m12, m21, m22 = a.copy(), b.copy(), np.ones_like(a), np.zeros_like(a)
    for _ in range(n_power - 1):
        n11 = m11 * a + m12
        n12 = m11 * b
        n21 = m21 * a + m22
        n22 = m21 * b
        m11, m12, m21, m22 = n11, n12, n21, n22
    row1 = np.abs(m11) + np.abs(m12)
    row2 = np.abs(m21) + np.abs(m22)
    return np.maximum(row1, row2)


def verify_theorem(
    theorem: str,
    theta: float,
    samples: int = 1_000_000,
    seed: int = 0,
) -> VerificationReport:
    """Check one of the proved stability results by structured sampling.

    Positive statements must show no violation beyond ``1e-12``; the
    negative statements must exhibit an explicit violating point, which is
    recorded in the report.
    """
    if theorem not in THEOREM_IDS:
        raise ValueError(f"unknown theorem id {theorem!r}; expected one of {THEOREM_IDS}")
    rng = np.random.default_rng(seed)
    report = VerificationReport(theorem=theorem, theta=theta, samples=samples, seed=seed, passed=False)

    if theorem in ("T1a", "T1b"):
        complex_values = theorem == "T1b"
        worst = 0.0
        worst_pt = None
        for size in _sharded(samples):
            w0, z0, z1, z2 = sample_cond2(rng, size, complex_values=complex_values)
            vals = np.abs(eval_R(w0, z0, z1, z2, theta))
            k = int(np.argmax(vals))
            report.shard_maxima.append(float(vals[k]))
            if vals[k] > worst:
                worst = float(vals[k])
                worst_pt = (w0[k], z0[k], z1[k], z2[k])
        report.max_abs = worst
        report.bound = 1.0 + VIOLATION_TOL
        report.passed = worst <= report.bound
        if not report.passed and worst_pt is not None:
            report.witness = dict(zip(("w0", "z0", "z1", "z2"), worst_pt))
        return report

    if theorem == "T2a":
        # closed form of the proof family, then the successive-limit value
        xs = np.array([1.0, 10.0, 100.0])
        grid_x, grid_xi = np.meshgrid(xs, xs)
        s_direct = eval_S(grid_x, 0.0, -0.5 * grid_x - grid_xi, -0.5 * grid_x, theta)
        s_formula = theorem2_construction_S(grid_x, grid_xi, theta)
        closed_form_err = float(np.max(np.abs(s_direct - s_formula)))
        # the limit is taken first in xi, then in x: realize it with xi = x^2
        x_lim = 1e8
        s_lim = complex(eval_S(x_lim, 0.0, -0.5 * x_lim - x_lim**2, -0.5 * x_lim, theta)).real
        expected = 1.0 - 1.0 / theta**2
        report.details["closed_form_max_err"] = closed_form_err
        report.details["limit_observed"] = s_lim
        report.details["limit_expected"] = expected
        report.details["theta_min"] = THETA_MIN_ADAPT2
        # witness search for |S| > 1 along the family (exists iff theta < sqrt(2)/2)
        witness = None
        for x in (1e2, 1e4, 1e6):
            s_val = complex(eval_S(x, 0.0, -0.5 * x - x**2, -0.5 * x, theta))
            if abs(s_val) > 1.0:
                witness = {"w0": x, "z0": 0.0, "z1": -0.5 * x - x**2, "z2": -0.5 * x, "S": s_val}
                break
        report.witness = witness
        report.max_abs = abs(s_lim)
        report.passed = closed_form_err <= 1e-12 and abs(s_lim - expected) <= 1e-3
        return report

    if theorem == "T2b_neg":
        # w0 = -x makes |S| approach 1 + 1/theta^2 > 1 for every theta
        x = 1e6
        xi = x**2
        s_val = complex(eval_S(-x, 0.0, -0.5 * x - xi, -0.5 * x, theta))
        point = {"w0": -x, "z0": 0.0, "z1": -0.5 * x - xi, "z2": -0.5 * x}
        in_cond2 = bool(cond2(-x, 0.0, point["z1"], point["z2"]))
        report.details["approach_value"] = 1.0 + 1.0 / theta**2
        report.max_abs = abs(s_val)
        report.witness = {**point, "S": s_val, "in_cond2": in_cond2}
        report.passed = in_cond2 and abs(s_val) > 1.0 and abs(abs(s_val) - (1.0 + 1.0 / theta**2)) <= 1e-3
        return report

    if theorem == "T3a":
        worst = 0.0
        worst_pt = None
        schur_ok = True
        for size in _sharded(samples):
            w0, z0, z1, z2 = sample_cond2(rng, size, complex_values=False, w0_nonnegative=True)
            t1, t0 = eval_T(w0.real, z0.real, z1.real, z2.real, theta)
            moduli = root_moduli_max(t1, t0)
            k = int(np.argmax(moduli))
            report.shard_maxima.append(float(moduli[k]))
            schur_here = (np.abs(t0) <= 1.0 + VIOLATION_TOL) & (t0 + np.abs(t1) <= 1.0 + VIOLATION_TOL)
            if not np.all(schur_here):
                schur_ok = False
            if moduli[k] > worst:
                worst = float(moduli[k])
                worst_pt = (w0[k], z0[k], z1[k], z2[k])
        report.max_abs = worst
        report.bound = 1.0 + VIOLATION_TOL
        report.details["schur_inequalities_hold"] = schur_ok
        report.passed = worst <= report.bound and schur_ok
        if not report.passed and worst_pt is not None:
            report.witness = dict(zip(("w0", "z0", "z1", "z2"), worst_pt))
        return report

    if theorem == "T3b":
        # proof point w0 = -2/theta, z0 = 0, z1 = z2 = -1/theta: the Schur
        # necessary condition T0 - T1 <= 1 fails iff theta < (9+sqrt(33))/16
        w0 = -2.0 / theta
        z1 = -1.0 / theta
        t1, t0 = eval_T(w0, 0.0, z1, z1, theta)
        value = float((t0 - t1).real)
        r0 = complex(eval_R(0.0, 0.0, z1, z1, theta)).real
        violates = value > 1.0
        should_violate = theta < THETA_MIN_ADAPT3
        report.details["t0_minus_t1"] = value
        report.details["r0"] = r0
        report.details["theta_min"] = THETA_MIN_ADAPT3
        report.witness = {"w0": w0, "z0": 0.0, "z1": z1, "z2": z1, "t1": complex(t1), "t0": complex(t0)}
        report.max_abs = value
        report.passed = violates == should_violate
        return report

    if theorem == "L1":
        violations = 0
        worst_pt = None
        for size in _sharded(samples):
            w0, z0, z1, z2, z1t, z2t = sample_cond1_mapped(rng, size)
            ok = cond2(w0, z0, z1, z2)
            bad = int(np.size(ok) - np.count_nonzero(ok))
            if bad and worst_pt is None:
                k = int(np.argmin(ok))
                worst_pt = dict(
                    w0=w0[k], z0=z0[k], z1=z1[k], z2=z2[k], z1_tilde=z1t[k], z2_tilde=z2t[k]
                )
            violations += bad
            report.shard_maxima.append(float(bad))
        report.details["violations"] = violations
        report.passed = violations == 0
        report.witness = worst_pt
        return report

    if theorem == "L2":
        bound = max(1.0 / theta, 2.0)
        worst = 0.0
        worst_pt = None
        for size in _sharded(samples):
            z0, z1, z2 = sample_cond5(rng, size, complex_values=True)
            vals = np.abs(eval_Q(z0, z1, z2, theta))
            k = int(np.argmax(vals))
            report.shard_maxima.append(float(vals[k]))
            if vals[k] > worst:
                worst = float(vals[k])
                worst_pt = (z0[k], z1[k], z2[k])
        report.max_abs = worst
        report.bound = bound + VIOLATION_TOL
        report.passed = worst <= report.bound
        if not report.passed and worst_pt is not None:
            report.witness = dict(zip(("z0", "z1", "z2"), worst_pt))
        return report

    if theorem in ("Thm2b", "Thm3b"):
        lam_dt = 0.01
        n_power = 500
        big_l = max(1.0 / theta, 2.0)
        complex_values = theta >= 0.5
        rate = (1.0 + big_l) if theorem == "Thm2b" else 2.0 * big_l
        bound = math.exp(rate * lam_dt * n_power)
        worst = 0.0
        for size in _sharded(samples):
            z0, z1, z2 = sample_cond5(rng, size, complex_values=complex_values)
            w0 = _with_phase(rng, rng.uniform(0.0, 1.0, size) * lam_dt, True)
            if theorem == "Thm2b":
                vals = np.abs(eval_S(w0, z0, z1, z2, theta)) ** n_power
            else:
                t1, t0 = eval_T(w0, z0, z1, z2, theta)
                vals = _companion_power_max_norm(t1, t0, n_power)
            shard_max = float(np.max(vals))
            report.shard_maxima.append(shard_max)
            worst = max(worst, shard_max)
        report.max_abs = worst
        report.bound = bound
        report.details["lam_dt"] = lam_dt
        report.details["n_power"] = n_power
        report.details["L"] = big_l
        report.passed = worst <= bound
        return report

    raise AssertionError("unreachable")
