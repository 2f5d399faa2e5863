"""Named benchmark parameter sets for the Bates put pricer.

Cases I-III are standard literature parameter sets; Case IV is a stress
case with a large jump load (lam*T = 50) that also violates the Feller
condition 2*kappa*eta > sigma^2, so the variance process piles up at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import BatesParams

STIFF_JUMP_THRESHOLD = 10.0

CASES: dict[str, BatesParams] = {
    "I": BatesParams(
        kappa=2.0, eta=0.04, sigma=0.25, rho=-0.5, r=0.03,
        lam=0.2, gamma=-0.5, delta=0.4, T=0.5, K=100.0,
    ),
    "II": BatesParams(
        kappa=2.0, eta=0.04, sigma=0.4, rho=-0.5, r=0.03,
        lam=5.0, gamma=-0.005, delta=0.1, T=0.5, K=100.0,
    ),
    "III": BatesParams(
        kappa=1.5, eta=0.1, sigma=0.3, rho=-0.5, r=0.05,
        lam=5.0, gamma=0.3, delta=0.1, T=1.0, K=100.0,
    ),
    "IV": BatesParams(
        kappa=2.5, eta=0.05, sigma=0.6, rho=-0.8, r=0.01,
        lam=10.0, gamma=-0.05, delta=0.01, T=5.0, K=100.0,
    ),
}


@dataclass(frozen=True)
class CaseConfig:
    """A named case (or custom parameters) plus grid and domain choices."""

    name: str
    params: BatesParams
    m1: int = 200
    m2: int = 100
    smax_mult: float = 8.0
    vmax: float = 5.0
    stretch_s: float | None = None
    stretch_v: float | None = None

    @property
    def lambda_t(self) -> float:
        return self.params.lam * self.params.T

    @property
    def stiff_jump(self) -> bool:
        return self.lambda_t > STIFF_JUMP_THRESHOLD

    @property
    def feller_violated(self) -> bool:
        return not self.params.feller_satisfied


def load_case(name: str, m1: int = 200, m2: int = 100) -> CaseConfig:
    """Look up one of the named cases."""
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; known cases: {sorted(CASES)}")
    params = CASES[name]
    if name == "IV" and params.feller_satisfied:
        raise AssertionError("case IV must violate the Feller condition")
    return CaseConfig(name=name, params=params, m1=m1, m2=m2)


def custom_case(params: BatesParams, m1: int = 200, m2: int = 100) -> CaseConfig:
    return CaseConfig(name="custom", params=params, m1=m1, m2=m2)
