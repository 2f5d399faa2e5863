"""Model and contract parameters for the Bates jump-diffusion pricer."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class BatesParams:
    """Parameters of the Bates model and the European put contract.

    The variance follows a CIR process with mean-reversion rate ``kappa``
    toward level ``eta`` and vol-of-variance ``sigma``; ``rho`` correlates
    the price and variance Brownian motions. Jumps arrive with intensity
    ``lam`` and multiply the price by a log-normal factor whose log has
    mean ``gamma`` and standard deviation ``delta``. ``r`` is the risk-free
    rate, ``T`` the maturity and ``K`` the strike.
    """

    kappa: float
    eta: float
    sigma: float
    rho: float
    r: float
    lam: float
    gamma: float
    delta: float
    T: float
    K: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.r < 0:
            raise ValueError(f"r must be nonnegative, got {self.r}")
        # lam == 0 is the jump-free degenerate case; the operators and the
        # time steppers must all collapse cleanly there, so it is allowed.
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.K <= 0:
            raise ValueError(f"K must be positive, got {self.K}")

    @property
    def eps(self) -> float:
        """Mean relative jump size, exp(gamma + delta^2/2) - 1.

        Always recomputed from gamma and delta so it cannot drift out of
        sync with them.
        """
        return math.exp(self.gamma + 0.5 * self.delta**2) - 1.0

    @property
    def feller_satisfied(self) -> bool:
        """Whether 2*kappa*eta > sigma^2 (variance stays away from zero)."""
        return 2.0 * self.kappa * self.eta > self.sigma**2

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
