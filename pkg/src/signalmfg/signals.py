"""Case-study signal model.

A jump carries a common mark e_c ~ N(0,1) that moves the stock through the
log-normal map ``eta``.  Each investor observes, with probability ``p_s``, a
categorical signal built from the perturbed mark
``z = rho * e_c + sqrt(1 - rho^2) * e_i1``: its sign plus one of the size
buckets 0.5 / 1 / inf.  This module holds the jump map, the perturbation and
classification rules, the integration intervals I(z) and I(z, e_c), and the
per-signal frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import NONE_INDEX, SIGNALS, InvestorType, MarketParams, Signal
from .quad import normal_prob, std_normal_cdf


@dataclass(frozen=True)
class JumpLaw:
    """Log-normal jump map parameters; eta(e_c) > -1 for all finite e_c."""

    kappa_hat: float
    sigma_hat: float

    @classmethod
    def from_market(cls, market: MarketParams) -> "JumpLaw":
        return cls(kappa_hat=market.kappa_hat, sigma_hat=market.sigma_hat)

    @property
    def degenerate(self) -> bool:
        """True iff the jump size is identically zero (sizeless jumps)."""
        return self.sigma_hat == 0.0 and self.kappa_hat == 0.0


def eta(law: JumpLaw, e_c):
    """Jump size exp(sigma_hat*e_c + kappa_hat - sigma_hat^2/2) - 1."""
    x = np.asarray(e_c, dtype=float)
    out = np.expm1(law.sigma_hat * x + law.kappa_hat - 0.5 * law.sigma_hat**2)
    return float(out) if np.isscalar(e_c) else out


def perturb(rho: float, e_c, e_i1):
    """Perturbed jump mark rho*e_c + sqrt(1-rho^2)*e_i1; needs |rho| < 1."""
    if not abs(rho) < 1.0:
        raise ValueError(f"signal quality must satisfy |rho| < 1, got {rho}")
    return rho * np.asarray(e_c, dtype=float) + math.sqrt(1.0 - rho * rho) * np.asarray(e_i1, dtype=float)


def classify(z_perturbed: float, received: bool) -> Signal:
    """Signal label for a perturbed mark; no signal when not received.

    Ties at |z| = 0.5 and |z| = 1 go to the inner bucket; z = 0 carries no
    directional information and maps to the no-signal label.
    """
    return SIGNALS[int(classify_index(z_perturbed, received))]


def classify_index(z_perturbed, received):
    """Vectorized ``classify`` returning indices into ``SIGNALS``."""
    z = np.asarray(z_perturbed, dtype=float)
    got = np.asarray(received, dtype=bool)
    mag = np.abs(z)
    bucket = np.where(mag <= 0.5, 1, np.where(mag <= 1.0, 2, 3))
    idx = np.where(got & (z > 0), NONE_INDEX + bucket, NONE_INDEX)
    idx = np.where(got & (z < 0), NONE_INDEX - bucket, idx)
    return idx


@dataclass(frozen=True)
class SignalInterval:
    """Interval of the real line with optionally unbounded, open/closed ends.

    ``None`` endpoints tag +-infinity, so no floating-point infinities enter
    quadrature arithmetic.
    """

    lo: float | None
    hi: float | None
    lo_open: bool = True
    hi_open: bool = False

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError(f"interval has lo={self.lo} > hi={self.hi}")

    def contains(self, x: float) -> bool:
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return True


# I(z): where the perturbed mark must fall to produce signal z.  The six
# intervals partition R \ {0}; boundary points follow the half-open
# convention of the classification rule.
_PLAIN_INTERVALS = {
    Signal.POS_INF: SignalInterval(1.0, None, lo_open=True),
    Signal.POS_ONE: SignalInterval(0.5, 1.0, lo_open=True, hi_open=False),
    Signal.POS_HALF: SignalInterval(0.0, 0.5, lo_open=True, hi_open=False),
    Signal.NEG_HALF: SignalInterval(-0.5, 0.0, lo_open=False, hi_open=True),
    Signal.NEG_ONE: SignalInterval(-1.0, -0.5, lo_open=False, hi_open=True),
    Signal.NEG_INF: SignalInterval(None, -1.0, hi_open=True),
}


def signal_interval(z: Signal) -> SignalInterval:
    """The interval I(z) of perturbed marks producing the nonzero signal z."""
    if z is Signal.NONE:
        raise ValueError("no integration interval is defined for the null signal")
    return _PLAIN_INTERVALS[z]


def _conditional_bounds(z: Signal, e_c, rho: float):
    """Endpoints of I(z, e_c) as arrays (None = unbounded side)."""
    if z is Signal.NONE:
        raise ValueError("no conditional interval is defined for the null signal")
    if not abs(rho) < 1.0:
        raise ValueError(f"signal quality must satisfy |rho| < 1, got {rho}")
    iv = _PLAIN_INTERVALS[z]
    scale = math.sqrt(1.0 - rho * rho)
    shift = rho * np.asarray(e_c, dtype=float)
    lo = None if iv.lo is None else (iv.lo - shift) / scale
    hi = None if iv.hi is None else (iv.hi - shift) / scale
    return lo, hi, iv


def conditional_interval(z: Signal, e_c: float, rho: float) -> SignalInterval:
    """I(z, e_c): idiosyncratic noise values e_i1 compatible with signal z.

    The affine map z = rho*e_c + sqrt(1-rho^2)*e_i1 is increasing in e_i1, so
    the endpoint conventions of I(z) carry over unchanged.
    """
    lo, hi, iv = _conditional_bounds(z, float(e_c), rho)
    return SignalInterval(
        lo if lo is None else float(lo),
        hi if hi is None else float(hi),
        lo_open=iv.lo_open,
        hi_open=iv.hi_open,
    )


def conditional_prob(z: Signal, e_c, rho: float):
    """N(0,1) probability of I(z, e_c); vectorized over ``e_c``."""
    lo, hi, _ = _conditional_bounds(z, e_c, rho)
    upper = 1.0 if hi is None else std_normal_cdf(hi)
    lower = 0.0 if lo is None else std_normal_cdf(lo)
    return upper - lower


def signal_frequency(inv_type: InvestorType, z: Signal) -> float:
    """Rate lam * p_s * N01(I(z)) at which the type receives signal z != 0."""
    return inv_type.market.lam * inv_type.p_s * normal_prob(signal_interval(z))
