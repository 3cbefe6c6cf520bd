"""Closed-form value constants, value functions, and certainty equivalents.

The per-type constant M is the exponent of the closed-form value
``u(x0 * xbar0^-theta) * exp(T (1-alpha) ((1-theta) r + M))``.  Its jump terms
are exactly the best-response targets, so M can be evaluated either at a
supplied strategy's positions or with internal re-maximization; at a fixed
point the two coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .meanfield import MeanFieldStats
from .model import (
    NONE_INDEX,
    NONZERO_SIGNALS,
    SIGNAL_INDEX,
    SIGNALS,
    InvestorType,
    Signal,
    Strategy,
    admissible_interval,
)
from .quad import Quadrature
from .response import (
    DEFAULT_OPT_TOL,
    TargetContext,
    context_from_stats,
    maximize_concave_1d,
    nagent_target_context,
    relative_utility,
    signal_jump_term,
    target_no_signal,
    target_signal,
)


@dataclass(frozen=True)
class ValueReport:
    """Value constant and value of one type at horizon T."""

    M: float
    value: float
    T: float


def _row_positions(row) -> np.ndarray | None:
    if row is None:
        return None
    if isinstance(row, Mapping):
        return np.array([row[s] for s in SIGNALS], dtype=float)
    arr = np.asarray(row, dtype=float)
    if arr.shape != (len(SIGNALS),):
        raise ValueError(f"strategy row must have {len(SIGNALS)} entries, got shape {arr.shape}")
    return arr


def _value_constant(ctx: TargetContext, row, opt_tol: float) -> float:
    """Shared M assembly for both game modes.

    M = theta*(r - taupi_env) + 0.5*theta^2*(1-alpha)*(sigma0pi_env^2 +
    sig2pi2_env) + no-signal term + lam*p_s * sum_z unnormalized signal terms.
    The signal sums carry their N01(I(z, e_c)) weights directly, which equals
    the mu(z)-weighted conditional suprema for the Gaussian mark law and stays
    exact for discrete mark laws.
    """
    t = ctx.investor
    m = t.market
    positions = _row_positions(row)
    out = t.theta * (m.r - ctx.taupi_env)
    out += 0.5 * t.theta**2 * (1.0 - t.alpha) * (ctx.sigma0pi_env**2 + ctx.sig2pi2_env)

    if positions is None:
        phi0, v0 = maximize_concave_1d(
            lambda x: target_no_signal(x, ctx), admissible_interval(t, Signal.NONE), opt_tol
        )
    else:
        phi0 = float(positions[NONE_INDEX])
        v0 = target_no_signal(phi0, ctx)
    out += v0

    if m.lam > 0.0 and t.p_s > 0.0:
        for z in NONZERO_SIGNALS:
            if positions is None:
                if ctx.jumps_degenerate:
                    phi_z = phi0
                else:
                    phi_z, _ = maximize_concave_1d(
                        lambda x: target_signal(x, z, ctx), admissible_interval(t, z), opt_tol
                    )
            else:
                phi_z = float(positions[SIGNAL_INDEX[z]])
            out += m.lam * t.p_s * signal_jump_term(phi_z, z, ctx)
    return float(out)


def M_mf(
    inv_type: InvestorType,
    row,
    stats: MeanFieldStats,
    q: Quadrature,
    opt_tol: float = DEFAULT_OPT_TOL,
) -> float:
    """Mean-field value constant of ``inv_type`` in the environment ``stats``.

    ``row`` holds the type's own positions (sequence in ``SIGNALS`` order or a
    Signal-keyed mapping); pass ``None`` to re-maximize each signal target.
    """
    ctx = context_from_stats(inv_type, stats, q)
    return _value_constant(ctx, row, opt_tol)


def value_mf(inv_type: InvestorType, M: float, x0: float, xbar0: float, T: float) -> float:
    """Closed-form value u(x0 * xbar0^-theta) * exp(T (1-alpha) ((1-theta) r + M))."""
    if not (x0 > 0 and xbar0 > 0):
        raise ValueError("initial wealths must be positive")
    t = inv_type
    base = relative_utility(x0, xbar0, t.alpha, t.theta)
    return float(base * np.exp(T * (1.0 - t.alpha) * ((1.0 - t.theta) * t.market.r + M)))


def M_nagent(
    i: int,
    types: Sequence[InvestorType],
    strategies: Strategy,
    q: Quadrature,
    opt_tol: float = DEFAULT_OPT_TOL,
) -> float:
    """n-agent value constant for player ``i`` at the supplied strategies."""
    ctx = nagent_target_context(i, types, strategies, q)
    return _value_constant(ctx, strategies.row(i), opt_tol)


def certainty_equivalent(M_alt: float, M_ref: float) -> float:
    """Initial capital ratio exp(M_alt - M_ref) equalizing expected utilities."""
    return float(np.exp(M_alt - M_ref))


def value_report(
    inv_type: InvestorType,
    row,
    stats: MeanFieldStats,
    q: Quadrature,
    T: float,
    opt_tol: float = DEFAULT_OPT_TOL,
) -> ValueReport:
    M = M_mf(inv_type, row, stats, q, opt_tol)
    return ValueReport(M=M, value=value_mf(inv_type, M, inv_type.x0, stats.xbar0, T), T=T)
