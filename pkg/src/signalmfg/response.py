"""Best-response target functions and the one-dimensional concave maximizer.

Targets come in two flavors sharing one code path: mean-field mode, where the
environment is a ``MeanFieldStats``, and n-agent mode, where it is built from
the other players' explicit strategies.  Each target is strictly concave on
its admissible interval whenever jumps are live, so a golden-section search
with one parabolic refinement recovers the unique maximizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .meanfield import MeanFieldStats, aggregate
from .model import (
    NONE_INDEX,
    NONZERO_SIGNALS,
    SIGNAL_INDEX,
    SIGNALS,
    AdmissibleInterval,
    InvestorType,
    Population,
    Signal,
    Strategy,
    admissible_interval,
)
from .quad import Quadrature, normal_prob
from .signals import JumpLaw, conditional_prob, eta, signal_interval

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_OPT_TOL = 1e-10


def relative_utility(x, xbar, alpha: float, theta: float):
    """CRRA utility of wealth relative to the peer average: u((x * xbar^-theta))."""
    return (x * xbar ** (-theta)) ** (1.0 - alpha) / (1.0 - alpha)


@dataclass(frozen=True)
class TargetContext:
    """Everything a type's targets need, precomputed on the quadrature grid.

    ``env_jump_pow`` is the environment's jump factor already raised to
    -theta*(1-alpha) (mean-field mode: the mean-jump function; n-agent mode:
    the expected peer product, which keeps the per-peer signal mixture intact
    rather than collapsing it to a geometric mean).  ``post_weights[z]`` holds
    N01(I(z, e_c)) per node and ``post_mass[z]`` the unconditional N01(I(z)).
    """

    investor: InvestorType
    quad: Quadrature
    mode: str  # "mf" or "nagent"
    sigma0pi_env: float
    taupi_env: float
    sig2pi2_env: float
    eta_nodes: np.ndarray = field(repr=False)
    env_jump_pow: np.ndarray = field(repr=False)
    post_weights: Mapping[Signal, np.ndarray] = field(repr=False)
    post_mass: Mapping[Signal, float] = field(repr=False)
    jumps_degenerate: bool = False

    def __post_init__(self):
        if self.mode not in ("mf", "nagent"):
            raise ValueError(f"unknown target mode {self.mode!r}")


def _posterior_tables(inv_type: InvestorType, q: Quadrature):
    post_w = {z: conditional_prob(z, q.nodes, inv_type.rho) for z in NONZERO_SIGNALS}
    post_m = {z: normal_prob(signal_interval(z)) for z in NONZERO_SIGNALS}
    return post_w, post_m


def mf_target_context(
    inv_type: InvestorType,
    q: Quadrature,
    sigma0pi_bar: float,
    mean_jump_nodes: np.ndarray,
    taupi_bar: float = 0.0,
) -> TargetContext:
    """Context against a mean-field environment given by its statistic."""
    law = JumpLaw.from_market(inv_type.market)
    eta_nodes = eta(law, q.nodes)
    exponent = -inv_type.theta * (1.0 - inv_type.alpha)
    env_pow = np.asarray(mean_jump_nodes, dtype=float) ** exponent
    post_w, post_m = _posterior_tables(inv_type, q)
    return TargetContext(
        investor=inv_type,
        quad=q,
        mode="mf",
        sigma0pi_env=float(sigma0pi_bar),
        taupi_env=float(taupi_bar),
        sig2pi2_env=0.0,
        eta_nodes=eta_nodes,
        env_jump_pow=env_pow,
        post_weights=post_w,
        post_mass=post_m,
        jumps_degenerate=inv_type.market.lam == 0.0 or law.degenerate,
    )


def context_from_stats(inv_type: InvestorType, stats: MeanFieldStats, q: Quadrature) -> TargetContext:
    return mf_target_context(
        inv_type, q, stats.sigma0pi_bar, stats.mean_jump_nodes, taupi_bar=stats.taupi_bar
    )


def nagent_target_context(
    i: int, types: Sequence[InvestorType], strat: Strategy, q: Quadrature
) -> TargetContext:
    """Context for player ``i`` against the other players' strategies.

    Peer aggregates divide by n = number of peers.  The expected peer jump
    factor is, per node, the product over peers of their signal mixture
    raised to -theta_i*(1-alpha_i)/n; peers' signal draws are independent
    given the common mark.
    """
    n_players = len(types)
    if strat.n_types != n_players:
        raise ValueError(f"strategy has {strat.n_types} rows for {n_players} players")
    if not 0 <= i < n_players:
        raise IndexError(f"player index {i} out of range")
    if n_players < 2:
        raise ValueError("n-agent mode needs at least 2 players")
    me = types[i]
    n = n_players - 1
    law = JumpLaw.from_market(me.market)
    eta_nodes = eta(law, q.nodes)

    taupi = 0.0
    sigma0pi = 0.0
    sig2pi2 = 0.0
    peer_pow = np.ones_like(q.nodes)
    exponent = -me.theta * (1.0 - me.alpha) / n
    for j, t in enumerate(types):
        if j == i:
            continue
        m = t.market
        pj = strat.row(j)
        pj0 = pj[NONE_INDEX]
        taupi += (m.r + pj0 * (m.kappa - m.r) - 0.5 * (m.sigma**2 + m.sigma0**2) * pj0**2) / n
        sigma0pi += m.sigma0 * pj0 / n
        sig2pi2 += (m.sigma * pj0) ** 2 / n**2
        if exponent == 0.0:
            continue
        jump_j = eta(JumpLaw.from_market(m), q.nodes)
        mix = (1.0 - t.p_s) * (1.0 + pj0 * jump_j) ** exponent
        if t.p_s > 0.0:
            for z in NONZERO_SIGNALS:
                w = conditional_prob(z, q.nodes, t.rho)
                mix = mix + t.p_s * w * (1.0 + pj[SIGNAL_INDEX[z]] * jump_j) ** exponent
        peer_pow = peer_pow * mix

    post_w, post_m = _posterior_tables(me, q)
    return TargetContext(
        investor=me,
        quad=q,
        mode="nagent",
        sigma0pi_env=float(sigma0pi),
        taupi_env=float(taupi),
        sig2pi2_env=float(sig2pi2),
        eta_nodes=eta_nodes,
        env_jump_pow=peer_pow,
        post_weights=post_w,
        post_mass=post_m,
        jumps_degenerate=me.market.lam == 0.0 or law.degenerate,
    )


def _jump_integrand(phi, ctx: TargetContext):
    """Per-node (u(1 + phi*eta, env) - u(1, 1)) with the env power folded in.

    Broadcasts over array-valued ``phi`` (shape (..., 1) against the nodes).
    """
    t = ctx.investor
    phi_arr = np.asarray(phi, dtype=float)[..., np.newaxis]
    returns = 1.0 + phi_arr * ctx.eta_nodes
    vals = (returns ** (1.0 - t.alpha) * ctx.env_jump_pow - 1.0) / (1.0 - t.alpha)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite jump integrand; position outside its admissible interval?")
    return vals


def target_no_signal(phi, ctx: TargetContext):
    """Objective for the default (no-signal) position; scalar or array phi."""
    t = ctx.investor
    m = t.market
    phi_arr = np.asarray(phi, dtype=float)
    drift = (
        phi_arr * (m.kappa - m.r)
        - 0.5 * t.alpha * (m.sigma**2 + m.sigma0**2) * phi_arr**2
        - t.theta * (1.0 - t.alpha) * m.sigma0 * phi_arr * ctx.sigma0pi_env
    )
    if m.lam > 0.0:
        jump = np.dot(_jump_integrand(phi_arr, ctx), ctx.quad.weights)
        drift = drift + m.lam * (1.0 - t.p_s) * jump
    return float(drift) if np.isscalar(phi) else drift


def signal_jump_term(phi, z: Signal, ctx: TargetContext):
    """Unnormalized signal-z jump expectation: sum_k w_k N01(I(z, e_c_k)) * integrand.

    Multiplying by lam*p_s gives the mu(z)-weighted contribution to the value
    constant; dividing by N01(I(z)) gives the best-response target.
    """
    if z is Signal.NONE:
        raise ValueError("signal target is defined for nonzero signals only")
    vals = _jump_integrand(phi, ctx) * ctx.post_weights[z]
    out = np.dot(vals, ctx.quad.weights)
    return float(out) if np.isscalar(phi) else out


def target_signal(phi, z: Signal, ctx: TargetContext):
    """Objective for the position taken upon receiving signal z != 0."""
    return signal_jump_term(phi, z, ctx) / ctx.post_mass[z]


def maximize_concave_1d(
    f: Callable[[float], float], iv: AdmissibleInterval, tol: float = DEFAULT_OPT_TOL
) -> tuple[float, float]:
    """Maximize a strictly concave scalar function on a compact interval.

    Golden-section search shrinks the bracket to width ``tol``, then a single
    parabolic fit through the last three probes refines the maximizer; the
    best evaluated point wins, so refinement can only improve the result.
    Returns (argmax, max).

    Localization from double-precision values is flatness-limited: once
    |f(x) - f(x*)| falls below one ulp of f(x*) the probes tie, so the
    effective argmax accuracy is ~sqrt(ulp(f*)/|f''|) even for tiny ``tol``
    (about 5e-9 for the case-study targets, well inside every tolerance the
    solvers rely on).
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")

    def probe(x: float) -> float:
        v = float(f(x))
        if not math.isfinite(v):
            raise ValueError(f"objective not finite at phi={x}")
        return v

    a, b = iv.lo, iv.hi
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, probe(mid)

    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = probe(x1), probe(x2)
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    history = [(x1, f1), (x2, f2)]
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = probe(x1)
            history.append((x1, f1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = probe(x2)
            history.append((x2, f2))
        if history[-1][1] >= best_f:
            best_x, best_f = history[-1]

    # One parabolic refinement through the last three distinct probes.
    pts = {x: fx for x, fx in history[-4:]}
    if len(pts) >= 3:
        (xa, fa), (xb, fb), (xc, fc) = sorted(pts.items())[:3]
        denom = (xb - xa) * (fb - fc) - (xb - xc) * (fb - fa)
        if denom != 0.0:
            vertex = xb - 0.5 * ((xb - xa) ** 2 * (fb - fc) - (xb - xc) ** 2 * (fb - fa)) / denom
            vertex = min(max(vertex, iv.lo), iv.hi)
            fv = probe(vertex)
            if fv > best_f:
                best_x, best_f = vertex, fv
    return best_x, best_f


def respond_type(inv_type: InvestorType, ctx: TargetContext, opt_tol: float = DEFAULT_OPT_TOL) -> np.ndarray:
    """Best-response row (one position per signal) for a single type.

    When jumps are absent (lam = 0) or sizeless (eta identically 0) the
    nonzero-signal targets are flat in phi, so every admissible position is a
    maximizer; the default position is the canonical selection then.
    """
    row = np.empty(len(SIGNALS))
    phi0, _ = maximize_concave_1d(
        lambda x: target_no_signal(x, ctx), admissible_interval(inv_type, Signal.NONE), opt_tol
    )
    row[NONE_INDEX] = phi0
    for z in NONZERO_SIGNALS:
        if ctx.jumps_degenerate:
            row[SIGNAL_INDEX[z]] = phi0
            continue
        phi_z, _ = maximize_concave_1d(
            lambda x: target_signal(x, z, ctx), admissible_interval(inv_type, z), opt_tol
        )
        row[SIGNAL_INDEX[z]] = phi_z
    return row


def best_response_to_stats(
    pop: Population, stats: MeanFieldStats, q: Quadrature, opt_tol: float = DEFAULT_OPT_TOL
) -> Strategy:
    rows = [
        respond_type(t, context_from_stats(t, stats, q), opt_tol)
        for t in pop.types
    ]
    return Strategy(np.vstack(rows))


def best_response(
    pop: Population, strat_env: Strategy, q: Quadrature, opt_tol: float = DEFAULT_OPT_TOL
) -> Strategy:
    """Mean-field best response of every type to the environment ``strat_env``."""
    return best_response_to_stats(pop, aggregate(pop, strat_env, q), q, opt_tol)


def best_response_nagent(
    types: Sequence[InvestorType], strat: Strategy, q: Quadrature, opt_tol: float = DEFAULT_OPT_TOL
) -> Strategy:
    """Every player's best response to the others' strategies in ``strat``."""
    rows = [
        respond_type(t, nagent_target_context(i, types, strat, q), opt_tol)
        for i, t in enumerate(types)
    ]
    return Strategy(np.vstack(rows))
