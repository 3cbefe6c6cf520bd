"""Fixed-point solvers.

Three flavors of damped Picard iteration on the best-response map: the
n-agent Nash game, the finite-type mean-field game iterated in strategy
space, and the mean-field game iterated in the (|marks| + 1)-dimensional
statistic space for a finite common-mark law.  Non-convergence is a reported
state, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .meanfield import MeanFieldStats, aggregate
from .metrics import M_mf, M_nagent, value_mf
from .model import (
    SIGNALS,
    InvestorType,
    Population,
    Strategy,
    strategy_distance,
    validate_investor,
    validate_population,
)
from .quad import Quadrature
from .response import (
    DEFAULT_OPT_TOL,
    best_response,
    best_response_nagent,
    best_response_to_stats,
    mf_target_context,
    respond_type,
)

# Retry with half damping if the residual has not improved for this many
# iterations at full damping (oscillation guard; existence theory gives no
# contraction rate).
_STALL_WINDOW = 50


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point iteration controls.

    ``init`` is the starting strategy (all-zeros when omitted); ``horizon``
    is the investment horizon used for the per-type values in the result.
    """

    tol: float = 1e-8
    max_iter: int = 500
    damping: float = 1.0
    init: Strategy | None = None
    horizon: float = 1.0
    opt_tol: float = DEFAULT_OPT_TOL

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    """Converged (or best-effort) equilibrium with diagnostics."""

    strategy: Strategy
    residual: float
    iterations: int
    per_type_M: tuple[float, ...]
    per_type_value: tuple[float, ...]
    converged: bool
    stats: MeanFieldStats | None = None
    notes: tuple[str, ...] = ()


def damped_fixed_point(
    step: Callable[[np.ndarray], np.ndarray],
    init: np.ndarray,
    tol: float,
    max_iter: int,
    damping: float,
) -> tuple[np.ndarray, float, int, tuple[str, ...]]:
    """Iterate x <- (1-w) x + w step(x) until sup|step(x) - x| < tol.

    Returns (point, residual, iterations, notes).  At full damping a stalled
    residual (no new best for ``_STALL_WINDOW`` iterations) triggers one
    automatic restart from ``init`` with w = 0.5.
    """
    notes: list[str] = []
    x = np.array(init, dtype=float)
    start = x.copy()
    w = damping
    best = np.inf
    since_best = 0
    iterations = 0
    residual = np.inf
    retried = False
    while iterations < max_iter:
        image = step(x)
        residual = float(np.max(np.abs(image - x)))
        if residual < tol:
            return x, residual, iterations, tuple(notes)
        if residual < best:
            best, since_best = residual, 0
        else:
            since_best += 1
        if w == 1.0 and not retried and since_best >= _STALL_WINDOW:
            notes.append(
                f"residual stalled at {residual:.3e} after {iterations} iterations "
                "at full damping; restarted with damping 0.5"
            )
            x = start.copy()
            w, retried = 0.5, True
            best, since_best = np.inf, 0
            iterations += 1
            continue
        x = (1.0 - w) * x + w * image
        iterations += 1
    # Report the residual at the final iterate.
    image = step(x)
    residual = float(np.max(np.abs(image - x)))
    if residual < tol:
        return x, residual, iterations, tuple(notes)
    notes.append(f"did not converge within {max_iter} iterations (residual {residual:.3e})")
    return x, residual, iterations, tuple(notes)


def _require_valid(pop: Population) -> None:
    problems = validate_population(pop, require_shared_market=False)
    if problems:
        raise ValueError("invalid population: " + "; ".join(problems))


def _require_valid_players(types: Sequence[InvestorType]) -> None:
    # Players are not a weighted mixture; the weight field is ignored here.
    problems = [v for i, t in enumerate(types) for v in validate_investor(t, i, check_weight=False)]
    if problems:
        raise ValueError("invalid players: " + "; ".join(problems))


def _initial_table(cfg: SolverConfig, n_rows: int) -> np.ndarray:
    if cfg.init is None:
        return Strategy.zeros(n_rows).table.copy()
    if cfg.init.n_types != n_rows:
        raise ValueError(f"init strategy has {cfg.init.n_types} rows, expected {n_rows}")
    return cfg.init.table.copy()


def solve_mf_finite(pop: Population, q: Quadrature, cfg: SolverConfig = SolverConfig()) -> EquilibriumResult:
    """Signal-driven mean-field equilibrium for a finite-type population."""
    _require_valid(pop)
    shape = (len(pop), len(SIGNALS))

    def step(vec: np.ndarray) -> np.ndarray:
        strat = Strategy(vec.reshape(shape))
        stats = aggregate(pop, strat, q)
        return best_response_to_stats(pop, stats, q, cfg.opt_tol).table.ravel()

    point, residual, iterations, notes = damped_fixed_point(
        step, _initial_table(cfg, len(pop)).ravel(), cfg.tol, cfg.max_iter, cfg.damping
    )
    strategy = Strategy(point.reshape(shape))
    stats = aggregate(pop, strategy, q)
    per_type_M = tuple(M_mf(t, strategy.row(i), stats, q, cfg.opt_tol) for i, t in enumerate(pop.types))
    per_type_value = tuple(
        value_mf(t, M, t.x0, stats.xbar0, cfg.horizon) for t, M in zip(pop.types, per_type_M)
    )
    return EquilibriumResult(
        strategy=strategy,
        residual=residual,
        iterations=iterations,
        per_type_M=per_type_M,
        per_type_value=per_type_value,
        converged=residual < cfg.tol,
        stats=stats,
        notes=notes,
    )


def solve_nagent(
    types: Sequence[InvestorType], q: Quadrature, cfg: SolverConfig = SolverConfig()
) -> EquilibriumResult:
    """Signal-driven Nash equilibrium among n+1 explicit players."""
    types = tuple(types)
    if len(types) < 2:
        raise ValueError("need at least 2 players")
    _require_valid_players(types)
    shape = (len(types), len(SIGNALS))

    def step(vec: np.ndarray) -> np.ndarray:
        return best_response_nagent(types, Strategy(vec.reshape(shape)), q, cfg.opt_tol).table.ravel()

    point, residual, iterations, notes = damped_fixed_point(
        step, _initial_table(cfg, len(types)).ravel(), cfg.tol, cfg.max_iter, cfg.damping
    )
    strategy = Strategy(point.reshape(shape))
    per_type_M = tuple(M_nagent(i, types, strategy, q, cfg.opt_tol) for i in range(len(types)))
    per_type_value = []
    n = len(types) - 1
    for i, (t, M) in enumerate(zip(types, per_type_M)):
        peers_log_x0 = sum(np.log(s.x0) for j, s in enumerate(types) if j != i) / n
        per_type_value.append(value_mf(t, M, t.x0, float(np.exp(peers_log_x0)), cfg.horizon))
    return EquilibriumResult(
        strategy=strategy,
        residual=residual,
        iterations=iterations,
        per_type_M=per_type_M,
        per_type_value=tuple(per_type_value),
        converged=residual < cfg.tol,
        stats=None,
        notes=notes,
    )


def respond_to_statistic(
    pop: Population, m: np.ndarray, q: Quadrature, opt_tol: float = DEFAULT_OPT_TOL
) -> Strategy:
    """Best response of every type to the raw statistic (sigma0pi, m(marks))."""
    rows = [
        respond_type(t, mf_target_context(t, q, float(m[0]), np.asarray(m[1:], dtype=float)), opt_tol)
        for t in pop.types
    ]
    return Strategy(np.vstack(rows))


def statistic_of(pop: Population, strat: Strategy, q: Quadrature) -> np.ndarray:
    """Statistic vector (sigma0 * pi averaged, mean jump at each mark)."""
    stats = aggregate(pop, strat, q)
    return np.concatenate(([stats.sigma0pi_bar], stats.mean_jump_nodes))


def solve_mf_statistic(
    pop: Population,
    common_marks: Sequence[tuple[float, float]],
    cfg: SolverConfig = SolverConfig(),
) -> EquilibriumResult:
    """Mean-field equilibrium via the statistic-space map for a finite mark law.

    ``common_marks`` lists (mark value, probability) pairs with probabilities
    summing to 1.  The iteration runs on the (|marks| + 1)-dimensional vector
    (sigma0-exposure, mean jump at each mark); the residual is measured there.
    """
    _require_valid(pop)
    marks = [float(m) for m, _ in common_marks]
    probs = [float(p) for _, p in common_marks]
    q = Quadrature.discrete(marks, probs)

    def step(m: np.ndarray) -> np.ndarray:
        return statistic_of(pop, respond_to_statistic(pop, m, q, cfg.opt_tol), q)

    init_strategy = cfg.init if cfg.init is not None else Strategy.zeros(len(pop))
    m0 = statistic_of(pop, init_strategy, q)
    point, residual, iterations, notes = damped_fixed_point(step, m0, cfg.tol, cfg.max_iter, cfg.damping)
    strategy = respond_to_statistic(pop, point, q, cfg.opt_tol)
    stats = aggregate(pop, strategy, q)
    per_type_M = tuple(M_mf(t, strategy.row(i), stats, q, cfg.opt_tol) for i, t in enumerate(pop.types))
    per_type_value = tuple(
        value_mf(t, M, t.x0, stats.xbar0, cfg.horizon) for t, M in zip(pop.types, per_type_M)
    )
    return EquilibriumResult(
        strategy=strategy,
        residual=residual,
        iterations=iterations,
        per_type_M=per_type_M,
        per_type_value=per_type_value,
        converged=residual < cfg.tol,
        stats=stats,
        notes=notes,
    )


def residual(pop: Population, strat: Strategy, q: Quadrature, opt_tol: float = DEFAULT_OPT_TOL) -> float:
    """Consistency gap: distance of the strategy from its own best response."""
    return strategy_distance(best_response(pop, strat, q, opt_tol), strat)
