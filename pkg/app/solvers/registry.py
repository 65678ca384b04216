"""Construction of solving strategies from names and settings."""

import logging
from typing import Iterable, List, Optional, Union

from app.config.settings import Settings
from app.core.schemas import BarrierParams, Strategy
from app.solvers.active_set import ActiveSetSolver
from app.solvers.base import LayoutSolver
from app.solvers.interior_point import InteriorPointSolver
from app.solvers.simplex import SimplexSolver

logger = logging.getLogger(__name__)


def parse_strategy(name: Union[str, Strategy]) -> Strategy:
    """Map a CLI name (`ip`, `as`, `simplex`) to a Strategy."""
    if isinstance(name, Strategy):
        return name
    try:
        return Strategy(name.strip().lower())
    except ValueError:
        choices = ", ".join(s.value for s in Strategy)
        raise ValueError(f"unknown strategy {name!r} (choose from {choices})") from None


def parse_strategies(names: Union[str, Iterable[str]]) -> List[Strategy]:
    """Parse a comma separated list (or iterable) of strategy names, keeping order."""
    if isinstance(names, str):
        names = [n for n in names.split(",") if n.strip()]
    strategies: List[Strategy] = []
    for name in names:
        strategy = parse_strategy(name)
        if strategy not in strategies:
            strategies.append(strategy)
    if not strategies:
        raise ValueError("no strategy given")
    return strategies


def create_solver(
    strategy: Union[str, Strategy],
    settings: Optional[Settings] = None,
    params: Optional[BarrierParams] = None,
    max_iter: Optional[int] = None,
) -> LayoutSolver:
    """
    Create a solver for `strategy`.

    Args:
        strategy: strategy or its CLI name
        settings: source of defaults (library defaults when omitted)
        params: barrier parameters overriding the settings
        max_iter: iteration cap overriding the settings (active set, simplex)
    """
    strategy = parse_strategy(strategy)
    settings = settings or Settings()

    if strategy is Strategy.INTERIOR_POINT:
        solver = InteriorPointSolver(params=params or settings.barrier_params())
    elif strategy is Strategy.ACTIVE_SET:
        cap = settings.active_set_max_iter if max_iter is None else max_iter
        solver = ActiveSetSolver(max_iter=cap)
    else:
        cap = settings.simplex_max_iter if max_iter is None else max_iter
        solver = SimplexSolver(max_iter=cap)

    logger.debug(f"Created solver: {solver.get_strategy_name()}")
    return solver
