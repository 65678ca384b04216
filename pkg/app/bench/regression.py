"""Least-squares timing models T(c) over the constraint count c."""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DegenerateFitError
from app.core.schemas import RegressionFit, Strategy
from app.linalg.dense import lu_solve

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

# model name -> basis columns evaluated at c
MODELS: Dict[str, Callable[[np.ndarray], List[np.ndarray]]] = {
    "linear": lambda c: [np.ones_like(c), c],
    "quadratic": lambda c: [np.ones_like(c), c, c ** 2],
    "log": lambda c: [np.ones_like(c), np.log(c)],
    "cubic": lambda c: [np.ones_like(c), c, c ** 2, c ** 3],
}


def _split(points: Sequence[Point]) -> Tuple[np.ndarray, np.ndarray]:
    data = np.asarray(points, dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    """1 - SSres/SStot, taken as 1 when the data are constant."""
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fitted) ** 2))
    # rounding leaves ~eps^2 * sum(y^2) of spread in constant data
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y ** 2))):
        return 1.0
    return 1.0 - ss_res / ss_tot


def fit_model(points: Sequence[Point], model: str = "cubic",
              strategy: Optional[Strategy] = None) -> RegressionFit:
    """
    Fit one of MODELS by normal equations on column-scaled basis columns.

    Raises:
        DegenerateFitError: fewer distinct abscissae than model parameters
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r} (choose from {', '.join(MODELS)})")
    c, y = _split(points)
    if model == "log" and np.any(c <= 0):
        raise ValueError("the log model needs positive abscissae")

    X = np.column_stack(MODELS[model](c))
    k = X.shape[1]
    distinct = np.unique(c).size
    if distinct < k:
        raise DegenerateFitError(f"{model} fit needs {k} distinct abscissae, got {distinct}")

    scale = np.max(np.abs(X), axis=0)
    scale[scale == 0.0] = 1.0
    Xs = X / scale
    gram = Xs.T @ Xs
    beta_s = lu_solve(gram, Xs.T @ y)
    # one refinement pass on the residual
    beta_s = beta_s + lu_solve(gram, Xs.T @ (y - Xs @ beta_s))
    beta = beta_s / scale

    fit = RegressionFit(
        model=model,
        beta=tuple(float(v) for v in beta),
        r_squared=r_squared(y, X @ beta),
        n_points=int(c.size),
        strategy=strategy,
    )
    logger.debug(f"Fitted {model} model on {c.size} points: R^2={fit.r_squared:.4f}")
    return fit


def fit_cubic(points: Sequence[Point], strategy: Optional[Strategy] = None) -> RegressionFit:
    """T = b0 + b1 c + b2 c^2 + b3 c^3 fitted by least squares."""
    return fit_model(points, "cubic", strategy)


def compare_models(points: Sequence[Point], strategy: Optional[Strategy] = None) -> List[RegressionFit]:
    """Fit every model in MODELS; models the data cannot determine are skipped."""
    fits = []
    for model in MODELS:
        try:
            fits.append(fit_model(points, model, strategy))
        except (DegenerateFitError, ValueError) as e:
            logger.info(f"Skipping {model} model: {e}")
    return fits


def format_regression_table(fits: Sequence[RegressionFit]) -> str:
    """Aligned text table: strategy, model, b0..b3, R^2."""
    header = ["strategy", "model", "b0", "b1", "b2", "b3", "R^2"]
    rows = []
    for fit in fits:
        betas = [f"{b:.6g}" for b in fit.beta] + [""] * (4 - len(fit.beta))
        name = fit.strategy.label if fit.strategy is not None else "-"
        rows.append([name, fit.model, *betas, f"{fit.r_squared:.4f}"])

    widths = [max(len(str(cell)) for cell in column) for column in zip(header, *rows)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(header, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
