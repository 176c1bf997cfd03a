import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, stats

from core.errors import EvaluationError, GridError

_logger: logging.Logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
IndexArray = NDArray[np.intp]

# Relative slack used when deciding whether a point sits on a grid node
_ALIGN_SLACK: float = 1e-7


@dataclass(frozen=True)
class Grid1D:
    """
    A uniform grid of ``n`` nodes from ``x_min`` to ``x_max``.

    Attributes
    ----------
    x_min : float
        The first node.
    x_max : float
        The last node.
    n : int
        The number of nodes, at least 2.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise GridError(f"a grid needs at least 2 nodes, got {self.n}")
        if not self.x_max > self.x_min:
            raise GridError(
                f"grid end {self.x_max!r} must exceed start {self.x_min!r}"
            )

    @classmethod
    def from_spacing(cls, x_min: float, spacing: float, n: int) -> "Grid1D":
        """Build the grid with ``n`` nodes ``x_min + i * spacing``."""
        if spacing <= 0.0:
            raise GridError(f"spacing must be positive, got {spacing!r}")
        return cls(x_min, x_min + (n - 1) * spacing, n)

    @classmethod
    def symmetric(cls, half_width: float, spacing: float) -> "Grid1D":
        """
        Build a grid of integer multiples of ``spacing`` covering
        ``[-half_width, half_width]``.

        Parameters
        ----------
        half_width : float
            The half-width to cover; rounded up to a whole number of steps.
        spacing : float
            The node spacing.

        Returns
        -------
        Grid1D
            A grid whose middle node is exactly 0.
        """
        if spacing <= 0.0 or half_width <= 0.0:
            raise GridError("half-width and spacing must be positive")
        steps = math.ceil(half_width / spacing - _ALIGN_SLACK)
        return cls(-steps * spacing, steps * spacing, 2 * steps + 1)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> FloatArray:
        return self.x_min + self.spacing * np.arange(self.n, dtype=float)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def refined(self) -> "Grid1D":
        """Return the grid with half the spacing over the same interval."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n - 1)

    def index_of(self, x: float) -> int | None:
        """Return the node index of ``x`` if ``x`` is a node, else None."""
        position = (x - self.x_min) / self.spacing
        index = round(position)
        if abs(position - index) > _ALIGN_SLACK or not 0 <= index < self.n:
            return None
        return index

    def locate(self, x: ArrayLike) -> tuple[IndexArray, NDArray[np.bool_]]:
        """
        Map points to node indices.

        Parameters
        ----------
        x : array_like
            Points to locate.

        Returns
        -------
        tuple of ndarray
            Rounded node indices (clipped into the grid) and a mask that is
            True where the point sits on that node.
        """
        position = (np.asarray(x, dtype=float) - self.x_min) / self.spacing
        index = np.rint(position).astype(np.intp)
        aligned = (np.abs(position - index) <= _ALIGN_SLACK) & (
            (index >= 0) & (index < self.n)
        )
        return np.clip(index, 0, self.n - 1), aligned

    def contains(self, other: "Grid1D") -> bool:
        """Whether ``other`` lies inside this grid's interval."""
        slack = _ALIGN_SLACK * self.spacing
        return (
            other.x_min >= self.x_min - slack
            and other.x_max <= self.x_max + slack
        )


def _sample(f: Callable[[FloatArray], ArrayLike], x: FloatArray) -> FloatArray:
    """Evaluate ``f`` on ``x`` and reject non-finite samples."""
    values = np.asarray(f(x), dtype=float)
    if values.ndim == 0 or values.shape[0] != x.shape[0]:
        values = np.broadcast_to(values, x.shape + values.shape).copy()
    finite = np.isfinite(values).reshape(x.shape[0], -1).all(axis=1)
    if not finite.all():
        raise EvaluationError(float(x[np.argmin(finite)]))
    return values


def quad(
    f: Callable[[FloatArray], ArrayLike], a: float, b: float, n: int = 512
) -> float | FloatArray:
    """
    Integrate ``f`` over ``[a, b]`` with composite Simpson's rule.

    Parameters
    ----------
    f : callable
        Vectorised integrand; may return scalars or arrays with a leading
        sample axis (the result then keeps the trailing shape).
    a, b : float
        Integration limits.
    n : int
        Number of intervals, at least 8; rounded up to an even number.

    Returns
    -------
    float or ndarray
        The integral.

    Raises
    ------
    EvaluationError
        If the integrand is not finite at some sample.
    """
    if n < 8:
        raise GridError(f"quadrature needs at least 8 intervals, got {n}")
    n += n % 2
    x = np.linspace(a, b, n + 1)
    result = integrate.simpson(_sample(f, x), x=x, axis=0)
    return float(result) if np.ndim(result) == 0 else np.asarray(result)


def quad_sampled(values: ArrayLike, spacing: float, axis: int = 0) -> float | FloatArray:
    """Simpson's rule on equally spaced samples along ``axis``."""
    result = integrate.simpson(
        np.asarray(values, dtype=float), dx=spacing, axis=axis
    )
    return float(result) if np.ndim(result) == 0 else np.asarray(result)


def cumquad(
    f: Callable[[FloatArray], ArrayLike], a: float, grid: Grid1D
) -> FloatArray:
    """
    Running integral of ``f`` from ``a`` over the nodes of ``grid``.

    Parameters
    ----------
    f : callable
        Vectorised integrand; vector- or matrix-valued samples are
        integrated along the leading axis.
    a : float
        The lower limit; must be the first node of ``grid``.
    grid : Grid1D
        The nodes at which the antiderivative is sampled.

    Returns
    -------
    ndarray
        The antiderivative at every node, 0 at the first.

    Raises
    ------
    GridError
        If the grid does not start at ``a``.
    """
    if abs(grid.x_min - a) > _ALIGN_SLACK * max(1.0, abs(a), grid.spacing):
        raise GridError(
            f"cumulative integral from {a!r} needs a grid starting there, "
            f"not at {grid.x_min!r}"
        )
    x = grid.nodes
    values = _sample(f, x)
    if grid.n < 3:
        return integrate.cumulative_trapezoid(values, x=x, axis=0, initial=0.0)
    return integrate.cumulative_simpson(values, x=x, axis=0, initial=0.0)


def centered_difference(values: ArrayLike, spacing: float, axis: int = 0) -> FloatArray:
    """Second-order derivative estimate along ``axis`` (one-sided at the ends)."""
    return np.gradient(
        np.asarray(values, dtype=float), spacing, axis=axis, edge_order=2
    )


def simpson_weights(n: int, spacing: float) -> FloatArray:
    """Composite Simpson weights for ``n`` equally spaced nodes (trapezoid if ``n`` is even)."""
    if n < 2:
        raise GridError("quadrature weights need at least 2 nodes")
    if n % 2 == 0:
        weights = np.full(n, spacing)
        weights[[0, -1]] = 0.5 * spacing
        return weights
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return weights * (spacing / 3.0)


def richardson(coarse: ArrayLike, fine: ArrayLike, order: int = 2) -> FloatArray:
    """Cancel the leading ``h**order`` error term of two results at h and h/2."""
    factor = 2.0**order
    return (factor * np.asarray(fine) - np.asarray(coarse)) / (factor - 1.0)


@dataclass(frozen=True)
class LinearFit:
    """
    Ordinary least-squares line through a set of points.

    Attributes
    ----------
    slope : float
        Fitted slope.
    intercept : float
        Fitted intercept.
    r_squared : float
        Coefficient of determination.
    stderr : float
        Standard error of the slope.
    points : int
        Number of points used.
    """

    slope: float
    intercept: float
    r_squared: float
    stderr: float
    points: int

    def to_dict(self, prefix: str = "") -> dict[str, float | int]:
        return {
            f"{prefix}slope": self.slope,
            f"{prefix}intercept": self.intercept,
            f"{prefix}r_squared": self.r_squared,
            f"{prefix}slope_stderr": self.stderr,
            f"{prefix}points": self.points,
        }


def fit_line(x: Sequence[float] | FloatArray, y: Sequence[float] | FloatArray) -> LinearFit:
    """
    Fit ``y = slope * x + intercept`` by least squares.

    A constant ``y`` yields slope 0 and R^2 = 1.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size < 2:
        raise GridError("a line fit needs at least two points")
    if np.ptp(ys) == 0.0:
        return LinearFit(0.0, float(ys[0]), 1.0, 0.0, int(xs.size))
    result = stats.linregress(xs, ys)
    return LinearFit(
        float(result.slope),
        float(result.intercept),
        float(result.rvalue**2),
        float(result.stderr),
        int(xs.size),
    )


def observed_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """
    Convergence order from the log-log slope of error against step.

    Returns NaN when every error is exactly zero.
    """
    errs = np.asarray(errors, dtype=float)
    if np.all(errs == 0.0):
        return math.nan
    floor = np.finfo(float).tiny
    fit = fit_line(np.log(np.asarray(steps)), np.log(np.maximum(errs, floor)))
    return fit.slope
