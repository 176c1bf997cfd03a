import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import ArrayLike

from core.errors import DataSpecError
from core.grid import FloatArray

_logger: logging.Logger = logging.getLogger(__name__)


def _log_derivatives(s: FloatArray, order: int) -> list[FloatArray]:
    """
    Derivatives ``q^(k)``, ``k = 1 .. order``, of ``q(s) = -1 / (1 - s^2)``.

    Uses the partial fractions ``q = -(1/(1-s) + 1/(1+s)) / 2``.
    """
    out: list[FloatArray] = []
    for k in range(1, order + 1):
        kf = float(math.factorial(k))
        out.append(
            -0.5 * kf * ((1.0 - s) ** -(k + 1) + (-1.0) ** k * (1.0 + s) ** -(k + 1))
        )
    return out


def mollifier_derivatives(s: ArrayLike, order: int) -> FloatArray:
    """
    The standard mollifier ``psi(s) = exp(-1 / (1 - s^2))`` and its derivatives.

    ``psi' = q' psi`` with ``q = -1 / (1 - s^2)``, so Leibniz's rule gives
    ``psi^(n+1) = sum_k binom(n, k) q^(k+1) psi^(n-k)``. Every derivative
    is zero outside ``|s| < 1`` and where ``psi`` underflows.

    Parameters
    ----------
    s : array_like
        Points in the reference variable.
    order : int
        Highest derivative wanted.

    Returns
    -------
    ndarray
        Array of shape ``(order + 1, len(s))``; row ``k`` is ``psi^(k)``.
    """
    points = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros((order + 1, points.size))
    inside = np.abs(points) < 1.0
    if not inside.any():
        return out
    si = points[inside]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
        psi = np.exp(-1.0 / (1.0 - si * si))
        alive = psi > 0.0
        q = _log_derivatives(np.where(alive, si, 0.0), order)
        rows = [psi]
        for n in range(order):
            rows.append(
                sum(
                    (math.comb(n, k) * q[k] * rows[n - k] for k in range(n + 1)),
                    start=np.zeros_like(si),
                )
            )
    for k, row in enumerate(rows):
        out[k, inside] = np.where(alive, row, 0.0)
    return out


@dataclass(frozen=True)
class BumpComponent:
    """
    One scalar component ``a * d^order/dx^order [psi(x/C) (offset + slope x/C)]``.

    Attributes
    ----------
    C : float
        Half-width of the support.
    offset, slope : float
        Coefficients of the linear factor that breaks the mollifier's symmetry.
    amplitude : float
        Overall factor ``a``.
    order : int
        How many times the base shape is differentiated.
    label : str
        Name used in logs and reports.
    """

    C: float
    offset: float = 0.5
    slope: float = 0.5
    amplitude: float = 1.0
    order: int = 0
    label: str = "h"

    def __post_init__(self) -> None:
        if self.C <= 0.0:
            raise DataSpecError(f"bump half-width must be positive, got {self.C!r}")
        if self.order < 0:
            raise DataSpecError("derivative order must be non-negative")

    def _base_derivative(self, x: ArrayLike, n: int) -> FloatArray:
        s = np.atleast_1d(np.asarray(x, dtype=float)) / self.C
        psi = mollifier_derivatives(s, n)
        linear = self.offset + self.slope * s
        value = linear * psi[n]
        if n > 0:
            value = value + n * self.slope * psi[n - 1]
        return self.amplitude * value / self.C**n

    def __call__(self, x: ArrayLike) -> FloatArray:
        return self._base_derivative(x, self.order)

    def derivative(self, x: ArrayLike, k: int = 1) -> FloatArray:
        """Exact ``k``-th derivative at ``x``."""
        return self._base_derivative(x, self.order + k)

    def differentiated(self, label: str | None = None) -> "BumpComponent":
        """The component whose values are this component's derivative."""
        return replace(self, order=self.order + 1, label=label or f"{self.label}'")

    def scaled(self, factor: float) -> "BumpComponent":
        return replace(self, amplitude=self.amplitude * factor)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0 or (self.offset == 0.0 and self.slope == 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """
    An R^(m-1)-valued smooth bump supported in [-C, C].

    Attributes
    ----------
    C : float
        Support half-width.
    components : tuple of BumpComponent
        The nonzero leading components; the rest of the target is zero.
    target_dim : int
        Number of components ``m - 1``.
    name : str
        Shape id recorded in outputs.
    """

    C: float
    components: tuple[BumpComponent, ...]
    target_dim: int
    name: str = "asym"
    metadata: dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.components:
            raise DataSpecError("a bump profile needs at least one component")
        if self.target_dim < len(self.components):
            raise DataSpecError(
                f"{len(self.components)} components do not fit target "
                f"dimension {self.target_dim}"
            )
        for component in self.components:
            if not math.isclose(component.C, self.C):
                raise DataSpecError("all components must share the half-width C")

    @property
    def nonzero_components(self) -> int:
        return sum(not c.is_zero for c in self.components)

    def padded(self, target_dim: int) -> "BumpProfile":
        """The same bump viewed in a larger target (extra components are zero)."""
        return replace(self, target_dim=target_dim)

    def values(self, x: ArrayLike, k: int = 0) -> FloatArray:
        """``h^(k)(x)`` as an array of shape ``(len(x), target_dim)``."""
        points = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((points.size, self.target_dim))
        for index, component in enumerate(self.components):
            out[:, index] = component.derivative(points, k) if k else component(points)
        return out

    def embedded(self, x: ArrayLike, k: int = 0) -> FloatArray:
        """``h^(k)`` placed in the e2..em slots of R^m (e1 slot zero)."""
        inner = self.values(x, k)
        return np.concatenate([np.zeros((inner.shape[0], 1)), inner], axis=1)

    def support_defect(self, x: ArrayLike, derivatives: int = 3) -> float:
        """Largest ``|h^(k)|`` for ``k <= derivatives`` at points with ``|x| >= C``."""
        points = np.atleast_1d(np.asarray(x, dtype=float))
        outside = points[np.abs(points) >= self.C]
        if outside.size == 0:
            return 0.0
        return max(
            float(np.max(np.abs(self.values(outside, k))))
            for k in range(derivatives + 1)
        )
