import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from core.config import TOL_SPHERE, TOL_SYM
from core.errors import GridError, SphereConstraintError
from core.grid import FloatArray, Grid1D

_logger: logging.Logger = logging.getLogger(__name__)


def e1(m: int) -> FloatArray:
    """The base point (1, 0, ..., 0) of the sphere in R^m."""
    point = np.zeros(m)
    point[0] = 1.0
    return point


def normalize_rows(values: FloatArray) -> FloatArray:
    """Radially project every vector along the last axis onto the unit sphere."""
    return values / np.linalg.norm(values, axis=-1, keepdims=True)


def sample_on_grid(values: FloatArray, grid: Grid1D, x: ArrayLike) -> FloatArray:
    """
    Evaluate sphere-valued samples at arbitrary points.

    Points on grid nodes are read exactly. Others are linearly
    interpolated per component and projected back onto the sphere.
    Points outside the grid take the nearest end value.
    """
    points = np.atleast_1d(np.asarray(x, dtype=float))
    index, aligned = grid.locate(points)
    out = values[index].copy()
    if not aligned.all():
        loose = ~aligned
        nodes = grid.nodes
        interpolated = np.column_stack(
            [
                np.interp(points[loose], nodes, values[:, k])
                for k in range(values.shape[1])
            ]
        )
        out[loose] = normalize_rows(interpolated)
    return out


@dataclass(frozen=True, eq=False)
class SphereSlice:
    """
    Unit vectors in R^m sampled on a spatial grid at one time.

    Attributes
    ----------
    grid : Grid1D
        The spatial grid.
    values : ndarray
        Array of shape ``(grid.n, m)``.
    time : float
        The time of the slice.
    velocity : ndarray or None
        ``phi_t`` at the same nodes, when the producer knows it.
    support : tuple of float or None
        Declared window outside which every value is exactly e1.
    """

    grid: Grid1D
    values: FloatArray
    time: float = 0.0
    velocity: FloatArray | None = None
    support: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.n:
            raise GridError(
                f"slice values of shape {self.values.shape} do not fit "
                f"a grid of {self.grid.n} nodes"
            )
        if self.values.shape[1] < 2:
            raise GridError("slices need a target dimension m >= 2")
        if self.velocity is not None and self.velocity.shape != self.values.shape:
            raise GridError("velocity must have the shape of the values")

    @property
    def m(self) -> int:
        return int(self.values.shape[1])

    @property
    def x(self) -> FloatArray:
        return self.grid.nodes

    def unit_defect(self) -> float:
        """Largest ``||phi| - 1|`` over the nodes."""
        return float(np.max(np.abs(np.linalg.norm(self.values, axis=1) - 1.0)))

    def support_defect(self) -> float:
        """Largest ``|phi - e1|`` outside the declared support (0 if none)."""
        if self.support is None:
            return 0.0
        lo, hi = self.support
        slack = 1e-9 * self.grid.spacing
        outside = (self.x < lo - slack) | (self.x > hi + slack)
        if not outside.any():
            return 0.0
        return float(np.max(np.abs(self.values[outside] - e1(self.m))))

    def validate(self, tol: float = TOL_SPHERE) -> None:
        """
        Check the unit-norm and support invariants.

        Raises
        ------
        SphereConstraintError
            If a value leaves the sphere by more than ``tol`` or differs
            from e1 outside the declared support.
        """
        defect = self.unit_defect()
        if defect > tol:
            raise SphereConstraintError(
                f"slice at t = {self.time:.6g} leaves the sphere by {defect:.3e}"
            )
        leak = self.support_defect()
        if leak > 0.0:
            raise SphereConstraintError(
                f"slice at t = {self.time:.6g} differs from e1 by {leak:.3e} "
                "outside its support window"
            )

    def deviation(self) -> FloatArray:
        """The values minus e1."""
        return self.values - e1(self.m)

    def sample(self, x: ArrayLike) -> FloatArray:
        """Values at arbitrary points (exact on nodes, interpolated otherwise)."""
        return sample_on_grid(self.values, self.grid, x)

    def shifted(self, offset: float) -> "SphereSlice":
        """The same samples on a grid translated by ``offset``."""
        grid = Grid1D(self.grid.x_min + offset, self.grid.x_max + offset, self.grid.n)
        support = None
        if self.support is not None:
            support = (self.support[0] + offset, self.support[1] + offset)
        return replace(self, grid=grid, support=support)

    def rescaled(self, lam: float) -> "SphereSlice":
        """
        The slice ``x -> phi(x / lam)`` at time ``lam * t``.

        The samples are reused on a grid stretched by ``lam``; the
        velocity scales by ``1 / lam``.
        """
        if lam <= 0.0:
            raise GridError(f"scale factor must be positive, got {lam!r}")
        grid = Grid1D(lam * self.grid.x_min, lam * self.grid.x_max, self.grid.n)
        support = None
        if self.support is not None:
            support = (lam * self.support[0], lam * self.support[1])
        velocity = None if self.velocity is None else self.velocity / lam
        return SphereSlice(grid, self.values, lam * self.time, velocity, support)


@dataclass(frozen=True, eq=False)
class NullField:
    """
    Values on a tensor lattice in null coordinates ``u = x + t``, ``v = x - t``.

    Attributes
    ----------
    u_grid, v_grid : Grid1D
        Lattice axes, both normally spanning [-C, C].
    values : ndarray
        Array of shape ``(u_grid.n, v_grid.n, m)``.
    symmetric : bool
        Whether the field is time-symmetric, ``values[i, j] == values[j, i]``.
    """

    u_grid: Grid1D
    v_grid: Grid1D
    values: FloatArray
    symmetric: bool = False

    def __post_init__(self) -> None:
        expected = (self.u_grid.n, self.v_grid.n)
        if self.values.ndim != 3 or self.values.shape[:2] != expected:
            raise GridError(
                f"null field of shape {self.values.shape} does not fit "
                f"a {expected} lattice"
            )
        if self.symmetric:
            if self.u_grid != self.v_grid:
                raise GridError("a symmetric null field needs equal axes")
            defect = self.symmetry_defect()
            if defect > TOL_SYM:
                raise SphereConstraintError(
                    f"field flagged symmetric has asymmetry {defect:.3e}"
                )

    @property
    def m(self) -> int:
        return int(self.values.shape[2])

    def symmetry_defect(self) -> float:
        if self.values.shape[0] != self.values.shape[1]:
            return float("inf")
        return float(np.max(np.abs(self.values - self.values.transpose(1, 0, 2))))

    def mixed_difference(self) -> FloatArray:
        """Centred ``d^2/du dv`` on the interior nodes, shape ``(nu - 2, nv - 2, m)``."""
        phi = self.values
        scale = 4.0 * self.u_grid.spacing * self.v_grid.spacing
        return (phi[2:, 2:] - phi[2:, :-2] - phi[:-2, 2:] + phi[:-2, :-2]) / scale

    def derivatives(self) -> tuple[FloatArray, FloatArray]:
        """Second-order ``phi_u`` and ``phi_v`` on every node."""
        phi_u = np.gradient(self.values, self.u_grid.spacing, axis=0, edge_order=2)
        phi_v = np.gradient(self.values, self.v_grid.spacing, axis=1, edge_order=2)
        return phi_u, phi_v

    def corner(self) -> FloatArray:
        """The value at ``u = u_max``, ``v = v_min``."""
        return self.values[-1, 0].copy()

    def coarsened(self) -> "NullField":
        """Every other node in both directions (odd node counts only)."""
        if self.u_grid.n % 2 == 0 or self.v_grid.n % 2 == 0:
            raise GridError("coarsening needs odd node counts")
        u_grid = Grid1D(self.u_grid.x_min, self.u_grid.x_max, (self.u_grid.n + 1) // 2)
        v_grid = Grid1D(self.v_grid.x_min, self.v_grid.x_max, (self.v_grid.n + 1) // 2)
        return NullField(u_grid, v_grid, self.values[::2, ::2].copy(), self.symmetric)
