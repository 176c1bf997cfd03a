import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from core.config import BLOWUP_TOL, CORRECTOR_SWEEPS, CORRECTOR_TOL
from core.data import DataSpec, build_initial_data
from core.errors import BlowUpError, ConfigError, DataSpecError, GridError
from core.fields import NullField, SphereSlice, e1, normalize_rows
from core.grid import FloatArray, Grid1D, centered_difference

_logger: logging.Logger = logging.getLogger(__name__)

# Extra room beyond the light cone, in units of C
_MARGIN_FRACTION: float = 0.25


@dataclass(frozen=True)
class PohlmeyerLog:
    """
    Discrete check of the pointwise conservation laws.

    Attributes
    ----------
    u_variation : float
        Largest change of ``|phi_u|`` along a line ``u = const`` between
        two stored slices.
    v_variation : float
        Largest change of ``|phi_v|`` along a line ``v = const``.
    u_rate, v_rate : float
        The same variations divided by the null distance ``2 |dt|``.
    orthogonality : float
        Largest ``|phi . phi_u|`` or ``|phi . phi_v|``.
    flatness : float
        Largest ``|phi_u|`` where ``|t + x| >= C`` or ``|phi_v|`` where
        ``|t - x| >= C``.
    """

    u_variation: float
    v_variation: float
    u_rate: float
    v_rate: float
    orthogonality: float
    flatness: float

    @property
    def residual(self) -> float:
        return max(self.u_variation, self.v_variation)

    def to_dict(self) -> dict[str, float]:
        return {
            "pohlmeyer_u_variation": self.u_variation,
            "pohlmeyer_v_variation": self.v_variation,
            "pohlmeyer_u_rate": self.u_rate,
            "pohlmeyer_v_rate": self.v_rate,
            "orthogonality": self.orthogonality,
            "flatness": self.flatness,
        }


@dataclass(frozen=True, eq=False)
class Evolution:
    """
    Stored slices of one evolution.

    Attributes
    ----------
    spec : DataSpec or None
        The data parameters, when the run started from canonical data.
    slices : tuple of SphereSlice
        Slices at the requested times, each with its velocity.
    h_step : float
        Grid spacing and time step (unit CFL).
    half_width : float
        Half-width C of the initial support about ``center``.
    center : float
        Centre of the initial support.
    monitors : PohlmeyerLog or None
        Conservation-law monitors (needs two or more slices).
    max_raw_defect : float
        Largest sphere defect seen before projection.
    steps : int
        Number of time steps taken.
    """

    spec: DataSpec | None
    slices: tuple[SphereSlice, ...]
    h_step: float
    half_width: float
    center: float = 0.0
    monitors: PohlmeyerLog | None = None
    max_raw_defect: float = 0.0
    steps: int = 0
    sweeps: dict[int, int] = field(default_factory=dict)

    @property
    def final(self) -> SphereSlice:
        return self.slices[-1]

    def slice_at(self, t: float) -> SphereSlice:
        """The stored slice closest to time ``t``."""
        return min(self.slices, key=lambda s: abs(s.time - t))


def _step_count(t: float, h_step: float) -> int:
    steps = round(abs(t) / h_step)
    if abs(steps * h_step - abs(t)) > 1e-9 * max(1.0, abs(t)):
        raise GridError(
            f"time {t!r} is not a whole number of steps of {h_step!r}"
        )
    return steps


def _taylor_start(f: FloatArray, h: float) -> FloatArray:
    """
    First level from data with zero velocity.

    ``f + (h^2 / 2)(f_xx + f |f_x|^2)`` with centred differences, projected.
    """
    east, west, center = f[2:], f[:-2], f[1:-1]
    grad_sq = np.sum((east - west) ** 2, axis=1) / (4.0 * h * h)
    raw = 0.5 * (east + west) + 0.5 * h * h * center * grad_sq[:, np.newaxis]
    out = f.copy()
    out[1:-1] = normalize_rows(raw)
    return out


class _LeapfrogStepper:
    """
    Rolling two-level state of the unit-CFL leapfrog.

    ``phi^{n+1} = E + W - S + dt^2 phi (|phi_x|^2 - |phi_t|^2)`` where
    ``phi_t`` is the centred difference involving ``phi^{n+1}`` itself, so
    the update is solved by fixed-point sweeps seeded with the linear
    part. ``|phi_x|^2 - |phi_t|^2 = 4 phi_u . phi_v`` at the stencil centre.
    """

    def __init__(self, grid: Grid1D, dt: float, boundary: FloatArray) -> None:
        self.grid: Grid1D = grid
        self.dt: float = dt
        self.boundary: FloatArray = boundary
        self.max_raw_defect: float = 0.0
        self.sweep_histogram: dict[int, int] = {}

    def step(self, prev: FloatArray, curr: FloatArray, time: float) -> FloatArray:
        h = self.grid.spacing
        east, west, south, center = curr[2:], curr[:-2], prev[1:-1], curr[1:-1]
        linear = east + west - south
        grad_sq = np.sum((east - west) ** 2, axis=1) / (4.0 * h * h)
        dt2 = self.dt * self.dt

        north = linear
        sweeps = 0
        for sweeps in range(1, CORRECTOR_SWEEPS + 1):
            rate_sq = np.sum((north - south) ** 2, axis=1) / (4.0 * dt2)
            candidate = linear + dt2 * center * (grad_sq - rate_sq)[:, np.newaxis]
            change = float(np.max(np.abs(candidate - north)))
            north = candidate
            if change <= CORRECTOR_TOL:
                break
        self.sweep_histogram[sweeps] = self.sweep_histogram.get(sweeps, 0) + 1

        norms = np.linalg.norm(north, axis=1)
        defect = np.abs(norms - 1.0)
        worst = int(np.argmax(defect))
        self.max_raw_defect = max(self.max_raw_defect, float(defect[worst]))
        if defect[worst] > BLOWUP_TOL:
            raise BlowUpError(time, float(self.grid.nodes[worst + 1]), float(defect[worst]))

        out = np.empty_like(curr)
        out[1:-1] = north / norms[:, np.newaxis]
        out[0] = self.boundary
        out[-1] = self.boundary
        return out


def evolve_slice(
    initial: SphereSlice,
    t_final: float,
    *,
    slice_times: Sequence[float] | None = None,
    half_width: float | None = None,
    center: float = 0.0,
    spec: DataSpec | None = None,
) -> Evolution:
    """
    Evolve sphere-valued data with zero initial velocity.

    Parameters
    ----------
    initial : SphereSlice
        Data at time 0; the step is the grid spacing. The two end nodes
        are held at their initial value.
    t_final : float
        Final time; negative values evolve backwards with identical arithmetic.
    slice_times : sequence of float, optional
        Times to store, all on the step lattice and with the sign of
        ``t_final``; ``t_final`` is always stored.
    half_width : float, optional
        Half-width of the data support, used by the monitors.
    center : float
        Centre of the data support.
    spec : DataSpec, optional
        Recorded on the result.

    Returns
    -------
    Evolution
        The stored slices with their velocities and the monitors.

    Raises
    ------
    GridError
        If a requested time is not a whole number of steps, or if the grid
        does not hold the light cone of a known support up to ``|t_final|``.
    BlowUpError
        If an update leaves the sphere by more than the guard allows.
    """
    grid = initial.grid
    h = grid.spacing
    sign = -1.0 if t_final < 0.0 else 1.0
    dt = sign * h
    total = _step_count(t_final, h)

    requested = {total}
    for t in slice_times or ():
        if t * sign < 0.0:
            raise ConfigError(f"slice time {t!r} lies on the wrong side of 0")
        requested.add(_step_count(t, h))

    extent_known = half_width is not None or initial.support is not None
    if half_width is None:
        if initial.support is not None:
            half_width = 0.5 * (initial.support[1] - initial.support[0])
            center = 0.5 * (initial.support[1] + initial.support[0])
        else:
            half_width = 0.5 * grid.length

    # held end nodes are only harmless outside the light cone
    reach = abs(t_final) + half_width + 2.0 * h
    if extent_known and (grid.x_min > center - reach or grid.x_max < center + reach):
        raise GridError(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] does not contain the light "
            f"cone of [{center - half_width:g}, {center + half_width:g}] "
            f"up to |t| = {abs(t_final):g}"
        )

    boundary = initial.values[0].copy()
    stepper = _LeapfrogStepper(grid, dt, boundary)
    _logger.info(
        f"evolving {grid.n} nodes for {total} steps of {h:.3e} "
        f"(t_final = {t_final:g})"
    )

    stored: list[SphereSlice] = []

    def store(level: int, values: FloatArray, velocity: FloatArray) -> None:
        support = None
        if initial.support is not None:
            spread = level * h
            support = (initial.support[0] - spread, initial.support[1] + spread)
        stored.append(
            SphereSlice(grid, values.copy(), level * dt, velocity, support)
        )

    prev = initial.values.copy()
    if 0 in requested:
        store(0, prev, np.zeros_like(prev))
    if total == 0:
        return Evolution(spec, tuple(stored), h, half_width, center)

    curr = _taylor_start(prev, h)
    for level in range(1, total + 1):
        nxt = stepper.step(prev, curr, (level + 1) * dt)
        if level in requested:
            store(level, curr, (nxt - prev) / (2.0 * dt))
        prev, curr = curr, nxt

    monitors = None
    if len(stored) >= 2:
        monitors = _pohlmeyer(stored, h, half_width, center)
    _logger.debug(
        f"corrector sweeps histogram {stepper.sweep_histogram}, "
        f"max raw defect {stepper.max_raw_defect:.3e}"
    )
    return Evolution(
        spec,
        tuple(stored),
        h,
        half_width,
        center,
        monitors,
        stepper.max_raw_defect,
        total,
        dict(stepper.sweep_histogram),
    )


def evolve(
    spec: DataSpec,
    t_final: float,
    h_step: float,
    slice_times: Sequence[float] | None = None,
) -> Evolution:
    """
    Evolve the counterexample data of ``spec``.

    The grid is ``Grid1D.symmetric`` with spacing ``h_step`` and wide
    enough to hold the light cone of the support up to ``|t_final|``.

    Parameters
    ----------
    spec : DataSpec
        The data parameters.
    t_final : float
        Final time (negative evolves backwards).
    h_step : float
        Grid spacing and time step.
    slice_times : sequence of float, optional
        Additional times to store.

    Returns
    -------
    Evolution
        The evolution.
    """
    if h_step <= 0.0 or h_step > spec.C:
        raise GridError(f"h_step must lie in (0, C], got {h_step!r}")
    half = abs(t_final) + spec.C * (1.0 + _MARGIN_FRACTION) + 4.0 * h_step
    grid = Grid1D.symmetric(half, h_step)
    initial = build_initial_data(spec, grid)
    return evolve_slice(
        initial,
        t_final,
        slice_times=slice_times,
        half_width=spec.C,
        spec=spec,
    )


def _pohlmeyer(
    slices: Sequence[SphereSlice], h: float, half_width: float, center: float
) -> PohlmeyerLog:
    """Compare ``|phi_u|`` and ``|phi_v|`` between consecutive slices along characteristics."""
    u_var = v_var = u_rate = v_rate = 0.0
    orthogonality = flatness = 0.0
    rates: list[tuple[float, FloatArray, FloatArray, SphereSlice]] = []
    for s in slices:
        if s.velocity is None:
            raise ConfigError("monitors need slices with velocities")
        phi_x = centered_difference(s.values, h)
        phi_u = 0.5 * (phi_x + s.velocity)
        phi_v = 0.5 * (phi_x - s.velocity)
        rates.append(
            (s.time, np.linalg.norm(phi_u, axis=1), np.linalg.norm(phi_v, axis=1), s)
        )

        y = s.x - center
        orthogonality = max(
            orthogonality,
            float(np.max(np.abs(np.sum(s.values * phi_u, axis=1)))),
            float(np.max(np.abs(np.sum(s.values * phi_v, axis=1)))),
        )
        edge = half_width + 2.0 * h
        out_u = np.abs(s.time + y) >= edge
        out_v = np.abs(s.time - y) >= edge
        if out_u.any():
            flatness = max(flatness, float(np.max(rates[-1][1][out_u])))
        if out_v.any():
            flatness = max(flatness, float(np.max(rates[-1][2][out_v])))

    for (t1, a1, b1, _), (t2, a2, b2, _) in zip(rates, rates[1:], strict=False):
        k = round((t2 - t1) / h)
        if k == 0:
            continue
        n = a1.size
        # u = x + t fixed: node j at t1 meets node j - k at t2
        lo, hi = max(0, k), min(n, n + k)
        du = float(np.max(np.abs(a2[lo - k : hi - k] - a1[lo:hi])))
        # v = x - t fixed: node j at t1 meets node j + k at t2
        lo, hi = max(0, -k), min(n, n - k)
        dv = float(np.max(np.abs(b2[lo + k : hi + k] - b1[lo:hi])))
        span = 2.0 * abs(t2 - t1)
        u_var, v_var = max(u_var, du), max(v_var, dv)
        u_rate, v_rate = max(u_rate, du / span), max(v_rate, dv / span)

    return PohlmeyerLog(u_var, v_var, u_rate, v_rate, orthogonality, flatness)


def pohlmeyer_residual(ev: Evolution) -> PohlmeyerLog:
    """
    Conservation-law monitors of a stored evolution.

    Raises
    ------
    ConfigError
        If fewer than two slices were stored.
    """
    if len(ev.slices) < 2:
        raise ConfigError("the conservation-law monitors need two stored slices")
    if ev.monitors is not None:
        return ev.monitors
    return _pohlmeyer(ev.slices, ev.h_step, ev.half_width, ev.center)


def circle_phase(spec: DataSpec) -> Callable[[FloatArray], FloatArray]:
    """The phase ``theta = eps h`` of circle-target data."""
    if spec.m != 2:
        raise DataSpecError("a phase profile exists only for m = 2")

    def theta(x: FloatArray) -> FloatArray:
        return spec.eps * spec.bump.values(x)[:, 0]

    return theta


def circle_exact(
    theta: Callable[[FloatArray], FloatArray], t: float, grid: Grid1D
) -> SphereSlice:
    """
    Exact circle-target solution ``(cos Theta, sin Theta)``.

    ``Theta(t, x) = (theta(x + t) + theta(x - t)) / 2``, the free wave
    with data ``theta`` and zero velocity.
    """
    x = grid.nodes
    phase = 0.5 * (theta(x + t) + theta(x - t))
    values = np.column_stack([np.cos(phase), np.sin(phase)])
    return SphereSlice(grid, values, t)


@dataclass(frozen=True, eq=False)
class NullMarch:
    """
    Result of marching the null lattice over [-C, C]^2.

    Attributes
    ----------
    delta : float
        Lattice spacing in ``u`` and ``v``.
    alpha : ndarray
        The value at the corner ``u = C, v = -C``.
    field : NullField or None
        The full symmetric field, when it was stored.
    max_raw_defect : float
        Largest pre-projection sphere defect.
    """

    delta: float
    alpha: FloatArray
    field: NullField | None
    max_raw_defect: float


def _null_update(
    sw: FloatArray,
    ne: FloatArray,
    nw: FloatArray | None,
    delta: float,
) -> tuple[FloatArray, float]:
    """
    Solve the diamond relation for the latest-time corner ``X = (u + d, v)``.

    ``X = NE - NW + SW + d^2 [phi (phi_u . phi_v)]_c`` with midpoint
    averages at the cell centre. ``nw is None`` marks the first diagonal,
    where time symmetry gives ``NW = X``.
    """
    first = nw is None
    x = 0.5 * (sw + ne) if first else ne - nw + sw
    base = x
    for _ in range(CORRECTOR_SWEEPS):
        west = x if first else nw
        phi_u = (x - sw + ne - west) / (2.0 * delta)
        phi_v = (west - sw + ne - x) / (2.0 * delta)
        phi_c = 0.25 * (sw + x + west + ne)
        q = phi_c * np.sum(phi_u * phi_v, axis=1)[:, np.newaxis]
        candidate = (
            base + 0.5 * delta * delta * q if first else base + delta * delta * q
        )
        change = float(np.max(np.abs(candidate - x)))
        x = candidate
        if change <= CORRECTOR_TOL:
            break
    norms = np.linalg.norm(x, axis=1)
    return x / norms[:, np.newaxis], float(np.max(np.abs(norms - 1.0)))


def march_null_lattice(spec: DataSpec, delta: float, store: bool = True) -> NullMarch:
    """
    Cross-check integrator marching ``phi_uv = -phi (phi_u . phi_v)`` on null diagonals.

    The data sit on the diagonal ``u = v``; each further diagonal
    ``u - v = k delta`` is computed from the two before it, and the lower
    triangle is filled by time symmetry. The result equals the leapfrog
    with ``h_step = delta / 2`` restricted to one sublattice.

    Parameters
    ----------
    spec : DataSpec
        The data parameters.
    delta : float
        Lattice spacing; ``2 C / delta`` must be a whole number.
    store : bool
        Keep the full ``(n, n, m)`` field (memory grows as ``n^2``).

    Returns
    -------
    NullMarch
        The corner value and, if stored, the field.
    """
    grid = Grid1D.symmetric(spec.C, delta)
    if abs(grid.x_max - spec.C) > 1e-9 * spec.C:
        raise GridError(f"2C / delta must be a whole number, got delta = {delta!r}")
    f = build_initial_data(spec, grid).values
    n = grid.n
    values = np.empty((n, n, spec.m)) if store else None
    if values is not None:
        values[np.arange(n), np.arange(n)] = f

    worst = 0.0
    older: FloatArray | None = None
    current = f
    for k in range(1, n):
        sw, ne = current[:-1], current[1:]
        nw = None if older is None else older[1:-1]
        nxt, defect = _null_update(sw, ne, nw, delta)
        worst = max(worst, defect)
        if defect > BLOWUP_TOL:
            j = int(np.argmax(np.abs(np.linalg.norm(nxt, axis=1) - 1.0)))
            raise BlowUpError(k * delta / 2.0, float(grid.nodes[j]), defect)
        if values is not None:
            j = np.arange(n - k)
            values[j + k, j] = nxt
            values[j, j + k] = nxt
        older, current = current, nxt

    alpha = current[0].copy() if n > 1 else e1(spec.m)
    field_ = NullField(grid, grid, values, symmetric=True) if values is not None else None
    _logger.info(
        f"null lattice with {n} nodes per side: corner value {np.array2string(alpha)}"
    )
    return NullMarch(delta, alpha, field_, worst)
