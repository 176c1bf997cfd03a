import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from core.config import DESC_TOL_FACTOR, TRANSFORM_CHUNK
from core.errors import ProfileError
from core.evolve import Evolution
from core.fields import SphereSlice, e1, normalize_rows, sample_on_grid
from core.grid import FloatArray, Grid1D, centered_difference, simpson_weights

_logger: logging.Logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class AsymptoticProfile:
    """
    The travelling-wave description of a solution after its strips separate.

    For ``T >= C`` the slice at time ``T`` is e1 for ``|x| >= T + C``,
    ``F(T + x)`` on the left strip, ``alpha`` in between and ``G(T - x)``
    on the right strip.

    Attributes
    ----------
    C : float
        Support half-width of the data.
    s_grid : Grid1D
        Sampling grid of F and G on [-C, C].
    F, G : ndarray
        Arrays of shape ``(s_grid.n, m)``.
    alpha : ndarray
        The interior constant, a unit vector.
    residual : float
        Distance of the source slice from the five-piece description.
    T0 : float
        Time of the source slice.
    """

    C: float
    s_grid: Grid1D
    F: FloatArray
    G: FloatArray
    alpha: FloatArray
    residual: float
    T0: float = math.nan

    def __post_init__(self) -> None:
        if abs(float(np.linalg.norm(self.alpha)) - 1.0) > 1e-10:
            raise ProfileError("alpha must be a unit vector")
        if self.F.shape != self.G.shape or self.F.shape[0] != self.s_grid.n:
            raise ProfileError("F and G must be sampled on the profile grid")

    @property
    def m(self) -> int:
        return int(self.alpha.size)

    @property
    def deviation(self) -> FloatArray:
        """``alpha - e1``."""
        return self.alpha - e1(self.m)

    def endpoint_defect(self) -> float:
        """Largest mismatch of F and G with e1 at -C and alpha at C."""
        base = e1(self.m)
        return float(
            max(
                np.max(np.abs(self.F[0] - base)),
                np.max(np.abs(self.G[0] - base)),
                np.max(np.abs(self.F[-1] - self.alpha)),
                np.max(np.abs(self.G[-1] - self.alpha)),
            )
        )

    def smoothness(self) -> float:
        """Largest second difference quotient of F and G."""
        h = self.s_grid.spacing
        second = [
            np.max(np.abs(np.diff(p, n=2, axis=0))) / (h * h) for p in (self.F, self.G)
        ]
        return float(max(second))

    def resampled(self, spacing: float) -> "AsymptoticProfile":
        """
        The profile on a grid of the given spacing over [-C, C].

        Cubic-spline interpolation per component, then projection onto the
        sphere. The ends are pinned to e1 and alpha.
        """
        steps = max(2, round(2.0 * self.C / spacing))
        grid = Grid1D(-self.C, self.C, steps + 1)
        if grid.n == self.s_grid.n:
            return self
        s_old, s_new = self.s_grid.nodes, grid.nodes
        parts = []
        for values in (self.F, self.G):
            fresh = normalize_rows(CubicSpline(s_old, values, axis=0)(s_new))
            fresh[0], fresh[-1] = values[0], values[-1]
            parts.append(fresh)
        return AsymptoticProfile(
            self.C, grid, parts[0], parts[1], self.alpha, self.residual, self.T0
        )

    def sample(self, which: str, s: ArrayLike) -> FloatArray:
        """F or G at arbitrary ``s`` in [-C, C]."""
        values = self.F if which == "F" else self.G
        return sample_on_grid(values, self.s_grid, s)

    def transform(self, xi: ArrayLike, which: str = "F") -> ComplexArray:
        """
        ``A(xi)`` (F) or ``B(xi)`` (G): the transform of F' or G'.

        Integration by parts moves the derivative onto the kernel::

            A(xi) = F(C) e^{-2 pi i C xi} - F(-C) e^{2 pi i C xi}
                    + 2 pi i xi int F(s) e^{-2 pi i s xi} ds

        with Simpson weights on the profile grid.

        Returns
        -------
        ndarray
            Complex array of shape ``(len(xi), m)``.
        """
        values = self.F if which == "F" else self.G
        freqs = np.atleast_1d(np.asarray(xi, dtype=float))
        s = self.s_grid.nodes
        weighted = values * simpson_weights(self.s_grid.n, self.s_grid.spacing)[:, np.newaxis]
        out = np.empty((freqs.size, self.m), dtype=complex)
        for start in range(0, freqs.size, TRANSFORM_CHUNK):
            chunk = freqs[start : start + TRANSFORM_CHUNK]
            kernel = np.exp(-2j * np.pi * np.outer(chunk, s))
            interior = 2j * np.pi * chunk[:, np.newaxis] * (kernel @ weighted)
            boundary = np.outer(np.exp(-2j * np.pi * self.C * chunk), values[-1]) - np.outer(
                np.exp(2j * np.pi * self.C * chunk), values[0]
            )
            out[start : start + chunk.size] = boundary + interior
        return out


def _five_piece(
    profile: AsymptoticProfile, x: FloatArray, T: float, center: float
) -> FloatArray:
    C = profile.C
    y = x - center
    out = np.tile(e1(profile.m), (x.size, 1))
    left = (y >= -T - C) & (y <= -T + C)
    right = (y >= T - C) & (y <= T + C)
    middle = (y > -T + C) & (y < T - C)
    out[middle] = profile.alpha
    if left.any():
        out[left] = profile.sample("F", T + y[left])
    if right.any():
        out[right] = profile.sample("G", T - y[right])
    return out


def evaluate_description(
    profile: AsymptoticProfile, x: ArrayLike, T: float, center: float = 0.0
) -> FloatArray:
    """Evaluate the five-piece description at points ``x`` and time ``T``."""
    if T < profile.C:
        raise ProfileError(f"the strips overlap for T = {T:g} < C = {profile.C:g}")
    return _five_piece(profile, np.atleast_1d(np.asarray(x, dtype=float)), T, center)


def extract_profile(
    slice_: SphereSlice,
    C: float,
    *,
    center: float = 0.0,
    margin: float | None = None,
    tol: float | None = None,
) -> AsymptoticProfile:
    """
    Read F, G and alpha off an evolved slice.

    Parameters
    ----------
    slice_ : SphereSlice
        A slice at time ``T0 >= 2 C``.
    C : float
        Support half-width of the data.
    center : float
        Centre of the data support.
    margin : float, optional
        Inset of the interior average from the strips; default ``C / 2``.
    tol : float, optional
        Accepted residual; default ``10 (h / C)^2``.

    Returns
    -------
    AsymptoticProfile
        The profile; ``F(s) = phi(T0, s - T0)``, ``G(s) = phi(T0, T0 - s)``.

    Raises
    ------
    ProfileError
        If ``T0 < 2 C`` or the slice departs from the description by more
        than ``tol``.
    """
    T0 = abs(slice_.time)
    h = slice_.grid.spacing
    if T0 < 2.0 * C * (1.0 - 1e-12):
        raise ProfileError(f"extraction needs T0 >= 2C, got T0 = {T0:g}, C = {C:g}")
    margin = 0.5 * C if margin is None else margin
    tol = DESC_TOL_FACTOR * (h / C) ** 2 if tol is None else tol

    steps = max(2, round(2.0 * C / h))
    s_grid = Grid1D(-C, C, steps + 1)
    s = s_grid.nodes
    F = slice_.sample(center + s - T0)
    G = slice_.sample(center + T0 - s)

    y = slice_.x - center
    inner = np.abs(y) <= T0 - C - margin
    if not inner.any():
        raise ProfileError("no nodes left for the interior average; reduce the margin")
    alpha = slice_.values[inner].mean(axis=0)
    alpha /= np.linalg.norm(alpha)

    draft = AsymptoticProfile(C, s_grid, F, G, alpha, 0.0, T0)
    residual = float(
        np.max(np.abs(_five_piece(draft, slice_.x, T0, center) - slice_.values))
    )
    _logger.info(
        f"extracted profile at T0 = {T0:g}: |alpha - e1| = "
        f"{np.linalg.norm(draft.deviation):.6e}, residual = {residual:.3e}"
    )
    if residual > tol:
        raise ProfileError(
            f"slice departs from the travelling-wave description by {residual:.3e} "
            f"(tolerance {tol:.3e}); the strips have not stabilised"
        )
    return AsymptoticProfile(C, s_grid, F, G, alpha, residual, T0)


def synthesize_slice(
    p: AsymptoticProfile,
    T: float,
    *,
    spacing: float | None = None,
    pad: float | None = None,
    center: float = 0.0,
) -> SphereSlice:
    """
    Evaluate the description at time ``T`` on a fresh grid.

    The grid consists of integer multiples of ``spacing`` around
    ``center`` and covers ``[-T - C - pad, T + C + pad]``; when ``T`` is a
    multiple of the spacing the strips are exact copies of F and G.

    Parameters
    ----------
    p : AsymptoticProfile
        The profile.
    T : float
        Time, greater than C.
    spacing : float, optional
        Grid spacing; defaults to the profile spacing (otherwise the
        profile is resampled).
    pad : float, optional
        Extra room on each side; default ``C / 2``.
    center : float
        Centre of the description.

    Returns
    -------
    SphereSlice
        The synthesized slice with support ``center +- (T + C)``.
    """
    if T <= p.C:
        raise ProfileError(f"synthesis needs T > C, got T = {T:g}")
    profile = p if spacing is None else p.resampled(spacing)
    h = profile.s_grid.spacing
    pad = 0.5 * p.C if pad is None else pad
    local = Grid1D.symmetric(T + p.C + pad, h)
    grid = Grid1D(local.x_min + center, local.x_max + center, local.n)
    values = _five_piece(profile, grid.nodes, T, center)
    return SphereSlice(grid, values, T, None, (center - T - p.C, center + T + p.C))


@dataclass(frozen=True)
class ConsistencyReport:
    """
    Flatness of stored slices away from the strips.

    Attributes
    ----------
    outgoing : float
        Largest ``|(d_x + d_t) phi|`` where ``|t + x| >= C``.
    incoming : float
        Largest ``|(d_x - d_t) phi|`` where ``|t - x| >= C``.
    interior : float
        Largest ``|phi - alpha|`` where ``t > |x| + C``.
    """

    outgoing: float
    incoming: float
    interior: float

    def to_dict(self) -> dict[str, float]:
        return {
            "outgoing_residual": self.outgoing,
            "incoming_residual": self.incoming,
            "interior_residual": self.interior,
        }


def consistency_check(ev: Evolution, p: AsymptoticProfile | None = None) -> ConsistencyReport:
    """
    Check the flatness conditions on every stored slice with a velocity.

    Parameters
    ----------
    ev : Evolution
        The evolution.
    p : AsymptoticProfile, optional
        Supplies alpha for the interior check; without it each slice's own
        interior mean is used.
    """
    C, h = ev.half_width, ev.h_step
    edge = C + 2.0 * h
    outgoing = incoming = interior = 0.0
    for s in ev.slices:
        if s.velocity is None:
            continue
        t = abs(s.time)
        y = s.x - ev.center
        phi_x = centered_difference(s.values, h)
        velocity = s.velocity if s.time >= 0.0 else -s.velocity
        plus = np.linalg.norm(phi_x + velocity, axis=1)
        minus = np.linalg.norm(phi_x - velocity, axis=1)
        out_mask = np.abs(t + y) >= edge
        in_mask = np.abs(t - y) >= edge
        if out_mask.any():
            outgoing = max(outgoing, float(np.max(plus[out_mask])))
        if in_mask.any():
            incoming = max(incoming, float(np.max(minus[in_mask])))
        core = np.abs(y) < t - edge
        if core.any():
            if p is not None:
                alpha = p.alpha
            else:
                alpha = normalize_rows(s.values[core].mean(axis=0)[np.newaxis])[0]
            interior = max(interior, float(np.max(np.abs(s.values[core] - alpha))))
    return ConsistencyReport(outgoing, incoming, interior)


def round_trip_error(p: AsymptoticProfile, slice_: SphereSlice, center: float = 0.0) -> float:
    """Distance between a slice and the description evaluated at its nodes."""
    synthetic = evaluate_description(p, slice_.x, abs(slice_.time), center)
    return float(np.max(np.abs(synthetic - slice_.values)))

