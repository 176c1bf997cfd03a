import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.bump import BumpComponent
from core.config import (
    HEAVISIDE_J_MAX,
    HEAVISIDE_J_MIN,
    HEAVISIDE_POINTS,
    KAPPA1,
    KAPPA2,
    PAD_FACTOR,
    QUAD_INTERVALS,
    RESOLUTION_PER_T,
    WINDOW_POINTS_PER_PERIOD,
)
from core.errors import ConfigError, WindowError
from core.fields import SphereSlice
from core.fourier import SpectralDensity, dft_halfline_density
from core.grid import FloatArray, fit_line, quad, quad_sampled, simpson_weights
from core.profile import AsymptoticProfile

_logger: logging.Logger = logging.getLogger(__name__)

_FOUR_PI_SQ: float = 4.0 * math.pi**2


def slice_density(slice_: SphereSlice, pad_factor: int = PAD_FACTOR) -> SpectralDensity:
    """
    Spectral density of ``slice - e1`` resolved to ``dxi <= 1 / (10 T)``.

    Raises
    ------
    TailError
        If the slice is not the same constant at both ends.
    """
    return dft_halfline_density(
        slice_.values,
        slice_.grid,
        pad_factor=pad_factor,
        min_length=RESOLUTION_PER_T * abs(slice_.time),
    )


def sobolev_from_density(density: SpectralDensity, s: float) -> float:
    """``(int |xi|^(2s) |f^|^2 dxi)^(1/2)``; the DC bin is dropped where the weight is singular."""
    if not -1.0 < s < 1.0:
        raise ConfigError(f"Sobolev order must lie in (-1, 1), got {s!r}")
    value = density.integrate(lambda xi: xi ** (2.0 * s), include_dc=s >= 0.0)
    return math.sqrt(max(value, 0.0))


def besov_blocks(density: SpectralDensity, s: float = 0.5) -> list[tuple[int, float]]:
    """
    Dyadic block values ``2^(j s) (int_{2^j <= |xi| < 2^(j+1)} |f^|^2)^(1/2)``.

    Only annuli containing at least one resolved frequency are reported.
    """
    positive = density.freqs[1:]
    if positive.size == 0:
        return []
    j_lo = math.floor(math.log2(positive[0]))
    j_hi = math.floor(math.log2(positive[-1]))
    blocks: list[tuple[int, float]] = []
    for j in range(j_lo, j_hi + 1):
        mask = density.annulus(j)
        if not mask.any():
            continue
        mass = density.integrate(mask=mask, include_dc=False)
        blocks.append((j, 2.0 ** (j * s) * math.sqrt(max(mass, 0.0))))
    return blocks


def besov_from_density(density: SpectralDensity, s: float = 0.5) -> tuple[float, list[tuple[int, float]]]:
    blocks = besov_blocks(density, s)
    return math.fsum(value for _, value in blocks), blocks


def sobolev_norm(slice_: SphereSlice, s: float = 0.5) -> float:
    """
    Homogeneous Sobolev norm of ``slice - e1``.

    For ``s = 1/2`` this equals the ``H^(-1/2)`` norm of the spatial
    derivative, ``(int |(phi_x)^|^2 / (4 pi^2 |xi|))^(1/2)``.

    Parameters
    ----------
    slice_ : SphereSlice
        A slice equal to the same constant at both ends.
    s : float
        Order in (-1, 1).

    Returns
    -------
    float
        The norm; 0 for a constant slice.
    """
    return sobolev_from_density(slice_density(slice_), s)


def besov_norm(slice_: SphereSlice) -> tuple[float, list[tuple[int, float]]]:
    """
    The ``B^(1/2,1)_2`` norm of ``slice - e1`` and its dyadic blocks.

    Blocks are sharp annuli ``2^j <= |xi| < 2^(j+1)``.
    """
    return besov_from_density(slice_density(slice_), 0.5)


@dataclass(frozen=True)
class NormReport:
    """
    Critical norms of one slice.

    Attributes
    ----------
    T : float
        Slice time.
    hdot_half : float
        The ``H^(1/2)`` norm.
    besov : float
        The ``B^(1/2,1)_2`` norm.
    blocks : tuple of (int, float)
        Dyadic block values.
    lower_bound : float or None
        The windowed lower-bound integral, comparable with ``hdot_half**2``.
    kappa1, kappa2 : float
        Window constants.
    """

    T: float
    hdot_half: float
    besov: float
    blocks: tuple[tuple[int, float], ...] = field(default=())
    lower_bound: float | None = None
    kappa1: float = KAPPA1
    kappa2: float = KAPPA2

    @property
    def bound_respected(self) -> bool:
        return self.lower_bound is None or self.lower_bound <= self.hdot_half**2 * (1.0 + 1e-9)

    def row(self) -> list[float]:
        lower = math.nan if self.lower_bound is None else self.lower_bound
        return [self.T, self.hdot_half, self.besov, lower]


def norm_report(
    slice_: SphereSlice,
    profile: AsymptoticProfile | None = None,
    *,
    kappa1: float = KAPPA1,
    kappa2: float = KAPPA2,
) -> NormReport:
    """
    Compute both norms from one transform, plus the lower bound if a
    profile is given and the window is not empty.
    """
    density = slice_density(slice_)
    hdot = sobolev_from_density(density, 0.5)
    besov, blocks = besov_from_density(density, 0.5)
    lower = None
    if profile is not None:
        try:
            lower = lower_bound_integral(profile, abs(slice_.time), kappa1=kappa1, kappa2=kappa2)
        except WindowError as error:
            _logger.warning(f"lower bound skipped at T = {slice_.time:g}: {error}")
    report = NormReport(abs(slice_.time), hdot, besov, tuple(blocks), lower, kappa1, kappa2)
    if not report.bound_respected:
        _logger.warning(
            f"lower bound {lower:.6e} exceeds hdot^2 {hdot**2:.6e} at T = {slice_.time:g}"
        )
    return report


def lower_bound_integral(
    p: AsymptoticProfile,
    T: float,
    *,
    kappa1: float = KAPPA1,
    kappa2: float = KAPPA2,
    points_per_period: int = WINDOW_POINTS_PER_PERIOD,
) -> float:
    """
    Windowed integral of ``|g^|^2 / (4 pi^2 xi)`` over ``[kappa1 / T, kappa2 / C]``.

    ``g^(xi) = e^{2 pi i T xi} A(xi) - e^{-2 pi i T xi} B(-xi)`` is the
    transform of ``phi_x`` at time T, built from the profile transforms.
    Normalised like ``hdot_half**2`` and restricted to positive
    frequencies, so it never exceeds the full squared norm.

    Raises
    ------
    WindowError
        If ``kappa1 / T >= kappa2 / C``.
    """
    lo, hi = kappa1 / T, kappa2 / p.C
    if lo >= hi:
        raise WindowError(
            f"window [{lo:.3e}, {hi:.3e}] is empty for T = {T:g}, C = {p.C:g}"
        )
    step = 1.0 / (2.0 * T * points_per_period)
    intervals = max(8, math.ceil((hi - lo) / step))
    intervals += intervals % 2
    xi = np.linspace(lo, hi, intervals + 1)
    phase = np.exp(2j * np.pi * T * xi)[:, np.newaxis]
    g_hat = phase * p.transform(xi, "F") - np.conj(phase) * p.transform(-xi, "G")
    integrand = np.sum(np.abs(g_hat) ** 2, axis=1) / (_FOUR_PI_SQ * xi)
    return float(quad_sampled(integrand, xi[1] - xi[0]))


@dataclass(frozen=True)
class HeavisideReport:
    """
    Low-frequency behaviour of ``w = D^(-1)((Dh)^2)``.

    Attributes
    ----------
    integral : float
        ``c = int (Dh)^2``.
    blocks : tuple of (int, float)
        Dyadic Besov blocks of ``w`` (j in units of 1/C).
    limit : float
        ``c / (2 pi)``, the value low blocks approach.
    low_spread : float
        ``max / min - 1`` over the four lowest blocks.
    partial_sums : tuple of float
        Running sums of the blocks from the lowest up.
    partial_slope : float
        Fitted growth of the partial sums per block over the low regime.
    spectral_limit : float
        ``2 pi xi |w^(xi)|`` at the lowest frequency, which tends to ``c``.
    """

    integral: float
    blocks: tuple[tuple[int, float], ...]
    limit: float
    low_spread: float
    partial_sums: tuple[float, ...]
    partial_slope: float
    spectral_limit: float

    @property
    def slope_error(self) -> float:
        if self.limit == 0.0:
            return 0.0 if self.partial_slope == 0.0 else math.inf
        return abs(self.partial_slope / self.limit - 1.0)

    def to_dict(self) -> dict[str, float]:
        return {
            "integral": self.integral,
            "limit": self.limit,
            "low_spread": self.low_spread,
            "partial_slope": self.partial_slope,
            "slope_relative_error": self.slope_error,
            "spectral_limit": self.spectral_limit,
        }


def heaviside_demo(
    h: BumpComponent,
    *,
    j_min: int = HEAVISIDE_J_MIN,
    j_max: int | None = None,
    points_per_block: int = HEAVISIDE_POINTS,
    low_blocks: int = 4,
) -> HeavisideReport:
    """
    Show that ``D^(-1)((Dh)^2)`` barely fails to lie in ``B^(1/2,1)_2``.

    ``w^ = q^ / (2 pi i xi)`` with ``q = (h')^2``; ``q^`` is evaluated by
    direct quadrature on each dyadic annulus, so arbitrarily low blocks
    cost the same as high ones.

    Parameters
    ----------
    h : BumpComponent
        Scalar bump.
    j_min : int
        Lowest block, as ``2^j / C``.
    j_max : int, optional
        Highest block; default about ``4 / C``.
    points_per_block : int
        Simpson intervals per annulus.
    low_blocks : int
        How many lowest blocks define the spread.

    Returns
    -------
    HeavisideReport
        Block values, their low-frequency limit and partial-sum growth.
    """
    C = h.C
    j_top = HEAVISIDE_J_MAX if j_max is None else j_max
    x = np.linspace(-C, C, QUAD_INTERVALS + 1)
    weights = simpson_weights(x.size, x[1] - x[0])
    q = h.derivative(x) ** 2
    integral = float(quad(lambda s: h.derivative(s) ** 2, -C, C, QUAD_INTERVALS))

    def q_hat(xi: FloatArray) -> FloatArray:
        return np.exp(-2j * np.pi * np.outer(xi, x)) @ (weights * q)

    blocks: list[tuple[int, float]] = []
    for j in range(j_min, j_top + 1):
        lo, hi = 2.0**j / C, 2.0 ** (j + 1) / C
        xi = np.linspace(lo, hi, points_per_block + 1)
        w_sq = np.abs(q_hat(xi)) ** 2 / (_FOUR_PI_SQ * xi**2)
        mass = 2.0 * float(quad_sampled(w_sq, xi[1] - xi[0]))
        blocks.append((j, math.sqrt(2.0**j / C) * math.sqrt(mass)))

    values = np.array([b for _, b in blocks])
    low = values[:low_blocks]
    spread = float(low.max() / low.min() - 1.0) if low.min() > 0.0 else 0.0
    sums = np.cumsum(values)
    # the 1/xi regime: annuli well below 1/C
    regime = [k for k, (j, _) in enumerate(blocks) if 2.0 ** (j + 1) <= 1.0 / 16.0]
    slope = fit_line(regime, sums[regime]).slope if len(regime) >= 2 else math.nan
    xi0 = np.array([2.0**j_min / C])
    spectral_limit = float(np.abs(q_hat(xi0))[0])
    _logger.info(
        f"heaviside demo: int (h')^2 = {integral:.6e}, lowest block {values[0]:.6e}, "
        f"partial-sum slope {slope:.6e}"
    )
    return HeavisideReport(
        integral,
        tuple(blocks),
        integral / (2.0 * math.pi),
        spread,
        tuple(float(v) for v in sums),
        float(slope),
        spectral_limit,
    )


def translation_gap(slice_: SphereSlice, offset: float) -> float:
    """Relative change of the ``H^(1/2)`` norm under a spatial shift."""
    base = sobolev_norm(slice_)
    moved = sobolev_norm(slice_.shifted(offset))
    return 0.0 if base == 0.0 else abs(moved - base) / base

