import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.bump import BumpComponent, BumpProfile
from core.config import (
    DEFAULT_BUMP,
    DEFAULT_STEPS_PER_C,
    DEGENERATE_RATIO,
    EPS_MAX,
    QUAD_INTERVALS,
)
from core.errors import DataSpecError, DegenerateBumpError, SupportLeakError
from core.fields import SphereSlice
from core.grid import FloatArray, Grid1D, centered_difference, quad

_logger: logging.Logger = logging.getLogger(__name__)

BUMP_SHAPES: dict[str, tuple[float, float]] = {
    "asym": (0.5, 0.5),
    "even": (1.0, 0.0),
}


def _shape_coefficients(shape: str) -> tuple[float, float]:
    try:
        return BUMP_SHAPES[shape]
    except KeyError:
        raise DataSpecError(
            f"unknown bump shape {shape!r}; choose one of {sorted(BUMP_SHAPES)}"
        ) from None


def cubic_witness(h3: BumpComponent, n: int = QUAD_INTERVALS) -> tuple[float, float]:
    """
    Return ``(int (h3')^3, scale)`` over the support of ``h3``.

    ``scale`` is ``2 C max|h3'|^3``, the size the integral is compared with.
    """
    C = h3.C
    grid = np.linspace(-C, C, n + 1)
    peak = float(np.max(np.abs(h3.derivative(grid))))
    value = quad(lambda x: h3.derivative(x) ** 3, -C, C, n)
    return float(value), 2.0 * C * peak**3


def make_bump_pair(C: float, shape: str = DEFAULT_BUMP) -> BumpProfile:
    """
    Build the canonical pair ``(h2, h3)`` with ``h2 = h3'``.

    Parameters
    ----------
    C : float
        Support half-width.
    shape : str
        Bump shape id; ``"asym"`` is the default asymmetric bump.

    Returns
    -------
    BumpProfile
        Components ``(h2, h3)`` in the e2 and e3 slots. The cubic witness
        ``int (h3')^3`` is stored in ``metadata``.

    Raises
    ------
    DegenerateBumpError
        If ``|int (h3')^3|`` is below ``1e-6`` of its scale, as for every
        even bump.
    """
    if C <= 0.0:
        raise DataSpecError(f"C must be positive, got {C!r}")
    offset, slope = _shape_coefficients(shape)
    h3 = BumpComponent(C, offset=offset, slope=slope, label="h3")
    h2 = h3.differentiated(label="h2")

    witness, scale = cubic_witness(h3)
    if abs(witness) < DEGENERATE_RATIO * scale:
        raise DegenerateBumpError("int (h3')^3", witness)
    _logger.info(f"bump pair '{shape}' with C={C:g}: int (h3')^3 = {witness:.12e}")
    return BumpProfile(
        C, (h2, h3), target_dim=2, name=shape, metadata={"cubic_witness": witness}
    )


def circle_bump(C: float, shape: str = DEFAULT_BUMP) -> BumpProfile:
    """The scalar phase profile used for circle-target (m = 2) data."""
    offset, slope = _shape_coefficients(shape)
    return BumpProfile(
        C, (BumpComponent(C, offset=offset, slope=slope, label="theta"),), 1, shape
    )


@dataclass(frozen=True)
class DataSpec:
    """
    Parameters of the counterexample initial data.

    Attributes
    ----------
    C : float
        Support half-width.
    eps : float
        Amplitude; negative values are allowed for parity checks.
    m : int
        Target dimension (2 for the circle oracle).
    bump : BumpProfile
        The profile ``h`` with ``target_dim == m - 1``.
    truncation : int or None
        Number of series terms, or None for the closed-form resummation.
    eps_max : float
        Largest admissible ``|eps|``.
    """

    C: float
    eps: float
    m: int
    bump: BumpProfile = field(repr=False)
    truncation: int | None = None
    eps_max: float = EPS_MAX

    def __post_init__(self) -> None:
        if self.C <= 0.0:
            raise DataSpecError(f"C must be positive, got {self.C!r}")
        if abs(self.eps) > self.eps_max:
            raise DataSpecError(
                f"|eps| = {abs(self.eps):g} exceeds eps_max = {self.eps_max:g}"
            )
        if self.m < 2:
            raise DataSpecError(f"target dimension must be at least 2, got {self.m}")
        if self.bump.target_dim != self.m - 1:
            raise DataSpecError(
                f"bump with {self.bump.target_dim} components does not fit m = {self.m}"
            )
        if self.m > 2 and self.bump.nonzero_components < 2:
            raise DataSpecError("targets with m > 2 need at least two nonzero components")
        if not math.isclose(self.bump.C, self.C):
            raise DataSpecError("bump half-width differs from C")
        if self.truncation is not None and self.truncation < 0:
            raise DataSpecError("truncation must be a non-negative term count")

    @classmethod
    def canonical(
        cls,
        C: float,
        eps: float,
        m: int,
        truncation: int | None = None,
        shape: str = DEFAULT_BUMP,
    ) -> "DataSpec":
        """
        The standard data: circle phase for m = 2, ``(h2, h3)`` otherwise.
        """
        if m == 2:
            bump = circle_bump(C, shape)
        else:
            bump = make_bump_pair(C, shape).padded(m - 1)
        return cls(C, eps, m, bump, truncation)

    @property
    def bump_id(self) -> str:
        return self.bump.name

    def default_grid(self) -> Grid1D:
        return Grid1D.symmetric(2.0 * self.C, self.C / DEFAULT_STEPS_PER_C)


def _truncated_series(eps: float, h: FloatArray, terms: int) -> FloatArray:
    """
    Partial sum ``sum_{n <= terms} eps^n / n! h^n`` with the even/odd rule.

    Powers are ``h^(2k) = (-1)^k |h|^(2k) e1`` and
    ``h^(2k+1) = (-1)^k |h|^(2k) h``.
    """
    r2 = np.sum(h * h, axis=1)
    out = np.zeros((h.shape[0], h.shape[1] + 1))
    for n in range(terms + 1):
        k, odd = divmod(n, 2)
        coeff = eps**n / math.factorial(n) * (-1.0) ** k * r2**k
        if odd:
            out[:, 1:] += coeff[:, np.newaxis] * h
        else:
            out[:, 0] += coeff
    return out


def build_initial_data(
    spec: DataSpec,
    grid: Grid1D | None = None,
    *,
    center: float = 0.0,
    scale: float = 1.0,
) -> SphereSlice:
    """
    Sample the initial data ``f`` on a grid.

    The closed form is ``f = cos(eps |h|) e1 + eps sinc(eps |h|) h``, which is
    exactly the resummed series and equals e1 wherever ``h = 0``.

    Parameters
    ----------
    spec : DataSpec
        The data parameters.
    grid : Grid1D, optional
        Sampling grid; defaults to ``spec.default_grid()``.
    center : float
        The data are ``f((x - center) / scale)``.
    scale : float
        Spatial dilation of the data.

    Returns
    -------
    SphereSlice
        The data at time 0 with support ``center +- scale * C``.
    """
    grid = grid or spec.default_grid()
    if scale <= 0.0:
        raise DataSpecError(f"scale must be positive, got {scale!r}")
    y = (grid.nodes - center) / scale
    h = spec.bump.values(y)

    if spec.truncation is None:
        r = np.linalg.norm(h, axis=1)
        values = np.empty((grid.n, spec.m))
        values[:, 0] = np.cos(spec.eps * r)
        values[:, 1:] = (spec.eps * np.sinc(spec.eps * r / np.pi))[:, np.newaxis] * h
    else:
        values = _truncated_series(spec.eps, h, spec.truncation)

    support = (center - scale * spec.C, center + scale * spec.C)
    return SphereSlice(grid, values, 0.0, np.zeros_like(values), support)


@dataclass(frozen=True)
class SmallnessReport:
    """
    Size of the data relative to its amplitude.

    Attributes
    ----------
    max_deviation : float
        ``max |f - e1|``.
    max_gradient : float
        ``C max |d/dx (f - e1)|``.
    deviation_bound, gradient_bound : float
        ``2 |eps| max|h|`` and ``2 |eps| C max|h'|``.
    support_leak : float
        ``max |f - e1|`` outside [-C, C].
    """

    max_deviation: float
    max_gradient: float
    deviation_bound: float
    gradient_bound: float
    support_leak: float

    @property
    def passed(self) -> bool:
        return (
            self.max_deviation <= self.deviation_bound
            and self.max_gradient <= self.gradient_bound
            and self.support_leak == 0.0
        )

    def to_dict(self) -> dict[str, float | bool]:
        return {
            "max_deviation": self.max_deviation,
            "max_gradient": self.max_gradient,
            "deviation_bound": self.deviation_bound,
            "gradient_bound": self.gradient_bound,
            "support_leak": self.support_leak,
            "passed": self.passed,
        }


def smallness_check(
    f: SphereSlice, eps: float, bump: BumpProfile | None = None
) -> SmallnessReport:
    """
    Measure ``|f - e1|`` and its scaled gradient against ``eps``.

    Parameters
    ----------
    f : SphereSlice
        Initial data with a declared support.
    eps : float
        The amplitude used to build ``f``.
    bump : BumpProfile, optional
        The profile ``h``; its sup norms set the bounds. Without it the
        bounds use a unit profile scale.

    Returns
    -------
    SmallnessReport
        Measured sizes and bounds.

    Raises
    ------
    SupportLeakError
        If ``f`` differs from e1 outside its declared support.
    """
    deviation = f.deviation()
    gradient = centered_difference(deviation, f.grid.spacing)
    lo, hi = f.support if f.support is not None else (f.grid.x_min, f.grid.x_max)
    half_width = 0.5 * (hi - lo)

    leak = f.support_defect()
    if leak > 0.0:
        raise SupportLeakError(
            f"data differ from e1 by {leak:.3e} outside [{lo:g}, {hi:g}]"
        )

    if bump is not None:
        probe = np.linspace(-bump.C, bump.C, 4097)
        h_scale = float(np.max(np.linalg.norm(bump.values(probe), axis=1)))
        dh_scale = float(np.max(np.linalg.norm(bump.values(probe, 1), axis=1)))
        dh_scale *= bump.C / half_width
    else:
        h_scale = dh_scale = 1.0

    return SmallnessReport(
        max_deviation=float(np.max(np.linalg.norm(deviation, axis=1))),
        max_gradient=half_width * float(np.max(np.linalg.norm(gradient, axis=1))),
        deviation_bound=2.0 * abs(eps) * h_scale,
        gradient_bound=2.0 * abs(eps) * half_width * dh_scale,
        support_leak=leak,
    )


def truncation_bound(spec: DataSpec) -> float:
    """Remainder bound ``(|eps| max|h|)^(N+1) / (N+1)!`` of the truncated series."""
    if spec.truncation is None:
        return 0.0
    probe = np.linspace(-spec.C, spec.C, 4097)
    amplitude = abs(spec.eps) * float(
        np.max(np.linalg.norm(spec.bump.values(probe), axis=1))
    )
    n = spec.truncation + 1
    return amplitude**n / math.factorial(n)
