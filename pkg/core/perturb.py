import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from core.bump import BumpComponent, BumpProfile
from core.config import (
    DEGENERATE_RATIO,
    KAPPA_CANDIDATE,
    KAPPA_RTOL,
    NULL_STEPS_PER_C,
    QUAD_INTERVALS,
    TOL_IDENTITY,
    TOL_LEMMA,
)
from core.data import DataSpec
from core.errors import DataSpecError, DegenerateBumpError, IdentityError
from core.evolve import march_null_lattice
from core.fields import NullField
from core.grid import FloatArray, Grid1D, cumquad, quad, quad_sampled, richardson

_logger: logging.Logger = logging.getLogger(__name__)

# Oversampling of the lattice when accumulating H
_H_REFINE: int = 8


def _pair(bump: BumpProfile) -> tuple[BumpComponent, BumpComponent]:
    if len(bump.components) < 2:
        raise DataSpecError("the perturbation analysis needs a pair (h2, h3)")
    return bump.components[0], bump.components[1]


class PerturbationSeries:
    """
    Closed forms of the first three orders of the small-amplitude expansion.

    With ``phi = e1 + eps phi1 + eps^2 phi2 + eps^3 phi3 + ...`` on the
    null square ``[-C, C]^2``::

        phi1 = (h(u) + h(v)) / 2
        phi2 = -|h(u) + h(v)|^2 e1 / 8
        phi3 = -(|h(u)|^2 h(u) + |h(v)|^2 h(v)) / 12
               + (H(u) - H(v)) (h(u) - h(v))

    where ``H' = h h'^T / 8`` and ``H(-C) = 0``. Everything is evaluated on
    a tensor lattice of spacing ``delta``; odd orders live in the span of
    e2..em and ``phi2`` along e1.

    Parameters
    ----------
    bump : BumpProfile
        The profile ``h``.
    delta : float
        Lattice spacing; ``2 C / delta`` must be a whole number.
    """

    def __init__(self, bump: BumpProfile, delta: float | None = None) -> None:
        self.bump: BumpProfile = bump
        self.C: float = bump.C
        delta = bump.C / NULL_STEPS_PER_C if delta is None else delta
        self.grid: Grid1D = Grid1D.symmetric(bump.C, delta)
        if abs(self.grid.x_max - bump.C) > 1e-9 * bump.C:
            raise DataSpecError(f"2C / delta must be a whole number, got delta = {delta!r}")
        x = self.grid.nodes
        self.h: FloatArray = bump.values(x)
        self.dh: FloatArray = bump.values(x, 1)

        fine = Grid1D(self.grid.x_min, self.grid.x_max, _H_REFINE * (self.grid.n - 1) + 1)
        running = cumquad(
            lambda s: 0.125 * np.einsum("ni,nj->nij", bump.values(s), bump.values(s, 1)),
            -bump.C,
            fine,
        )
        self.H: FloatArray = running[::_H_REFINE]

    @property
    def delta(self) -> float:
        return self.grid.spacing

    @property
    def m(self) -> int:
        return self.bump.target_dim + 1

    def _embed(self, inner: FloatArray, e1_part: FloatArray | None = None) -> FloatArray:
        shape = inner.shape[:-1] + (self.m,)
        out = np.zeros(shape)
        out[..., 1:] = inner
        if e1_part is not None:
            out[..., 0] = e1_part
        return out

    def _field(self, values: FloatArray) -> NullField:
        return NullField(self.grid, self.grid, values, symmetric=True)

    def phi1_inner(self) -> FloatArray:
        return 0.5 * (self.h[:, np.newaxis, :] + self.h[np.newaxis, :, :])

    def phi2_scalar(self) -> FloatArray:
        total = self.h[:, np.newaxis, :] + self.h[np.newaxis, :, :]
        return -0.125 * np.sum(total * total, axis=2)

    def phi3_inner(self) -> FloatArray:
        h, H = self.h, self.H
        cubic = np.sum(h * h, axis=1)[:, np.newaxis] * h / 12.0
        Hh = np.einsum("nij,nj->ni", H, h)
        cross_uv = np.einsum("uij,vj->uvi", H, h)
        mixed = (
            Hh[:, np.newaxis, :]
            + Hh[np.newaxis, :, :]
            - cross_uv
            - cross_uv.transpose(1, 0, 2)
        )
        return -(cubic[:, np.newaxis, :] + cubic[np.newaxis, :, :]) + mixed

    def phi1(self) -> NullField:
        return self._field(self._embed(self.phi1_inner()))

    def phi2(self) -> NullField:
        zeros = np.zeros(self.h.shape[:1] * 2 + self.h.shape[1:])
        return self._field(self._embed(zeros, self.phi2_scalar()))

    def phi3(self) -> NullField:
        return self._field(self._embed(self.phi3_inner()))

    def phi3_u_inner(self) -> FloatArray:
        """Closed-form ``d phi3 / du`` on the lattice."""
        h, dh, H = self.h, self.dh, self.H
        a = np.sum(h * dh, axis=1)
        r2 = np.sum(h * h, axis=1)
        single = -(2.0 * a[:, np.newaxis] * h + r2[:, np.newaxis] * dh) / 12.0
        gram = h @ dh.T  # gram[i, j] = h_i . h'_j
        projector = 0.125 * h[:, np.newaxis, :] * (a[:, np.newaxis] - gram.T)[:, :, np.newaxis]
        Hdh = np.einsum("nij,nj->ni", H, dh)
        cross = np.einsum("vij,uj->uvi", H, dh)
        return single[:, np.newaxis, :] + projector + Hdh[:, np.newaxis, :] - cross

    def diagonal_data(self, order: int) -> FloatArray:
        """
        Prescribed values ``phi_i(u, u)`` for ``i <= 4``.

        ``h``, ``-|h|^2 e1 / 2``, ``-|h|^2 h / 6`` and ``|h|^4 e1 / 24``.
        """
        r2 = np.sum(self.h * self.h, axis=1)
        if order == 1:
            return self._embed(self.h)
        if order == 2:
            return self._embed(np.zeros_like(self.h), -0.5 * r2)
        if order == 3:
            return self._embed(-r2[:, np.newaxis] * self.h / 6.0)
        if order == 4:
            return self._embed(np.zeros_like(self.h), r2 * r2 / 24.0)
        raise ValueError(f"diagonal data are defined for orders 1 to 4, not {order}")

    def diagonal_defect(self, order: int) -> float:
        """Largest ``|phi_i(u, u) - data|`` for ``i <= 3``."""
        values = {1: self.phi1, 2: self.phi2, 3: self.phi3}[order]().values
        diag = values[np.arange(self.grid.n), np.arange(self.grid.n)]
        return float(np.max(np.abs(diag - self.diagonal_data(order))))

    def hierarchy_rhs(self, order: int) -> tuple[FloatArray, float]:
        """
        Right-hand side of the order-``i`` equation on interior nodes, and
        the size of the parity term dropped from it.
        """
        inner = slice(1, -1)
        h, dh = self.h[inner], self.dh[inner]
        dots = dh @ dh.T
        n = h.shape[0]
        if order == 1:
            return np.zeros((n, n, self.m)), 0.0
        if order == 2:
            return self._embed(np.zeros((n, n, h.shape[1])), -0.25 * dots), 0.0
        if order == 3:
            phi1 = 0.5 * (h[:, np.newaxis, :] + h[np.newaxis, :, :])
            rhs = self._embed(-0.25 * phi1 * dots[:, :, np.newaxis])
            # phi1_u . phi2_v and phi2_u . phi1_v pair e2..em with e1
            phi1_u = self._embed(0.5 * dh)
            phi2_v_dir = np.zeros(self.m)
            phi2_v_dir[0] = 1.0
            parity = float(np.max(np.abs(phi1_u @ phi2_v_dir)))
            return rhs, parity
        raise ValueError(f"the hierarchy is implemented for orders 1 to 3, not {order}")

    def contradiction_integrand(self) -> FloatArray:
        """
        The quintic part of ``phi (phi_u . phi_v)`` on the lattice (e2..em part).

        ``phi1 (phi1_u.phi3_v + phi2_u.phi2_v + phi3_u.phi1_v) + phi3 (phi1_u.phi1_v)``;
        every other product pairs an odd order with an even one and vanishes.
        """
        h, dh = self.h, self.dh
        a = np.sum(h * dh, axis=1)
        gram = h @ dh.T
        s2u = -0.25 * (a[:, np.newaxis] + gram.T)
        s2v = -0.25 * (a[np.newaxis, :] + gram)
        phi3_u = self.phi3_u_inner()
        phi3_v = phi3_u.transpose(1, 0, 2)
        d13 = 0.5 * np.einsum("ui,uvi->uv", dh, phi3_v)
        d31 = 0.5 * np.einsum("uvi,vi->uv", phi3_u, dh)
        d11 = 0.25 * (dh @ dh.T)
        scalar = d13 + s2u * s2v + d31
        return self.phi1_inner() * scalar[:, :, np.newaxis] + self.phi3_inner() * d11[:, :, np.newaxis]


@dataclass(frozen=True)
class HierarchyResidual:
    """
    Finite-difference residual of one order of the hierarchy.

    Attributes
    ----------
    order : int
        Perturbation order (1 to 3).
    delta : float
        Lattice spacing.
    residual : float
        ``max |mixed difference - right-hand side|`` at spacing ``delta``.
    fine_residual : float
        The same at ``delta / 2``.
    extrapolated : float
        Residual of the Richardson-combined mixed difference.
    parity_term : float
        Size of the dropped parity term (zero by orthogonality).
    """

    order: int
    delta: float
    residual: float
    fine_residual: float
    extrapolated: float
    parity_term: float

    @property
    def ratio(self) -> float:
        return math.inf if self.fine_residual == 0.0 else self.residual / self.fine_residual


def _mixed_residual(series: PerturbationSeries, order: int) -> tuple[FloatArray, FloatArray, float]:
    values = {1: series.phi1, 2: series.phi2, 3: series.phi3}[order]()
    rhs, parity = series.hierarchy_rhs(order)
    lhs = values.mixed_difference()
    return lhs, rhs, parity


def check_hierarchy(bump: BumpProfile, order: int, delta: float | None = None) -> HierarchyResidual:
    """
    Compare the mixed difference of ``phi_i`` with its equation at two spacings.

    Parameters
    ----------
    bump : BumpProfile
        The profile ``h``.
    order : int
        1, 2 or 3.
    delta : float, optional
        Coarse spacing; default ``C / 512``.

    Returns
    -------
    HierarchyResidual
        Residuals at ``delta`` and ``delta / 2`` and after extrapolation.
    """
    coarse = PerturbationSeries(bump, delta)
    fine = PerturbationSeries(bump, coarse.delta / 2.0)
    lhs_c, rhs_c, parity = _mixed_residual(coarse, order)
    lhs_f, rhs_f, _ = _mixed_residual(fine, order)
    combined = richardson(lhs_c, lhs_f[1::2, 1::2])
    result = HierarchyResidual(
        order=order,
        delta=coarse.delta,
        residual=float(np.max(np.abs(lhs_c - rhs_c))),
        fine_residual=float(np.max(np.abs(lhs_f - rhs_f))),
        extrapolated=float(np.max(np.abs(combined - rhs_c))),
        parity_term=parity,
    )
    _logger.info(
        f"hierarchy order {order}: residual {result.residual:.3e} -> "
        f"{result.fine_residual:.3e} (extrapolated {result.extrapolated:.3e})"
    )
    return result


@dataclass(frozen=True)
class LemmaRecord:
    """
    The boundary identity ``(phi1 . phi3)(u, C) = (phi1 . phi3)(u, -C)``.

    Attributes
    ----------
    residual : float
        Largest difference of the two sides over ``u``.
    reduced : float
        Largest ``|h(u) . H(C) h(u)| / 2``, the reduced form.
    antisymmetry : float
        ``max |H(C) + H(C)^T|`` with ``H(C)`` from a fine quadrature.
    scale : float
        ``max |phi1| max |phi3|``, the size the residual is compared with.
    H_C : ndarray
        The matrix ``H(C)``.
    """

    residual: float
    reduced: float
    antisymmetry: float
    scale: float
    H_C: FloatArray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.residual <= TOL_LEMMA * self.scale


def h_at_c(bump: BumpProfile, n: int = QUAD_INTERVALS) -> FloatArray:
    """``H(C) = int h h'^T / 8`` by Simpson quadrature."""
    value = quad(
        lambda s: 0.125 * np.einsum("ni,nj->nij", bump.values(s), bump.values(s, 1)),
        -bump.C,
        bump.C,
        n,
    )
    return np.asarray(value)


def check_lemma_record(bump: BumpProfile, delta: float | None = None) -> LemmaRecord:
    """Evaluate both sides of the boundary identity from the closed forms."""
    series = PerturbationSeries(bump, delta)
    phi1 = series.phi1().values
    phi3 = series.phi3().values
    products = np.sum(phi1 * phi3, axis=2)
    residual = float(np.max(np.abs(products[:, -1] - products[:, 0])))
    H_C = h_at_c(bump)
    reduced = float(np.max(np.abs(0.5 * np.einsum("ni,ij,nj->n", series.h, H_C, series.h))))
    scale = float(np.max(np.abs(phi1)) * np.max(np.abs(phi3)))
    record = LemmaRecord(residual, reduced, float(np.max(np.abs(H_C + H_C.T))), scale, H_C)
    _logger.info(
        f"boundary record residual {residual:.3e} (scale {scale:.3e}), "
        f"H(C) asymmetry {record.antisymmetry:.3e}"
    )
    return record


@dataclass(frozen=True)
class Quadratures:
    """
    The four integrals of the quintic obstruction.

    Attributes
    ----------
    A, B, D, E : float
        ``int h2 h3'``, ``int h3 h2'``, ``int h2 h2' h3``, ``int h2^2 h3'``.
    scale_ab, scale_de : float
        ``int |h2 h3'| + int |h3 h2'|`` and ``int |h2 h2' h3| + int |h2^2 h3'|``.
    mean_zero : dict
        Integrals of the exact derivatives that the reduction drops.
    """

    A: float
    B: float
    D: float
    E: float
    scale_ab: float
    scale_de: float
    mean_zero: dict[str, float] = field(default_factory=dict)

    @property
    def da_combination(self) -> float:
        A, B, D, E = self.A, self.B, self.D, self.E
        return D * A + E * B + A * D + E * A + D * B + A * E

    @property
    def da_gap(self) -> float:
        return abs(self.da_combination - 0.5 * self.A * self.E)

    def to_dict(self) -> dict[str, float]:
        out = {
            "A": self.A,
            "B": self.B,
            "D": self.D,
            "E": self.E,
            "A_plus_B": self.A + self.B,
            "D_plus_half_E": self.D + 0.5 * self.E,
            "da_gap": self.da_gap,
        }
        out.update({f"mean_zero_{k}": v for k, v in self.mean_zero.items()})
        return out


def quadratures_ABDE(bump: BumpProfile, n: int = QUAD_INTERVALS) -> Quadratures:
    """
    Compute A, B, D, E and assert ``B = -A`` and ``D = -E/2``.

    Raises
    ------
    IdentityError
        If an identity misses its tolerance.
    DegenerateBumpError
        If A or E is too small for the pair to witness the obstruction.
    """
    h2, h3 = _pair(bump)
    C = bump.C

    def integral(fn: Callable[[FloatArray], ArrayLike]) -> float:
        return float(quad(fn, -C, C, n))

    A = integral(lambda x: h2(x) * h3.derivative(x))
    B = integral(lambda x: h3(x) * h2.derivative(x))
    D = integral(lambda x: h2(x) * h2.derivative(x) * h3(x))
    E = integral(lambda x: h2(x) ** 2 * h3.derivative(x))
    scale_ab = integral(lambda x: np.abs(h2(x) * h3.derivative(x))) + integral(
        lambda x: np.abs(h3(x) * h2.derivative(x))
    )
    scale_de = integral(lambda x: np.abs(h2(x) * h2.derivative(x) * h3(x))) + integral(
        lambda x: np.abs(h2(x) ** 2 * h3.derivative(x))
    )
    mean_zero = {
        "h2p": integral(h2.derivative),
        "h3p": integral(h3.derivative),
        "h2h2p": integral(lambda x: h2(x) * h2.derivative(x)),
        "h3h3p": integral(lambda x: h3(x) * h3.derivative(x)),
        "h2sq_h2p": integral(lambda x: h2(x) ** 2 * h2.derivative(x)),
        "h3sq_h3p": integral(lambda x: h3(x) ** 2 * h3.derivative(x)),
    }
    quads = Quadratures(A, B, D, E, scale_ab, scale_de, mean_zero)

    if abs(A + B) > TOL_IDENTITY * scale_ab:
        raise IdentityError(f"B = -A fails: A + B = {A + B:.3e}")
    if abs(D + 0.5 * E) > TOL_IDENTITY * scale_de:
        raise IdentityError(f"D = -E/2 fails: D + E/2 = {D + 0.5 * E:.3e}")
    if abs(A) < DEGENERATE_RATIO * scale_ab:
        raise DegenerateBumpError("A", A)
    if abs(E) < DEGENERATE_RATIO * scale_de:
        raise DegenerateBumpError("E", E)
    _logger.info(f"A = {A:.12e}, B = {B:.12e}, D = {D:.12e}, E = {E:.12e}")
    return quads


@dataclass(frozen=True)
class AlphaPrediction:
    """
    Predicted ``eps^5`` coefficient of ``alpha - e1``.

    Attributes
    ----------
    kappa : float
        Constant in ``c5 . e2 = kappa A E``.
    closed_form_e2 : float
        ``kappa A E``.
    c5 : ndarray
        The full coefficient vector from quadrature of the closed forms.
    relative_gap : float
        ``|c5 . e2 - kappa A E| / |c5 . e2|``.
    """

    kappa: float
    closed_form_e2: float
    c5: FloatArray
    relative_gap: float

    @property
    def resolved(self) -> bool:
        return self.relative_gap <= KAPPA_RTOL


def quintic_coefficient(bump: BumpProfile, delta: float | None = None) -> FloatArray:
    """
    ``c5 = (1/2) int int [quintic part of phi (phi_u . phi_v)] du dv``.

    Uses ``int int phi_uv = 2 (e1 - alpha)`` over the null square, so
    ``alpha - e1 = (1/2) int int phi (phi_u . phi_v)``.
    """
    series = PerturbationSeries(bump, bump.C / 256.0 if delta is None else delta)
    integrand = series.contradiction_integrand()
    inner = quad_sampled(quad_sampled(integrand, series.delta, axis=0), series.delta, axis=0)
    c5 = np.zeros(series.m)
    c5[1:] = 0.5 * np.asarray(inner)
    return c5


def predicted_alpha_coefficient(
    bump: BumpProfile,
    quads: Quadratures | None = None,
    kappa: float = KAPPA_CANDIDATE,
    delta: float | None = None,
) -> AlphaPrediction:
    """
    Compare the closed form ``kappa A E`` with direct quadrature of c5.

    A disagreement beyond the tolerance is logged and flagged as
    unresolved; both values are kept.
    """
    quads = quads or quadratures_ABDE(bump)
    closed = kappa * quads.A * quads.E
    c5 = quintic_coefficient(bump, delta)
    brute = float(c5[1])
    gap = 0.0 if brute == closed else abs(brute - closed) / max(abs(brute), abs(closed))
    prediction = AlphaPrediction(kappa, closed, c5, gap)
    if not prediction.resolved:
        _logger.warning(
            f"kappa unresolved: kappa*A*E = {closed:.6e}, quadrature gives {brute:.6e}"
        )
    else:
        _logger.info(f"c5 . e2 = {closed:.6e} (quadrature {brute:.6e})")
    return prediction


@dataclass(frozen=True)
class KappaCalibration:
    """
    Comparison of a fitted quintic coefficient with ``kappa A E``.

    Attributes
    ----------
    candidate : float
        The kappa under test.
    empirical : float
        ``fitted / (A E)``.
    gap : float
        Relative difference of the two.
    resolved : bool
        Whether they agree within the tolerance.
    """

    candidate: float
    empirical: float
    gap: float
    resolved: bool

    def to_dict(self) -> dict[str, float | bool]:
        return {
            "kappa_candidate": self.candidate,
            "kappa_empirical": self.empirical,
            "kappa_gap": self.gap,
            "kappa_resolved": self.resolved,
        }


def calibrate_kappa(
    fitted: float,
    A: float,
    E: float,
    kappa: float = KAPPA_CANDIDATE,
    rtol: float = KAPPA_RTOL,
) -> KappaCalibration:
    """Check a fitted ``eps^5`` coefficient against ``kappa A E``."""
    product = A * E
    if product == 0.0:
        return KappaCalibration(kappa, math.nan, math.nan, fitted == 0.0)
    empirical = fitted / product
    gap = abs(empirical - kappa) / abs(kappa)
    calibration = KappaCalibration(kappa, empirical, gap, gap <= rtol)
    if not calibration.resolved:
        _logger.warning(
            f"kappa unresolved: candidate {kappa:.6g}, empirical {empirical:.6g}"
        )
    return calibration


@dataclass(frozen=True)
class ParityResiduals:
    """
    Parity structure of marched solutions at ``+eps`` and ``-eps``.

    Attributes
    ----------
    eps : float
        Amplitude.
    odd_e1 : float
        ``max |e1 . odd part|``.
    even_orthogonal : float
        ``max |e2..em part of the even part|``.
    odd_remainder : float
        ``max |odd part - eps phi1 - eps^3 phi3|``, of order ``eps^5``.
    phi1_mismatch : float
        ``max |odd part / eps - phi1|``, of order ``eps^2``.
    """

    eps: float
    odd_e1: float
    even_orthogonal: float
    odd_remainder: float
    phi1_mismatch: float

    def to_dict(self) -> dict[str, float]:
        return {
            "parity_eps": self.eps,
            "parity_odd_e1": self.odd_e1,
            "parity_even_orthogonal": self.even_orthogonal,
            "parity_odd_remainder": self.odd_remainder,
            "parity_phi1_mismatch": self.phi1_mismatch,
        }


def parity_check(
    bump: BumpProfile,
    eps: float,
    plus: NullField,
    minus: NullField,
    plus_fine: NullField | None = None,
    minus_fine: NullField | None = None,
) -> ParityResiduals:
    """
    Split marched solutions into odd and even parts in ``eps``.

    Parameters
    ----------
    bump : BumpProfile
        The profile the solutions were built from.
    eps : float
        The amplitude of ``plus``; ``minus`` used ``-eps``.
    plus, minus : NullField
        Marched fields on the same lattice.
    plus_fine, minus_fine : NullField, optional
        The same at half the spacing; when given, the odd part is
        Richardson-combined before comparing with the closed forms.
    """
    if eps == 0.0:
        return ParityResiduals(0.0, 0.0, 0.0, 0.0, 0.0)
    odd = 0.5 * (plus.values - minus.values)
    even = 0.5 * (plus.values + minus.values)
    if plus_fine is not None and minus_fine is not None:
        fine_odd = 0.5 * (plus_fine.values - minus_fine.values)[::2, ::2]
        odd_model = richardson(odd, fine_odd)
    else:
        odd_model = odd
    series = PerturbationSeries(bump, plus.u_grid.spacing)
    phi1 = series.phi1().values
    phi3 = series.phi3().values
    return ParityResiduals(
        eps=eps,
        odd_e1=float(np.max(np.abs(odd[..., 0]))),
        even_orthogonal=float(np.max(np.abs(even[..., 1:]))),
        odd_remainder=float(np.max(np.abs(odd_model - eps * phi1 - eps**3 * phi3))),
        phi1_mismatch=float(np.max(np.abs(odd_model / eps - phi1))),
    )


def parity_study(spec: DataSpec, delta: float) -> ParityResiduals:
    """March ``+eps`` and ``-eps`` at ``delta`` and ``delta / 2`` and check parity."""
    flipped = DataSpec(spec.C, -spec.eps, spec.m, spec.bump, spec.truncation, spec.eps_max)
    fields = []
    for step in (delta, delta / 2.0):
        for data in (spec, flipped):
            march = march_null_lattice(data, step, store=True)
            fields.append(march.field)
    plus, minus, plus_fine, minus_fine = fields
    return parity_check(spec.bump, spec.eps, plus, minus, plus_fine, minus_fine)


@dataclass(frozen=True)
class CornerIdentity:
    """
    ``int int phi (phi_u . phi_v) = 2 (alpha - e1)`` on a marched field.

    Attributes
    ----------
    integral : ndarray
        Left-hand side by Simpson quadrature.
    corner : ndarray
        ``2 (alpha - e1)`` from the corner value.
    residual : float
        Largest component difference.
    """

    integral: FloatArray
    corner: FloatArray
    residual: float


def corner_identity(field_: NullField) -> CornerIdentity:
    """Check the double-integral identity on a marched null field."""
    phi = field_.values
    phi_u, phi_v = field_.derivatives()
    integrand = phi * np.sum(phi_u * phi_v, axis=2)[:, :, np.newaxis]
    inner = quad_sampled(
        quad_sampled(integrand, field_.u_grid.spacing, axis=0), field_.v_grid.spacing, axis=0
    )
    integral = np.asarray(inner)
    corner = 2.0 * (field_.corner() - np.eye(field_.m)[0])
    return CornerIdentity(integral, corner, float(np.max(np.abs(integral - corner))))


@dataclass(frozen=True)
class PerturbationReport:
    """
    Everything the perturbation analysis measures for one bump pair.

    Attributes
    ----------
    quadratures : Quadratures
        A, B, D, E and the mean-zero integrals.
    lemma : LemmaRecord
        Boundary identity and ``H(C)``.
    hierarchy : tuple of HierarchyResidual
        Residuals for orders 1 to 3.
    diagonal : dict
        Diagonal boundary defects by order.
    prediction : AlphaPrediction
        Predicted ``eps^5`` coefficient.
    parity : ParityResiduals or None
        Parity residuals, when solutions were marched.
    """

    quadratures: Quadratures
    lemma: LemmaRecord
    hierarchy: tuple[HierarchyResidual, ...]
    diagonal: dict[int, float]
    prediction: AlphaPrediction
    parity: ParityResiduals | None = None

    @property
    def A(self) -> float:
        return self.quadratures.A

    @property
    def B(self) -> float:
        return self.quadratures.B

    @property
    def D(self) -> float:
        return self.quadratures.D

    @property
    def E(self) -> float:
        return self.quadratures.E

    @property
    def H_C(self) -> FloatArray:
        return self.lemma.H_C

    @property
    def lemma_residual(self) -> float:
        return self.lemma.residual

    @property
    def predicted_c5(self) -> FloatArray:
        c5 = self.prediction.c5.copy()
        c5[1] = self.prediction.closed_form_e2
        return c5

    def to_record(self) -> dict[str, float | bool | str]:
        record: dict[str, float | bool | str] = dict(self.quadratures.to_dict())
        H = self.lemma.H_C
        for i in range(H.shape[0]):
            for j in range(H.shape[1]):
                record[f"H_C_{i + 2}{j + 2}"] = float(H[i, j])
        record["H_C_asymmetry"] = self.lemma.antisymmetry
        record["lemma_residual"] = self.lemma.residual
        record["lemma_reduced"] = self.lemma.reduced
        record["lemma_scale"] = self.lemma.scale
        for entry in self.hierarchy:
            record[f"hierarchy_{entry.order}_residual"] = entry.residual
            record[f"hierarchy_{entry.order}_ratio"] = entry.ratio
            record[f"hierarchy_{entry.order}_extrapolated"] = entry.extrapolated
            record[f"hierarchy_{entry.order}_parity_term"] = entry.parity_term
        for order, defect in self.diagonal.items():
            record[f"diagonal_{order}_defect"] = defect
        record["kappa"] = self.prediction.kappa
        record["kappa_resolved"] = self.prediction.resolved
        record["c5_closed_form_e2"] = self.prediction.closed_form_e2
        record["c5_quadrature_gap"] = self.prediction.relative_gap
        for k, value in enumerate(self.prediction.c5):
            record[f"c5_quadrature_e{k + 1}"] = float(value)
        if self.parity is not None:
            record.update(self.parity.to_dict())
        return record


def perturbation_report(
    bump: BumpProfile,
    delta: float | None = None,
    parity_spec: DataSpec | None = None,
    parity_delta: float | None = None,
) -> PerturbationReport:
    """
    Run the full perturbation analysis for a bump pair.

    Parameters
    ----------
    bump : BumpProfile
        The pair ``(h2, h3)`` (possibly padded).
    delta : float, optional
        Lattice spacing of the closed-form checks; default ``C / 512``.
    parity_spec : DataSpec, optional
        When given, marched solutions at ``+-eps`` are checked for parity.
    parity_delta : float, optional
        Lattice spacing of those marches; default ``C / 64``.
    """
    quads = quadratures_ABDE(bump)
    lemma = check_lemma_record(bump, delta)
    hierarchy = tuple(check_hierarchy(bump, order, delta) for order in (1, 2, 3))
    series = PerturbationSeries(bump, delta)
    diagonal = {order: series.diagonal_defect(order) for order in (1, 2, 3)}
    prediction = predicted_alpha_coefficient(bump, quads)
    parity = None
    if parity_spec is not None:
        parity = parity_study(parity_spec, parity_delta or bump.C / 64.0)
    return PerturbationReport(quads, lemma, hierarchy, diagonal, prediction, parity)
