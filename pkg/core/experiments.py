import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, TypeVar

import numpy as np

from core.config import (
    CASCADE_SCALES,
    CASCADE_STEPS_PER_C,
    CONVERGENCE_STEPS_PER_C,
    DEFAULT_STEPS_PER_C,
    EPS_SWEEP,
    EXTRAPOLATION_ORDER_BAND,
    GROWTH_FIT_MIN_T_OVER_C,
    GROWTH_T0_OVER_C,
    GROWTH_T_OVER_C,
    KAPPA_CANDIDATE,
    ORDER_FAIL,
    SWEEP_STEPS_PER_C,
    SWEEP_T0_OVER_C,
    SYNTH_STEPS_PER_C,
    WORKERS,
)
from core.data import DataSpec, build_initial_data
from core.errors import ConfigError, ConvergenceError, LayoutError
from core.evolve import (
    Evolution,
    circle_exact,
    circle_phase,
    evolve,
    evolve_slice,
    pohlmeyer_residual,
)
from core.fields import SphereSlice, e1
from core.grid import FloatArray, Grid1D, LinearFit, fit_line, observed_order, richardson
from core.perturb import (
    AlphaPrediction,
    KappaCalibration,
    calibrate_kappa,
    predicted_alpha_coefficient,
    quadratures_ABDE,
)
from core.profile import AsymptoticProfile, extract_profile, synthesize_slice
from core.spectral import NormReport, besov_norm, norm_report, sobolev_norm

_logger: logging.Logger = logging.getLogger(__name__)

J = TypeVar("J")
R = TypeVar("R")


def run_jobs(fn: Callable[[J], R], jobs: Iterable[J], workers: int = WORKERS) -> list[R]:
    """
    Run independent jobs, in a process pool when ``workers > 1``.

    Results come back in job order, so callers that sort their jobs get
    deterministic output whatever the worker count.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# -- growth -----------------------------------------------------------------


@dataclass(frozen=True)
class GrowthCurve:
    """
    Critical norms of synthesized slices against log T.

    Attributes
    ----------
    samples : tuple of NormReport
        One report per synthesis time, sorted by T.
    hdot_fit : LinearFit
        ``hdot_half**2`` against ``log T`` over ``T >= 10 C``.
    besov_fit : LinearFit
        ``besov`` against ``log T`` over the same times.
    alpha : ndarray
        The interior constant of the profile.
    T0 : float
        Extraction time.
    C : float
        Support half-width the fit window refers to.
    """

    samples: tuple[NormReport, ...]
    hdot_fit: LinearFit
    besov_fit: LinearFit
    alpha: FloatArray
    T0: float
    C: float

    @property
    def bound_respected(self) -> bool:
        return all(report.bound_respected for report in self.samples)

    @property
    def predicted_slope(self) -> float:
        """``|alpha - e1|^2 / pi^2``, the asymptotic slope of ``hdot_half**2``."""
        deviation = float(np.linalg.norm(self.alpha - e1(self.alpha.size)))
        return deviation**2 / math.pi**2

    def rows(self) -> list[list[float]]:
        return [report.row() for report in self.samples]

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {"T0": self.T0, "C": self.C}
        record.update(self.hdot_fit.to_dict("hdot_sq_"))
        record.update(self.besov_fit.to_dict("besov_"))
        record["predicted_hdot_sq_slope"] = self.predicted_slope
        record["lower_bound_respected"] = self.bound_respected
        for k, value in enumerate(self.alpha):
            record[f"alpha_e{k + 1}"] = float(value)
        return record


def _growth_point(job: tuple[AsymptoticProfile, float, float]) -> NormReport:
    profile, T, spacing = job
    slice_ = synthesize_slice(profile, T, spacing=spacing)
    report = norm_report(slice_, profile)
    _logger.info(
        f"T = {T:g}: hdot_half = {report.hdot_half:.6e}, besov = {report.besov:.6e}"
    )
    return report


def growth_from_profile(
    profile: AsymptoticProfile,
    T_list: Sequence[float],
    *,
    spacing: float | None = None,
    fit_min: float = GROWTH_FIT_MIN_T_OVER_C,
    workers: int = WORKERS,
) -> GrowthCurve:
    """
    Synthesize slices from a profile and fit their norms against log T.

    Parameters
    ----------
    profile : AsymptoticProfile
        The extracted profile.
    T_list : sequence of float
        Synthesis times, all greater than C.
    spacing : float, optional
        Synthesis grid spacing; default ``C / 32``.
    fit_min : float
        Only times ``T >= fit_min * C`` enter the fits.
    workers : int
        Worker processes.

    Raises
    ------
    ConfigError
        If the fitted times span less than two decades.
    """
    C = profile.C
    spacing = C / SYNTH_STEPS_PER_C if spacing is None else spacing
    times = sorted(float(T) for T in T_list)
    fitted = [T for T in times if T >= fit_min * C * (1.0 - 1e-12)]
    if len(fitted) < 2 or fitted[-1] / fitted[0] < 100.0 * (1.0 - 1e-12):
        raise ConfigError(
            f"growth fits need times spanning two decades above {fit_min:g} C, got {fitted}"
        )
    # once here rather than once per job
    profile = profile.resampled(spacing)
    reports = run_jobs(_growth_point, [(profile, T, spacing) for T in times], workers)

    used = [r for r in reports if r.T >= fit_min * C * (1.0 - 1e-12)]
    logs = np.log([r.T for r in used])
    hdot_fit = fit_line(logs, [r.hdot_half**2 for r in used])
    besov_fit = fit_line(logs, [r.besov for r in used])
    _logger.info(
        f"growth fit: hdot^2 slope {hdot_fit.slope:.6e} (R^2 {hdot_fit.r_squared:.5f}), "
        f"besov slope {besov_fit.slope:.6e} (R^2 {besov_fit.r_squared:.5f})"
    )
    return GrowthCurve(tuple(reports), hdot_fit, besov_fit, profile.alpha, profile.T0, C)


def run_growth(
    spec: DataSpec,
    T_list: Sequence[float] | None = None,
    *,
    h_step: float | None = None,
    t0: float | None = None,
    spacing: float | None = None,
    workers: int = WORKERS,
) -> GrowthCurve:
    """
    Evolve to ``T0``, extract the profile and measure norm growth.

    Parameters
    ----------
    spec : DataSpec
        The data.
    T_list : sequence of float, optional
        Synthesis times; default ``(10, 20, ..., 10^4) C``.
    h_step : float, optional
        Evolution step; default ``C / 256``.
    t0 : float, optional
        Extraction time; default ``4 C``.
    spacing : float, optional
        Synthesis spacing; default ``C / 32``.
    workers : int
        Worker processes.

    Returns
    -------
    GrowthCurve
        Norm samples and fits.
    """
    C = spec.C
    h_step = C / DEFAULT_STEPS_PER_C if h_step is None else h_step
    t0 = GROWTH_T0_OVER_C * C if t0 is None else t0
    T_list = [t * C for t in GROWTH_T_OVER_C] if T_list is None else T_list
    _logger.info(f"growth run: eps = {spec.eps:g}, m = {spec.m}, T0 = {t0:g}")
    ev = evolve(spec, t0, h_step)
    profile = extract_profile(ev.final, C)
    return growth_from_profile(profile, T_list, spacing=spacing, workers=workers)


# -- epsilon sweep ----------------------------------------------------------


def interior_value(ev: Evolution) -> FloatArray:
    """The final slice at the centre of the support, inside the light cone."""
    final = ev.final
    if abs(final.time) < 2.0 * ev.half_width * (1.0 - 1e-12):
        raise ConfigError("the interior is only resolved once |t| >= 2C")
    return final.sample(ev.center)[0]


def _alpha_point(job: tuple[DataSpec, float, float]) -> tuple[float, float, FloatArray]:
    spec, h_step, t_final = job
    ev = evolve(spec, t_final, h_step)
    alpha = interior_value(ev)
    _logger.info(
        f"eps = {spec.eps:g}, h = {h_step:.3e}: (alpha - e1) . e2 = {alpha[1]:.6e}"
    )
    return spec.eps, h_step, alpha


@dataclass(frozen=True)
class EpsPoint:
    """
    alpha at one amplitude.

    Attributes
    ----------
    eps : float
        Amplitude.
    raw : dict
        alpha by step size.
    alpha : ndarray
        Richardson-extrapolated alpha from the two finest steps.
    order : float
        Observed h-order of alpha (NaN with fewer than three steps).
    flagged : bool
        Whether extrapolation failed to converge; flagged points are
        excluded from the fits.
    """

    eps: float
    raw: dict[float, FloatArray]
    alpha: FloatArray
    order: float
    flagged: bool

    @property
    def deviation(self) -> FloatArray:
        return self.alpha - e1(self.alpha.size)

    @property
    def e2(self) -> float:
        return float(self.deviation[1])

    @property
    def orthogonal(self) -> float:
        """Size of ``alpha - e1`` off the e2 axis."""
        d = self.deviation.copy()
        d[1] = 0.0
        return float(np.linalg.norm(d))

    @property
    def correction(self) -> float:
        steps = sorted(self.raw)
        if len(steps) < 2:
            return 0.0
        return float(np.max(np.abs(self.raw[steps[0]] - self.raw[steps[1]]))) / 3.0


@dataclass(frozen=True)
class EpsSweep:
    """
    Scaling of ``alpha - e1`` with the amplitude.

    Attributes
    ----------
    points : tuple of EpsPoint
        Sorted by eps.
    power_fit : LinearFit
        ``log |(alpha - e1) . e2|`` against ``log eps``.
    c5, c7 : float
        Two-term fit ``(alpha - e1) . e2 = c5 eps^5 + c7 eps^7``.
    orthogonal_fit : LinearFit or None
        Log-log fit of the off-axis part (None if it vanishes).
    exponent_by_step : dict
        Unextrapolated exponent at each step size.
    prediction : AlphaPrediction or None
        Perturbative prediction, when A and E are available.
    calibration : KappaCalibration or None
        Comparison of ``c5`` with ``kappa A E``.
    """

    points: tuple[EpsPoint, ...]
    power_fit: LinearFit
    c5: float
    c7: float
    orthogonal_fit: LinearFit | None
    exponent_by_step: dict[float, float] = field(default_factory=dict)
    prediction: AlphaPrediction | None = None
    calibration: KappaCalibration | None = None

    @property
    def exponent(self) -> float:
        return self.power_fit.slope

    @property
    def coefficient(self) -> float:
        sign = math.copysign(1.0, self.c5) if self.c5 != 0.0 else 1.0
        return sign * math.exp(self.power_fit.intercept)

    def rows(self) -> list[list[float]]:
        out = []
        for p in self.points:
            out.append(
                [p.eps, *p.deviation.tolist(), p.orthogonal, p.correction, p.order, float(p.flagged)]
            )
        return out

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {}
        record.update(self.power_fit.to_dict("exponent_fit_"))
        record["exponent"] = self.exponent
        record["coefficient"] = self.coefficient
        record["c5"] = self.c5
        record["c7"] = self.c7
        if self.orthogonal_fit is not None:
            record.update(self.orthogonal_fit.to_dict("orthogonal_fit_"))
        for step, exponent in sorted(self.exponent_by_step.items()):
            record[f"exponent_h_{step:.6g}"] = exponent
        record["flagged"] = ",".join(f"{p.eps:g}" for p in self.points if p.flagged)
        if self.prediction is not None:
            record["predicted_c5_e2"] = self.prediction.closed_form_e2
            record["quadrature_c5_e2"] = float(self.prediction.c5[1])
        if self.calibration is not None:
            record.update(self.calibration.to_dict())
        return record


def _power_fit(eps: Sequence[float], values: Sequence[float]) -> LinearFit:
    return fit_line(np.log(np.asarray(eps)), np.log(np.abs(np.asarray(values))))


def run_eps_sweep(
    eps_list: Sequence[float] = EPS_SWEEP,
    h_steps: Sequence[float] | None = None,
    *,
    C: float = 1.0,
    m: int = 3,
    shape: str = "asym",
    t_final: float | None = None,
    workers: int = WORKERS,
    require_octaves: bool = True,
    kappa: float = KAPPA_CANDIDATE,
) -> EpsSweep:
    """
    Measure alpha for a range of amplitudes and fit its power law.

    Every (eps, h) pair is an independent evolution to ``t = 2 C``; alpha
    is the value at the centre. The two finest steps are combined by
    Richardson extrapolation.

    Parameters
    ----------
    eps_list : sequence of float
        Amplitudes in (0, eps_max], spanning at least three octaves.
    h_steps : sequence of float, optional
        Step sizes; default ``C / 1024`` and ``C / 2048``.
    C, m, shape
        Data parameters (m >= 3).
    t_final : float, optional
        Evolution time; default ``2 C``.
    workers : int
        Worker processes.
    require_octaves : bool
        Enforce the three-octave span.
    kappa : float
        Constant of the perturbative prediction.

    Raises
    ------
    ConfigError
        If the amplitudes are unusable or fewer than two points survive.
    """
    if m < 3:
        raise ConfigError("the epsilon sweep needs m >= 3; circle data have alpha = e1")
    eps_values = sorted(float(e) for e in eps_list)
    if not eps_values or eps_values[0] <= 0.0:
        raise ConfigError("sweep amplitudes must be positive")
    if require_octaves and eps_values[-1] / eps_values[0] < 8.0 * (1.0 - 1e-12):
        raise ConfigError(
            f"amplitudes span {eps_values[-1] / eps_values[0]:.3g}x, need three octaves"
        )
    steps = sorted((float(h) for h in (h_steps or [C / n for n in SWEEP_STEPS_PER_C])), reverse=True)
    t_final = SWEEP_T0_OVER_C * C if t_final is None else t_final

    specs = {eps: DataSpec.canonical(C, eps, m, shape=shape) for eps in eps_values}
    jobs = [(specs[eps], h, t_final) for eps in eps_values for h in steps]
    results = run_jobs(_alpha_point, jobs, workers)

    raw: dict[float, dict[float, FloatArray]] = {eps: {} for eps in eps_values}
    for eps, h, alpha in results:
        raw[eps][h] = alpha

    lo, hi = EXTRAPOLATION_ORDER_BAND
    points = []
    for eps in eps_values:
        by_h = raw[eps]
        if len(steps) >= 2:
            alpha = richardson(by_h[steps[-2]], by_h[steps[-1]])
            alpha = alpha / np.linalg.norm(alpha)
        else:
            alpha = by_h[steps[-1]]
        order = math.nan
        if len(steps) >= 3:
            diffs = [
                float(np.linalg.norm(by_h[a] - by_h[b]))
                for a, b in zip(steps[-3:], steps[-2:], strict=False)
            ]
            if diffs[1] > 0.0 and diffs[0] > 0.0:
                order = math.log2(diffs[0] / diffs[1])
        probe = EpsPoint(eps, dict(by_h), alpha, order, False)
        if math.isnan(order):
            flagged = probe.correction > 0.5 * abs(probe.e2)
        else:
            flagged = not lo <= order <= hi
        point = replace(probe, flagged=flagged)
        if flagged:
            _logger.warning(
                f"extrapolation of alpha does not converge at eps = {eps:g} "
                f"(order {order:.3g}); excluded from the fits"
            )
        points.append(point)

    kept = [p for p in points if not p.flagged and p.e2 != 0.0]
    if len(kept) < 2:
        raise ConfigError("fewer than two amplitudes survived extrapolation")
    eps_kept = np.array([p.eps for p in kept])
    e2_kept = np.array([p.e2 for p in kept])
    power_fit = _power_fit(eps_kept, e2_kept)

    basis = np.column_stack([eps_kept**5, eps_kept**7])
    if len(kept) >= 3:
        (c5, c7), *_ = np.linalg.lstsq(basis, e2_kept, rcond=None)
    else:
        c5, c7 = float(np.mean(e2_kept / eps_kept**5)), 0.0

    orthogonal = [(p.eps, p.orthogonal) for p in kept if p.orthogonal > 0.0]
    orthogonal_fit = (
        _power_fit([e for e, _ in orthogonal], [o for _, o in orthogonal])
        if len(orthogonal) >= 2
        else None
    )

    exponent_by_step = {}
    for h in steps:
        values = [(p.eps, float(p.raw[h][1])) for p in kept if p.raw[h][1] != 0.0]
        if len(values) >= 2:
            exponent_by_step[h] = _power_fit([e for e, _ in values], [v for _, v in values]).slope

    bump = specs[eps_values[0]].bump
    quads = quadratures_ABDE(bump)
    prediction = predicted_alpha_coefficient(bump, quads, kappa)
    calibration = calibrate_kappa(float(c5), quads.A, quads.E, kappa)
    _logger.info(
        f"eps sweep: exponent {power_fit.slope:.4f} (R^2 {power_fit.r_squared:.5f}), "
        f"c5 = {c5:.6e}, kappa*A*E = {prediction.closed_form_e2:.6e}"
    )
    return EpsSweep(
        tuple(points),
        power_fit,
        float(c5),
        float(c7),
        orthogonal_fit,
        exponent_by_step,
        prediction,
        calibration,
    )


# -- convergence ------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceStudy:
    """
    Errors of the scheme against the exact circle-target solution.

    Attributes
    ----------
    steps : tuple of float
        Step sizes, coarsest first.
    errors : tuple of float
        ``max |phi - exact|`` over all stored slices.
    order : float
        Observed order (NaN when every error is zero).
    pohlmeyer : tuple of float
        Conservation-law residual at each step.
    pohlmeyer_order : float
        Observed order of that residual.
    sphere_defect : float
        Largest unit-norm defect over all stored slices.
    """

    steps: tuple[float, ...]
    errors: tuple[float, ...]
    order: float
    pohlmeyer: tuple[float, ...]
    pohlmeyer_order: float
    sphere_defect: float

    def rows(self) -> list[list[float]]:
        return [list(r) for r in zip(self.steps, self.errors, self.pohlmeyer, strict=True)]

    def to_record(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "pohlmeyer_order": self.pohlmeyer_order,
            "sphere_defect": self.sphere_defect,
        }


def _convergence_point(job: tuple[DataSpec, float, float]) -> tuple[float, float, float, float]:
    spec, h, t_final = job
    ev = evolve(spec, t_final, h, slice_times=[0.5 * t_final])
    theta = circle_phase(spec)
    error = 0.0
    defect = 0.0
    for s in ev.slices:
        exact = circle_exact(theta, s.time, s.grid)
        error = max(error, float(np.max(np.abs(s.values - exact.values))))
        defect = max(defect, s.unit_defect())
    residual = pohlmeyer_residual(ev).residual
    _logger.info(f"h = {h:.3e}: error {error:.3e}, conservation residual {residual:.3e}")
    return h, error, residual, defect


def run_convergence(
    spec: DataSpec,
    h_list: Sequence[float] | None = None,
    *,
    t_final: float | None = None,
    workers: int = WORKERS,
) -> ConvergenceStudy:
    """
    Convergence study of the leapfrog scheme on circle-target data.

    Parameters
    ----------
    spec : DataSpec
        Data with ``m == 2``.
    h_list : sequence of float, optional
        Step sizes; default ``C / 256``, ``C / 512``, ``C / 1024``.
    t_final : float, optional
        Final time; default ``C``. Must be a whole number of every step.

    Raises
    ------
    ConfigError
        If ``m != 2``.
    ConvergenceError
        If the observed order falls below 1.5.
    """
    if spec.m != 2:
        raise ConfigError("the convergence study needs circle-target data (m = 2)")
    C = spec.C
    steps = sorted(
        (float(h) for h in (h_list or [C / n for n in CONVERGENCE_STEPS_PER_C])), reverse=True
    )
    t_final = C if t_final is None else t_final
    results = run_jobs(_convergence_point, [(spec, h, t_final) for h in steps], workers)
    errors = tuple(r[1] for r in results)
    residuals = tuple(r[2] for r in results)
    order = observed_order(steps, errors)
    pohlmeyer_order = observed_order(steps, residuals)
    study = ConvergenceStudy(
        tuple(steps),
        errors,
        order,
        residuals,
        pohlmeyer_order,
        max(r[3] for r in results),
    )
    _logger.info(f"observed order {order:.4f}, conservation-law order {pohlmeyer_order:.4f}")
    if not math.isnan(order) and order < ORDER_FAIL:
        raise ConvergenceError(f"observed order {order:.3f} is below {ORDER_FAIL}")
    return study


# -- cascade ----------------------------------------------------------------


@dataclass(frozen=True)
class CascadeCopy:
    """
    One rescaled copy of the data.

    Attributes
    ----------
    index : int
        Copy number k.
    center : float
        Centre of its support.
    scale : float
        Dilation ``lambda_k = 2^-k``.
    eps : float
        Amplitude ``eps 2^-k``.
    """

    index: int
    center: float
    scale: float
    eps: float

    def support(self, C: float) -> tuple[float, float]:
        return self.center - self.scale * C, self.center + self.scale * C

    def cone(self, C: float, t: float) -> tuple[float, float]:
        lo, hi = self.support(C)
        return lo - abs(t), hi + abs(t)


def cascade_layout(
    C: float,
    eps: float,
    k_scales: int,
    t_final: float,
    h_step: float,
    centers: Sequence[float] | None = None,
) -> tuple[CascadeCopy, ...]:
    """
    Place ``k_scales`` copies left to right with disjoint light cones.

    Centres are multiples of ``h_step`` so every copy sits on the grid
    exactly as it would alone.

    Raises
    ------
    LayoutError
        If two cones meet before ``t_final`` (up to two grid cells).
    """
    if not 1 <= k_scales <= 3:
        raise ConfigError(f"the cascade supports 1 to 3 scales, got {k_scales}")
    scales = [2.0**-k for k in range(k_scales)]
    if centers is None:
        placed = [0.0]
        for k in range(1, k_scales):
            gap = (scales[k - 1] + scales[k]) * C + 2.0 * abs(t_final) + 8.0 * h_step
            placed.append(placed[-1] + gap)
    else:
        if len(centers) != k_scales:
            raise LayoutError(f"{len(centers)} centres given for {k_scales} copies")
        placed = list(centers)
    placed = [round(c / h_step) * h_step for c in placed]
    copies = tuple(
        CascadeCopy(k, placed[k], scales[k], eps * scales[k]) for k in range(k_scales)
    )
    ordered = sorted(copies, key=lambda c: c.center)
    for left, right in zip(ordered, ordered[1:], strict=False):
        if left.cone(C, t_final)[1] + 2.0 * h_step >= right.cone(C, t_final)[0]:
            raise LayoutError(
                f"light cones of copies {left.index} and {right.index} overlap "
                f"before t = {t_final:g}"
            )
    return copies


def _copy_data(spec: DataSpec, copy: CascadeCopy, grid: Grid1D) -> SphereSlice:
    scaled = DataSpec(spec.C, copy.eps, spec.m, spec.bump, spec.truncation, spec.eps_max)
    return build_initial_data(scaled, grid, center=copy.center, scale=copy.scale)


def _window(slice_: SphereSlice, lo: float, hi: float) -> SphereSlice:
    """Restrict a slice to the nodes in ``[lo, hi]``."""
    i0 = max(0, math.floor((lo - slice_.grid.x_min) / slice_.grid.spacing + 1e-9))
    i1 = min(slice_.grid.n - 1, math.ceil((hi - slice_.grid.x_min) / slice_.grid.spacing - 1e-9))
    nodes = slice_.grid.nodes
    grid = Grid1D(float(nodes[i0]), float(nodes[i1]), i1 - i0 + 1)
    velocity = None if slice_.velocity is None else slice_.velocity[i0 : i1 + 1]
    return SphereSlice(grid, slice_.values[i0 : i1 + 1], slice_.time, velocity)


def _centered_grid(center: float, half_width: float, h: float) -> Grid1D:
    local = Grid1D.symmetric(half_width, h)
    return Grid1D(local.x_min + center, local.x_max + center, local.n)


def _solo_run(
    spec: DataSpec, copy: CascadeCopy, h: float, t_final: float, pad: float
) -> SphereSlice:
    grid = _centered_grid(copy.center, copy.scale * spec.C + abs(t_final) + pad, h)
    initial = _copy_data(spec, copy, grid)
    return evolve_slice(initial, t_final).final


@dataclass(frozen=True)
class CopyReport:
    """
    Measurements for one copy of the cascade.

    Attributes
    ----------
    copy : CascadeCopy
        Placement, scale and amplitude.
    independence : float
        ``max |composite - single copy|`` on the copy's cone at ``t_final``.
    scheme_error : float
        ``max |run(h) - run(h/2)|`` of the single copy on the same nodes.
    data_besov, data_hdot : float
        Norms of the copy's data alone.
    alpha : ndarray
        Interior value of the copy in the composite solution.
    growth : GrowthCurve or None
        Norm growth of the copy's own profile, in its own time units.
    """

    copy: CascadeCopy
    independence: float
    scheme_error: float
    data_besov: float
    data_hdot: float
    alpha: FloatArray
    growth: GrowthCurve | None

    @property
    def independent(self) -> bool:
        return self.independence <= 5.0 * self.scheme_error


@dataclass(frozen=True)
class CascadeReport:
    """
    Result of the multi-scale construction.

    Attributes
    ----------
    copies : tuple of CopyReport
        One report per copy.
    composite_besov : float
        Besov norm of the composite data.
    scale_invariance : float
        Relative change of the data ``H^(1/2)`` norm under ``lambda = 1/2``
        at unchanged amplitude.
    t_final : float
        Evolution time.
    h_step : float
        Step size.
    """

    copies: tuple[CopyReport, ...]
    composite_besov: float
    scale_invariance: float
    t_final: float
    h_step: float

    @property
    def besov_decreasing(self) -> bool:
        values = [c.data_besov for c in self.copies]
        return all(b < a for a, b in zip(values, values[1:], strict=False))

    def rows(self) -> list[list[float]]:
        out = []
        for c in self.copies:
            slope = math.nan if c.growth is None else c.growth.hdot_fit.slope
            out.append(
                [
                    float(c.copy.index),
                    c.copy.center,
                    c.copy.scale,
                    c.copy.eps,
                    c.independence,
                    c.scheme_error,
                    c.data_besov,
                    c.data_hdot,
                    float(np.linalg.norm(c.alpha - e1(c.alpha.size))),
                    slope,
                ]
            )
        return out

    def to_record(self) -> dict[str, Any]:
        return {
            "composite_besov": self.composite_besov,
            "scale_invariance": self.scale_invariance,
            "besov_decreasing": self.besov_decreasing,
            "all_independent": all(c.independent for c in self.copies),
            "t_final": self.t_final,
            "h_step": self.h_step,
        }


def run_cascade(
    spec: DataSpec,
    k_scales: int = CASCADE_SCALES,
    *,
    h_step: float | None = None,
    t_final: float | None = None,
    T_over_scale: Sequence[float] | None = None,
    centers: Sequence[float] | None = None,
    workers: int = WORKERS,
) -> CascadeReport:
    """
    Evolve spatially separated rescaled copies together and apart.

    Copy k has dilation ``2^-k`` and amplitude ``eps 2^-k``. The composite
    evolution restricted to each copy's light cone is compared with that
    copy evolved alone on an aligned grid.

    Parameters
    ----------
    spec : DataSpec
        The data of the largest copy.
    k_scales : int
        Number of copies (1 to 3).
    h_step : float, optional
        Step; default ``C / 256``.
    t_final : float, optional
        Evolution time; default ``4 C`` (at least ``2 C``).
    T_over_scale : sequence of float, optional
        Growth times per copy in units of ``lambda_k C``; default
        ``(10, 100, 1000)``.
    centers : sequence of float, optional
        Explicit copy centres.

    Raises
    ------
    LayoutError
        If the copies' light cones overlap.
    """
    C = spec.C
    h = C / CASCADE_STEPS_PER_C if h_step is None else h_step
    t_final = GROWTH_T0_OVER_C * C if t_final is None else t_final
    T_over_scale = (10.0, 100.0, 1000.0) if T_over_scale is None else T_over_scale
    copies = cascade_layout(C, spec.eps, k_scales, t_final, h, centers)
    pad = 0.25 * C + 4.0 * h

    lo = min(c.cone(C, t_final)[0] for c in copies) - pad
    hi = max(c.cone(C, t_final)[1] for c in copies) + pad
    start = math.floor(lo / h) * h
    grid = Grid1D.from_spacing(start, h, math.ceil((hi - start) / h) + 1)
    composite = e1(spec.m) + sum(
        (_copy_data(spec, c, grid).deviation() for c in copies), np.zeros((grid.n, spec.m))
    )
    initial = SphereSlice(grid, composite, 0.0, np.zeros_like(composite))
    data_lo = min(c.support(C)[0] for c in copies)
    data_hi = max(c.support(C)[1] for c in copies)
    _logger.info(f"cascade of {k_scales} copies on {grid.n} nodes up to t = {t_final:g}")
    final = evolve_slice(
        initial,
        t_final,
        half_width=0.5 * (data_hi - data_lo),
        center=0.5 * (data_hi + data_lo),
    ).final

    reports = []
    for c in copies:
        cone_lo, cone_hi = c.cone(C, t_final)
        solo = _solo_run(spec, c, h, t_final, pad)
        fine = _solo_run(spec, c, 0.5 * h, t_final, pad)
        x = solo.x
        inside = (x >= cone_lo) & (x <= cone_hi)
        independence = float(
            np.max(np.abs(final.sample(x[inside]) - solo.values[inside]))
        )
        scheme_error = float(np.max(np.abs(fine.sample(x[inside]) - solo.values[inside])))

        data = _copy_data(spec, c, _centered_grid(c.center, c.scale * C + pad, h))
        data_besov, _ = besov_norm(data)
        data_hdot = sobolev_norm(data)

        # one cell past the cone; the layout keeps neighbours more than two cells away
        window = _window(final, cone_lo - h, cone_hi + h)
        alpha = final.sample(c.center)[0]
        growth = None
        if abs(t_final) >= 2.0 * c.scale * C:
            profile = extract_profile(window, c.scale * C, center=c.center)
            times = [t * c.scale * C for t in T_over_scale]
            growth = growth_from_profile(profile, times, workers=workers)
        reports.append(
            CopyReport(c, independence, scheme_error, data_besov, data_hdot, alpha, growth)
        )
        _logger.info(
            f"copy {c.index}: independence {independence:.3e}, scheme error "
            f"{scheme_error:.3e}, data besov {data_besov:.6e}"
        )

    composite_besov, _ = besov_norm(initial)
    scale_invariance = _scale_invariance(spec, h)
    return CascadeReport(tuple(reports), composite_besov, scale_invariance, t_final, h)


def _scale_invariance(spec: DataSpec, h: float) -> float:
    """Relative change of the data ``H^(1/2)`` norm between ``lambda = 1`` and ``1/2``."""
    grid = Grid1D.symmetric(2.0 * spec.C, h)
    full = sobolev_norm(build_initial_data(spec, grid))
    half = sobolev_norm(build_initial_data(spec, grid, scale=0.5))
    return 0.0 if full == 0.0 else abs(half - full) / full
