import logging
import math
from pathlib import Path

import numpy as np

from core.config import TOL_SPHERE
from core.console import print_check
from core.experiments import run_cascade, run_convergence, run_eps_sweep, run_growth
from core.lab import CommandGroup, Lab, RunConfig
from core.records import plot_lines, write_columns, write_record

_logger: logging.Logger = logging.getLogger(__name__)


class SweepCommands(CommandGroup, name="Sweep Commands"):
    """
    Parameter sweeps behind the headline measurements.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """

    def register(self) -> None:
        self.lab.add_subcommand(
            "sweep-eps", self.sweep_eps, "Fit the power law of alpha - e1 in eps."
        )
        self.lab.add_subcommand(
            "sweep-growth",
            self.sweep_growth,
            "Fit the growth of the critical norms against log T.",
        )
        self.lab.add_subcommand(
            "convergence",
            self.convergence,
            "Convergence study of the scheme on circle-target data (m = 2).",
        )
        self.lab.add_subcommand(
            "cascade", self.cascade, "Evolve separated rescaled copies of the data."
        )

    def sweep_eps(self, config: RunConfig, out_dir: Path) -> None:
        """Write ``sweep_eps.csv`` and ``sweep_eps.txt``."""
        sweep = run_eps_sweep(
            config.eps_list,
            config.h_steps or None,
            C=config.C,
            m=config.m,
            shape=config.shape,
            t_final=config.t_final,
            workers=config.workers,
            kappa=config.kappa,
        )
        m = config.m
        header = ["eps", *(f"d{k + 1}" for k in range(m)), "orthogonal", "correction", "order", "flagged"]
        write_columns(out_dir / "sweep_eps.csv", header, sweep.rows())
        write_record(out_dir / "sweep_eps.txt", sweep.to_record())

        if config.plot:
            eps = [p.eps for p in sweep.points]
            plot_lines(
                out_dir / "sweep_eps.svg",
                eps,
                {
                    "|(alpha - e1) . e2|": [p.e2 for p in sweep.points],
                    "c5 eps^5 + c7 eps^7": [sweep.c5 * e**5 + sweep.c7 * e**7 for e in eps],
                },
                xlabel="eps",
                logx=True,
                logy=True,
            )
        print_check(
            "quintic scaling of alpha",
            abs(sweep.exponent - 5.0) <= 0.1,
            f"exponent {sweep.exponent:.4f}, R^2 {sweep.power_fit.r_squared:.6f}",
        )
        if sweep.calibration is not None:
            print_check(
                "fitted c5 matches kappa A E",
                sweep.calibration.resolved,
                f"kappa {sweep.calibration.empirical:.6g} vs {sweep.calibration.candidate:.6g}",
            )

    def sweep_growth(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write ``sweep_growth.csv`` (T, hdot_half, besov, lower_bound) and
        ``sweep_growth.txt``.

        For m = 2 this is the control run: alpha = e1 and no growth.
        """
        spec = config.data_spec()
        curve = run_growth(
            spec,
            config.t_list or None,
            h_step=config.step,
            t0=config.t0,
            workers=config.workers,
        )
        write_columns(
            out_dir / "sweep_growth.csv", ["T", "hdot_half", "besov", "lower_bound"], curve.rows()
        )
        write_record(out_dir / "sweep_growth.txt", curve.to_record())

        if config.plot:
            T = [r.T for r in curve.samples]
            plot_lines(
                out_dir / "sweep_growth.svg",
                T,
                {
                    "hdot_half^2": [r.hdot_half**2 for r in curve.samples],
                    "besov": [r.besov for r in curve.samples],
                    "lower bound": [
                        math.nan if r.lower_bound is None else r.lower_bound for r in curve.samples
                    ],
                },
                xlabel="T",
                logx=True,
            )

        hdot, besov = curve.hdot_fit, curve.besov_fit
        if spec.m == 2:
            print_check(
                "circle control shows no growth",
                abs(hdot.slope) <= 3.0 * hdot.stderr + 1e-12,
                f"slope {hdot.slope:.3e} +- {hdot.stderr:.1e}",
            )
        else:
            print_check(
                "hdot_half^2 linear in log T",
                hdot.r_squared > 0.99 and hdot.slope > 0.0,
                f"slope {hdot.slope:.6e}, R^2 {hdot.r_squared:.6f}",
            )
            print_check(
                "besov linear in log T",
                besov.r_squared > 0.99 and besov.slope > 0.0,
                f"slope {besov.slope:.6e}, R^2 {besov.r_squared:.6f}",
            )
        print_check("lower bound below hdot_half^2", curve.bound_respected)

    def convergence(self, config: RunConfig, out_dir: Path) -> None:
        """Write ``convergence.csv`` (h, error, pohlmeyer) and ``convergence.txt``."""
        study = run_convergence(
            config.data_spec(),
            config.h_steps or None,
            t_final=config.t_final,
            workers=config.workers,
        )
        write_columns(out_dir / "convergence.csv", ["h", "error", "pohlmeyer"], study.rows())
        write_record(out_dir / "convergence.txt", study.to_record())

        if config.plot:
            plot_lines(
                out_dir / "convergence.svg",
                study.steps,
                {"error": study.errors, "pohlmeyer residual": study.pohlmeyer},
                xlabel="h",
                logx=True,
                logy=True,
            )
        order_ok = math.isnan(study.order) or 1.8 <= study.order <= 2.2
        print_check("second-order convergence", order_ok, f"order {study.order:.4f}")
        print_check(
            "sphere constraint",
            study.sphere_defect <= TOL_SPHERE,
            f"max defect {study.sphere_defect:.3e}",
        )

    def cascade(self, config: RunConfig, out_dir: Path) -> None:
        """Write ``cascade.csv`` (one row per copy) and ``cascade.txt``."""
        report = run_cascade(
            config.data_spec(),
            config.k_scales,
            h_step=config.h_step,
            t_final=config.t_final,
            workers=config.workers,
        )
        header = [
            "index",
            "center",
            "scale",
            "eps",
            "independence",
            "scheme_error",
            "data_besov",
            "data_hdot",
            "alpha_deviation",
            "hdot_sq_slope",
        ]
        write_columns(out_dir / "cascade.csv", header, report.rows())
        write_record(out_dir / "cascade.txt", report.to_record())

        if config.plot:
            rows = np.array(report.rows())
            plot_lines(
                out_dir / "cascade.svg",
                rows[:, 2],
                {"data besov": rows[:, 6], "alpha deviation": rows[:, 8]},
                xlabel="scale",
                logx=True,
                logy=True,
            )
        for c in report.copies:
            print_check(
                f"copy {c.copy.index} evolves independently",
                c.independent,
                f"deviation {c.independence:.3e}, scheme error {c.scheme_error:.3e}",
            )
        print_check(
            "hdot_half scale invariance",
            report.scale_invariance <= 0.01,
            f"relative change {report.scale_invariance:.3e}",
        )


def setup(lab: Lab) -> None:
    """
    Add the sweep command group to the lab.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """
    lab.add_group(SweepCommands(lab))
