import logging
from pathlib import Path

import numpy as np

from core.config import NULL_STEPS_PER_C, TOL_IDENTITY, TOL_LEMMA
from core.console import print_check
from core.errors import ConfigError
from core.evolve import march_null_lattice
from core.fields import e1
from core.grid import fit_line
from core.lab import CommandGroup, Lab, RunConfig
from core.perturb import perturbation_report
from core.records import plot_lines, write_columns, write_record

_logger: logging.Logger = logging.getLogger(__name__)


class PerturbationCommands(CommandGroup, name="Perturbation Commands"):
    """
    The small-amplitude expansion of the solution.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """

    def register(self) -> None:
        self.lab.add_subcommand(
            "perturb",
            self.perturb,
            "Check the expansion identities and predict the eps^5 term of alpha.",
        )

    def perturb(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write ``perturb.txt`` (the report) and ``eps_sweep.csv``.

        The sweep marches the null lattice for every amplitude of
        ``--eps-list`` and compares ``(alpha - e1) . e2`` with the
        predicted ``c5 eps^5``.

        Raises
        ------
        ConfigError
            If ``m < 3``; circle targets have no expansion to check.
        """
        if config.m < 3:
            raise ConfigError("perturb needs m >= 3; circle data have alpha = e1 exactly")
        spec = config.data_spec()
        report = perturbation_report(
            spec.bump, config.delta, parity_spec=spec if spec.eps != 0.0 else None
        )
        write_record(out_dir / "perturb.txt", report.to_record())

        delta = spec.C / NULL_STEPS_PER_C if config.delta is None else config.delta
        c5 = report.predicted_c5[1]
        rows = []
        for eps in sorted(config.eps_list):
            march = march_null_lattice(config.data_spec(eps), delta, store=False)
            deviation = march.alpha - e1(spec.m)
            rows.append([eps, *deviation.tolist(), c5 * eps**5])
        header = ["eps", *(f"d{k + 1}" for k in range(spec.m)), "predicted_d2"]
        write_columns(out_dir / "eps_sweep.csv", header, rows, {"delta": delta, "c5": c5})

        usable = [(row[0], row[2]) for row in rows if row[0] > 0.0 and row[2] != 0.0]
        exponent = np.nan
        if len(usable) >= 2:
            fit = fit_line(np.log([e for e, _ in usable]), np.log([abs(d) for _, d in usable]))
            exponent = fit.slope
            _logger.info(f"null-lattice exponent {exponent:.4f} (R^2 {fit.r_squared:.5f})")

        if config.plot and usable:
            plot_lines(
                out_dir / "eps_sweep.svg",
                [e for e, _ in usable],
                {
                    "|(alpha - e1) . e2|": [d for _, d in usable],
                    "|c5| eps^5": [c5 * e**5 for e, _ in usable],
                },
                xlabel="eps",
                logx=True,
                logy=True,
            )

        quads = report.quadratures
        print_check("B = -A", abs(quads.B + quads.A) <= TOL_IDENTITY * quads.scale_ab)
        print_check("D = -E/2", abs(quads.D + 0.5 * quads.E) <= TOL_IDENTITY * quads.scale_de)
        print_check(
            "boundary record identity",
            report.lemma.passed,
            f"residual {report.lemma_residual:.3e} (tolerance {TOL_LEMMA:g} x scale)",
        )
        for entry in report.hierarchy:
            print_check(
                f"hierarchy order {entry.order} converges at second order",
                3.0 <= entry.ratio <= 5.0,
                f"ratio {entry.ratio:.3f}",
            )
        print_check(
            "kappa A E matches quadrature of c5",
            report.prediction.resolved,
            f"{report.prediction.closed_form_e2:.6e} vs {report.prediction.c5[1]:.6e}",
        )
        if not np.isnan(exponent):
            print_check("quintic scaling of alpha", abs(exponent - 5.0) <= 0.1, f"exponent {exponent:.4f}")


def setup(lab: Lab) -> None:
    """
    Add the perturbation command group to the lab.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """
    lab.add_group(PerturbationCommands(lab))
