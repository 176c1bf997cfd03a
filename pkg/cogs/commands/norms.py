import logging
import math
from pathlib import Path

import numpy as np

from core.config import GROWTH_T0_OVER_C
from core.console import print_check
from core.data import build_initial_data, circle_bump
from core.evolve import evolve
from core.grid import Grid1D
from core.lab import CommandGroup, Lab, RunConfig
from core.profile import extract_profile, synthesize_slice
from core.records import plot_lines, read_slice, write_columns, write_record
from core.spectral import NormReport, heaviside_demo, norm_report, translation_gap

_logger: logging.Logger = logging.getLogger(__name__)


class NormCommands(CommandGroup, name="Norm Commands"):
    """
    Critical Sobolev and Besov norms.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """

    def register(self) -> None:
        self.lab.add_subcommand(
            "norms",
            self.norms,
            "Critical norms of a slice file, the data, or synthesized slices (--t-list).",
        )
        self.lab.add_subcommand(
            "demo-heaviside",
            self.demo_heaviside,
            "Low-frequency Besov blocks of D^-1((Dh)^2).",
        )

    def norms(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write ``norms.csv`` (T, hdot_half, besov, lower_bound) and
        ``blocks.csv`` (T, j, value).

        With ``--input`` the slice is read from a file; with ``--t-list``
        the data are evolved to ``t0``, the profile is extracted and each
        listed time is synthesized; otherwise the data themselves are used.
        """
        if config.input:
            slices = [read_slice(Path(config.input))]
            reports = [norm_report(slices[0], kappa1=config.kappa1, kappa2=config.kappa2)]
        elif config.t_list:
            spec = config.data_spec()
            t0 = GROWTH_T0_OVER_C * spec.C if config.t0 is None else config.t0
            p = extract_profile(evolve(spec, t0, config.step).final, spec.C)
            slices = [synthesize_slice(p, T) for T in sorted(config.t_list)]
            reports = [
                norm_report(s, p, kappa1=config.kappa1, kappa2=config.kappa2) for s in slices
            ]
        else:
            spec = config.data_spec()
            slices = [build_initial_data(spec, Grid1D.symmetric(2.0 * spec.C, config.step))]
            reports = [norm_report(slices[0], kappa1=config.kappa1, kappa2=config.kappa2)]

        write_columns(
            out_dir / "norms.csv",
            ["T", "hdot_half", "besov", "lower_bound"],
            [r.row() for r in reports],
        )
        write_columns(
            out_dir / "blocks.csv",
            ["T", "j", "value"],
            [[r.T, float(j), value] for r in reports for j, value in r.blocks],
        )
        gap = translation_gap(slices[0], 0.5 * config.C)
        write_record(
            out_dir / "norms.txt",
            {"slices": len(reports), "translation_gap": gap, "bound_respected": _respected(reports)},
        )

        if config.plot and len(reports) > 1:
            plot_lines(
                out_dir / "norms.svg",
                [r.T for r in reports],
                {
                    "hdot_half^2": [r.hdot_half**2 for r in reports],
                    "besov": [r.besov for r in reports],
                    "lower bound": [math.nan if r.lower_bound is None else r.lower_bound for r in reports],
                },
                xlabel="T",
                logx=True,
            )
        print_check("lower bound below hdot_half^2", _respected(reports))
        print_check("translation invariance", gap < 1e-10, f"relative change {gap:.2e}")

    def demo_heaviside(self, config: RunConfig, out_dir: Path) -> None:
        """Write ``heaviside.csv`` (j, block, partial_sum) and ``heaviside.txt``."""
        h = circle_bump(config.C, config.shape).components[0]
        report = heaviside_demo(h)
        rows = [
            [float(j), value, partial]
            for (j, value), partial in zip(report.blocks, report.partial_sums, strict=True)
        ]
        write_columns(out_dir / "heaviside.csv", ["j", "block", "partial_sum"], rows)
        write_record(out_dir / "heaviside.txt", report.to_dict())

        if config.plot:
            j = np.array([row[0] for row in rows])
            plot_lines(
                out_dir / "heaviside.svg",
                j,
                {"block": [row[1] for row in rows], "limit": np.full(j.size, report.limit)},
                xlabel="j",
                logy=True,
            )
        print_check(
            "low blocks approach c / 2pi",
            report.low_spread <= 0.1,
            f"spread {report.low_spread:.3e}, limit {report.limit:.6e}",
        )
        print_check(
            "partial sums grow linearly",
            report.slope_error <= 0.1,
            f"slope {report.partial_slope:.6e}",
        )


def _respected(reports: list[NormReport]) -> bool:
    return all(r.bound_respected for r in reports)


def setup(lab: Lab) -> None:
    """
    Add the norm command group to the lab.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """
    lab.add_group(NormCommands(lab))
