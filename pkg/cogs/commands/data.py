import logging
from pathlib import Path

from core.console import print_check
from core.data import build_initial_data, smallness_check, truncation_bound
from core.grid import Grid1D
from core.lab import CommandGroup, Lab, RunConfig
from core.records import plot_lines, write_record, write_slice

_logger: logging.Logger = logging.getLogger(__name__)


class DataCommands(CommandGroup, name="Data Commands"):
    """
    Generation of the initial data.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """

    def register(self) -> None:
        self.lab.add_subcommand(
            "gen-data", self.gen_data, "Sample the initial data f on [-2C, 2C]."
        )

    def gen_data(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write ``data.csv`` (x, f1..fm) and ``smallness.txt``.

        Parameters
        ----------
        config : RunConfig
            The run configuration.
        out_dir : Path
            Directory of this subcommand's outputs.
        """
        spec = config.data_spec()
        grid = Grid1D.symmetric(2.0 * spec.C, config.step)
        f = build_initial_data(spec, grid)
        if spec.truncation is None:
            f.validate()

        report = smallness_check(f, spec.eps, spec.bump)
        metadata = {
            "C": spec.C,
            "eps": spec.eps,
            "m": spec.m,
            "bump": spec.bump_id,
            "truncation": spec.truncation,
        }
        write_slice(out_dir / "data.csv", f, metadata)
        record = {**report.to_dict(), "unit_defect": f.unit_defect()}
        if spec.truncation is not None:
            record["truncation_bound"] = truncation_bound(spec)
        write_record(out_dir / "smallness.txt", record)

        if config.plot:
            plot_lines(
                out_dir / "data.svg",
                f.x,
                {f"f{k + 1}": f.values[:, k] for k in range(f.m)},
                xlabel="x",
                title=f"initial data, eps = {spec.eps:g}",
            )

        print_check(
            "data size bounded by eps",
            report.passed,
            f"max|f - e1| = {report.max_deviation:.3e}",
        )
        _logger.info(f"wrote {grid.n} samples of f to {out_dir}")


def setup(lab: Lab) -> None:
    """
    Add the data command group to the lab.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """
    lab.add_group(DataCommands(lab))
