import logging
from pathlib import Path

import numpy as np

from core.config import GROWTH_T0_OVER_C, SWEEP_T0_OVER_C, TOL_SPHERE
from core.console import print_check
from core.errors import ConfigError
from core.evolve import evolve, pohlmeyer_residual
from core.lab import CommandGroup, Lab, RunConfig
from core.profile import consistency_check, extract_profile
from core.records import plot_lines, read_slice, write_columns, write_record, write_slice

_logger: logging.Logger = logging.getLogger(__name__)


class EvolutionCommands(CommandGroup, name="Evolution Commands"):
    """
    Time evolution and profile extraction.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """

    def register(self) -> None:
        self.lab.add_subcommand(
            "evolve", self.evolve, "Evolve the data with the leapfrog scheme."
        )
        self.lab.add_subcommand(
            "profile",
            self.profile,
            "Extract the asymptotic profile (F, G, alpha) from an evolved slice.",
        )

    def evolve(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write one ``slice_<k>.csv`` per stored time and ``evolve.txt``.

        ``t_final`` defaults to ``2 C``.
        """
        spec = config.data_spec()
        t_final = SWEEP_T0_OVER_C * spec.C if config.t_final is None else config.t_final
        ev = evolve(spec, t_final, config.step, config.slice_times)

        metadata = {"C": spec.C, "eps": spec.eps, "m": spec.m, "bump": spec.bump_id}
        defect = 0.0
        for k, s in enumerate(sorted(ev.slices, key=lambda s: abs(s.time))):
            write_slice(out_dir / f"slice_{k}.csv", s, metadata)
            defect = max(defect, s.unit_defect())

        record: dict[str, object] = {
            "steps": ev.steps,
            "h_step": ev.h_step,
            "t_final": ev.final.time,
            "sphere_defect": defect,
            "max_raw_defect": ev.max_raw_defect,
            "alpha_center": ev.final.sample(0.0)[0].tolist(),
        }
        if len(ev.slices) >= 2:
            record.update(pohlmeyer_residual(ev).to_dict())
        write_record(out_dir / "evolve.txt", record)

        if config.plot:
            final = ev.final
            plot_lines(
                out_dir / "final.svg",
                final.x,
                {f"phi{k + 1}": final.values[:, k] for k in range(final.m)},
                xlabel="x",
                title=f"t = {final.time:g}",
            )
        print_check(
            "sphere constraint",
            defect <= TOL_SPHERE,
            f"max ||phi| - 1| = {defect:.3e}",
        )

    def profile(self, config: RunConfig, out_dir: Path) -> None:
        """
        Write ``profile.csv`` (s, F1..Fm, G1..Gm) and ``alpha.txt``.

        Reads ``--input`` when given; otherwise evolves the data to ``t0``
        (default ``4 C``) and also reports the consistency of the evolution
        with the extracted description.
        """
        C = config.C
        ev = None
        if config.input:
            slice_ = read_slice(Path(config.input))
            if slice_.m != config.m:
                raise ConfigError(f"{config.input} has m = {slice_.m}, config says m = {config.m}")
        else:
            spec = config.data_spec()
            t0 = GROWTH_T0_OVER_C * C if config.t0 is None else config.t0
            ev = evolve(spec, t0, config.step, [0.5 * t0])
            slice_ = ev.final
        p = extract_profile(slice_, C)

        header = ["s", *(f"F{k + 1}" for k in range(p.m)), *(f"G{k + 1}" for k in range(p.m))]
        write_columns(
            out_dir / "profile.csv",
            header,
            np.column_stack([p.s_grid.nodes, p.F, p.G]),
            {"C": C, "T0": p.T0, "m": p.m},
        )
        deviation = float(np.linalg.norm(p.deviation))
        record: dict[str, object] = {
            "alpha": p.alpha.tolist(),
            "alpha_deviation": deviation,
            "residual": p.residual,
            "endpoint_defect": p.endpoint_defect(),
            "T0": p.T0,
        }
        if ev is not None:
            record.update(consistency_check(ev, p).to_dict())
        write_record(out_dir / "alpha.txt", record)

        if config.plot:
            plot_lines(
                out_dir / "profile.svg",
                p.s_grid.nodes,
                {
                    **{f"F{k + 1}": p.F[:, k] for k in range(1, p.m)},
                    **{f"G{k + 1}": p.G[:, k] for k in range(1, p.m)},
                },
                xlabel="s",
            )
        print_check("profile extracted", True, f"|alpha - e1| = {deviation:.6e}")


def setup(lab: Lab) -> None:
    """
    Add the evolution command group to the lab.

    Parameters
    ----------
    lab : Lab
        The lab instance.
    """
    lab.add_group(EvolutionCommands(lab))
