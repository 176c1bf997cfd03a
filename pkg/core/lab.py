import argparse
import importlib
import logging
import os
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, TypeAlias

from core.config import (
    CASCADE_SCALES,
    COG_DIR,
    DEFAULT_BUMP,
    DEFAULT_C,
    DEFAULT_EPS,
    DEFAULT_M,
    DEFAULT_STEPS_PER_C,
    EPS_SWEEP,
    KAPPA1,
    KAPPA2,
    KAPPA_CANDIDATE,
    WORKERS,
    LabData,
)
from core.data import BUMP_SHAPES, DataSpec
from core.errors import ConfigError, ExitStatus, LabError, OutputError
from core.records import read_manifest, write_manifest
from core.utils import resolve_output_dir

_logger: logging.Logger = logging.getLogger(__name__)

_ROOT: Path = Path(__file__).resolve().parent.parent


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse_optional(text: str) -> Any:
        return None if text.strip() == "" else parse(text)

    return parse_optional


def _flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """
    Every parameter a run uses.

    Built from three layers, lowest first: the defaults below, an optional
    ``key=value`` file and the command-line flags. The resolved config is
    echoed into the run manifest, which can be fed back with ``--config``.

    Attributes
    ----------
    subcommand : str
        The subcommand being run.
    C, eps, m, shape, truncation
        Data parameters.
    h_step : float or None
        Grid step; None means ``C / 256``.
    t_final : float or None
        Evolution time; None lets each subcommand pick its default.
    slice_times : tuple of float
        Extra slices to store.
    t_list : tuple of float
        Synthesis times (absolute); empty means the default sweep.
    eps_list : tuple of float
        Amplitudes of the epsilon sweeps.
    h_steps : tuple of float
        Step sizes of the multi-resolution studies; empty means defaults.
    t0 : float or None
        Profile extraction time.
    delta : float or None
        Null-lattice spacing.
    k_scales : int
        Number of cascade copies.
    workers : int
        Worker processes for sweeps.
    kappa1, kappa2 : float
        Lower-bound window constants.
    kappa : float
        Constant of the perturbative alpha prediction.
    input : str
        Slice file read by ``norms`` and ``profile`` (empty to generate).
    plot : bool
        Whether to write SVG plots.
    output_dir : str
        Resolved output root.
    """

    subcommand: str = ""
    C: float = DEFAULT_C
    eps: float = DEFAULT_EPS
    m: int = DEFAULT_M
    shape: str = DEFAULT_BUMP
    truncation: int | None = None
    h_step: float | None = None
    t_final: float | None = None
    slice_times: tuple[float, ...] = ()
    t_list: tuple[float, ...] = ()
    eps_list: tuple[float, ...] = EPS_SWEEP
    h_steps: tuple[float, ...] = ()
    t0: float | None = None
    delta: float | None = None
    k_scales: int = CASCADE_SCALES
    workers: int = WORKERS
    kappa1: float = KAPPA1
    kappa2: float = KAPPA2
    kappa: float = KAPPA_CANDIDATE
    input: str = ""
    plot: bool = False
    output_dir: str = ""

    def __post_init__(self) -> None:
        if self.C <= 0.0:
            raise ConfigError(f"C must be positive, got {self.C!r}")
        if self.m < 2:
            raise ConfigError(f"m must be at least 2, got {self.m}")
        if self.shape not in BUMP_SHAPES:
            raise ConfigError(f"unknown bump shape {self.shape!r}; choose from {sorted(BUMP_SHAPES)}")
        if self.h_step is not None and not 0.0 < self.h_step <= self.C:
            raise ConfigError(f"h_step must lie in (0, C], got {self.h_step!r}")
        if any(h <= 0.0 for h in self.h_steps):
            raise ConfigError("every entry of h_steps must be positive")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.kappa1 <= 0.0 or self.kappa2 <= 0.0:
            raise ConfigError("window constants kappa1 and kappa2 must be positive")
        if self.delta is not None and self.delta <= 0.0:
            raise ConfigError(f"delta must be positive, got {self.delta!r}")

    @classmethod
    def parsers(cls) -> dict[str, Callable[[str], Any]]:
        """Text parsers for each field, used for config files."""
        return {
            "subcommand": str,
            "C": float,
            "eps": float,
            "m": int,
            "shape": str,
            "truncation": _optional(int),
            "h_step": _optional(float),
            "t_final": _optional(float),
            "slice_times": _float_list,
            "t_list": _float_list,
            "eps_list": _float_list,
            "h_steps": _float_list,
            "t0": _optional(float),
            "delta": _optional(float),
            "k_scales": int,
            "workers": int,
            "kappa1": float,
            "kappa2": float,
            "kappa": float,
            "input": str,
            "plot": _flag,
            "output_dir": str,
        }

    @classmethod
    def from_sources(
        cls,
        subcommand: str,
        flags: Mapping[str, Any],
        file_values: Mapping[str, str] | None = None,
    ) -> "RunConfig":
        """
        Merge defaults, file values and flags, in that order.

        Parameters
        ----------
        subcommand : str
            The subcommand being run.
        flags : mapping
            Parsed flag values; None means "not given".
        file_values : mapping, optional
            Raw strings from a ``key=value`` file.

        Raises
        ------
        ConfigError
            On unknown keys or values that do not parse.
        """
        parsers = cls.parsers()
        values: dict[str, Any] = {}
        for key, text in (file_values or {}).items():
            if key not in parsers:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "subcommand":
                if text and text != subcommand:
                    _logger.warning(f"config was written for {text!r}, running {subcommand!r}")
                continue
            try:
                values[key] = parsers[key](text)
            except ValueError as error:
                raise ConfigError(f"bad value for {key}: {text!r}") from error
        for key, value in flags.items():
            if key in parsers and value is not None:
                values[key] = value
        values["subcommand"] = subcommand
        return cls(**values)

    @property
    def step(self) -> float:
        return self.C / DEFAULT_STEPS_PER_C if self.h_step is None else self.h_step

    def data_spec(self, eps: float | None = None) -> DataSpec:
        return DataSpec.canonical(
            self.C, self.eps if eps is None else eps, self.m, self.truncation, self.shape
        )

    def to_record(self) -> dict[str, Any]:
        return asdict(self)


Handler: TypeAlias = Callable[[RunConfig, Path], None]


class CommandGroup:
    """
    Base class of a group of subcommands.

    Subclasses give themselves a display name with
    ``class Evolution(CommandGroup, name="Evolution Commands")`` and add
    their subcommands in :meth:`register`.

    Parameters
    ----------
    lab : Lab
        The lab the group belongs to.
    """

    group_name: str = ""

    def __init_subclass__(cls, name: str = "", **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        cls.group_name = name or cls.__name__

    def __init__(self, lab: "Lab") -> None:
        self.lab: Lab = lab

    def register(self) -> None:
        raise NotImplementedError


class Lab:
    """
    The command-line front end: parser, command groups and dispatch.

    Attributes
    ----------
    parser : argparse.ArgumentParser
        Top-level parser; one subparser per subcommand.
    groups : dict
        Loaded command groups by name.
    handlers : dict
        Subcommand name to handler.
    """

    def __init__(self) -> None:
        self.parser: argparse.ArgumentParser = argparse.ArgumentParser(
            prog=LabData.NAME,
            description=(
                "Numerical laboratory for one-dimensional wave maps into spheres "
                "and the growth of their critical norms."
            ),
        )
        self.parser.add_argument(
            "--version", action="version", version=f"%(prog)s {LabData.VERSION}"
        )
        self._subparsers = self.parser.add_subparsers(
            dest="subcommand", metavar="SUBCOMMAND", title="subcommands"
        )
        self._subparsers.required = True
        self._common = self._common_parser()
        self.groups: dict[str, CommandGroup] = {}
        self.handlers: dict[str, Handler] = {}

    @staticmethod
    def _common_parser() -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        io = common.add_argument_group("run")
        io.add_argument("--config", metavar="PATH", help="key=value file (a manifest works)")
        io.add_argument("--output-dir", dest="output_dir", metavar="DIR")
        io.add_argument("--plot", action="store_const", const=True, default=None)
        io.add_argument("--workers", type=int)
        io.add_argument("--input", metavar="PATH", help="slice file to read")

        data = common.add_argument_group("data")
        data.add_argument("--C", type=float, dest="C")
        data.add_argument("--eps", type=float)
        data.add_argument("--m", type=int)
        data.add_argument("--shape", choices=sorted(BUMP_SHAPES))
        data.add_argument("--truncation", type=int)

        numerics = common.add_argument_group("numerics")
        numerics.add_argument("--h-step", dest="h_step", type=float)
        numerics.add_argument("--t-final", dest="t_final", type=float)
        numerics.add_argument("--slice-times", dest="slice_times", type=_float_list)
        numerics.add_argument("--t-list", dest="t_list", type=_float_list)
        numerics.add_argument("--eps-list", dest="eps_list", type=_float_list)
        numerics.add_argument("--h-steps", dest="h_steps", type=_float_list)
        numerics.add_argument("--t0", type=float)
        numerics.add_argument("--delta", type=float)
        numerics.add_argument("--k-scales", dest="k_scales", type=int)
        numerics.add_argument("--kappa1", type=float)
        numerics.add_argument("--kappa2", type=float)
        numerics.add_argument("--kappa", type=float)
        return common

    def add_group(self, group: CommandGroup) -> None:
        if group.group_name in self.groups:
            raise ConfigError(f"command group {group.group_name!r} loaded twice")
        group.register()
        self.groups[group.group_name] = group
        _logger.debug(f"loaded command group {group.group_name!r}")

    def add_subcommand(self, name: str, handler: Handler, summary: str) -> None:
        if name in self.handlers:
            raise ConfigError(f"subcommand {name!r} registered twice")
        self._subparsers.add_parser(
            name, parents=[self._common], help=summary, description=summary
        )
        self.handlers[name] = handler

    def load_groups(self, cog_dir: str = COG_DIR) -> None:
        """
        Import every module under ``<cog_dir>/<folder>/`` and call its
        ``setup(lab)`` hook.
        """
        base = _ROOT / cog_dir
        for folder in sorted(os.listdir(base)):
            if not (base / folder).is_dir() or folder.startswith("__"):
                continue
            for cog in sorted(os.listdir(base / folder)):
                if cog.endswith(".py") and not cog.startswith("__"):
                    module = importlib.import_module(cog_dir + "." + folder + "." + cog[:-3])
                    module.setup(self)

    def build_config(self, args: argparse.Namespace) -> RunConfig:
        flags = vars(args).copy()
        subcommand = flags.pop("subcommand")
        config_path = flags.pop("config", None)
        file_values = read_manifest(Path(config_path)) if config_path else None
        config = RunConfig.from_sources(subcommand, flags, file_values)
        resolved = resolve_output_dir(config.output_dir or None)
        return RunConfig(**{**config.to_record(), "output_dir": resolved.as_posix()})

    def run(self, argv: Sequence[str]) -> int:
        try:
            args = self.parser.parse_args(list(argv))
        except SystemExit as exit_:
            return 0 if exit_.code is None else int(exit_.code)

        try:
            config = self.build_config(args)
            out_dir = Path(config.output_dir) / config.subcommand
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
            except OSError as error:
                raise OutputError(f"cannot create output directory {out_dir}: {error}") from error
            _logger.info(f"running {config.subcommand} into {out_dir}")
            self.handlers[config.subcommand](config, out_dir)
            write_manifest(out_dir, config.subcommand, _manifest_fields(config))
        except LabError as error:
            _logger.error(f"{type(error).__name__}: {error}")
            return error.status.value
        except Exception as e:
            _logger.exception(f"An error occurred: {e}")
            return ExitStatus.INTERNAL.value
        return ExitStatus.OK.value


def _manifest_fields(config: RunConfig) -> dict[str, Any]:
    return {f.name: getattr(config, f.name) for f in fields(config) if f.name != "subcommand"}


def parse_and_dispatch(argv: Sequence[str], lab: Lab | None = None) -> int:
    """
    Parse ``argv``, run the subcommand and write its manifest.

    Parameters
    ----------
    argv : sequence of str
        Arguments without the program name.
    lab : Lab, optional
        A lab with its groups already loaded; built on demand otherwise.

    Returns
    -------
    int
        0 on success, the error's status for a lab error, 2 for a usage
        error and 1 for anything unexpected.
    """
    if lab is None:
        lab = Lab()
        lab.load_groups()
    return lab.run(argv)
