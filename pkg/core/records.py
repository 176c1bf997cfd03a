import logging
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from packaging import version  # noqa: E402
from packaging.version import InvalidVersion  # noqa: E402

from core.config import MANIFEST_FILE, SVG_HASH_SALT, LabData  # noqa: E402
from core.errors import ConfigError, OutputError  # noqa: E402
from core.fields import SphereSlice  # noqa: E402
from core.grid import FloatArray, Grid1D  # noqa: E402

_logger: logging.Logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """
    Render a value for a key=value line or a metadata comment.

    Floats use ``%.17g`` so they read back bit for bit; sequences are
    comma-joined; None is the empty string.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, Path):
        return value.as_posix()
    return str(value)


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise OutputError(f"cannot create directory {path.parent}: {error}") from error


def _write_text(path: Path, text: str) -> None:
    _ensure_parent(path)
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as error:
        raise OutputError(f"cannot write {path}: {error}") from error
    _logger.debug(f"wrote {path}")


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as error:
        raise OutputError(f"cannot read {path}: {error}") from error


# -- columnar files ----------------------------------------------------------


def write_columns(
    path: Path,
    header: Sequence[str],
    rows: Sequence[Sequence[float]] | FloatArray,
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write a comma-separated table with ``# key=value`` metadata lines.

    Parameters
    ----------
    path : Path
        Destination file.
    header : sequence of str
        Column names.
    rows : array_like
        One row per line; every value is written with ``%.17g``.
    metadata : mapping, optional
        Written above the header in key order.

    Returns
    -------
    Path
        The written path.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    lines = [f"# {key}={format_value(metadata[key])}" for key in sorted(metadata or {})]
    lines.append(",".join(header))
    for row in rows:
        if len(row) != len(header):
            raise OutputError(f"row of {len(row)} values under {len(header)} columns")
        lines.append(",".join("%.17g" % float(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")
    return path


def read_columns(path: Path) -> tuple[dict[str, str], list[str], FloatArray]:
    """
    Read a file written by :func:`write_columns`.

    Returns
    -------
    tuple
        The metadata (values as strings), the header and a 2-D array.
    """
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    for number, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
            continue
        if header is None:
            header = [name.strip() for name in line.split(",")]
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as error:
            raise OutputError(f"{path}:{number}: malformed row") from error
    if header is None:
        raise OutputError(f"{path} has no header row")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return metadata, header, data


def write_slice(
    path: Path, slice_: SphereSlice, metadata: Mapping[str, Any] | None = None
) -> Path:
    """Write a slice as columns ``x, f1..fm`` with its time in the metadata."""
    header = ["x", *(f"f{k + 1}" for k in range(slice_.m))]
    meta = {"t": slice_.time, "m": slice_.m, **(metadata or {})}
    if slice_.support is not None:
        meta["support"] = slice_.support
    table = np.column_stack([slice_.x, slice_.values])
    return write_columns(path, header, table, meta)


def read_slice(path: Path) -> SphereSlice:
    """
    Read a slice written by :func:`write_slice`.

    Raises
    ------
    OutputError
        If the file is not a slice on a uniform grid.
    """
    metadata, header, data = read_columns(path)
    if not header or header[0] != "x" or data.shape[0] < 2:
        raise OutputError(f"{path} is not a slice file")
    x = data[:, 0]
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise OutputError(f"{path} is not sampled on a uniform grid")
    grid = Grid1D(float(x[0]), float(x[-1]), x.size)
    support = None
    if metadata.get("support"):
        lo, hi = (float(v) for v in metadata["support"].split(","))
        support = (lo, hi)
    return SphereSlice(grid, data[:, 1:], float(metadata.get("t", "0")), None, support)


# -- key=value records -------------------------------------------------------


def write_record(path: Path, record: Mapping[str, Any]) -> Path:
    """Write one ``key=value`` line per entry, keys sorted."""
    lines = [f"{key}={format_value(record[key])}" for key in sorted(record)]
    _write_text(path, "\n".join(lines) + "\n")
    return path


def read_record(path: Path) -> dict[str, str]:
    """
    Parse a ``key=value`` file; blank lines and ``#`` comments are skipped.

    Raises
    ------
    OutputError
        If the file cannot be read.
    ConfigError
        If a line has no ``=``.
    """
    record: dict[str, str] = {}
    for number, line in enumerate(_read_text(path).splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{number}: expected key=value, got {stripped!r}")
        record[key.strip()] = value.strip()
    return record


# -- manifests ---------------------------------------------------------------


class VersionStatus(Enum):
    """
    How a manifest's version relates to the running version.

    Attributes
    ----------
    SAME : str
        The manifest was written by this version.
    OLDER : str
        The manifest predates this version.
    NEWER : str
        The manifest was written by a later version.
    MISSING : str
        The manifest records no version.
    INVALID_VERSION : str
        The recorded version cannot be parsed.
    """

    SAME = "same"
    OLDER = "older"
    NEWER = "newer"
    MISSING = "missing"
    INVALID_VERSION = "invalid_version"


@dataclass(frozen=True)
class VersionComparison:
    """
    Result of comparing a manifest version with the running one.

    Attributes
    ----------
    status : VersionStatus
        The relation between the two versions.
    recorded : str
        The version string found in the manifest.
    current : str
        The running version.
    """

    status: VersionStatus
    recorded: str
    current: str

    @property
    def reproducible(self) -> bool:
        return self.status is VersionStatus.SAME


def _normalize_version(version_str: str) -> str:
    """Strip prefixes such as ``v`` or ``version`` from a version string."""
    normalized = re.sub(
        r"^(v|version|release)[\s\-_]*", "", version_str.strip(), flags=re.IGNORECASE
    )
    return re.sub(r"^[^\d]*", "", normalized)


def compare_versions(recorded: str | None, current: str = LabData.VERSION) -> VersionComparison:
    """
    Compare a recorded version with the running version.

    Outputs are only guaranteed to reproduce when the two match, since any
    numerical change bumps the version.
    """
    if not recorded:
        return VersionComparison(VersionStatus.MISSING, "", current)
    try:
        recorded_ver = version.parse(_normalize_version(recorded))
        current_ver = version.parse(_normalize_version(current))
    except InvalidVersion as e:
        _logger.error(f"Invalid version format: {e}")
        return VersionComparison(VersionStatus.INVALID_VERSION, recorded, current)
    if recorded_ver < current_ver:
        status = VersionStatus.OLDER
    elif recorded_ver > current_ver:
        status = VersionStatus.NEWER
    else:
        status = VersionStatus.SAME
    return VersionComparison(status, recorded, current)


def write_manifest(directory: Path, subcommand: str, fields: Mapping[str, Any]) -> Path:
    """
    Write ``manifest.txt``: the subcommand, every run parameter and the version.

    The manifest can be passed back with ``--config`` to repeat the run.
    """
    record = {**fields, "subcommand": subcommand, "version": LabData.VERSION}
    return write_record(directory / MANIFEST_FILE, record)


def read_manifest(path: Path) -> dict[str, str]:
    """
    Read a manifest or config file and check its version.

    A version that differs from the running one is logged as a warning;
    the run still proceeds. The ``version`` key is removed from the result.
    """
    record = read_record(path)
    recorded = record.pop("version", None)
    if recorded is None:
        return record
    comparison = compare_versions(recorded)
    if not comparison.reproducible:
        _logger.warning(
            f"{path} was written by version {recorded} ({comparison.status.value}), "
            f"running {comparison.current}; outputs may differ"
        )
    return record


# -- plots -------------------------------------------------------------------


def plot_lines(
    path: Path,
    x: Sequence[float] | FloatArray,
    series: Mapping[str, Sequence[float] | FloatArray],
    *,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    logx: bool = False,
    logy: bool = False,
) -> Path:
    """
    Write an SVG line plot, one line per series.

    The SVG carries no date and uses a fixed id salt, so repeated runs
    produce identical files. Non-positive values are dropped from log axes.

    Raises
    ------
    OutputError
        If the file cannot be written.
    """
    _ensure_parent(path)
    plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    xs = np.asarray(x, dtype=float)
    try:
        for label in series:
            ys = np.asarray(series[label], dtype=float)
            keep = np.isfinite(ys) & np.isfinite(xs)
            if logx:
                keep &= xs > 0.0
            if logy:
                ys = np.abs(ys)
                keep &= ys > 0.0
            ax.plot(xs[keep], ys[keep], marker="o", markersize=3, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as error:
        raise OutputError(f"cannot write {path}: {error}") from error
    finally:
        plt.close(fig)
    _logger.debug(f"wrote {path}")
    return path
