import logging

import numpy as np
import pytest

from core.config import LabData
from core.errors import ConfigError, OutputError
from core.fields import SphereSlice
from core.grid import Grid1D
from core.records import (
    VersionStatus,
    compare_versions,
    format_value,
    plot_lines,
    read_columns,
    read_manifest,
    read_record,
    read_slice,
    write_columns,
    write_manifest,
    write_record,
    write_slice,
)


def _slice() -> SphereSlice:
    grid = Grid1D.symmetric(1.0, 0.25)
    theta = 0.3 * np.cos(np.pi * grid.nodes / 2.0)
    values = np.column_stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)])
    return SphereSlice(grid, values, 1.5, None, (-1.0, 1.0))


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value((1, 2.5)) == "1,2.5"
    assert format_value(7) == "7"


def test_columns_keep_metadata_and_values(tmp_path):
    path = tmp_path / "table.csv"
    rows = [[0.1, 2.0], [1.0 / 3.0, -4.5]]
    write_columns(path, ["a", "b"], rows, {"eps": 0.3, "m": 3})
    metadata, header, data = read_columns(path)
    assert metadata == {"eps": "0.29999999999999999", "m": "3"}
    assert header == ["a", "b"]
    np.testing.assert_array_equal(data, np.array(rows))


def test_columns_reject_ragged_rows(tmp_path):
    with pytest.raises(OutputError):
        write_columns(tmp_path / "bad.csv", ["a", "b"], [[1.0]])


def test_slice_file_keeps_time_and_support(tmp_path):
    original = _slice()
    path = write_slice(tmp_path / "slice.csv", original, {"eps": 0.3})
    restored = read_slice(path)
    assert restored.time == 1.5
    assert restored.support == (-1.0, 1.0)
    assert restored.grid.n == original.grid.n
    np.testing.assert_array_equal(restored.values, original.values)


def test_non_slice_file_is_rejected(tmp_path):
    path = write_columns(tmp_path / "t.csv", ["T", "value"], [[1.0, 2.0], [2.0, 3.0]])
    with pytest.raises(OutputError):
        read_slice(path)


def test_record_skips_comments(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("# comment\n\neps = 0.3\nm=3\n", encoding="utf-8")
    assert read_record(path) == {"eps": "0.3", "m": "3"}


def test_record_without_equals_is_a_config_error(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("eps 0.3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_record(path)


def test_missing_record_is_an_output_error(tmp_path):
    with pytest.raises(OutputError):
        read_record(tmp_path / "absent.txt")


def test_write_below_a_file_fails(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OutputError):
        write_record(blocker / "run.txt", {"eps": 0.3})


@pytest.mark.parametrize(
    ("recorded", "status"),
    [
        (LabData.VERSION, VersionStatus.SAME),
        (f"v{LabData.VERSION}", VersionStatus.SAME),
        ("0.1.0", VersionStatus.OLDER),
        ("99.0", VersionStatus.NEWER),
        (None, VersionStatus.MISSING),
        ("abc", VersionStatus.INVALID_VERSION),
    ],
)
def test_compare_versions(recorded, status):
    comparison = compare_versions(recorded)
    assert comparison.status is status
    assert comparison.reproducible == (status is VersionStatus.SAME)


def test_manifest_records_subcommand_and_version(tmp_path):
    path = write_manifest(tmp_path, "gen-data", {"eps": 0.3, "truncation": None})
    record = read_record(path)
    assert record["subcommand"] == "gen-data"
    assert record["version"] == LabData.VERSION
    assert record["truncation"] == ""
    assert "version" not in read_manifest(path)


def test_old_manifest_logs_a_warning(tmp_path, caplog):
    path = tmp_path / "manifest.txt"
    path.write_text("eps=0.3\nversion=0.1.0\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING, logger="core.records"):
        record = read_manifest(path)
    assert record == {"eps": "0.3"}
    assert any("0.1.0" in message for message in caplog.messages)


def test_plots_are_reproducible(tmp_path):
    x = [1.0, 10.0, 100.0]
    series = {"hdot": [0.1, 0.4, 0.9], "besov": [0.2, 0.5, 1.0]}
    first = plot_lines(tmp_path / "a.svg", x, series, xlabel="T", logx=True)
    second = plot_lines(tmp_path / "b.svg", x, series, xlabel="T", logx=True)
    content = first.read_bytes()
    assert b"<svg" in content
    assert content == second.read_bytes()
