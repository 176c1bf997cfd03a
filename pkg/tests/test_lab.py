import math

import pytest

from core.config import OUTPUT_DIR_ENV, LabData
from core.errors import ConfigError, ExitStatus
from core.lab import RunConfig, parse_and_dispatch
from core.records import read_columns, read_record

FAST = ["--h-step", "0.0625"]


def test_help_lists_the_subcommands(lab, capsys):
    assert parse_and_dispatch(["--help"], lab) == ExitStatus.OK.value
    out = capsys.readouterr().out
    for name in ("gen-data", "evolve", "norms", "perturb", "sweep-eps", "cascade"):
        assert name in out


def test_unknown_flag_is_a_usage_error(lab):
    assert parse_and_dispatch(["gen-data", "--bogus"], lab) == ExitStatus.USAGE.value


def test_gen_data_writes_files_and_manifest(lab, tmp_path):
    status = parse_and_dispatch(["gen-data", "--output-dir", str(tmp_path), *FAST], lab)
    assert status == ExitStatus.OK.value
    out = tmp_path / "gen-data"
    for name in ("data.csv", "smallness.txt", "manifest.txt"):
        assert (out / name).is_file()
    manifest = read_record(out / "manifest.txt")
    assert manifest["version"] == LabData.VERSION
    assert manifest["subcommand"] == "gen-data"


def test_manifest_reproduces_the_run(lab, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    args = ["gen-data", "--output-dir", str(first), "--eps", "0.2", "--m", "4", *FAST]
    assert parse_and_dispatch(args, lab) == ExitStatus.OK.value
    manifest = first / "gen-data" / "manifest.txt"
    rerun = ["gen-data", "--config", str(manifest), "--output-dir", str(second)]
    assert parse_and_dispatch(rerun, lab) == ExitStatus.OK.value
    original = (first / "gen-data" / "data.csv").read_bytes()
    assert (second / "gen-data" / "data.csv").read_bytes() == original


def test_perturb_rejects_circle_targets(lab, tmp_path):
    status = parse_and_dispatch(["perturb", "--m", "2", "--output-dir", str(tmp_path)], lab)
    assert status == ExitStatus.CONFIG.value
    assert not (tmp_path / "perturb" / "manifest.txt").exists()


def test_bad_config_value_is_a_config_error(lab, tmp_path):
    status = parse_and_dispatch(["gen-data", "--C", "-1", "--output-dir", str(tmp_path)], lab)
    assert status == ExitStatus.CONFIG.value


def test_constant_data_have_zero_norms(lab, tmp_path):
    args = ["norms", "--eps", "0", "--output-dir", str(tmp_path), *FAST]
    assert parse_and_dispatch(args, lab) == ExitStatus.OK.value
    _, header, data = read_columns(tmp_path / "norms" / "norms.csv")
    assert header == ["T", "hdot_half", "besov", "lower_bound"]
    assert data[0, 1] == 0.0
    assert data[0, 2] == 0.0
    assert math.isnan(data[0, 3])


def test_output_dir_on_a_file_is_an_output_error(lab, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    status = parse_and_dispatch(["gen-data", "--output-dir", str(blocker), *FAST], lab)
    assert status == ExitStatus.OUTPUT.value


def test_unexpected_failure_is_an_internal_error(lab, tmp_path):
    def broken(config, out_dir):
        raise RuntimeError("boom")

    lab.handlers["gen-data"] = broken
    status = parse_and_dispatch(["gen-data", "--output-dir", str(tmp_path)], lab)
    assert status == ExitStatus.INTERNAL.value


def test_output_dir_from_the_environment(lab, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert parse_and_dispatch(["gen-data", *FAST], lab) == ExitStatus.OK.value
    assert (tmp_path / "env" / "gen-data" / "data.csv").is_file()


def test_flags_override_the_file():
    config = RunConfig.from_sources(
        "evolve", {"eps": 0.2, "m": None}, {"eps": "0.4", "m": "4", "slice_times": "0.5,1"}
    )
    assert config.eps == 0.2
    assert config.m == 4
    assert config.slice_times == (0.5, 1.0)
    assert config.subcommand == "evolve"


@pytest.mark.parametrize("file_values", [{"colour": "blue"}, {"eps": "lots"}, {"m": "1"}])
def test_bad_file_values(file_values):
    with pytest.raises(ConfigError):
        RunConfig.from_sources("evolve", {}, file_values)


def test_default_step():
    assert RunConfig().step == pytest.approx(1.0 / 256.0)
    assert RunConfig(h_step=0.125).step == 0.125
