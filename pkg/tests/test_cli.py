"""CLI harness: config validation, CSV/meta emission, exit codes, reruns."""

import csv
import json
import math
import shutil
import subprocess

import pytest

from rbmlab import cli
from rbmlab.acceptance import CheckResult


def run_cli(args):
    return cli.main(list(args))


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_csv(outdir, command):
    with open(outdir / f"{command}.csv", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def read_meta(outdir, command):
    with open(outdir / f"{command}.meta.json", encoding="utf-8") as fh:
        return json.load(fh)


DOS_SMALL = """
[ensemble]
kind = "simple"
size = 32
bandwidth = 4

[dos]
bins = 8
lo = -4.0
hi = 4.0
samples = 6
"""


# ---------------------------------------------------------------------------
# configuration errors -> exit 2
# ---------------------------------------------------------------------------

def test_unknown_section_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, DOS_SMALL + "\n[extra]\nfoo = 1\n")
    assert run_cli(["dos", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "unknown section" in capsys.readouterr().err


def test_unknown_key_rejected_by_name(tmp_path, capsys):
    cfg = write_config(tmp_path, DOS_SMALL.replace("bins = 8",
                                                   "bins = 8\nbinz = 9"))
    assert run_cli(["dos", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "unknown key" in err and "binz" in err


def test_missing_required_key(tmp_path, capsys):
    cfg = write_config(tmp_path, "[ensemble]\nkind = \"simple\"\nsize = 32\n")
    assert run_cli(["dos", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "bandwidth" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    "bins = \"many\"", "bins = true", "bins = 8.5", "samples = [3]",
])
def test_wrong_types_rejected(tmp_path, capsys, bad):
    cfg = write_config(tmp_path, DOS_SMALL.replace("bins = 8", bad))
    assert run_cli(["dos", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_unparseable_config(tmp_path, capsys):
    cfg = write_config(tmp_path, "[ensemble\nkind =")
    assert run_cli(["dos", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "parse" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    missing = str(tmp_path / "nope.toml")
    assert run_cli(["dos", "--config", missing, "--out", str(tmp_path)]) == 2


def test_domain_error_maps_to_config_exit(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[ensemble]
kind = "simple"
size = 32
bandwidth = 4

[paircorr]
energy = 1.95
samples = 4
""")
    assert run_cli(["paircorr", "--config", cfg, "--out", str(tmp_path)]) == 2


# ---------------------------------------------------------------------------
# closed-form commands and the output contract
# ---------------------------------------------------------------------------

def test_limits_table_values_and_rerun_bytes(tmp_path, capsys):
    cfg = write_config(tmp_path, "[limits_table]\nxi = [0.0, 0.25, 1.0]\n")
    out = tmp_path / "out"
    assert run_cli(["limits-table", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out, "limits-table")
    assert header == ["xi", "sine_kernel_ratio", "gue_r2"]
    table = {float(r[0]): (float(r[1]), float(r[2])) for r in rows}
    assert table[0.0][0] == pytest.approx(1.0, abs=1e-15)
    assert table[0.0][1] == pytest.approx(0.0, abs=1e-15)
    assert table[0.25][0] == pytest.approx(2.0 / math.pi, rel=1e-12)
    assert table[1.0][1] == pytest.approx(1.0, rel=1e-12)

    first_csv = (out / "limits-table.csv").read_bytes()
    first_meta = (out / "limits-table.meta.json").read_bytes()
    assert b"\r" not in first_csv
    assert run_cli(["limits-table", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "limits-table.csv").read_bytes() == first_csv
    assert (out / "limits-table.meta.json").read_bytes() == first_meta


def test_meta_holds_resolved_config_without_timestamps(tmp_path, capsys):
    cfg = write_config(tmp_path, "[limits_table]\n")
    out = tmp_path / "out"
    assert run_cli(["limits-table", "--config", cfg, "--out", str(out)]) == 0
    meta = read_meta(out, "limits-table")
    assert meta["command"] == "limits-table"
    assert meta["config"]["limits_table"]["xi"]  # defaults filled in
    assert meta["config"]["run"]["seed"] == cli.DEFAULT_SEED
    flat = json.dumps(meta).lower()
    assert "time" not in flat and "date" not in flat


def test_k0_spectrum_beta_and_series_column(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[k0_spectrum]
bandwidth = 10
nodes = 96
count = 4
""")
    out = tmp_path / "out"
    assert run_cli(["k0-spectrum", "--config", cfg, "--out", str(out)]) == 0
    meta = read_meta(out, "k0-spectrum")
    assert meta["beta"] == pytest.approx(400.0, rel=1e-12)
    header, rows = read_csv(out, "k0-spectrum")
    assert header == ["j", "eigenvalue", "series_approx"]
    for j, row in enumerate(rows):
        assert int(row[0]) == j
        assert float(row[2]) == pytest.approx(1.0 - j * (j + 1) / 400.0)


def test_mehler_ratio_column_blank_then_numeric(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[mehler]
bandwidth = 12
c = 2.0
nodes = 200
count = 3
""")
    out = tmp_path / "out"
    assert run_cli(["mehler", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out, "mehler")
    assert header == ["j", "eigenvalue", "ratio_to_previous"]
    assert rows[0][2] == ""
    ratios = [float(r[2]) for r in rows[1:]]
    meta = read_meta(out, "mehler")
    for got in ratios:
        assert got == pytest.approx(meta["predicted_ratio"], rel=1e-3)


def test_crossover_sweep_reports_monotone_flag(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[crossover_sweep]
n = [50, 200, 800]
bandwidth = 10
nodes = 64
""")
    out = tmp_path / "out"
    assert run_cli(["crossover-sweep", "--config", cfg, "--out",
                    str(out)]) == 0
    meta = read_meta(out, "crossover-sweep")
    header, rows = read_csv(out, "crossover-sweep")
    values = [float(r[3]) for r in rows]
    monotone = values == sorted(values) or values == sorted(values,
                                                            reverse=True)
    assert meta["monotone_in_n"] is monotone
    assert [int(r[0]) for r in rows] == [50, 200, 800]


def test_convergence_failure_exits_3(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[crossover_sweep]
n = [100]
bandwidth = 10
nodes = 4096
""")
    assert run_cli(["crossover-sweep", "--config", cfg, "--out",
                    str(tmp_path)]) == 3
    assert "did not converge" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sampling commands: seeds, workers, reruns
# ---------------------------------------------------------------------------

def test_dos_density_has_unit_mass(tmp_path, capsys):
    cfg = write_config(tmp_path, DOS_SMALL)
    out = tmp_path / "out"
    assert run_cli(["dos", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out, "dos")
    assert header == ["bin_left", "bin_right", "count", "density", "stderr"]
    mass = sum(float(r[3]) * (float(r[1]) - float(r[0])) for r in rows)
    assert mass == pytest.approx(1.0, abs=1e-9)
    meta = read_meta(out, "dos")
    assert meta["samples_used"] == 6
    assert meta["samples_skipped"] == 0


def test_workers_do_not_change_rows(tmp_path, capsys, monkeypatch):
    cfg = write_config(tmp_path, DOS_SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["dos", "--config", cfg, "--out", str(a),
                    "--workers", "1"]) == 0
    monkeypatch.setenv("RBMLAB_WORKERS", "3")
    assert run_cli(["dos", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "dos.csv").read_bytes() == (b / "dos.csv").read_bytes()
    assert read_meta(b, "dos")["config"]["run"]["workers"] == 3


def test_cli_workers_flag_beats_environment(tmp_path, capsys, monkeypatch):
    cfg = write_config(tmp_path, DOS_SMALL)
    out = tmp_path / "out"
    monkeypatch.setenv("RBMLAB_WORKERS", "5")
    assert run_cli(["dos", "--config", cfg, "--out", str(out),
                    "--workers", "1"]) == 0
    assert read_meta(out, "dos")["config"]["run"]["workers"] == 1


def test_seed_override_changes_draws_and_meta(tmp_path, capsys):
    cfg = write_config(tmp_path, DOS_SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["dos", "--config", cfg, "--out", str(a)]) == 0
    assert run_cli(["dos", "--config", cfg, "--out", str(b),
                    "--seed", "99"]) == 0
    assert read_meta(a, "dos")["config"]["run"]["seed"] == cli.DEFAULT_SEED
    assert read_meta(b, "dos")["config"]["run"]["seed"] == 99
    assert (a / "dos.csv").read_bytes() != (b / "dos.csv").read_bytes()


def test_charpoly_rows_per_xi(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[ensemble]
kind = "simple"
size = 24
bandwidth = 6

[charpoly]
xi = [0.0, 0.5]
samples = 16
""")
    out = tmp_path / "out"
    assert run_cli(["charpoly", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out, "charpoly")
    assert header == ["xi", "value_re", "value_im", "stderr", "typical",
                      "typical_stderr", "count", "exponent_offset"]
    assert [float(r[0]) for r in rows] == [0.0, 0.5]
    assert float(rows[0][1]) == 1.0 and float(rows[0][3]) == 0.0
    assert float(rows[0][4]) == 1.0
    assert float(rows[1][4]) > 0.0
    assert int(rows[1][6]) == 16


def test_r1_meta_placement_and_warning_column(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[ensemble]
kind = "simple"
size = 24
bandwidth = 6

[r1]
xi = [1.0]
energy = 1.9
samples = 64
placement = "split"
""")
    out = tmp_path / "out"
    assert run_cli(["r1", "--config", cfg, "--out", str(out)]) == 0
    meta = read_meta(out, "r1")
    assert meta["placement"] == "split"
    header, rows = read_csv(out, "r1")
    assert header[-1] == "regime_warning"
    assert rows[0][-1] == "1"  # energy well outside the controlled window


def test_paircorr_csv_shape(tmp_path, capsys):
    cfg = write_config(tmp_path, """
[ensemble]
kind = "simple"
size = 64
bandwidth = 32

[paircorr]
halfwidth = 6.0
bins = 4
r_max = 3.0
samples = 8
""")
    out = tmp_path / "out"
    assert run_cli(["paircorr", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out, "paircorr")
    assert header == ["r_left", "r_right", "count", "density", "stderr",
                      "regime_warning"]
    assert len(rows) == 4
    assert float(rows[-1][1]) == pytest.approx(3.0)
    assert all(r[-1] == "0" for r in rows)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_quick_subset_passes(tmp_path, capsys):
    cfg = write_config(tmp_path, "[validate]\ncriteria = [6]\n")
    out = tmp_path / "out"
    assert run_cli(["validate", "--config", cfg, "--out", str(out)]) == 0
    assert "PASS  6 mehler-ratio" in capsys.readouterr().out
    header, rows = read_csv(out, "validate")
    assert rows[0][0] == "6" and rows[0][2] == "1"
    assert read_meta(out, "validate")["all_passed"] is True


def test_validate_unknown_criterion_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, "[validate]\ncriteria = [13]\n")
    assert run_cli(["validate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_validate_failure_exits_1(tmp_path, capsys, monkeypatch):
    def fake_run_checks(indices=None, workers=1):
        return [CheckResult(3, "delocalized-chain-sinc", False, 0.5, 1e-2,
                            "forced failure for the exit-code contract")]

    monkeypatch.setattr(cli.acceptance, "run_checks", fake_run_checks)
    cfg = write_config(tmp_path, "[validate]\n")
    out = tmp_path / "out"
    assert run_cli(["validate", "--config", cfg, "--out", str(out)]) == 1
    assert "FAIL  3" in capsys.readouterr().out
    assert read_meta(out, "validate")["all_passed"] is False


# ---------------------------------------------------------------------------
# installed entry point
# ---------------------------------------------------------------------------

def test_console_script_is_installed(tmp_path):
    exe = shutil.which("rbmlab")
    assert exe, "console script not on PATH"
    done = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "--config" in done.stdout
