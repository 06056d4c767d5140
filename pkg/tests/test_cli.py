import numpy as np
import pytest

from firngas import cli

BASE_PARAMS = """\
[params]
M_alpha = 0.04
g = 9.81
R = 8.314
T = 250.0
tau = 0.3
lam = 0.7
v = 0.5
w_air = 0.1
z_F = 1.0
T_e = 1.0
"""


def write_config(tmp_path, f_kind="affine", d_kind="affine", atmosphere="ramp",
                 dt="auto", n=11, f_value=None):
    if f_kind == "affine":
        f_section = "[profile.f]\nkind = affine\nintercept = 1.0\nslope = -1.0\n"
    else:
        f_section = f"[profile.f]\nkind = constant\nvalue = {f_value}\n"
    if d_kind == "affine":
        d_section = "[profile.D]\nkind = affine\nintercept = 1.0\nslope = -1.0\n"
    else:
        d_section = "[profile.D]\nkind = constant\nvalue = 1.0\n"
    text = (BASE_PARAMS
            + f"[mesh]\nn = {n}\n[time]\ndt = {dt}\n"
            + f_section + d_section
            + f"[atmosphere]\nkind = {atmosphere}\namplitude = 1.0\n"
            + "[analysis]\nc_D = 1.0\n")
    path = tmp_path / "run.ini"
    path.write_text(text)
    return str(path)


class TestConfig:
    def test_missing_file(self, capsys):
        assert cli.main(["--config", "/nonexistent/run.ini"]) == cli.EXIT_IO
        assert "error" in capsys.readouterr().err

    def test_missing_key(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[params]\ng = 9.81\n")
        assert cli.main(["--config", str(path)]) == cli.EXIT_IO

    def test_load_roundtrip(self, tmp_path):
        config = cli.load_config(write_config(tmp_path))
        assert config.mesh.n == 11
        assert config.dt == "auto"
        assert config.c_D == 1.0


class TestCmdRun:
    def test_zero_atmosphere_writes_zero_csv(self, tmp_path):
        cfg = write_config(tmp_path, f_kind="constant", f_value=1.0,
                           d_kind="constant", atmosphere="zero")
        out = tmp_path / "traj.csv"
        assert cli.main(["--config", cfg, "--out", str(out)]) == cli.EXIT_OK
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert np.all(data[:, 1:] == 0.0)

    def test_report_embedded_as_comments(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "traj.csv"
        assert cli.main(["--config", cfg, "--out", str(out)]) == cli.EXIT_OK
        text = out.read_text()
        assert "# dt_max:" in text
        assert text.endswith("\n")

    def test_negative_profile_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, f_kind="constant", f_value=-1.0)
        assert cli.main(["--config", cfg, "--out", str(tmp_path / "o.csv")]) == \
            cli.EXIT_ADMISSIBILITY
        assert "(5)" in capsys.readouterr().err

    def test_dt_above_bound_exit_2_quotes_bound(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dt="0.5")
        assert cli.main(["--config", cfg, "--out", str(tmp_path / "o.csv")]) == \
            cli.EXIT_ADMISSIBILITY
        assert "dt_max" in capsys.readouterr().err

    def test_force_overrides(self, tmp_path):
        cfg = write_config(tmp_path, dt="0.5")
        out = tmp_path / "o.csv"
        assert cli.main(["--config", cfg, "--out", str(out), "--force"]) == cli.EXIT_OK
        assert out.exists()

    def test_byte_reproducible(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["--config", cfg, "--out", str(out1)]) == cli.EXIT_OK
        assert cli.main(["--config", cfg, "--out", str(out2)]) == cli.EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_stride(self, tmp_path):
        cfg = write_config(tmp_path)
        full, strided = tmp_path / "full.csv", tmp_path / "strided.csv"
        cli.main(["--config", cfg, "--out", str(full)])
        cli.main(["--config", cfg, "--out", str(strided), "--stride", "25"])
        assert len(strided.read_text().splitlines()) < len(full.read_text().splitlines())

    def test_n_override(self, tmp_path):
        cfg = write_config(tmp_path, n=11)
        out = tmp_path / "o.csv"
        cli.main(["--config", cfg, "--out", str(out), "--n", "6"])
        header = [ln for ln in out.read_text().splitlines()
                  if not ln.startswith("#")][0]
        assert len(header.split(",")) == 7  # t plus 6 node columns


class TestCmdCheck:
    def test_constant_profiles_report_B0(self, tmp_path, capsys):
        cfg = write_config(tmp_path, f_kind="constant", f_value=1.0, d_kind="constant")
        assert cli.main(["--config", cfg, "--check-only"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        b0 = [ln for ln in out.splitlines() if ln.startswith("B0:")][0]
        assert float(b0.split(":")[1]) == pytest.approx(0.5, abs=1e-6)

    def test_no_trajectory_emitted(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        report_path = tmp_path / "report.txt"
        assert cli.main(["--config", cfg, "--check-only",
                         "--out", str(report_path)]) == cli.EXIT_OK
        assert "t," not in report_path.read_text()

    def test_admissibility_failure(self, tmp_path, capsys):
        cfg = write_config(tmp_path, f_kind="constant", f_value=-1.0)
        assert cli.main(["--config", cfg, "--check-only"]) == cli.EXIT_ADMISSIBILITY

    def test_repeatable(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        cli.main(["--config", cfg, "--check-only", "--out", str(a)])
        cli.main(["--config", cfg, "--check-only", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCmdOracleCompare:
    def test_smooth_profiles_pass(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "oracle.csv"
        assert cli.main(["--config", cfg, "--oracle-compare",
                         "--out", str(out)]) == cli.EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("kind,")
        assert any(ln.startswith("Mf,") for ln in lines)
        assert any(ln.startswith("# pd_M: true") for ln in lines)

    def test_constant_weight_at_rounding_level(self, tmp_path):
        cfg = write_config(tmp_path, f_kind="constant", f_value=1.0, d_kind="constant")
        out = tmp_path / "oracle.csv"
        assert cli.main(["--config", cfg, "--oracle-compare",
                         "--out", str(out)]) == cli.EXIT_OK
        mf = [ln for ln in out.read_text().splitlines() if ln.startswith("Mf,")][0]
        assert float(mf.split(",")[1]) <= 1e-13
