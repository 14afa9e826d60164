import pytest

from oscphase.cli import main, parse_config
from oscphase.errors import ConfigError
from oscphase.study import CSV_HEADER

FRESNEL_CFG = """\
f = x^2
g = 1
alpha = -1
beta = 1
n = 2
"""

QUADRATIC_CFG = """\
f = x^2
g = 1
alpha = -1
beta = 1
n = 2
"""

MONOTONE_CFG = """\
f = T*(x + x^2/10)
g = 1/x
alpha = 1
beta = 2
n = 3
T = 10000
"""

CUBIC_CFG = """\
f = T*(x^2 + x^3/3)
g = 1/(1+x^2)
alpha = -0.5
beta = 0.5
n = 2
T = 1024
"""

MULTI_STATIONARY_CFG = """\
f = T*(x^4 - x^2)
g = 1
alpha = -1
beta = 1
n = 1
T = 64
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestParseConfig:
    def test_round_trip(self):
        cfg = parse_config(CUBIC_CFG + "[params]\na = 2.5\n")
        assert cfg.f == "T*(x^2 + x^3/3)"
        assert cfg.params == {"a": 2.5}
        p = cfg.to_problem()
        assert p.T == 1024.0
        assert p.M == 1.0  # default beta - alpha

    def test_missing_key(self):
        with pytest.raises(ConfigError, match="missing key: f"):
            parse_config("g = 1\nalpha = 0\nbeta = 1\nn = 2\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key: zz"):
            parse_config(FRESNEL_CFG + "zz = 3\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(FRESNEL_CFG + "f = x\n")

    def test_t_inferred_from_curvature(self):
        cfg = parse_config(QUADRATIC_CFG)
        p = cfg.to_problem()
        # max|f''| * M^2 = 2 * 4
        assert p.T == pytest.approx(8.0)

    def test_t_required_when_f_references_it(self):
        with pytest.raises(ConfigError, match="T is required"):
            parse_config("f = T*x^2\ng = 1\nalpha = -1\nbeta = 1\nn = 2\n").to_problem()


class TestCmdQuad:
    def test_fresnel_output(self, tmp_path, capsys):
        cfg = write(tmp_path, "fresnel.cfg", FRESNEL_CFG)
        assert main(["quad", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert out.startswith("0.488253406075 + 0.343415678364i")
        assert "panels:" in out

    def test_full_period_zero(self, tmp_path, capsys):
        cfg = write(tmp_path, "lin.cfg",
                    "f = x\ng = 1\nalpha = 0\nbeta = 1\nn = 1\nT = 1\nM = 1\n")
        assert main(["quad", "--config", cfg]) == 0
        assert capsys.readouterr().out.startswith(
            "0.000000000000 + 0.000000000000i")

    def test_unattainable_tol_exits_3(self, tmp_path, capsys):
        cfg = write(tmp_path, "fresnel.cfg", FRESNEL_CFG)
        assert main(["quad", "--config", cfg, "--tol", "1e-30"]) == 3


class TestCmdExpand:
    def test_quadratic_main_term(self, tmp_path, capsys):
        cfg = write(tmp_path, "quad.cfg", QUADRATIC_CFG)
        assert main(["expand", "--config", cfg]) == 0
        out = capsys.readouterr().out
        main_line = next(l for l in out.splitlines() if l.startswith("main term"))
        assert "0.5" in main_line and "+0.5" in main_line
        assert "gamma = " in out
        assert "error_scale" in out

    def test_printed_value_round_trips_exactly(self, tmp_path, capsys):
        from oscphase.cli import parse_config as pc
        cfg_text = CUBIC_CFG
        cfg = write(tmp_path, "cubic.cfg", cfg_text)
        assert main(["expand", "--config", cfg]) == 0
        out = capsys.readouterr().out
        line = next(l for l in out.splitlines() if l.startswith("value = "))
        re_s, im_s = line[len("value = "):].rstrip("i").split(" ")
        from oscphase.expansion import stationary_phase_expand
        res = stationary_phase_expand(pc(cfg_text).to_problem())
        assert float(re_s) == res.value.real
        assert float(im_s) == res.value.imag

    def test_monotone_exits_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "mono.cfg", MONOTONE_CFG)
        assert main(["expand", "--config", cfg]) == 2
        assert "no stationary point; use quad or fdt" in capsys.readouterr().err

    def test_missing_key_exits_1(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.cfg", "g = 1\nalpha = 0\nbeta = 1\nn = 2\n")
        assert main(["expand", "--config", cfg]) == 1
        assert "missing key: f" in capsys.readouterr().err

    def test_n_override(self, tmp_path, capsys):
        cfg = write(tmp_path, "cubic.cfg", CUBIC_CFG)
        assert main(["expand", "--config", cfg, "--n", "3"]) == 0
        assert "order n = 3" in capsys.readouterr().out


class TestCmdStudy:
    def test_csv_contract_and_bit_stability(self, tmp_path, capsys):
        cfg = write(tmp_path, "cubic.cfg", CUBIC_CFG)
        args = ["study", "--config", cfg, "--grid", "256:4096:4", "--n", "1,2"]
        assert main(args) == 0
        first = capsys.readouterr()
        assert main(args) == 0
        second = capsys.readouterr()
        assert first.out == second.out
        lines = first.out.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 3 * 2
        assert "fitted slope" in first.err

    def test_single_T_reports_nan_slope(self, tmp_path, capsys):
        cfg = write(tmp_path, "cubic.cfg", CUBIC_CFG)
        assert main(["study", "--config", cfg, "--n", "2"]) == 0
        err = capsys.readouterr().err
        assert "nan" in err.lower()

    def test_failed_rows_exit_4(self, tmp_path, capsys):
        cfg = write(tmp_path, "multi.cfg", MULTI_STATIONARY_CFG)
        code = main(["study", "--config", cfg, "--grid", "64:256:4", "--n", "1"])
        assert code == 4
        out = capsys.readouterr().out
        assert "nan" in out.lower()


class TestCmdAudit:
    def test_quadratic_delta(self, tmp_path, capsys):
        cfg = write(tmp_path, "audit.cfg",
                    "f = T*x^2\ng = 1\nalpha = -1\nbeta = 1\nn = 2\n"
                    "T = 50\nM = 2\n")
        assert main(["audit", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert f"Delta = {1/512:.17g}" in out
        assert "validity_ok = False" in out
        assert "M >= beta - alpha: True" in out

    def test_fpp_violation_informational_exit_0(self, tmp_path, capsys):
        cfg = write(tmp_path, "neg.cfg",
                    "f = x^2 + x^3\ng = 1\nalpha = -0.35\nbeta = 0.5\nn = 1\n"
                    "T = 1\nM = 1\n")
        assert main(["audit", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "violated" in out
