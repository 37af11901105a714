import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qbirkhoff import cli, convex
from qbirkhoff.suites import Check, ReportDocument, Settings, run_suite


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), stream=out)
    return code, out.getvalue()


class TestVerify:
    def test_werner_includes_choi_check(self):
        code, text = run("verify", "werner")
        assert code == 0
        assert "choi_n3" in text

    def test_factorize_includes_w5(self):
        code, text = run("verify", "factorize")
        assert code == 0
        assert "w5_minus" in text

    def test_unknown_suite_is_usage_error(self, capsys):
        assert run("verify", "nonsense")[0] == 2
        assert "error" in capsys.readouterr().err

    def test_json_report_round_trip(self, tmp_path):
        path = tmp_path / "r.json"
        code, _ = run("verify", "twirl", "--seed", "3", "--mc-samples", "4000", "--json", str(path))
        doc = json.loads(path.read_text())
        assert code == 0 and doc["seed"] == 3 and doc["passed"] is True
        rep = ReportDocument.from_json(doc)
        assert rep.suite == "twirl"
        with pytest.raises(ValueError):
            ReportDocument.from_json({**doc, "surprise": 1})
        with pytest.raises(ValueError):
            ReportDocument.from_json({**doc, "passed": False})

    def test_seeded_reports_reproduce(self):
        a = run_suite("haar", Settings(seed=5, mc_samples=3000)).to_json()
        b = run_suite("haar", Settings(seed=5, mc_samples=3000)).to_json()
        a.pop("elapsed_ms"), b.pop("elapsed_ms")
        assert a == b

    def test_failure_exit_code(self):
        # a slack floor above the saturated s - 2q bound cannot be met
        assert run("verify", "factorize", "--tol", "-1")[0] == 1


class TestCertify:
    def test_quarter_cube(self):
        code, text = run("certify", "0.25", "3")
        assert code == 0
        doc = json.loads(text[:text.index("\n}") + 2])
        assert doc["verdict"] is True and doc["route"] == "R"

    def test_fails_below_root(self):
        code, text = run("certify", "0.15", "2")
        assert code == 1
        assert "FAIL" in text

    def test_one(self):
        assert run("certify", "1.0", "2")[0] == 0

    @pytest.mark.parametrize("args", [("1.5", "2"), ("0.5", "4"), ("abc", "2")])
    def test_usage_errors(self, args):
        assert run("certify", *args)[0] == 2


class TestDistance:
    @pytest.mark.parametrize("args, text", [
        (("w3minus-mixedunitary",), "2/3 = 0.666666666667"),
        (("wnminus-mixedunitary", "5"), "2/5 = 0.4"),
        (("w3minus-factorizable",), "4/27 = 0.148148148148"),
    ])
    def test_values(self, args, text):
        code, out = run("distance", *args)
        assert code == 0 and text in out

    def test_missing_or_even_n(self):
        assert run("distance", "wnminus-mixedunitary")[0] == 2
        assert run("distance", "wnminus-mixedunitary", "4")[0] == 2

    def test_json(self, tmp_path):
        path = tmp_path / "d.json"
        run("distance", "w3minus-factorizable", "--json", str(path))
        doc = json.loads(path.read_text())
        assert doc["exact"] == "4/27"
        assert doc["distance"] == pytest.approx(4 / 27)


class TestExport:
    def test_path(self, tmp_path):
        out = tmp_path / "path.csv"
        assert run("export", "path", "0:1:0.01", str(out))[0] == 0
        rows = list(csv.reader(open(out)))
        assert rows[0] == list(convex.PATH_HEADER)
        assert len(rows) == 102
        g0 = convex.mw_path(0.0)
        np.testing.assert_allclose([float(x) for x in rows[1]], [0, g0.x, g0.y], atol=1e-11)

    def test_curves(self, tmp_path):
        out = tmp_path / "c.csv"
        lam0 = convex.mw_lambda0()
        assert run("export", "curves", f"{1 / 3!r},{lam0!r},1", str(out))[0] == 0
        rows = list(csv.reader(open(out)))
        assert rows[0] == list(convex.CURVE_HEADER)
        assert abs(float(rows[1][7])) < 1e-11
        assert rows[1][8:] == ["true", "true"]
        # lambda0 lies below the p1 root, so the Q certificate does not cover it
        assert rows[2][8] == "false"

    def test_bad_grid(self, tmp_path):
        assert run("export", "path", "1:0:0.1", str(tmp_path / "x.csv"))[0] == 2
        assert run("export", "curves", "0,2", str(tmp_path / "x.csv"))[0] == 2

    def test_unwritable(self, tmp_path):
        assert run("export", "path", "0,1", str(tmp_path / "missing" / "x.csv"))[0] == 2


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_allclose(cli.parse_grid("0.1,0.2"), [0.1, 0.2])
    with pytest.raises(cli.UsageError):
        cli.parse_grid("a:b")


def test_check_comparisons():
    assert Check.make("x", "", 0.5, 1.0).passed
    assert not Check.make("x", "", 0.5, 1.0, "ge").passed


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qbirkhoff", "distance", "w3minus-mixedunitary"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "2/3" in proc.stdout
