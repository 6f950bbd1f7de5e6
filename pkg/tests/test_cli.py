import io
import json

import pytest

from matchstat.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, run
from matchstat.inference import matching_test
from matchstat.montecarlo import bivariate_normal_sample
from matchstat.streams import Stream


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="pairs.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


TABLE1_CSV = """\
k,n_4,n_5,n_6,n_7,poisson
0,0.3750,0.3667,0.3681,0.3679,0.3679
1,0.3333,0.3750,0.3667,0.3681,0.3679
2,0.2500,0.1667,0.1875,0.1833,0.1839
3,0.0000,0.0833,0.0556,0.0625,0.0613
4,0.0417,0.0000,0.0208,0.0139,0.0153
5,,0.0083,0.0000,0.0042,0.0031
6,,,0.0014,0.0000,0.0005
7,,,,0.0002,0.0001
"""


class TestTable1:
    def test_matches_printed_table(self):
        code, out, _ = invoke("table1", "--max-n", "7")
        assert code == EXIT_OK
        assert out == TABLE1_CSV

    def test_no_header_and_json(self):
        _, out, _ = invoke("table1", "--no-header")
        assert out.splitlines()[0].startswith("0,0.3750")
        _, out, _ = invoke("table1", "--format", "json")
        data = json.loads(out)
        assert data[5]["n_4"] is None
        assert data[4]["n_4"] == pytest.approx(1 / 24)

    def test_bad_range(self):
        code, _, err = invoke("table1", "--min-n", "6", "--max-n", "5")
        assert code == EXIT_USAGE and "max-n" in err


class TestPmf:
    def test_single_value(self):
        code, out, _ = invoke("pmf", "--n", "4", "--k", "0")
        assert code == EXIT_OK
        assert out == "n,k,pmf,tail\n4,0,0.375000,1.000000\n"

    def test_four_decimals(self):
        _, out, _ = invoke("pmf", "--n", "4", "--k", "0", "--decimals", "4", "--no-header")
        assert out == "4,0,0.3750,1.0000\n"

    def test_full_support(self):
        _, out, _ = invoke("pmf", "--n", "5")
        assert len(out.splitlines()) == 7

    def test_missing_n(self):
        assert invoke("pmf")[0] == EXIT_USAGE


class TestTestCommand:
    def test_worked_example(self, tmp_path):
        p = write(tmp_path, "x,y\n1.0,10\n2.0,20\n3.0,30\n4.0,40\n")
        code, out, _ = invoke("test", "--input", str(p), "--mode", "exact", "--alpha", "0.05")
        assert code == EXIT_OK
        assert out == "n,statistic,p_value,mode,alpha,reject\n4,4,0.041667,exact,0.05,true\n"

    def test_asymptotic_json(self, tmp_path):
        p = write(tmp_path, "1,10\n2,20\n3,30\n4,40\n")
        code, out, _ = invoke("test", "--input", str(p), "--mode", "asymptotic", "--format", "json")
        assert code == EXIT_OK
        (rec,) = json.loads(out)
        assert rec["statistic"] == 4 and rec["reject"] is True
        assert rec["p_value"] == pytest.approx(0.018988156876153809, rel=1e-12)

    def test_ties_are_data_errors(self, tmp_path):
        p = write(tmp_path, "1,1\n1,2\n2,3\n3,4\n")
        code, _, err = invoke("test", "--input", str(p))
        assert code == EXIT_DATA and "tie" in err

    def test_ties_random_policy(self, tmp_path):
        p = write(tmp_path, "1,1\n1,2\n2,3\n3,4\n5,0\n")
        runs = [invoke("test", "--input", str(p), "--tie-policy", "random", "--seed", "9") for _ in range(2)]
        assert runs[0][0] == EXIT_OK and runs[0] == runs[1]

    def test_short_sample(self, tmp_path):
        p = write(tmp_path, "1,2\n2,1\n3,3\n")
        code, _, err = invoke("test", "--input", str(p))
        assert code == EXIT_DATA and "at least 4" in err

    def test_unparseable_row_reports_line(self, tmp_path):
        p = write(tmp_path, "x,y\n1,2\n2,oops\n3,3\n4,4\n")
        code, _, err = invoke("test", "--input", str(p))
        assert code == EXIT_DATA and ":3:" in err

    def test_wrong_field_count(self, tmp_path):
        p = write(tmp_path, "1,2\n2,1,7\n3,3\n4,4\n")
        code, _, err = invoke("test", "--input", str(p))
        assert code == EXIT_DATA and ":2:" in err

    def test_missing_file(self, tmp_path):
        assert invoke("test", "--input", str(tmp_path / "nope.csv"))[0] == EXIT_DATA

    def test_delimiter(self, tmp_path):
        p = write(tmp_path, "1;4\n2;3\n3;2\n4;1\n5;5\n")
        code, out, _ = invoke("test", "--input", str(p), "--delimiter", ";", "--no-header")
        assert code == EXIT_OK and out.startswith("5,1,")

    def test_round_trip_with_simulated_sample(self, tmp_path):
        sample = bivariate_normal_sample(25, 0.4, Stream(31), rep=3)
        p = write(tmp_path, "".join(f"{x!r},{y!r}\n" for x, y in zip(sample.x.tolist(), sample.y.tolist())))
        expected = matching_test(sample.rank("random", 5), "asymptotic", 0.1)
        code, out, _ = invoke(
            "test", "--input", str(p), "--mode", "asymptotic", "--alpha", "0.1", "--tie-policy", "random",
            "--seed", "5", "--format", "json",
        )
        assert code == EXIT_OK
        (rec,) = json.loads(out)
        assert rec == expected.as_dict()


class TestExperiments:
    @pytest.mark.parametrize(
        "argv, header",
        [
            (["power", "--n", "10", "--rho", "0.3"], "n,rho,power_matching,power_pearson,reps,mc_stderr"),
            (["relpower", "--n", "10"], "n,rho,power_matching,power_pearson,reps,mc_stderr,nominal_power"),
            (["rae", "--n", "10"], "n,corr_m_rho,corr_rho_tau,std_slope,r_squared,sd_m,sd_rho"),
            (["dispersion", "--n", "5", "--n", "50"], "n,sd_m,sd_rho"),
            (["indicator", "--rho", "0"], "n,rho,bucket,prob_overestimate,count"),
        ],
    )
    def test_schemas_and_repeatability(self, argv, header):
        a = invoke(*argv, "--reps", "500", "--seed", "11")
        b = invoke(*argv, "--reps", "500", "--seed", "11")
        assert a[0] == EXIT_OK, a[2]
        assert a == b
        assert a[1].splitlines()[0] == header

    def test_power_row(self):
        _, out, _ = invoke("power", "--n", "10", "--rho", "0", "--reps", "1000", "--no-header")
        n, rho, pm, pp, reps, se = out.strip().split(",")
        assert (n, rho, reps) == ("10", "0.0", "1000")
        assert len(pm.split(".")[1]) == 6

    def test_env_seed(self, monkeypatch):
        argv = ("rae", "--n", "6", "--reps", "300")
        monkeypatch.setenv("MATCHSTAT_SEED", "77")
        env = invoke(*argv)
        monkeypatch.delenv("MATCHSTAT_SEED")
        assert env == invoke(*argv, "--seed", "77")
        assert env != invoke(*argv)

    def test_flag_beats_env(self, monkeypatch):
        monkeypatch.setenv("MATCHSTAT_SEED", "1")
        assert invoke("rae", "--n", "6", "--reps", "300", "--seed", "2") != invoke("rae", "--n", "6", "--reps", "300")

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv("MATCHSTAT_SEED", "banana")
        assert invoke("rae", "--n", "6", "--reps", "10")[0] == EXIT_USAGE

    def test_workers_byte_identical(self):
        argv = ("indicator", "--rho", "0.2", "--reps", "9000", "--seed", "3")
        assert invoke(*argv, "--workers", "1")[1] == invoke(*argv, "--workers", "3")[1]

    def test_out_file(self, tmp_path):
        target = tmp_path / "power.csv"
        code, out, _ = invoke("power", "--n", "10", "--rho", "0.5", "--reps", "200", "--out", str(target))
        assert code == EXIT_OK and out == ""
        assert target.read_bytes().endswith(b"\n") and b"\r" not in target.read_bytes()

    def test_exact_alpha_rule(self):
        code, out, _ = invoke("power", "--n", "10", "--rho", "0", "--rule", "exact-alpha", "--reps", "300")
        assert code == EXIT_OK

    @pytest.mark.parametrize(
        "argv",
        [
            ["power", "--rho", "1.0", "--reps", "10"],
            ["power", "--seed", "-4"],
            ["power", "--alpha", "2"],
            ["relpower", "--n", "12", "--reps", "10"],
            ["rae", "--n", "3", "--reps", "10"],
            ["indicator", "--reps", "0"],
            ["frobnicate"],
            [],
        ],
    )
    def test_usage_errors(self, argv):
        assert invoke(*argv)[0] == EXIT_USAGE

    def test_help(self, capsys):
        assert run(["--help"]) == EXIT_OK
        assert "table1" in capsys.readouterr().out
