import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from pii_as import cli
from pii_as.cli import EXIT_FAIL, EXIT_OK, EXIT_POLE, EXIT_USAGE, UsageError, main, parse_grid, parse_number


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------------ number grammar


@pytest.mark.parametrize(
    "text,value",
    [("0", 0j), ("1.5", 1.5 + 0j), ("-0.3i", -0.3j), ("i", 1j), ("-i", -1j), ("+2j", 2j),
     ("0.2+0.1i", 0.2 + 0.1j), ("1e-3-2i", 0.001 - 2j), (".5i", 0.5j), (" 3 ", 3 + 0j)],
)
def test_parse_number(text, value):
    assert parse_number(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1..2", "i2", "1+", "0.3ii", "nan"])
def test_parse_number_rejects(text):
    with pytest.raises(UsageError):
        parse_number(text)


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(allow_nan=False, allow_infinity=False))
def test_parse_number_round_trip(re, im):
    text = f"{cli.fmt(re)}{'+' if math.copysign(1, im) > 0 else '-'}{cli.fmt(abs(im))}i"
    z = parse_number(text)
    assert z.real == re and z.imag == im


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(v):
    assert float(cli.fmt(v)) == v


# ------------------------------------------------------------------ coeffs


def test_coeffs_zero_alpha(capsys):
    code, out, err = run(capsys, "coeffs", "--alpha", "0", "--n-max", "2")
    assert code == EXIT_OK
    assert out == "n,a_n\n0,1\n1,2\n2,40\n"


def test_coeffs_quarter(capsys):
    code, out, _ = run(capsys, "coeffs", "--alpha", "0.25", "--n-max", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert float(rows[2][1]) == 1.875


def test_coeffs_imaginary_alpha(capsys):
    code, out, _ = run(capsys, "coeffs", "--alpha", "0.3i", "--n-max", "1")
    assert code == EXIT_OK
    assert float(out.splitlines()[2].split(",")[1]) == pytest.approx(2 + 2 * 0.09)


@pytest.mark.parametrize("argv", [["--alpha", "0.5"], ["--alpha", "0.1+0.1i"], ["--n-max", "51"], ["--alpha", "x"]])
def test_coeffs_usage_errors(capsys, argv):
    code, out, err = run(capsys, "coeffs", *argv)
    assert code == EXIT_USAGE
    assert out == "" and len(err.strip().splitlines()) == 1


# ------------------------------------------------------------------ connect


def test_connect_real(capsys):
    code, out, _ = run(capsys, "connect", "--alpha", "0", "--k", "0.5")
    obj = json.loads(out)
    assert code == EXIT_OK and abs(obj["d"] - 0.302609) < 1e-6
    assert obj["s2_re"] == 0 and obj["trivial"] is False


def test_connect_trivial(capsys):
    code, out, _ = run(capsys, "connect", "--alpha", "0", "--k", "0")
    assert code == EXIT_OK and json.loads(out)["trivial"] is True


def test_connect_imag(capsys):
    code, out, _ = run(capsys, "connect", "--family", "imag", "--alpha", "0.3i", "--k", "0.5i")
    obj = json.loads(out)
    assert code == EXIT_OK and "d" not in obj and obj["d_im"] > 0
    from pii_as.connection import connection_imag

    c = connection_imag(0.3j, 0.5j)
    assert obj["d_im"] == c.d.imag and obj["phi"] == c.phi  # bit-identical through JSON


@pytest.mark.parametrize("argv", [["--alpha", "0.25", "--k", "0.9"], ["--family", "imag", "--alpha", "0.3"],
                                  ["--alpha", "0.3i"], ["--family", "complex"]])
def test_connect_usage_errors(capsys, argv):
    code, out, err = run(capsys, "connect", *argv)
    assert code == EXIT_USAGE and out == "" and err.strip()


# ------------------------------------------------------------------ integrate


def test_integrate_trivial(capsys):
    code, out, _ = run(capsys, "integrate", "--alpha", "0", "--k", "0", "--x-end", "-5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and rows and all(float(r["u"]) == 0 for r in rows)


def test_integrate_round_trip(capsys):
    from pii_as.connection import PIIParams
    from pii_as.pii_ode import solve_as

    code, out, _ = run(capsys, "integrate", "--alpha", "0.25", "--k", "0.3", "--x-end", "-10", "--dx", "0.5")
    rows = list(csv.DictReader(io.StringIO(out)))
    tr = solve_as(PIIParams.real(0.25, 0.3), 15.0, -10.0, dx=0.5)
    assert [float(r["x"]) for r in rows] == list(tr.x)
    assert [float(r["u"]) for r in rows] == list(tr.y)
    assert [float(r["u_prime"]) for r in rows] == list(tr.yp)


def test_integrate_imaginary_columns(capsys):
    code, out, _ = run(capsys, "integrate", "--family", "imag", "--alpha", "0.3i", "--k", "0.5i", "--x-end", "-5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["x", "u_re", "u_im", "u_prime_re", "u_prime_im", "v", "v_prime"]
    assert all(float(r["u_re"]) == 0 and r["u_im"] == r["v"] for r in rows)


def test_integrate_pole_exit(capsys):
    code, out, err = run(capsys, "integrate", "--alpha", "0", "--k", "1.2", "--x-end", "-20")
    assert code == EXIT_POLE and out == "" and "pole" in err


# ------------------------------------------------------------------ verify


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--alpha", "0.25", "--k", "0.3")
    obj = json.loads(out)
    assert code == EXIT_OK and obj["pass"] is True and obj["pole_status"] == "Completed"


def test_verify_pole(capsys):
    code, out, err = run(capsys, "verify", "--alpha", "0", "--k", "1.2")
    assert code == EXIT_POLE and out == "" and len(err.strip().splitlines()) == 1


def test_verify_imag_homogeneous(capsys):
    code, out, _ = run(capsys, "verify", "--family", "imag", "--alpha", "0", "--k", "0.5i")
    obj = json.loads(out)
    assert code == EXIT_OK and obj["pass"] and "d_fit_im" in obj


def test_verify_negative_imaginary_k(capsys):
    code, out, _ = run(capsys, "verify", "--family", "imag", "--alpha", "0", "--k=-0.5i")
    assert code == EXIT_OK


def test_verify_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "--alpha", "0", "--k", "0")
    assert code == EXIT_FAIL and json.loads(out)["pass"] is False


def test_verify_station_csv(capsys):
    code, out, _ = run(capsys, "verify", "--alpha", "0", "--k", "0.5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 24 and float(rows[0]["x"]) == -60.0


def test_verify_writes_file_deterministically(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "--alpha", "0.1", "--k", "0.2", "--out", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_verify_deterministic_across_processes(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        r = subprocess.run([sys.executable, "-m", "pii_as", "verify", "--family", "imag", "--alpha", "0.3i",
                            "--k", "0.5i", "--out", str(path)], capture_output=True)
        assert r.returncode == 0 and r.stdout == b""
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


# ------------------------------------------------------------------ scan


def test_parse_grid():
    g = parse_grid("real:0,0.25/0.5+imag:0.3/1")
    assert len(g) == 3
    assert g[1].k.real == pytest.approx(0.5 * math.cos(0.25 * math.pi))
    assert g[2].alpha == 0.3j and g[2].k == 1j
    with pytest.raises(UsageError):
        parse_grid("real:0.6/0.1")
    with pytest.raises(UsageError):
        parse_grid("cplx:0/1")
    with pytest.raises(UsageError):
        parse_grid("real:0")
    assert len(parse_grid("default")) == 6 * 9 + 9


def test_scan_small(capsys, monkeypatch):
    monkeypatch.setenv("PII_NUM_THREADS", "1")
    code, out, _ = run(capsys, "scan", "--grid", "real:0,0.3/0,0.95+imag:0.8/3", "--x-end", "-30")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 5
    assert all(r["status"] == "Completed" for r in rows)


def test_scan_singular_point_is_informational(capsys, monkeypatch):
    monkeypatch.setenv("PII_NUM_THREADS", "1")
    code, out, _ = run(capsys, "scan", "--grid", "real:0/0.5,1.2", "--x-end", "-30")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    sing = [r for r in rows if r["admissible"] == "false"]
    assert sing[0]["status"] == "PoleDetected" and float(sing[0]["x_pole"]) < 0


# ------------------------------------------------------------------ laxcheck / selftest


def test_laxcheck(capsys):
    code, out, _ = run(capsys, "laxcheck", "--draws", "200")
    obj = json.loads(out)
    assert code == EXIT_OK and obj["pass"] and obj["max_deviation"] <= 1e-12


def test_laxcheck_fixed_lambda(capsys):
    code, out, _ = run(capsys, "laxcheck", "--lambda", "0.5+2i", "--draws", "50")
    assert code == EXIT_OK
    code, out, err = run(capsys, "laxcheck", "--lambda", "0")
    assert code == EXIT_USAGE


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == EXIT_OK
    assert out.strip().splitlines()[-1].startswith("12/12")


def test_no_command_is_usage_error(capsys):
    code, out, err = run(capsys)
    assert code == EXIT_USAGE and out == ""
