import numpy as np
import pytest

from selectorkit.cli import EXIT_ASSERT, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main
from selectorkit.config import load_config, load_hamiltonian, parse_knots
from selectorkit.exceptions import InputError
from selectorkit.reporting import csv_text, format_value, header

RADIAL_CFG = """
[run]
seed = 5
[hamiltonian]
kind = bump   ; admissible: slope 0.5 / 0.54
dim = 2
height = 0.5
plateau_end = 0.2
support_end = 0.8
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "radial.cfg"
    p.write_text(RADIAL_CFG)
    return p


def _rows(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


# config and reporting ----------------------------------------------------

def test_config_defaults_and_env():
    cfg = load_config(text="[run]\nseed = 3\n[tolerances]\ndelta = 0.05\n", env={"SELECTORKIT_WORKERS": "2",
                                                                                 "SELECTORKIT_CLUSTER_TOL": "1e-6"})
    assert cfg.seed == 3 and cfg.workers == 2
    assert cfg.tolerances["delta"] == 0.05 and cfg.tolerances["cluster_tol"] == 1e-6


@pytest.mark.parametrize("text", ["[tolerances]\nfoo = 1\n", "[tolerances]\ndelta = abc\n", "[run]\nworkers = 0\n",
                                  "not an ini"])
def test_config_errors(text):
    with pytest.raises(InputError):
        load_config(text=text, env={})


def test_parse_knots():
    k, v, m = parse_knots("0 1.5, 0.4 1.5, 1.0 0")
    assert np.allclose(k, [0, 0.4, 1.0]) and m is None
    with pytest.raises(InputError):
        parse_knots("0 1 0, 1 0")


def test_load_hamiltonian(cfg_file):
    H, cfg = load_hamiltonian(cfg_file)
    assert H.value(0, np.zeros(2)) == pytest.approx(0.5) and cfg.seed == 5


def test_header_has_no_timestamps():
    cfg = load_config(text="[run]\nseed = 9\n", env={})
    h = header("verify --suite x", cfg)
    assert "# seed: 9" in h and "tolerances" in h
    assert header("verify --suite x", cfg) == h


def test_format_and_csv():
    assert format_value(True) == "true" and format_value(0.1 + 0.2) == "0.3"
    assert csv_text(["a", "b"], [["x,y", 1.0]]) == 'a,b\n"x,y",1\n'


# subcommands ------------------------------------------------------------

def test_spectrum_simple(cfg_file, tmp_path, capsys):
    out = tmp_path / "spectrum.csv"
    assert main(["spectrum", "--hamiltonian", str(cfg_file), "--oracle", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("# selectorkit") and "# seed: 0" in text
    rows = _rows(text)
    assert rows[0].endswith("oracle_distance")
    assert [float(r.split(",")[0]) for r in rows[1:]] == pytest.approx([0.0, 0.5])


def test_seed_is_recorded(cfg_file, capsys):
    assert main(["spectrum", "--hamiltonian", str(cfg_file), "--seed", "11"]) == EXIT_OK
    assert "# seed: 11" in capsys.readouterr().out


def test_missing_file_exit_2(capsys):
    assert main(["spectrum", "--hamiltonian", "/nonexistent/radial.cfg"]) == EXIT_INPUT


def test_argparse_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["spectrum"])
    assert exc.value.code == 2


def test_unknown_suite_exit_2(capsys):
    assert main(["verify", "--suite", "nope"]) == EXIT_INPUT


def test_verify_chain_ball4(tmp_path):
    out = tmp_path / "chain.csv"
    assert main(["verify", "--suite", "chain", "--body", "ball:r=1,dim=4", "--out", str(out)]) == EXIT_OK
    assert "# status: pass" in out.read_text()


def test_verify_failure_exit_4(tmp_path):
    # the unit ball of R^2 scaled to radius 2 cannot sit in a window around pi
    out = tmp_path / "chain.csv"
    assert main(["verify", "--suite", "chain", "--body", "ball:r=2,dim=2", "--out", str(out)]) == EXIT_ASSERT
    assert "# status: fail" in out.read_text()


def test_verify_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["verify", "--suite", "gradient", "--seed", "7", "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_billiard_disk(tmp_path):
    out, svg = tmp_path / "b.csv", tmp_path / "b.svg"
    assert main(["billiard", "--domain", "disk:r=1", "--bounces", "2..6", "--out", str(out), "--svg", str(svg)]) == 0
    row = _rows(out.read_text())[1].split(",")
    assert float(row[1]) == pytest.approx(4.0, abs=1e-9)
    assert svg.read_text().startswith("<svg")


def test_billiard_bad_bounces():
    assert main(["billiard", "--domain", "disk:r=1", "--bounces", "two"]) == EXIT_INPUT


def test_billiard_numerical_failure():
    # a single restart on a 2-bounce-free range still finds something on a disk,
    # so force failure with an impossible residual tolerance
    cfg = "[tolerances]\nresidual_tol = 1e-30\n"
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(cfg)
    assert main(["billiard", "--domain", "ellipse:a=2,b=1", "--bounces", "3..3", "--restarts", "2",
                 "--config", fh.name]) == EXIT_NUMERIC


def test_reeb_alpha_one(capsys):
    assert main(["reeb", "--surface", "ellipsoid:a=1,2", "--tmax", "20", "--seeds", "8"]) == EXIT_OK
    assert "# alpha_1: 1\n" in capsys.readouterr().out


def test_capacity_cylinder_chain(tmp_path):
    out = tmp_path / "cap.csv"
    assert main(["capacity", "--body", "cylinder:r=1,dim=4", "--quantity", "chain", "--out", str(out)]) == EXIT_OK
    rows = _rows(out.read_text())[1:]
    import csv

    for r in csv.reader(rows):
        assert abs(float(r[2]) - np.pi) <= 0.05 and abs(float(r[3]) - np.pi) <= 0.05


def test_capacity_single_quantity(capsys):
    assert main(["capacity", "--body", "ball:r=1,dim=2", "--quantity", "c_G"]) == EXIT_OK
    assert main(["capacity", "--body", "ball:r=1,dim=2", "--quantity", "bogus"]) == EXIT_INPUT


def test_selector_command(cfg_file, capsys):
    assert main(["selector", "--hamiltonian", str(cfg_file), "--trace"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ok,0.5,0.5,0.5," in out and "tau,selected" in out
