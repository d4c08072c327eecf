import json
import re

import pytest

from relsosc import cli, model
from relsosc.model import ModelParams


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_body(text):
    lines = text.splitlines()
    header = json.loads(lines[0][2:])
    return header, [l.split(",") for l in lines[1:]]


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--omega0", "0.5", "--g0", "1", "--n-max", "10")
    assert code == 0
    header, rows = csv_body(out)
    assert rows[0] == ["n", "E_mc2", "E_minus_mc2_hbar_omega"]
    assert len(rows) == 12
    assert float(rows[4][1]) == model.energy(3, ModelParams(0.5, 1.0))
    assert header["command"] == "spectrum"
    assert header["params"]["regime"] == "supercritical"
    assert set(header) >= {"versions", "units", "seed", "tolerances", "timestamp"}


def test_alpha_nu_sweep_json(capsys):
    code, out, _ = run(capsys, "alpha-nu-sweep", "--omega0", "1", "--g0-min", "0", "--g0-max", "0.5",
                       "--steps", "100", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    cols = doc["columns"]
    g, im = cols.index("g0"), cols.index("im_alpha")
    for row in doc["rows"]:
        assert (row[im] == 0) == (row[g] <= 0.125)
    assert doc["provenance"]["results"]["g0_critical"] == 0.125


def test_output_is_deterministic_apart_from_timestamp(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["path-integral", "--slices", "1,2", "-o", str(p)]) == 0
    strip = lambda s: re.sub(r'"timestamp": "[^"]*"', "", s)
    assert strip(paths[0].read_text()) == strip(paths[1].read_text())
    assert not list(tmp_path.glob(".relsosc-*"))


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--omega0", "-1"],
        ["spectrum", "--bogus"],
        ["overlap", "--bra", "1.5"],
        ["path-integral", "--slices", "5"],
        ["frobnicate"],
    ],
)
def test_invalid_input_exits_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""
    assert "relsosc: error" in err


def test_complex_arguments(capsys):
    code, out, _ = run(capsys, "overlap", "--bra", "0.3+0.1i", "--ket=-0.2+0.25j")
    assert code == 0
    header, rows = csv_body(out)
    assert header["options"]["ket"] == [-0.2, 0.25]
    assert float(rows[1][-1]) < 1e-12


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nomega0 = 0.25\nn_max = 2\nseed = 5\n")
    monkeypatch.setenv("RELSOSC_SEED", "9")
    _, out, _ = run(capsys, "spectrum", "--config", str(cfg))
    header, rows = csv_body(out)
    assert header["params"]["omega0"] == 0.25 and len(rows) == 4 and header["seed"] == 5
    _, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--n-max", "1", "--seed", "3")
    header, rows = csv_body(out)
    assert len(rows) == 3 and header["seed"] == 3
    _, out, _ = run(capsys, "spectrum")
    assert csv_body(out)[0]["seed"] == 9


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_max = 2\nnot a pair\n")
    code, _, err = run(capsys, "spectrum", "--config", str(cfg))
    assert code == 1 and "bad.cfg:2:" in err
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "spectrum", "--config", str(cfg))[0] == 1


def test_paper_form_columns(capsys):
    _, out, _ = run(capsys, "propagator", "--omega-t", "1", "--paper-form")
    _, rows = csv_body(out)
    assert "paper_difference" in rows[0]
    assert float(rows[1][rows[0].index("abs_difference")]) < 1e-10
    _, out, _ = run(capsys, "partition", "--paper-form")
    _, rows = csv_body(out)
    assert "z_paper" in rows[0]
    z, direct = rows[0].index("z"), rows[0].index("z_direct_sum")
    assert all(abs(float(r[z]) - float(r[direct])) <= 1e-14 * float(r[z]) for r in rows[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["eigenfunction", "--n", "2", "--points", "5"],
        ["coherent-state", "--zeta", "0.2-0.1j", "--points", "3"],
        ["trajectory", "--tau", "1", "--periods", "1", "--steps", "8"],
        ["bohr-sommerfeld", "--n-max", "4"],
    ],
)
def test_other_commands_run(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert len(csv_body(out)[1]) > 1


def test_verify_all_exit_codes(capsys):
    code, out, err = run(capsys, "verify-all", "--checks", "1,4,12")
    assert code == 0
    assert err.count("[PASS]") == 3
    code, out, err = run(capsys, "verify-all", "--checks", "5")
    assert code == 2
    assert "[FAIL]  5" in err
    assert csv_body(out)[1][1][2] == "FAIL"


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "relsosc", "spectrum", "--n-max", "0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "n,E_mc2,E_minus_mc2_hbar_omega"
