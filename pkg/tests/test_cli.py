import csv
import io
import json
import subprocess
import sys

import pytest

from qwalk import kac
from qwalk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_first_return_csv(capsys):
    code, out, _ = run(capsys, "first-return", "--preset", "hadamard", "--max-steps", "6", "--compare", "uqw")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["steps"] for r in rows] == ["2", "4", "6"]
    assert float(rows[2]["oqw_term"]) == pytest.approx(1 / 16, abs=1e-14)
    assert float(rows[2]["interference"]) == pytest.approx(-1 / 16, abs=1e-14)
    # 17 significant digits
    assert rows[0]["oqw_term"].startswith("0.4999999999999") or rows[0]["oqw_term"] in ("0.5", "0.50000000000000000")


def test_first_return_exact_matches_monitored(capsys):
    _, a, _ = run(capsys, "first-return", "--preset", "hadamard", "--max-steps", "8", "--exact", "--format", "json")
    _, b, _ = run(capsys, "first-return", "--preset", "hadamard", "--max-steps", "8", "--format", "json")
    for ra, rb in zip(json.loads(a), json.loads(b)):
        assert ra["oqw_term"] == pytest.approx(rb["oqw_term"], abs=1e-12)


def test_distribution_json(capsys):
    code, out, _ = run(capsys, "distribution", "--preset", "hadamard", "--time", "3", "--format", "json")
    assert code == 0
    rows = {r["site"]: r for r in json.loads(out)}
    assert rows[-1]["uqw_probability"] == pytest.approx(5 / 8)
    assert rows[-1]["oqw_probability"] == pytest.approx(3 / 8)


def test_criteria_default_json(capsys):
    code, out, _ = run(capsys, "criteria", "--preset", "diag-trichotomy")
    assert code == 0
    obj = json.loads(out)
    assert obj["verdict"] == "TransientForSomeDensity"
    assert obj["per_density_return"]["E22"] == pytest.approx(2 / 3)


def test_inline_coin(capsys):
    s = 0.5 ** 0.5
    L = json.dumps([[[s, 0], [0, 0]], [[0, 0], [s, 0]]])
    R = json.dumps([[[0, 0], [s, 0]], [[s, 0], [0, 0]]])
    code, out, _ = run(capsys, "criteria", "--L", L, "--R", R)
    assert code == 0 and json.loads(out)["verdict"] == "Recurrent"


def test_monitored_and_fourier(capsys):
    code, out, _ = run(capsys, "monitored", "--preset", "bitflip", "--p", "0.5", "--kind", "p0", "--horizon", "60", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["summary"]["kind"] == "unmonitored-p0" and len(obj["rows"]) == 60
    code, out, _ = run(capsys, "fourier", "--preset", "sec7", "--curve", "powers", "--grid", "8")
    assert code == 0 and out.splitlines()[0] == "k,lambda1,cos_k,lambda1_pow,cos_pow"
    code, out, _ = run(capsys, "fourier", "--preset", "hadamard", "--series", "--max-n", "4", "--method", "dual")
    assert code == 0 and len(out.splitlines()) == 6
    code, _, _ = run(capsys, "fourier", "--preset", "hadamard", "--curve", "lambda1")
    assert code == 2


def test_kac_command(capsys, tmp_path):
    code, out, _ = run(capsys, "kac", "--p11", str(1 / 3), "--M", "20", "--x", "0", "--horizon", "2000")
    assert code == 0
    assert json.loads(out)["E_R"] == pytest.approx(2.0, abs=1e-5)
    spec_file = tmp_path / "swap.json"
    spec_file.write_text(json.dumps(kac.site_walk_to_json(kac.two_site_swap())))
    code, out, _ = run(capsys, "kac", "--spec", str(spec_file), "--horizon", "10")
    assert code == 0 and json.loads(out)["E_R"] == pytest.approx(2.0)


def test_trajectory(capsys):
    code, out, _ = run(capsys, "trajectory", "--preset", "hadamard", "--horizon", "5", "--seed", "3")
    assert code == 0 and len(out.splitlines()) == 7
    code, out, _ = run(capsys, "trajectory", "--preset", "hadamard", "--batch", "200", "--format", "json")
    obj = json.loads(out)
    assert obj["trajectories"] == 200 and 0 < obj["first_return_frequency"] <= 1


def test_output_file_and_config(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    out_file = tmp_path / "t.csv"
    cfg.write_text(json.dumps({"command": "first-return", "preset": "hadamard", "max_steps": 4}))
    code, _, _ = run(capsys, "--config", str(cfg), "--output", str(out_file))
    assert code == 0
    assert out_file.read_text().splitlines()[0].startswith("steps,")
    assert len(out_file.read_text().splitlines()) == 3


@pytest.mark.parametrize(
    "argv,code",
    [
        (["criteria", "--preset", ""], 2),
        (["criteria", "--preset", "nope"], 2),
        (["criteria"], 2),
        (["criteria", "--preset", "hadamard", "--p", "0.3"], 2),
        (["criteria", "--L", "[[1]]", "--R", "[[1]]"], 2),
        (["first-return", "--preset", "sec7", "--compare", "uqw"], 2),
        (["first-return", "--preset", "hadamard", "--exact", "--max-steps", "32"], 4),
        (["kac", "--p11", "0.3", "--M", "20", "--x", "2", "--horizon", "10"], 3),
        (["monitored", "--preset", "hadamard", "--state", "sideways"], 2),
        (["bogus"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qwalk.cli", "criteria", "--preset", "bitflip", "--p", "0.5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "Recurrent"


def test_time_zero_distribution(capsys):
    code, out, _ = run(capsys, "distribution", "--preset", "hadamard", "--time", "0", "--walk", "oqw")
    assert code == 0 and out.splitlines() == ["site,probability", "0,1"]


def test_bitflip_half_first_return_closed_form(capsys):
    from math import comb

    code, out, _ = run(capsys, "first-return", "--preset", "bitflip", "--p", "0.5", "--max-steps", "40")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 20
    for k, r in enumerate(rows, start=1):
        assert float(r["oqw_term"]) == pytest.approx(comb(2 * k, k) / (2 * k - 1) / 4**k, abs=1e-14)


def test_lambda1_curve_hits_one(capsys):
    code, out, _ = run(capsys, "fourier", "--preset", "sec7", "--curve", "lambda1", "--grid", "512")
    rows = {float(r["k"]): float(r["lambda1"]) for r in csv.DictReader(io.StringIO(out))}
    assert code == 0 and rows[0.0] == 1.0


def test_rerun_is_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        run(capsys, "trajectory", "--preset", "hadamard", "--horizon", "30", "--seed", "9", "--output", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
