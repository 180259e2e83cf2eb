import json
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sicomp.cli import main

FIXTURE = Path(__file__).parent / "fixtures" / "example1_Z.txt"
ERR_LINE = re.compile(r"^ERR_[A-Z]+: \S.*$")


def run(argv, capsys):
    rc = main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


def assert_error(rc, err):
    assert rc != 0
    lines = err.strip().splitlines()
    assert len(lines) == 1 and ERR_LINE.match(lines[0]), err


def test_design_report(capsys, tmp_path):
    j = tmp_path / "d.json"
    rc, out, _ = run(["design", "--n", "960", "--k", "15", "--m", "2", "--p", "1/192", "--variant", "gel4", "--out", str(j)], capsys)
    assert rc == 0
    assert "realized distances    : 5, inf" in out and "delta_i (i>=2)        : 6" in out and "547 bits" in out
    data = json.loads(j.read_text())
    assert data["body_bits"] == 547 and data["delta"] == [6]


def test_design_m1_warns(capsys):
    rc, _, err = run(["design", "--n", "960", "--m", "1", "--p", "1/192"], capsys)
    assert rc == 0 and "rate 1.0" in err


def test_design_infeasible(capsys):
    rc, _, err = run(["design", "--n", str(15 * 129), "--k", "15", "--m", "2", "--p", "1/192"], capsys)
    assert_error(rc, err)
    assert err.startswith("ERR_DESIGN") and "too small" in err


@pytest.mark.parametrize("p", ["2", "1/6"])
def test_design_p_out_of_domain(capsys, p):
    rc, _, err = run(["design", "--n", "960", "--p", p], capsys)
    assert rc == 3 and err.startswith("ERR_DOMAIN")


@pytest.fixture
def sample(tmp_path):
    data = np.random.default_rng(0).integers(0, 256, 120, dtype=np.uint8).tobytes()
    path = tmp_path / "y.bin"
    path.write_bytes(data)
    return path, data


def flipped(data, positions):
    b = bytearray(data)
    for i in positions:
        b[i // 8] ^= 1 << (7 - i % 8)
    return bytes(b)


@pytest.mark.parametrize("variant", ["gel4", "gel5"])
def test_compress_decompress_roundtrip(sample, tmp_path, capsys, variant):
    path, data = sample
    payload = tmp_path / "y.gelc"
    assert run(["compress", str(path), "--p", "1/192", "--variant", variant, "--out", str(payload)], capsys)[0] == 0
    for ref_bits in ([], [0, 1, 2, 3, 4], [100, 300, 500, 700, 900]):
        ref = tmp_path / "z.bin"
        ref.write_bytes(flipped(data, ref_bits))
        out = tmp_path / "y2.bin"
        rc, _, err = run(["decompress", str(payload), str(ref), "--out", str(out)], capsys)
        assert rc == 0, err
        assert out.read_bytes() == data


def test_decompress_failures(sample, tmp_path, capsys):
    path, data = sample
    payload = tmp_path / "y.gelc"
    run(["compress", str(path), "--p", "1/192", "--out", str(payload)], capsys)
    far = tmp_path / "far.bin"
    far.write_bytes(flipped(data, range(0, 960, 7)))
    rc, _, err = run(["decompress", str(payload), str(far), "--out", str(tmp_path / "o")], capsys)
    assert_error(rc, err)
    short = tmp_path / "short.bin"
    short.write_bytes(data[:-1])
    rc, _, err = run(["decompress", str(payload), str(short)], capsys)
    assert_error(rc, err)
    assert err.startswith("ERR_LENGTH")
    bad = tmp_path / "bad.gelc"
    bad.write_bytes(b"NOPE" + payload.read_bytes()[4:])
    rc, _, err = run(["decompress", str(bad), str(path)], capsys)
    assert_error(rc, err)
    assert err.startswith("ERR_PAYLOAD")
    rc, _, err = run(["decompress", str(tmp_path / "missing"), str(path)], capsys)
    assert_error(rc, err)
    assert err.startswith("ERR_IO")


def test_rate_csv(capsys):
    rc, out, _ = run(["rate", "--variant", "both", "--m", "20000", "--grid", "0:0.0025:101"], capsys)
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "p,rate,variant,m" and len(lines) == 203
    rc, _, err = run(["rate", "--variant", "gel4", "--grid", "0:0.2:3"], capsys)
    assert_error(rc, err)


def test_pspread_example(capsys):
    rc, out, _ = run(["pspread", str(FIXTURE), "--p", "3/7"], capsys)
    assert rc == 0 and "D_p=4" in out and "p'=2/7" in out


def test_simulate_hash(capsys):
    rc, out, _ = run(["simulate-hash", "--construction", "1", "--n", "15", "--p", "2/15", "--trials", "40"], capsys)
    rows = out.splitlines()[1:]
    assert rc == 0 and len(rows) == 40 and all(r.endswith(",1") for r in rows)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["design", "--p", "1/192"],
        ["design", "--n", "960", "--p", "one"],
        ["design", "--n", "960", "--p", "1/192", "--variant", "gel9"],
        ["simulate-hash", "--p", "1/5"],
        ["pspread", "/nonexistent", "--p", "1/2"],
    ],
)
def test_failures_are_single_line(argv, capsys):
    rc, _, err = run(argv, capsys)
    assert_error(rc, err)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sicomp", "pspread", str(FIXTURE), "--p", "3/7"], capture_output=True, text=True)
    assert proc.returncode == 0 and "p'=2/7" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "sicomp", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stderr.startswith("ERR_USAGE")
