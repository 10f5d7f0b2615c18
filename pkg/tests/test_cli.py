import json
import subprocess
import sys

import numpy as np
import pytest

from qtlib import media, tensorio
from qtlib.cli import main
from qtlib.qtensor import QTensor, identity_tensor, qt_product, tensor_ct


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_help_documents_formats(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for word in ("QTNS1", "frame_000001.ppm", "size,method,time_s,err", "2 numerical failure"):
        assert word in out


def test_decompose_golden_polar(capsys, tmp_path):
    code, out, _ = run(capsys, "decompose", "polar", "--in", tensorio.golden_path("polar"), "--out", tmp_path / "p")
    assert code == 0
    rep = json.loads(out)
    assert rep["residual_rel"] <= 1e-11 and rep["U_unitary"] and rep["H_hermitian"] and rep["H_hat_psd"]
    assert rep["printed_max_abs_dev"]["H"] <= 5e-4 and rep["printed_max_abs_dev"]["U"] <= 5e-4
    assert rep["matrix_identity_rel"] <= 1e-11
    assert json.loads((tmp_path / "p.report.json").read_text()) == rep
    U = tensorio.load(rep["files"]["U"])
    H = tensorio.load(rep["files"]["H"])
    A = tensorio.load(tensorio.golden_path("polar"))
    assert (qt_product(U, H) - A).norm() <= 1e-11 * A.norm()


@pytest.mark.parametrize("kind,keys", [
    ("svd", ("U_unitary", "V_unitary", "S_f_diagonal", "S_hat_f_diagonal")),
    ("plu", ("Phat_f_permutation", "L_hat_unit_lower", "U_hat_upper")),
    ("lu", ("L_unit_f_lower", "U_f_upper")),
])
def test_decompose_kinds(capsys, tmp_path, rng, kind, keys):
    A = QTensor.random(3, 3, 4, rng)
    tensorio.save(A, tmp_path / "a.json")
    code, out, _ = run(capsys, "decompose", kind, "--in", tmp_path / "a.json", "--out", tmp_path / "f",
                       "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["residual_rel"] <= 1e-11 and rep["matrix_identity_rel"] <= 1e-11
    assert all(rep[k] for k in keys)
    assert all(p.endswith(".json") for p in rep["files"].values())


def test_mul_report_identical_across_paths(capsys, tmp_path, rng):
    A, B = QTensor.random(2, 3, 4, rng), QTensor.random(3, 2, 4, rng)
    tensorio.save(A, tmp_path / "a.qtns")
    tensorio.save(B, tmp_path / "b.qtns")
    outs = []
    for path in ("direct", "fourier"):
        code, out, _ = run(capsys, "mul", "--in", tmp_path / "a.qtns", "--in2", tmp_path / "b.qtns",
                           "--out", tmp_path / f"{path}.qtns", "--path", path)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] and json.loads(outs[0])["cross_path_agree"] is True
    C = tensorio.load(tmp_path / "direct.qtns")
    assert (C - qt_product(A, B)).norm() <= 1e-12 * A.norm() * B.norm()


def test_ct(capsys, tmp_path, rng):
    A = QTensor.random(2, 3, 3, rng)
    tensorio.save(A, tmp_path / "a.qtns")
    assert run(capsys, "ct", "--in", tmp_path / "a.qtns", "--out", tmp_path / "t.qtns")[0] == 0
    T = tensorio.load(tmp_path / "t.qtns")
    assert np.array_equal(T.d, tensor_ct(A).d) and np.array_equal(T.c, tensor_ct(A).c)


def test_inv_identity(capsys, tmp_path):
    tensorio.save(identity_tensor(3, 3), tmp_path / "i.json")
    code, out, _ = run(capsys, "inv", "--in", tmp_path / "i.json", "--out", tmp_path / "o.json")
    assert code == 0 and json.loads(out)["err"] == 0.0
    assert np.array_equal(tensorio.load(tmp_path / "o.json").d, identity_tensor(3, 3).d)


def test_tikhonov(capsys, tmp_path, rng):
    tensorio.save(QTensor.random(3, 3, 2, rng), tmp_path / "B.qtns")
    tensorio.save(QTensor.random(3, 1, 2, rng), tmp_path / "b.qtns")
    code, out, _ = run(capsys, "tikhonov", "--in", tmp_path / "B.qtns", "--in2", tmp_path / "b.qtns",
                       "--out", tmp_path / "x.qtns", "--lambda", "0.5")
    assert code == 0 and json.loads(out)["normal_residual_rel"] <= 1e-10
    assert tensorio.load(tmp_path / "x.qtns").shape == (3, 1, 2)


def test_exit_codes(capsys, tmp_path):
    tensorio.save(QTensor.zeros(2, 2, 2), tmp_path / "z.qtns")
    code, _, err = run(capsys, "inv", "--in", tmp_path / "z.qtns", "--out", tmp_path / "o.qtns")
    assert code == 2 and err.startswith("error [") and "Singular" in err
    code, _, err = run(capsys, "inv", "--in", tmp_path / "missing.qtns", "--out", tmp_path / "o.qtns")
    assert code == 3
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "decompose", "polar")[0] == 1
    tensorio.save(QTensor.zeros(2, 3, 2), tmp_path / "r.qtns")
    code, _, err = run(capsys, "decompose", "plu", "--in", tmp_path / "r.qtns", "--out", tmp_path / "f")
    assert code == 1 and "ShapeMismatch" in err
    (tmp_path / "bad.qtns").write_bytes(b"garbage")
    code, _, err = run(capsys, "ct", "--in", tmp_path / "bad.qtns", "--out", tmp_path / "o.qtns")
    assert code == 1 and "TensorFormatError" in err
    assert not (tmp_path / "o.qtns").exists()


def test_rotate_and_metrics(capsys, tmp_path):
    clip = media.synthetic_clip(4, 8)
    media.write_frames(tmp_path / "in", clip)
    code, _, _ = run(capsys, "rotate", "--frames", tmp_path / "in", "--out", tmp_path / "out",
                     "--schedule", "fixed_step", "--param", "steps=90,0,180", "--angles-csv", tmp_path / "a.csv")
    assert code == 0
    out = media.read_frames(tmp_path / "out")
    assert np.array_equal(out[1, :, :, 0], np.rot90(clip[1, :, :, 0]))
    assert np.array_equal(out[:, :, :, 1], clip[:, :, :, 1])
    assert (tmp_path / "a.csv").read_text().splitlines()[2] == "2,90.000000,0.000000,180.000000"
    code, text, _ = run(capsys, "metrics", "--frames", tmp_path / "in", tmp_path / "out", "--out", tmp_path / "m.csv")
    assert code == 0 and "temporal consistency mean" in text
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "label,tc_mean,tc_std,cc_mean" and lines[1].startswith("in,") and len(lines) == 3
    assert run(capsys, "rotate", "--frames", tmp_path / "in", "--out", tmp_path / "x", "--param", "omega=1")[0] == 1


def test_metrics_too_few_frames(capsys, tmp_path):
    media.write_frames(tmp_path / "one", media.synthetic_clip(1, 4))
    code, _, err = run(capsys, "metrics", "--frames", tmp_path / "one")
    assert code == 1 and "TooFewFrames" in err


def test_bench(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--sizes", "3,2;4,3", "--trials", "1", "--out", tmp_path / "b.csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "size,method,time_s,err" and len(lines) == 9
    assert (tmp_path / "b.csv").read_text() == out
    assert run(capsys, "bench", "--sizes", "3;x")[0] == 1


def test_verify(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0 and out.strip().endswith("checks passed") and "FAIL" not in out


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "qtlib.cli", "verify"], capture_output=True, text=True)
    assert r.returncode == 0 and "checks passed" in r.stdout
