import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from dcart import io as dio
from dcart.cli import main
from dcart.geometry import SystemGeometry
from dcart.projector import Sinogram

ROOT = Path(__file__).resolve().parents[1]


def run(args):
    return main([str(a) for a in args])


def test_phantom_project_reconstruct_metrics(tmp_path, capsys):
    img, sg, noisy, rec = (tmp_path / n for n in ("p.dcim", "s.dcsg", "n.dcsg", "r.dcim"))
    assert run(["phantom", "--kind", "shepp-logan", "--n", 32, "--R", 16, "--out", img]) == 0
    assert run(["project", "--image", img, "--R", 16, "--rho-max", 200, "--q", 4, "--n-phi", 101,
                "--out", sg]) == 0
    s = dio.read_sinogram(sg)
    assert s.geometry.n_rho == round(4 * 32 * 32 / 101)
    assert run(["add-noise", "--sinogram", sg, "--snr-db", 20, "--seed", 1, "--out", noisy]) == 0
    assert run(["reconstruct", "--sinogram", noisy, "--grid-n", 32, "--epsilon", 1.0, "--out", rec]) == 0
    assert dio.read_image(rec).grid == dio.read_image(img).grid
    for name in ("m.txt", "m.json"):
        assert run(["metrics", "--recon", rec, "--truth", img, "--out", tmp_path / name]) == 0
    assert "nmse=" in (tmp_path / "m.txt").read_text()
    assert "nmae" in json.loads((tmp_path / "m.json").read_text())
    assert run(["metrics", "--recon", rec, "--truth", img, "--sinogram", noisy, "--out", tmp_path / "g.json"]) == 0
    assert json.loads((tmp_path / "g.json").read_text())["geometry"]["N_phi"] == 101
    err = capsys.readouterr().err
    assert "resolved:" in err


def test_q_resolves_n_rho(tmp_path):
    img = tmp_path / "p.dcim"
    assert run(["phantom", "--kind", "bars", "--n", 512, "--R", 256, "--out", img]) == 0
    # only the resolved N_rho matters here; a coarse arc step keeps the run short
    out = tmp_path / "s.dcsg"
    assert run(["project", "--image", img, "--R", 256, "--rho-max", 300, "--q", 1, "--n-phi", 1609,
                "--arc-step", 50, "--out", out]) == 0
    assert dio.read_sinogram(out).geometry.n_rho == 163


def test_zero_sinogram(tmp_path):
    sg, rec = tmp_path / "z.dcsg", tmp_path / "z.dcim"
    dio.write_sinogram(sg, Sinogram(SystemGeometry(16.0, 200.0, 40, 64), np.zeros((40, 64))))
    assert run(["reconstruct", "--sinogram", sg, "--grid-n", 24, "--out", rec]) == 0
    assert np.all(dio.read_image(rec).values == 0.0)


def test_consistency(tmp_path):
    img, sg, rep = tmp_path / "p.dcim", tmp_path / "s.dcsg", tmp_path / "c.txt"
    run(["phantom", "--kind", "derenzo", "--n", 32, "--R", 16, "--out", img])
    run(["project", "--image", img, "--R", 16, "--rho-max", 200, "--n-rho", 60, "--out", sg])
    assert run(["consistency", "--sinogram", sg, "--n-max", 3, "--out", rep]) == 0
    lines = rep.read_text().splitlines()
    assert lines[0].startswith("n=1 k=1 residual=")
    assert len(lines) == 4
    assert run(["consistency", "--sinogram", sg, "--n-max", 2, "--tail", "--out", tmp_path / "c.json"]) == 0
    assert json.loads((tmp_path / "c.json").read_text())["residuals"][1]["k"] == 2


def test_pipeline_checked_in_config(tmp_path, capsys):
    code = run(["pipeline", "--config", ROOT / "configs" / "shepp-logan-q10.json", "--output-dir", tmp_path])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert {"nmse", "nmae"} <= set(report)
    assert report["nmse"] <= 0.05
    for name in ("phantom.dcim", "sinogram.dcsg", "recon.dcim", "recon.pgm", "report.txt"):
        assert (tmp_path / name).exists()
    out = capsys.readouterr()
    assert "nmse=" in out.out
    assert '"n_rho": 408' in out.err


def test_error_lines(tmp_path, capsys):
    bad = tmp_path / "bad.dcsg"
    bad.write_bytes(b"NOPE\n\n")
    assert run(["add-noise", "--sinogram", bad, "--snr-db", 1, "--seed", 1, "--out", tmp_path / "o"]) != 0
    assert "error code=bad-magic" in capsys.readouterr().err
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"geometry": {"R": 1.0, "rho_max": 5.0, "q": 1.0, "wat": 1}, "grid": {"n": 8}}))
    assert run(["pipeline", "--config", cfg]) != 0
    assert "key=geometry.wat" in capsys.readouterr().err
    img = tmp_path / "c.dcim"
    run(["phantom", "--kind", "bars", "--n", 16, "--center", "0,0", "--out", img])
    assert run(["project", "--image", img, "--R", 8, "--rho-max", 50, "--n-rho", 5, "--out", tmp_path / "s"]) != 0
    assert "error code=support" in capsys.readouterr().err
    assert run(["project", "--image", tmp_path / "missing", "--R", 8, "--rho-max", 50, "--n-rho", 5,
                "--out", tmp_path / "s"]) != 0
    assert "error code=io" in capsys.readouterr().err


def test_threads_flag(tmp_path):
    img = tmp_path / "p.dcim"
    assert run(["--threads", 1, "phantom", "--kind", "bars", "--n", 8, "--center", "50,0", "--out", img]) == 0


def test_module_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dcart", "phantom", "--kind", "bars", "--n", "8",
                          "--center", "50,0", "--out", str(tmp_path / "p.dcim")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
