import json
import os
import struct
import subprocess

import pytest

CLI = os.environ.get("NOISYDMD_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="NOISYDMD_CLI not set")


def run(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("NOISYDMD_SEED", None)
    full_env.update(env or {})
    return subprocess.run([CLI, "--quiet", *args], capture_output=True, text=True, env=full_env, cwd=cwd)


def header_shape(path):
    with open(path, "rb") as f:
        head = f.read(28)
    q, p = struct.unpack_from("<QQ", head, 12)
    return q, p


@pytest.mark.parametrize(
    "args, rows",
    [
        (["nlse"], 512),
        (["fne", "--nx", "256", "--nt", "20", "--tmax", "4"], 512),
        (["swe", "--nx", "64", "--ny", "64", "--nt", "10", "--tmax", "0.2"], 4096),
    ],
)
def test_generate_shapes(tmp_path, args, rows):
    out = tmp_path / "x.dmds"
    r = run("generate", *args, "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert header_shape(out)[0] == rows


def test_corrupt_filter_fit_evaluate(tmp_path):
    x = tmp_path / "x.dmds"
    assert run("generate", "nlse", "--nw", "64", "--nt", "30", "--out", str(x)).returncode == 0
    noisy = tmp_path / "noisy.dmds"
    assert run("corrupt", "--in", str(x), "--out", str(noisy), "--snr-db", "20", "--seed", "3").returncode == 0
    filtered = tmp_path / "f.dmds"
    assert run("filter", "--in", str(noisy), "--out", str(filtered), "--method", "ialm").returncode == 0
    assert header_shape(filtered) == header_shape(x)
    model = tmp_path / "model.json"
    assert run("fit", "--in", str(filtered), "--out", str(model)).returncode == 0
    assert json.loads(model.read_text())["rank"] >= 1
    csv = tmp_path / "m.csv"
    r = run("evaluate", "--model", str(model), "--truth", str(x), "--out", str(csv))
    assert r.returncode == 0, r.stderr
    assert csv.read_text().startswith("dataset,method,snr_db,seed")


def test_pipeline_and_plot(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nlse": {"n_w": 64, "n_t": 30}, "seeds": [0], "snr_db": [20]}))
    out = tmp_path / "run"
    r = run("--config", str(cfg), "--out-dir", str(out), "sweep", "nlse", "--methods", "none,tls")
    assert r.returncode == 0, r.stderr
    assert (out / "summary.csv").exists()
    assert (out / "manifest.json").exists()
    svg = tmp_path / "rank.svg"
    assert run("plot", "--kind", "rank_bar", "--out", str(svg), str(out / "metrics.csv")).returncode == 0
    assert svg.read_text().count('class="bar"') == 2


def test_exit_codes(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"methods": []}))
    assert run("--config", str(cfg), "pipeline", "nlse").returncode == 2
    assert run("generate", "kdv").returncode == 2
    assert run("corrupt", "--in", str(tmp_path / "missing.dmds"), "--out", str(tmp_path / "o.dmds"),
               "--snr-db", "10").returncode == 4
    assert run("generate", "nlse", "--out", str(tmp_path / "x.dmds"), env={"NOISYDMD_SEED": "abc"}).returncode == 2
    bad = tmp_path / "bad.dmds"
    bad.write_bytes(b"nope" * 20)
    assert run("fit", "--in", str(bad), "--out", str(tmp_path / "m.json")).returncode == 4
