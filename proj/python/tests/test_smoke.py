import math

import numpy as np
import pytest

import riscest


def test_bessel_and_schedule():
    assert riscest.bessel_j0(0.0) == 1.0
    assert abs(riscest.bessel_j0(2.404825557695773)) < 1e-12
    x = np.linspace(0, 10, 5)
    assert riscest.bessel_j0(x).shape == (5,)
    s = riscest.dft_schedule(4, 8)
    assert s.shape == (4, 8)
    assert np.allclose(s @ s.conj().T, 8 * np.eye(4))


def test_config_overrides_and_errors():
    cfg = riscest.config("desk", {"epochs": 3, "snr_grid": "-5,5"})
    assert cfg["epochs"] == "3"
    assert cfg["bs_h"] == "8"
    with pytest.raises(riscest.ConfigError):
        riscest.config("desk", {"no_such_key": 1})
    with pytest.raises(riscest.ConfigError):
        riscest.config("laptop")


def test_sample_and_ls():
    s = riscest.sample("desk", {}, snr_db=math.inf, index=3)
    assert s["G"].shape == (64, 16)
    assert s["S"].shape == (16, 16)
    g = riscest.ls_estimate(s["Y"], s["S"])
    assert riscest.nmse(g, s["G"]) < 1e-20
    noisy = riscest.sample("desk", {}, snr_db=0.0, index=3)
    assert -14 < riscest.nmse_db(noisy["G_ls"], noisy["G"]) < -9


def test_correlation_matrices():
    r_ris, r_bs = riscest.correlation_matrices()
    assert r_ris.shape == (16, 16)
    assert r_bs.shape == (64, 64)
    assert np.allclose(np.diag(r_bs), 1.0)
    root = riscest.psd_sqrt(r_ris)
    assert np.allclose(root @ root, r_ris, atol=1e-8)


def test_complexity():
    c = riscest.closed_form_cost(32, 32, 32, 3, 3)
    assert c["total"] == 122683392


def test_pipeline_round_trip(tmp_path):
    kw = {"out_dir": str(tmp_path), "train_samples": 20, "test_samples": 3, "snr_grid": "0",
          "epochs": 1, "base_filters": 4, "covariance_samples": 20,
          "patch_h": 8, "patch_w": 8, "tile_h": 8, "tile_w": 8, "patches_per_sample": 1}
    out = riscest.generate("desk", kw)
    assert any(f.endswith("train.rcds") for f in out["files"])
    ds = riscest.load_dataset(str(tmp_path / "train.rcds"))
    assert ds["inputs"].shape == (14, 2, 8, 8)
    assert ds["meta"]["role"] == "train"
    riscest.train("desk", kw)
    res = riscest.evaluate("desk", kw)
    methods = {r["method"] for r in res["rows"]}
    assert {"ls", "lmmse", "net_full", "net_tiled"} <= methods
    s = riscest.sample("desk", kw, snr_db=0.0, index=0)
    den = riscest.denoise(str(tmp_path / "model.rcnn"), s["G_ls"])
    assert den.shape == (64, 16)
    with pytest.raises(riscest.ShapeError):
        riscest.denoise(str(tmp_path / "model.rcnn"), s["G_ls"], 6, 16)
    with pytest.raises(riscest.FormatError):
        riscest.load_dataset(str(tmp_path / "model.rcnn"))
