import math

import numpy as np
import pytest

import geoxray


def test_metric_curvature_and_exit_time():
    cap = geoxray.Metric("cap:0.5")
    assert cap.name == "cap"
    assert cap.curvature(0.2, -0.3) == pytest.approx(1.0, abs=1e-10)
    assert geoxray.Metric("hyperbolic").curvature(0.1, 0.4) == pytest.approx(-1.0, abs=1e-10)
    assert geoxray.exit_time(cap, 0.0, 0.0, 0.7) == pytest.approx(2 * math.atan(0.5), abs=1e-8)
    path = geoxray.trace(geoxray.Metric("euclidean"), 0.0, 0.0, 0.0)
    assert path["samples"].shape[1] == 4
    assert path["exit_time"] == pytest.approx(1.0, abs=1e-10)


def test_bad_metric_raises_value_error():
    with pytest.raises(ValueError):
        geoxray.Metric("torus")


def test_radon_and_fbp_round_trip():
    f = geoxray.phantom("gaussian_bump", 64)
    sino = geoxray.radon_forward(f, 128, 180)
    assert sino.shape == (128, 180)
    rec = geoxray.fbp(sino, 64)
    inside = np.hypot(*np.meshgrid(np.linspace(-1, 1, 64), np.linspace(-1, 1, 64))) <= 1.0
    err = np.linalg.norm((rec - f)[inside]) / np.linalg.norm(f[inside])
    assert err < 0.02


def test_xray_forward_and_inversion():
    g = geoxray.Metric("bump:0.2,0.4")
    f = geoxray.phantom("two_bump", 32)
    data = geoxray.xray_forward(g, f, 48, 48)
    assert data["values"].shape == (48, 48)
    assert data["trapped"] == 0
    r = geoxray.invert(g, data["values"], 32, max_iter=30)
    assert np.all(np.diff(r["residuals"]) <= 0)
    assert r["f"].shape == (32, 32)


def test_non_simple_metric_is_refused():
    report = geoxray.simplicity(geoxray.Metric("cap:1.5"), 16, 16)
    assert report["simple"] is False
    assert not report["strictly_convex"]
    assert report["witnesses"]
    with pytest.raises(geoxray.SimplicityError):
        geoxray.invert(geoxray.Metric("cap:1.5"), np.zeros((16, 16)), 24)


def test_sm_identities():
    r1, r2, r3 = geoxray.commutator_residuals(geoxray.Metric("cap:0.5"), 65, 128)
    assert max(r1, r2, r3) < 1e-3
    assert geoxray.pestov_residual(geoxray.Metric("hyperbolic"), 65, 128) < 1e-3


def test_lightray_fubini():
    assert geoxray.lightray_fubini(geoxray.Metric("euclidean")) < 1e-3


def test_cli_run_in_process(tmp_path):
    status, manifest = geoxray.run("verify-pestov", phantom="zero", grid=33, ntheta=32, out=str(tmp_path))
    assert status == 0
    assert manifest["metrics"]["pestov_rel_residual"] == 0.0
    assert (tmp_path / "manifest.json").exists()
    assert "radon" in geoxray.commands()
