import math

import numpy as np
import pytest

import offgrid as og


def test_dirichlet_kernel_exactness():
    T = 63
    fam = og.dirichlet_family(T)
    mu = og.torus_grid(T)
    rep = og.compute_CT(fam, mu)
    assert rep == pytest.approx(T / math.sqrt(T * T - 1.0), abs=1e-10)


def test_synthesize_and_norms():
    fam = og.dirichlet_family(31)
    mu = og.torus_grid(31)
    mix = og.Mixture(np.array([1.0]), np.array([0.25]))
    m = og.synthesize(fam, mu, mix)
    assert mu.norm(m) == pytest.approx(1.0, abs=1e-10)


def test_noiseless_recovery():
    fam = og.dirichlet_family(63)
    mu = og.torus_grid(63)
    truth = og.Mixture(np.array([1.0, -0.7]), np.array([0.2, 0.6]))
    y = og.synthesize(fam, mu, truth)
    cfg = og.SolverConfig()
    cfg.kappa = 1e-6
    cfg.expected_s = 2
    fr = og.fit(fam, mu, y, cfg)
    assert fr.estimate.size() == 2
    got = sorted(zip(fr.estimate.theta, fr.estimate.beta))
    want = sorted(zip(truth.theta, truth.beta))
    for (gt, gb), (wt, wb) in zip(got, want):
        assert gt == pytest.approx(wt, abs=1e-6)
        assert gb == pytest.approx(wb, abs=1e-4)


def test_noise_determinism():
    mu = og.torus_grid(31)
    nm = og.grid_white(mu, 1.0)
    a = og.sample_noise(nm, og.Rng.keyed(42, 1, 7))
    b = og.sample_noise(nm, og.Rng.keyed(42, 1, 7))
    c = og.sample_noise(nm, og.Rng.keyed(42, 1, 8))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_goodness_test_runs():
    fam = og.dirichlet_family(63)
    mu = og.torus_grid(63)
    nm = og.grid_white(mu, 1.0)
    null = og.Mixture(np.array([]), np.array([]))
    y = og.sample_noise(nm, og.Rng.keyed(3, 0, 0))
    out = og.run_test("goodness", fam, mu, y, null, nm, alpha=0.1)
    assert out.threshold > 0.0
    assert isinstance(out.reject, bool)


def test_certificate_duality():
    fam = og.dirichlet_family(63)
    mu = og.torus_grid(63)
    anchors = np.array([0.15, 0.5, 0.85])
    signs = np.array([1.0, -1.0, 1.0])
    cert = og.build_certificate(fam, mu, anchors, signs)
    assert cert.residual_inf <= 1e-8
    beta = np.array([0.8, -1.2, 0.5])
    mix = og.Mixture(beta, anchors)
    m = og.synthesize(fam, mu, mix)
    assert mu.dot(m, cert.p) == pytest.approx(np.abs(beta).sum(), abs=1e-8)


def test_error_maps_to_python():
    with pytest.raises(og.OffgridError):
        og.dirichlet_family(10)  # even T is rejected
