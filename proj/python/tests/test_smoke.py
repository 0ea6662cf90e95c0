import math

import numpy as np
import pytest

import marma


def test_distribution():
    assert marma.mean(1.0) == pytest.approx(0.3535533905932738, rel=1e-14)
    assert marma.quantile(0.5, 1.0) == pytest.approx(0.30636228415302724, rel=1e-13)
    for q in (0.05, 0.5, 0.95):
        assert marma.cdf(marma.quantile(q, 3.0), 3.0) == pytest.approx(q, abs=1e-10)
    assert marma.mean_to_shape(marma.mean(2.5)) == pytest.approx(2.5, rel=1e-12)
    x = np.array(marma.sample(2.0, 20000, seed=4))
    assert ((x > 0) & (x < 1)).all()
    assert abs(x.mean() - (2 / 3) ** 1.5) < 4 * x.std() / math.sqrt(x.size)
    with pytest.raises(ValueError):
        marma.pdf(0.5, -1.0)


def test_links():
    assert marma.link("logit", 0.5) == 0.0
    assert marma.link_inverse("cloglog", 0.0) == pytest.approx(1 - math.exp(-1))
    with pytest.raises(ValueError):
        marma.link("probit", 0.5)


def test_simulate_fit_forecast():
    sim = marma.simulate(500, 0.5, beta=[-0.5], phi=[-0.4], theta=[-0.2], harmonics=[("sin", 100)], seed=3)
    y, x = sim["y"], sim["x"]
    assert y.shape == (500,) and x.shape == (500, 1)
    again = marma.simulate(500, 0.5, beta=[-0.5], phi=[-0.4], theta=[-0.2], harmonics=[("sin", 100)], seed=3)
    assert np.array_equal(y, again["y"])

    f = marma.fit(y, x, ar=1, ma=1)
    assert f.converged
    assert f.names == ["alpha", "beta1", "phi1", "theta1"]
    truth = np.array([0.5, -0.5, -0.4, -0.2])
    assert (np.abs(f.estimate - truth) < 3 * f.std_errors).all()
    assert f.aic < f.bic
    lo, hi = zip(*f.confint(0.05))
    assert (np.array(lo) < f.estimate).all() and (f.estimate < np.array(hi)).all()

    res = f.residuals()
    assert marma.ks_normality(res["quantile"])[1] > 0.01

    t = np.arange(501, 504)
    new_x = np.sin(2 * np.pi * (100 + t) / 100).reshape(-1, 1)
    p = f.predict(3, new_x)
    assert p["point"].shape == (3,)
    b1 = f.bootstrap(3, paths=200, level=0.1, seed=9, threads=1, new_x=new_x)
    b4 = f.bootstrap(3, paths=200, level=0.1, seed=9, threads=4, new_x=new_x)
    assert np.array_equal(b1["paths"], b4["paths"])
    assert np.array_equal(b1["point"], p["point"])
    assert all(l <= m <= u for l, m, u in zip(b1["lower"], b1["point"], b1["upper"]))
    with pytest.raises(ValueError):
        f.predict(3)


def test_bad_data():
    with pytest.raises(ValueError):
        marma.fit(np.array([0.2, 1.5, 0.3, 0.4]))
