import math

import numpy as np
import pytest

import splitplot as sp


def f1():
    d = sp.Design(2, 2, [2, 2], [[2, 2]] * 4)
    x = sp.Assignment([0, 0, 1, 1], [[0, 0, 1, 1], [0, 1, 0, 1], [1, 1, 0, 0], [0, 1, 0, 1]])
    y = [1, 3, 2, 4, 2, 6, 4, 8, 3, 5, 1, 3, 0, 2, 4, 6]
    return sp.ObservedData(d, x, y)


def test_design_basics():
    d = sp.Design(2, 2, [2, 2], [[2, 2], [2, 2], [2, 4], [2, 4]])
    assert d.num_plots == 4 and d.num_units == 20
    assert np.allclose(d.size_factors, [0.8, 0.8, 1.2, 1.2])
    assert d.inclusion_probability(2, d.treatment(1, 1)) == pytest.approx(0.5 * 4 / 6)
    assert not d.is_uniform
    with pytest.raises(ValueError):
        sp.Design(2, 2, [1, 2], [[2, 2]] * 3)


def test_randomize_reproducible():
    d = sp.Design(2, 3, [3, 2], [[2, 2, 3]] * 5)
    x1 = sp.randomize(d, 7)
    assert x1 == sp.randomize(d, 7)
    sp.validate_assignment(d, x1)
    assert sorted(x1.a_levels) == [0, 0, 0, 1, 1]


def test_means_and_effects_on_fixture():
    data = f1()
    m = sp.estimate_means(data, "ht")
    assert np.allclose(m.means, [2.5, 5.0, 2.0, 4.0])
    assert m.covariance[0, 0] == pytest.approx(0.25)
    e = sp.estimate_effects(data, "wls")
    assert e.labels == ["A", "B", "AB"]
    assert np.allclose(e.estimates, [-0.75, 2.25, -0.5])
    haj = sp.estimate_effects(data, "haj")
    assert np.allclose(haj.estimates, e.estimates)


def test_fit_matches_means():
    rng = np.random.default_rng(3)
    d = sp.Design(2, 2, [3, 4], [[2, 3], [3, 2], [2, 2], [4, 2], [2, 5], [3, 3], [2, 4]])
    data = sp.ObservedData(d, sp.randomize(d, 11), rng.normal(size=d.num_units))
    for fitting, scheme in [("ols", "sm"), ("wls", "haj"), ("ag", "ht")]:
        f = sp.fit(data, fitting)
        assert np.allclose(f.coefficients, sp.estimate_means(data, scheme).means, atol=1e-12)
    # HC2 on the aggregate fit reproduces the HT covariance estimate
    assert np.allclose(sp.fit(data, "ag").cov_hc2, sp.estimate_means(data, "ht").covariance, atol=1e-12)
    fac = sp.fit(data, "wls", parameterization="factor")
    assert np.allclose(fac.coefficients[1:], sp.estimate_effects(data, "wls").estimates, atol=1e-12)


def test_covariate_adjustment():
    rng = np.random.default_rng(5)
    d = sp.Design(2, 2, [4, 4], [[3, 3]] * 8)
    x = rng.normal(size=(d.num_units, 1))
    data = sp.ObservedData(d, sp.randomize(d, 2), 2.0 * x[:, 0] + rng.normal(size=d.num_units), x, ["x"])
    e = sp.estimate_effects(data, "wls", adjust="additive", covariates=["x"])
    assert e.estimates.shape == (3,)
    with pytest.raises(ValueError):
        sp.estimate_effects(data, "wls", adjust="additive", covariates=["nope"])
    with pytest.raises(ValueError):
        sp.estimate_effects(data, "ht", adjust="additive")


def test_frt_exhaustive_and_seeded():
    data = f1()
    r = sp.frt(data, "ht", mode="exhaustive")
    assert r.mode == "exhaustive" and r.draws == 7776
    assert r.p_value == pytest.approx(r.count_ge / r.draws)
    mc1 = sp.frt(data, "ht", mode="montecarlo", draws=199, seed=4)
    mc2 = sp.frt(data, "ht", mode="montecarlo", draws=199, seed=4)
    assert mc1.p_value == mc2.p_value
    assert mc1.p_value == pytest.approx((1 + mc1.count_ge) / 200)
    with pytest.raises(sp.CapExceeded):
        sp.frt(data, "ht", mode="exhaustive", cap=100)


def test_population_moments():
    d = sp.Design(2, 2, [2, 2], [[2, 2]] * 4)
    rng = np.random.default_rng(9)
    pot = sp.PotentialOutcomes(d, rng.normal(size=(d.num_units, 4)))
    assert sp.true_cov_ht(pot).shape == (4, 4)
    assert np.allclose(sp.vhat_ht_bias(pot), sp.vhat_ht_bias(pot).T)
    data = sp.observe(pot, sp.randomize(d, 1))
    assert data.outcomes.shape == (16,)


def test_dataset_csv():
    text = "whole_plot,unit,a_level,b_level,outcome\n"
    rows = []
    for w, a in enumerate([0, 0, 1, 1]):
        for s, b in enumerate([0, 0, 1, 1]):
            rows.append(f"p{w},{s},{a},{b},{w + s}")
    data = sp.read_dataset_csv(text + "\n".join(rows) + "\n")
    assert data.design.num_units == 16
    with pytest.raises(ValueError):
        sp.read_dataset_csv(text + "p0,0,0,0,1\n")


def test_small_simulation():
    c = sp.SimConfig()
    c.num_plots = 40
    c.replications = 20
    c.workers = 1
    s = sp.run_simulation(c)
    assert len(s.rows) == 3 * len(sp.simulation_schemes())
    row = s.row("wls", "A")
    assert 0.0 <= row.coverage <= 1.0 and math.isfinite(row.sd)
    assert s.to_csv().splitlines()[0].startswith("scheme")
    c.workers = 3
    assert sp.run_simulation(c).to_csv() == s.to_csv()
