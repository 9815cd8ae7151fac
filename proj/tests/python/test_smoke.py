import math

import pytest

import roundcount as rc


def test_pmf_sums_to_one_on_the_lattice():
    support, probs, tail = rc.rounded_pmf(rc.CountModel("poisson", theta=2.0), 3)
    assert all(u % 3 == 0 for u in support)
    assert abs(sum(probs) + tail - 1.0) < 1e-12
    assert probs[0] == pytest.approx(3 * math.exp(-2.0), rel=1e-14)


def test_moments_closed_form_matches_series():
    closed = rc.moments_poisson(0.1, 2)
    series = rc.moments_series(rc.CountModel("poisson", theta=0.1), 2)
    assert closed["mean"] == pytest.approx(0.6 - math.exp(-0.2) / 2, abs=1e-12)
    assert closed["variance"] == pytest.approx(series["variance"], abs=1e-12)


def test_mle_values():
    assert rc.mle_closed(2, 2) == math.sqrt(2.0)
    assert rc.mle_numeric(rc.CountModel("poisson"), 6, 2) == pytest.approx(math.sqrt(30.0), rel=1e-9)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        rc.mle_closed(3, 2)
    with pytest.raises(ArithmeticError):
        rc.moments_poisson(3.0, 100000)
    with pytest.raises(rc.NearRootOfUnityError):
        rc.rounded_pgf(rc.CountModel("poisson", theta=1.0), 4, 1j)


def test_mse_ratio_is_one_without_rounding():
    assert rc.mse_ratio("binomial", [0.2, 0.5], [1])["psi"] == [1.0, 1.0]


def test_monte_carlo_is_seeded():
    model = rc.CountModel("poisson", theta=4.0)
    a = rc.monte_carlo_mse(model, 2, ["U", "closed-mle"], 2000, seed=7)
    b = rc.monte_carlo_mse(model, 2, ["U", "closed-mle"], 2000, seed=7, workers=3)
    assert a == b
    assert a["U"][2] == "ok"


def test_significance_and_binned_test():
    levels = rc.true_significance(500, 31, [0.3, 0.5], 0.05, "binned-u")
    assert all(level <= 0.05 for level in levels)
    r = rc.binned_test(7750, 500, 31, 0.5, 0.05)
    assert r["reject"] is False


def test_excess_moments_without_rounding():
    e = rc.excess_moments(1, 1, 5.0, 2.0)
    assert e["mean_xi"] == pytest.approx(2.0, abs=1e-12)
    assert e["var_xi"] == pytest.approx(12.0, rel=1e-12)


def test_cli_in_process():
    code, out, _ = rc.cli(["pmf", "--theta", "2", "--n", "3"])
    assert code == 0
    assert out.splitlines()[0].startswith("# ")
    code, _, err = rc.cli(["pmf", "--theta", "-1"])
    assert code == 2
    assert '"kind":"usage"' in err.replace(" ", "")
