"""Smoke tests for the Python bindings."""

import math

import pytest

import sesqui


@pytest.fixture
def geometric():
    offspring = sesqui.pmf_from_entries([(0, 0, 0.5), (1, 0, 0.5)])
    initial = sesqui.pmf_from_entries([(1, 0, 1.0)])
    return sesqui.ProcessSpec(offspring, initial)


@pytest.fixture
def poisson_sub():
    offspring = sesqui.pmf_from_product_poisson(0.95, 1.0)
    initial = sesqui.pmf_from_entries([(1, 0, 1.0)])
    return sesqui.ProcessSpec(offspring, initial)


def test_pmf_basics():
    pmf = sesqui.pmf_from_product_poisson(1.0, 1.0)
    assert pmf.prob(0, 0) == pytest.approx(math.exp(-2.0), rel=1e-12)
    assert abs(sesqui.pgf(pmf, 1.0, 1.0) - 1.0) <= pmf.tail_mass_bound + 1e-12
    mom = sesqui.moments(pmf)
    assert mom.mean_y == pytest.approx(1.0, abs=1e-12)

    with pytest.raises(sesqui.SesquiError):
        sesqui.pmf_from_entries([(0, 0, 0.5), (1, 1, 0.6)])


def test_exact_tables(geometric):
    table = sesqui.total_prob_table(geometric, 30)
    for n in range(1, 31):
        assert table.q[n] == pytest.approx(0.5**n, rel=1e-12)
    oracle = sesqui.oracle_total_size(geometric, 30)
    for n in range(31):
        assert abs(table.q[n] - oracle.q[n]) <= 1e-10


def test_asymptotics(poisson_sub):
    params = sesqui.asymptotic_params(poisson_sub)
    assert params.x0 == pytest.approx(0.5, abs=1e-12)
    assert params.xi == pytest.approx(6.465426668945e-4, rel=1e-6)
    assert params.theta > 0.0
    approx = sesqui.asymp_total_prob(params, 400)
    exact = sesqui.total_prob_table(poisson_sub, 400)
    assert exact.q[400] / approx.value == pytest.approx(1.0, abs=0.01)


def test_critical_decay_rate_vanishes():
    spec = sesqui.ProcessSpec(
        sesqui.pmf_from_product_poisson(1.0, 1.0),
        sesqui.pmf_from_entries([(1, 0, 1.0)]),
    )
    assert sesqui.asymptotic_params(spec).xi == 0.0


def test_integral_route(poisson_sub):
    table = sesqui.point_prob_table(poisson_sub, 12)
    got = sesqui.integral_point_prob(poisson_sub, 4, 5)
    assert got.value == pytest.approx(table.at(4, 5), rel=1e-8)


def test_survival():
    offspring = sesqui.pmf_from_entries(
        [(0, 0, 0.0625), (1, 0, 0.375), (2, 0, 0.5625)]
    )
    spec = sesqui.ProcessSpec(offspring, sesqui.pmf_from_entries([(1, 0, 1.0)]))
    result = sesqui.survival(spec)
    assert result.rho_single == pytest.approx(8.0 / 9.0, abs=1e-12)
    assert result.residual <= 1e-12


def test_family_sweep():
    family = sesqui.family_from_json(
        """{"builtin": "poisson_t", "interval": [0.5, 1.5], "nu": 1.0,
            "initial": [[1, 0, [1.0]]]}"""
    )
    tc = sesqui.find_tc(family)
    assert tc == pytest.approx(1.0, abs=1e-10)
    rows = sesqui.sweep(family, [tc - 0.05, tc, tc + 0.05])
    assert rows[1].xi <= 1e-10
    assert rows[0].rho_single == 0.0
    assert rows[2].rho_single > 0.0
    assert all(r.error == "" for r in rows)


def test_theta_sum():
    s = sesqui.theta_sum(1.0, 0.0, 0)
    assert s.value == pytest.approx(1.7726372048266525, rel=1e-12)
    assert sesqui.theta_sum(1.0, 0.0, 1).value == 0.0


def test_monte_carlo_determinism(geometric):
    one = sesqui.estimate_point_probs(geometric, 20000, 10, 7, threads=1)
    many = sesqui.estimate_point_probs(geometric, 20000, 10, 7, threads=4)
    assert [r.count for r in one.rows] == [r.count for r in many.rows]
    assert one.exceeded == many.exceeded
    total = sum(r.count for r in one.rows) + one.exceeded
    assert total == 20000


def test_sample_total_degenerate():
    spec = sesqui.ProcessSpec(
        sesqui.pmf_from_entries([(0, 0, 1.0)]),
        sesqui.pmf_from_entries([(1, 0, 1.0)]),
    )
    out = sesqui.sample_total(spec, 123, 100)
    assert out.kind == sesqui.SimOutcome.Kind.Finite
    assert out.total == 1
