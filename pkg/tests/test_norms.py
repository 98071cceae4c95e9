import math

import numpy as np
import pytest

from curveflow.errors import InsufficientSamples, InvalidSpec
from curveflow.norms import (
    NormSpec,
    NormValue,
    TimeSeries,
    slobodetskii_seminorm,
    sobolev_slobodetskii_norm,
    weighted_lp_norm,
)


def series(fn, n=65, T=1.0):
    t = np.linspace(0.0, T, n)
    return TimeSeries(t, fn(t))


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        NormSpec(p=1.0)
    with pytest.raises(InvalidSpec):
        NormSpec(p=2.0, mu=0.5)
    with pytest.raises(InvalidSpec):
        NormSpec(T=0.0)
    with pytest.raises(InvalidSpec):
        NormSpec(s=-1.0)
    with pytest.raises(InvalidSpec):
        slobodetskii_seminorm(series(np.sin), NormSpec(s=1.0))


def test_time_series_validation():
    with pytest.raises(InsufficientSamples):
        TimeSeries([0.0], [1.0])
    with pytest.raises(ValueError):
        TimeSeries([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])


@pytest.mark.parametrize("c", [1.0, -2.5, 0.0])
def test_lp_of_constant(c):
    assert weighted_lp_norm(series(lambda t: np.full_like(t, c)), NormSpec()) == pytest.approx(abs(c), rel=1e-12)


def test_weighted_lp_of_one():
    val = weighted_lp_norm(series(np.ones_like, 9), NormSpec(mu=0.75))
    assert val == pytest.approx(math.sqrt(2 / 3), rel=1e-10)


def test_lp_of_identity():
    assert weighted_lp_norm(series(lambda t: t, 5), NormSpec()) == pytest.approx(1 / math.sqrt(3), rel=1e-12)


def test_weighted_lp_of_identity_closed_form():
    # int_0^1 t^{2(1-mu)} t^2 dt = 1 / (5 - 2 mu)
    for mu in (0.6, 0.8, 0.95):
        val = weighted_lp_norm(series(lambda t: t, 7), NormSpec(mu=mu))
        assert val == pytest.approx(math.sqrt(1 / (5 - 2 * mu)), rel=1e-10)


def test_seminorm_of_constant_is_zero():
    spec = NormSpec(s=0.5, mu=0.8)
    assert slobodetskii_seminorm(series(lambda t: np.full_like(t, 4.0)), spec) == 0.0


def test_seminorm_of_identity():
    val = slobodetskii_seminorm(series(lambda t: t, 33), NormSpec(s=0.5))
    assert val == pytest.approx(math.sqrt(0.5), rel=1e-4)


def test_seminorm_of_identity_other_order():
    # int_0^1 int_0^t (t - tau)^{2 - 1 - 2s} = 1 / ((2 - 2s)(3 - 2s))
    s = 0.3
    val = slobodetskii_seminorm(series(lambda t: t, 33), NormSpec(s=s))
    assert val == pytest.approx(math.sqrt(1 / ((2 - 2 * s) * (3 - 2 * s))), rel=1e-4)


def test_seminorm_weighted_identity():
    # with the weight tau^beta the inner integral is a Beta function
    s, mu, p = 0.5, 0.8, 2.0
    beta = (1 - mu) * p
    inner = math.gamma(beta + 1) * math.gamma(p - s * p) / math.gamma(beta + 1 + p - s * p)
    exact = math.sqrt(inner / (beta + p - s * p + 1))
    val = slobodetskii_seminorm(series(lambda t: t, 33), NormSpec(s=s, mu=mu, p=p))
    assert val == pytest.approx(exact, rel=1e-4)


def test_seminorm_homogeneity():
    spec = NormSpec(s=0.4, mu=0.9)
    u = series(lambda t: np.sin(5 * t) + t**2)
    v = TimeSeries(u.times, 3 * u.values)
    assert slobodetskii_seminorm(v, spec) == pytest.approx(3 * slobodetskii_seminorm(u, spec), rel=1e-10)


def test_sobolev_norm_examples():
    u = series(lambda t: t, 17)
    assert sobolev_slobodetskii_norm(u, NormSpec(s=1.0)) == pytest.approx(math.sqrt(4 / 3), rel=1e-10)
    spec = NormSpec(s=0.0, mu=0.7)
    assert sobolev_slobodetskii_norm(u, spec) == weighted_lp_norm(u, spec)
    with pytest.raises(InsufficientSamples):
        sobolev_slobodetskii_norm(TimeSeries([0.0, 1.0], [0.0, 1.0]), NormSpec(s=2.0))


def test_sobolev_norm_monotone_in_T():
    u = series(lambda t: np.cos(3 * t), 129, T=2.0)
    vals = [sobolev_slobodetskii_norm(u, NormSpec(s=1.5, mu=0.8, T=T)) for T in (0.5, 1.0, 2.0)]
    assert vals[0] <= vals[1] <= vals[2]


def test_weighted_not_above_unweighted():
    u = series(lambda t: 1 + np.sin(7 * t), 129)
    for s in (0.0, 0.5):
        w = sobolev_slobodetskii_norm(u, NormSpec(s=s, mu=0.7))
        unw = sobolev_slobodetskii_norm(u, NormSpec(s=s, mu=1.0))
        assert w <= unw


def test_error_bar_brackets_resolution_change():
    spec = NormSpec(s=0.5, mu=0.875)
    fn = lambda t: np.sin(6 * t) + np.sqrt(t)
    coarse = slobodetskii_seminorm(series(fn, 65), spec, with_error=True)
    fine = slobodetskii_seminorm(series(fn, 129), spec, with_error=True)
    assert isinstance(coarse, NormValue) and coarse.error > 0
    assert abs(fine.value - coarse.value) < 4 * coarse.error


def test_vector_series():
    t = np.linspace(0, 1, 33)
    u = TimeSeries(t, np.c_[t, np.zeros_like(t)])
    assert weighted_lp_norm(u, NormSpec()) == pytest.approx(1 / math.sqrt(3), rel=1e-12)
