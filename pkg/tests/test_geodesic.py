import math

import numpy as np
import pytest

from sblab.geodesic import (
    FlowSeriesResult,
    bracket_series,
    fit_factorial_decay,
    flow_energy,
    geodesic_flow,
    imaginary_time_continuation,
    poisson_bracket_fd,
)
from sblab.geometry import FiberPoint
from sblab.groups import GroupSpec, distance, exp_group
from sblab.representations import BandLimitedFunction

RNG = np.random.default_rng(2718)


def test_flow_identity_and_group_property():
    spec = GroupSpec("u1*su2")
    p = FiberPoint(spec.random_element(RNG), spec.random_algebra(RNG, radius=2.0))
    p0 = geodesic_flow(spec, p, 0.0)
    assert distance(p0.x, p.x) == 0.0
    assert np.array_equal(p0.Y, p.Y)

    s, t = 0.7, -1.3
    a = geodesic_flow(spec, geodesic_flow(spec, p, t), s)
    b = geodesic_flow(spec, p, s + t)
    assert distance(a.x, b.x) <= 1e-12
    assert np.max(np.abs(a.Y - b.Y)) == 0.0  # fiber coordinate conserved exactly
    assert flow_energy(a) == flow_energy(p)


def test_continuation_restricts_and_circle_closed_form():
    spec = GroupSpec("u1")
    k = 3
    f = BandLimitedFunction(spec, {((k,), 0, 0): 1.0})
    theta, y = 0.8, 0.45
    p0 = FiberPoint(exp_group(spec, np.array([theta])), np.zeros(1))
    assert abs(imaginary_time_continuation(f, p0) - f(p0.x)) < 1e-14

    p = FiberPoint(exp_group(spec, np.array([theta])), np.array([y]))
    want = np.exp(1j * k * (theta + 1j * y))
    assert abs(imaginary_time_continuation(f, p) - want) < 1e-13


def test_bracket_series_constant_terminates():
    spec = GroupSpec("u1")
    f = BandLimitedFunction(spec, {((0,), 0, 0): 2.5})
    p = FiberPoint(spec.random_element(RNG), np.array([1.2]))
    res = bracket_series(f, p, 10)
    assert all(abs(s - 2.5) < 1e-15 for s in res.partial_sums)


def test_bracket_series_circle_converges():
    spec = GroupSpec("u1")
    for k in (1, 2):
        f = BandLimitedFunction(spec, {((k,), 0, 0): 1.0})
        for y in (-2.0, 0.5, 2.0):
            p = FiberPoint(exp_group(spec, np.array([0.3])), np.array([y]))
            res = bracket_series(f, p, 30)
            assert abs(res.partial_sums[-1] - res.limit) <= 1e-10


def test_bracket_series_su2_converges():
    spec = GroupSpec("su2")
    f = BandLimitedFunction(spec, {((2,), 0, 1): 1.0, ((2,), 1, 1): 0.5})
    for _ in range(5):
        p = FiberPoint(spec.random_element(RNG), spec.random_algebra(RNG, radius=2.0))
        res = bracket_series(f, p, 40)
        assert abs(res.partial_sums[-1] - res.limit) <= 1e-8


def test_bracket_series_remainder_bound_matches_operator_norm():
    # |S_N - limit| <= max|entry coeff| * ||dpi(Y)||^{N+1}/(N+1)! roughly;
    # check the measured remainder sits under a generous multiple of it.
    spec = GroupSpec("su2")
    f = BandLimitedFunction(spec, {((2,), 0, 0): 1.0})
    Y = np.array([0.0, 0.0, 1.5])
    p = FiberPoint(spec.random_element(RNG), Y)
    res = bracket_series(f, p, 25)
    opnorm = math.sqrt(2.0) * 1.0 * np.linalg.norm(Y)  # spin-1 top eigenvalue
    for n in (5, 10, 15):
        bound = opnorm ** (n + 1) / math.factorial(n + 1) * math.exp(opnorm)
        assert res.errors[n] <= 10.0 * bound


def test_first_bracket_term_matches_fd_oracle():
    spec = GroupSpec("u1")
    f = BandLimitedFunction(spec, {((2,), 0, 0): 1.0, ((1,), 0, 0): -0.5j})
    p = FiberPoint(exp_group(spec, np.array([0.9])), np.array([0.7]))
    res = bracket_series(f, p, 3)
    term1 = res.partial_sums[1] - res.partial_sums[0]
    want = 0.5j * poisson_bracket_fd(f, p)
    assert abs(term1 - want) < 1e-6 * max(1.0, abs(want))

    su2 = GroupSpec("su2")
    g = BandLimitedFunction(su2, {((1,), 0, 0): 1.0})
    with pytest.raises(ValueError):
        poisson_bracket_fd(g, FiberPoint(su2.identity(), np.zeros(3)))


def test_factorial_decay_fit():
    spec = GroupSpec("u1")
    f = BandLimitedFunction(spec, {((2,), 0, 0): 1.0})
    p = FiberPoint(exp_group(spec, np.array([0.2])), np.array([1.5]))
    res = bracket_series(f, p, 30)
    fit = fit_factorial_decay(res)
    assert abs(fit["slope"] - 1.0) <= 0.1

    su2 = GroupSpec("su2")
    g = BandLimitedFunction(su2, {((2,), 0, 1): 1.0})
    q = FiberPoint(su2.random_element(RNG), su2.random_algebra(RNG, radius=2.0))
    res2 = bracket_series(g, q, 40)
    fit2 = fit_factorial_decay(res2)
    assert abs(fit2["slope"] - 1.0) <= 0.1


def test_polynomial_fiber_series_flat_analog():
    from sblab.flat import polynomial_fiber_series

    coeffs = [0.0, 0.0, 0.0, 1.0]  # q^3
    q, p_ = 0.7, -1.1
    sums = polynomial_fiber_series(coeffs, q, p_, 6)
    want = (q + 1j * p_) ** 3
    assert abs(sums[-1] - want) < 1e-14
    assert abs(sums[3] - want) < 1e-14  # series terminates at the degree
