import math

import numpy as np
import pytest

from sblab.flat import (
    FlatFunction,
    backward_heat_check,
    conventional_norm_sq,
    flat_constants,
    flat_pairing_adjoint,
    flat_pairing_forward,
    flat_unitarity_audit,
    gauss_moments,
    heat_evolve,
    hl2_norm_sq,
    hl2_weighted_inner,
    l2_inner,
    l2_norm_sq,
    pistarinv_check,
    to_conventional,
    vertical_gaussian_average,
)

RNG = np.random.default_rng(1001)


def brute_hl2(F, wq, wp, span=9.0, n=1600):
    q = np.linspace(-span, span, n)
    p = np.linspace(-span, span, n)
    dq = q[1] - q[0]
    Q, P = np.meshgrid(q, p, indexing="ij")
    Z = Q + 1j * P
    vals = np.abs(F(Z)) ** 2 * np.exp(-wq * Q**2 - wp * P**2)
    return float(np.sum(vals) * dq * dq)


def test_gauss_moments_against_quadrature():
    A, B = 1.3 + 0.2j, 0.4 - 0.7j
    q = np.linspace(-12, 12, 20001)
    dq = q[1] - q[0]
    for m in range(5):
        want = np.sum(q**m * np.exp(-A * q**2 / 2.0 + B * q)) * dq
        got = gauss_moments(m, A, B)[m]
        assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_l2_inner_matches_quadrature():
    f = FlatFunction([(1.0, 2, 1.0, 0.3j), (0.5j, 0, 0.5, 0.0)])
    g = FlatFunction([(2.0, 1, 0.7, -0.2)])
    q = np.linspace(-14, 14, 40001)
    dq = q[1] - q[0]
    want = np.sum(np.conj(f(q + 0j)) * g(q + 0j)) * dq
    got = l2_inner(f, g)
    assert abs(got - want) < 1e-9 * max(1.0, abs(want))


def test_heat_evolve_gaussian_variance_shift():
    # variance v Gaussian -> variance v + hbar, with mass preserved
    v, hbar = 0.8, 0.6
    f = FlatFunction.gaussian(rate=1.0 / v)
    g = heat_evolve(f, hbar)
    xs = np.linspace(-3, 3, 13)
    amp = math.sqrt(v / (v + hbar))
    for x in xs:
        want = amp * math.exp(-x * x / (2.0 * (v + hbar)))
        assert abs(g(complex(x)) - want) < 1e-13


def test_heat_evolve_against_numeric_convolution():
    f = FlatFunction([(1.0, 2, 1.0, 0.0), (0.3, 1, 1.0, 0.2)])  # poly x gaussian
    hbar = 0.5
    g = heat_evolve(f, hbar)
    q = np.linspace(-12, 12, 24001)
    dq = q[1] - q[0]
    for x in (-0.9, 0.0, 1.3):
        kern = np.exp(-((x - q) ** 2) / (2.0 * hbar)) / math.sqrt(2.0 * math.pi * hbar)
        want = np.sum(kern * f(q + 0j).real) * dq
        assert abs(g(complex(x)) - want) < 1e-10


def test_heat_semigroup_on_class():
    f = FlatFunction([(1.0, 3, 0.9, 0.1)])
    a = heat_evolve(heat_evolve(f, 0.3), 0.5)
    b = heat_evolve(f, 0.8)
    xs = np.linspace(-2, 2, 9)
    for x in xs:
        assert abs(a(complex(x)) - b(complex(x))) < 1e-12


def test_forward_linear_exact():
    hbar = 0.7
    f = FlatFunction([(1.0, 1, 1.0, 0.0)])
    g = FlatFunction([(0.5j, 0, 0.5, 0.1)])
    lhs = flat_pairing_forward(f + g, hbar)
    z = 0.4 + 0.8j
    want = flat_pairing_forward(f, hbar)(z) + flat_pairing_forward(g, hbar)(z)
    assert abs(lhs(z) - want) < 1e-13


def test_forward_matches_numeric_convolution_continued():
    hbar = 0.5
    f = FlatFunction.gaussian(rate=1.0)  # e^{-q^2/2}
    F = flat_pairing_forward(f, hbar)
    a, _ = flat_constants(hbar)
    q = np.linspace(-14, 14, 28001)
    dq = q[1] - q[0]
    for z in (0.3 + 0.7j, -1.1 + 0.2j, 0.5j):
        want = a * np.sum(np.exp(-((z - q) ** 2) / (2.0 * hbar)) * f(q + 0j)) * dq
        assert abs(F(z) - want) < 1e-10 * max(1.0, abs(want))


def test_adjoint_constant_and_moment():
    hbar = 0.9
    one = FlatFunction([(1.0, 0, 0.0, 0.0)])
    val = flat_pairing_adjoint(one, 0.0, hbar)
    assert abs(val - math.sqrt(2.0 * math.pi * hbar)) < 1e-12

    zfun = FlatFunction([(1.0, 1, 0.0, 0.0)])
    for q in (0.0, 1.2):
        got = flat_pairing_adjoint(zfun, q, hbar)
        assert abs(got - q * math.sqrt(2.0 * math.pi * hbar)) < 1e-12


def test_pistarinv_on_polynomials():
    hbar = 0.8
    for coeffs in ([1.0], [0.0, 1.0], [0.0, 0.0, 0.0, 2.0], [1.0, -0.5, 0.0, 0.0, 0.3, 0.0, 0.25]):
        assert pistarinv_check(coeffs, hbar) <= 1e-10


def test_vertical_average_closed_forms():
    # F = z^2 averages to q^2 - hbar
    F = FlatFunction([(1.0, 2, 0.0, 0.0)])
    for hbar in (0.3, 1.0):
        for q in (-1.0, 0.4):
            got = vertical_gaussian_average(F, q, hbar)
            assert abs(got - (q * q - hbar)) < 1e-12
    # F = e^{iz} averages to e^{hbar/2} e^{iq}
    G = FlatFunction([(1.0, 0, 0.0, 1.0j)])
    got = vertical_gaussian_average(G, 0.7, 0.4)
    want = math.exp(0.2) * np.exp(0.7j)
    assert abs(got - want) < 1e-12


def test_backward_heat_residuals():
    grid = [0.5 - 1e-3, 0.5, 0.5 + 1e-3]
    const = FlatFunction([(1.0, 0, 0.0, 0.0)])
    out = backward_heat_check(const, grid)
    assert out["residual"] <= 1e-10

    zsq = FlatFunction([(1.0, 2, 0.0, 0.0)])
    out = backward_heat_check(zsq, grid)
    assert out["residual"] <= 1e-8

    eiz = FlatFunction([(1.0, 0, 0.0, 1.0j)])
    out = backward_heat_check(eiz, grid)
    assert out["residual"] <= 1e-5
    assert out["limit_defect"] <= 1e-6


def test_hl2_weighted_inner_against_quadrature():
    hbar = 0.8
    F = flat_pairing_forward(FlatFunction([(1.0, 1, 1.0, 0.2j)]), hbar)
    got = hl2_norm_sq(F, hbar)
    want = brute_hl2(F, 0.0, 1.0 / hbar)
    assert abs(got - want) < 1e-7 * max(1.0, want)

    # conventional weight, on a function decaying fast enough for the grid
    G = FlatFunction([(1.0, 1, 0.3, 0.1j)])
    got2 = conventional_norm_sq(G, 0.6)
    want2 = brute_hl2(G, 1.0 / 1.2, 1.0 / 1.2)
    assert abs(got2 - want2) < 1e-7 * max(1.0, want2)


def test_divergent_pairs_raise():
    F = FlatFunction([(1.0, 0, 0.0, 0.0)])  # constant is not HL2-normalizable in q
    with pytest.raises(ValueError):
        hl2_norm_sq(F, 1.0)


def test_flat_unitarity_audit():
    hbar = 0.5
    test_set = [
        FlatFunction.gaussian(rate=1.0),
        FlatFunction.gaussian(rate=1.0, power=1),
        FlatFunction.gaussian(rate=1.0, power=2),
        FlatFunction.gaussian(rate=2.0, shift=0.4),
        FlatFunction.gaussian(rate=0.7, shift=-0.3j),
        FlatFunction([(1.0, 0, 1.0, 0.0), (0.5j, 1, 0.5, 0.2)]),
    ]
    audit = flat_unitarity_audit(test_set, hbar)
    _, b = flat_constants(hbar)
    for r in audit.ratios:
        assert abs(b * r - 1.0) <= 1e-6
    assert abs(audit.b_ratio - 1.0) <= 1e-6
    # homogeneity: scaling a test function leaves its ratio unchanged
    audit2 = flat_unitarity_audit([f.scaled(2.0) for f in test_set], hbar)
    assert abs(audit.ratios[0] - audit2.ratios[0]) < 1e-12


def test_constants_close():
    for hbar in (0.25, 1.0, 2.0):
        a, b = flat_constants(hbar)
        want = (math.pi * hbar) ** -0.25 * (2.0 * math.pi * hbar) ** -0.5
        assert abs(b * a - want) < 1e-14 * want


def test_conventional_dictionary_preserves_norm():
    hbar = 0.6
    F = flat_pairing_forward(FlatFunction.gaussian(rate=1.2, power=1), hbar)
    lhs = hl2_norm_sq(F, hbar)
    rhs = conventional_norm_sq(to_conventional(F, hbar), hbar)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, lhs)
