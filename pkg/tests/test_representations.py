import math

import numpy as np
import pytest

from sblab.errors import TruncationInsufficient
from sblab.groups import GroupSpec, exp_group, phi
from sblab.quadrature import group_rule
from sblab.representations import (
    BandLimitedFunction,
    HolomorphicFunction,
    analytic_continue,
    casimir,
    fiber_blocks,
    heat_kernel,
    heat_operator,
    irrep_at_group_nodes,
    irrep_matrix,
    label_dim,
    labels_up_to,
    su2_irrep_block,
)

RNG = np.random.default_rng(7771)


def taylor_exp(M, terms=30):
    out = np.eye(M.shape[0], dtype=complex)
    term = np.eye(M.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ M / k
        out = out + term
    return out


# -- irrep matrices -------------------------------------------------------------

def test_trivial_rep_is_one():
    spec = GroupSpec("u1*su2")
    for _ in range(5):
        g = spec.random_element(RNG)
        M = irrep_matrix(spec, (0, 0), g)
        assert M.shape == (1, 1)
        assert abs(M[0, 0] - 1.0) < 1e-14


def test_circle_defining_character():
    spec = GroupSpec("u1")
    g = exp_group(spec, np.array([0.77]))
    assert abs(irrep_matrix(spec, (1,), g)[0, 0] - np.exp(0.77j)) < 1e-14


def test_spin_half_at_fiber_point_is_matrix_exponential():
    spec = GroupSpec("su2")
    from sblab.groups import SU2_BASIS

    for _ in range(20):
        Y = spec.random_algebra(RNG, radius=2.0)
        g = phi(spec, spec.identity(), Y)
        M = irrep_matrix(spec, (1,), g)
        Ymat = np.tensordot(Y, SU2_BASIS, axes=(0, 0))
        assert np.max(np.abs(M - taylor_exp(1j * Ymat))) < 1e-12


def test_irrep_is_homomorphism_and_unitary():
    spec = GroupSpec("su2")
    for twoJ in (1, 2, 3):
        g1 = spec.random_element(RNG)
        g2 = spec.random_element(RNG)
        A = irrep_matrix(spec, (twoJ,), g1 * g2)
        B = irrep_matrix(spec, (twoJ,), g1) @ irrep_matrix(spec, (twoJ,), g2)
        assert np.max(np.abs(A - B)) < 1e-12
        U = irrep_matrix(spec, (twoJ,), g1)
        assert np.max(np.abs(U.conj().T @ U - np.eye(twoJ + 1))) < 1e-12


def test_irrep_homomorphism_complexified():
    spec = GroupSpec("su2")
    for twoJ in (1, 2):
        x = spec.random_element(RNG)
        Y = spec.random_algebra(RNG, radius=1.5)
        g = phi(spec, x, Y)
        A = irrep_matrix(spec, (twoJ,), g)
        B = irrep_matrix(spec, (twoJ,), x) @ irrep_matrix(
            spec, (twoJ,), phi(spec, spec.identity(), Y)
        )
        assert np.max(np.abs(A - B)) < 1e-11


def test_su2_block_near_minus_identity():
    u = np.array([[-1.0, 0.0], [0.0, -1.0]], dtype=complex)
    assert np.max(np.abs(su2_irrep_block(1, u) + np.eye(2))) < 1e-12
    assert np.max(np.abs(su2_irrep_block(2, u) - np.eye(3))) < 1e-12


def test_label_validation():
    spec = GroupSpec("r1")
    with pytest.raises(ValueError):
        irrep_matrix(spec, (1,), spec.identity())


# -- casimir ---------------------------------------------------------------------

def finite_difference_casimir(spec, label, h=1e-4, rng=RNG):
    x = spec.random_element(rng)
    M0 = irrep_matrix(spec, label, x)
    acc = np.zeros_like(M0)
    for k in range(spec.n):
        V = np.zeros(spec.n)
        V[k] = h
        Mp = irrep_matrix(spec, label, x * exp_group(spec, V))
        Mm = irrep_matrix(spec, label, x * exp_group(spec, -V))
        acc = acc + (Mp - 2.0 * M0 + Mm) / h**2
    # acc ~ -lambda * M0 entrywise; least-squares projection
    num = np.sum(np.conj(M0) * acc)
    den = np.sum(np.abs(M0) ** 2)
    return float(-np.real(num / den))


def test_casimir_values():
    u1 = GroupSpec("u1")
    assert casimir(u1, (0,)) == 0.0
    assert casimir(u1, (3,)) == 9.0
    su2 = GroupSpec("su2")
    assert abs(casimir(su2, (1,)) - 1.5) < 1e-15
    assert abs(casimir(su2, (2,)) - 4.0) < 1e-15
    both = GroupSpec("u1*su2")
    assert abs(casimir(both, (2, 1)) - 5.5) < 1e-15


def test_casimir_matches_laplacian_oracle():
    for name, label in [("u1", (3,)), ("su2", (1,)), ("su2", (2,)), ("u1*su2", (1, 1))]:
        spec = GroupSpec(name)
        lam = casimir(spec, label)
        fd = finite_difference_casimir(spec, label)
        assert abs(fd - lam) <= 1e-5 * max(1.0, lam)


# -- band-limited functions -------------------------------------------------------

def random_band_limited(spec, band_limit, rng, n_terms=4):
    labels = [l for l in labels_up_to(spec, band_limit)]
    terms = {}
    for _ in range(n_terms):
        label = labels[rng.integers(len(labels))]
        d = label_dim(spec, label)
        row, col = rng.integers(d), rng.integers(d)
        terms[(label, int(row), int(col))] = complex(rng.standard_normal(), rng.standard_normal())
    return BandLimitedFunction(spec, terms)


def test_norm_sq_matches_quadrature():
    spec = GroupSpec("su2")
    f = random_band_limited(spec, 2, RNG)
    rule = group_rule(spec, 12)
    num = sum(w * abs(f(g)) ** 2 for g, w in zip(rule.nodes, rule.weights))
    assert abs(num - f.norm_sq()) < 1e-8 * max(1.0, f.norm_sq())


def test_heat_operator_basics():
    spec = GroupSpec("u1")
    const = BandLimitedFunction(spec, {((0,), 0, 0): 2.0})
    assert heat_operator(const, 1.3).terms == const.terms

    f = BandLimitedFunction(spec, {((2,), 0, 0): 1.0})
    g = heat_operator(f, 0.7)
    assert abs(g.terms[((2,), 0, 0)] - math.exp(-0.7 * 4.0 / 2.0)) < 1e-15

    mixed = random_band_limited(GroupSpec("u1*su2"), 2, RNG)
    small = heat_operator(mixed, 1e-8)
    delta = sum(abs(small.terms[k] - mixed.terms[k]) ** 2 for k in mixed.terms)
    assert math.sqrt(delta) <= 1e-6 * math.sqrt(sum(abs(v) ** 2 for v in mixed.terms.values()))


def test_heat_operator_semigroup_exact():
    spec = GroupSpec("u1*su2")
    f = random_band_limited(spec, 2, RNG)
    a = heat_operator(heat_operator(f, 0.3), 0.9)
    b = heat_operator(f, 1.2)
    for k in f.terms:
        assert abs(a.terms[k] - b.terms[k]) < 1e-15 * max(1.0, abs(b.terms[k]))


def test_heat_operator_circle_against_grid_heat_step():
    # evolve e^{ik theta} with an explicit finite-difference heat solver
    # (4th-order stencil in space, RK4 in time)
    spec = GroupSpec("u1")
    k = 2
    f = BandLimitedFunction(spec, {((k,), 0, 0): 1.0})
    hbar = 0.25
    n_grid, n_steps = 512, 4000
    theta = np.linspace(0.0, 2.0 * math.pi, n_grid, endpoint=False)
    u = np.exp(1j * k * theta)
    dt = (hbar / 2.0) / n_steps
    dx = theta[1] - theta[0]

    def lap(v):
        return (
            -np.roll(v, 2) + 16 * np.roll(v, 1) - 30 * v + 16 * np.roll(v, -1) - np.roll(v, -2)
        ) / (12.0 * dx**2)

    for _ in range(n_steps):
        k1 = lap(u)
        k2 = lap(u + 0.5 * dt * k1)
        k3 = lap(u + 0.5 * dt * k2)
        k4 = lap(u + dt * k3)
        u = u + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    g = heat_operator(f, hbar)
    want = g.terms[((k,), 0, 0)] * np.exp(1j * k * theta)
    assert np.max(np.abs(u - want)) < 1e-6


def test_analytic_continue_restricts_to_heat_operator():
    spec = GroupSpec("u1*su2")
    f = random_band_limited(spec, 2, RNG)
    F = analytic_continue(f, 0.8)
    g = heat_operator(f, 0.8)
    for _ in range(5):
        x = spec.random_element(RNG)
        assert abs(F.at_fiber(x, np.zeros(spec.n)) - g(x)) < 1e-12


def test_analytic_continue_circle_closed_form():
    spec = GroupSpec("u1")
    k, hbar = 3, 0.6
    f = BandLimitedFunction(spec, {((k,), 0, 0): 1.0})
    F = analytic_continue(f, hbar)
    theta, y = 0.4, -0.8
    x = exp_group(spec, np.array([theta]))
    want = math.exp(-hbar * k**2 / 2.0) * np.exp(1j * k * (theta + 1j * y))
    assert abs(F.at_fiber(x, np.array([y])) - want) < 1e-13


def test_holomorphy_cauchy_riemann():
    spec = GroupSpec("su2")
    f = random_band_limited(spec, 2, RNG)
    F = analytic_continue(f, 0.5)
    h = 1e-5
    for _ in range(5):
        x = spec.random_element(RNG)
        Y = spec.random_algebra(RNG, radius=1.0)
        V = spec.random_algebra(RNG, radius=1.0)
        base = phi(spec, x, Y)

        def val(z):
            from sblab.groups import exp_group_complex

            shift = exp_group_complex(spec, z * V.astype(complex))
            return F(base * shift)

        ds = (val(h) - val(-h)) / (2 * h)
        dt = (val(1j * h) - val(-1j * h)) / (2 * h)
        scale = max(1.0, abs(val(0.0)))
        assert abs(dt - 1j * ds) < 1e-6 * scale  # Cauchy-Riemann: d/dt = i d/ds


def test_serialization_round_trip():
    spec = GroupSpec("u1*su2")
    f = random_band_limited(spec, 2, RNG)
    g = BandLimitedFunction.from_json(f.to_json())
    assert g.spec == f.spec
    assert g.terms == f.terms


# -- heat kernel ------------------------------------------------------------------

def test_heat_kernel_normalizes_and_flattens():
    for name, order, band in [("u1", 64, 12), ("su2", 10, 12)]:
        spec = GroupSpec(name)
        rule = group_rule(spec, order)
        total = sum(w * heat_kernel(spec, g, 1.0, band) for g, w in zip(rule.nodes, rule.weights))
        assert abs(total - 1.0) < 1e-10

        flat = heat_kernel(spec, spec.random_element(RNG), 60.0, band)
        assert abs(flat - 1.0 / spec.volume) < 1e-12


def test_heat_kernel_circle_matches_wrapped_gaussian():
    from sblab.reduction import wrapped_gaussian_density

    spec = GroupSpec("u1")
    hbar = 1.0
    for theta in (0.0, 0.3, 2.2):
        x = exp_group(spec, np.array([theta]))
        got = heat_kernel(spec, x, hbar, 14)
        want = wrapped_gaussian_density(theta, hbar)
        assert abs(got - want) < 1e-10


def test_heat_kernel_truncation_guard():
    spec = GroupSpec("u1")
    with pytest.raises(TruncationInsufficient):
        heat_kernel(spec, spec.identity(), 0.05, 3)


def test_convolution_identity_circle():
    spec = GroupSpec("u1")
    hbar = 1.0
    f = BandLimitedFunction(spec, {((1,), 0, 0): 1.0, ((3,), 0, 0): 0.5 - 0.25j})
    g = heat_operator(f, hbar)
    rule = group_rule(spec, 256)
    for _ in range(4):
        x = spec.random_element(RNG)
        conv = sum(
            w * heat_kernel(spec, x * y.inverse(), hbar, 14) * f(y)
            for y, w in zip(rule.nodes, rule.weights)
        )
        assert abs(conv - g(x)) < 1e-6


def test_convolution_identity_su2():
    spec = GroupSpec("su2")
    hbar = 1.5
    f = BandLimitedFunction(spec, {((1,), 0, 1): 1.0, ((2,), 2, 0): 0.7j})
    g = heat_operator(f, hbar)
    rule = group_rule(spec, 12)
    x = spec.random_element(RNG)
    conv = sum(
        w * heat_kernel(spec, x * y.inverse(), hbar, 10) * f(y)
        for y, w in zip(rule.nodes, rule.weights)
    )
    assert abs(conv - g(x)) < 1e-6


# -- batched evaluators -------------------------------------------------------------

def test_irrep_at_group_nodes_matches_scalar():
    spec = GroupSpec("u1*su2")
    rule = group_rule(spec, 4)
    label = (2, 2)
    batch = irrep_at_group_nodes(spec, label, rule)
    for i in (0, 7, 19):
        M = irrep_matrix(spec, label, rule.nodes[i])
        assert np.max(np.abs(batch[i] - M)) < 1e-12


def test_fiber_blocks_match_scalar():
    spec = GroupSpec("u1*su2")
    Ys = np.stack([spec.random_algebra(RNG, radius=2.0) for _ in range(6)])
    label = (1, 2)
    batch = fiber_blocks(spec, label, Ys)
    for i in range(6):
        g = phi(spec, spec.identity(), Ys[i])
        M = irrep_matrix(spec, label, g)
        assert np.max(np.abs(batch[i] - M)) < 1e-11
