"""Pairing maps between the position and holomorphic Hilbert spaces, their
norms, the unitarity-constant audit, and the inversion check.

The forward map is a_hbar times heat smoothing followed by holomorphic
reading of the coefficients, which is exact on band-limited functions.  All
fiber integrals are tensor Gauss-Hermite; the group integral inside a norm is
contracted exactly through matrix-entry orthogonality, which reduces every
2n-dimensional integral to an n-dimensional one.  Every quadrature-backed
operation re-evaluates at doubled order and polices the difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureUnderResolved
from .geometry import c_hbar, eta_batch, zeta_batch
from .groups import GroupSpec
from .quadrature import QuadratureRule, fiber_rule
from .representations import (
    BandLimitedFunction,
    HolomorphicFunction,
    analytic_continue,
    fiber_blocks,
    irrep_matrix,
    label_dim,
)

CONVERGENCE_TOL = 1e-6
CHUNK = 1 << 18


@dataclass(frozen=True)
class PairingConstants:
    """The printed forward/unitarity constants for a given group and hbar."""

    a: float
    b: float
    hbar: float


def pairing_constants(spec: GroupSpec, hbar: float) -> PairingConstants:
    n = spec.n
    a = (2.0 * math.pi * hbar) ** (n / 2.0) * math.exp(-spec.root_data.rho_norm_sq * hbar / 2.0)
    b = (4.0 * math.pi * hbar) ** (-n / 4.0)
    return PairingConstants(a, b, hbar)


@dataclass
class UnitarityAudit:
    """Per-function norm ratios of the scaled forward map, and the derived constant."""

    group: str
    hbar: float
    ratios: list
    b_printed: float

    @property
    def spread(self) -> float:
        m = np.mean(self.ratios)
        return float((np.max(self.ratios) - np.min(self.ratios)) / m)

    @property
    def b_derived(self) -> float:
        return float(1.0 / np.mean(self.ratios))

    @property
    def b_ratio(self) -> float:
        return self.b_derived / self.b_printed

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "hbar": self.hbar,
            "ratios": list(map(float, self.ratios)),
            "spread": self.spread,
            "b_derived": self.b_derived,
            "b_printed": self.b_printed,
            "b_ratio": self.b_ratio,
        }


def pairing_forward(f: BandLimitedFunction, hbar: float) -> HolomorphicFunction:
    """a_hbar times the heat-smoothed holomorphic continuation of f."""
    a = pairing_constants(f.spec, hbar).a
    return analytic_continue(f, hbar).scaled(a)


def _fiber_quadrature_data(spec: GroupSpec, labels, scale: float, order: int):
    """Rule nodes/weights plus per-label matrices pi(exp(iY)), chunk-friendly."""
    rule = fiber_rule(spec, scale, order)
    return rule


def _chunks(total: int, size: int = CHUNK):
    start = 0
    while start < total:
        yield slice(start, min(start + size, total))
        start += size


def hl2_norm_sq(
    F: HolomorphicFunction,
    hbar: float,
    measure: str = "nu",
    fiber_order: int = 24,
    check_convergence: bool = True,
) -> float:
    """Squared norm of F against the gamma or nu fiber measure.

    The group integral of |F(x e^{iY})|^2 is contracted exactly to
    vol(K) sum_labels ||C B(Y)^T||_F^2 / dim, leaving the fiber quadrature.
    """
    if measure not in ("gamma", "nu"):
        raise ValueError("measure must be 'gamma' or 'nu'")
    spec = F.spec
    vol = spec.volume
    labels = F.labels()
    mats = {lab: F.coefficient_matrix(lab) for lab in labels}
    prefactor = c_hbar(spec, hbar) if measure == "nu" else 1.0

    def run(order: int) -> float:
        rule = fiber_rule(spec, hbar, order)
        total = 0.0
        for sl in _chunks(len(rule.weights)):
            Y = rule.nodes[sl]
            w = rule.weights[sl] * eta_batch(spec, Y)
            contr = np.zeros(Y.shape[0])
            for lab in labels:
                B = fiber_blocks(spec, lab, Y)
                M = np.einsum("rc,nlc->nrl", mats[lab], B)
                contr += np.sum(np.abs(M) ** 2, axis=(1, 2)) / label_dim(spec, lab)
            total += float(np.sum(w * contr))
        return vol * prefactor * total

    base = run(fiber_order)
    if not check_convergence:
        return base
    refined = run(2 * fiber_order)
    if abs(base - refined) > CONVERGENCE_TOL * max(1.0, abs(refined)):
        raise QuadratureUnderResolved(
            f"hl2 norm moved by {abs(base - refined):.3e} when doubling order {fiber_order}"
        )
    return refined


def hl2_inner(
    F: HolomorphicFunction,
    G: HolomorphicFunction,
    hbar: float,
    measure: str = "nu",
    fiber_order: int = 24,
) -> complex:
    """<F, G> against the chosen fiber measure (antilinear in F)."""
    spec = F.spec
    vol = spec.volume
    labels = sorted(set(F.labels()) | set(G.labels()))
    prefactor = c_hbar(spec, hbar) if measure == "nu" else 1.0
    rule = fiber_rule(spec, hbar, fiber_order)
    total = 0.0 + 0.0j
    for sl in _chunks(len(rule.weights)):
        Y = rule.nodes[sl]
        w = rule.weights[sl] * eta_batch(spec, Y)
        acc = np.zeros(Y.shape[0], dtype=complex)
        for lab in labels:
            B = fiber_blocks(spec, lab, Y)
            MF = np.einsum("rc,nlc->nrl", F.coefficient_matrix(lab), B)
            MG = np.einsum("rc,nlc->nrl", G.coefficient_matrix(lab), B)
            acc += np.sum(np.conj(MF) * MG, axis=(1, 2)) / label_dim(spec, lab)
        total += complex(np.sum(w * acc))
    return vol * prefactor * total


def pairing_adjoint(
    F: HolomorphicFunction,
    x,
    hbar: float,
    rule: QuadratureRule | None = None,
    fiber_order: int = 24,
    check_convergence: bool = True,
) -> complex:
    """Fiber integral of F(x e^{iY}) e^{-|Y|^2/(2 hbar)} zeta(Y) at one base point."""
    spec = F.spec
    if rule is not None:
        if rule.gaussian_scale is None or abs(rule.gaussian_scale - 2.0 * hbar) > 1e-12:
            raise ValueError("adjoint rule must carry Gaussian scale 2*hbar")

    def run(r: QuadratureRule) -> complex:
        # pi(x e^{iY}) = pi(x) pi(e^{iY}), so each term needs one row of pi(x)
        # against one column of the fiber blocks.
        total = 0.0 + 0.0j
        for sl in _chunks(len(r.weights)):
            Y = r.nodes[sl]
            w = r.weights[sl] * zeta_batch(spec, Y)
            vals = np.zeros(Y.shape[0], dtype=complex)
            for (label, row, col), c in F.terms.items():
                B = fiber_blocks(spec, label, Y)
                prow = irrep_matrix(spec, label, x)[row, :]
                vals += c * np.einsum("l,nl->n", prow, B[:, :, col])
            total += complex(np.sum(w * vals))
        return total

    base_rule = rule if rule is not None else fiber_rule(spec, 2.0 * hbar, fiber_order)
    base = run(base_rule)
    if not check_convergence:
        return base
    refined = run(fiber_rule(spec, 2.0 * hbar, 2 * base_rule.order))
    if abs(base - refined) > CONVERGENCE_TOL * max(1.0, abs(refined)):
        raise QuadratureUnderResolved(
            f"adjoint moved by {abs(base - refined):.3e} when doubling order"
        )
    return refined


def pairing_adjoint_function(
    F: HolomorphicFunction, hbar: float, fiber_order: int = 24
) -> BandLimitedFunction:
    """The adjoint map applied to a band-limited F, returned exactly by label.

    With G_lab the fiber integral of pi(exp(iY)) against the adjoint weight,
    the result has coefficient matrices C_lab @ G_lab^T.
    """
    spec = F.spec
    rule = fiber_rule(spec, 2.0 * hbar, fiber_order)
    terms = {}
    for lab in F.labels():
        d = label_dim(spec, lab)
        G = np.zeros((d, d), dtype=complex)
        for sl in _chunks(len(rule.weights)):
            Y = rule.nodes[sl]
            w = rule.weights[sl] * zeta_batch(spec, Y)
            B = fiber_blocks(spec, lab, Y)
            G += np.einsum("n,nlc->lc", w, B)
        C_new = F.coefficient_matrix(lab) @ G.T
        for r in range(d):
            for c in range(d):
                if C_new[r, c] != 0:
                    terms[(lab, r, c)] = terms.get((lab, r, c), 0.0) + C_new[r, c]
    return BandLimitedFunction(spec, terms)


def pairing_sesquilinear(
    F: HolomorphicFunction,
    f: BandLimitedFunction,
    hbar: float,
    group_rule_: QuadratureRule,
    fiber_order: int = 24,
    check_convergence: bool = True,
) -> complex:
    """Double integral of conj(F(x e^{iY})) f(x) e^{-|Y|^2/(2 hbar)} zeta(Y).

    Honest 2n-dimensional quadrature; the independent cross-check of the
    contracted adjoint route.
    """
    from .representations import irrep_at_group_nodes

    spec = F.spec
    fx = np.array([f(g) for g in group_rule_.nodes])
    vf = group_rule_.weights * fx

    def run(order: int) -> complex:
        rule = fiber_rule(spec, 2.0 * hbar, order)
        total = 0.0 + 0.0j
        rows = {}
        for (label, row, col), c in F.terms.items():
            key = (label, row)
            if key not in rows:
                rows[key] = irrep_at_group_nodes(spec, label, group_rule_)[:, row, :]
        for sl in _chunks(len(rule.weights), 1 << 14):
            Y = rule.nodes[sl]
            wz = rule.weights[sl] * zeta_batch(spec, Y)
            Fvals = np.zeros((len(group_rule_.nodes), Y.shape[0]), dtype=complex)
            for (label, row, col), c in F.terms.items():
                B = fiber_blocks(spec, label, Y)
                Fvals += c * np.einsum("sl,nl->sn", rows[(label, row)], B[:, :, col])
            total += complex(np.conj(Fvals).T @ vf @ wz)
        return total

    base = run(fiber_order)
    if not check_convergence:
        return base
    refined = run(2 * fiber_order)
    if abs(base - refined) > CONVERGENCE_TOL * max(1.0, abs(refined)):
        raise QuadratureUnderResolved(
            f"sesquilinear pairing moved by {abs(base - refined):.3e} when doubling order"
        )
    return refined


def unitarity_audit(
    test_set, hbar: float, fiber_order: int = 24, check_convergence: bool = True
) -> UnitarityAudit:
    """Ratios ||forward(f)||_gamma / ||f||_L2 across a test set."""
    if not test_set:
        raise ValueError("need at least one test function")
    spec = test_set[0].spec
    ratios = []
    for i, f in enumerate(test_set):
        F = pairing_forward(f, hbar)
        num = math.sqrt(
            hl2_norm_sq(
                F, hbar, "gamma", fiber_order,
                check_convergence=check_convergence and i == 0,
            )
        )
        ratios.append(num / math.sqrt(f.norm_sq()))
    return UnitarityAudit(spec.name, hbar, ratios, pairing_constants(spec, hbar).b)


def inversion_check(
    f: BandLimitedFunction,
    hbar: float,
    fiber_order: int = 24,
    n_samples: int = 12,
    seed: int = 1234,
) -> dict:
    """Fit adjoint(forward(f)) = lambda * f on a sample grid.

    Returns the fitted constant, the relative residual, and the printed
    reference 1/b^2 alongside the ratio of the two.
    """
    spec = f.spec
    rng = np.random.default_rng(seed)
    F = pairing_forward(f, hbar)
    xs = [spec.random_element(rng) for _ in range(n_samples)]
    g_vals = np.array(
        [pairing_adjoint(F, x, hbar, fiber_order=fiber_order, check_convergence=False) for x in xs]
    )
    f_vals = np.array([f(x) for x in xs])
    lam = complex(np.vdot(f_vals, g_vals) / np.vdot(f_vals, f_vals))
    residual = float(
        np.linalg.norm(g_vals - lam * f_vals) / np.linalg.norm(f_vals)
    )
    b = pairing_constants(spec, hbar).b
    return {
        "constant": lam,
        "residual": residual,
        "b_inv_sq": 1.0 / b**2,
        "constant_over_b_inv_sq": abs(lam) * b**2,
    }
