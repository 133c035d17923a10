"""Deterministic integration rules over the group and its algebra, plus seeded
Gaussian Monte Carlo streams.

Group rules are product rules: trapezoid in each circle angle, and for SU(2)
the Euler-angle rule u = Rz(phi) Ry(beta) Rz(psi) with phi in [0, 2pi),
psi in [0, 4pi), Gauss-Legendre in cos(beta).  The Haar density in these
coordinates is sin(beta) dphi dbeta dpsi / (16 pi^2) times the total mass.
Fiber rules are tensor Gauss-Hermite with the Gaussian weight folded into the
weights, so integrands are supplied weight-free.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import GroupElement, GroupSpec


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: np.ndarray
    order: int
    target: str  # "group" | "fiber"
    gaussian_scale: float | None = None
    spec: GroupSpec | None = None

    def __len__(self):
        return len(self.weights)


def _circle_nodes(order: int, span: float):
    step = span / order
    return np.arange(order) * step, np.full(order, step)


def _su2_euler_nodes(order: int):
    """Return (matrices, weights) covering SU(2) with total weight 2 pi^2."""
    phis, wphi = _circle_nodes(order, 2.0 * math.pi)
    psis, wpsi = _circle_nodes(order, 4.0 * math.pi)
    xs, wx = np.polynomial.legendre.leggauss(order)  # cos(beta) on [-1, 1]
    mats = []
    weights = []
    for (p, wp), (x, wxx), (q, wq) in itertools.product(
        zip(phis, wphi), zip(xs, wx), zip(psis, wpsi)
    ):
        beta = math.acos(x)
        cb, sb = math.cos(beta / 2.0), math.sin(beta / 2.0)
        ep, eq = np.exp(-0.5j * p), np.exp(-0.5j * q)
        rz1 = np.array([[ep, 0], [0, ep.conjugate()]])
        ry = np.array([[cb, -sb], [sb, cb]], dtype=complex)
        rz2 = np.array([[eq, 0], [0, eq.conjugate()]])
        mats.append(rz1 @ ry @ rz2)
        weights.append(wp * wxx * wq / 8.0)
    return mats, np.array(weights)


def group_rule(spec: GroupSpec, order: int) -> QuadratureRule:
    """Product rule over the compact group; total weight is the Haar mass."""
    if order < 2:
        raise ValueError("group rule needs order >= 2")
    if not spec.is_compact:
        raise ValueError("group rules exist only for compact specs")
    per_factor = []
    for f in spec.factors:
        if f.kind == "u1":
            angles, w = _circle_nodes(order, 2.0 * math.pi)
            per_factor.append(list(zip(angles, w)))
        else:
            mats, w = _su2_euler_nodes(order)
            per_factor.append(list(zip(mats, w)))
    nodes = []
    weights = []
    for combo in itertools.product(*per_factor):
        blocks = tuple(c[0] for c in combo)
        nodes.append(GroupElement(spec, blocks))
        weights.append(math.prod(c[1] for c in combo))
    return QuadratureRule(tuple(nodes), np.array(weights), order, "group", spec=spec)


def fiber_rule(spec: GroupSpec, scale: float, order: int) -> QuadratureRule:
    """Tensor Gauss-Hermite rule for weight exp(-|Y|^2/scale) on the algebra.

    Weights include the Gaussian; their sum is (pi*scale)^(n/2).
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if order < 4:
        raise ValueError("fiber rule needs order >= 4")
    t, w = np.polynomial.hermite.hermgauss(order)
    root = math.sqrt(scale)
    axes_nodes = root * t
    axes_weights = root * w
    n = spec.n
    grids = np.meshgrid(*([axes_nodes] * n), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([axes_weights] * n), indexing="ij")
    weights = np.ones_like(wgrids[0])
    for g in wgrids:
        weights = weights * g
    return QuadratureRule(
        nodes=nodes, weights=weights.ravel(), order=order, target="fiber",
        gaussian_scale=scale, spec=spec,
    )


def group_integrate(rule: QuadratureRule, fn) -> complex:
    """Sum of weights times fn(node) over a group rule."""
    return sum(w * fn(g) for g, w in zip(rule.nodes, rule.weights))


@dataclass
class MonteCarloStream:
    """Reproducible standard-normal vector source scaled per axis.

    The same seed always yields the same sample sequence; parallel use derives
    one stream per worker via seed XOR worker index.
    """

    seed: int
    dimension: int
    scale: float = 1.0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def draw(self, count: int) -> np.ndarray:
        return math.sqrt(self.scale) * self._gen.standard_normal((count, self.dimension))

    def derived(self, worker: int) -> "MonteCarloStream":
        return MonteCarloStream(self.seed ^ worker, self.dimension, self.scale)


def gaussian_stream(seed: int, dim: int, scale: float = 1.0) -> MonteCarloStream:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return MonteCarloStream(seed, dim, scale)
