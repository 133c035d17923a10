"""Desk-scale lattice realization of the gauge-theory reduction picture:
connections over the circle, based gauge transformations, holonomy, the
finite-dimensional Gaussian-kernel transform, and the regularized-measure
limit checks.

A lattice connection stores the subinterval averages A_1..A_N of a
loop-algebra-valued map on [0,1].  The discretized L^2([0,1]) inner product is
<A, B> = (1/N) sum_j A_j . B_j, so x_j = A_j / sqrt(N) are orthonormal
coordinates; Gaussian measures and the kernel transform below act in those
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LogBranchViolation
from .groups import (
    GroupElement,
    GroupSpec,
    exp_group,
    exp_group_complex,
    log_group,
)
from .quadrature import MonteCarloStream


def wrapped_gaussian_density(theta: float, var: float) -> float:
    """Density at theta of a centered Gaussian with variance var wrapped to [0, 2pi).

    Uses the spatial image sum for small variance and the Fourier sum for
    large variance; both are theta-function forms of the same density.
    """
    if var <= 0:
        raise ValueError("variance must be positive")
    if var < 4.0:
        ms = np.arange(-40, 41)
        return float(
            np.sum(np.exp(-((theta + 2.0 * math.pi * ms) ** 2) / (2.0 * var)))
            / math.sqrt(2.0 * math.pi * var)
        )
    ks = np.arange(1, 80)
    return float(
        (1.0 + 2.0 * np.sum(np.exp(-(ks**2) * var / 2.0) * np.cos(ks * theta)))
        / (2.0 * math.pi)
    )


# -- lattice connections and gauge transformations --------------------------------

@dataclass
class LatticeConnection:
    """N algebra values (real) or complexified values (complex dtype)."""

    spec: GroupSpec
    values: np.ndarray  # shape (N, n)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values))
        if self.values.ndim != 2 or self.values.shape[1] != self.spec.n:
            raise ValueError("values must have shape (N, n)")
        if self.values.shape[0] < 1:
            raise ValueError("need at least one link")

    @property
    def n_links(self) -> int:
        return self.values.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


@dataclass
class GaugeTransform:
    """Based loop on the lattice: N+1 group elements with l_0 = l_N = identity."""

    spec: GroupSpec
    elements: tuple

    def __post_init__(self):
        from .groups import distance

        e = self.spec.identity()
        if distance(self.elements[0], e) != 0.0 or distance(self.elements[-1], e) != 0.0:
            raise ValueError("gauge transform must be based: l_0 = l_N = identity")


@dataclass(frozen=True)
class RegularizedParams:
    """Regularization data: s > hbar/2 and r = 2(s - hbar/2)."""

    s: float
    hbar: float

    def __post_init__(self):
        if self.s <= self.hbar / 2.0:
            raise ValueError("need s > hbar/2")

    @property
    def r(self) -> float:
        return 2.0 * (self.s - self.hbar / 2.0)


def holonomy(conn: LatticeConnection) -> GroupElement:
    """Ordered product exp(A_1/N) exp(A_2/N) ... exp(A_N/N), left to right."""
    if conn.is_complex:
        raise ValueError("use complex_holonomy for complexified connections")
    N = conn.n_links
    g = conn.spec.identity()
    for j in range(N):
        g = g * exp_group(conn.spec, conn.values[j] / N)
    return g


def complex_holonomy(conn: LatticeConnection):
    """Same ordered product with complexified exponentials."""
    N = conn.n_links
    g = conn.spec.identity().as_complex()
    for j in range(N):
        g = g * exp_group_complex(conn.spec, conn.values[j].astype(complex) / N)
    return g


def gauge_action(l: GaugeTransform, conn: LatticeConnection) -> LatticeConnection:
    """Link transcription of the gauge action.

    The link u_j = exp(A_j/N) conjugates to l_{j-1} u_j l_j^{-1}; the new
    connection is N times the principal log of the new link.
    """
    if conn.is_complex:
        raise ValueError("gauge action acts on real connections")
    N = conn.n_links
    if len(l.elements) != N + 1:
        raise ValueError("gauge transform must have N+1 sites")
    out = np.zeros_like(conn.values)
    for j in range(N):
        u = exp_group(conn.spec, conn.values[j] / N)
        u_new = l.elements[j] * u * l.elements[j + 1].inverse()
        try:
            out[j] = N * log_group(conn.spec, u_new)
        except LogBranchViolation:
            raise
    return LatticeConnection(conn.spec, out)


# -- coordinates for the Gaussian-kernel transform ---------------------------------

def connection_to_coords(conn: LatticeConnection) -> np.ndarray:
    """Orthonormal coordinates x = values / sqrt(N), flattened to length n*N."""
    return (conn.values / math.sqrt(conn.n_links)).ravel()

def coords_to_connection(spec: GroupSpec, x: np.ndarray, n_links: int) -> LatticeConnection:
    vals = np.asarray(x).reshape(n_links, spec.n) * math.sqrt(n_links)
    return LatticeConnection(spec, vals)


def finite_sb_transform(func, z: np.ndarray, hbar: float, order: int = 24):
    """(2 pi hbar)^{-d/2} integral of exp(-(z-x)^2/(2 hbar)) func(x) over R^d.

    Gauss-Hermite in every coordinate, centered at Re(z); func must accept a
    stack of real vectors of shape (M, d).
    """
    from .errors import QuadratureUnderResolved

    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = z.size

    def run(m):
        t, w = np.polynomial.hermite.hermgauss(m)
        root = math.sqrt(2.0 * hbar)
        grids = np.meshgrid(*([root * t] * d), indexing="ij")
        X = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*([root * w] * d), indexing="ij")
        W = np.ones_like(wgrids[0])
        for g in wgrids:
            W = W * g
        W = W.ravel()
        q, p = z.real, z.imag
        phase = np.exp(1j * (X @ p) / hbar)
        vals = func(X + q)
        amp = math.exp(float(p @ p) / (2.0 * hbar))
        return amp * np.sum(W * phase * vals) * (2.0 * math.pi * hbar) ** (-d / 2.0)

    a, b = run(order), run(2 * order)
    if abs(a - b) > 1e-6 * max(1.0, abs(b)):
        raise QuadratureUnderResolved(f"doubling moved result by {abs(a - b):.3e}")
    return b


def holonomy_batch(spec: GroupSpec, A: np.ndarray) -> dict:
    """Per-factor holonomy blocks for a stack of connections A of shape (M, N, n).

    Returns {factor index: blocks}, with angle sums for abelian factors and
    (M, 2, 2) matrix products for su2 factors.
    """
    from .groups import SU2_BASIS

    M, N, _ = A.shape
    out = {}
    for fi, f in enumerate(spec.factors):
        if f.kind != "su2":
            out[fi] = A[:, :, f.offset].sum(axis=1) / N
            continue
        coords = A[:, :, f.sl] / N  # (M, N, 3)
        mats = np.tensordot(coords, SU2_BASIS, axes=(2, 0))  # (M, N, 2, 2)
        musq = -np.sum(coords**2, axis=2) / 2.0
        mu = np.sqrt(musq.astype(complex))
        small = np.abs(mu) < 1e-6
        mus = np.where(small, 1.0, mu)
        c = np.where(small, 1.0 + musq / 2.0 + musq**2 / 24.0, np.cosh(mus))
        s = np.where(small, 1.0 + musq / 6.0 + musq**2 / 120.0, np.sinh(mus) / mus)
        eye = np.eye(2, dtype=complex)
        links = c[..., None, None] * eye + s[..., None, None] * mats
        prod = links[:, 0]
        for j in range(1, N):
            prod = prod @ links[:, j]
        out[fi] = prod
    return out


def reduced_transform_check(
    phi_fn,
    n_links: int,
    s: float,
    hbar: float,
    n_points: int = 4,
    seed: int = 11,
    mode: str = "auto",
    n_samples: int = 1_000_000,
    quad_order: int = 24,
) -> dict:
    """Compare the lattice Gaussian-kernel transform of phi_fn(holonomy) with
    the heat-smoothed continuation of phi_fn at the complex holonomy.

    phi_fn is a BandLimitedFunction on the structure group.  Sample points Z
    have real parts drawn with variance s per orthonormal coordinate and
    imaginary parts with variance hbar/4 (kept moderate so the Monte Carlo
    amplitude factor stays tame).  Circle groups run deterministically; su2
    runs Monte Carlo with standard errors.
    """
    from .representations import analytic_continue

    params = RegularizedParams(s, hbar)
    spec = phi_fn.spec
    if not (all(f.kind == "u1" for f in spec.factors) or len(spec.factors) == 1):
        raise ValueError("reduction checks support circle products or a single factor")
    if mode == "auto":
        mode = "quad" if all(f.kind == "u1" for f in spec.factors) else "mc"
    d = spec.n * n_links
    rng = np.random.default_rng(seed)
    F = analytic_continue(phi_fn, hbar)

    def phi_of_coords(x_stack):
        # x_stack: (M, d) orthonormal coordinates -> phi(holonomy)
        A = x_stack.reshape(-1, n_links, spec.n) * math.sqrt(n_links)
        blocks = holonomy_batch(spec, A)
        vals = np.zeros(x_stack.shape[0], dtype=complex)
        from .representations import su2_irrep_unitary_batch

        cache = {}
        for (label, row, col), c in phi_fn.terms.items():
            entry = np.ones(x_stack.shape[0], dtype=complex)
            for fi, (f, ell) in enumerate(zip(spec.factors, label)):
                if f.kind == "u1":
                    entry = entry * np.exp(1j * ell * blocks[fi])
                else:
                    key = (fi, ell)
                    if key not in cache:
                        cache[key] = su2_irrep_unitary_batch(ell, blocks[fi])
                    # product labels with one su2 factor: take the entry
                    entry = entry * cache[key][:, row, col]
            vals += c * entry
        return vals

    rows = []
    for _ in range(n_points):
        x_re = rng.normal(0.0, math.sqrt(s), size=d)
        x_im = rng.normal(0.0, math.sqrt(hbar / 4.0), size=d)
        z = x_re + 1j * x_im
        conn = coords_to_connection(spec, z, n_links)
        reference = F(complex_holonomy(conn))
        if mode == "quad":
            est = finite_sb_transform(phi_of_coords, z, hbar, order=quad_order)
            stderr = 0.0
        else:
            stream = MonteCarloStream(seed ^ 0x5BD1E995, d)
            est, stderr = finite_sb_transform_mc(phi_of_coords, z, hbar, n_samples, stream)
        err = abs(est - reference)
        rows.append(
            {
                "estimate": complex(est),
                "reference": complex(reference),
                "abs_err": err,
                "rel_err": err / max(1e-30, abs(reference)),
                "stderr": stderr,
                "z_score": err / stderr if stderr > 0 else 0.0,
                "rel_stderr": stderr / max(1e-30, abs(reference)),
            }
        )
    return {
        "mode": mode,
        "n_links": n_links,
        "s": params.s,
        "hbar": params.hbar,
        "points": rows,
        "max_rel_err": max(r["rel_err"] for r in rows),
        "max_z_score": max(r["z_score"] for r in rows),
    }


def measure_limit_check(s_list, hbar: float, n_grid: int = 720) -> dict:
    """Circle-group distances of the regularized push-forward laws to their
    limits, as the regularization is removed.

    The complexified law has angular part a wrapped Gaussian of variance
    r/2 = s - hbar/2 and fiber part the Gaussian of variance hbar/2; the limit
    density is uniform-angle times the same fiber Gaussian.  The position law
    is a wrapped Gaussian of variance s; its limit is the uniform density.
    """
    s_list = [float(s) for s in s_list]
    for s in s_list:
        RegularizedParams(s, hbar)
    thetas = np.linspace(0.0, 2.0 * math.pi, n_grid, endpoint=False)
    gauss_peak = (math.pi * hbar) ** -0.5  # fiber Gaussian maximum over y
    uniform = 1.0 / (2.0 * math.pi)
    mu_dist, rho_dist = [], []
    for s in s_list:
        r_half = s - hbar / 2.0
        ang = np.array([wrapped_gaussian_density(t, r_half) for t in thetas])
        mu_dist.append(float(np.max(np.abs(ang - uniform)) * gauss_peak))
        pos = np.array([wrapped_gaussian_density(t, s) for t in thetas])
        rho_dist.append(float(np.max(np.abs(pos - uniform))))
    # the fiber marginal of the complexified law is the Gaussian of variance
    # hbar/2 for every s; compare it against the limit fiber density computed
    # by the measure module
    from .geometry import FiberPoint, nu_density

    u1 = GroupSpec("u1")
    ys = np.linspace(-3.0, 3.0, 41)
    marginal = np.exp(-(ys**2) / (2.0 * (hbar / 2.0))) / math.sqrt(2.0 * math.pi * (hbar / 2.0))
    limit_fiber = np.array(
        [nu_density(u1, FiberPoint(u1.identity(), np.array([y])), hbar) for y in ys]
    )
    marginal_gap = float(np.max(np.abs(marginal - limit_fiber)))
    return {
        "s_list": s_list,
        "mu_distances": mu_dist,
        "rho_distances": rho_dist,
        "mu_monotone": all(a > b for a, b in zip(mu_dist, mu_dist[1:])),
        "rho_monotone": all(a > b for a, b in zip(rho_dist, rho_dist[1:])),
        "marginal_gap": marginal_gap,
    }


def su2_character_exp_gaussian_mean(twoJ: int, tau: float) -> float:
    """E[chi_j(exp xi)] for xi Gaussian with variance tau per coordinate.

    The eigenangle of exp(xi) is sqrt(2)|xi|/... each weight m contributes
    E[cos(m sqrt(2)|xi|)] = (1 - 2 m^2 tau) exp(-m^2 tau) for a 3-d Gaussian.
    """
    j2 = twoJ
    total = 0.0
    for m2 in range(-j2, j2 + 1, 2):  # 2m runs over -twoJ..twoJ step 2
        m = m2 / 2.0
        total += (1.0 - 2.0 * m * m * tau) * math.exp(-m * m * tau)
    return total


def su2_lattice_character_mean(twoJ: int, n_links: int, s: float) -> float:
    """Exact lattice expectation of chi_j(holonomy) under the position law."""
    tau = s / n_links
    c = su2_character_exp_gaussian_mean(twoJ, tau) / (twoJ + 1.0)
    return (twoJ + 1.0) * c**n_links


def holonomy_norm_check(
    phi_fn,
    n_links: int,
    s: float,
    mode: str = "auto",
    n_samples: int = 500_000,
    seed: int = 17,
) -> dict:
    """Check that the lattice norm of phi(holonomy) matches the push-forward law.

    Circle: both sides in closed form (unwrapped Gauss-Hermite vs wrapped
    density), deterministic.  su2 (phi must be a character combination): Monte
    Carlo against the heat-kernel-law value at time s, with the exact
    finite-lattice expectation reported alongside.
    """
    spec = phi_fn.spec
    if mode == "auto":
        mode = "quad" if all(f.kind == "u1" for f in spec.factors) else "mc"
    if mode == "quad":
        # LHS: integrate |phi(exp(u))|^2 against the unwrapped N(0, s) law
        t, w = np.polynomial.hermite.hermgauss(160)
        u = math.sqrt(2.0 * s) * t
        from .groups import exp_group

        vals = np.array([abs(phi_fn(exp_group(spec, np.array([uk])))) ** 2 for uk in u])
        lhs = float(np.sum(w * vals) / math.sqrt(math.pi))
        # RHS: wrapped density against the group quadrature
        thetas = np.linspace(0.0, 2.0 * math.pi, 2048, endpoint=False)
        dens = np.array([wrapped_gaussian_density(tk, s) for tk in thetas])
        fv = np.array([abs(phi_fn(exp_group(spec, np.array([tk])))) ** 2 for tk in thetas])
        rhs = float(np.sum(dens * fv) * (thetas[1] - thetas[0]))
        return {"mode": mode, "lhs": lhs, "rhs": rhs, "abs_err": abs(lhs - rhs), "stderr": 0.0}
    # su2 Monte Carlo; phi must be a single character chi_j for the closed forms
    if spec.name != "su2":
        raise ValueError("Monte Carlo norm check supports the su2 group")
    labels = phi_fn.labels()
    if len(labels) != 1:
        raise ValueError("su2 norm check expects a single-label character")
    twoJ = labels[0][0]
    rng = MonteCarloStream(seed, spec.n * n_links, 1.0)
    A = rng.draw(n_samples).reshape(n_samples, n_links, spec.n) * math.sqrt(n_links * s)
    blocks = holonomy_batch(spec, A)
    chi = np.real(np.trace(
        _su2_character_stack(twoJ, blocks[0]), axis1=-2, axis2=-1
    ))
    vals = np.abs(chi) ** 2
    lhs = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(n_samples))
    # |chi_j|^2 decomposes over integer spins 0..twoJ; under the heat-kernel
    # law each character averages to dim * exp(-s * casimir / 2)
    rhs_continuum = sum(
        (2 * l + 1) * math.exp(-s * l * (l + 1)) for l in range(0, twoJ + 1)
    )
    rhs_lattice = sum(
        su2_lattice_character_mean(2 * l, n_links, s) for l in range(0, twoJ + 1)
    )
    return {
        "mode": mode,
        "lhs": lhs,
        "rhs": rhs_continuum,
        "rhs_lattice": rhs_lattice,
        "abs_err": abs(lhs - rhs_continuum),
        "stderr": stderr,
        "z_score_continuum": abs(lhs - rhs_continuum) / stderr,
        "z_score_lattice": abs(lhs - rhs_lattice) / stderr,
    }


def _su2_character_stack(twoJ: int, mats: np.ndarray) -> np.ndarray:
    from .representations import su2_irrep_unitary_batch

    return su2_irrep_unitary_batch(twoJ, mats)


def finite_sb_transform_mc(
    func, z: np.ndarray, hbar: float, n_samples: int, stream: MonteCarloStream,
    chunk: int = 200_000,
):
    """Monte Carlo estimate of the same transform, with standard error.

    Importance-samples x ~ N(Re z, hbar I); the estimator averages
    exp(|p|^2/(2 hbar)) exp(i p.(x - q)/hbar) func(x).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    q, p = z.real, z.imag
    amp = math.exp(float(p @ p) / (2.0 * hbar))
    total = 0.0 + 0.0j
    total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        xi = stream.draw(m)
        x = q + math.sqrt(hbar) * xi
        vals = amp * np.exp(1j * (x - q) @ p / hbar) * func(x)
        total += np.sum(vals)
        total_sq += float(np.sum(np.abs(vals) ** 2))
        done += m
    mean = total / n_samples
    var = total_sq / n_samples - abs(mean) ** 2
    stderr = math.sqrt(max(var, 0.0) / n_samples)
    return mean, stderr
