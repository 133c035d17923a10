"""Geodesic flow on the phase space, its imaginary-time continuation, and the
nested-bracket fiber series.

On the trivialized phase space the flow is (x, Y) -> (x e^{tY}, Y).  For a
matrix-entry function f the n-fold bracket with the kinetic potential reduces
to 2^n times the n-th t-derivative of f(x e^{tY}) at 0, i.e. the entry of
pi(x) dpi(Y)^n, so the series partial sums are truncations of
pi(x) exp(i dpi(Y)) and converge factorially to the holomorphic continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FiberPoint, kahler_potential
from .groups import GroupSpec, SQRT2, exp_group, phi
from .representations import (
    BandLimitedFunction,
    HolomorphicFunction,
    angular_momentum,
    irrep_matrix,
    label_dim,
)


@dataclass
class FlowSeriesResult:
    partial_sums: list
    limit: complex
    terms_used: int

    @property
    def errors(self) -> np.ndarray:
        return np.abs(np.array(self.partial_sums) - self.limit)


def geodesic_flow(spec: GroupSpec, p: FiberPoint, t: float) -> FiberPoint:
    """(x, Y) -> (x e^{tY}, Y); the fiber coordinate is conserved exactly."""
    return FiberPoint(p.x * exp_group(spec, t * np.asarray(p.Y)), np.asarray(p.Y))


def imaginary_time_continuation(f: BandLimitedFunction, p: FiberPoint) -> complex:
    """f evaluated with complexified matrices at the image of the polar chart."""
    F = HolomorphicFunction(f.spec, f.terms)
    return F(phi(f.spec, p.x, p.Y))


def _dpi(spec: GroupSpec, label: tuple, Y: np.ndarray) -> np.ndarray:
    """Generator image dpi(Y): the derivative of t -> pi(exp(tY)) at 0."""
    out = None
    for f, ell in zip(spec.factors, label):
        if f.kind == "u1":
            block = np.array([[1j * ell * Y[f.offset]]], dtype=complex)
        elif f.kind == "su2":
            J1, J2, J3 = angular_momentum(ell)
            y = Y[f.sl]
            block = 1j * SQRT2 * (y[0] * J1 + y[1] * J2 + y[2] * J3)
        else:
            raise ValueError("band-limited machinery requires compact factors")
        if out is None:
            out = block
        else:
            da, db = out.shape[0], block.shape[0]
            out = np.kron(out, np.eye(db)) + np.kron(np.eye(da), block)
    return out


def bracket_series(f: BandLimitedFunction, p: FiberPoint, n_max: int) -> FlowSeriesResult:
    """Partial sums of the nested-bracket series at p, with the true limit.

    The n-th term is (i^n/n!) times the entry of pi(x) dpi(Y)^n, summed over
    the terms of f.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    spec = f.spec
    Y = np.asarray(p.Y, dtype=float)
    partial = np.zeros(n_max + 1, dtype=complex)
    for label in f.labels():
        C = f.coefficient_matrix(label)
        P = irrep_matrix(spec, label, p.x)
        D = _dpi(spec, label, Y)
        term_mat = P.copy()
        contrib = np.sum(C * term_mat)  # n = 0
        partial[0] += contrib
        coeff = 1.0 + 0.0j
        for n in range(1, n_max + 1):
            term_mat = term_mat @ D
            coeff *= 1j / n
            partial[n] += np.sum(C * (coeff * term_mat))
    sums = np.cumsum(partial)
    limit = imaginary_time_continuation(f, p)
    return FlowSeriesResult([complex(s) for s in sums], complex(limit), n_max)


def fit_factorial_decay(result: FlowSeriesResult, floor: float = 1e-13) -> dict:
    """Fit log r_N = logC + N logR - s log N! over the pre-roundoff window.

    Factorial decay of the remainders means s close to one; the N logR term
    absorbs the geometric factor of the remainder C R^N / N!.
    """
    errs = result.errors
    scale = max(abs(result.limit), 1.0)
    ns, logs = [], []
    for n in range(1, len(errs)):
        if errs[n] > floor * scale:
            ns.append(n)
            logs.append(math.log(errs[n]))
    if len(ns) < 4:
        raise ValueError("not enough resolvable remainders to fit")
    ns = np.array(ns, dtype=float)
    logs = np.array(logs)
    lognfact = np.array([math.lgamma(n + 1.0) for n in ns])
    A = np.stack([np.ones_like(ns), ns, -lognfact], axis=1)
    coeffs, *_ = np.linalg.lstsq(A, logs, rcond=None)
    return {"logC": float(coeffs[0]), "logR": float(coeffs[1]), "slope": float(coeffs[2]),
            "points": len(ns)}


def poisson_bracket_fd(f: BandLimitedFunction, p: FiberPoint, h: float = 1e-5) -> complex:
    """{f o projection, |Y|^2} by central differences in canonical coordinates.

    Only valid on abelian specs, where (angles, fiber coordinates) are global
    Darboux coordinates.
    """
    spec = f.spec
    if any(fac.kind == "su2" for fac in spec.factors):
        raise ValueError("finite-difference bracket oracle is abelian-only")
    Y = np.asarray(p.Y, dtype=float)
    total = 0.0 + 0.0j
    for k in range(spec.n):
        V = np.zeros(spec.n)
        V[k] = h
        df = (f(p.x * exp_group(spec, V)) - f(p.x * exp_group(spec, -V))) / (2.0 * h)
        dk_dy = 2.0 * Y[k]
        total += df * dk_dy
    return total


def flow_energy(p: FiberPoint) -> float:
    return kahler_potential(p.Y)
