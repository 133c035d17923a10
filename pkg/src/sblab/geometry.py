"""Kahler potential, half-form densities, and the fiber measures.

The half-form density eta(Y) is the product of sinh(a)/a over the positive
root values a = alpha(Y'), and zeta(Y) the product of sinh(a/2)/(a/2).  An
independent route to zeta^2 evaluates det[sin(adY)/adY + i(cos(adY)-1)/adY]
on the spectrum of ad(Y); on an eigenvalue i*w of ad(Y) the scalar value is
(e^w - 1)/w, and the +/-w pairing collapses the determinant to the square of
the root product.  The cross-check of the two routes is one of the acceptance
gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .groups import (
    GroupElement,
    GroupSpec,
    ad_matrix,
    phi_pushforward,
    root_values,
    root_values_batch,
)


class FiberPoint(NamedTuple):
    x: GroupElement
    Y: np.ndarray


@dataclass
class DensityReport:
    point_id: int
    gamma: float
    nu: float
    ratio: float
    c_theoretical: float

    @property
    def rel_err(self) -> float:
        return abs(self.ratio - self.c_theoretical) / self.c_theoretical

    def csv_row(self):
        return [self.point_id, self.gamma, self.nu, self.ratio, self.c_theoretical, self.rel_err]


def kahler_potential(Y: np.ndarray) -> float:
    """|Y|^2 in the fixed orthonormal coordinates."""
    Y = np.asarray(Y, dtype=float)
    return float(Y @ Y)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    series = 1.0 + x**2 / 6.0 + x**4 / 120.0 + x**6 / 5040.0
    return np.where(small, series, np.sinh(xs) / xs)


def eta(spec: GroupSpec, Y: np.ndarray) -> float:
    """Half-form correction: product of sinh(a)/a over positive root values."""
    vals = root_values(spec, Y)
    return float(np.prod(_sinhc(vals))) if vals.size else 1.0


def eta_batch(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    vals = root_values_batch(spec, Y)
    if vals.shape[-1] == 0:
        return np.ones(Y.shape[:-1])
    return np.prod(_sinhc(vals), axis=-1)


def zeta(spec: GroupSpec, Y: np.ndarray) -> float:
    """Pairing density: product of sinh(a/2)/(a/2) over positive root values."""
    vals = root_values(spec, Y)
    return float(np.prod(_sinhc(vals / 2.0))) if vals.size else 1.0


def zeta_batch(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    vals = root_values_batch(spec, Y)
    if vals.shape[-1] == 0:
        return np.ones(Y.shape[:-1])
    return np.prod(_sinhc(vals / 2.0), axis=-1)


def _expm1_over(w: np.ndarray) -> np.ndarray:
    """(e^w - 1)/w, stable at 0."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 1.0, w)
    series = 1.0 + w / 2.0 + w**2 / 6.0 + w**3 / 24.0 + w**4 / 120.0
    return np.where(small, series, np.expm1(ws) / ws)


def zeta_sq_determinant(spec: GroupSpec, Y: np.ndarray) -> float:
    """det[sin(adY)/adY + i(cos(adY)-1)/adY], evaluated on the ad spectrum."""
    A = ad_matrix(spec, Y)
    w = np.linalg.eigvalsh(-1j * A)  # ad(Y) eigenvalue is i*w
    return float(np.prod(_expm1_over(w)))


def gamma_density(spec: GroupSpec, p: FiberPoint, hbar: float) -> float:
    """Density exp(-|Y|^2/hbar) eta(Y) relative to dx dY; no base-point dependence."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    return math.exp(-kahler_potential(p.Y) / hbar) * eta(spec, p.Y)


def c_hbar(spec: GroupSpec, hbar: float) -> float:
    """(pi hbar)^(-n/2) exp(-|rho|^2 hbar)."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    n = spec.n
    return (math.pi * hbar) ** (-n / 2.0) * math.exp(-spec.root_data.rho_norm_sq * hbar)


def nu_density(spec: GroupSpec, p: FiberPoint, hbar: float) -> float:
    """(pi hbar)^(-n/2) e^{-|rho|^2 hbar} e^{-|Y|^2/hbar} eta(Y), relative to dx dY."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    n = spec.n
    return (
        (math.pi * hbar) ** (-n / 2.0)
        * math.exp(-spec.root_data.rho_norm_sq * hbar)
        * math.exp(-kahler_potential(p.Y) / hbar)
        * eta(spec, p.Y)
    )


def fiber_heat_density(spec: GroupSpec, Y: np.ndarray, t: float) -> float:
    """(pi t)^(-n/2) e^{-|Y|^2/t} j^{1/2}(Y) f(t) with j^{1/2} = eta, f(t) = e^{-|rho|^2 t}.

    This is the x-independent factor of the fiber measure; it integrates to one
    over the algebra.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    n = spec.n
    return (
        (math.pi * t) ** (-n / 2.0)
        * math.exp(-spec.root_data.rho_norm_sq * t)
        * math.exp(-kahler_potential(Y) / t)
        * eta(spec, Y)
    )


def verify_kappa_one_form(spec: GroupSpec, p: FiberPoint) -> float:
    """Residual of Im[dbar kappa] = theta at p, through the chart differential.

    d kappa = sum 2 y_k dy_k is pulled back through the inverse transpose of
    the chart pushforward, split into its antiholomorphic part in the
    left-invariant coframe of the complex group, and transported back; the
    imaginary part must match theta = sum y_k alpha_k.  Covectors are
    length-2n coordinate vectors over {alpha_k, dy_k}.
    """
    n = spec.n
    Y = np.asarray(p.Y, dtype=float)
    M = phi_pushforward(spec, Y)
    dk = np.concatenate([np.zeros(n), 2.0 * Y])
    pulled = np.linalg.solve(M.T, dk)  # coefficients over {eta_k, J eta_k}
    a, b = pulled[:n], pulled[n:]
    c = 0.5 * a + 0.5j * b  # coefficient of the antiholomorphic coframe
    vec = np.concatenate([c, -1j * c])
    back = M.T @ vec  # over {alpha_k, dy_k}
    theta = np.concatenate([Y, np.zeros(n)])
    return float(np.max(np.abs(back.imag - theta)))


def density_reports(spec: GroupSpec, hbar: float, n_points: int, rng) -> list:
    """nu/gamma ratio rows at random fiber points."""
    c = c_hbar(spec, hbar)
    rows = []
    for i in range(n_points):
        p = FiberPoint(spec.random_element(rng), spec.random_algebra(rng, radius=3.0))
        g = gamma_density(spec, p, hbar)
        nu = nu_density(spec, p, hbar)
        rows.append(DensityReport(i, g, nu, nu / g, c))
    return rows
