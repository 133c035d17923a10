"""Closed-form reference implementation of the transform on the real line.

Functions are finite sums of terms c * q^m * exp(-a q^2/2 + b q) with complex
c, b and Re(a) >= 0.  The class is closed under the heat operator, Gaussian
convolution, and analytic continuation, and all the inner products needed by
the unitarity and inversion identities reduce to the scalar Gaussian moments

    M_m(A, B) = integral of q^m exp(-A q^2/2 + B q),
    M_0 = sqrt(2 pi / A) e^{B^2/(2A)},
    A M_m = B M_{m-1} + (m-1) M_{m-2},

so every identity here is checkable without quadrature; quadrature enters
only through the adjoint map, which is the same Gauss-Hermite machinery the
group case uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureUnderResolved


@dataclass(frozen=True)
class FlatTerm:
    c: complex
    m: int
    a: complex  # Gaussian rate, Re(a) >= 0
    b: complex  # linear exponent

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.c * z**self.m * np.exp(-self.a * z**2 / 2.0 + self.b * z)


class FlatFunction:
    """Finite sum of polynomial-times-Gaussian terms on the line (entire)."""

    def __init__(self, terms):
        # Negative Gaussian rates are allowed (the conventional-space weight
        # absorbs them); divergence is policed where integrals are taken.
        self.terms = tuple(
            FlatTerm(complex(c), int(m), complex(a), complex(b)) for c, m, a, b in terms
        )

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for t in self.terms:
            out = out + t(z)
        return out if out.shape else complex(out)

    def scaled(self, factor):
        return FlatFunction([(factor * t.c, t.m, t.a, t.b) for t in self.terms])

    def __add__(self, other):
        return FlatFunction(
            [(t.c, t.m, t.a, t.b) for t in self.terms]
            + [(t.c, t.m, t.a, t.b) for t in other.terms]
        )

    @classmethod
    def polynomial(cls, coeffs):
        return cls([(c, m, 0.0, 0.0) for m, c in enumerate(coeffs) if c != 0])

    @classmethod
    def gaussian(cls, rate=1.0, shift=0.0, power=0, coeff=1.0):
        return cls([(coeff, power, rate, shift)])


def gauss_moments(n_max: int, A: complex, B: complex) -> np.ndarray:
    """M_0..M_{n_max} for the weight exp(-A q^2/2 + B q); needs Re(A) > 0."""
    if A.real <= 0:
        raise ValueError("divergent Gaussian moment: Re(A) <= 0")
    out = np.zeros(n_max + 1, dtype=complex)
    out[0] = math.sqrt(2.0 * math.pi) / np.sqrt(A) * np.exp(B**2 / (2.0 * A))
    if n_max >= 1:
        out[1] = (B / A) * out[0]
    for m in range(2, n_max + 1):
        out[m] = (B * out[m - 1] + (m - 1) * out[m - 2]) / A
    return out


def moment_polynomials(n_max: int, A: complex) -> list:
    """P_m with M_m = P_m(B) M_0, as coefficient arrays in B."""
    polys = [np.array([1.0 + 0.0j])]
    if n_max >= 1:
        polys.append(np.array([0.0, 1.0 / A], dtype=complex))
    for m in range(2, n_max + 1):
        prev = np.concatenate([[0.0], polys[m - 1]]) / A  # multiply by B/A
        prev = prev + np.pad((m - 1) * polys[m - 2] / A, (0, len(prev) - len(polys[m - 2])))
        polys.append(prev)
    return polys


def l2_inner(f: FlatFunction, g: FlatFunction) -> complex:
    """Inner product over the real line, antilinear in f."""
    total = 0.0 + 0.0j
    for t in f.terms:
        for s in g.terms:
            A = np.conj(t.a) + s.a
            B = np.conj(t.b) + s.b
            mom = gauss_moments(t.m + s.m, A, B)
            total += np.conj(t.c) * s.c * mom[t.m + s.m]
    return total


def l2_norm_sq(f: FlatFunction) -> float:
    return float(l2_inner(f, f).real)


def heat_evolve(f: FlatFunction, hbar: float) -> FlatFunction:
    """Convolution with the normalized Gaussian kernel of variance hbar.

    Term-wise: rate a -> a/(1 + a hbar), shift b -> b/(1 + a hbar), and the
    moment polynomial contributes new monomials.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    new_terms = []
    for t in f.terms:
        A = t.a + 1.0 / hbar
        a_new = t.a / (1.0 + t.a * hbar)
        b_new = t.b / (1.0 + t.a * hbar)
        const = (
            (2.0 * math.pi * hbar) ** -0.5
            * math.sqrt(2.0 * math.pi)
            / np.sqrt(A)
            * np.exp(t.b**2 / (2.0 * A))
        )
        # P_m(B) with B = b + x/hbar expanded into powers of x
        poly_B = moment_polynomials(t.m, A)[t.m]
        poly_x = np.zeros(t.m + 1, dtype=complex)
        for k, ck in enumerate(poly_B):
            if ck == 0:
                continue
            for j in range(k + 1):
                poly_x[j] += ck * math.comb(k, j) * t.b ** (k - j) * hbar ** -j
        # exponent cross term: e^{B^2/2A} contributes e^{(2 b x/hbar + x^2/hbar^2)/2A};
        # the x^2 and x parts are already folded into a_new, b_new above, and the
        # b^2 part into const.
        for j, cj in enumerate(poly_x):
            if cj != 0:
                new_terms.append((t.c * const * cj, j, a_new, b_new))
    return FlatFunction(new_terms)


def flat_constants(hbar: float, n: int = 1):
    """Printed forward and unitarity constants for the line case."""
    a = (math.pi * hbar) ** (-n / 2.0) * (2.0 * math.pi * hbar) ** (-float(n))
    b = (math.pi * hbar) ** (n / 4.0) * (2.0 * math.pi * hbar) ** (n / 2.0)
    return a, b


def flat_pairing_forward(f: FlatFunction, hbar: float) -> FlatFunction:
    """a_hbar times the Gaussian-kernel transform, as an entire function."""
    a, _ = flat_constants(hbar)
    scale = a * (2.0 * math.pi * hbar) ** 0.5
    return heat_evolve(f, hbar).scaled(scale)


def flat_pairing_adjoint(F, q: float, hbar: float, order: int = 48,
                         check_convergence: bool = True) -> complex:
    """Integral of F(q + ip) exp(-p^2/(2 hbar)) over p, by Gauss-Hermite."""

    def run(n):
        t, w = np.polynomial.hermite.hermgauss(n)
        p = math.sqrt(2.0 * hbar) * t
        vals = np.array([F(complex(q, pk)) for pk in p])
        return complex(np.sum(math.sqrt(2.0 * hbar) * w * vals))

    base, refined = run(order), run(2 * order)
    if check_convergence and abs(base - refined) > 1e-6 * max(1.0, abs(refined)):
        raise QuadratureUnderResolved(
            f"flat adjoint moved by {abs(base - refined):.3e} when doubling order"
        )
    return refined


def vertical_gaussian_average(F: FlatFunction, q: float, hbar: float) -> complex:
    """f_hbar(q): F averaged over the imaginary direction with the normalized
    Gaussian of variance hbar, in closed form."""
    total = 0.0 + 0.0j
    for t in F.terms:
        A = 1.0 / hbar - t.a
        if A.real <= 0:
            raise ValueError("imaginary-direction average diverges for this term")
        B = 1j * (t.b - t.a * q)
        mom = gauss_moments(t.m, A, B)
        base = np.exp(-t.a * q**2 / 2.0 + t.b * q)
        val = 0.0 + 0.0j
        for j in range(t.m + 1):
            val += math.comb(t.m, j) * q ** (t.m - j) * (1j) ** j * mom[j]
        total += t.c * base * val * (2.0 * math.pi * hbar) ** -0.5
    return total


def backward_heat_check(F: FlatFunction, hbars, qs=None, dq: float = 1e-3) -> dict:
    """Residual of the backward heat equation for the Gaussian averages f_hbar.

    d f/d hbar is estimated by central differences over the hbar grid and the
    Laplacian by central differences in q; also reports the hbar -> 0 limit
    defect against the restriction of F to the line.
    """
    hbars = sorted(float(h) for h in hbars)
    if len(hbars) < 3:
        raise ValueError("need at least three hbar grid points")
    if qs is None:
        qs = np.linspace(-1.5, 1.5, 7)
    worst = 0.0
    for i in range(1, len(hbars) - 1):
        hm, h0, hp = hbars[i - 1], hbars[i], hbars[i + 1]
        for q in qs:
            dfdh = (
                vertical_gaussian_average(F, q, hp) - vertical_gaussian_average(F, q, hm)
            ) / (hp - hm)
            lap = (
                vertical_gaussian_average(F, q + dq, h0)
                - 2.0 * vertical_gaussian_average(F, q, h0)
                + vertical_gaussian_average(F, q - dq, h0)
            ) / dq**2
            worst = max(worst, abs(dfdh + 0.5 * lap))
    limit_defect = max(
        abs(vertical_gaussian_average(F, q, 1e-8) - F(complex(q))) for q in qs
    )
    return {"residual": worst, "limit_defect": float(limit_defect)}


def _poly2_pow(base: dict, power: int) -> dict:
    out = {(0, 0): 1.0 + 0.0j}
    for _ in range(power):
        nxt = {}
        for (i, j), c in out.items():
            for (di, dj), d in base.items():
                key = (i + di, j + dj)
                nxt[key] = nxt.get(key, 0.0) + c * d
        out = nxt
    return out


def hl2_weighted_inner(F: FlatFunction, G: FlatFunction, wq: float, wp: float) -> complex:
    """Double integral of F(q+ip) conj(G(q+ip)) exp(-wq q^2 - wp p^2), exactly.

    The q-integral is done first with the moment polynomials, leaving a
    polynomial-times-Gaussian integral in p.
    """
    total = 0.0 + 0.0j
    for t in F.terms:
        for s in G.terms:
            cs = np.conj(s.c)
            S = t.a + np.conj(s.a)
            D = t.a - np.conj(s.a)
            L = t.b + np.conj(s.b)
            M = t.b - np.conj(s.b)
            Au = S + 2.0 * wq
            if Au.real <= 0:
                raise ValueError("q-integral diverges for this pair")
            # polynomial part (q+ip)^{m_t} (q-ip)^{m_s} over q^alpha p^beta
            poly = _poly2_pow({(1, 0): 1.0, (0, 1): 1.0j}, t.m)
            poly_s = _poly2_pow({(1, 0): 1.0, (0, 1): -1.0j}, s.m)
            merged = {}
            for (i, j), c in poly.items():
                for (di, dj), d in poly_s.items():
                    key = (i + di, j + dj)
                    merged[key] = merged.get(key, 0.0) + c * d
            max_alpha = t.m + s.m
            mpolys = moment_polynomials(max_alpha, Au)
            # expansions of (L - i D v)^k in powers of v
            max_k = max(len(p) - 1 for p in mpolys)
            lin_pows = [np.array([1.0 + 0.0j])]
            for _ in range(max_k):
                prev = lin_pows[-1]
                nxt = np.zeros(len(prev) + 1, dtype=complex)
                nxt[: len(prev)] += L * prev
                nxt[1:] += -1j * D * prev
                lin_pows.append(nxt)
            # v-polynomial after the q-integral
            vpoly = np.zeros(max_alpha + max_k + 1, dtype=complex)
            for (alpha, beta), c in merged.items():
                pa = mpolys[alpha]
                acc = np.zeros(max_k + 1, dtype=complex)
                for k, ck in enumerate(pa):
                    if ck != 0:
                        acc[: len(lin_pows[k])] += ck * lin_pows[k]
                vpoly[beta : beta + len(acc)] += c * acc
            # v-Gaussian data: exp((L - iDv)^2/(2Au)) contributes to the v
            # quadratic and linear parts
            Av = 2.0 * wp - S + D**2 / Au
            Bv = 1j * M - 1j * L * D / Au
            if Av.real <= 0:
                raise ValueError("p-integral diverges for this pair")
            moms = gauss_moments(len(vpoly) - 1, Av, Bv)
            acc = sum(cv * moms[k] for k, cv in enumerate(vpoly) if cv != 0)
            pref = math.sqrt(2.0 * math.pi) / np.sqrt(Au) * np.exp(L**2 / (2.0 * Au))
            total += t.c * cs * pref * acc
    return total


def hl2_norm_sq(F: FlatFunction, hbar: float) -> float:
    """Squared norm against exp(-p^2/hbar) dq dp, in closed form."""
    return float(hl2_weighted_inner(F, F, 0.0, 1.0 / hbar).real)


def to_conventional(F: FlatFunction, hbar: float) -> FlatFunction:
    """Multiply by exp(z^2/(4 hbar)): the dictionary into the standard
    Gaussian-weighted space."""
    return FlatFunction([(t.c, t.m, t.a - 1.0 / (2.0 * hbar), t.b) for t in F.terms])


def conventional_norm_sq(F: FlatFunction, hbar: float) -> float:
    """Squared norm against exp(-|z|^2/(2 hbar)) dq dp."""
    w = 1.0 / (2.0 * hbar)
    return float(hl2_weighted_inner(F, F, w, w).real)


def flat_unitarity_audit(test_set, hbar: float):
    """Norm ratios of the forward map; the printed constant closes here."""
    from .pairing import UnitarityAudit

    _, b = flat_constants(hbar)
    ratios = []
    for f in test_set:
        F = flat_pairing_forward(f, hbar)
        ratios.append(math.sqrt(hl2_norm_sq(F, hbar)) / math.sqrt(l2_norm_sq(f)))
    return UnitarityAudit("r1", hbar, ratios, b)


def pistarinv_check(poly_coeffs, hbar: float, qs=None) -> float:
    """Max defect of adjoint(continuation of heat(f)) = (2 pi hbar)^(1/2) f
    on a polynomial f."""
    if qs is None:
        qs = np.linspace(-2.0, 2.0, 9)
    f = FlatFunction.polynomial(poly_coeffs)
    F = heat_evolve(f, hbar)
    order = max(48, 2 * len(poly_coeffs) + 8)
    worst = 0.0
    scale = (2.0 * math.pi * hbar) ** 0.5
    for q in qs:
        lhs = flat_pairing_adjoint(F, float(q), hbar, order=order, check_convergence=False)
        rhs = scale * f(complex(q))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst


def polynomial_fiber_series(coeffs, q: float, p: float, n_terms: int):
    """Partial sums of the terminating fiber Taylor series of a polynomial.

    The n-th term is (ip)^n/n! times the n-th derivative at q; the sums reach
    the holomorphic value poly(q + ip) at the polynomial degree.
    """
    c = np.array(coeffs, dtype=complex)
    sums = []
    total = 0.0 + 0.0j
    deriv = c.copy()
    fact = 1.0
    for n in range(n_terms + 1):
        if n > 0:
            deriv = np.polynomial.polynomial.polyder(deriv)
            fact *= n
        if deriv.size:
            total += (1j * p) ** n / fact * np.polynomial.polynomial.polyval(q, deriv)
        sums.append(total)
    return sums
