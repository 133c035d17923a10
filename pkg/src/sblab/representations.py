"""Irreducible representations, band-limited functions, the heat operator, and
the heat kernel on the compact group.

Labels are tuples with one entry per factor: an integer k for a circle factor
(character e^{ik theta}) and a nonnegative integer twoJ for an SU(2) factor
(spin j = twoJ/2).  SU(2) matrix entries are produced by exponentiating the
spin-j images of the algebra generators, so one code path evaluates real and
complexified arguments: a general SL(2,C) block is split into its unitary and
positive parts, and each part is exponentiated through the generator images.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TruncationInsufficient
from .groups import PAULI, SQRT2, GroupSpec, phi
from .quadrature import QuadratureRule


# -- spin-j generator machinery ------------------------------------------------

@lru_cache(maxsize=None)
def angular_momentum(twoJ: int):
    """Standard J1, J2, J3 for spin twoJ/2, rows ordered m = j, j-1, ..., -j."""
    j = twoJ / 2.0
    dim = twoJ + 1
    m = j - np.arange(dim)
    J3 = np.diag(m).astype(complex)
    Jp = np.zeros((dim, dim), dtype=complex)
    for idx in range(1, dim):
        mm = m[idx]  # raise |j, mm> -> |j, mm+1>
        Jp[idx - 1, idx] = math.sqrt(j * (j + 1) - mm * (mm + 1))
    Jm = Jp.conj().T
    J1 = (Jp + Jm) / 2.0
    J2 = (Jp - Jm) / 2.0j
    return J1, J2, J3


def spin_generator(twoJ: int, coeffs) -> np.ndarray:
    """dpi(X) for X = sum_k coeffs[k] * sigma_k / 2 (coeffs may be complex)."""
    J1, J2, J3 = angular_momentum(twoJ)
    c = np.asarray(coeffs, dtype=complex)
    return c[0] * J1 + c[1] * J2 + c[2] * J3


def _pauli_coeffs(X: np.ndarray) -> np.ndarray:
    """Coefficients c with X = sum_k c_k sigma_k / 2 for traceless 2x2 X."""
    return np.array([np.trace(PAULI[k] @ X) for k in range(3)])


def _exp_anti_hermitian(G: np.ndarray) -> np.ndarray:
    """exp(G) for anti-Hermitian G via the Hermitian eigenproblem of iG."""
    w, V = np.linalg.eigh(1j * G)
    return (V * np.exp(-1j * w)) @ V.conj().T


def _exp_hermitian(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    return (V * np.exp(w)) @ V.conj().T


def su2_irrep_block(twoJ: int, g: np.ndarray) -> np.ndarray:
    """Spin-j image of an SU(2) or SL(2,C) matrix.

    Uses the right polar split g = u p; both logs are exponentiated through
    the generator images, and any log branch gives the same image.
    """
    if twoJ == 0:
        return np.eye(1, dtype=complex)
    g = np.asarray(g, dtype=complex)
    B = g.conj().T @ g
    unitary = np.max(np.abs(B - np.eye(2))) < 1e-13
    if unitary:
        u, p_img = g, None
    else:
        w, V = np.linalg.eigh(B)
        p_inv = (V * (w ** -0.5)) @ V.conj().T
        u = g @ p_inv
        H = (V * (0.5 * np.log(w))) @ V.conj().T  # log of the positive part
        p_img = _exp_hermitian(spin_generator(twoJ, _pauli_coeffs(H)))
    ct = float(np.real(np.trace(u))) / 2.0
    v = np.real(np.array([np.trace(PAULI[k] @ u) / 2.0j for k in range(3)]))
    sn = float(np.linalg.norm(v))
    t = math.atan2(sn, ct)
    nhat = v / sn if sn > 1e-12 else np.array([0.0, 0.0, 1.0])
    u_img = _exp_anti_hermitian(spin_generator(twoJ, 2j * t * nhat))
    return u_img if p_img is None else u_img @ p_img


def label_dim(spec: GroupSpec, label: tuple) -> int:
    d = 1
    for f, ell in zip(spec.factors, label):
        if f.kind == "su2":
            d *= ell + 1
    return d


def _check_label(spec: GroupSpec, label: tuple) -> None:
    if len(label) != len(spec.factors):
        raise ValueError("label length does not match the number of factors")
    for f, ell in zip(spec.factors, label):
        if f.kind == "r1":
            raise ValueError("band-limited machinery requires compact factors")
        if f.kind == "su2" and (ell < 0 or int(ell) != ell):
            raise ValueError("su2 label must be a nonnegative integer twoJ")


def irrep_matrix(spec: GroupSpec, label: tuple, g) -> np.ndarray:
    """Tensor-product representation matrix at a real or complexified element."""
    _check_label(spec, label)
    out = np.eye(1, dtype=complex)
    for f, ell, block in zip(spec.factors, label, g.blocks):
        if f.kind == "u1":
            out = out * np.exp(1j * ell * block)
        else:
            out = np.kron(out, su2_irrep_block(ell, block))
    return out


def casimir(spec: GroupSpec, label: tuple) -> float:
    """Laplacian eigenvalue: k^2 per circle factor, 2j(j+1) per su2 factor."""
    _check_label(spec, label)
    lam = 0.0
    for f, ell in zip(spec.factors, label):
        if f.kind == "u1":
            lam += float(ell) ** 2
        else:
            lam += ell * (ell + 2) / 2.0
    return lam


def labels_up_to(spec: GroupSpec, band_limit: int):
    """All labels with |k| <= band_limit and twoJ <= band_limit."""
    ranges = []
    for f in spec.factors:
        if f.kind == "u1":
            ranges.append(range(-band_limit, band_limit + 1))
        elif f.kind == "su2":
            ranges.append(range(0, band_limit + 1))
        else:
            raise ValueError("band-limited machinery requires compact factors")
    import itertools

    return [tuple(c) for c in itertools.product(*ranges)]


# -- band-limited and holomorphic functions -------------------------------------

class BandLimitedFunction:
    """Finite combination of representation matrix entries on the group.

    terms maps (label, row, col) to a complex coefficient.
    """

    def __init__(self, spec: GroupSpec, terms: dict):
        self.spec = spec
        self.terms = {k: complex(v) for k, v in terms.items() if v != 0}
        for (label, row, col) in self.terms:
            _check_label(spec, label)
            d = label_dim(spec, label)
            if not (0 <= row < d and 0 <= col < d):
                raise ValueError("entry indices out of range for the label")

    def __call__(self, g) -> complex:
        cache = {}
        val = 0.0 + 0.0j
        for (label, row, col), c in self.terms.items():
            if label not in cache:
                cache[label] = irrep_matrix(self.spec, label, g)
            val += c * cache[label][row, col]
        return val

    def labels(self):
        return sorted({t[0] for t in self.terms})

    def coefficient_matrix(self, label) -> np.ndarray:
        d = label_dim(self.spec, label)
        C = np.zeros((d, d), dtype=complex)
        for (lab, row, col), c in self.terms.items():
            if lab == label:
                C[row, col] = c
        return C

    def norm_sq(self) -> float:
        """Exact squared L2 norm: vol(K) * sum |c|^2 / dim, via orthogonality."""
        vol = self.spec.volume
        total = 0.0
        for label in self.labels():
            C = self.coefficient_matrix(label)
            total += float(np.sum(np.abs(C) ** 2)) / label_dim(self.spec, label)
        return vol * total

    def scaled(self, factor: complex) -> "BandLimitedFunction":
        return type(self)(self.spec, {k: factor * v for k, v in self.terms.items()})

    def __add__(self, other):
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return type(self)(self.spec, terms)

    def to_json(self) -> str:
        rows = [
            {"label": list(label), "row": row, "col": col, "re": c.real, "im": c.imag}
            for (label, row, col), c in sorted(self.terms.items())
        ]
        return json.dumps({"group": self.spec.name, "terms": rows})

    @classmethod
    def from_json(cls, payload: str) -> "BandLimitedFunction":
        data = json.loads(payload)
        spec = GroupSpec(data["group"])
        terms = {
            (tuple(r["label"]), r["row"], r["col"]): r["re"] + 1j * r["im"]
            for r in data["terms"]
        }
        return cls(spec, terms)


class HolomorphicFunction(BandLimitedFunction):
    """The same expansion read as a holomorphic function on the complexified group."""

    def at_fiber(self, x, Y) -> complex:
        return self(phi(self.spec, x, Y))

    def restrict(self) -> BandLimitedFunction:
        return BandLimitedFunction(self.spec, dict(self.terms))


def heat_operator(f: BandLimitedFunction, hbar: float) -> BandLimitedFunction:
    """Diagonal action: each coefficient is damped by exp(-hbar*casimir/2)."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    terms = {
        key: c * math.exp(-hbar * casimir(f.spec, key[0]) / 2.0)
        for key, c in f.terms.items()
    }
    return BandLimitedFunction(f.spec, terms)


def analytic_continue(f: BandLimitedFunction, hbar: float) -> HolomorphicFunction:
    """Heat-smooth, then read the same coefficients holomorphically."""
    smoothed = heat_operator(f, hbar)
    return HolomorphicFunction(f.spec, smoothed.terms)


# -- heat kernel -----------------------------------------------------------------

def _factor_spectral_sums(kind: str, hbar: float, band_limit: int):
    """(retained sum, tail bound) of dim^2 exp(-hbar*casimir/2) for one factor."""
    if kind == "u1":
        ks = np.arange(1, band_limit + 1)
        retained = 1.0 + 2.0 * float(np.sum(np.exp(-hbar * ks**2 / 2.0)))
        k0 = band_limit + 1
        ratio = math.exp(-hbar * k0)
        tail = 2.0 * math.exp(-hbar * k0**2 / 2.0) / max(1e-300, 1.0 - ratio)
        return retained, tail
    # su2: labels twoJ = 0..band_limit, dim = twoJ+1, casimir = twoJ(twoJ+2)/2
    twoJ = np.arange(0, band_limit + 1)
    lam = twoJ * (twoJ + 2) / 2.0
    retained = float(np.sum((twoJ + 1.0) ** 2 * np.exp(-hbar * lam / 2.0)))

    def term_at(t):
        return (t + 1.0) ** 2 * math.exp(-hbar * t * (t + 2) / 4.0)

    # Successive-term ratios decrease in t, so once they drop below one the
    # remainder is bounded by a geometric series.
    tail = 0.0
    t = band_limit + 1
    prev = term_at(t)
    for _ in range(5000):
        tail += prev
        t += 1
        cur = term_at(t)
        ratio = cur / prev if prev > 0 else 0.0
        if ratio < 1.0 and (cur < 1e-22 * (tail + 1e-300) or cur == 0.0):
            tail += cur / (1.0 - ratio)
            break
        prev = cur
    else:
        tail = math.inf
    return retained, tail


def heat_trace_tail_bound(spec: GroupSpec, hbar: float, band_limit: int) -> float:
    """Bound on sum of dim^2 exp(-hbar*casimir/2) over all dropped labels."""
    sums = [_factor_spectral_sums(f.kind, hbar, band_limit) for f in spec.factors]
    total = 0.0
    for i, (_, tail_i) in enumerate(sums):
        prod = tail_i
        for j, (full_j, tail_j) in enumerate(sums):
            if j != i:
                prod *= full_j + tail_j
        total += prod
    return total


def heat_kernel(spec: GroupSpec, x, hbar: float, band_limit: int) -> float:
    """Truncated spectral heat kernel (1/vol) sum dim * exp(-hbar*lam/2) * char."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    tail = heat_trace_tail_bound(spec, hbar, band_limit)
    if tail >= 1e-12:
        raise TruncationInsufficient(
            f"band limit {band_limit} leaves spectral tail {tail:.3e} >= 1e-12"
        )
    total = 0.0 + 0.0j
    for label in labels_up_to(spec, band_limit):
        d = label_dim(spec, label)
        chi = np.trace(irrep_matrix(spec, label, x))
        total += d * math.exp(-hbar * casimir(spec, label) / 2.0) * chi
    total /= spec.volume
    assert abs(total.imag) < 1e-12
    return float(total.real)


# -- batched evaluation over quadrature nodes ------------------------------------

def su2_irrep_unitary_batch(twoJ: int, mats: np.ndarray) -> np.ndarray:
    """Spin-j images of a stack of SU(2) matrices, shape (N, d, d)."""
    if twoJ == 0:
        return np.ones(mats.shape[:-2] + (1, 1), dtype=complex)
    ct = np.real(np.trace(mats, axis1=-2, axis2=-1)) / 2.0
    v = np.stack(
        [np.real(np.trace(PAULI[k][None] @ mats, axis1=-2, axis2=-1) / 2.0j) for k in range(3)],
        axis=-1,
    )
    sn = np.linalg.norm(v, axis=-1)
    t = np.arctan2(sn, ct)
    safe = np.where(sn > 1e-12, sn, 1.0)
    nhat = v / safe[..., None]
    nhat = np.where(sn[..., None] > 1e-12, nhat, np.array([0.0, 0.0, 1.0]))
    J1, J2, J3 = angular_momentum(twoJ)
    coeffs = 2.0 * t[..., None] * nhat
    G = (
        coeffs[..., 0, None, None] * J1
        + coeffs[..., 1, None, None] * J2
        + coeffs[..., 2, None, None] * J3
    )  # Hermitian; the image is exp(i G)... with G = 2 t (n.J)
    w, V = np.linalg.eigh(G)
    phase = np.exp(1j * w)
    return np.einsum("...ab,...b,...cb->...ac", V, phase, V.conj())


def su2_fiber_blocks(twoJ: int, y: np.ndarray) -> np.ndarray:
    """Spin-j images of exp(i Y) for a stack of algebra block coordinates y.

    exp(iY) is positive Hermitian; its generator image is -sqrt(2) (y . J).
    """
    if twoJ == 0:
        return np.ones(y.shape[:-1] + (1, 1), dtype=complex)
    J1, J2, J3 = angular_momentum(twoJ)
    H = -(SQRT2) * (
        y[..., 0, None, None] * J1
        + y[..., 1, None, None] * J2
        + y[..., 2, None, None] * J3
    )
    w, V = np.linalg.eigh(H)
    return np.einsum("...ab,...b,...cb->...ac", V, np.exp(w), V.conj())


def irrep_at_group_nodes(spec: GroupSpec, label: tuple, rule: QuadratureRule) -> np.ndarray:
    """Representation matrices at every node of a group rule, shape (N, d, d)."""
    _check_label(spec, label)
    out = None
    for fi, (f, ell) in enumerate(zip(spec.factors, label)):
        if f.kind == "u1":
            angles = np.array([g.blocks[fi] for g in rule.nodes])
            blocks = np.exp(1j * ell * angles)[:, None, None]
        else:
            mats = np.stack([g.blocks[fi] for g in rule.nodes])
            blocks = su2_irrep_unitary_batch(ell, mats)
        out = blocks if out is None else _kron_batch(out, blocks)
    return out


def fiber_blocks(spec: GroupSpec, label: tuple, Y: np.ndarray) -> np.ndarray:
    """pi_label(exp(iY)) for a stack of algebra vectors, shape (N, d, d)."""
    _check_label(spec, label)
    out = None
    for f, ell in zip(spec.factors, label):
        if f.kind == "u1":
            blocks = np.exp(-float(ell) * Y[..., f.offset])[..., None, None].astype(complex)
        else:
            blocks = su2_fiber_blocks(ell, Y[..., f.sl])
        out = blocks if out is None else _kron_batch(out, blocks)
    return out


def _kron_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na, da, _ = a.shape
    nb, db, _ = b.shape
    assert na == nb
    return np.einsum("nab,ncd->nacbd", a, b).reshape(na, da * db, da * db)
