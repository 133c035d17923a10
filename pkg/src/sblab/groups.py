"""Group and Lie-algebra arithmetic for products of circle, SU(2), and line factors.

The algebra of each group is R^n with a fixed orthonormal basis.  Circle and
line factors contribute one coordinate each; an SU(2) factor contributes three,
with basis e_k = i*sigma_k/sqrt(2), orthonormal for <X,Y> = Re trace(X^* Y).
In that normalization [e_j, e_k] = -sqrt(2) eps_{jkl} e_l, so ad(Y) restricted
to an SU(2) block is -sqrt(2) times the cross-product matrix of the block
coordinates, and the single positive root takes the value sqrt(2)*|Y| on the
block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)

# Orthonormal su(2) basis for <X,Y> = Re trace(X^* Y).
SU2_BASIS = 1j * PAULI / SQRT2

FACTOR_DIMS = {"u1": 1, "su2": 3, "r1": 1}
# Haar masses used throughout for the compact factors.
FACTOR_VOLUMES = {"u1": 2.0 * math.pi, "su2": 2.0 * math.pi**2}


@dataclass(frozen=True)
class Factor:
    kind: str  # "u1" | "su2" | "r1"
    offset: int

    @property
    def dim(self) -> int:
        return FACTOR_DIMS[self.kind]

    @property
    def sl(self) -> slice:
        return slice(self.offset, self.offset + self.dim)


@dataclass(frozen=True)
class RootDatum:
    """Positive roots as coordinate covectors on the fixed abelian subalgebra."""

    positive_roots: tuple
    rho: np.ndarray
    rho_norm_sq: float


class GroupSpec:
    """A product of u1, su2, and r1 factors, parsed from strings like "u1*su2"."""

    def __init__(self, name: str):
        tokens = [t.strip() for t in name.split("*")]
        if not tokens or any(t not in FACTOR_DIMS for t in tokens):
            raise ValueError(f"cannot parse group string {name!r}; tokens must be u1, su2, r1")
        factors = []
        offset = 0
        for t in tokens:
            factors.append(Factor(t, offset))
            offset += FACTOR_DIMS[t]
        self.name = "*".join(tokens)
        self.factors = tuple(factors)
        self.n = offset
        # Each factor contributes a one-dimensional abelian piece to the
        # maximal abelian subalgebra (for su2: the e_3 axis of its block).
        self.r = len(factors)
        self.root_data = self._build_root_data()

    def _build_root_data(self) -> RootDatum:
        roots = []
        for f in self.factors:
            if f.kind == "su2":
                alpha = np.zeros(self.n)
                alpha[f.offset + 2] = SQRT2
                roots.append(alpha)
        rho = 0.5 * sum(roots, np.zeros(self.n))
        return RootDatum(tuple(roots), rho, float(rho @ rho))

    @property
    def is_compact(self) -> bool:
        return all(f.kind != "r1" for f in self.factors)

    @property
    def volume(self) -> float:
        """Total Haar mass; defined only when every factor is compact."""
        if not self.is_compact:
            raise ValueError(f"group {self.name} has infinite volume")
        v = 1.0
        for f in self.factors:
            v *= FACTOR_VOLUMES[f.kind]
        return v

    @property
    def n_positive_roots(self) -> int:
        return len(self.root_data.positive_roots)

    def identity(self) -> "GroupElement":
        blocks = []
        for f in self.factors:
            if f.kind == "su2":
                blocks.append(np.eye(2, dtype=complex))
            else:
                blocks.append(0.0)
        return GroupElement(self, tuple(blocks))

    def random_element(self, rng: np.random.Generator) -> "GroupElement":
        return exp_group(self, rng.standard_normal(self.n))

    def random_algebra(self, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
        y = rng.standard_normal(self.n)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return y
        return y * (radius * rng.uniform() / nrm)

    def __repr__(self):
        return f"GroupSpec({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.name == other.name

    def __hash__(self):
        return hash(self.name)


class _Element:
    complex_valued = False

    def __init__(self, spec: GroupSpec, blocks: tuple):
        self.spec = spec
        self.blocks = tuple(blocks)

    def __mul__(self, other):
        if other.spec != self.spec:
            raise ValueError("elements belong to different groups")
        out = []
        for f, a, b in zip(self.spec.factors, self.blocks, other.blocks):
            out.append(a @ b if f.kind == "su2" else a + b)
        cls = ComplexGroupElement if (self.complex_valued or other.complex_valued) else GroupElement
        return cls(self.spec, tuple(out))

    def inverse(self):
        out = []
        for f, a in zip(self.spec.factors, self.blocks):
            if f.kind == "su2":
                out.append(np.linalg.inv(a) if self.complex_valued else a.conj().T)
            else:
                out.append(-a)
        return type(self)(self.spec, tuple(out))


class GroupElement(_Element):
    """Per factor: angle (circle), 2x2 unitary with det 1 (su2), real number (r1)."""

    def __init__(self, spec, blocks):
        cooked = []
        for f, b in zip(spec.factors, blocks):
            if f.kind == "su2":
                cooked.append(np.asarray(b, dtype=complex))
            elif f.kind == "u1":
                cooked.append(float(b) % (2.0 * math.pi))
            else:
                cooked.append(float(b))
        super().__init__(spec, tuple(cooked))

    def as_complex(self) -> "ComplexGroupElement":
        blocks = [np.asarray(b, dtype=complex) if f.kind == "su2" else complex(b)
                  for f, b in zip(self.spec.factors, self.blocks)]
        return ComplexGroupElement(self.spec, tuple(blocks))

    def validate(self, tol: float = 1e-12) -> None:
        for f, b in zip(self.spec.factors, self.blocks):
            if f.kind == "su2":
                assert np.linalg.norm(b.conj().T @ b - np.eye(2)) <= tol
                assert abs(np.linalg.det(b) - 1.0) <= tol


class ComplexGroupElement(_Element):
    """Complexified element: complex angle, SL(2,C) block, or complex number."""

    complex_valued = True

    def __init__(self, spec, blocks):
        cooked = []
        for f, b in zip(spec.factors, blocks):
            cooked.append(np.asarray(b, dtype=complex) if f.kind == "su2" else complex(b))
        super().__init__(spec, tuple(cooked))

    def validate(self, tol: float = 1e-10) -> None:
        for f, b in zip(self.spec.factors, self.blocks):
            if f.kind == "su2":
                assert abs(np.linalg.det(b) - 1.0) <= tol


def distance(g, h) -> float:
    """Max over factors of a natural block distance; wraps circle angles."""
    d = 0.0
    for f, a, b in zip(g.spec.factors, g.blocks, h.blocks):
        if f.kind == "su2":
            d = max(d, float(np.max(np.abs(a - b))))
        elif f.kind == "u1":
            delta = ((a - b).real if isinstance(a - b, complex) else (a - b)) % (2.0 * math.pi)
            d = max(d, min(delta, 2.0 * math.pi - delta) + abs((a - b).imag if isinstance(a - b, complex) else 0.0))
        else:
            d = max(d, abs(a - b))
    return d


# -- su(2) block helpers ------------------------------------------------------

def su2_block_exp(coords) -> np.ndarray:
    """exp of sum_k coords[k] * e_k for real or complex coordinates.

    For a traceless 2x2 matrix M with M^2 = mu^2 I this is
    cosh(mu) I + sinh(mu)/mu M, which handles both branches of mu and is
    evaluated by series near mu = 0.
    """
    z = np.asarray(coords, dtype=complex)
    m = np.tensordot(z, SU2_BASIS, axes=(0, 0))
    musq = -z @ z / 2.0  # M^2 = musq * I
    mu = np.sqrt(musq + 0j)
    if abs(mu) < 1e-6:
        c = 1.0 + musq / 2.0 + musq**2 / 24.0
        s = 1.0 + musq / 6.0 + musq**2 / 120.0
    else:
        c = np.cosh(mu)
        s = np.sinh(mu) / mu
    return c * np.eye(2, dtype=complex) + s * m


def su2_block_log(u: np.ndarray, branch_margin: float = 1e-9):
    """Principal log of an SU(2) matrix as algebra coordinates (length 3).

    Raises ValueError when the rotation angle reaches the branch cut t = pi.
    """
    ct = float(np.real(np.trace(u))) / 2.0
    v = np.array([np.trace(PAULI[k] @ u) / 2.0j for k in range(3)])
    v = np.real(v)
    sn = float(np.linalg.norm(v))
    t = math.atan2(sn, ct)
    if t >= math.pi * (1.0 - branch_margin):
        raise ValueError("su(2) log outside principal branch")
    if sn < 1e-14:
        return np.zeros(3)
    # X = i t (n.sigma) = sum_k y_k e_k with y = sqrt(2) t n.
    return SQRT2 * t * v / sn


def exp_group(spec: GroupSpec, Y: np.ndarray) -> GroupElement:
    """Factor-wise exponential of an algebra vector."""
    Y = np.asarray(Y, dtype=float)
    blocks = []
    for f in spec.factors:
        if f.kind == "su2":
            blocks.append(su2_block_exp(Y[f.sl]))
        else:
            blocks.append(Y[f.offset])
    return GroupElement(spec, tuple(blocks))


def exp_group_complex(spec: GroupSpec, Z: np.ndarray) -> ComplexGroupElement:
    """Factor-wise exponential of a complexified algebra vector."""
    Z = np.asarray(Z, dtype=complex)
    blocks = []
    for f in spec.factors:
        if f.kind == "su2":
            blocks.append(su2_block_exp(Z[f.sl]))
        else:
            blocks.append(Z[f.offset])
    return ComplexGroupElement(spec, tuple(blocks))


def log_group(spec: GroupSpec, g: GroupElement) -> np.ndarray:
    """Principal-branch logarithm, factor-wise."""
    from .errors import LogBranchViolation

    out = np.zeros(spec.n)
    for f, b in zip(spec.factors, g.blocks):
        if f.kind == "su2":
            try:
                out[f.sl] = su2_block_log(b)
            except ValueError as exc:
                raise LogBranchViolation(str(exc)) from exc
        elif f.kind == "u1":
            ang = b % (2.0 * math.pi)
            if ang > math.pi:
                ang -= 2.0 * math.pi
            if abs(ang) >= math.pi * (1.0 - 1e-9):
                raise LogBranchViolation("circle log at branch cut")
            out[f.offset] = ang
        else:
            out[f.offset] = b
    return out


def ad_matrix(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    """Matrix of ad(Y) = [Y, .] in the orthonormal basis; skew-symmetric."""
    Y = np.asarray(Y, dtype=float)
    A = np.zeros((spec.n, spec.n))
    for f in spec.factors:
        if f.kind == "su2":
            y1, y2, y3 = Y[f.sl]
            cross = np.array([[0.0, -y3, y2], [y3, 0.0, -y1], [-y2, y1, 0.0]])
            A[f.sl, f.sl] = -SQRT2 * cross
    return A


def ad_matrix_batch(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    """ad matrices for a stack of algebra vectors, shape (..., n, n)."""
    Y = np.asarray(Y, dtype=float)
    A = np.zeros(Y.shape[:-1] + (spec.n, spec.n))
    for f in spec.factors:
        if f.kind == "su2":
            o = f.offset
            y1, y2, y3 = Y[..., o], Y[..., o + 1], Y[..., o + 2]
            A[..., o, o + 1] = SQRT2 * y3
            A[..., o + 1, o] = -SQRT2 * y3
            A[..., o, o + 2] = -SQRT2 * y2
            A[..., o + 2, o] = SQRT2 * y2
            A[..., o + 1, o + 2] = SQRT2 * y1
            A[..., o + 2, o + 1] = -SQRT2 * y1
    return A


def root_values(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    """Multiset {|alpha(Y')|, alpha in R+} from the spectrum of ad(Y).

    The eigenvalues of the skew matrix ad(Y) are +/- i mu pairs plus rank-many
    structural zeros; the top (n-r)/2 eigenvalues of -i ad(Y) are exactly the
    nonnegative root values, with multiplicity.
    """
    n_pos = spec.n_positive_roots
    if n_pos == 0:
        return np.zeros(0)
    H = -1j * ad_matrix(spec, Y)
    w = np.linalg.eigvalsh(H)
    return np.sort(w)[-n_pos:][::-1].copy()


def root_values_batch(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    """Root values for a stack of algebra vectors, shape (..., |R+|)."""
    n_pos = spec.n_positive_roots
    if n_pos == 0:
        return np.zeros(Y.shape[:-1] + (0,))
    H = -1j * ad_matrix_batch(spec, Y)
    w = np.linalg.eigvalsh(H)
    return w[..., -n_pos:]


def phi(spec: GroupSpec, x: GroupElement, Y: np.ndarray) -> ComplexGroupElement:
    """x * exp(iY), the polar chart identifying K x alg(K) with the complex group."""
    return x.as_complex() * exp_group_complex(spec, 1j * np.asarray(Y, dtype=float))


def _skew_matfunc(A: np.ndarray, fw) -> np.ndarray:
    """f(A) for real skew A.

    A = i H with H = -iA Hermitian, so the eigenvalue of A attached to the
    eigenvalue w of H is i*w; fw receives w and must return f(i*w).
    """
    H = -1j * A
    w, U = np.linalg.eigh(H)
    vals = fw(w)
    M = (U * vals) @ U.conj().T
    assert np.max(np.abs(M.imag)) < 1e-10
    return M.real


def _sinhc(w):
    """sinh(w)/w, stable at 0."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 1.0, w)
    out = np.sinh(ws) / ws
    series = 1.0 + w**2 / 6.0 + w**4 / 120.0 + w**6 / 5040.0
    return np.where(small, series, out)


def _coshm1_over(w):
    """(cosh(w) - 1)/w, stable at 0."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 1.0, w)
    out = (np.cosh(ws) - 1.0) / ws
    series = w / 2.0 + w**3 / 24.0 + w**5 / 720.0
    return np.where(small, series, out)


def phi_pushforward(spec: GroupSpec, Y: np.ndarray) -> np.ndarray:
    """Differential of the polar chart at (x, Y) in left-trivialized frames.

    Block form [[cos adY, (1-cos adY)/adY], [-sin adY, sin adY/adY]]; on the
    eigenvalues -i w of ad(Y) these are hyperbolic functions of w.
    """
    n = spec.n
    A = ad_matrix(spec, Y)
    C = _skew_matfunc(A, np.cosh)                           # cos(adY)
    K = _skew_matfunc(A, lambda w: 1j * _coshm1_over(w))    # (1-cos adY)/adY
    S = _skew_matfunc(A, lambda w: 1j * np.sinh(w))         # sin(adY)
    T = _skew_matfunc(A, _sinhc)                            # sin(adY)/adY
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = C
    out[:n, n:] = K
    out[n:, :n] = -S
    out[n:, n:] = T
    return out
