"""Degree-bounded power series with certified tail bounds.

A :class:`TruncatedSeries` is the computational stand-in for a bounded
holomorphic map on a ball: it stores the Taylor coefficients up to a degree
bound around an anchor point of C^d (d = 1 or 2), a validity radius, and a
certified upper bound ``tail_bound`` for the sup of everything that was
dropped.  All arithmetic (linear combinations, Cauchy products, Neumann
inversion, entire-function composition with exp and log) propagates the tail
bound by majorant bookkeeping, so

    sampled sup  <=  true sup on the ball  <=  majorant norm

holds for every value the module produces.  Values are immutable; every
operation is a pure function.

Coefficients live in a :class:`CoefficientSpace`: complex scalars, vectors,
or m x m matrices.  The matrix norm is twice the spectral norm, which makes
``norm([x, y]) <= norm(x) * norm(y)`` hold exactly; this is the norm the Lie
machinery in the rest of the package relies on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, EvaluationError, StructureError

__all__ = [
    "CoefficientSpace",
    "TruncatedSeries",
    "scalar_space",
    "vector_space",
    "matrix_space",
    "linear_combination",
    "multiply",
    "bracket",
    "invert",
    "series_exp",
    "series_log",
    "cauchy_coefficients",
    "series_to_json",
    "series_from_json",
]

_EXP_REL_TOL = 1e-14  # adaptive truncation target for exp/log remainders


# ---------------------------------------------------------------------------
# coefficient spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSpace:
    """The target space Z of the series: scalars, vectors or square matrices.

    ``norm`` is the Euclidean norm for scalars and vectors.  For matrices it
    is twice the operator (spectral) norm, so that the norm is
    submultiplicative and compatible with the commutator bracket:
    ``norm([x, y]) <= norm(x) * norm(y)``.
    """

    kind: str  # "scalar" | "vector" | "matrix"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("scalar", "vector", "matrix"):
            raise StructureError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "scalar" and self.dim != 1:
            raise StructureError("scalar space has dim 1")
        if self.dim < 1:
            raise StructureError("coefficient dimension must be positive")

    @property
    def shape(self) -> tuple:
        if self.kind == "scalar":
            return ()
        if self.kind == "vector":
            return (self.dim,)
        return (self.dim, self.dim)

    def norm(self, values: np.ndarray) -> np.ndarray:
        """Norms of a batch of coefficients (batch axes lead)."""
        values = np.asarray(values, dtype=complex)
        if self.kind == "scalar":
            return np.abs(values)
        if self.kind == "vector":
            return np.linalg.norm(values, axis=-1)
        return 2.0 * spectral_norms(values)

    @property
    def submult_factor(self) -> float:
        """kappa with ``norm(x y) <= kappa * norm(x) * norm(y)``.

        The doubled spectral norm is 1/2-submultiplicative; this constant
        keeps product tail bounds sharp (the identity has norm 2, so the
        naive recursion would double certified tails at every factor).
        """
        return 0.5 if self.kind == "matrix" else 1.0

    def zero(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def one(self) -> np.ndarray:
        """Multiplicative unit (1 or the identity matrix)."""
        if self.kind == "matrix":
            return np.eye(self.dim, dtype=complex)
        if self.kind == "scalar":
            return np.asarray(1.0 + 0j)
        raise StructureError("vector coefficients have no multiplicative unit")


def scalar_space() -> CoefficientSpace:
    return CoefficientSpace("scalar", 1)


def vector_space(m: int) -> CoefficientSpace:
    return CoefficientSpace("vector", m)


def matrix_space(m: int) -> CoefficientSpace:
    return CoefficientSpace("matrix", m)


def spectral_norms(values: np.ndarray) -> np.ndarray:
    """Largest singular values over the trailing (m, m) axes; closed form for m = 2."""
    m = values.shape[-1]
    if m == 1:
        return np.abs(values[..., 0, 0])
    if m == 2:
        f = np.sum(np.abs(values) ** 2, axis=(-2, -1))
        det = values[..., 0, 0] * values[..., 1, 1] - values[..., 0, 1] * values[..., 1, 0]
        disc = np.sqrt(np.maximum(f * f - 4.0 * np.abs(det) ** 2, 0.0))
        return np.sqrt(np.maximum(0.5 * (f + disc), 0.0))
    sv = np.linalg.svd(values, compute_uv=False)
    return sv[..., 0]


# ---------------------------------------------------------------------------
# helpers for the (anti)diagonal sums of the Cauchy product
# ---------------------------------------------------------------------------

_CONV_MATRICES: dict[int, np.ndarray] = {}


def _conv_matrix(k: int) -> np.ndarray:
    """(2k-1, k*k) 0/1 matrix summing the anti-diagonals i+j of a k x k table."""
    mat = _CONV_MATRICES.get(k)
    if mat is None:
        idx = np.add.outer(np.arange(k), np.arange(k)).ravel()
        mat = np.zeros((2 * k - 1, k * k))
        mat[idx, np.arange(k * k)] = 1.0
        _CONV_MATRICES[k] = mat
    return mat


def _anchor_key(anchor) -> tuple:
    arr = np.atleast_1d(np.asarray(anchor, dtype=complex))
    return tuple(complex(z) for z in arr)


# ---------------------------------------------------------------------------
# the series type
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Power series around ``anchor`` truncated at total degree ``degree_bound``.

    Parameters
    ----------
    anchor:
        Point of C^d; a complex scalar for d = 1, a length-2 complex array
        for d = 2.
    degree_bound:
        Largest retained total degree N.
    coeffs:
        Array of coefficients.  Shape ``(N+1,) + space.shape`` for d = 1 and
        ``(N+1, N+1) + space.shape`` for d = 2 (entries with i + j > N are
        zero by invariant).
    radius:
        Validity radius rho > 0 of the anchor-centered ball.
    tail_bound:
        Certified upper bound for the sup norm, on the radius-rho ball, of
        the difference between the represented function and the stored
        polynomial.  Monotone under radius shrinkage by construction.
    space:
        The coefficient space Z.
    dim:
        Model dimension d, 1 (default) or 2.
    """

    anchor: object
    degree_bound: int
    coeffs: np.ndarray
    radius: float
    tail_bound: float
    space: CoefficientSpace
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise StructureError("only model dimensions 1 and 2 are supported")
        n = self.degree_bound
        if n < 0:
            raise StructureError("degree_bound must be nonnegative")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise StructureError("radius must be positive and finite")
        if not (self.tail_bound >= 0 and math.isfinite(self.tail_bound)):
            raise StructureError("tail_bound must be finite and nonnegative")
        want = (n + 1,) * self.dim + self.space.shape
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != want:
            raise StructureError(f"coefficient array has shape {coeffs.shape}, expected {want}")
        if self.dim == 2:
            i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
            over = (i + j > n)
            if np.any(self.space.norm(coeffs[over]) > 0):
                raise StructureError("coefficients beyond total degree bound must vanish")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_norm_cache", None)
        anchor = np.asarray(self.anchor, dtype=complex)
        if anchor.shape not in ((), (self.dim,)):
            raise StructureError("anchor does not match model dimension")
        if self.dim == 1:
            object.__setattr__(self, "anchor", complex(anchor))
        else:
            anchor = anchor.reshape(self.dim).copy()
            anchor.setflags(write=False)
            object.__setattr__(self, "anchor", anchor)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, anchor, radius, space, degree_bound=12, dim=1):
        shape = (degree_bound + 1,) * dim + space.shape
        return cls(anchor, degree_bound, np.zeros(shape, complex), radius, 0.0, space, dim)

    @classmethod
    def constant(cls, value, anchor, radius, space, degree_bound=12, dim=1):
        s = cls.zero(anchor, radius, space, degree_bound, dim)
        coeffs = s.coeffs.copy()
        coeffs[(0,) * dim] = np.asarray(value, dtype=complex)
        return cls(anchor, degree_bound, coeffs, radius, 0.0, space, dim)

    @classmethod
    def unit(cls, anchor, radius, space, degree_bound=12, dim=1):
        """The constant series with value 1 (resp. the identity matrix)."""
        return cls.constant(space.one(), anchor, radius, space, degree_bound, dim)

    @classmethod
    def from_coeff_list(cls, pairs, anchor, radius, space, degree_bound=12, dim=1):
        """Build a series from ``(multi_index, value)`` pairs; d = 1 indices are ints."""
        s = cls.zero(anchor, radius, space, degree_bound, dim)
        coeffs = s.coeffs.copy()
        for k, value in pairs:
            idx = (int(k),) if np.isscalar(k) else tuple(int(q) for q in k)
            if len(idx) != dim:
                raise StructureError(f"multi-index {idx} does not match dimension {dim}")
            if sum(idx) > degree_bound:
                raise StructureError(f"multi-index {idx} exceeds degree bound {degree_bound}")
            coeffs[idx] = np.asarray(value, dtype=complex)
        return cls(anchor, degree_bound, coeffs, radius, 0.0, space, dim)

    # -- norms --------------------------------------------------------------

    def coeff_norms(self) -> np.ndarray:
        """Norm of every stored coefficient, indexed like ``coeffs`` (cached)."""
        if self._norm_cache is None:
            object.__setattr__(self, "_norm_cache", self.space.norm(self.coeffs))
        return self._norm_cache

    def majorant_coeffs(self, rho: float | None = None) -> np.ndarray:
        """The scalar majorant sequence ``norm(c_k) * rho^|k|`` indexed by total degree."""
        rho = self.radius if rho is None else float(rho)
        if rho > self.radius * (1 + 1e-12):
            raise BudgetError(f"rho={rho} exceeds validity radius {self.radius}")
        n = self.degree_bound
        norms = self.coeff_norms()
        pw = rho ** np.arange(n + 1)
        if self.dim == 1:
            return norms * pw
        out = np.zeros(n + 1)
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = (i + j <= n)  # higher entries vanish by invariant
        np.add.at(out, (i + j)[keep], (norms[keep] * pw[(i + j)[keep]]))
        return out

    def poly_majorant(self, rho: float | None = None) -> float:
        """Majorant of the stored polynomial part only."""
        return float(np.sum(self.majorant_coeffs(rho)))

    def majorant_norm(self, rho: float | None = None) -> float:
        """Certified upper bound for the sup norm on the radius-rho ball."""
        return self.poly_majorant(rho) + self.tail_bound

    def sample_sup(self, rho: float | None = None, n: int = 256) -> float:
        """Lower bound for the sup norm: max of the polynomial part over boundary samples.

        For d = 1 the maximum principle puts the sup of the represented
        polynomial on the circle |z - a| = rho, so evenly spaced boundary
        angles give a deterministic, rapidly tight lower bound.
        """
        rho = self.radius if rho is None else float(rho)
        if rho > self.radius * (1 + 1e-12):
            raise BudgetError(f"rho={rho} exceeds validity radius {self.radius}")
        theta = 2 * np.pi * np.arange(n) / n
        if self.dim == 1:
            pts = self.anchor + rho * np.exp(1j * theta)
        else:
            phi = np.pi * (np.sqrt(5) - 1) * np.arange(n)  # incommensurate second angle
            u = np.cos(theta / 4.0)
            v = np.sin(theta / 4.0)
            pts = np.stack(
                [
                    self.anchor[0] + rho * u * np.exp(1j * theta),
                    self.anchor[1] + rho * v * np.exp(1j * phi),
                ],
                axis=-1,
            )
        vals = self.eval(pts)
        return float(np.max(self.space.norm(vals)))

    # -- evaluation ---------------------------------------------------------

    def eval(self, points) -> np.ndarray:
        """Evaluate the stored polynomial part at ``points``.

        ``points`` is a complex array of shape (...,) for d = 1 or (..., 2)
        for d = 2; the result has the coefficient-space shape appended.
        """
        n = self.degree_bound
        if self.dim == 1:
            w = np.asarray(points, dtype=complex) - self.anchor
            vand = w[..., None] ** np.arange(n + 1)
            return np.tensordot(vand, self.coeffs, axes=([-1], [0]))
        pts = np.asarray(points, dtype=complex)
        w0 = pts[..., 0] - self.anchor[0]
        w1 = pts[..., 1] - self.anchor[1]
        v0 = w0[..., None] ** np.arange(n + 1)
        v1 = w1[..., None] ** np.arange(n + 1)
        partial = np.tensordot(v1, self.coeffs, axes=([-1], [1]))  # (..., i) + space shape
        weighted = v0.reshape(v0.shape + (1,) * len(self.space.shape)) * partial
        return np.sum(weighted, axis=w0.ndim)

    # -- structural operations ---------------------------------------------

    def restrict(self, new_radius: float) -> "TruncatedSeries":
        """Shrink the validity radius.  The tail bound never increases."""
        if new_radius > self.radius * (1 + 1e-12):
            raise StructureError("restrict() cannot grow the radius")
        return TruncatedSeries(
            self.anchor, self.degree_bound, self.coeffs,
            float(min(new_radius, self.radius)), self.tail_bound, self.space, self.dim,
        )

    def truncate(self, new_bound: int) -> "TruncatedSeries":
        """Lower the degree bound; dropped coefficients feed the tail bound."""
        if new_bound >= self.degree_bound:
            return self
        n = new_bound
        dropped = 0.0
        if self.dim == 1:
            dropped = float(np.sum(self.majorant_coeffs()[n + 1:]))
            coeffs = self.coeffs[: n + 1]
        else:
            mask_i, mask_j = np.meshgrid(np.arange(self.degree_bound + 1),
                                         np.arange(self.degree_bound + 1), indexing="ij")
            over = mask_i + mask_j > n
            norms = self.coeff_norms()
            pw = self.radius ** (mask_i + mask_j)
            dropped = float(np.sum((norms * pw)[over]))
            coeffs = self.coeffs[: n + 1, : n + 1].copy()
            ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
            coeffs[ii + jj > n] = 0.0
        return TruncatedSeries(self.anchor, n, np.array(coeffs), self.radius,
                               self.tail_bound + dropped, self.space, self.dim)

    def with_tail(self, extra: float) -> "TruncatedSeries":
        if extra < 0:
            raise StructureError("tail increments must be nonnegative")
        return TruncatedSeries(self.anchor, self.degree_bound, self.coeffs,
                               self.radius, self.tail_bound + extra, self.space, self.dim)

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return linear_combination(self, other, 1.0, 1.0)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return linear_combination(self, other, 1.0, -1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return multiply(self, other)
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    def scale(self, alpha) -> "TruncatedSeries":
        return TruncatedSeries(self.anchor, self.degree_bound, self.coeffs * complex(alpha),
                               self.radius, abs(complex(alpha)) * self.tail_bound,
                               self.space, self.dim)


# ---------------------------------------------------------------------------
# ring operations
# ---------------------------------------------------------------------------

def _check_compatible(a: TruncatedSeries, b: TruncatedSeries):
    if a.dim != b.dim:
        raise StructureError("model dimension mismatch")
    if _anchor_key(a.anchor) != _anchor_key(b.anchor):
        raise StructureError(f"anchor mismatch: {a.anchor} vs {b.anchor}")
    if a.space != b.space:
        raise StructureError(f"coefficient space mismatch: {a.space} vs {b.space}")


def linear_combination(a: TruncatedSeries, b: TruncatedSeries,
                       alpha=1.0, beta=1.0) -> TruncatedSeries:
    """``alpha * a + beta * b`` with tail ``|alpha| tau_a + |beta| tau_b``."""
    _check_compatible(a, b)
    radius = min(a.radius, b.radius)
    n = min(a.degree_bound, b.degree_bound)
    a = a.truncate(n)
    b = b.truncate(n)
    coeffs = complex(alpha) * a.coeffs + complex(beta) * b.coeffs
    tail = abs(complex(alpha)) * a.tail_bound + abs(complex(beta)) * b.tail_bound
    return TruncatedSeries(a.anchor, n, coeffs, radius, tail, a.space, a.dim)


def multiply(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Truncated Cauchy product (noncommutative for matrix coefficients).

    The tail bound is ``kappa * (M_a tau_b + M_b tau_a + tau_a tau_b +
    overflow)`` where the M's are the factors' polynomial majorants at the
    result radius, ``overflow`` is the majorant mass of the exact product
    beyond the degree bound, and kappa is the submultiplicativity constant
    of the coefficient norm (1 for scalars, 1/2 for the doubled matrix
    norm).
    """
    _check_compatible(a, b)
    if a.space.kind == "vector":
        raise StructureError("vector coefficients admit no ring product")
    if a.space.kind == "matrix" and a.space.dim != b.space.dim:
        raise StructureError("matrix dimension mismatch")
    radius = min(a.radius, b.radius)
    n = min(a.degree_bound, b.degree_bound)
    a = a.truncate(n)
    b = b.truncate(n)

    if a.dim == 1:
        k = n + 1
        if a.space.kind == "scalar":
            full = np.convolve(a.coeffs, b.coeffs)
        else:
            prod = np.einsum("iab,jbc->ijac", a.coeffs, b.coeffs)
            m = a.space.dim
            full = (_conv_matrix(k) @ prod.reshape(k * k, m * m)).reshape(2 * k - 1, m, m)
        coeffs = np.ascontiguousarray(full[: k])
        # overflow of the exact polynomial product beyond degree n
        am = a.majorant_coeffs(radius)
        bm = b.majorant_coeffs(radius)
        overflow = float(np.sum(np.convolve(am, bm)[k:]))
        ma, mb = float(np.sum(am)), float(np.sum(bm))
    else:
        # d = 2 is not performance critical; a direct loop keeps it readable
        k = n + 1
        shape = (2 * k - 1, 2 * k - 1) + a.space.shape
        full = np.zeros(shape, dtype=complex)
        for i in range(k):
            for j in range(k - i):
                if not np.any(a.coeffs[i, j]):
                    continue
                for p in range(k):
                    for q in range(k - p):
                        full[i + p, j + q] = full[i + p, j + q] + _coeff_prod(
                            a.coeffs[i, j], b.coeffs[p, q], a.space)
        coeffs = full[: k, : k].copy()
        deg_i, deg_j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        coeffs[deg_i + deg_j > n] = 0.0
        norms = a.space.norm(full)
        di, dj = np.meshgrid(np.arange(2 * k - 1), np.arange(2 * k - 1), indexing="ij")
        pw = radius ** (di + dj)
        overflow = float(np.sum((norms * pw)[di + dj > n]))
        ma, mb = a.poly_majorant(radius), b.poly_majorant(radius)

    kappa = a.space.submult_factor
    tail = kappa * (ma * b.tail_bound + mb * a.tail_bound
                    + a.tail_bound * b.tail_bound + overflow)
    return TruncatedSeries(a.anchor, n, coeffs, radius, tail, a.space, a.dim)


def _coeff_prod(x, y, space: CoefficientSpace):
    return x @ y if space.kind == "matrix" else x * y


def bracket(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Pointwise commutator ``a b - b a`` for matrix-valued series."""
    return linear_combination(multiply(a, b), multiply(b, a), 1.0, -1.0)


def invert(a: TruncatedSeries, budget: float = 0.95,
           min_radius_factor: float = 1e-6) -> TruncatedSeries:
    """Pointwise multiplicative inverse by a Neumann series.

    Requires the constant coefficient ``a_0`` to be invertible and
    ``norm(a_0^{-1}) * (majorant of a - a_0 + tail)`` to be below ``budget``
    on the working radius; the radius is shrunk geometrically (recorded in
    the result) until the budget holds.
    """
    if a.space.kind == "vector":
        raise StructureError("vector coefficients admit no inverse")
    c0 = a.coeffs[(0,) * a.dim]
    if a.space.kind == "matrix":
        try:
            c0_inv = np.linalg.inv(c0)
        except np.linalg.LinAlgError:
            raise BudgetError("constant coefficient is singular") from None
        inv_norm = float(a.space.norm(c0_inv))
    else:
        if c0 == 0:
            raise BudgetError("constant coefficient is zero")
        c0_inv = 1.0 / c0
        inv_norm = abs(c0_inv)

    kappa = a.space.submult_factor
    tilde = a - TruncatedSeries.constant(c0, a.anchor, a.radius, a.space, a.degree_bound, a.dim)
    radius = a.radius
    floor = a.radius * min_radius_factor
    while True:
        q = kappa * inv_norm * (tilde.poly_majorant(radius) + a.tail_bound)
        if q < budget:
            break
        radius *= 0.75
        if radius < floor:
            raise BudgetError(
                f"Neumann budget unattainable: needs norm(a0^-1)*majorant < {budget}, "
                f"got {q:.3g} at radius {radius / 0.75:.3g} (minimum {floor:.3g})")

    at = _rescale_variable(tilde.restrict(radius).with_tail(a.tail_bound), radius)
    u = TruncatedSeries.constant(c0_inv, a.anchor, at.radius, a.space,
                                 a.degree_bound, a.dim) * at
    one = TruncatedSeries.unit(a.anchor, at.radius, a.space, a.degree_bound, a.dim)
    # Horner for the geometric series: S <- 1 - u S fixes one more degree per pass
    s = one
    for _ in range(a.degree_bound + 1):
        s = one - multiply(u, s)
    geo_rem = q ** (a.degree_bound + 2) / (kappa * (1.0 - q))
    s = s.with_tail(geo_rem)
    out = multiply(s, TruncatedSeries.constant(c0_inv, a.anchor, at.radius, a.space,
                                               a.degree_bound, a.dim))
    return _rescale_variable(out, 1.0 / radius)


def _rescale_variable(a: TruncatedSeries, lam: float) -> TruncatedSeries:
    """Exact change of variable z - a -> lam * (z - a): coefficients pick up
    lam^|k|, the radius divides by lam.  Majorant norms are invariant; the
    point is floating-point conditioning of compositions."""
    n = a.degree_bound
    if a.dim == 1:
        pw = lam ** np.arange(n + 1)
        coeffs = a.coeffs * pw.reshape((n + 1,) + (1,) * len(a.space.shape))
    else:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        pw = lam ** (i + j)
        coeffs = a.coeffs * pw.reshape((n + 1, n + 1) + (1,) * len(a.space.shape))
    return TruncatedSeries(a.anchor, n, coeffs, a.radius / lam, a.tail_bound,
                           a.space, a.dim)


def _exp_order(m: float, rel: float = _EXP_REL_TOL) -> int:
    target = rel * max(1.0, math.exp(min(m, 50.0)))
    j = 1
    term = m
    while j < 80:
        nxt = term * m / (j + 1)
        if nxt / max(1.0 - m / (j + 3), 1e-9) < target and j >= 4:
            return j + 1
        term = nxt
        j += 1
    return j


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp(a) with the factorial remainder folded into the tail bound.

    Powers obey ``norm(a^j) <= kappa^{j-1} m^j`` (kappa the norm's
    submultiplicativity constant), so the remainder uses q = kappa * m.
    """
    if a.space.kind == "vector":
        raise StructureError("exp needs a ring of coefficients")
    kappa = a.space.submult_factor
    q = kappa * a.majorant_norm()
    j_ord = _exp_order(q)
    lam = a.radius  # unit-radius variable keeps the Horner well conditioned
    au = _rescale_variable(a, lam)
    one = TruncatedSeries.unit(a.anchor, au.radius, a.space, a.degree_bound, a.dim)
    s = one
    for j in range(j_ord, 0, -1):
        s = one + multiply(au, s).scale(1.0 / j)
    term = q ** (j_ord + 1) / math.factorial(j_ord + 1)
    rem = term / (kappa * max(1.0 - q / (j_ord + 2), 1e-9))
    return _rescale_variable(s, 1.0 / lam).with_tail(rem)


def series_log(a: TruncatedSeries) -> TruncatedSeries:
    """Principal log of a series near the unit; alternating Mercator series.

    The branch budget ``majorant(a - 1) < 1`` must hold on the series radius;
    callers with germ structure can bond deeper and retry.
    """
    if a.space.kind == "vector":
        raise StructureError("log needs a ring of coefficients")
    one = TruncatedSeries.unit(a.anchor, a.radius, a.space, a.degree_bound, a.dim)
    mw = (a - one).majorant_norm()
    if mw >= 0.999:
        raise BudgetError(f"log branch budget violated: majorant(a - 1) = {mw:.4g} >= 1")
    kappa = a.space.submult_factor
    q = kappa * mw
    j_ord = max(a.degree_bound + 1, 8)
    while q ** (j_ord + 1) / ((j_ord + 1) * (1.0 - q)) > _EXP_REL_TOL * max(1.0, q) and j_ord < 400:
        j_ord += 8
    lam = a.radius
    au = _rescale_variable(a, lam)
    w = au - TruncatedSeries.unit(a.anchor, au.radius, a.space, a.degree_bound, a.dim)
    # log(1+w) = w (1 - w (1/2 - w (1/3 - ...)))
    s = TruncatedSeries.constant(1.0 / j_ord * a.space.one(), a.anchor, au.radius,
                                 a.space, a.degree_bound, a.dim)
    for j in range(j_ord - 1, 0, -1):
        cj = TruncatedSeries.constant(a.space.one() / j, a.anchor, au.radius,
                                      a.space, a.degree_bound, a.dim)
        s = cj - multiply(w, s)
    out = multiply(w, s)
    rem = q ** (j_ord + 1) / (kappa * (j_ord + 1) * (1.0 - q))
    return _rescale_variable(out, 1.0 / lam).with_tail(rem)


# ---------------------------------------------------------------------------
# Cauchy-formula coefficient extraction
# ---------------------------------------------------------------------------

def cauchy_coefficients(f, anchor, radius, k_max, n_points=256, direction=1.0,
                        radius_factor=0.8, space: CoefficientSpace | None = None):
    """Taylor coefficients of ``z -> f(anchor + z * direction)`` by circle quadrature.

    Uniform trapezoid quadrature on ``|z| = radius_factor * radius`` (a
    discrete Fourier transform of the samples) returns ``beta_0..beta_{k_max}``
    together with the sampled circle sup, so callers can check the bound
    ``norm(beta_k) <= sup / r_q^k``.

    Requires ``n_points >= 4 * k_max``; f must be bounded holomorphic on the
    open disc of the given radius around the anchor in the given direction.
    """
    if n_points < 4 * k_max:
        raise StructureError(f"need n_points >= 4*k_max, got {n_points} < {4 * k_max}")
    rq = radius_factor * radius
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    zs = rq * np.exp(1j * theta)
    samples = np.asarray([f(anchor + z * direction) for z in zs], dtype=complex)
    if not np.all(np.isfinite(samples.view(float))):
        raise EvaluationError("evaluator returned non-finite samples on the quadrature circle")
    hat = np.fft.fft(samples, axis=0) / n_points
    ks = np.arange(k_max + 1)
    shape = (k_max + 1,) + (1,) * (samples.ndim - 1)
    betas = hat[: k_max + 1] / (rq ** ks).reshape(shape)
    sp = space if space is not None else _infer_space(samples.shape[1:])
    circle_sup = float(np.max(sp.norm(samples)))
    return betas, circle_sup, rq


def _infer_space(shape: tuple) -> CoefficientSpace:
    if shape == ():
        return scalar_space()
    if len(shape) == 1:
        return vector_space(shape[0])
    if len(shape) == 2 and shape[0] == shape[1]:
        return matrix_space(shape[0])
    raise StructureError(f"cannot infer coefficient space from value shape {shape}")


# ---------------------------------------------------------------------------
# JSON serialization (exact round trip at double precision)
# ---------------------------------------------------------------------------

def _c2p(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def series_to_json(s: TruncatedSeries) -> dict:
    """JSON document {anchor, degree_bound, coeffs, radius, tail_bound, ...}.

    Every complex number is an [re, im] pair; Python's repr-based float
    serialization makes the round trip exact at full double precision.
    """
    if s.dim == 1:
        anchor = _c2p(s.anchor)
        indices = [(k,) for k in range(s.degree_bound + 1)]
    else:
        anchor = [_c2p(z) for z in np.asarray(s.anchor)]
        indices = [(i, j) for i in range(s.degree_bound + 1)
                   for j in range(s.degree_bound + 1 - i)]
    entries = []
    for idx in indices:
        value = s.coeffs[idx if s.dim == 2 else idx[0]]
        flat = np.asarray(value, dtype=complex).reshape(-1)
        entries.append([list(idx)] + [_c2p(z) for z in flat])
    return {
        "anchor": anchor,
        "degree_bound": s.degree_bound,
        "coeffs": entries,
        "radius": float(s.radius),
        "tail_bound": float(s.tail_bound),
        "space": {"kind": s.space.kind, "dim": s.space.dim},
        "dim": s.dim,
    }


def series_from_json(doc: dict) -> TruncatedSeries:
    space = CoefficientSpace(doc["space"]["kind"], doc["space"]["dim"])
    dim = int(doc.get("dim", 1))
    if dim == 1:
        anchor = complex(doc["anchor"][0], doc["anchor"][1])
    else:
        anchor = np.array([complex(p[0], p[1]) for p in doc["anchor"]])
    n = int(doc["degree_bound"])
    coeffs = np.zeros((n + 1,) * dim + space.shape, dtype=complex)
    for entry in doc["coeffs"]:
        idx = tuple(int(q) for q in entry[0])
        flat = np.array([complex(p[0], p[1]) for p in entry[1:]])
        coeffs[idx if dim == 2 else idx[0]] = flat.reshape(space.shape)
    return TruncatedSeries(anchor, n, coeffs, float(doc["radius"]),
                           float(doc["tail_bound"]), space, dim)


def series_json_dumps(s: TruncatedSeries) -> str:
    return json.dumps(series_to_json(s), sort_keys=True, separators=(",", ":"))


def series_json_loads(text: str) -> TruncatedSeries:
    return series_from_json(json.loads(text))
