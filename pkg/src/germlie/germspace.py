"""Graded neighborhood bases and the (LB)-space of germs around a compact set.

A :class:`GermSpace` fixes a finite anchor set K in C^d, a base radius rho_0
and a ratio r strictly below 1/(2e), and grades the neighborhoods

    U_n  =  union of the open balls of radius rho_n = rho_0 * r^n around K,

so the seminorms p_n(x) = |x| / rho_n satisfy p_n = r * p_{n+1}.  Bounded
holomorphic functions on U_n are represented per anchor by truncated series
(:class:`BHolElement`) and germs identify elements across levels after
bonding (restriction, operator norm at most one).

The module turns the structural facts about this scale of Banach spaces into
executable checks:

* ``family_convergence_check`` -- the absolute-convergence estimate
  ``sum_k s_k r^k <= R/(R - 2 e r) * sup`` for uniformly bounded families on
  K + B_R, valid for r < R/(2e), with an executable negative control beyond
  that budget;
* ``compact_regularity_check`` -- the ball inclusion
  ``B1(E_n) & B_delta(E_l) <= B_eps(E_{n+1})`` with the explicit
  ``delta = (1 - 2 e r) * r^{k0} * eps / 2`` where k0 truncates the majorant
  tail of a generated norm-one family below eps/2;
* ``union_glue_check`` -- gluing compatible extensions across a union of two
  anchor sets, the finite-union strategy for compact sets in charts.

All checks are pure functions of their inputs plus an explicit seeded
random generator, and emit :class:`germlie.reports.Report` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, EvaluationError, StructureError
from .reports import Report
from .series import (
    CoefficientSpace,
    TruncatedSeries,
    cauchy_coefficients,
    scalar_space,
)

__all__ = [
    "RATIO_CEILING",
    "GermSpace",
    "BHolElement",
    "Germ",
    "bond",
    "germ_distance",
    "germs_equal",
    "factorize",
    "derivative_sups",
    "family_convergence_check",
    "unit_majorant_family",
    "compact_regularity_check",
    "in_regularity_hypothesis",
    "union_glue_check",
    "ratio_topology_spotcheck",
]

RATIO_CEILING = 1.0 / (2.0 * math.e)

GERM_EQ_TOL = 1e-9
COHERENCE_TOL = 1e-9


@dataclass(frozen=True)
class GermSpace:
    """The graded basis (U_n) of ball neighborhoods of a finite anchor set."""

    anchors: tuple
    base_radius: float = 1.0
    ratio: float = 0.1
    levels: int = 6
    space: CoefficientSpace = field(default_factory=scalar_space)
    degree_bound: int = 12
    dim: int = 1

    def __post_init__(self):
        anchors = tuple(complex(a) for a in np.atleast_1d(np.asarray(self.anchors, complex))) \
            if self.dim == 1 else tuple(tuple(map(complex, a)) for a in self.anchors)
        if not anchors:
            raise StructureError("anchor set must be nonempty")
        object.__setattr__(self, "anchors", anchors)
        if not 0.0 < self.ratio < RATIO_CEILING:
            raise BudgetError(
                f"ratio must lie strictly inside (0, 1/(2e)) = (0, {RATIO_CEILING:.6g}); "
                f"got {self.ratio}")
        if self.base_radius <= 0:
            raise StructureError("base radius must be positive")
        if self.levels < 2:
            raise StructureError("need at least two levels")

    def radius(self, level: int) -> float:
        if not 0 <= level < self.levels:
            raise StructureError(f"level {level} outside 0..{self.levels - 1}")
        return self.base_radius * self.ratio ** level

    def seminorm(self, level: int, x) -> float:
        return abs(complex(x)) / self.radius(level)

    def zero_element(self, level: int) -> "BHolElement":
        reps = tuple(
            TruncatedSeries.zero(a, self.radius(level), self.space, self.degree_bound, self.dim)
            for a in self.anchors)
        return BHolElement(self, level, reps)

    def constant_element(self, value, level: int) -> "BHolElement":
        reps = tuple(
            TruncatedSeries.constant(value, a, self.radius(level), self.space,
                                     self.degree_bound, self.dim)
            for a in self.anchors)
        return BHolElement(self, level, reps)

    def element_from_coeff_lists(self, per_anchor_pairs, level: int) -> "BHolElement":
        reps = tuple(
            TruncatedSeries.from_coeff_list(pairs, a, self.radius(level), self.space,
                                            self.degree_bound, self.dim)
            for a, pairs in zip(self.anchors, per_anchor_pairs))
        return BHolElement(self, level, reps)

    def element_from_function(self, f, level: int, check_coherence=False) -> "BHolElement":
        """Per-anchor Taylor representation of an entire-ish evaluator.

        Thin wrapper over :func:`factorize`; see there for the bound checks.
        """
        return factorize(self, f, level, check_coherence=check_coherence)

    def sample_points(self, level: int, count: int, interior: float = 0.5) -> np.ndarray:
        """Deterministic points inside U_level (d = 1), spread over all anchors."""
        if self.dim != 1:
            raise StructureError("sample_points is d = 1 only")
        rho = self.radius(level) * interior
        per = -(-count // len(self.anchors))
        pts = []
        for i, a in enumerate(self.anchors):
            theta = 2 * np.pi * (np.arange(per) + 0.13 * (i + 1)) / per
            rr = rho * (0.35 + 0.65 * ((np.arange(per) * 0.618034 + 0.21 * i) % 1.0))
            pts.append(a + rr * np.exp(1j * theta))
        return np.concatenate(pts)[:count]


@dataclass(frozen=True)
class BHolElement:
    """A bounded holomorphic function on U_n, one truncated series per anchor.

    ``norm_upper`` caches the majorant bound for the sup over U_n (max over
    anchors).  On overlapping anchor balls the per-anchor series must agree
    at shared sample points -- they represent one function.
    """

    parent: GermSpace
    level: int
    reps: tuple

    def __post_init__(self):
        if len(self.reps) != len(self.parent.anchors):
            raise StructureError("one series per anchor required")
        rho = self.parent.radius(self.level)
        for s in self.reps:
            if s.radius > rho * (1 + 1e-12) or s.radius <= 0:
                raise StructureError("series radius must not exceed the level radius")
            if s.space != self.parent.space:
                raise StructureError("coefficient space mismatch with parent")

    @property
    def norm_upper(self) -> float:
        return max(s.majorant_norm() for s in self.reps)

    def sample_sup(self, n: int = 128) -> float:
        return max(s.sample_sup(s.radius, n) for s in self.reps)

    def eval(self, points) -> np.ndarray:
        """Evaluate using, per point, the series of the nearest anchor."""
        pts = np.asarray(points, dtype=complex)
        anchors = np.asarray(self.parent.anchors)
        dist = np.abs(pts[..., None] - anchors)
        pick = np.argmin(dist, axis=-1)
        out = np.zeros(pts.shape + self.parent.space.shape, dtype=complex)
        for i in range(len(anchors)):
            mask = pick == i
            if np.any(mask):
                out[mask] = self.reps[i].eval(pts[mask])
        return out

    def coherence_defect(self, n: int = 32) -> float:
        """Largest disagreement of per-anchor series at shared interior points."""
        worst = 0.0
        rho = self.parent.radius(self.level)
        anchors = self.parent.anchors
        for i in range(len(anchors)):
            for j in range(i + 1, len(anchors)):
                a, b = complex(anchors[i]), complex(anchors[j])
                gap = abs(b - a)
                if gap >= self.reps[i].radius + self.reps[j].radius:
                    continue
                mid = 0.5 * (a + b)
                spread = 0.25 * max(self.reps[i].radius + self.reps[j].radius - gap, 0.0)
                theta = 2 * np.pi * np.arange(n) / n
                pts = mid + spread * 0.5 * np.exp(1j * theta)
                keep = (np.abs(pts - a) < self.reps[i].radius) & \
                       (np.abs(pts - b) < self.reps[j].radius)
                if not np.any(keep):
                    continue
                va = self.reps[i].eval(pts[keep])
                vb = self.reps[j].eval(pts[keep])
                worst = max(worst, float(np.max(self.parent.space.norm(va - vb))))
        return worst

    # algebra (levelwise, pointwise)
    def _zip(self, other, fn):
        if self.parent is not other.parent and self.parent != other.parent:
            raise StructureError("elements live on different germ spaces")
        if self.level != other.level:
            raise StructureError("bond to a common level first")
        return BHolElement(self.parent, self.level,
                           tuple(fn(a, b) for a, b in zip(self.reps, other.reps)))

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def scale(self, alpha):
        return BHolElement(self.parent, self.level, tuple(s.scale(alpha) for s in self.reps))

    def map_reps(self, fn):
        return BHolElement(self.parent, self.level, tuple(fn(s) for s in self.reps))


@dataclass(frozen=True)
class Germ:
    """An equivalence class of elements across levels (equal after bonding)."""

    element: BHolElement

    @property
    def level(self) -> int:
        return self.element.level

    @property
    def parent(self) -> GermSpace:
        return self.element.parent

    def at_level(self, level: int) -> BHolElement:
        return bond(self.element, level)

    def __eq__(self, other):
        if not isinstance(other, Germ):
            return NotImplemented
        return germs_equal(self, other)

    def __hash__(self):
        raise TypeError("germs compare by tolerance and are unhashable")


def bond(e: BHolElement, level: int) -> BHolElement:
    """Restriction to a deeper level U_level; norm_upper never increases."""
    if level < e.level:
        raise StructureError(f"cannot bond upward: {e.level} -> {level}")
    if level == e.level:
        return e
    rho = e.parent.radius(level)
    return BHolElement(e.parent, level,
                       tuple(s.restrict(min(rho, s.radius)) for s in e.reps))


def germ_distance(x, y) -> float:
    """Coefficientwise distance after bonding to the deeper of the two levels.

    Coefficients are compared in the units of the comparison level, i.e.
    the distance is the majorant ``sum_k norm(c_k - c'_k) rho^k`` maximized
    over anchors.  This bounds the sup-norm distance of the representatives
    on U_level, which is the sense in which two germs are one germ.
    """
    ex = x.element if isinstance(x, Germ) else x
    ey = y.element if isinstance(y, Germ) else y
    lvl = max(ex.level, ey.level)
    ex, ey = bond(ex, lvl), bond(ey, lvl)
    worst = 0.0
    for a, b in zip(ex.reps, ey.reps):
        na = min(a.degree_bound, b.degree_bound)
        a, b = a.truncate(na), b.truncate(na)
        rho = min(a.radius, b.radius)
        diff = ex.parent.space.norm(a.coeffs - b.coeffs)
        if a.dim == 1:
            dist = float(np.sum(diff * rho ** np.arange(na + 1)))
        else:
            i, j = np.meshgrid(np.arange(na + 1), np.arange(na + 1), indexing="ij")
            dist = float(np.sum(diff * rho ** (i + j)))
        worst = max(worst, dist)
    return worst


def germs_equal(x, y, tol: float = GERM_EQ_TOL) -> bool:
    return germ_distance(x, y) <= tol


# ---------------------------------------------------------------------------
# factorization through the Banach step (Cauchy coefficient recovery)
# ---------------------------------------------------------------------------

def _circle_samples(f, anchor, radius, n_points, space):
    """Normalized quadrature data on |z - a| = radius: hat_k = beta_k * radius^k
    (aliased), plus the sampled circle sup."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    zs = anchor + radius * np.exp(1j * theta)
    samples = np.asarray([f(z) for z in zs], dtype=complex)
    if not np.all(np.isfinite(samples.view(float))):
        raise EvaluationError("evaluator returned non-finite samples on the "
                              "quadrature circle")
    hat = np.fft.fft(samples, axis=0) / n_points
    return hat, float(np.max(space.norm(samples)))

def factorize(space: GermSpace, f, level: int, n_points: int = 256,
              bound_tol: float = 1e-6, check_coherence: bool = False) -> BHolElement:
    """Represent a bounded holomorphic evaluator on U_level per anchor.

    Per anchor the Taylor coefficients are recovered by circle quadrature at
    radius 0.8 * rho_level.  Three data-driven certificates guard the
    Cauchy-formula factorization (each fails for maps that are not
    boundedly holomorphic on the claimed ball):

    * coefficient consistency: quadrature at a second radius must recover
      the same leading coefficients,
    * a fresh-point residual check of the reconstruction against f,
    * the coefficient bound ``norm(beta_k) <= circle_sup / r_q^k``.

    The returned series are certified on the interior radius 0.64 *
    rho_level; their tail bounds sum the measured above-degree quadrature
    coefficients there (plus the geometric aliasing remainder), so constants
    come back with norm exactly the constant's norm.
    """
    if space.dim != 1:
        raise StructureError("factorize is implemented for d = 1")
    rho = space.radius(level)
    n = space.degree_bound
    reps = []
    for a in space.anchors:
        rq, rq2 = 0.8 * rho, 0.5 * rho
        hat, circle_sup = _circle_samples(f, a, rq, n_points, space.space)
        hat2, _ = _circle_samples(f, a, rq2, n_points, space.space)
        scale = max(1.0, circle_sup)
        r_cert = 0.8 * rq
        ks_low = np.arange(n + 1).reshape((n + 1,) + (1,) * (hat.ndim - 1))
        betas = hat[: n + 1] / rq ** ks_low
        betas2 = hat2[: n + 1] / rq2 ** ks_low

        disc = space.space.norm(betas - betas2) * r_cert ** np.arange(n + 1)
        if np.max(disc) > bound_tol * scale:
            k_bad = int(np.argmax(disc))
            raise EvaluationError(
                "not boundedly holomorphic at claimed radius: coefficient "
                f"{k_bad} disagrees across quadrature radii by {disc[k_bad]:.3g}")

        norms_low = space.space.norm(betas)
        slack = norms_low - circle_sup / rq ** np.arange(n + 1)
        if np.any(slack > bound_tol * scale):
            k_bad = int(np.argmax(slack))
            raise EvaluationError(
                f"not boundedly holomorphic at claimed radius: coefficient {k_bad} "
                f"violates the Cauchy bound by {slack[k_bad]:.3g}")

        # data-driven tail: measured above-degree quadrature mass scaled to
        # the certified radius, plus the geometric aliasing remainder
        q = r_cert / rq
        tail = float(np.sum(space.space.norm(hat[n + 1:])
                            * q ** np.arange(n + 1, n_points)))
        alias = circle_sup * q ** n_points / (1.0 - q)
        tail += 2.0 * alias
        series = TruncatedSeries(a, n, np.ascontiguousarray(betas),
                                 r_cert, tail, space.space, space.dim)

        probe = a + 0.5 * r_cert * np.exp(2j * np.pi * (np.arange(16) + 0.37) / 16)
        want = np.stack([np.asarray(f(z), dtype=complex) for z in probe])
        resid = float(np.max(space.space.norm(series.eval(probe) - want)))
        if resid > tail + bound_tol * scale:
            raise EvaluationError(
                "not boundedly holomorphic at claimed radius: reconstruction "
                f"misses f by {resid:.3g} (certified tail {tail:.3g})")
        reps.append(series)
    el = BHolElement(space, level, tuple(reps))
    if check_coherence:
        defect = el.coherence_defect()
        if defect > COHERENCE_TOL:
            raise EvaluationError(f"per-anchor series disagree on overlaps by {defect:.3g}")
    return el


# ---------------------------------------------------------------------------
# derivative sups and the family convergence estimate
# ---------------------------------------------------------------------------

def derivative_sups(family, normalized_radius: float | None = None) -> np.ndarray:
    """s_k = sup over the family and anchors of norm(c_k) (exact for d = 1).

    With ``normalized_radius`` = rho the coefficients are rescaled to
    ``norm(c_k) * rho^k``, i.e. read in the unit-ball coordinates of the
    level whose radius is rho.
    """
    family = list(family)
    if not family:
        raise StructureError("family must be nonempty")
    n = min(min(s.degree_bound for s in el.reps) for el in family)
    out = np.zeros(n + 1)
    for el in family:
        for s in el.reps:
            norms = s.space.norm(s.coeffs[: n + 1]) if s.dim == 1 else None
            if norms is None:
                raise StructureError("derivative_sups is d = 1 only")
            if normalized_radius is not None:
                norms = norms * normalized_radius ** np.arange(n + 1)
            out = np.maximum(out, norms)
    return out


def _family_tail_remainder(family, r_over_rho: float) -> float:
    """Certified bound for sum_{k > N} s_k * r^k coming from the tail bounds.

    A tail function bounded by tau on the radius-rho ball has k-th
    normalized coefficient at most tau (Cauchy estimate), so the remainder
    is at most tau_max * q^{N+1} / (1 - q) with q = r / rho < 1.
    """
    tau = max(max(s.tail_bound for s in el.reps) for el in family)
    n = min(min(s.degree_bound for s in el.reps) for el in family)
    q = r_over_rho
    if q >= 1.0:
        return math.inf if tau > 0 else 0.0
    return tau * q ** (n + 1) / (1.0 - q)


def family_convergence_check(family, R: float, r: float,
                             enforce_ratio: bool = True,
                             tol: float = 1e-12,
                             sup_samples: int = 512) -> Report:
    """Check ``sum_k s_k r^k <= R/(R - 2 e r) * sup`` for a bounded family.

    ``family`` is a list of :class:`BHolElement` whose series all have
    radius R around their anchors.  The left side carries a certified
    remainder for the invisible part beyond the degree bound; the right side
    uses the sampled sup (a lower bound for the true sup), so a pass is
    meaningful and not an artifact of majorant slack.

    For ``r >= R/(2e)`` the estimate has no content; with ``enforce_ratio``
    the check raises :class:`BudgetError`, otherwise it evaluates the raw
    inequality and reports the (expected) failure.
    """
    params = {"R": R, "r": r, "family_size": len(list(family))}
    family = list(family)
    if enforce_ratio and not r < R / (2.0 * math.e):
        raise BudgetError(
            f"family convergence estimate needs r < R/(2e) = {R / (2 * math.e):.6g}, got r = {r}")
    s_k = derivative_sups(family)
    lhs = float(np.sum(s_k * r ** np.arange(len(s_k))))
    lhs_rem = _family_tail_remainder(family, r / R)
    sup = max(el.sample_sup(sup_samples) for el in family)
    denom = R - 2.0 * math.e * r
    factor = R / denom if denom > 0 else -math.inf
    rhs = factor * sup
    passed = (denom > 0) and (lhs + lhs_rem <= rhs + tol)
    rep = Report(check="family_convergence", params=params, trials=1)
    rep.extras = {"lhs": lhs, "lhs_remainder": lhs_rem, "rhs": rhs,
                  "factor": factor, "sup_sampled": sup}
    rep.note_margin(rhs - lhs - lhs_rem if denom > 0 else -math.inf)
    if not passed:
        rep.fail({"lhs": lhs + lhs_rem, "rhs": rhs})
    return rep


# ---------------------------------------------------------------------------
# compact regularity (ball-inclusion criterion)
# ---------------------------------------------------------------------------

def unit_majorant_family(space: GermSpace, level: int, rng: np.random.Generator,
                         size: int = 64, include_monomials: bool = True) -> list:
    """Random polynomials scaled to unit majorant norm at ``level``.

    The monomial extreme rays ((z - a)/rho_n)^k are included by default;
    they span the extreme rays of the unit majorant ball at fixed degree and
    make the family sups s_k equal to the certified unit-ball values.
    """
    rho = space.radius(level)
    n = space.degree_bound
    family = []
    if include_monomials:
        for k in range(n + 1):
            coeff = space.space.one() if space.space.kind != "vector" else \
                np.eye(space.space.dim, dtype=complex)[0]
            per_anchor = [[(k, coeff / rho ** k)] for _ in space.anchors]
            family.append(space.element_from_coeff_lists(per_anchor, level))
    for _ in range(size):
        per_anchor = []
        for _a in space.anchors:
            ks = rng.integers(0, n + 1, size=rng.integers(1, 5))
            pairs = []
            for k in sorted(set(int(k) for k in ks)):
                raw = rng.standard_normal(space.space.shape or ()) + \
                    1j * rng.standard_normal(space.space.shape or ())
                pairs.append((k, raw / rho ** k))
            per_anchor.append(pairs)
        el = space.element_from_coeff_lists(per_anchor, level)
        m = el.norm_upper
        if m > 0:
            family.append(el.scale(1.0 / m))
    return family


def compact_regularity_check(space: GermSpace, n: int, ell: int, eps: float,
                             trials: int, rng: np.random.Generator,
                             family_size: int = 64,
                             slack: float = 1e-9) -> Report:
    """Property-test the inclusion B1(E_n) & B_delta(E_ell) <= B_eps(E_{n+1}).

    k0 is the smallest index whose certified family tail satisfies
    ``sum_{k > k0} s_k r^k <= eps/2`` over a generated norm-one test family
    at level n; then ``delta = (1 - 2 e r) * r^{k0} * eps / 2``.  Trials are
    random signed combinations of family members scaled to sit inside both
    certified balls (majorant at level n at most 1, majorant at level ell at
    most delta); a counterexample is a trial whose sampled sup at level n+1
    exceeds eps.
    """
    if not (0 <= n < ell < space.levels):
        raise StructureError(f"need 0 <= n < ell < levels, got n={n}, ell={ell}")
    if eps <= 0:
        raise StructureError("eps must be positive")
    r = space.ratio
    params = {"n": n, "ell": ell, "eps": eps, "r": r, "trials": trials,
              "degree_bound": space.degree_bound}
    rep = Report(check="compact_regularity", params=params)

    family = unit_majorant_family(space, n, rng, family_size)
    rho_n = space.radius(n)
    s_k = derivative_sups(family, normalized_radius=rho_n)
    tail_rem = _family_tail_remainder(family, r)  # normalized units: q = r
    nmax = len(s_k) - 1
    powers = r ** np.arange(nmax + 1)
    k0 = None
    for cand in range(nmax + 1):
        tail = float(np.sum(s_k[cand + 1:] * powers[cand + 1:])) + tail_rem
        if tail <= eps / 2.0:
            k0 = cand
            break
    if k0 is None:
        rep.status = "inconclusive"
        rep.extras = {"reason": f"no k0 within degree bound {nmax}: tail stays above eps/2"}
        return rep
    delta = (1.0 - 2.0 * math.e * r) * r ** k0 * eps / 2.0
    rep.extras = {"delta": delta, "k0": k0}

    rho_l = space.radius(ell)
    count = 0
    for _ in range(trials):
        weights = rng.standard_normal(len(family)) + 1j * rng.standard_normal(len(family))
        weights /= np.sum(np.abs(weights))
        el = family[0].scale(weights[0])
        for w, f in zip(weights[1:], family[1:]):
            el = el + f.scale(w)
        maj_n = el.norm_upper
        maj_l = bond(el, ell).norm_upper
        if maj_n <= 0:
            continue
        # largest feasible scaling keeping both certified constraints and
        # staying inside the family envelope s_k
        coeff_ratio = math.inf
        for srep in el.reps:
            cn = srep.space.norm(srep.coeffs) * rho_n ** np.arange(srep.degree_bound + 1)
            nz = cn > 0
            if np.any(nz):
                coeff_ratio = min(coeff_ratio, float(np.min(s_k[: len(cn)][nz] / cn[nz])))
        sigma = min(1.0 / maj_n, (delta / maj_l) if maj_l > 0 else math.inf, coeff_ratio)
        el = el.scale(0.999 * sigma)
        count += 1
        sampled = bond(el, n + 1).sample_sup(96)
        margin = eps - sampled
        rep.note_margin(margin)
        if sampled > eps + slack:
            rep.fail({"sampled_sup": sampled, "eps": eps,
                      "maj_n": el.norm_upper, "maj_l": bond(el, ell).norm_upper})
    rep.trials = count
    return rep


def in_regularity_hypothesis(space: GermSpace, el: BHolElement, ell: int,
                             delta: float) -> bool:
    """Certified membership test for the compact-regularity hypothesis set.

    Outside if the sampled sup (a lower bound for the true norm) already
    violates a ball; inside if the majorants certify both constraints.
    """
    if el.sample_sup() > 1.0 or bond(el, ell).sample_sup() > delta:
        return False
    return el.norm_upper <= 1.0 and bond(el, ell).norm_upper <= delta


# ---------------------------------------------------------------------------
# finite-union glueing strategy
# ---------------------------------------------------------------------------

def union_glue_check(space_a: GermSpace, space_b: GermSpace, level: int,
                     rng: np.random.Generator, trials: int = 20,
                     tol: float = 1e-9, incompatible: bool = False) -> Report:
    """Glue per-piece extensions over K' and K'' into one element over the union.

    Test functions are random polynomials (entire, so they extend to every
    level); for each trial the check verifies that the two restrictions
    agree on overlapping anchor balls and that the glued element reproduces
    the generating polynomial on both pieces.  With ``incompatible`` the
    pieces get *different* polynomials: on overlapping covers the glue must
    flag the disagreement (an invalid input, not a library bug); disjoint
    covers glue to the product structure and always succeed.
    """
    if space_a.space != space_b.space or space_a.dim != space_b.dim:
        raise StructureError("pieces must share the coefficient space")
    params = {"level": level, "trials": trials, "incompatible": incompatible}
    rep = Report(check="union_glue", params=params, trials=trials)
    union_anchors = tuple(dict.fromkeys(space_a.anchors + space_b.anchors))
    union_space = GermSpace(union_anchors, space_a.base_radius, space_a.ratio,
                            space_a.levels, space_a.space, space_a.degree_bound,
                            space_a.dim)
    rho = union_space.radius(level)
    disjoint = all(abs(a - b) >= 2 * rho for a in space_a.anchors for b in space_b.anchors
                   if a != b) and not set(space_a.anchors) & set(space_b.anchors)

    def poly(coeffs):
        return lambda z: np.polyval(coeffs[::-1], z) * (space_a.space.one()
                                                        if space_a.space.kind != "vector" else 1.0)

    for t in range(trials):
        deg = int(rng.integers(0, 6))
        ca = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        cb = ca if not incompatible else ca + (rng.standard_normal(deg + 1) * 0.1 + 0.05)
        fa, fb = poly(ca), poly(cb)
        ea = factorize(space_a, fa, level)
        eb = factorize(space_b, fb, level)
        glued_reps = []
        defect = 0.0
        for a in union_anchors:
            if a in space_a.anchors:
                glued_reps.append(ea.reps[space_a.anchors.index(a)])
            else:
                glued_reps.append(eb.reps[space_b.anchors.index(a)])
        glued = BHolElement(union_space, level, glued_reps)
        defect = glued.coherence_defect()
        if incompatible and not disjoint:
            if defect <= tol:
                rep.fail({"trial": t, "reason": "incompatible input not flagged",
                          "defect": defect})
            continue
        if defect > tol:
            rep.fail({"trial": t, "reason": "glue failure", "defect": defect})
            continue
        pts = union_space.sample_points(level, 40, interior=0.4)
        vals = glued.eval(pts)
        want = np.stack([np.asarray(fa(z), dtype=complex) for z in pts])
        err = float(np.max(union_space.space.norm(vals - want)))
        rep.note_margin(tol - err)
        if err > 10 * tol:
            rep.fail({"trial": t, "reason": "glued element does not reproduce input",
                      "err": err})
    return rep


# ---------------------------------------------------------------------------
# cross-basis spot check (two ratios generate equivalent gradings)
# ---------------------------------------------------------------------------

def ratio_topology_spotcheck(space_r: GermSpace, space_r2: GermSpace,
                             elements: list, levels=(1, 2)) -> Report:
    """Compare majorant norms of common germs across two ratio choices.

    For each element given at level 0 of the first grading, bonding into
    either grading must give finite norms with bounded mutual ratios once
    the radii nest; this spot-checks (without proving) that the limit
    topology does not depend on the chosen basis.
    """
    rep = Report(check="ratio_topology_spotcheck",
                 params={"r": space_r.ratio, "r2": space_r2.ratio, "levels": list(levels)})
    worst = 0.0
    for el in elements:
        for lvl in levels:
            rho1 = space_r.radius(lvl)
            rho2 = space_r2.radius(lvl)
            m1 = max(s.majorant_norm(min(rho1, s.radius)) for s in el.reps)
            m2 = max(s.majorant_norm(min(rho2, s.radius)) for s in el.reps)
            if not (math.isfinite(m1) and math.isfinite(m2)) or m1 <= 0 or m2 <= 0:
                rep.fail({"level": lvl, "m1": m1, "m2": m2})
                continue
            worst = max(worst, m1 / m2, m2 / m1)
    rep.extras = {"worst_norm_ratio": worst}
    rep.trials = len(elements) * len(levels)
    return rep
