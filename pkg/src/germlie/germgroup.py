"""Local and global Lie structure on germs of matrix-group-valued maps.

A :class:`GermLieGroup` couples a :class:`~germlie.germspace.GermSpace` whose
coefficients are m x m matrices with a :class:`~germlie.matrixlie.MatrixLieBackend`.
Algebra germs (gl(m)-valued, :class:`~germlie.germspace.BHolElement`) carry
the truncated-BCH product ``germ_bch``; group germs
(:class:`GermGroupElement`, invertible-matrix-valued) multiply pointwise and
carry the charts

    exp_germ([eta]) = [exp o eta],      log_germ = its local inverse,

plus the pointwise adjoint action ``adjoint`` with a certified operator-norm
bound.  Invertibility of group germs is certified at construction: the
constant coefficient is invertible and the Neumann budget
``norm(c0^{-1}) * (majorant of the rest) < 1`` holds per anchor, which makes
every value on the validity balls invertible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._fastseries import SeriesStack
from .errors import BudgetError, StructureError
from .germspace import BHolElement, GermSpace, bond
from .matrixlie import MatrixLieBackend, bch_remainder_bound, evaluate_bch_words
from .series import (
    TruncatedSeries,
    invert as series_invert,
    multiply as series_multiply,
    series_exp,
    series_log,
    series_to_json,
)

__all__ = [
    "GermLieGroup",
    "GermGroupElement",
    "LocalGermElement",
    "random_algebra_element",
    "random_group_element",
    "element_from_matrix_poly",
]

OMEGA1_FACTOR = 0.25  # Omega_1 budget = 0.25 * ln 2 (pairs stay inside the BCH domain)
INJECTIVITY_RADIUS = 0.5  # Omega_2: values within this ball of 0 keep exp injective


@dataclass(frozen=True)
class GermGroupElement:
    """An invertible-matrix-valued germ with its invertibility certificate."""

    element: BHolElement
    cert_margin: float = field(default=0.0)

    def __post_init__(self):
        margin = _invertibility_margin(self.element)
        if margin <= 0:
            raise BudgetError(
                f"invertibility certificate failed: Neumann margin {margin:.3g} <= 0")
        object.__setattr__(self, "cert_margin", margin)

    @property
    def level(self) -> int:
        return self.element.level

    @property
    def parent(self) -> GermSpace:
        return self.element.parent

    def eval(self, points) -> np.ndarray:
        return self.element.eval(points)

    def at_level(self, level: int) -> "GermGroupElement":
        return GermGroupElement(bond(self.element, level))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "certificate": {"kind": "neumann", "budget": 1.0,
                            "margin": float(self.cert_margin)},
            "reps": [series_to_json(s) for s in self.element.reps],
        }


def _invertibility_margin(el: BHolElement) -> float:
    space = el.parent.space
    worst = math.inf
    for s in el.reps:
        c0 = s.coeffs[(0,) * s.dim]
        try:
            c0_inv = np.linalg.inv(c0)
        except np.linalg.LinAlgError:
            return -math.inf
        centered = float(np.sum(s.majorant_coeffs()[1:])) + s.tail_bound
        q = space.submult_factor * float(space.norm(c0_inv)) * centered
        worst = min(worst, 1.0 - q)
    return worst


@dataclass(frozen=True)
class LocalGermElement:
    """An algebra germ certified to lie inside a stated majorant budget."""

    element: BHolElement
    budget: float

    def __post_init__(self):
        m = self.element.norm_upper
        if m > self.budget:
            raise BudgetError(
                f"local-germ budget violated: majorant {m:.6g} > budget {self.budget:.6g}")

    @property
    def level(self) -> int:
        return self.element.level


@dataclass(frozen=True)
class GermLieGroup:
    """Germs of GL(m, C)-valued maps around the anchor set, with charts."""

    space: GermSpace
    backend: MatrixLieBackend = None
    inj_radius: float = INJECTIVITY_RADIUS

    def __post_init__(self):
        if self.space.space.kind != "matrix":
            raise StructureError("germ groups need matrix coefficients")
        backend = self.backend or MatrixLieBackend(self.space.space.dim)
        if backend.dim != self.space.space.dim:
            raise StructureError("backend dimension disagrees with coefficient space")
        object.__setattr__(self, "backend", backend)

    @property
    def local_budget(self) -> float:
        """The Omega_1 budget: pairs multiply inside the injectivity chart."""
        return OMEGA1_FACTOR * math.log(2.0)

    # -- elements -------------------------------------------------------------

    def identity(self, level: int = 0) -> GermGroupElement:
        return GermGroupElement(self.space.constant_element(self.backend.space.one(), level))

    def zero(self, level: int = 0) -> BHolElement:
        return self.space.zero_element(level)

    # -- local group: truncated BCH on algebra germs ---------------------------

    def germ_bch(self, x: BHolElement, y: BHolElement) -> BHolElement:
        """Truncated BCH of algebra germs, certified remainder in the tails.

        Arguments are bonded to the deeper common level first; the
        convergence budget ``majorant(x) + majorant(y) < bch_radius`` is the
        membership condition for the local product domain.
        """
        return self.bch_pairs([(x, y)])[0]

    def bch_pairs(self, pairs: list) -> list:
        """Vectorized :func:`germ_bch` over many argument pairs.

        The Dynkin word table is walked once with all anchors of all pairs
        stacked, which is what makes large property sweeps affordable.
        """
        order = self.backend.bch_order
        n_anchors = len(self.space.anchors)
        prepped = []
        for x, y in pairs:
            lvl = max(x.level, y.level)
            xb, yb = bond(x, lvl), bond(y, lvl)
            s = xb.norm_upper + yb.norm_upper
            if s >= self.backend.bch_radius:
                raise BudgetError(
                    f"local product budget violated: majorant sum {s:.6g} >= "
                    f"{self.backend.bch_radius:.6g}")
            prepped.append((xb, yb, lvl, bch_remainder_bound(s, order)))
        xs = SeriesStack.from_series([s for xb, _, _, _ in prepped for s in xb.reps])
        ys = SeriesStack.from_series([s for _, yb, _, _ in prepped for s in yb.reps])
        zs = evaluate_bch_words(xs, ys, order, SeriesStack.bracket)
        rems = np.repeat([rem for _, _, _, rem in prepped], n_anchors)
        zs = SeriesStack(zs.coeffs, zs.radius, zs.tail + rems)
        series = zs.to_series([a for xb, _, _, _ in prepped for a in self.space.anchors],
                              self.space.space, self.space.dim)
        out = []
        for i, (_, _, lvl, _) in enumerate(prepped):
            reps = tuple(series[i * n_anchors: (i + 1) * n_anchors])
            out.append(BHolElement(self.space, lvl, reps))
        return out

    def local_element(self, el: BHolElement) -> LocalGermElement:
        return LocalGermElement(el, self.local_budget)

    # -- charts -----------------------------------------------------------------

    def _certify_deeper(self, el: BHolElement) -> GermGroupElement:
        """Wrap as a group germ, bonding deeper until the Neumann certificate holds.

        Restriction shrinks the centered majorant while fixing the constant
        term, so invertible-valued germs certify at some level whenever
        their anchor values are invertible.
        """
        last = None
        for lvl in range(el.level, self.space.levels):
            try:
                return GermGroupElement(bond(el, lvl))
            except BudgetError as exc:
                last = exc
        raise last

    def exp_germ(self, eta: BHolElement) -> GermGroupElement:
        """Postcomposition with the exponential, anchor by anchor."""
        return self._certify_deeper(eta.map_reps(series_exp))

    def log_germ(self, gamma: GermGroupElement) -> BHolElement:
        """Local inverse of :func:`exp_germ`; bonds deeper if the branch budget needs it.

        The principal-branch budget ``majorant(gamma - 1) < 1`` must hold on
        some level's radius; germs whose values leave the branch domain
        raise :class:`BudgetError`.
        """
        el = gamma.element
        for lvl in range(el.level, self.space.levels):
            cand = bond(el, lvl)
            try:
                return cand.map_reps(series_log)
            except BudgetError:
                continue
        raise BudgetError("log branch budget unattainable at every available level")

    def in_injectivity_domain(self, eta: BHolElement) -> bool:
        """Certified membership in the exp-injectivity chart domain.

        Values on the anchor balls within ``inj_radius`` of zero are
        certified through the majorant, which also keeps the log branch
        budget available after exponentiation.
        """
        return eta.norm_upper < self.inj_radius

    # -- global group ------------------------------------------------------------

    def mul(self, g: GermGroupElement, h: GermGroupElement) -> GermGroupElement:
        lvl = max(g.level, h.level)
        ge, he = bond(g.element, lvl), bond(h.element, lvl)
        reps = tuple(series_multiply(a, b) for a, b in zip(ge.reps, he.reps))
        return self._certify_deeper(BHolElement(self.space, lvl, reps))

    def inv(self, g: GermGroupElement) -> GermGroupElement:
        reps = tuple(series_invert(s) for s in g.element.reps)
        return GermGroupElement(BHolElement(self.space, g.level, reps))

    def power(self, g: GermGroupElement, n: int) -> GermGroupElement:
        if n < 1:
            raise StructureError("power expects n >= 1")
        out = g
        for _ in range(n - 1):
            out = self.mul(out, g)
        return out

    # -- adjoint action ------------------------------------------------------------

    def adjoint(self, gamma: GermGroupElement, eta: BHolElement):
        """Pointwise conjugation ``x -> gamma(x) eta(x) gamma(x)^{-1}``.

        Returns ``(AD(gamma) eta, R)`` where R is the certified bound
        ``majorant(gamma) * majorant(gamma^{-1})`` for the operator norm of
        the action at this level; ``norm_upper`` of the result is at most
        ``R * norm_upper(eta)`` by majorant arithmetic.
        """
        ginv = self.inv(gamma)
        lvl = max(gamma.level, eta.level, ginv.level)
        ge = bond(gamma.element, lvl)
        gie = bond(ginv.element, lvl)
        ee = bond(eta, lvl)
        reps = tuple(series_multiply(series_multiply(a, b), c)
                     for a, b, c in zip(ge.reps, ee.reps, gie.reps))
        out = BHolElement(self.space, lvl, reps)
        R = ge.norm_upper * gie.norm_upper
        return out, R


# ---------------------------------------------------------------------------
# coherent random generators (shared by tests, demos and the CLI suites)
# ---------------------------------------------------------------------------

def element_from_matrix_poly(space: GermSpace, matrix_coeffs, level: int) -> BHolElement:
    """Element of U_level induced by one global matrix polynomial in z.

    Re-expanding the same polynomial around every anchor (binomial shift)
    guarantees the per-anchor series cohere: they represent one entire
    function restricted to U_level.
    """
    if space.dim != 1:
        raise StructureError("matrix-poly generator is d = 1 only")
    coeffs = [np.asarray(c, dtype=complex) for c in matrix_coeffs]
    deg = len(coeffs) - 1
    if deg > space.degree_bound:
        raise StructureError("generator degree exceeds the space degree bound")
    reps = []
    rho = space.radius(level)
    for a in space.anchors:
        shifted = []
        for k in range(deg + 1):
            acc = np.zeros_like(coeffs[0])
            for j in range(k, deg + 1):
                acc = acc + math.comb(j, k) * coeffs[j] * (a ** (j - k))
            shifted.append((k, acc))
        reps.append(shifted)
    return space.element_from_coeff_lists(reps, level)


def random_algebra_element(group: GermLieGroup, rng: np.random.Generator,
                           budget: float, level: int = 1,
                           max_degree: int = 3, decay: float = 0.35) -> BHolElement:
    """Random algebra germ with majorant norm equal to ``budget``.

    Coefficients follow one global matrix polynomial of degree at most
    ``max_degree`` with geometric decay, so products of moderately many
    germs keep their degree overflow far below the working tolerances.
    """
    m = group.space.space.dim
    deg = int(rng.integers(0, max_degree + 1))
    coeffs = []
    for k in range(deg + 1):
        raw = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        coeffs.append(raw * decay ** k)
    el = element_from_matrix_poly(group.space, coeffs, level)
    norm = el.norm_upper
    if norm <= 0:
        return el
    return el.scale(budget / norm)


def random_group_element(group: GermLieGroup, rng: np.random.Generator,
                         budget: float = 0.3, level: int = 1,
                         max_degree: int = 3) -> GermGroupElement:
    """Random group germ in the identity component: exp of a random algebra germ."""
    return group.exp_germ(random_algebra_element(group, rng, budget, level, max_degree))
