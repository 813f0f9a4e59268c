"""Chart glueing for 1-d complexifications of real-analytic atlases.

A :class:`RealAtlas` is a finite family of interval charts with nested
subintervals V_i inside U_i inside T_i (positive margins) and real-analytic
transition maps given as truncated series with real anchors and real
coefficients on the pairwise overlaps.  A chart pair may meet in several
components (on the circle, deck translates), each carried by its own
:class:`Transition` record.  ``extend_transitions`` evaluates the same
series at complex arguments over rectangles ``overlap x (-h, h)``, shrinking
the strip height until the mutual-inverse identity ``psi_ji(psi_ij(z)) = z``
certifies on a sample grid; ``certify_cocycles`` then checks psi_ii = id,
mutual inverses, and the triple cocycle identity ``psi_ij = psi_kj o psi_ik``
wherever triple overlaps exist.  Glueing the rectangles along certified
transitions produces the complexified manifold; Hausdorffness is certified
through the positive-margin sufficient condition recorded in the margin
table, never by point-separation search.

``uniqueness_biholomorphism`` compares two extensions of the same real
atlas: per chart the identity extends, and transporting across one atlas's
transitions then back through the other's must return every grid point --
the executable content of the statement that the germ of a complexification
around the compact set is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ExtensionError, StructureError
from .reports import Report
from .series import (
    TruncatedSeries,
    cauchy_coefficients,
    scalar_space,
    series_from_json,
    series_to_json,
)

__all__ = [
    "ChartInterval",
    "Transition",
    "RealAtlas",
    "ComplexAtlas",
    "build_transition",
    "identity_transition",
    "extend_transitions",
    "certify_cocycles",
    "perturb_transition",
    "uniqueness_biholomorphism",
    "annulus_consistency",
    "circle_atlas",
    "tan_chart_pair",
    "atlas_to_json",
    "atlas_from_json",
]

_EVAL_SAFETY = 0.98  # stay strictly inside each piece's validity disc


@dataclass(frozen=True)
class ChartInterval:
    """Nested chart intervals V inside U inside T with positive margins."""

    t_lo: float
    t_hi: float
    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float

    def __post_init__(self):
        chain = (self.t_lo, self.u_lo, self.v_lo, self.v_hi, self.u_hi, self.t_hi)
        if any(b <= a for a, b in zip(chain, chain[1:])):
            raise StructureError(
                "chart intervals must nest strictly: t_lo < u_lo < v_lo < v_hi < u_hi < t_hi")

    @property
    def margins(self) -> tuple:
        return (self.u_lo - self.t_lo, self.v_lo - self.u_lo,
                self.u_hi - self.v_hi, self.t_hi - self.u_hi)


@dataclass(frozen=True)
class Transition:
    """One overlap component of the chart change i -> j, in i coordinates."""

    i: int
    j: int
    overlap: tuple  # (lo, hi) in chart-i coordinates
    pieces: tuple   # TruncatedSeries with real anchors inside the overlap

    def __post_init__(self):
        lo, hi = self.overlap
        if not lo < hi:
            raise StructureError("empty overlap interval")
        for p in self.pieces:
            if abs(np.imag(p.anchor)) > 1e-14:
                raise StructureError("transition anchors must be real")
            if np.max(np.abs(np.imag(p.coeffs))) > 1e-12:
                raise StructureError("transition coefficients must be real")

    def _inside(self, zs: np.ndarray) -> np.ndarray:
        lo, hi = self.overlap
        slack = 1e-9 * max(1.0, hi - lo)
        return (zs.real >= lo - slack) & (zs.real <= hi + slack)

    def eval(self, zs: np.ndarray) -> np.ndarray:
        """Evaluate on the overlap rectangle by the nearest covering piece; NaN outside.

        The map is only defined over its overlap interval: points whose real
        part leaves it belong to a different overlap component.
        """
        zs = np.asarray(zs, dtype=complex)
        out = np.full(zs.shape, np.nan + 0j)
        inside = self._inside(zs)
        for p in sorted(self.pieces, key=lambda q: q.radius, reverse=True):
            mask = inside & np.isnan(out.real) & \
                (np.abs(zs - p.anchor) < _EVAL_SAFETY * p.radius)
            if np.any(mask):
                out[mask] = p.eval(zs[mask])
        return out

    def covers(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        ok = np.zeros(zs.shape, dtype=bool)
        for p in self.pieces:
            ok |= np.abs(zs - p.anchor) < _EVAL_SAFETY * p.radius
        return ok & self._inside(zs)

    def convergence_radius_estimate(self, safety: float = 0.8) -> float:
        """Cauchy-Hadamard estimate from coefficient decay, with a safety factor.

        Polynomial-like tails give estimates capped by the stored validity
        radius (the series asserts nothing beyond it).
        """
        best = math.inf
        for p in self.pieces:
            norms = np.abs(p.coeffs)
            est = p.radius
            for k in range(2, p.degree_bound + 1):
                if norms[k] > 1e-13:
                    est = min(est, float(norms[k] ** (-1.0 / k)))
            best = min(best, safety * est if est < math.inf else p.radius)
        return best


def identity_transition(i: int, overlap: tuple, radius: float,
                        degree_bound: int = 24) -> Transition:
    mid = 0.5 * (overlap[0] + overlap[1])
    s = TruncatedSeries.from_coeff_list([(0, mid), (1, 1.0)], mid, radius,
                                        scalar_space(), degree_bound)
    return Transition(i, i, overlap, (s,))


def build_transition(fn, i: int, j: int, overlap: tuple, n_pieces: int = 3,
                     piece_radius: float | None = None, degree_bound: int = 24,
                     n_points: int = 256) -> Transition:
    """Transition from a callable via per-piece Cauchy coefficient extraction."""
    lo, hi = overlap
    anchors = np.linspace(lo, hi, n_pieces + 2)[1:-1] if n_pieces > 1 else \
        np.array([0.5 * (lo + hi)])
    width = (hi - lo) / max(n_pieces, 1)
    radius = piece_radius if piece_radius is not None else 1.2 * width
    pieces = []
    for a in anchors:
        betas, _, _ = cauchy_coefficients(fn, float(a), radius, degree_bound, n_points)
        pieces.append(TruncatedSeries(float(a), degree_bound, np.real(betas) + 0j,
                                      0.8 * radius, 0.0, scalar_space()))
    return Transition(i, j, overlap, tuple(pieces))


@dataclass(frozen=True)
class RealAtlas:
    charts: tuple
    transitions: tuple

    def __post_init__(self):
        for tr in self.transitions:
            if tr.i == tr.j:
                continue
            if not self.between(tr.j, tr.i):
                raise StructureError(
                    f"transition ({tr.i},{tr.j}) lacks any inverse record ({tr.j},{tr.i})")

    def between(self, i: int, j: int) -> tuple:
        """All overlap-component records of the ordered pair (i, j)."""
        return tuple(tr for tr in self.transitions if (tr.i, tr.j) == (i, j))

    def eval_change(self, i: int, j: int, zs: np.ndarray) -> np.ndarray:
        """Chart change on points of chart i; components have disjoint domains."""
        zs = np.asarray(zs, dtype=complex)
        out = np.full(zs.shape, np.nan + 0j)
        for tr in self.between(i, j):
            mask = np.isnan(out.real)
            if not np.any(mask):
                break
            vals = tr.eval(zs[mask])
            take = ~np.isnan(vals.real)
            idx = np.flatnonzero(mask)[take.ravel()] if zs.ndim else None
            if zs.ndim == 0:
                if take:
                    out = vals
            else:
                out.ravel()[idx] = vals[take]
        return out

    def records(self):
        return [tr for tr in self.transitions if tr.i != tr.j]


@dataclass(frozen=True)
class ComplexAtlas:
    """A certified complexification: strips over the real charts, glued by
    the analytically continued transitions."""

    base: RealAtlas
    heights: dict  # (i, j) -> certified strip half-height
    margin_table: tuple  # ((i, j), margin_kind, value) records, all positive

    def height(self, i: int, j: int) -> float:
        return self.heights[(i, j)]


def _grid(overlap: tuple, height: float, n: int = 20,
          shrink: float = 0.8) -> np.ndarray:
    lo, hi = overlap
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * shrink
    xs = np.linspace(mid - half, mid + half, n)
    ys = np.linspace(-height, height, n)
    return (xs[:, None] + 1j * ys[None, :]).ravel()


def extend_transitions(atlas: RealAtlas, height: float,
                       tol: float = 1e-10, grid_n: int = 20,
                       min_height_factor: float = 1e-3) -> ComplexAtlas:
    """Continue every transition to a strip, certifying mutual inverses.

    Per overlap record the strip half-height starts at ``height`` (rejected
    outright if any coefficient-decay estimate of the convergence radius
    falls short) and shrinks geometrically until
    ``max |psi_ji(psi_ij(z)) - z| <= tol`` on the sample grid; the certified
    height of a pair is the worst over its components.
    """
    for tr in atlas.records():
        est = tr.convergence_radius_estimate()
        if est <= height:
            raise ExtensionError(
                f"transition ({tr.i},{tr.j}): convergence-radius estimate {est:.4g} "
                f"does not clear the requested height {height:.4g}")
    heights: dict = {}
    for tr in atlas.records():
        i, j = tr.i, tr.j
        h = height
        while True:
            zs = _grid(tr.overlap, h, grid_n)
            mid = tr.eval(zs)
            ok = ~np.isnan(mid.real)
            back = np.full(zs.shape, np.nan + 0j)
            if np.any(ok):
                back[ok] = atlas.eval_change(j, i, mid[ok])
            ok &= ~np.isnan(back.real)
            if np.count_nonzero(ok) >= 0.5 * zs.size:
                res = np.abs(back[ok] - zs[ok])
                if np.max(res) <= tol:
                    break
            h *= 0.7
            if h < height * min_height_factor:
                raise ExtensionError(
                    f"transition ({i},{j}): mutual-inverse check fails at every "
                    f"height down to {h / 0.7:.3g}")
        heights[(i, j)] = min(h, heights.get((i, j), math.inf))
    # symmetrize: a pair certifies at the worst of its two directions
    for (i, j) in list(heights):
        h = min(heights[(i, j)], heights.get((j, i), math.inf))
        heights[(i, j)] = heights[(j, i)] = h
    for i in range(len(atlas.charts)):
        heights.setdefault((i, i), height)
    margins = []
    for (i, j), h in sorted(heights.items()):
        if i == j:
            continue
        margins.append(((i, j), "strip", 0.2 * h))
        margins.append(((i, j), "interval", min(atlas.charts[i].margins)))
    if any(v <= 0 for (_, _, v) in margins):
        raise ExtensionError("margin table contains a nonpositive entry")
    return ComplexAtlas(atlas, heights, tuple(margins))


def certify_cocycles(ca: ComplexAtlas, tol: float = 1e-9, grid_n: int = 20) -> Report:
    """Check psi_ii = id, mutual inverses and triple cocycles on grids."""
    rep = Report(check="cocycle_certification", params={"tol": tol, "grid_n": grid_n})
    atlas = ca.base
    worst_by_kind = {"identity": 0.0, "inverse": 0.0, "cocycle": 0.0}
    n_checks = 0

    for i in range(len(atlas.charts)):
        for tr in atlas.between(i, i):
            zs = _grid(tr.overlap, ca.height(i, i) * 0.5, grid_n)
            vals = tr.eval(zs)
            ok = ~np.isnan(vals.real)
            if np.any(ok):
                res = float(np.max(np.abs(vals[ok] - zs[ok])))
                worst_by_kind["identity"] = max(worst_by_kind["identity"], res)
                n_checks += 1
                if res > tol:
                    rep.fail({"kind": "identity", "chart": i, "residual": res})

    for tr in atlas.records():
        i, j = tr.i, tr.j
        zs = _grid(tr.overlap, ca.height(i, j), grid_n)
        mid = tr.eval(zs)
        ok = ~np.isnan(mid.real)
        back = np.full(zs.shape, np.nan + 0j)
        if np.any(ok):
            back[ok] = atlas.eval_change(j, i, mid[ok])
        ok &= ~np.isnan(back.real)
        if np.any(ok):
            res = float(np.max(np.abs(back[ok] - zs[ok])))
            worst_by_kind["inverse"] = max(worst_by_kind["inverse"], res)
            n_checks += 1
            if res > tol:
                witness = zs[ok][int(np.argmax(np.abs(back[ok] - zs[ok])))]
                rep.fail({"kind": "inverse", "pair": [i, j], "residual": res,
                          "witness": [witness.real, witness.imag]})

    n_charts = len(atlas.charts)
    triples_checked = 0
    for i in range(n_charts):
        for j in range(n_charts):
            for k in range(n_charts):
                if len({i, j, k}) != 3:
                    continue
                checked = False
                for t_ij in atlas.between(i, j):
                    for t_ik in atlas.between(i, k):
                        lo = max(t_ij.overlap[0], t_ik.overlap[0])
                        hi = min(t_ij.overlap[1], t_ik.overlap[1])
                        if lo >= hi:
                            continue
                        h = min(ca.height(i, j), ca.height(i, k), ca.height(k, j))
                        zs = _grid((lo, hi), h, grid_n)
                        direct = t_ij.eval(zs)
                        step1 = t_ik.eval(zs)
                        ok = ~np.isnan(direct.real) & ~np.isnan(step1.real)
                        step2 = np.full(zs.shape, np.nan + 0j)
                        if np.any(ok):
                            step2[ok] = atlas.eval_change(k, j, step1[ok])
                        ok &= ~np.isnan(step2.real)
                        if not np.any(ok):
                            continue
                        res = float(np.max(np.abs(step2[ok] - direct[ok])))
                        worst_by_kind["cocycle"] = max(worst_by_kind["cocycle"], res)
                        n_checks += 1
                        checked = True
                        if res > tol:
                            w = zs[ok][int(np.argmax(np.abs(step2[ok] - direct[ok])))]
                            rep.fail({"kind": "cocycle", "triple": [i, j, k],
                                      "residual": res, "witness": [w.real, w.imag]})
                if checked:
                    triples_checked += 1
    rep.trials = n_checks
    rep.extras = {"worst_residuals": worst_by_kind, "triples_checked": triples_checked}
    if n_checks:
        rep.note_margin(tol - max(worst_by_kind.values()))
    return rep


def perturb_transition(ca: ComplexAtlas, i: int, j: int, amount: float) -> ComplexAtlas:
    """Copy of the atlas with the first (i, j) record offset by ``amount``."""
    new_transitions = []
    done = False
    for tr in ca.base.transitions:
        if (tr.i, tr.j) == (i, j) and not done:
            pieces = []
            for p in tr.pieces:
                coeffs = p.coeffs.copy()
                coeffs[0] = coeffs[0] + amount
                pieces.append(TruncatedSeries(p.anchor, p.degree_bound, coeffs,
                                              p.radius, p.tail_bound, p.space, p.dim))
            new_transitions.append(replace(tr, pieces=tuple(pieces)))
            done = True
        else:
            new_transitions.append(tr)
    return ComplexAtlas(RealAtlas(ca.base.charts, tuple(new_transitions)),
                        ca.heights, ca.margin_table)


def uniqueness_biholomorphism(ca1: ComplexAtlas, ca2: ComplexAtlas,
                              tol_real: float = 1e-12, tol: float = 1e-9,
                              grid_n: int = 20) -> Report:
    """Certify the identity germ between two complexifications of one real atlas.

    Chart by chart the identity map extends to the common strip; what needs
    checking is that the two glueings identify the same points, i.e. for
    every overlap record the transitions agree on real arguments (to
    ``tol_real``, the Identity-Theorem anchor) and transporting by one
    atlas's transition then returning through the other's inverse is the
    identity on the common complex grid (to ``tol``).
    """
    rep = Report(check="uniqueness_biholomorphism",
                 params={"tol_real": tol_real, "tol": tol})
    if len(ca1.base.charts) != len(ca2.base.charts):
        raise StructureError("atlases complexify different chart systems")
    worst_real = 0.0
    worst_complex = 0.0
    n_checks = 0
    final_heights = {}
    for t1 in ca1.base.records():
        i, j = t1.i, t1.j
        h = min(ca1.height(i, j), ca2.heights.get((i, j), 0.0))
        lo, hi = t1.overlap
        if h <= 0:
            rep.status = "inconclusive"
            rep.extras["reason"] = f"no common strip for pair ({i},{j})"
            return rep
        final_heights[f"{i},{j}"] = min(h, final_heights.get(f"{i},{j}", math.inf))
        xs = np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), grid_n ** 2)
        v1 = t1.eval(xs.astype(complex))
        v2 = ca2.base.eval_change(i, j, xs.astype(complex))
        ok = ~np.isnan(v1.real) & ~np.isnan(v2.real)
        if np.any(ok):
            res = float(np.max(np.abs(v1[ok] - v2[ok])))
            worst_real = max(worst_real, res)
            n_checks += 1
            if res > tol_real:
                rep.fail({"kind": "real_restriction", "pair": [i, j], "residual": res})
        zs = _grid((lo, hi), h, grid_n)
        mid = t1.eval(zs)
        ok = ~np.isnan(mid.real)
        back = np.full(zs.shape, np.nan + 0j)
        if np.any(ok):
            back[ok] = ca2.base.eval_change(j, i, mid[ok])
        ok &= ~np.isnan(back.real)
        if np.any(ok):
            res = float(np.max(np.abs(back[ok] - zs[ok])))
            worst_complex = max(worst_complex, res)
            n_checks += 1
            if res > tol:
                rep.fail({"kind": "cross_transport", "pair": [i, j], "residual": res})
    rep.trials = n_checks
    rep.extras.update({"worst_real_restriction": worst_real,
                       "worst_cross_transport": worst_complex,
                       "strip_heights": final_heights})
    rep.note_margin(tol - worst_complex)
    return rep


def annulus_consistency(ca: ComplexAtlas, tol: float = 1e-8,
                        grid_n: int = 20) -> Report:
    """Compare a circle glueing against the closed-form annulus model.

    The annulus realization w = exp(i z) must send equivalent points
    (z in chart i, psi_ij(z) in chart j) to the same w; the worst mismatch
    over all transition records and grids is the distance between the glued
    manifold and the standard model in exponential coordinates.
    """
    rep = Report(check="annulus_model_consistency", params={"tol": tol})
    worst = 0.0
    n_checks = 0
    for tr in ca.base.records():
        zs = _grid(tr.overlap, ca.height(tr.i, tr.j), grid_n)
        vals = tr.eval(zs)
        ok = ~np.isnan(vals.real)
        if not np.any(ok):
            continue
        res = float(np.max(np.abs(np.exp(1j * vals[ok]) - np.exp(1j * zs[ok]))))
        worst = max(worst, res)
        n_checks += 1
        if res > tol:
            rep.fail({"pair": [tr.i, tr.j], "residual": res})
    rep.trials = n_checks
    rep.extras = {"worst_residual": worst}
    rep.note_margin(tol - worst)
    return rep


# ---------------------------------------------------------------------------
# stock atlases
# ---------------------------------------------------------------------------

def circle_atlas(n_charts: int = 3, overlap_frac: float = 0.55,
                 degree_bound: int = 8) -> RealAtlas:
    """Angle charts of the circle R/2pi with translation transitions.

    Chart i covers an interval of half-width ``(1/2 + overlap_frac) * 2pi/n``
    centered at ``2 pi i / n``.  Every nonempty intersection of chart i with
    a deck translate of chart j becomes one overlap record whose transition
    is the corresponding translation; ``overlap_frac > 1/2`` creates triple
    overlaps, making the cocycle checks nonvacuous.
    """
    if n_charts < 2:
        raise StructureError("need at least two charts")
    two_pi = 2.0 * math.pi
    width = two_pi / n_charts
    half = (0.5 + overlap_frac) * width
    if 2 * half >= two_pi:
        raise StructureError("charts must not cover the whole circle")
    charts = []
    intervals = []
    for i in range(n_charts):
        c = i * width
        m1, m2 = 0.1 * half, 0.2 * half
        charts.append(ChartInterval(c - half, c + half, c - half + m1, c + half - m1,
                                    c - half + m2, c + half - m2))
        intervals.append((c - half, c + half))

    def shift_series(anchor: float, shift: float, radius: float,
                     ) -> TruncatedSeries:
        return TruncatedSeries.from_coeff_list(
            [(0, anchor + shift), (1, 1.0)], anchor, radius,
            scalar_space(), degree_bound)

    transitions = []
    for i in range(n_charts):
        for j in range(n_charts):
            if i == j:
                continue
            for deck in (-1, 0, 1):
                lo = max(intervals[i][0], intervals[j][0] + deck * two_pi)
                hi = min(intervals[i][1], intervals[j][1] + deck * two_pi)
                if hi - lo < 1e-9:
                    continue
                mid = 0.5 * (lo + hi)
                radius = 2.0 * (hi - lo) + 1.0
                transitions.append(Transition(i, j, (lo, hi),
                                              (shift_series(mid, -deck * two_pi, radius),)))
    for i in range(n_charts):
        ch = charts[i]
        transitions.append(identity_transition(i, (ch.t_lo, ch.t_hi),
                                               2.0 * (ch.t_hi - ch.t_lo), degree_bound))
    return RealAtlas(tuple(charts), tuple(transitions))


def tan_chart_pair(degree_bound: int = 30) -> RealAtlas:
    """Two interval charts related by the tangent map on the overlap."""
    charts = (
        ChartInterval(-0.62, 0.62, -0.58, 0.58, -0.5, 0.5),
        ChartInterval(math.tan(-0.62), math.tan(0.62),
                      math.tan(-0.58), math.tan(0.58),
                      math.tan(-0.5), math.tan(0.5)),
    )
    fwd = build_transition(np.tan, 0, 1, (-0.5, 0.5), n_pieces=5,
                           piece_radius=0.45, degree_bound=degree_bound)
    bwd = build_transition(np.arctan, 1, 0, (math.tan(-0.5), math.tan(0.5)),
                           n_pieces=5, piece_radius=0.5, degree_bound=degree_bound)
    ident0 = identity_transition(0, (-0.62, 0.62), 2.5, degree_bound)
    ident1 = identity_transition(1, (math.tan(-0.62), math.tan(0.62)), 3.0, degree_bound)
    return RealAtlas(charts, (fwd, bwd, ident0, ident1))


# ---------------------------------------------------------------------------
# JSON atlas input format
# ---------------------------------------------------------------------------

def atlas_to_json(atlas: RealAtlas) -> dict:
    return {
        "charts": [
            {"interval": [c.t_lo, c.t_hi], "U": [c.u_lo, c.u_hi], "V": [c.v_lo, c.v_hi]}
            for c in atlas.charts
        ],
        "transitions": [
            {"i": tr.i, "j": tr.j, "overlap": [tr.overlap[0], tr.overlap[1]],
             "series": [series_to_json(p) for p in tr.pieces]}
            for tr in atlas.transitions
        ],
    }


def atlas_from_json(doc: dict) -> RealAtlas:
    charts = tuple(
        ChartInterval(c["interval"][0], c["interval"][1], c["U"][0], c["U"][1],
                      c["V"][0], c["V"][1])
        for c in doc["charts"]
    )
    transitions = tuple(
        Transition(t["i"], t["j"], (t["overlap"][0], t["overlap"][1]),
                   tuple(series_from_json(s) for s in t["series"]))
        for t in doc["transitions"]
    )
    return RealAtlas(charts, transitions)
