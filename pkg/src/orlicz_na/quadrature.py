"""Deterministic quadrature over orthant densities with cap-aware grids.

The integrands handled here are products of a small set of factor kinds:

* ``CapFactor`` -- ``cap(offset + sum_k young_k(x_k))``; the cap has compact
  support, so along each axis the factor vanishes exactly beyond a point
  that the Young inverse computes.  Panel boundaries are placed on that
  point, on Young piece joints, and on the axis positions where the
  accumulated sum crosses a cap log-piece joint, which keeps the integrand
  analytic inside every panel.
* ``AxisWeight`` -- a per-axis log-concave factor.
* ``PolygonConstraint`` -- membership of ``(x_i, x_j)`` in a convex polygon
  (used by the localization loop); vertical slices are exact.
* ``CallableFactor`` -- arbitrary bounded vectorized functions (test
  functions); they advertise their axis-aligned kink/jump positions so the
  grid can align panels with them.

The grid is a conditional tensor product: static panel edges per axis,
clipped per column to the exact conditional support interval, with
Gauss-Legendre nodes per panel.  Zero-width (clipped-away) panels carry
zero weight, which keeps the node array rectangular and fully vectorized.

Integration is exact to machine precision for piecewise-polynomial data
(uniform simplices, boxes) and converges at Gauss speed for the smooth
log-concave families used everywhere else.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _scipy_integrate
from scipy import optimize as _scipy_optimize

from .model import ModelError, OrliczModel
from .scalars import INF, LogConcaveScalar, YoungFunction

MAX_DIM = 4
MAX_GRID_NODES = 20_000_000

#: denominators smaller than this times the integrand scale are "not defined"
RATIO_FLOOR = 1e-12


class QuadratureError(ValueError):
    """Raised for unsupported dimensions, empty masses and bad inputs."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid resolution controls.

    ``resolution`` is the number of uniform panel edges per axis (before
    support clipping and breakpoint insertion), ``refine_depth`` bounds how
    often a caller may double the resolution when a value looks unstable,
    ``abs_tol`` is the absolute tolerance attached to reported values, and
    ``box`` optionally overrides the support bounding box.
    """

    resolution: int = 8
    refine_depth: int = 2
    abs_tol: float = 1e-9
    box: Optional[tuple[tuple[float, float], ...]] = None
    gauss_order: int = 6
    #: cut panels at joint combinations of later-axis kink levels (exact for
    #: stacked indicators, but grids grow); one-at-a-time cuts when False
    kink_combos: bool = True

    def __post_init__(self):
        if self.resolution < 1:
            raise QuadratureError("resolution must be a positive integer")
        if self.refine_depth < 0:
            raise QuadratureError("refine_depth must be nonnegative")
        if not self.abs_tol > 0:
            raise QuadratureError("abs_tol must be positive")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return replace(self, resolution=self.resolution * factor)

    @staticmethod
    def for_dim(dim: int) -> "QuadratureSpec":
        if dim <= 2:
            return QuadratureSpec(resolution=12, gauss_order=8)
        if dim == 3:
            return QuadratureSpec(resolution=8, gauss_order=8)
        return QuadratureSpec(resolution=5, gauss_order=5)


# ---------------------------------------------------------------------------
# Factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapFactor:
    """``cap(offset + sum_k young_k(x_k))`` over the integration axes.

    A ``structural`` factor shapes the grid — its support boundary and piece
    crossings become panel edges — but its value is not multiplied into the
    grid base.  Callers use structural factors when the same grid must serve
    several integrals that differ only in one cap factor, evaluating that
    factor themselves per integral.
    """

    youngs: tuple[Optional[YoungFunction], ...]
    cap: LogConcaveScalar
    offset: float = 0.0
    structural: bool = False

    def values(self, points: np.ndarray) -> np.ndarray:
        """Evaluate this factor at explicit points (used for structural ones)."""
        total = np.full(points.shape[0], self.offset)
        for k, f in enumerate(self.youngs):
            if f is not None:
                total = total + f.eval_vec(np.maximum(points[:, k], 0.0))
        out = np.zeros(points.shape[0])
        finite = np.isfinite(total)
        if finite.any():
            out[finite] = self.cap.eval_vec(total[finite])
        return out


@dataclass(frozen=True)
class AxisWeight:
    axis: int
    scalar: LogConcaveScalar


@dataclass(frozen=True)
class PolygonConstraint:
    """Indicator of ``(x[axis_x], x[axis_y])`` inside a convex polygon."""

    vertices: tuple[tuple[float, float], ...]
    axis_x: int = 0
    axis_y: int = 1


@dataclass(frozen=True)
class CallableFactor:
    """Bounded vectorized factor with declared axis-aligned breakpoints."""

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class ProductIntegrand:
    dim: int
    cap_factors: tuple[CapFactor, ...] = ()
    axis_weights: tuple[AxisWeight, ...] = ()
    polygons: tuple[PolygonConstraint, ...] = ()
    callables: tuple[CallableFactor, ...] = ()
    constant: float = 1.0
    extra_breakpoints: tuple[tuple[float, ...], ...] = ()

    def with_callable(self, factor: CallableFactor) -> "ProductIntegrand":
        return replace(self, callables=self.callables + (factor,))

    def with_polygon(self, poly: PolygonConstraint) -> "ProductIntegrand":
        return replace(self, polygons=self.polygons + (poly,))


def integrand_for_model(
    model: OrliczModel, offset: float = 0.0, constant: float = 1.0
) -> ProductIntegrand:
    """Full-dimensional integrand of a model density."""
    cap = CapFactor(tuple(model.young_parts), model.cap, offset)
    weights = tuple(
        AxisWeight(k, w) for k, w in enumerate(model.weights) if not _is_flat(w)
    )
    return ProductIntegrand(
        model.dim, cap_factors=(cap,), axis_weights=weights, constant=constant
    )


def _is_flat(w: LogConcaveScalar) -> bool:
    if w.is_zero:
        return False
    lo, hi = w.support
    return (
        lo == -INF
        and hi == INF
        and len(w.pieces) == 1
        and w.pieces[0].a == 0.0
        and w.pieces[0].b == 0.0
        and w.pieces[0].c == 0.0
    )


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------


@dataclass
class Grid:
    """Quadrature nodes with structural factor values pre-multiplied."""

    points: np.ndarray  # (N, dim)
    qweights: np.ndarray  # (N,)
    base: np.ndarray  # (N,) product of cap/weight/polygon factors
    axis_edges: tuple[np.ndarray, ...]  # static edges per axis (for snapping)

    @property
    def mass(self) -> float:
        return float(np.dot(self.qweights, self.base))

    def weighted_sum(self, values: np.ndarray) -> float:
        return float(np.dot(self.qweights, self.base * values))


@lru_cache(maxsize=32)
def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w  # on [0, 1]


def _static_axis_bounds(integrand: ProductIntegrand) -> tuple[np.ndarray, np.ndarray]:
    d = integrand.dim
    lo = np.zeros(d)
    hi = np.full(d, INF)
    for aw in integrand.axis_weights:
        if aw.scalar.is_zero:
            hi[:] = lo[:] - 1.0
            return lo, hi
        slo, shi = aw.scalar.support
        lo[aw.axis] = max(lo[aw.axis], slo, 0.0)
        hi[aw.axis] = min(hi[aw.axis], shi)
    for poly in integrand.polygons:
        xs = [p[0] for p in poly.vertices]
        ys = [p[1] for p in poly.vertices]
        if not xs:
            hi[:] = lo[:] - 1.0
            return lo, hi
        lo[poly.axis_x] = max(lo[poly.axis_x], min(xs))
        hi[poly.axis_x] = min(hi[poly.axis_x], max(xs))
        lo[poly.axis_y] = max(lo[poly.axis_y], min(ys))
        hi[poly.axis_y] = min(hi[poly.axis_y], max(ys))
    # cap-induced static bounds: everything else at its lower bound
    for cf in integrand.cap_factors:
        if cf.structural:
            continue
        if cf.cap.is_zero:
            hi[:] = lo[:] - 1.0
            return lo, hi
        cap_hi = cf.cap.support[1]
        base = []
        for k in range(d):
            f = cf.youngs[k]
            base.append(0.0 if f is None else f(max(lo[k], 0.0)))
        if any(math.isinf(b) for b in base):
            hi[:] = lo[:] - 1.0
            return lo, hi
        total = sum(base)
        for k in range(d):
            f = cf.youngs[k]
            if f is None:
                continue
            budget = cf.offset + total - base[k]
            t = f.inverse_upper(cap_hi - budget) if cap_hi - budget >= 0 else None
            if t is None:
                hi[:] = lo[:] - 1.0
                return lo, hi
            hi[k] = min(hi[k], t)
    for k in range(d):
        if not math.isfinite(hi[k]):
            raise QuadratureError(
                f"axis {k} has unbounded support; the cap never binds there"
            )
    return lo, hi


def _static_cuts(integrand: ProductIntegrand, axis: int) -> list[float]:
    cuts: set[float] = set()
    for cf in integrand.cap_factors:
        f = cf.youngs[axis] if axis < len(cf.youngs) else None
        if f is not None and not f.identically_infinite:
            cuts.update(f.piece_starts())
            if f.infinity_cutoff is not None:
                cuts.add(f.infinity_cutoff)
    for aw in integrand.axis_weights:
        if aw.axis == axis and not aw.scalar.is_zero:
            cuts.update(s for s in aw.scalar.piece_starts() if math.isfinite(s))
            s_lo, s_hi = aw.scalar.support
            cuts.update(v for v in (s_lo, s_hi) if math.isfinite(v))
    for poly in integrand.polygons:
        if poly.axis_x == axis:
            cuts.update(p[0] for p in poly.vertices)
    for factor in integrand.callables:
        if axis < len(factor.breakpoints):
            cuts.update(factor.breakpoints[axis])
    if axis < len(integrand.extra_breakpoints):
        cuts.update(integrand.extra_breakpoints[axis])
    return sorted(cuts)


def build_grid(integrand: ProductIntegrand, spec: QuadratureSpec) -> Grid:
    d = integrand.dim
    if d < 1:
        raise QuadratureError("integrand must have at least one axis")
    if d > MAX_DIM:
        raise QuadratureError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    lo_s, hi_s = _static_axis_bounds(integrand)
    if spec.box is not None:
        if len(spec.box) != d:
            raise QuadratureError("bounding box dimension mismatch")
        for k, (blo, bhi) in enumerate(spec.box):
            lo_s[k] = max(lo_s[k], blo)
            hi_s[k] = min(hi_s[k], bhi)
    if np.any(hi_s < lo_s):
        return _empty_grid(d)
    crossing_cuts = _polygon_crossing_cuts(integrand)

    xi, om = _gauss_rule(spec.gauss_order)
    coords: list[np.ndarray] = []
    qw = np.ones(1)
    sums = [np.full(1, cf.offset) for cf in integrand.cap_factors]
    logw = np.zeros(1)
    axis_edges: list[np.ndarray] = []

    # static suffix minima per cap factor: later axes contribute at least this
    suffix_min = []
    axis_min = []
    for cf in integrand.cap_factors:
        per_axis = [
            0.0 if cf.youngs[k] is None else cf.youngs[k](max(lo_s[k], 0.0))
            for k in range(d)
        ]
        suf = np.zeros(d + 1)
        for k in range(d - 1, -1, -1):
            suf[k] = suf[k + 1] + per_axis[k]
        suffix_min.append(suf)
        axis_min.append(per_axis)

    for axis in range(d):
        n_cols = qw.shape[0]
        lo = np.full(n_cols, lo_s[axis])
        hi = np.full(n_cols, hi_s[axis])
        cond_cuts: list[np.ndarray] = []
        for poly in integrand.polygons:
            if poly.axis_y == axis:
                slo, shi = _poly_slices(poly, coords[poly.axis_x])
                lo = np.maximum(lo, slo)
                hi = np.minimum(hi, shi)
        for kf, cf in enumerate(integrand.cap_factors):
            f = cf.youngs[axis]
            if f is None:
                continue
            cap_lo, cap_hi = cf.cap.support
            rest = suffix_min[kf][axis + 1]
            budget = cap_hi - sums[kf] - rest
            t = f.inverse_upper_vec(budget)
            if cf.structural:
                # structural factors do not bound the shared support; their
                # vanishing boundary becomes an interior panel edge instead,
                # with the same geometric refinement the outer boundary gets
                tb = np.where(np.isnan(t), lo, t)
                cond_cuts.append(tb)
                for frac in (0.125, 0.015625, 0.001953125):
                    cond_cuts.append(tb - (tb - lo) * frac)
            else:
                t = np.where(np.isnan(t), lo - 1.0, t)
                hi = np.minimum(hi, t)
            for s in cf.cap.piece_starts()[1:]:
                c = f.inverse_upper_vec(s - sums[kf] - rest)
                cond_cuts.append(np.where(np.isnan(c), lo, c))
            # Static cuts on later axes induce kinks here: the partially
            # integrated factor loses smoothness where the conditional support
            # of later axes crosses their breakpoints.  Kinks come from joint
            # combinations of later-axis levels, so enumerate those (bounded).
            options: list[list[float]] = []
            for j in range(axis + 1, d):
                fj = cf.youngs[j]
                if fj is None:
                    continue
                vals = {axis_min[kf][j]}
                for cut in _static_cuts(integrand, j):
                    if cut < lo_s[j]:
                        continue
                    fj_c = fj(max(cut, 0.0))
                    if math.isfinite(fj_c) and fj_c > axis_min[kf][j]:
                        vals.add(fj_c)
                options.append(sorted(vals))
            n_combo = 1
            for v in options:
                n_combo *= len(v)
            if n_combo > 33 or not spec.kink_combos:  # one-at-a-time kinks
                combos = set()
                for jj, v in enumerate(options):
                    base = sum(opt[0] for opt in options)
                    for x in v[1:]:
                        combos.add(base - v[0] + x)
            else:
                combos = {sum(c) for c in itertools.product(*options)}
            combos.discard(rest)
            for total in combos:
                c = f.inverse_upper_vec(cap_hi - sums[kf] - total)
                cond_cuts.append(np.where(np.isnan(c), lo, c))
        hi = np.maximum(hi, lo)
        # Geometric cuts toward the conditional boundary shrink the panel that
        # receives the square-root substitution, taming fractional-power
        # boundary layers the substitution alone does not polynomialize.
        span = hi - lo
        for frac in (0.125, 0.015625, 0.001953125):
            cond_cuts.append(hi - span * frac)

        statics = _static_cuts(integrand, axis) + crossing_cuts.get(axis, [])
        uniform = np.linspace(lo_s[axis], hi_s[axis], spec.resolution + 1)
        edge_vals = np.unique(
            np.concatenate([uniform, [s for s in statics if math.isfinite(s)]])
        )
        axis_edges.append(edge_vals)
        parts = [lo[:, None], hi[:, None]]
        parts.append(np.clip(edge_vals[None, :], lo[:, None], hi[:, None]))
        for c in cond_cuts:
            parts.append(np.clip(c, lo, hi)[:, None])
        bounds = np.sort(np.concatenate(parts, axis=1), axis=1)
        widths = np.diff(bounds, axis=1)  # (n_cols, P)
        starts = bounds[:, :-1]
        # drop panels that are zero-width in every column (cuts clipped away)
        occupied = widths.max(axis=0) > 0.0
        if occupied.any() and not occupied.all():
            starts = starts[:, occupied]
            widths = widths[:, occupied]
        nodes = starts[:, :, None] + widths[:, :, None] * xi[None, None, :]
        wts = widths[:, :, None] * om[None, None, :]
        # Square-root substitution t = hi - w*(1-u)^2 on the panel touching the
        # conditional support boundary: partial integrals behave like
        # (hi - t)^(k/2) there, which the substitution turns polynomial.  The
        # boundary panel is the last one with positive width (clipped edges
        # leave zero-width duplicates at the end).
        positive = widths > 0.0
        last = widths.shape[1] - 1 - np.argmax(positive[:, ::-1], axis=1)
        rows = np.arange(n_cols)
        w_last = widths[rows, last]
        ends = starts[rows, last] + w_last
        one_m = 1.0 - xi
        nodes[rows, last, :] = ends[:, None] - w_last[:, None] * one_m[None, :] ** 2
        wts[rows, last, :] = 2.0 * w_last[:, None] * one_m[None, :] * om[None, :]
        m_axis = nodes.shape[1] * nodes.shape[2]
        if n_cols * m_axis > MAX_GRID_NODES:
            raise QuadratureError(
                f"grid would exceed {MAX_GRID_NODES} nodes; lower the "
                "resolution or gauss order"
            )
        nodes = nodes.reshape(n_cols * m_axis)
        wts = wts.reshape(n_cols * m_axis)

        coords = [np.repeat(c, m_axis) for c in coords]
        coords.append(nodes)
        qw = np.repeat(qw, m_axis) * wts
        logw = np.repeat(logw, m_axis)
        sums = [np.repeat(s, m_axis) for s in sums]
        for kf, cf in enumerate(integrand.cap_factors):
            f = cf.youngs[axis]
            if f is not None:
                sums[kf] = sums[kf] + f.eval_vec(np.maximum(nodes, 0.0))
        for aw in integrand.axis_weights:
            if aw.axis == axis:
                logw = logw + aw.scalar.log_eval_vec(nodes)

    base = np.full(qw.shape, integrand.constant)
    for kf, cf in enumerate(integrand.cap_factors):
        if cf.structural:
            continue
        vals = np.zeros(qw.shape)
        finite = np.isfinite(sums[kf])
        if finite.any():
            vals[finite] = cf.cap.eval_vec(sums[kf][finite])
        base = base * vals
    wvals = np.zeros(qw.shape)
    live = logw > -INF
    wvals[live] = np.exp(logw[live])
    base = base * wvals
    points = np.column_stack(coords) if coords else np.zeros((1, 0))
    return Grid(points, qw, base, tuple(axis_edges))


def _poly_slices(poly: PolygonConstraint, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    from . import geometry

    lo, hi = geometry.slice_interval_vec(list(poly.vertices), xs)
    empty = lo > hi
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, -1.0, hi)
    return lo, hi


def _polygon_crossing_cuts(integrand: ProductIntegrand) -> dict[int, list[float]]:
    """Panel cuts where polygon edges cross cap-factor support boundaries.

    Per column the slice interval is exact, but the partially integrated
    column value kinks in the column coordinate wherever the active bound
    switches between a polygon edge and the curve on which a cap factor's
    budget runs out; without a panel edge at the switch the kink sits
    inside a Gauss panel and caps the attainable accuracy.  Later axes
    enter through their static minimum, which makes the cut exact in two
    dimensions and a sound refinement hint above.
    """
    if not integrand.polygons or not integrand.cap_factors:
        return {}
    d = integrand.dim
    lo = [0.0] * d
    for aw in integrand.axis_weights:
        if not aw.scalar.is_zero:
            lo[aw.axis] = max(lo[aw.axis], aw.scalar.support[0], 0.0)
    out: dict[int, list[float]] = {}
    for poly in integrand.polygons:
        verts = list(poly.vertices)
        if len(verts) < 3:
            continue
        cuts = out.setdefault(poly.axis_x, [])
        for cf in integrand.cap_factors:
            fy = cf.youngs[poly.axis_y] if poly.axis_y < len(cf.youngs) else None
            if fy is None or cf.cap.is_zero:
                continue
            fx = cf.youngs[poly.axis_x] if poly.axis_x < len(cf.youngs) else None
            rest = cf.offset
            for k in range(d):
                if k in (poly.axis_x, poly.axis_y):
                    continue
                fk = cf.youngs[k]
                if fk is None:
                    continue
                v = fk(max(lo[k], 0.0))
                if math.isinf(v):
                    rest = INF
                    break
                rest += v
            if math.isinf(rest):
                continue
            level = cf.cap.support[1] - rest

            for k in range(len(verts)):
                (x1, y1), (x2, y2) = verts[k], verts[(k + 1) % len(verts)]
                if x2 < x1:
                    x1, y1, x2, y2 = x2, y2, x1, y1
                if not x2 > x1:
                    continue
                slope = (y2 - y1) / (x2 - x1)

                # forward form of "edge meets the budget boundary": same
                # roots as comparing the edge with the inverted boundary,
                # by monotonicity, but needs no Young inversions
                def gap(x: float) -> float:
                    y = y1 + slope * (x - x1)
                    total = fy(max(y, 0.0)) + (
                        0.0 if fx is None else fx(max(x, 0.0))
                    )
                    return total - level

                xs = np.linspace(x1, x2, 17)
                vals = [gap(float(x)) for x in xs]
                for i in range(len(xs) - 1):
                    va, vb = vals[i], vals[i + 1]
                    if va == 0.0:
                        cuts.append(float(xs[i]))
                    elif va * vb < 0.0 and math.isfinite(va) and math.isfinite(vb):
                        cuts.append(
                            float(
                                _scipy_optimize.brentq(
                                    gap, float(xs[i]), float(xs[i + 1]), xtol=1e-13
                                )
                            )
                        )
    return {ax: sorted(set(c)) for ax, c in out.items() if c}


def _empty_grid(d: int) -> Grid:
    return Grid(
        np.zeros((0, d)), np.zeros(0), np.zeros(0), tuple(np.zeros(0) for _ in range(d))
    )


def integrate_product(integrand: ProductIntegrand, spec: Optional[QuadratureSpec] = None) -> float:
    if spec is None:
        spec = QuadratureSpec.for_dim(integrand.dim)
    grid = build_grid(integrand, spec)
    if grid.points.shape[0] == 0:
        return 0.0
    values = np.ones(grid.points.shape[0])
    for factor in integrand.callables:
        v = np.asarray(factor.fn(grid.points), dtype=float)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("integrand factor produced non-finite values")
        values = values * v
    return grid.weighted_sum(values)


# ---------------------------------------------------------------------------
# Model-level interface
# ---------------------------------------------------------------------------


def _canonical_breakpoints(extra, dim: int) -> tuple[tuple[float, ...], ...]:
    """Accept ``{axis: values}`` or a per-axis sequence; emit a hashable tuple."""
    if not extra:
        return ()
    if isinstance(extra, dict):
        per_axis = [tuple(sorted(float(v) for v in extra.get(k, ()))) for k in range(dim)]
    else:
        per_axis = [tuple(sorted(float(v) for v in vals)) for vals in extra]
        per_axis += [()] * (dim - len(per_axis))
    return tuple(per_axis)


def model_grid(
    model: OrliczModel,
    spec: Optional[QuadratureSpec] = None,
    extra_breakpoints=(),
) -> Grid:
    """Cached structural grid of a model density."""
    if model.dim > MAX_DIM:
        raise QuadratureError(f"dimension {model.dim} exceeds {MAX_DIM}")
    if spec is None:
        spec = QuadratureSpec.for_dim(model.dim)
    extra_breakpoints = _canonical_breakpoints(extra_breakpoints, model.dim)
    cache = model.__dict__.setdefault("_quad_cache", {})
    key = (spec, extra_breakpoints)
    if key not in cache:
        integrand = replace(
            integrand_for_model(model), extra_breakpoints=extra_breakpoints
        )
        cache[key] = build_grid(integrand, spec)
        if len(cache) > 8:
            cache.pop(next(iter(cache)))
    return cache[key]


def integrate(
    model: OrliczModel,
    weight_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    spec: Optional[QuadratureSpec] = None,
    extra_breakpoints=(),
) -> float:
    """``integral of weight_fn(x) * density(x)`` over the orthant."""
    grid = model_grid(model, spec, extra_breakpoints)
    if grid.points.shape[0] == 0:
        return 0.0
    if weight_fn is None:
        return grid.mass
    values = np.asarray(weight_fn(grid.points), dtype=float)
    if not np.all(np.isfinite(values)):
        raise QuadratureError("weight function produced non-finite values")
    return grid.weighted_sum(values)


def mass(model: OrliczModel, spec: Optional[QuadratureSpec] = None) -> float:
    return integrate(model, None, spec)


def ratio_defined(numerator: float, denominator: float, scale: float) -> bool:
    """The shared "well-defined ratio" convention for all checkers."""
    return abs(denominator) > RATIO_FLOOR * max(scale, 1.0)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


@dataclass
class ProjectionDensity:
    """Normalized marginal of a model on a subset of axes (grid values)."""

    axes: tuple[int, ...]
    grid_axes: tuple[np.ndarray, ...]
    values: np.ndarray  # shape = tuple(len(g) for g in grid_axes)
    mass: float

    def max_value(self) -> float:
        return float(self.values.max())

    def root_concavity_violation(self, power: float) -> float:
        """Worst midpoint violation of ``values**(1/power)`` concavity.

        Scans axis-parallel and (in 2-D) diagonal index triples on the
        uniform grid; returns the largest violation (0 when concave).
        """
        root = np.where(self.values > 0, self.values ** (1.0 / power), 0.0)
        worst = 0.0
        arrs = [root]
        if root.ndim == 2:
            arrs = [root, root.T]
        for arr in arrs:
            a = np.atleast_2d(arr)
            pos = a > 0
            mid_ok = pos[:, :-2] & pos[:, 2:] & pos[:, 1:-1]
            if mid_ok.any():
                gap = 0.5 * (a[:, :-2] + a[:, 2:]) - a[:, 1:-1]
                worst = max(worst, float(gap[mid_ok].max(initial=-INF)))
        if root.ndim == 2:
            for flip in (root, root[:, ::-1]):
                d0 = flip[:-2, :-2]
                d2 = flip[2:, 2:]
                d1 = flip[1:-1, 1:-1]
                ok = (d0 > 0) & (d2 > 0) & (d1 > 0)
                if ok.any():
                    gap = 0.5 * (d0 + d2) - d1
                    worst = max(worst, float(gap[ok].max(initial=-INF)))
        return worst

    def support_measure(self) -> float:
        """Lebesgue measure of the projection support (grid estimate)."""
        if len(self.grid_axes) == 1:
            g = self.grid_axes[0]
            pos = np.nonzero(self.values > 0)[0]
            if pos.size == 0:
                return 0.0
            return float(g[pos[-1]] - g[pos[0]])
        cell = math.prod(float(g[1] - g[0]) for g in self.grid_axes)
        return float((self.values > 0).sum()) * cell


def projection_density(
    model: OrliczModel,
    keep: Sequence[int],
    spec: Optional[QuadratureSpec] = None,
    out_resolution: int = 129,
) -> ProjectionDensity:
    """Normalized marginal density on the kept axes.

    The kept axes are evaluated on a uniform grid over their support
    bounds; the remaining axes are integrated out with the standard grid.
    """
    keep = tuple(int(k) for k in keep)
    d = model.dim
    if not keep or len(set(keep)) != len(keep):
        raise QuadratureError("keep must be a nonempty set of distinct axes")
    if any(k < 0 or k >= d for k in keep):
        raise QuadratureError("projection axis out of range")
    if len(keep) >= d:
        raise QuadratureError("projection must integrate out at least one axis")
    if d > MAX_DIM:
        raise QuadratureError(f"dimension {d} exceeds {MAX_DIM}")
    if spec is None:
        spec = QuadratureSpec.for_dim(d)
    total = mass(model, spec)
    if not total > 0.0:
        raise QuadratureError("projection of a zero-mass model is not defined")

    rest = tuple(k for k in range(d) if k not in keep)
    box = model.support_box()
    grid_axes = tuple(
        np.linspace(box[k][0], box[k][1], out_resolution) for k in keep
    )
    mesh = np.meshgrid(*grid_axes, indexing="ij")
    flat = [m.ravel() for m in mesh]
    n_pts = flat[0].size

    # integrand over the remaining axes with kept coordinates fixed
    values = np.zeros(n_pts)
    kept_young = [model.young_parts[k] for k in keep]
    offsets = np.zeros(n_pts)
    logw_fixed = np.zeros(n_pts)
    for f, xs in zip(kept_young, flat):
        offsets += f.eval_vec(xs)
    for k, xs in zip(keep, flat):
        logw_fixed += model.weights[k].log_eval_vec(xs)
    live = np.isfinite(offsets) & (logw_fixed > -INF)
    sub_youngs = tuple(model.young_parts[k] for k in rest)
    sub_weights = tuple(
        AxisWeight(pos, model.weights[k])
        for pos, k in enumerate(rest)
        if not _is_flat(model.weights[k])
    )
    for idx in np.nonzero(live)[0]:
        integrand = ProductIntegrand(
            dim=len(rest),
            cap_factors=(CapFactor(sub_youngs, model.cap, float(offsets[idx])),),
            axis_weights=sub_weights,
        )
        values[idx] = integrate_product(integrand, spec) * math.exp(logw_fixed[idx])
    values /= total
    shape = tuple(len(g) for g in grid_axes)
    return ProjectionDensity(keep, grid_axes, values.reshape(shape), total)


# ---------------------------------------------------------------------------
# The projection constant
# ---------------------------------------------------------------------------


def c_constant(n: int, k: int) -> float:
    """``integral_0^1 (1 - s^(1/(n-k)))^k ds`` by adaptive quadrature."""
    if not 1 <= k < n:
        raise QuadratureError("need 1 <= k < n")
    p = 1.0 / (n - k)
    val, _ = _scipy_integrate.quad(
        lambda s: (1.0 - s**p) ** k, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200
    )
    return float(val)
