"""Orlicz-ball type densities on the nonnegative orthant and their sons.

A model is the triple (Young parts, per-axis weights, cap):

    s(x) = cap( sum_i young_i(x_i) ) * prod_i weight_i(x_i),   x >= 0,

extended by zero outside the orthant.  The cap is log-concave with compact
support and maximum at 0, so the density support is compact whenever every
Young part eventually leaves the cap support.

Three "son" constructions produce new models of the same shape:

* ``MultiplyWeight`` -- multiply one axis weight by a log-concave factor;
* ``HyperplaneRestrict`` -- restrict to the hyperplane ``x_i = a x_j + b``
  and drop axis ``i``; the Young parts and weights of the two axes merge
  and the cap is shifted by ``young_i(b)``;
* ``OriginShift`` -- move the origin to a point of the orthant.

The reflexive-transitive closure of these maps is the descendant relation
used by the hereditary checks.  Every transform records a lineage entry
holding the embedding back into the parent coordinates, which is what the
closure tests replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import geometry
from .scalars import (
    INF,
    DegenerateFunctionError,
    DomainError,
    LogConcaveScalar,
    YoungFunction,
    compose_shift_young,
    constant_one,
    indicator,
    log_affine,
    log_quadratic,
    shift_young,
    young_infinite,
    young_power,
    young_zero_with_cutoff,
)


class ModelError(ValueError):
    """Raised for invalid model construction or transform arguments."""


# ---------------------------------------------------------------------------
# Son transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplyWeight:
    index: int
    weight: LogConcaveScalar


@dataclass(frozen=True)
class HyperplaneRestrict:
    """Restrict to ``x_i = a x_j + b`` (``i != j``, ``a, b >= 0``)."""

    i: int
    j: int
    a: float
    b: float


@dataclass(frozen=True)
class OriginShift:
    point: tuple[float, ...]


SonTransform = Union[MultiplyWeight, HyperplaneRestrict, OriginShift]


@dataclass(frozen=True)
class LineageRecord:
    """One applied transform plus enough data to replay the embedding."""

    transform: SonTransform
    parent_dim: int
    degenerate: bool = False

    def embed_to_parent(self, y: np.ndarray) -> np.ndarray:
        """Map a child point to the parent point with equal density."""
        t = self.transform
        y = np.asarray(y, dtype=float)
        if isinstance(t, MultiplyWeight):
            return y
        if isinstance(t, OriginShift):
            return y + np.asarray(t.point)
        x = np.empty(self.parent_dim)
        child_idx = [k for k in range(self.parent_dim) if k != t.i]
        for pos, k in enumerate(child_idx):
            x[k] = y[pos]
        x[t.i] = t.a * y[child_idx.index(t.j)] + t.b
        return x


@dataclass(frozen=True)
class Splitting:
    """Ordered partition of ``range(dim)`` into two blocks."""

    indices_1: tuple[int, ...]
    indices_2: tuple[int, ...]

    def validate(self, dim: int) -> None:
        both = list(self.indices_1) + list(self.indices_2)
        if sorted(both) != list(range(dim)):
            raise ModelError(
                f"splitting {self.indices_1}|{self.indices_2} does not partition"
                f" range({dim})"
            )
        if not self.indices_1 or not self.indices_2:
            raise ModelError("both blocks of a splitting must be nonempty")


# ---------------------------------------------------------------------------
# The model
# ---------------------------------------------------------------------------


class OrliczModel:
    """Immutable density ``cap(sum young_i(x_i)) * prod weight_i(x_i)``."""

    def __init__(
        self,
        young_parts: Sequence[YoungFunction],
        cap: LogConcaveScalar,
        weights: Optional[Sequence[LogConcaveScalar]] = None,
        lineage: Sequence[LineageRecord] = (),
        validate: bool = True,
    ):
        self.young_parts = tuple(young_parts)
        self.dim = len(self.young_parts)
        if weights is None:
            weights = [None] * self.dim
        self.weights = tuple(
            constant_one() if w is None else w for w in weights
        )
        self.cap = cap
        self.lineage = tuple(lineage)
        self._box: Optional[list[tuple[float, float]]] = None
        if validate:
            self._validate()

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if self.dim < 1:
            raise ModelError("model needs at least one coordinate")
        if len(self.weights) != self.dim:
            raise ModelError("one weight per coordinate required")
        if self.cap.is_zero:
            return  # degenerate but representable: density is identically zero
        lo, hi = self.cap.support
        if not math.isfinite(hi):
            raise ModelError("cap must have compact support")
        if lo > 0.0:
            raise ModelError("cap support must contain 0")
        # max at 0 (sampled); log-concave with mode at 0 is nonincreasing
        ts = np.linspace(0.0, hi, 33)
        vals = self.cap.eval_vec(ts)
        if np.any(vals > vals[0] + 1e-9 * max(vals[0], 1.0)):
            raise ModelError("cap must attain its maximum at 0")

    @property
    def degenerate(self) -> bool:
        return any(rec.degenerate for rec in self.lineage)

    # -- evaluation ---------------------------------------------------------

    def young_sum(self, x: Sequence[float]) -> float:
        total = 0.0
        for f, xi in zip(self.young_parts, x):
            v = f(xi)
            if math.isinf(v):
                return INF
            total += v
        return total

    def density(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ModelError(f"expected a point of dimension {self.dim}")
        if np.any(x < 0):
            return 0.0
        total = self.young_sum(x)
        if math.isinf(total):
            return 0.0
        val = self.cap(total)
        if val == 0.0:
            return 0.0
        for w, xi in zip(self.weights, x):
            val *= w(float(xi))
            if val == 0.0:
                return 0.0
        return val

    def density_vec(self, points: np.ndarray) -> np.ndarray:
        """Densities for an ``(N, dim)`` array (zero off the orthant)."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ModelError(f"expected an (N, {self.dim}) array")
        inside = (points >= 0).all(axis=1)
        out = np.zeros(points.shape[0])
        if not inside.any():
            return out
        pts = points[inside]
        total = np.zeros(pts.shape[0])
        logw = np.zeros(pts.shape[0])
        for k in range(self.dim):
            total = total + self.young_parts[k].eval_vec(pts[:, k])
            logw = logw + self.weights[k].log_eval_vec(pts[:, k])
        vals = np.zeros(pts.shape[0])
        finite = np.isfinite(total) & (logw > -INF)
        if finite.any():
            vals[finite] = self.cap.eval_vec(total[finite]) * np.exp(logw[finite])
        out[inside] = vals
        return out

    # -- support ------------------------------------------------------------

    def support_box(self) -> list[tuple[float, float]]:
        """Exact per-axis bounds of the density support (closed box hull)."""
        if self._box is not None:
            return self._box
        if self.cap.is_zero:
            self._box = [(0.0, 0.0)] * self.dim
            return self._box
        cap_hi = self.cap.support[1]
        lows = []
        for k in range(self.dim):
            w = self.weights[k]
            lows.append(0.0 if w.is_zero else max(0.0, w.support[0]))
        base = [self.young_parts[k](lows[k]) for k in range(self.dim)]
        box = []
        for k in range(self.dim):
            if self.weights[k].is_zero or math.isinf(base[k]):
                box = [(0.0, 0.0)] * self.dim
                break
            others = sum(b for i, b in enumerate(base) if i != k)
            budget = cap_hi - others
            t = self.young_parts[k].inverse_upper(budget) if budget >= 0 else None
            if t is None:
                box = [(0.0, 0.0)] * self.dim
                break
            hi = t
            if not self.weights[k].is_zero and math.isfinite(self.weights[k].support[1]):
                hi = min(hi, self.weights[k].support[1])
            if hi < lows[k]:
                box = [(0.0, 0.0)] * self.dim
                break
            box.append((lows[k], hi))
        if len(box) != self.dim:
            box = [(0.0, 0.0)] * self.dim
        self._box = box
        return box

    def has_empty_support(self) -> bool:
        return all(hi <= lo for lo, hi in self.support_box()) and self.density(
            [lo for lo, _ in self.support_box()]
        ) == 0.0

    # -- transforms ----------------------------------------------------------

    def apply_son(self, transform: SonTransform, validate: bool = True) -> "OrliczModel":
        """Apply one son transform; see the module docstring for the maps."""
        if isinstance(transform, MultiplyWeight):
            return self._apply_multiply(transform, validate)
        if isinstance(transform, HyperplaneRestrict):
            return self._apply_restrict(transform, validate)
        if isinstance(transform, OriginShift):
            return self._apply_shift(transform, validate)
        raise ModelError(f"unknown transform {transform!r}")

    def _apply_multiply(self, t: MultiplyWeight, validate: bool) -> "OrliczModel":
        if not 0 <= t.index < self.dim:
            raise ModelError(f"weight index {t.index} out of range")
        weights = list(self.weights)
        weights[t.index] = weights[t.index].multiply(t.weight)
        rec = LineageRecord(t, self.dim, degenerate=weights[t.index].is_zero)
        return OrliczModel(
            self.young_parts, self.cap, weights, self.lineage + (rec,), validate=validate
        )

    def _apply_restrict(self, t: HyperplaneRestrict, validate: bool) -> "OrliczModel":
        if t.i == t.j:
            raise ModelError("hyperplane restriction needs distinct indices")
        for idx in (t.i, t.j):
            if not 0 <= idx < self.dim:
                raise ModelError(f"index {idx} out of range")
        if t.a < 0 or t.b < 0:
            raise ModelError("restriction needs a >= 0 and b >= 0")
        if self.dim < 2:
            raise ModelError("cannot restrict a one-dimensional model")
        f_i, f_j = self.young_parts[t.i], self.young_parts[t.j]
        w_i, w_j = self.weights[t.i], self.weights[t.j]
        f_i_b = INF if f_i.identically_infinite else f_i(t.b)
        degenerate = False
        if math.isinf(f_i_b):
            merged_young: YoungFunction = young_infinite()
            new_cap = self.cap
            merged_weight = w_j
            degenerate = True
        else:
            try:
                merged_young = compose_shift_young(f_i, t.a, t.b, f_j)
            except DegenerateFunctionError:
                merged_young = young_infinite()
                degenerate = True
            merged_weight = w_i.affine_precompose(t.a, t.b).multiply(w_j)
            new_cap = self.cap.shift(f_i_b).restrict(0.0, INF)
            if new_cap.is_zero or merged_weight.is_zero:
                degenerate = True
        youngs = [f for k, f in enumerate(self.young_parts) if k != t.i]
        weights = [w for k, w in enumerate(self.weights) if k != t.i]
        j_child = t.j if t.j < t.i else t.j - 1
        youngs[j_child] = merged_young
        weights[j_child] = merged_weight
        if merged_young.identically_infinite:
            degenerate = True
        rec = LineageRecord(t, self.dim, degenerate=degenerate)
        return OrliczModel(youngs, new_cap, weights, self.lineage + (rec,), validate=validate)

    def _apply_shift(self, t: OriginShift, validate: bool) -> "OrliczModel":
        point = tuple(float(v) for v in t.point)
        if len(point) != self.dim:
            raise ModelError("shift point dimension mismatch")
        if any(v < 0 for v in point):
            raise ModelError("shift point must lie in the nonnegative orthant")
        total = self.young_sum(point)
        if math.isinf(total):
            raise ModelError("cannot move the origin to a point with infinite Young sum")
        youngs = []
        degenerate = False
        for f, xi in zip(self.young_parts, point):
            if xi == 0.0:
                youngs.append(f)
                continue
            try:
                youngs.append(shift_young(f, xi))
            except DegenerateFunctionError:
                youngs.append(young_infinite())
                degenerate = True
        weights = [
            w if xi == 0.0 else w.shift(xi) for w, xi in zip(self.weights, point)
        ]
        new_cap = self.cap.shift(total).restrict(0.0, INF)
        if new_cap.is_zero or any(w.is_zero for w in weights):
            degenerate = True
        rec = LineageRecord(OriginShift(point), self.dim, degenerate=degenerate)
        return OrliczModel(youngs, new_cap, weights, self.lineage + (rec,), validate=validate)

    # -- descendant sampling --------------------------------------------------

    def random_descendant(
        self, depth: int, seed: int, max_resample: int = 40
    ) -> "OrliczModel":
        """Random chain of ``depth`` sons, resampling degenerate draws.

        Transform kinds are drawn uniformly (hyperplane restrictions only
        while ``dim >= 2``); ``a, b`` from ``[0, 2]``, shifts uniformly
        within the support box.
        """
        rng = np.random.default_rng(seed)
        cur = self
        for _ in range(depth):
            nxt = None
            for _ in range(max_resample):
                cand = _random_son(cur, rng)
                if cand is None:
                    continue
                child = cur.apply_son(cand)
                if child.degenerate or child.has_empty_support():
                    continue
                nxt = child
                break
            if nxt is None:
                break  # keep the current model; chain may end early
            cur = nxt
        return cur

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"OrliczModel(dim={self.dim}, lineage={len(self.lineage)})"


def _random_son(model: OrliczModel, rng: np.random.Generator) -> Optional[SonTransform]:
    kinds = ["multiply", "shift"]
    if model.dim >= 2:
        kinds.append("restrict")
    kind = kinds[int(rng.integers(len(kinds)))]
    box = model.support_box()
    if kind == "multiply":
        idx = int(rng.integers(model.dim))
        lo, hi = box[idx]
        hi = hi if hi > lo else lo + 1.0
        choice = int(rng.integers(3))
        if choice == 0:
            w = indicator(lo, lo + (hi - lo) * float(rng.uniform(0.3, 1.0)))
        elif choice == 1:
            w = log_affine(-float(rng.uniform(0.0, 1.5)))
        else:
            w = log_quadratic(-float(rng.uniform(0.0, 0.8)), 0.0, 0.0)
        return MultiplyWeight(idx, w)
    if kind == "restrict":
        i, j = rng.choice(model.dim, size=2, replace=False)
        a = float(rng.uniform(0.0, 2.0))
        b_hi = box[int(i)][1]
        b = float(rng.uniform(0.0, max(b_hi * 0.5, 0.25)))
        return HyperplaneRestrict(int(i), int(j), a, b)
    point = tuple(
        float(rng.uniform(0.0, max(hi * 0.4, 1e-6))) for (_, hi) in box
    )
    return OriginShift(point)


# ---------------------------------------------------------------------------
# Spanned sets
# ---------------------------------------------------------------------------

MAX_SPANNED_VERTICES = 64


@dataclass(frozen=True)
class SpannedSet:
    """Convex planar compact set containing its min and max corner points."""

    vertices: tuple[geometry.Point, ...]
    lo: geometry.Point
    hi: geometry.Point

    @staticmethod
    def from_vertices(vertices: Sequence[geometry.Point], validate: bool = True) -> "SpannedSet":
        pts = geometry.prune_degenerate(geometry.ensure_ccw(list(vertices)))
        if len(pts) > MAX_SPANNED_VERTICES:
            raise ModelError(f"spanned set exceeds {MAX_SPANNED_VERTICES} vertices")
        xmin, ymin, xmax, ymax = geometry.bounding_box(pts)
        lo, hi = (xmin, ymin), (xmax, ymax)
        if validate:
            scale = max(abs(xmax), abs(ymax), 1.0)
            tol = 1e-9 * scale
            if not geometry.contains_point(pts, lo, tol) or not geometry.contains_point(
                pts, hi, tol
            ):
                raise ModelError(
                    "set is not spanned: it must contain its min/max corner points"
                )
        return SpannedSet(tuple(pts), lo, hi)

    @staticmethod
    def rectangle(x0: float, y0: float, x1: float, y1: float) -> "SpannedSet":
        return SpannedSet.from_vertices([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def area(self) -> float:
        return geometry.polygon_area(self.vertices)

    def diameter(self) -> float:
        return geometry.diameter(self.vertices)

    def width(self) -> float:
        """Minimal width: how far the set is from a straight segment."""
        return geometry.min_width(self.vertices)

    def contains_interior(self, p: geometry.Point, tol: float = 1e-9) -> bool:
        return geometry.is_interior(self.vertices, p, tol)

    def split(self, point: geometry.Point, angle: float) -> tuple["SpannedSet", "SpannedSet"]:
        """Cut along the clockwise-rotating line through ``point``.

        Returns ``(plus, minus)``: the east side at ``angle = 0`` rotating to
        the south side at ``angle = pi/2``.  Both halves are spanned again.
        """
        if not 0.0 <= angle <= math.pi / 2.0 + 1e-12:
            raise ModelError("cut angle must lie in [0, pi/2]")
        if not self.contains_interior(point):
            raise ModelError(f"cut point {point} is not interior to the set")
        _, n = geometry.cut_direction(angle)
        plus = geometry.clip_halfplane(list(self.vertices), point, n)
        minus = geometry.clip_halfplane(list(self.vertices), point, (-n[0], -n[1]))
        return (
            SpannedSet.from_vertices(plus),
            SpannedSet.from_vertices(minus),
        )


# ---------------------------------------------------------------------------
# Stock models
# ---------------------------------------------------------------------------


def simplex_model(dim: int, level: float) -> OrliczModel:
    """Uniform density on ``{x >= 0 : sum x_i <= level}``."""
    return OrliczModel(
        [young_power(1.0, 1.0) for _ in range(dim)],
        indicator(0.0, level),
    )


def triangle_model() -> OrliczModel:
    """Uniform on the triangle ``{x, y >= 0, x + y <= 2}``; the workhorse."""
    return simplex_model(2, 2.0)


def cube_model(sides: Sequence[float], slack: float = 1.0) -> OrliczModel:
    """Product (uniform-box) model; the cap level never binds."""
    sides = [float(s) for s in sides]
    return OrliczModel(
        [young_zero_with_cutoff(s) for s in sides],
        indicator(0.0, len(sides) * slack + 1.0),
    )


def lp_ball_model(dim: int, p: float, level: float = 1.0) -> OrliczModel:
    """Uniform on the orthant part of the ``l_p`` ball ``sum x_i^p <= level``."""
    return OrliczModel(
        [young_power(1.0, p) for _ in range(dim)],
        indicator(0.0, level),
    )
