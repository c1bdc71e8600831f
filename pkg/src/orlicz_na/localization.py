"""Plane bisection that localizes a weighted-ratio violation to a segment.

Given an orthant model ``s``, a numerator/denominator pair ``f, g`` and a
positive weight ``h`` for which the strict inequality

    (integral of f h s) / (integral of g h s)  <  (integral of f s) / (integral of g s)

holds, the loop cuts a planar spanned set over the first two coordinates
with lines through a dense pivot enumeration, always keeping the half
whose plain ``f``-to-``g`` ratio equals the global one and whose weighted
ratio stays below the global weighted bound.  The nested sets shrink to a
(near-)segment carrying a log-concave one-dimensional profile on which
the ratio facts of the conclusion can be read off directly.

Cuts rotate clockwise from vertical to horizontal; the vertical cut's
east half can only lower the plain ratio and the horizontal cut's south
half can only raise it, so a continuity (Darboux) argument always yields
an angle equalizing the ratio on both halves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Union

import numpy as np

from . import geometry
from .model import OrliczModel, SpannedSet
from .na import _restricted_slice
from .quadrature import (
    CapFactor,
    PolygonConstraint,
    QuadratureSpec,
    build_grid,
    integrand_for_model,
    mass,
    ratio_defined,
)
from .reports import VerificationReport
from .scalars import LogConcaveScalar, indicator
from .theta import PreconditionError, RATIO_TOL


class LocalizationError(RuntimeError):
    """The loop hit a state the theory forbids; carries the step history."""

    def __init__(self, message: str, history: Optional[list] = None):
        super().__init__(message)
        self.history = history or []


# ---------------------------------------------------------------------------
# Function specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthantFunction:
    """Vectorized function on orthant points with declared axis kinks."""

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: Mapping[int, tuple[float, ...]] = field(default_factory=dict)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(points), dtype=float)


@dataclass(frozen=True)
class SlicePair:
    """``f`` and ``g`` are the model's own level slices at ``z2 > z1 > 0``.

    The pair the monotone ratio theory covers: ``f(x) = s(x, z2)`` and
    ``g(x) = s(x, z1)`` as functions of the remaining coordinates ``x``.
    The slice ratios are only monotone relative to the *reduced* reference
    measure — the indicator of the lower slice's support, times optional
    per-axis log-concave weights — so anything consuming a slice pair
    first drops the level coordinate and swaps the model for that carrier;
    ``h`` and reported geometry then live on the reduced space too.
    """

    z1: float
    z2: float

    def __post_init__(self):
        if not 0.0 < self.z1 < self.z2:
            raise PreconditionError("slice pair needs 0 < z1 < z2")


PairSpec = Union[SlicePair, tuple]


def _as_orthant_function(h) -> OrthantFunction:
    if isinstance(h, OrthantFunction):
        return h
    return OrthantFunction(h)


class _SlicePairEval:
    """Node-level slice values on the reduced space, with grid factors.

    Points have one column per non-level parent coordinate; the values are
    the full parent density at the fixed levels (parent cap and weights
    included), which is what the ratio theory compares.
    """

    def __init__(self, model: OrliczModel, pair: SlicePair):
        zaxis = model.dim - 1
        f_z = model.young_parts[zaxis]
        w_z = model.weights[zaxis]
        self._model = model
        self._zaxis = zaxis
        self._wf = w_z(pair.z2)
        self._wg = w_z(pair.z1)
        youngs = tuple(model.young_parts[:zaxis])
        self._cf = CapFactor(youngs, model.cap, offset=f_z(pair.z2), structural=True)
        self._cg = CapFactor(youngs, model.cap, offset=f_z(pair.z1), structural=True)
        self.structural = (self._cf, self._cg)
        self.breakpoints: dict[int, tuple[float, ...]] = {}

    def arrays(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pw = np.ones(points.shape[0])
        for i in range(self._zaxis):
            pw *= self._model.weights[i].eval_vec(points[:, i])
        return (
            self._cf.values(points) * (self._wf * pw),
            self._cg.values(points) * (self._wg * pw),
        )


class _CallablePairEval:
    def __init__(self, f: OrthantFunction, g: OrthantFunction):
        self._f, self._g = f, g
        self.structural: tuple[CapFactor, ...] = ()
        self.breakpoints = _merge_breaks(f.breakpoints, g.breakpoints)

    def arrays(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._f(points), self._g(points)


def _merge_breaks(*maps) -> dict[int, tuple[float, ...]]:
    out: dict[int, set] = {}
    for m in maps:
        for ax, vals in (m or {}).items():
            out.setdefault(int(ax), set()).update(float(v) for v in vals)
    return {ax: tuple(sorted(vals)) for ax, vals in out.items()}


def _work_instance(
    model: OrliczModel,
    fg: PairSpec,
    u_weights: Optional[Iterable[Optional[LogConcaveScalar]]] = None,
) -> tuple[OrliczModel, object]:
    """Model and pair evaluator in the space the ratio theory lives on.

    Callable pairs are taken at face value on ``model`` itself.  A
    :class:`SlicePair` is rewritten onto the carrier of the lower slice:
    the level coordinate is dropped and the reference measure becomes the
    indicator of the remaining budget (optionally weighted by ``u_weights``),
    which is the exact setting in which the slice ratios are monotone.
    """
    if isinstance(fg, SlicePair):
        if model.dim < 2:
            raise PreconditionError("slice pairs need a level coordinate")
        zaxis = model.dim - 1
        f_z = model.young_parts[zaxis]
        w_z = model.weights[zaxis]
        budget = model.cap.support[1] - f_z(fg.z1)
        if not (math.isfinite(budget) and budget > 0.0 and w_z(fg.z1) > 0.0):
            raise PreconditionError(
                "the lower slice carries no mass at z1=%g" % fg.z1
            )
        uw = tuple(u_weights) if u_weights is not None else (None,) * zaxis
        if len(uw) != zaxis:
            raise PreconditionError(
                "u_weights needs one entry per non-level coordinate"
            )
        carrier = OrliczModel(tuple(model.young_parts[:zaxis]), indicator(0.0, budget), uw)
        return carrier, _SlicePairEval(model, fg)
    if u_weights is not None:
        raise PreconditionError("u_weights only apply to slice pairs")
    f, g = fg
    return model, _CallablePairEval(_as_orthant_function(f), _as_orthant_function(g))


# ---------------------------------------------------------------------------
# Region integrals
# ---------------------------------------------------------------------------


@dataclass
class _RegionSums:
    s: float = 0.0
    f: float = 0.0
    g: float = 0.0
    fh: float = 0.0
    gh: float = 0.0


def _region_grid(
    model: OrliczModel,
    pair_eval,
    h: Optional[OrthantFunction],
    polygon: Optional[SpannedSet],
    spec: QuadratureSpec,
):
    integrand = integrand_for_model(model)
    if pair_eval.structural:
        integrand = replace(
            integrand, cap_factors=integrand.cap_factors + pair_eval.structural
        )
    breaks = _merge_breaks(pair_eval.breakpoints, h.breakpoints if h else {})
    if breaks:
        per_axis = tuple(tuple(breaks.get(ax, ())) for ax in range(model.dim))
        integrand = replace(integrand, extra_breakpoints=per_axis)
    if polygon is not None:
        integrand = integrand.with_polygon(
            PolygonConstraint(tuple(polygon.vertices), 0, 1)
        )
    return build_grid(integrand, spec)


def _region_sums(
    model: OrliczModel,
    pair_eval,
    h: Optional[OrthantFunction],
    polygon: Optional[SpannedSet],
    spec: QuadratureSpec,
) -> _RegionSums:
    """The five region integrals (s, fs, gs, fhs, ghs) on one shared grid."""
    grid = _region_grid(model, pair_eval, h, polygon, spec)
    if grid.points.shape[0] == 0:
        return _RegionSums()
    fv, gv = pair_eval.arrays(grid.points)
    out = _RegionSums(
        s=grid.mass, f=grid.weighted_sum(fv), g=grid.weighted_sum(gv)
    )
    if h is not None:
        hv = h(grid.points)
        out.fh = grid.weighted_sum(fv * hv)
        out.gh = grid.weighted_sum(gv * hv)
    return out


def _safe_ratio(num: float, den: float, scale: float) -> Optional[float]:
    return num / den if ratio_defined(num, den, scale) else None


# ---------------------------------------------------------------------------
# Pivot enumeration
# ---------------------------------------------------------------------------


class _PivotEnumerator:
    """Dyadic plane points ``(k/2^d, j/2^d)`` in coarse-to-fine order.

    Levels run over increasing ``d``; within a level the points are
    lexicographic in ``(k, j)``, skipping points already listed at a coarser
    level (both indices even).  The cursor only moves forward: the sets are
    nested, so a point rejected once can never become interior later.  Each
    call windows the scan to the current bounding box, which keeps the work
    per level proportional to the lattice points the box actually holds.
    """

    def __init__(self, max_depth: int = 60):
        self.max_depth = max_depth
        self._d = 0
        self._k = 0
        self._j = -1

    def next_interior(self, spanned: SpannedSet) -> Optional[tuple[float, float]]:
        xs = [v[0] for v in spanned.vertices]
        ys = [v[1] for v in spanned.vertices]
        bx0, bx1, by0, by1 = min(xs), max(xs), min(ys), max(ys)
        tol = max(1e-12, 1e-4 * spanned.diameter())
        while self._d <= self.max_depth:
            n = 1 << self._d
            klo = max(0, math.ceil(bx0 * n))
            khi = math.floor(bx1 * n)
            jlo = max(0, math.ceil(by0 * n))
            jhi = math.floor(by1 * n)
            k = max(self._k, klo)
            j = self._j if k == self._k else jlo - 1
            while k <= khi:
                j = max(j + 1, jlo)
                while j <= jhi:
                    if not (self._d > 0 and k % 2 == 0 and j % 2 == 0):
                        p = (k / n, j / n)
                        if spanned.contains_interior(p, tol):
                            self._k, self._j = k, j
                            return p
                    j += 1
                k += 1
                j = jlo - 1
            self._d += 1
            self._k, self._j = 0, -1
        return None


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass
class MeasureProfile:
    """Discretized density along one plane axis of the terminal set."""

    axis: int
    positions: np.ndarray
    values: np.ndarray
    midpoint_margin: float
    log_concave: bool


@dataclass
class LocalizationState:
    step: int
    current: Optional[SpannedSet]
    pivot: Optional[tuple[float, float]]
    ratio_target: float
    h_ratio_bound: float
    history: list = field(default_factory=list)


@dataclass
class LocalizationResult:
    terminal_set: Optional[SpannedSet]
    approx_interval: tuple[tuple[float, float], tuple[float, float]]
    measure_profile: Optional[MeasureProfile]
    final_ratios: dict
    state: LocalizationState
    converged: bool
    steps: int
    terminal_width: float = 0.0

    @property
    def history(self) -> list:
        return self.state.history


# ---------------------------------------------------------------------------
# The main loop
# ---------------------------------------------------------------------------


def _entry_state(model, fg, h, spec, u_weights):
    """Shared head of the ratio computations: grids, checks, global sums."""
    work, pair_eval = _work_instance(model, fg, u_weights)
    if work.dim > 4:
        raise PreconditionError("localization supports dimension <= 4")
    if spec is None:
        spec = QuadratureSpec.for_dim(work.dim)
    h_fn = _as_orthant_function(h)
    grid = _region_grid(work, pair_eval, h_fn, None, spec)
    if grid.points.shape[0] == 0:
        raise PreconditionError("the model carries no mass")
    fv, gv = pair_eval.arrays(grid.points)
    hv = h_fn(grid.points)
    live = grid.base > 0.0
    if live.any():
        if not float(hv[live].min()) > 0.0:
            raise PreconditionError("h must be bounded below by a positive constant")
        if float(fv[live].min()) < 0.0 or float(gv[live].min()) < 0.0:
            raise PreconditionError("f and g must be nonnegative")
        fg_top = max(float(fv[live].max()), float(gv[live].max()), 1e-300)
        stray = (fv[live] > 1e-9 * fg_top) & (gv[live] <= 1e-12 * fg_top)
        if stray.any():
            raise PreconditionError("f must vanish wherever g does")
    total = _RegionSums(
        s=grid.mass,
        f=grid.weighted_sum(fv),
        g=grid.weighted_sum(gv),
        fh=grid.weighted_sum(fv * hv),
        gh=grid.weighted_sum(gv * hv),
    )
    scale = max(abs(total.f), abs(total.g), abs(total.fh), abs(total.gh))
    if not (
        ratio_defined(total.f, total.g, scale)
        and ratio_defined(total.fh, total.gh, scale)
    ):
        raise PreconditionError("global ratios are undefined; nothing to localize")
    target = total.f / total.g
    h_bound = total.fh / total.gh
    return work, pair_eval, h_fn, spec, total, scale, target, h_bound


def global_ratio_pair(
    model: OrliczModel,
    fg: PairSpec,
    h,
    spec: Optional[QuadratureSpec] = None,
    u_weights: Optional[Iterable[Optional[LogConcaveScalar]]] = None,
) -> tuple[float, float]:
    """Global plain and ``h``-weighted ``f/g`` ratios of an instance.

    The strict gap ``plain - weighted > 0`` is the violation hypothesis the
    localization loop requires; callers verify it here first without paying
    for any iteration.
    """
    *_, target, h_bound = _entry_state(model, fg, h, spec, u_weights)
    return target, h_bound


def localize(
    model: OrliczModel,
    fg: PairSpec,
    h,
    stop_diameter: float = 1e-3,
    max_steps: int = 200,
    spec: Optional[QuadratureSpec] = None,
    quad_tol: float = 1e-6,
    pivot_sequence: Optional[Iterable[tuple[float, float]]] = None,
    profile_resolution: int = 65,
    mass_floor_fraction: float = 1e-9,
    u_weights: Optional[Iterable[Optional[LogConcaveScalar]]] = None,
) -> LocalizationResult:
    """Shrink a plane-spanned set to a segment, preserving the ratio facts.

    ``fg`` is either a :class:`SlicePair` or a pair of orthant functions;
    ``h`` must be positive and must make the weighted ratio strictly
    smaller than the plain one (checked first; otherwise there is no
    violation to localize).  Each step keeps, among the two halves of a
    ratio-equalizing cut, one whose weighted ratio stays below the global
    weighted bound; per-step records land in the result history.

    ``stop_diameter`` bounds the terminal set's minimal width: the nested
    sets close down on a segment, so it is the transverse extent that
    vanishes, while the long axis may keep positive length.  The result
    reports that segment (``approx_interval``) with a density profile on
    it.

    With a :class:`SlicePair` the loop runs on the lower slice's carrier
    (level coordinate dropped); ``h``, the pivots and all reported
    geometry then refer to that reduced space.
    """
    if stop_diameter <= 0.0 or max_steps < 0:
        raise PreconditionError("need stop_diameter > 0 and max_steps >= 0")
    work, pair_eval, h_fn, spec, total, scale, target, h_bound = _entry_state(
        model, fg, h, spec, u_weights
    )
    band = 10.0 * quad_tol * max(1.0, abs(target))
    if not target - h_bound > quad_tol * max(1.0, abs(target)):
        raise PreconditionError(
            "no violation to localize: weighted ratio "
            f"{h_bound:.6g} does not sit strictly below the plain ratio {target:.6g}"
        )

    state = LocalizationState(
        step=0, current=None, pivot=None, ratio_target=target, h_ratio_bound=h_bound
    )

    if work.dim == 1:
        lo, hi = work.support_box()[0]
        profile = MeasureProfile(
            axis=0,
            positions=np.linspace(lo, hi, profile_resolution),
            values=np.ones(profile_resolution),
            midpoint_margin=0.0,
            log_concave=True,
        )
        return LocalizationResult(
            terminal_set=None,
            approx_interval=((lo,), (hi,)),
            measure_profile=profile,
            final_ratios={
                "target": target,
                "h_bound": h_bound,
                "terminal_plain": target,
                "terminal_weighted": h_bound,
                "kwar1_drift": 0.0,
                "conclusion_margin": target - h_bound,
            },
            state=state,
            converged=True,
            steps=0,
        )

    box = work.support_box()
    current = SpannedSet.rectangle(box[0][0], box[1][0], box[0][1], box[1][1])
    state.current = current
    mass_floor = mass_floor_fraction * max(total.s, 0.0)
    pivots = iter(pivot_sequence) if pivot_sequence is not None else None
    enum = _PivotEnumerator()
    cur_sums = total
    converged = current.width() < stop_diameter
    steps_done = 0

    for step in range(max_steps):
        if converged:
            break
        if cur_sums.s <= mass_floor:
            raise LocalizationError(
                f"step {step}: set mass {cur_sums.s:.3g} fell below the floor",
                state.history,
            )
        cur_ratio = _safe_ratio(cur_sums.f, cur_sums.g, scale)
        if cur_ratio is None or abs(cur_ratio - target) > band:
            raise LocalizationError(
                f"step {step}: ratio invariant broken "
                f"(ratio {cur_ratio}, target {target:.9g})",
                state.history,
            )
        pivot = _next_pivot(pivots, enum, current)
        if pivot is None:
            raise LocalizationError(
                f"step {step}: pivot enumeration exhausted", state.history
            )
        state.pivot = pivot

        angle, chosen, chosen_sums, note = _divide(
            work, pair_eval, h_fn, current, cur_sums, pivot, target, h_bound,
            band, scale, spec, state.history, step,
        )
        width = chosen.width()
        ratio_now = _safe_ratio(chosen_sums.f, chosen_sums.g, scale)
        wratio_now = _safe_ratio(chosen_sums.fh, chosen_sums.gh, scale)
        state.history.append(
            {
                "step": step,
                "pivot": pivot,
                "angle": angle,
                "half": note,
                "mass": chosen_sums.s,
                "ratio": ratio_now,
                "kwar2_margin": None
                if wratio_now is None
                else h_bound + band - wratio_now,
                "width": width,
                "diameter": chosen.diameter(),
            }
        )
        current = chosen
        cur_sums = chosen_sums
        state.current = current
        state.step = step + 1
        steps_done = step + 1
        if width < stop_diameter:
            converged = True

    terminal = current
    xs = [v[0] for v in terminal.vertices]
    ys = [v[1] for v in terminal.vertices]
    a = (min(xs), min(ys))
    b = (max(xs), max(ys))
    profile = _terminal_profile(work, terminal, profile_resolution, spec)
    term_plain = _safe_ratio(cur_sums.f, cur_sums.g, scale)
    term_weighted = _safe_ratio(cur_sums.fh, cur_sums.gh, scale)
    final_ratios = {
        "target": target,
        "h_bound": h_bound,
        "terminal_plain": term_plain,
        "terminal_weighted": term_weighted,
        "kwar1_drift": None if term_plain is None else abs(term_plain - target),
        "conclusion_margin": None
        if term_weighted is None
        else target - term_weighted,
    }
    return LocalizationResult(
        terminal_set=terminal,
        approx_interval=(a, b),
        measure_profile=profile,
        final_ratios=final_ratios,
        state=state,
        converged=converged,
        steps=steps_done,
        terminal_width=terminal.width(),
    )


def _next_pivot(pivots, enum: _PivotEnumerator, current: SpannedSet):
    if pivots is None:
        return enum.next_interior(current)
    tol = max(1e-12, 1e-4 * current.diameter())
    for p in pivots:
        if current.contains_interior((float(p[0]), float(p[1])), tol):
            return (float(p[0]), float(p[1]))
    return None


#: masked endpoint gaps closer to zero than this (times the ratio scale)
#: trigger an exact endpoint evaluation instead of an interior search
_MASK_PAD = 0.02
_EXACT_EVALS_MAX = 80


def _divide(
    model, pair_eval, h_fn, current, cur_sums, pivot, target, h_bound, band,
    scale, spec, history, step,
):
    """One Darboux division: find the angle, then pick the surviving half.

    The angle search equalizes the two halves' plain ratios against each
    other (the complement side comes from the current set's totals, so
    each trial costs one clipped grid).  A single grid on the current set
    steers the search through masked node sums first; the angle is then
    confirmed and refined on exactly clipped grids.  The global target
    enters twice: the east/south endpoint guards that the theory demands,
    and the final filter both halves must pass.
    """
    grid = _region_grid(model, pair_eval, h_fn, current, spec)
    pts = grid.points
    if pts.shape[0] == 0:
        raise LocalizationError(
            f"step {step}: current set carries no quadrature nodes", history
        )
    fv, gv = pair_eval.arrays(pts)
    w = grid.qweights * grid.base
    wf, wg = w * fv, w * gv
    tot_f_m, tot_g_m = float(wf.sum()), float(wg.sum())
    dx = pts[:, 0] - pivot[0]
    dy = pts[:, 1] - pivot[1]
    eq_tol = 0.25 * band

    def masked_diff(angle: float) -> Optional[float]:
        side = dx * math.cos(angle) - dy * math.sin(angle) >= 0.0
        f_p, g_p = float(wf[side].sum()), float(wg[side].sum())
        r_p = _safe_ratio(f_p, g_p, scale)
        r_m = _safe_ratio(tot_f_m - f_p, tot_g_m - g_p, scale)
        if r_p is None or r_m is None:
            return None
        return r_p - r_m

    exact_cache: dict[float, tuple] = {}

    def exact(angle: float) -> tuple:
        """(plus, minus, sums_plus, r_plus, r_minus) at an exact clip."""
        if angle not in exact_cache:
            if len(exact_cache) >= _EXACT_EVALS_MAX:
                raise LocalizationError(
                    f"step {step}: angle search did not settle within "
                    f"{_EXACT_EVALS_MAX} exact evaluations",
                    history,
                )
            plus, minus = current.split(pivot, angle)
            sums = _region_sums(model, pair_eval, h_fn, plus, spec)
            r_p = _safe_ratio(sums.f, sums.g, scale)
            r_m = _safe_ratio(cur_sums.f - sums.f, cur_sums.g - sums.g, scale)
            exact_cache[angle] = (plus, minus, sums, r_p, r_m)
        return exact_cache[angle]

    def diff_at(angle: float) -> Optional[float]:
        _, _, _, r_p, r_m = exact(angle)
        if r_p is None:
            raise _PlusEmpty(angle)
        if r_m is None:
            raise _MinusEmpty(angle)
        return r_p - r_m

    def keep_minus(angle: float, note: str) -> tuple:
        _, minus, _, _, _ = exact(angle)
        return (
            angle,
            minus,
            _region_sums(model, pair_eval, h_fn, minus, spec),
            note,
        )

    pad = _MASK_PAD * max(1.0, abs(target))
    de_mask = masked_diff(0.0)
    ds_mask = masked_diff(math.pi / 2.0)
    angle = None
    try:
        # endpoint decisions (and the theory guards) are always exact
        if de_mask is None or de_mask > -pad:
            _, _, _, r_p, r_m = exact(0.0)
            if r_p is None:
                return keep_minus(0.0, "west (east side empty)")
            if r_p - target > band:
                raise LocalizationError(
                    f"step {step}: east half ratio exceeds the target by "
                    f"{r_p - target:.3g}",
                    history,
                )
            if r_m is None or r_p - r_m >= -eq_tol:
                angle = 0.0
        if angle is None and (ds_mask is None or ds_mask < pad):
            _, _, _, r_p, r_m = exact(math.pi / 2.0)
            if r_p is None:
                return keep_minus(math.pi / 2.0, "north (south side empty)")
            if r_p - target < -band:
                raise LocalizationError(
                    f"step {step}: south half ratio undershoots the target by "
                    f"{target - r_p:.3g}",
                    history,
                )
            if r_m is None or r_p - r_m <= eq_tol:
                angle = math.pi / 2.0
        if angle is None:
            warm = _masked_root(masked_diff, de_mask, ds_mask)
            angle = _exact_root(diff_at, warm, eq_tol, target, exact, band, step, history)
    except _PlusEmpty as stop:
        return keep_minus(stop.angle, "minus (plus side empty)")
    except _MinusEmpty as stop:
        angle = stop.angle

    plus, minus, sums_plus, _, _ = exact(angle)
    sums_minus = _region_sums(model, pair_eval, h_fn, minus, spec)
    candidates = []
    for name, half, sums in (("plus", plus, sums_plus), ("minus", minus, sums_minus)):
        ratio = _safe_ratio(sums.f, sums.g, scale)
        wratio = _safe_ratio(sums.fh, sums.gh, scale)
        if ratio is None or abs(ratio - target) > band:
            continue
        if wratio is None or wratio > h_bound + band:
            continue
        candidates.append((name, half, sums))
    if not candidates:
        raise LocalizationError(
            f"step {step}: neither half keeps both ratio invariants", history
        )
    name, half, sums = max(candidates, key=lambda c: c[2].s)
    return angle, half, sums, name


class _PlusEmpty(Exception):
    def __init__(self, angle: float):
        self.angle = angle


class _MinusEmpty(Exception):
    def __init__(self, angle: float):
        self.angle = angle


def _masked_root(masked_diff, de, ds) -> Optional[float]:
    """Bisect the masked ratio difference; irregularities defer to exact."""
    if de is None or ds is None or not de < 0.0 < ds:
        return None
    lo, hi = 0.0, math.pi / 2.0
    for _ in range(18):
        mid = 0.5 * (lo + hi)
        dm = masked_diff(mid)
        if dm is None:
            return None
        if dm > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _exact_root(
    diff_at, warm: Optional[float], eq_tol: float, target: float, exact,
    band: float, step, history,
) -> float:
    """Angle where the halves' exactly-evaluated ratios agree within ``eq_tol``.

    Establishes a sign bracket (around ``warm`` when available, else the
    full quarter turn) and closes in by secant steps safeguarded with
    bisection.  Empty-side conditions surface as exceptions from
    ``diff_at`` and are resolved by the caller.
    """
    lo, hi = 0.0, math.pi / 2.0
    if warm is not None:
        width = 0.02 * math.pi
        for _ in range(4):
            a = max(0.0, warm - width)
            b = min(math.pi / 2.0, warm + width)
            da, db = diff_at(a), diff_at(b)
            if da < 0.0 < db:
                lo, hi = a, b
                break
            width *= 4.0
    dlo, dhi = diff_at(lo), diff_at(hi)
    if not dlo < 0.0 < dhi:  # masked steering inconsistent with exact sums
        lo, hi = 0.0, math.pi / 2.0
        dlo, dhi = diff_at(lo), diff_at(hi)
        if dlo > 0.0 or dhi < 0.0:
            # the rotation monotonicity the theory promises is absent;
            # report against the global target for the diagnosis
            r_e = exact(0.0)[3]
            if r_e is not None and r_e - target > band:
                raise LocalizationError(
                    f"step {step}: east half ratio exceeds the target by "
                    f"{r_e - target:.3g}",
                    history,
                )
            r_s = exact(math.pi / 2.0)[3]
            if r_s is not None and r_s - target < -band:
                raise LocalizationError(
                    f"step {step}: south half ratio undershoots the target by "
                    f"{target - r_s:.3g}",
                    history,
                )
    best, best_diff = (lo, dlo) if abs(dlo) <= abs(dhi) else (hi, dhi)
    for _ in range(48):
        if abs(best_diff) <= eq_tol:
            return best
        mid = 0.5 * (lo + hi)
        if abs(dhi - dlo) > 1e-300:
            sec = lo - dlo * (hi - lo) / (dhi - dlo)
            margin = 0.05 * (hi - lo)
            if lo + margin < sec < hi - margin:
                mid = sec
        if not lo < mid < hi:
            break
        dm = diff_at(mid)
        if abs(dm) < abs(best_diff):
            best, best_diff = mid, dm
        if dm > 0.0:
            hi, dhi = mid, dm
        else:
            lo, dlo = mid, dm
    if abs(best_diff) <= 4.0 * eq_tol:  # one band: the filter still decides
        return best
    raise LocalizationError(
        f"step {step}: could not equalize the halves' ratios "
        f"(best difference {best_diff:.3g} vs tolerance {eq_tol:.3g})",
        history,
    )


# ---------------------------------------------------------------------------
# Terminal profile
# ---------------------------------------------------------------------------


def _terminal_profile(
    model: OrliczModel,
    terminal: SpannedSet,
    resolution: int,
    spec: QuadratureSpec,
    tol: float = 1e-6,
) -> Optional[MeasureProfile]:
    """Mass density along the dominant plane axis of the terminal set."""
    xs = [v[0] for v in terminal.vertices]
    ys = [v[1] for v in terminal.vertices]
    spans = (max(xs) - min(xs), max(ys) - min(ys))
    axis = 0 if spans[0] >= spans[1] else 1
    other = 1 - axis
    lo = min(xs) if axis == 0 else min(ys)
    hi = max(xs) if axis == 0 else max(ys)
    if not hi > lo:
        return None
    pad = 1e-9 * (hi - lo)
    positions = np.linspace(lo + pad, hi - pad, resolution)
    verts = list(terminal.vertices)
    if axis == 1:
        verts = [(y, x) for x, y in verts]
        verts = geometry.ensure_ccw(verts)
    band_lo, band_hi = geometry.slice_interval_vec(verts, positions)
    child_spec = QuadratureSpec.for_dim(max(model.dim - 1, 1))
    values = np.zeros(resolution)
    from .scalars import indicator

    for i, (t, blo, bhi) in enumerate(zip(positions, band_lo, band_hi)):
        if blo > bhi:
            continue
        u = [None] * (model.dim - 1)
        u[other if other < axis else other - 1] = indicator(float(blo), float(bhi))
        child = _restricted_slice(model, axis, float(t), u)
        if child is None:
            continue
        values[i] = mass(child, child_spec)
    top = values.max()
    if top <= 0.0:
        return MeasureProfile(axis, positions, values, math.nan, False)
    norm = values / top
    margin = math.inf
    for i in range(1, resolution - 1):
        trio = norm[i - 1], norm[i], norm[i + 1]
        if min(trio) <= 1e-12:
            continue
        margin = min(margin, trio[1] * trio[1] / (trio[0] * trio[2]) - 1.0)
    if margin is math.inf:
        margin = 0.0
    return MeasureProfile(axis, positions, norm, margin, margin >= -tol)


def directional_ratio_samples(
    model: OrliczModel,
    fg: PairSpec,
    point: tuple[float, float],
    angle: float,
    n_points: int = 25,
    u_weights: Optional[Iterable[Optional[LogConcaveScalar]]] = None,
) -> list[tuple[float, float]]:
    """Pointwise ``f/g`` along the cut direction of ``angle`` through ``point``.

    The chord is clipped to the support box.  Entries are ``(t, ratio)``
    with ``t`` the signed distance from ``point``; undefined ratios are
    dropped.  Increasing-direction monotonicity (non-increasing ratio) is
    the caller's assertion.
    """
    work, pair_eval = _work_instance(model, fg, u_weights)
    if work.dim < 2:
        raise PreconditionError("ratio profiles need at least two coordinates")
    d, _ = geometry.cut_direction(angle)
    box = work.support_box()
    t_lo, t_hi = -math.inf, math.inf
    for axis in (0, 1):
        lo, hi = box[axis]
        p, v = point[axis], d[axis]
        if abs(v) < 1e-15:
            if not lo <= p <= hi:
                return []
            continue
        a, b = (lo - p) / v, (hi - p) / v
        t_lo = max(t_lo, min(a, b))
        t_hi = min(t_hi, max(a, b))
    if not t_hi > t_lo or math.isinf(t_lo) or math.isinf(t_hi):
        return []
    pad = 1e-9 * (t_hi - t_lo)
    ts = np.linspace(t_lo + pad, t_hi - pad, n_points)
    pts = np.column_stack((point[0] + ts * d[0], point[1] + ts * d[1]))
    fv, gv = pair_eval.arrays(pts)
    top = max(float(np.max(np.abs(fv))), float(np.max(np.abs(gv))), 1e-300)
    out = []
    for t, fval, gval in zip(ts, fv, gv):
        if gval > 1e-12 * top:
            out.append((float(t), float(fval) / float(gval)))
    return out


def terminal_ratio_profile(
    model: OrliczModel,
    spanned: SpannedSet,
    fg: PairSpec,
    n_points: int = 9,
    spec: Optional[QuadratureSpec] = None,
) -> list[tuple[float, float]]:
    """Sampled ``f``-to-``g`` slice ratios along the first plane axis.

    The theory makes this non-increasing wherever defined; callers compare
    consecutive entries.  Slices with undefined ratio are dropped.  Like
    :func:`localize`, a :class:`SlicePair` moves the computation (and the
    meaning of ``spanned``) to the lower slice's carrier.
    """
    work, pair_eval = _work_instance(model, fg)
    if work.dim < 2:
        raise PreconditionError("ratio profiles need at least two coordinates")
    xs = [v[0] for v in spanned.vertices]
    lo, hi = min(xs), max(xs)
    pad = 1e-9 * max(hi - lo, 1.0)
    positions = np.linspace(lo + pad, hi - pad, n_points)
    band_lo, band_hi = geometry.slice_interval_vec(list(spanned.vertices), positions)
    child_spec = spec or QuadratureSpec.for_dim(max(work.dim - 1, 1))
    from .quadrature import model_grid

    out = []
    for t, blo, bhi in zip(positions, band_lo, band_hi):
        if blo > bhi:
            continue
        u = [None] * (work.dim - 1)
        u[0] = indicator(float(blo), float(bhi))
        child = _restricted_slice(work, 0, float(t), u)
        if child is None:
            continue
        grid = model_grid(child, child_spec)
        if grid.points.shape[0] == 0:
            continue
        slice_points = np.insert(grid.points, 0, float(t), axis=1)
        fv, gv = pair_eval.arrays(slice_points)
        num = grid.weighted_sum(fv)
        den = grid.weighted_sum(gv)
        ratio = _safe_ratio(num, den, abs(num) + abs(den))
        if ratio is not None:
            out.append((float(t), ratio))
    return out


# ---------------------------------------------------------------------------
# Vertical-split ratio check
# ---------------------------------------------------------------------------


def check_horline(
    model: OrliczModel,
    spanned: SpannedSet,
    x0: float,
    fg: PairSpec,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Left half of a vertical split never has the smaller ``f/g`` ratio.

    Splits ``spanned`` along ``x = x0`` and checks the ratio inequality in
    product form on one pair of clipped grids; an undefined side passes by
    convention.  A :class:`SlicePair` is evaluated on the lower slice's
    carrier, so ``spanned`` must live in that reduced plane.
    """
    xs = [v[0] for v in spanned.vertices]
    if not (min(xs) < x0 < max(xs)) or not spanned.area() > 0.0:
        raise PreconditionError("the vertical line must meet the set's interior")
    work, pair_eval = _work_instance(model, fg)
    if work.dim < 2:
        raise PreconditionError("vertical splits need at least two coordinates")
    if spec is None:
        spec = QuadratureSpec.for_dim(work.dim)
    ylo, yhi = geometry.slice_interval_vec(
        list(spanned.vertices), np.array([x0])
    )
    point = (x0, 0.5 * float(ylo[0] + yhi[0]))
    east, west = spanned.split(point, 0.0)
    s_west = _region_sums(work, pair_eval, None, west, spec)
    s_east = _region_sums(work, pair_eval, None, east, spec)
    scale = max(abs(s_west.f), abs(s_west.g), abs(s_east.f), abs(s_east.g))
    defined = ratio_defined(s_west.f, s_west.g, scale) and ratio_defined(
        s_east.f, s_east.g, scale
    )
    if not defined:
        return VerificationReport(
            name="vertical-split-ratio",
            passed=True,
            n_checked=1,
            n_undefined=1,
            tolerance=tol,
            meta={"x0": x0, "note": "one side carries no mass"},
        )
    left = s_west.f * s_east.g
    right = s_east.f * s_west.g
    margin = (left - right) / max(abs(left), abs(right), 1e-300) + tol
    return VerificationReport(
        name="vertical-split-ratio",
        passed=margin >= 0.0,
        n_checked=1,
        n_violations=int(margin < 0.0),
        worst_margin=margin,
        tolerance=tol,
        meta={
            "x0": x0,
            "west_ratio": s_west.f / s_west.g,
            "east_ratio": s_east.f / s_east.g,
        },
    )
