"""Negative-association checks for orthant models.

The central quantity is the covariance of two bounded coordinate-wise
monotone test functions acting on disjoint coordinate blocks, computed
under the normalized model measure.  Low dimensions are handled exactly
by the panel quadrature; higher dimensions fall back to Monte Carlo with
an influence-function standard error.

Also here: the two slice-ratio inequalities the covariance bound rests
on -- monotonicity of h-weighted slice means in the level of the last
coordinate, and the cross-block ratio bound for a pair of decreasing
functions on complementary blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import HyperplaneRestrict, MultiplyWeight, OrliczModel, Splitting
from .quadrature import QuadratureSpec, model_grid, ratio_defined
from .reports import VerificationReport
from .sampler import sample

#: absolute covariance tolerance per unit product of test-function ranges
COV_TOL_SCALE = 1e-6

#: default tolerance for ratio-inequality margins
RATIO_TOL = 1e-8

FORMS = ("threshold_indicator", "clipped_linear", "min_of_coordinates", "product_of_ramps")


class IndexOverlapError(ValueError):
    """Test functions for a covariance must act on disjoint blocks."""


class UndefinedMeasureError(ValueError):
    """The model measure has no mass; expectations are undefined."""


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneTestFunction:
    """Bounded coordinate-wise monotone function of selected coordinates.

    Four parametric forms; every form is increasing in its raw shape and
    ``direction="decreasing"`` flips it inside the same value range.

    * ``threshold_indicator`` -- product of per-index indicators
      ``1{x_i > thresholds[k]}``.
    * ``clipped_linear`` -- ``clip(sum weights[k] * x_i, *clip)``.
    * ``min_of_coordinates`` -- ``min(min_k scales[k] * x_i, cap)``.
    * ``product_of_ramps`` -- product of ``clip((x_i - lo)/(hi - lo), 0, 1)``.
    """

    indices: tuple[int, ...]
    form: str
    direction: str = "increasing"
    thresholds: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    clip: tuple[float, float] = (0.0, 1.0)
    scales: tuple[float, ...] = ()
    cap: float = 1.0
    ramps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.indices or len(set(self.indices)) != len(self.indices):
            raise ValueError("indices must be a nonempty set of distinct coordinates")
        if any(i < 0 for i in self.indices):
            raise ValueError("indices must be nonnegative")
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}")
        if self.direction not in ("increasing", "decreasing"):
            raise ValueError(f"unknown direction {self.direction!r}")
        k = len(self.indices)
        if self.form == "threshold_indicator" and len(self.thresholds) != k:
            raise ValueError("one threshold per index required")
        if self.form == "clipped_linear":
            if len(self.weights) != k:
                raise ValueError("one weight per index required")
            if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
                raise ValueError("weights must be nonnegative, not all zero")
            if not self.clip[0] < self.clip[1]:
                raise ValueError("clip bounds must satisfy lo < hi")
        if self.form == "min_of_coordinates":
            if len(self.scales) != k:
                raise ValueError("one scale per index required")
            if any(a <= 0 for a in self.scales) or not self.cap > 0:
                raise ValueError("scales and cap must be positive")
        if self.form == "product_of_ramps":
            if len(self.ramps) != k:
                raise ValueError("one (lo, hi) ramp per index required")
            if any(not lo < hi for lo, hi in self.ramps):
                raise ValueError("each ramp needs lo < hi")

    def range(self) -> tuple[float, float]:
        """The declared finite value interval."""
        if self.form == "clipped_linear":
            return self.clip
        if self.form == "min_of_coordinates":
            return (0.0, self.cap)
        return (0.0, 1.0)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cols = points[:, list(self.indices)]
        if self.form == "threshold_indicator":
            raw = np.all(cols > np.asarray(self.thresholds), axis=1).astype(float)
        elif self.form == "clipped_linear":
            raw = np.clip(cols @ np.asarray(self.weights), *self.clip)
        elif self.form == "min_of_coordinates":
            raw = np.minimum((cols * np.asarray(self.scales)).min(axis=1), self.cap)
        else:
            lo = np.asarray([r[0] for r in self.ramps])
            hi = np.asarray([r[1] for r in self.ramps])
            raw = np.clip((cols - lo) / (hi - lo), 0.0, 1.0).prod(axis=1)
        if self.direction == "decreasing":
            vlo, vhi = self.range()
            return vlo + vhi - raw
        return raw

    def breakpoints(self) -> dict[int, tuple[float, ...]]:
        """Axis-aligned kink/jump positions, for panel alignment."""
        out: dict[int, tuple[float, ...]] = {}
        if self.form == "threshold_indicator":
            for i, t in zip(self.indices, self.thresholds):
                out[i] = (t,)
        elif self.form == "product_of_ramps":
            for i, (lo, hi) in zip(self.indices, self.ramps):
                out[i] = (lo, hi)
        elif self.form == "clipped_linear" and len(self.indices) == 1:
            w = self.weights[0]
            if w > 0:
                out[self.indices[0]] = (self.clip[0] / w, self.clip[1] / w)
        elif self.form == "min_of_coordinates":
            for i, a in zip(self.indices, self.scales):
                out[i] = (self.cap / a,)
        return out


def merged_breakpoints(*fns: MonotoneTestFunction) -> dict[int, tuple[float, ...]]:
    out: dict[int, set[float]] = {}
    for fn in fns:
        for axis, cuts in fn.breakpoints().items():
            out.setdefault(axis, set()).update(cuts)
    return {axis: tuple(sorted(cuts)) for axis, cuts in out.items()}


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceResult:
    """One covariance with its accuracy statement and pass flag.

    Quadrature results carry ``tolerance`` (and pass iff
    ``value <= tolerance``); Monte Carlo results carry ``std_error`` and the
    ``ci_sigmas``-sigma interval ``ci`` (and pass unless the whole interval
    is above zero).
    """

    value: float
    method: str
    std_error: Optional[float] = None
    tolerance: Optional[float] = None
    ci: Optional[tuple[float, float]] = None
    passed: bool = True
    detail: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        """Distance from the violation threshold; nonnegative means pass."""
        if self.method == "quadrature":
            return (self.tolerance or 0.0) - self.value
        return (self.ci[1] - self.ci[0]) / 2.0 - self.value if self.ci else -self.value


def covariance(
    model: OrliczModel,
    f: MonotoneTestFunction,
    g: MonotoneTestFunction,
    method: str = "auto",
    spec: Optional[QuadratureSpec] = None,
    n_samples: int = 100_000,
    seed: int = 0,
    ci_sigmas: float = 4.0,
    tolerance: Optional[float] = None,
) -> CovarianceResult:
    """Covariance of ``f`` and ``g`` under the normalized model measure.

    ``f`` and ``g`` must act on disjoint coordinate blocks.  ``method`` is
    ``quadrature`` (exact panels, dim <= 4), ``monte_carlo``, or ``auto``
    which picks quadrature whenever the dimension allows it.
    """
    overlap = set(f.indices) & set(g.indices)
    if overlap:
        raise IndexOverlapError(f"test functions share coordinates {sorted(overlap)}")
    out_of_range = [i for i in (*f.indices, *g.indices) if i >= model.dim]
    if out_of_range:
        raise ValueError(f"coordinates {out_of_range} outside model dimension {model.dim}")
    if method == "auto":
        method = "quadrature" if model.dim <= 4 else "monte_carlo"
    span_f = f.range()[1] - f.range()[0]
    span_g = g.range()[1] - g.range()[0]
    if tolerance is None:
        tolerance = COV_TOL_SCALE * span_f * span_g

    if method == "quadrature":
        grid = model_grid(model, spec, extra_breakpoints=merged_breakpoints(f, g))
        total = grid.mass
        if not total > 0.0:
            raise UndefinedMeasureError("model measure has zero mass")
        vf = f(grid.points)
        vg = g(grid.points)
        mean_f = grid.weighted_sum(vf) / total
        mean_g = grid.weighted_sum(vg) / total
        value = grid.weighted_sum(vf * vg) / total - mean_f * mean_g
        return CovarianceResult(
            value=float(value),
            method="quadrature",
            tolerance=tolerance,
            passed=bool(value <= tolerance),
        )
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")

    batch = sample(model, n_samples, seed=seed)
    vf = f(batch.points)
    vg = g(batch.points)
    cf = vf - vf.mean()
    cg = vg - vg.mean()
    value = float(np.mean(cf * cg))
    influence = cf * cg - value
    se = float(influence.std(ddof=1) / math.sqrt(len(influence)))
    ci = (value - ci_sigmas * se, value + ci_sigmas * se)
    return CovarianceResult(
        value=value,
        method="monte_carlo",
        std_error=se,
        ci=ci,
        passed=bool(ci[0] <= 0.0),
        detail={"n_samples": len(influence), "seed": seed},
    )


# ---------------------------------------------------------------------------
# Randomized sweep
# ---------------------------------------------------------------------------


def _quartiles(lo: float, hi: float) -> np.ndarray:
    span = hi - lo
    return lo + span * np.array([0.25, 0.5, 0.75])


def _random_function(
    rng: np.random.Generator,
    indices: tuple[int, ...],
    box: Sequence[tuple[float, float]],
    direction: str = "increasing",
) -> MonotoneTestFunction:
    """Random test function with kinks snapped to fixed per-axis quartiles.

    Snapping lets one cached grid (holding the three quartile cuts per axis)
    serve every trial of a sweep exactly.
    """
    form = FORMS[rng.integers(len(FORMS))]
    k = len(indices)
    if form == "threshold_indicator":
        thr = tuple(float(rng.choice(_quartiles(*box[i]))) for i in indices)
        return MonotoneTestFunction(indices, form, direction, thresholds=thr)
    if form == "clipped_linear":
        weights = tuple(rng.uniform(0.25, 1.0, size=k))
        top = sum(w * box[i][1] for w, i in zip(weights, indices))
        lo = float(rng.uniform(0.0, 0.4) * top)
        hi = lo + float(rng.uniform(0.2, 0.5) * top)
        return MonotoneTestFunction(indices, form, direction, weights=weights, clip=(lo, hi))
    if form == "min_of_coordinates":
        scales = tuple(rng.uniform(0.5, 1.5, size=k))
        tops = [a * box[i][1] for a, i in zip(scales, indices)]
        cap = float(rng.uniform(0.3, 0.9) * min(tops))
        return MonotoneTestFunction(indices, form, direction, scales=scales, cap=cap)
    ramps = []
    for i in indices:
        q = _quartiles(*box[i])
        pair = sorted(rng.choice(3, size=2, replace=False))
        ramps.append((float(q[pair[0]]), float(q[pair[1]])))
    return MonotoneTestFunction(indices, form, direction, ramps=tuple(ramps))


def _sweep_breakpoints(box: Sequence[tuple[float, float]]) -> dict[int, tuple[float, ...]]:
    return {i: tuple(_quartiles(lo, hi)) for i, (lo, hi) in enumerate(box)}


def na_sweep(
    model: OrliczModel,
    family_seed: int,
    trials: int,
    method: str = "auto",
    spec: Optional[QuadratureSpec] = None,
    n_samples: int = 100_000,
) -> list[CovarianceResult]:
    """Covariances of ``trials`` random increasing pairs on disjoint blocks."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if model.dim < 2:
        raise ValueError("a covariance sweep needs at least two coordinates")
    rng = np.random.default_rng(family_seed)
    box = model.support_box()
    snapped = _sweep_breakpoints(box)
    results = []
    for trial in range(trials):
        k1 = int(rng.integers(1, model.dim))
        k2 = int(rng.integers(1, model.dim - k1 + 1))
        perm = rng.permutation(model.dim)
        idx_f = tuple(sorted(int(i) for i in perm[:k1]))
        idx_g = tuple(sorted(int(i) for i in perm[k1 : k1 + k2]))
        f = _random_function(rng, idx_f, box)
        g = _random_function(rng, idx_g, box)
        if method == "auto":
            use = "quadrature" if model.dim <= 4 else "monte_carlo"
        else:
            use = method
        if use == "quadrature":
            grid = model_grid(model, spec, extra_breakpoints=snapped)
            total = grid.mass
            if not total > 0.0:
                raise UndefinedMeasureError("model measure has zero mass")
            vf, vg = f(grid.points), g(grid.points)
            value = float(
                grid.weighted_sum(vf * vg) / total
                - grid.weighted_sum(vf) * grid.weighted_sum(vg) / total**2
            )
            span = (f.range()[1] - f.range()[0]) * (g.range()[1] - g.range()[0])
            tol = COV_TOL_SCALE * span
            res = CovarianceResult(
                value=value, method="quadrature", tolerance=tol, passed=bool(value <= tol)
            )
        else:
            res = covariance(
                model, f, g, method="monte_carlo", n_samples=n_samples,
                seed=int(rng.integers(2**63)),
            )
        detail = dict(res.detail)
        detail.update(
            trial=trial, indices_f=idx_f, indices_g=idx_g, form_f=f.form, form_g=g.form
        )
        results.append(
            CovarianceResult(
                res.value, res.method, res.std_error, res.tolerance, res.ci,
                res.passed, detail,
            )
        )
    return results


def sweep_report(results: Sequence[CovarianceResult], name: str = "na-sweep") -> VerificationReport:
    violations = [r for r in results if not r.passed]
    margins = [r.margin for r in results]
    cases = [
        {"value": r.value, "method": r.method, **r.detail}
        for r in (violations if violations else results[:3])
    ]
    return VerificationReport(
        name=name,
        passed=not violations,
        n_checked=len(results),
        n_violations=len(violations),
        worst_margin=min(margins) if margins else None,
        tolerance=results[0].tolerance if results else None,
        cases=cases,
    )


# ---------------------------------------------------------------------------
# Slice-ratio checks
# ---------------------------------------------------------------------------


def _restricted_slice(
    model: OrliczModel, axis: int, z: float,
    u_weights: Optional[Sequence] = None,
) -> Optional[OrliczModel]:
    """The model restricted to last-coordinate level ``z`` (None if empty)."""
    other = 0 if axis != 0 else 1
    child = model.apply_son(HyperplaneRestrict(axis, other, 0.0, z), validate=False)
    if u_weights is not None:
        for pos, u in enumerate(u_weights):
            if u is not None:
                child = child.apply_son(MultiplyWeight(pos, u), validate=False)
    if child.has_empty_support():
        return None
    return child


def _slice_integrals(
    child: OrliczModel, axis: int, z: float, h: MonotoneTestFunction,
    spec: Optional[QuadratureSpec],
) -> tuple[float, float]:
    """``(integral of h * s_z, integral of s_z)`` over the slice."""
    extra: dict[int, tuple[float, ...]] = {}
    for parent_axis, cuts in h.breakpoints().items():
        pos = parent_axis if parent_axis < axis else parent_axis - 1
        if pos < child.dim:
            extra[pos] = cuts
    grid = model_grid(child, spec, extra_breakpoints=extra)
    total = grid.mass
    if grid.points.shape[0] == 0:
        return 0.0, 0.0
    parent_points = np.insert(grid.points, axis, z, axis=1)
    return grid.weighted_sum(h(parent_points)), total


def ratio_monotone_in_z(
    model: OrliczModel,
    split: Splitting,
    h: MonotoneTestFunction,
    z_grid: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
) -> list[float]:
    """Slice means ``r(z) = (integral h * s(., z)) / (integral s(., z))``.

    ``split.indices_2`` must be a single coordinate (the ``z`` slot); ``h``
    acts on the complementary block.  Undefined grid points (zero slice
    mass) come back as ``nan``.
    """
    split.validate(model.dim)
    if len(split.indices_2) != 1:
        raise ValueError("the z-slot must be a single coordinate")
    axis = split.indices_2[0]
    if any(i == axis for i in h.indices):
        raise IndexOverlapError("h must not depend on the z coordinate")
    if list(z_grid) != sorted(float(z) for z in z_grid):
        raise ValueError("z_grid must be increasing")
    values = []
    for z in z_grid:
        child = _restricted_slice(model, axis, float(z))
        if child is None:
            values.append(math.nan)
            continue
        num, den = _slice_integrals(child, axis, float(z), h, spec)
        values.append(num / den if ratio_defined(num, den, abs(num) + abs(den)) else math.nan)
    return values


def z_profile_report(
    model: OrliczModel,
    split: Splitting,
    h: MonotoneTestFunction,
    z_grid: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Assert the slice-mean profile is monotone in the level.

    For decreasing ``h`` the profile must be non-decreasing (raising the
    level shifts the conditional slice measure downward), and symmetrically
    non-increasing for increasing ``h``.
    """
    values = ratio_monotone_in_z(model, split, h, z_grid, spec)
    defined = [(z, v) for z, v in zip(z_grid, values) if not math.isnan(v)]
    scale = max((abs(v) for _, v in defined), default=1.0)
    sign = 1.0 if h.direction == "decreasing" else -1.0
    worst = math.inf
    violations = []
    for (z_a, v_a), (z_b, v_b) in zip(defined, defined[1:]):
        margin = sign * (v_b - v_a) + tol * max(scale, 1.0)
        worst = min(worst, margin)
        if margin < 0.0:
            violations.append({"z_pair": (z_a, z_b), "values": (v_a, v_b)})
    return VerificationReport(
        name="slice-mean-monotone-in-level",
        passed=not violations,
        n_checked=max(len(defined) - 1, 0),
        n_violations=len(violations),
        n_undefined=len(values) - len(defined),
        worst_margin=None if worst is math.inf else worst,
        tolerance=tol,
        cases=violations,
        meta={"direction": h.direction, "values": values},
    )


def check_slice_ratio_pair(
    model: OrliczModel,
    h: MonotoneTestFunction,
    z1: float,
    z2: float,
    u_weights: Optional[Sequence] = None,
    axis: Optional[int] = None,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Check the two-level slice inequality for a decreasing ``h``.

    With slices at levels ``z1 < z2`` of the ``axis`` coordinate (default
    last) and optional extra log-concave per-axis weights ``u_weights`` on
    the slice, the h-weighted mass ratio between the upper and lower level
    must dominate the plain mass ratio:

        (int h*s2*u) / (int h*s1*u)  >=  (int s2*u) / (int s1*u).

    Checked in product form, so one-sided quadrature bias cancels.
    """
    if not 0.0 < z1 < z2:
        raise ValueError("need 0 < z1 < z2")
    if h.direction != "decreasing":
        raise ValueError("this inequality is for decreasing h")
    if axis is None:
        axis = model.dim - 1
    if any(i == axis for i in h.indices):
        raise IndexOverlapError("h must not depend on the level coordinate")
    nums: dict[float, float] = {}
    dens: dict[float, float] = {}
    for z in (z1, z2):
        child = _restricted_slice(model, axis, z, u_weights)
        if child is None:
            nums[z], dens[z] = 0.0, 0.0
        else:
            nums[z], dens[z] = _slice_integrals(child, axis, z, h, spec)
    scale = max(abs(v) for v in (*nums.values(), *dens.values()))
    defined = ratio_defined(nums[z2], nums[z1], scale) and ratio_defined(
        dens[z2], dens[z1], scale
    )
    if not defined:
        return VerificationReport(
            name="slice-ratio-pair", passed=True, n_checked=1, n_undefined=1,
            tolerance=tol, meta={"z1": z1, "z2": z2},
        )
    left = nums[z2] * dens[z1]
    right = nums[z1] * dens[z2]
    margin = (left - right) / max(abs(left), abs(right), 1e-300) + tol
    return VerificationReport(
        name="slice-ratio-pair",
        passed=margin >= 0.0,
        n_checked=1,
        n_violations=int(margin < 0.0),
        worst_margin=margin,
        tolerance=tol,
        meta={
            "z1": z1, "z2": z2,
            "weighted_ratio": nums[z2] / nums[z1],
            "plain_ratio": dens[z2] / dens[z1],
        },
    )


def check_cross_block_ratio(
    model: OrliczModel,
    h: MonotoneTestFunction,
    h_bar: MonotoneTestFunction,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Check the cross-block ratio bound for two decreasing functions.

    For decreasing ``h`` and ``h_bar`` on disjoint blocks, reweighting the
    measure by ``h_bar`` cannot raise the mean of ``h``:

        (int h*h_bar*s) / (int h_bar*s)  <=  (int h*s) / (int s).

    Equivalent to a nonpositive covariance of the two functions; checked in
    product form on a single shared grid.
    """
    if set(h.indices) & set(h_bar.indices):
        raise IndexOverlapError("h and h_bar must act on disjoint blocks")
    if h.direction != "decreasing" or h_bar.direction != "decreasing":
        raise ValueError("both functions must be decreasing")
    grid = model_grid(model, spec, extra_breakpoints=merged_breakpoints(h, h_bar))
    total = grid.mass
    if not total > 0.0:
        raise UndefinedMeasureError("model measure has zero mass")
    vh = h(grid.points)
    vb = h_bar(grid.points)
    joint = grid.weighted_sum(vh * vb)
    mean_h = grid.weighted_sum(vh)
    mean_b = grid.weighted_sum(vb)
    if not ratio_defined(joint, mean_b, total):
        return VerificationReport(
            name="cross-block-ratio", passed=True, n_checked=1, n_undefined=1,
            tolerance=tol,
        )
    left = joint * total
    right = mean_h * mean_b
    margin = (right - left) / max(abs(left), abs(right), 1e-300) + tol
    return VerificationReport(
        name="cross-block-ratio",
        passed=margin >= 0.0,
        n_checked=1,
        n_violations=int(margin < 0.0),
        worst_margin=margin,
        tolerance=tol,
        meta={"weighted_mean": joint / mean_b, "plain_mean": mean_h / total},
    )
