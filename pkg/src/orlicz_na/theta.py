"""Slice-ratio monotonicity checks (the package's central invariant).

For an orthant model with its last coordinate singled out as a *level*
slot, the densities of two level slices ``z1 < z2`` form a ratio whose
partial integrals must be coordinate-wise monotone: integrating both
slices over any block of the remaining coordinates, the upper-to-lower
mass ratio can only fall as the fixed coordinates grow.  This module
checks that statement on sampled splittings and point pairs, on random
descendants of the model, for the two-factor product inequality it
reduces to, and along vertical slices of a planar spanned set.

All comparisons are done in product form (``I_f(x) I_g(y) >=
I_f(y) I_g(x)``) on one shared grid per fixed point, so the grid bias of
the two integrals cancels instead of entering the margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _scipy_integrate

from . import geometry
from .model import OrliczModel, SpannedSet, Splitting
from .quadrature import (
    AxisWeight,
    CapFactor,
    ProductIntegrand,
    QuadratureSpec,
    build_grid,
    integrand_for_model,
    integrate_product,
    ratio_defined,
)
from .reports import VerificationReport
from .scalars import LogConcaveScalar, indicator, multiply_logconcave

RATIO_TOL = 1e-8


class PreconditionError(ValueError):
    """An input violates a documented precondition of a check."""


# ---------------------------------------------------------------------------
# Check cases
# ---------------------------------------------------------------------------


@dataclass
class ThetaCheckCase:
    """One slice-ratio comparison between two ordered block points.

    ``model`` is the full orthant model; its last coordinate is the level
    slot.  ``splitting`` partitions the remaining coordinates into the
    fixed block (``indices_1``, where ``x <= y`` live) and the integrated
    block (``indices_2``, possibly empty -- then values are pointwise).
    The default compared pair is the two level slices at ``z2`` over
    ``z1``; custom ``f_fn``/``g_fn`` (functions of the full-space point)
    are accepted but flagged as outside the class the theory covers.
    ``u_weights`` optionally multiplies extra log-concave per-coordinate
    factors into the carrier measure.
    """

    model: OrliczModel
    splitting: Splitting
    x: tuple[float, ...]
    y: tuple[float, ...]
    z1: float = 0.0
    z2: float = 0.0
    u_weights: Optional[tuple[Optional[LogConcaveScalar], ...]] = None
    f_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    g_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    result: Optional[dict] = None

    def __post_init__(self):
        self.x = tuple(float(v) for v in self.x)
        self.y = tuple(float(v) for v in self.y)
        k = len(self.splitting.indices_1)
        if len(self.x) != k or len(self.y) != k:
            raise PreconditionError("x and y must have one value per fixed coordinate")
        if any(b < a for a, b in zip(self.x, self.y)):
            raise PreconditionError("need x <= y coordinate-wise")
        if any(v < 0 for v in self.x):
            raise PreconditionError("block points must be nonnegative")
        if self.custom_pair:
            if self.f_fn is None or self.g_fn is None:
                raise PreconditionError("custom pairs need both f_fn and g_fn")
        elif not 0.0 < self.z1 < self.z2:
            raise PreconditionError("the default slice pair needs 0 < z1 < z2")

    @property
    def custom_pair(self) -> bool:
        return self.f_fn is not None or self.g_fn is not None


def _validate_reduced_splitting(split: Splitting, reduced_dim: int) -> None:
    both = sorted(list(split.indices_1) + list(split.indices_2))
    if both != list(range(reduced_dim)):
        raise PreconditionError(
            f"splitting {split.indices_1}|{split.indices_2} does not partition the"
            f" {reduced_dim} non-level coordinates"
        )
    if not split.indices_1:
        raise PreconditionError("the fixed block of the splitting must be nonempty")


# ---------------------------------------------------------------------------
# Slice-pair integrals
# ---------------------------------------------------------------------------


def _pair_integrals(
    model: OrliczModel,
    splitting: Splitting,
    point: Sequence[float],
    z1: float,
    z2: float,
    u_weights: Optional[Sequence[Optional[LogConcaveScalar]]],
    spec: Optional[QuadratureSpec],
) -> tuple[float, float]:
    """Upper- and lower-slice integrals over the free block at one point.

    Both integrals share one grid: the lower slice's support is the
    carrier (it contains the upper slice's), and the two level caps enter
    as structural factors evaluated per integral.
    """
    zaxis = model.dim - 1
    w1, w2 = splitting.indices_1, splitting.indices_2
    f_z = model.young_parts[zaxis]
    fz1, fz2 = f_z(z1), f_z(z2)
    wn1, wn2 = model.weights[zaxis](z1), model.weights[zaxis](z2)
    if not math.isfinite(fz1) or wn1 <= 0.0:
        return 0.0, 0.0  # the lower slice (the carrier) is empty
    delta = 0.0
    const = 1.0
    for i, v in zip(w1, point):
        delta += model.young_parts[i](v)
        const *= model.weights[i](v)
        if u_weights is not None and u_weights[i] is not None:
            const *= u_weights[i](v)
    if not math.isfinite(delta) or const <= 0.0:
        return 0.0, 0.0
    cap = model.cap
    cap_end = cap.support[1]
    upper_dead = not math.isfinite(fz2)

    if not w2:
        if cap(delta + fz1) <= 0.0:  # outside the carrier support
            return 0.0, 0.0
        i_g = cap(delta + fz1) * const * wn1
        i_f = 0.0 if upper_dead else cap(delta + fz2) * const * wn2
        return i_f, i_g

    youngs = tuple(model.young_parts[j] for j in w2)
    carrier = CapFactor(youngs, indicator(0.0, cap_end), offset=delta + fz1)
    s_g = CapFactor(youngs, cap, offset=delta + fz1, structural=True)
    factors = [carrier, s_g]
    if not upper_dead:
        s_f = CapFactor(youngs, cap, offset=delta + fz2, structural=True)
        factors.append(s_f)
    axis_weights = []
    for pos, j in enumerate(w2):
        scalar = model.weights[j]
        if u_weights is not None and u_weights[j] is not None:
            scalar = multiply_logconcave(scalar, u_weights[j])
        axis_weights.append(AxisWeight(pos, scalar))
    integrand = ProductIntegrand(
        len(w2), cap_factors=tuple(factors), axis_weights=tuple(axis_weights)
    )
    grid = build_grid(integrand, spec or QuadratureSpec.for_dim(len(w2)))
    if grid.points.shape[0] == 0:
        return 0.0, 0.0
    i_g = grid.weighted_sum(s_g.values(grid.points)) * const * wn1
    i_f = (
        0.0
        if upper_dead
        else grid.weighted_sum(s_f.values(grid.points)) * const * wn2
    )
    return i_f, i_g


def _custom_pair_integrals(
    case: ThetaCheckCase, point: Sequence[float], spec: Optional[QuadratureSpec]
) -> tuple[float, float]:
    """Integrals of user f and g against the model over the free block."""
    model = case.model
    w1, w2 = case.splitting.indices_1, case.splitting.indices_2
    fixed = dict(zip(w1, point))

    def embed(points_w2: np.ndarray) -> np.ndarray:
        full = np.empty((points_w2.shape[0], model.dim))
        for pos, j in enumerate(w2):
            full[:, j] = points_w2[:, pos]
        for j, v in fixed.items():
            full[:, j] = v
        return full

    delta = sum(model.young_parts[i](v) for i, v in fixed.items())
    const = math.prod(model.weights[i](v) for i, v in fixed.items())
    if not math.isfinite(delta) or const <= 0.0:
        return 0.0, 0.0
    if not w2:
        full = embed(np.zeros((1, 0)))
        value = model.cap(delta) * const
        return (
            float(np.asarray(case.f_fn(full)).ravel()[0]) * value,
            float(np.asarray(case.g_fn(full)).ravel()[0]) * value,
        )
    youngs = tuple(model.young_parts[j] for j in w2)
    integrand = ProductIntegrand(
        len(w2),
        cap_factors=(CapFactor(youngs, model.cap, offset=delta),),
        axis_weights=tuple(AxisWeight(pos, model.weights[j]) for pos, j in enumerate(w2)),
    )
    grid = build_grid(integrand, spec or QuadratureSpec.for_dim(len(w2)))
    if grid.points.shape[0] == 0:
        return 0.0, 0.0
    full = embed(grid.points)
    return (
        grid.weighted_sum(np.asarray(case.f_fn(full), dtype=float)) * const,
        grid.weighted_sum(np.asarray(case.g_fn(full), dtype=float)) * const,
    )


def _product_margin(
    fx: float, gx: float, fy: float, gy: float, tol: float
) -> tuple[Optional[float], bool]:
    """Signed relative margin of ``f(x)/g(x) >= f(y)/g(y)``; None if undefined."""
    scale = max(abs(fx), abs(gx), abs(fy), abs(gy))
    if not (ratio_defined(fx, gx, scale) and ratio_defined(fy, gy, scale)):
        return None, True
    left = fx * gy
    right = fy * gx
    margin = (left - right) / max(abs(left), abs(right), 1e-300) + tol
    return margin, margin >= 0.0


def check_theta(
    case: ThetaCheckCase,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Check one ordered point pair of the slice-ratio monotonicity.

    Passes when ``I_f(x)/I_g(x) >= I_f(y)/I_g(y)`` within ``tol`` (checked
    in product form) or when either side is undefined.
    """
    model = case.model
    reduced = model.dim - 1 if not case.custom_pair else model.dim
    _validate_reduced_splitting(case.splitting, reduced)
    if case.custom_pair:
        fx, gx = _custom_pair_integrals(case, case.x, spec)
        fy, gy = _custom_pair_integrals(case, case.y, spec)
    else:
        fx, gx = _pair_integrals(
            model, case.splitting, case.x, case.z1, case.z2, case.u_weights, spec
        )
        fy, gy = _pair_integrals(
            model, case.splitting, case.y, case.z1, case.z2, case.u_weights, spec
        )
    margin, ok = _product_margin(fx, gx, fy, gy, tol)
    undefined = margin is None
    case.result = {
        "ratio_x": fx / gx if not undefined and gx != 0.0 else None,
        "ratio_y": fy / gy if not undefined and gy != 0.0 else None,
        "undefined": undefined,
    }
    return VerificationReport(
        name="slice-ratio-pairwise",
        passed=ok,
        n_checked=1,
        n_violations=int(not ok),
        n_undefined=int(undefined),
        worst_margin=margin,
        tolerance=tol,
        meta={
            "x": case.x,
            "y": case.y,
            "splitting": [case.splitting.indices_1, case.splitting.indices_2],
            "ratios": (case.result["ratio_x"], case.result["ratio_y"]),
            "outside_proven_class": case.custom_pair,
        },
    )


# ---------------------------------------------------------------------------
# Randomized sweeps
# ---------------------------------------------------------------------------


def _reduced_splittings(reduced_dim: int) -> list[Splitting]:
    """Every splitting of the non-level coordinates with a nonempty fixed block."""
    axes = list(range(reduced_dim))
    out = []
    for mask in range(1, 2**reduced_dim):
        w1 = tuple(a for a in axes if mask & (1 << a))
        w2 = tuple(a for a in axes if not mask & (1 << a))
        out.append(Splitting(w1, w2))
    return out


def _draw_levels(
    model: OrliczModel, rng: np.random.Generator, upper_frac: float = 1.0
) -> Optional[tuple[float, float]]:
    """Two ordered levels with positive weight and finite growth part.

    ``upper_frac`` restricts the draw to the lower part of the level
    support; low levels leave the slices the most room and stress the
    monotonicity the hardest.
    """
    zaxis = model.dim - 1
    lo, hi = model.support_box()[zaxis]
    if not hi > lo:
        return None
    hi_draw = lo + (hi - lo) * upper_frac
    f_z, w_z = model.young_parts[zaxis], model.weights[zaxis]
    for _ in range(40):
        z = np.sort(rng.uniform(lo + 1e-9, hi_draw, size=2))
        if z[0] <= 0.0 or z[1] - z[0] < 1e-9 * (hi - lo):
            continue
        if all(math.isfinite(f_z(v)) and w_z(v) > 0.0 for v in z):
            return float(z[0]), float(z[1])
    if upper_frac < 1.0:
        return _draw_levels(model, rng)
    return None


def _point_chain(
    rng: np.random.Generator, box: Sequence[tuple[float, float]], m: int
) -> np.ndarray:
    """``m`` coordinate-wise ordered points spread over the block box."""
    cols = [np.sort(rng.uniform(lo, hi, size=m)) for lo, hi in box]
    return np.column_stack(cols)


def _carrier_box(
    model: OrliczModel, axes: Sequence[int], z: float
) -> Optional[list[tuple[float, float]]]:
    """Per-axis ranges where the slice at level ``z`` can still have mass.

    Beyond ``f_i^{-1}(cap_end - f_z(z))`` the slice is empty no matter what
    the other coordinates do, so sampling there only produces vacuous
    comparisons (undefined, or zero against zero).  None when the slice is
    empty even at the block origin.
    """
    box = model.support_box()
    budget = model.cap.support[1] - model.young_parts[model.dim - 1](z)
    if not budget > 0.0:
        return None
    out = []
    for i in axes:
        lo, hi = box[i]
        t = model.young_parts[i].inverse_upper(budget)
        if t is not None:
            hi = min(hi, t)
        out.append((lo, max(lo, hi)))
    return out


def _chain_size(pairs: int) -> int:
    m = 2
    while m * (m - 1) // 2 < pairs:
        m += 1
    return m


def theta_sweep(
    model: OrliczModel,
    seed: int,
    pairs_per_splitting: int = 50,
    max_splittings: int = 20,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
    u_weight_factory: Optional[Callable[[np.random.Generator, float], LogConcaveScalar]] = None,
    level_draws: int = 3,
    name: str = "slice-ratio-sweep",
) -> VerificationReport:
    """Randomized slice-ratio monotonicity sweep over one model.

    Enumerates every splitting of the non-level coordinates (sampling
    ``max_splittings`` of them when there are more) and checks at least
    ``pairs_per_splitting`` ordered pairs per splitting, spread over
    ``level_draws`` independent random level pairs so no single level
    choice decides what the sweep can see; each draw contributes all
    ordered pairs of a coordinate-wise point chain.
    """
    if model.dim < 2:
        raise PreconditionError("need at least one non-level coordinate")
    rng = np.random.default_rng(seed)
    reduced = model.dim - 1
    splittings = _reduced_splittings(reduced)
    if len(splittings) > max_splittings:
        keep = rng.choice(len(splittings), size=max_splittings, replace=False)
        splittings = [splittings[int(i)] for i in sorted(keep)]
    box = model.support_box()
    n_checked = n_violations = n_undefined = 0
    worst = math.inf
    cases: list[dict] = []
    level_pairs: list[tuple[float, float]] = []
    u_weights: Optional[list] = None
    if u_weight_factory is not None:
        u_weights = [
            u_weight_factory(rng, box[i][1]) if rng.random() < 0.5 else None
            for i in range(reduced)
        ]
    draws = max(1, level_draws)
    m = _chain_size(-(-pairs_per_splitting // draws))
    for split in splittings:
        for k in range(draws):
            levels = _draw_levels(model, rng, upper_frac=1.0 / 3.0 if k == 0 else 1.0)
            if levels is None:
                n_undefined += 1
                continue
            z1, z2 = levels
            level_pairs.append(levels)
            # sample where the upper slice is alive at the block origin;
            # pairs beyond it compare zero against zero, carrying nothing
            chain_box = _carrier_box(model, split.indices_1, z2) or _carrier_box(
                model, split.indices_1, z1
            )
            if chain_box is None:
                n_undefined += 1
                continue
            chain = _point_chain(rng, chain_box, m)
            ints = [
                _pair_integrals(model, split, p, z1, z2, u_weights, spec)
                for p in chain
            ]
            for a in range(len(chain)):
                for b in range(a + 1, len(chain)):
                    margin, ok = _product_margin(*ints[a], *ints[b], tol)
                    n_checked += 1
                    if margin is None:
                        n_undefined += 1
                        continue
                    worst = min(worst, margin)
                    if not ok:
                        n_violations += 1
                        if len(cases) < 8:
                            cases.append(
                                {
                                    "splitting": [split.indices_1, split.indices_2],
                                    "levels": levels,
                                    "x": [round(v, 6) for v in chain[a]],
                                    "y": [round(v, 6) for v in chain[b]],
                                    "margin": margin,
                                }
                            )
    return VerificationReport(
        name=name,
        passed=n_violations == 0,
        n_checked=n_checked,
        n_violations=n_violations,
        n_undefined=n_undefined,
        worst_margin=None if worst is math.inf else worst,
        tolerance=tol,
        cases=cases,
        meta={"levels": level_pairs, "splittings": len(splittings)},
    )


def check_hereditary_theta(
    model: OrliczModel,
    depth: int,
    trials: int,
    seed: int,
    spec: Optional[QuadratureSpec] = None,
    pairs_per_splitting: int = 10,
    max_splittings: int = 3,
    tol: float = RATIO_TOL,
) -> VerificationReport:
    """Slice-ratio sweep over random descendants of the model.

    Each trial draws a descendant of random depth up to ``depth`` (depth 0
    reproduces the model itself) and runs a reduced sweep on it; the class
    is closed under the transforms, so every descendant must pass.
    """
    if model.dim > 4:
        raise PreconditionError("hereditary sweeps support dimension <= 4")
    if depth < 0 or trials < 1:
        raise PreconditionError("need depth >= 0 and trials >= 1")
    rng = np.random.default_rng(seed)
    n_checked = n_violations = n_undefined = skipped = 0
    worst = math.inf
    cases: list[dict] = []
    for trial in range(trials):
        d = int(rng.integers(0, depth + 1))
        child = None
        for _ in range(8):
            candidate = model.random_descendant(d, int(rng.integers(2**63)))
            if candidate.dim >= 2 and not candidate.has_empty_support():
                child = candidate
                break
        if child is None:
            skipped += 1
            continue
        sub = theta_sweep(
            child,
            seed=int(rng.integers(2**63)),
            pairs_per_splitting=pairs_per_splitting,
            max_splittings=max_splittings,
            spec=spec,
            tol=tol,
        )
        n_checked += sub.n_checked
        n_violations += sub.n_violations
        n_undefined += sub.n_undefined
        if sub.worst_margin is not None:
            worst = min(worst, sub.worst_margin)
        for c in sub.cases:
            if len(cases) < 8:
                cases.append({"trial": trial, "depth": d, **c})
    return VerificationReport(
        name="slice-ratio-descendants",
        passed=n_violations == 0,
        n_checked=n_checked,
        n_violations=n_violations,
        n_undefined=n_undefined,
        worst_margin=None if worst is math.inf else worst,
        tolerance=tol,
        cases=cases,
        meta={"depth": depth, "trials": trials, "skipped": skipped},
    )


# ---------------------------------------------------------------------------
# The two-factor product inequality
# ---------------------------------------------------------------------------


def _p_value(
    r, t: float, v_dim: Optional[int], spec: Optional[QuadratureSpec]
) -> float:
    """``P_t``: the integral of ``r(t, .)`` over the remaining orthant axes."""
    if isinstance(r, OrliczModel):
        if t < 0:
            raise PreconditionError("offsets must be nonnegative for model-backed r")
        if r.dim == 0:
            return r.cap(t)
        return integrate_product(integrand_for_model(r, offset=t))
    if v_dim is None:
        raise PreconditionError("callable r needs v_dim (number of integrated axes)")
    if v_dim == 0:
        return float(r(t))
    if v_dim == 1:
        val, _ = _scipy_integrate.quad(lambda v: r(t, v), 0.0, np.inf, limit=200)
        return float(val)
    if v_dim == 2:
        val, _ = _scipy_integrate.dblquad(
            lambda v2, v1: r(t, v1, v2), 0.0, np.inf, 0.0, np.inf
        )
        return float(val)
    raise PreconditionError("callable r supports at most two integrated axes")


def check_pl_product(
    log_concave_r,
    a: float,
    b: float,
    c: float,
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
    v_dim: Optional[int] = None,
) -> VerificationReport:
    """Check ``P_a * P_{a+b+c} <= P_{a+b} * P_{a+c}`` for log-concave data.

    ``log_concave_r`` is either an orthant model (then ``P_t`` integrates
    its density with the cap argument shifted by ``t``) or a callable
    ``r(t, *v)`` over ``v_dim`` orthant axes.  ``b`` and ``c`` must be
    nonnegative; all four masses zero counts as undefined and passes.
    """
    if b < 0 or c < 0:
        raise PreconditionError("need b >= 0 and c >= 0")
    p = {t: _p_value(log_concave_r, t, v_dim, spec) for t in (a, a + b, a + c, a + b + c)}
    p_a, p_ab, p_ac, p_abc = p[a], p[a + b], p[a + c], p[a + b + c]
    scale = max(abs(v) for v in p.values())
    if scale == 0.0:
        return VerificationReport(
            name="two-factor-product", passed=True, n_checked=1, n_undefined=1,
            tolerance=tol, meta={"p_values": p},
        )
    left = p_a * p_abc
    right = p_ab * p_ac
    passed = left <= right * (1.0 + tol) + 1e-300
    margin = (right - left) / max(abs(left), abs(right), 1e-300)
    return VerificationReport(
        name="two-factor-product",
        passed=passed,
        n_checked=1,
        n_violations=int(not passed),
        worst_margin=margin,
        tolerance=tol,
        meta={"a": a, "b": b, "c": c, "p_values": {str(k): v for k, v in p.items()}},
    )


# ---------------------------------------------------------------------------
# Profile along a spanned set
# ---------------------------------------------------------------------------


def theta_profile(
    model: OrliczModel,
    spanned: SpannedSet,
    x_grid: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
    z1: Optional[float] = None,
    z2: Optional[float] = None,
    u_weights: Optional[Sequence[Optional[LogConcaveScalar]]] = None,
) -> list[float]:
    """Slice ratios along vertical slices of a planar spanned set.

    The first two coordinates span the plane of ``spanned``; for each
    ``x`` the second coordinate runs over the vertical slice of the set
    and all later non-level coordinates over the orthant.  Values are the
    upper-to-lower slice-mass ratios; empty or undefined slices come back
    as ``nan``.
    """
    if model.dim < 3:
        raise PreconditionError("profiles need two plane coordinates plus the level slot")
    if model.dim > 4:
        raise PreconditionError("profiles support dimension <= 4")
    zaxis = model.dim - 1
    zlo, zhi = model.support_box()[zaxis]
    if z1 is None:
        z1 = zlo + 0.25 * (zhi - zlo)
    if z2 is None:
        z2 = zlo + 0.75 * (zhi - zlo)
    if not 0.0 < z1 < z2:
        raise PreconditionError("need 0 < z1 < z2")
    verts = list(spanned.vertices)
    xs = np.asarray(list(x_grid), dtype=float)
    y_lo, y_hi = geometry.slice_interval_vec(verts, xs)
    values: list[float] = []
    inner_axes = tuple(range(1, zaxis))
    split = Splitting((0,), inner_axes)
    for x, lo, hi in zip(xs, y_lo, y_hi):
        if lo > hi:
            values.append(math.nan)
            continue
        slice_u = list(u_weights) if u_weights is not None else [None] * zaxis
        band = indicator(lo, hi)
        slice_u[1] = band if slice_u[1] is None else multiply_logconcave(slice_u[1], band)
        i_f, i_g = _pair_integrals(model, split, (float(x),), z1, z2, slice_u, spec)
        scale = abs(i_f) + abs(i_g)
        values.append(i_f / i_g if ratio_defined(i_f, i_g, scale) else math.nan)
    return values


def profile_report(
    model: OrliczModel,
    spanned: SpannedSet,
    x_grid: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
    tol: float = RATIO_TOL,
    **kwargs,
) -> VerificationReport:
    """Assert the spanned-set slice-ratio profile is non-increasing."""
    values = theta_profile(model, spanned, x_grid, spec, **kwargs)
    defined = [(x, v) for x, v in zip(x_grid, values) if not math.isnan(v)]
    scale = max((abs(v) for _, v in defined), default=1.0)
    worst = math.inf
    violations = []
    for (x_a, v_a), (x_b, v_b) in zip(defined, defined[1:]):
        margin = (v_a - v_b) + tol * max(scale, 1.0)
        worst = min(worst, margin)
        if margin < 0.0:
            violations.append({"x_pair": (x_a, x_b), "values": (v_a, v_b)})
    return VerificationReport(
        name="spanned-profile-monotone",
        passed=not violations,
        n_checked=max(len(defined) - 1, 0),
        n_violations=len(violations),
        n_undefined=len(values) - len(defined),
        worst_margin=None if worst is math.inf else worst,
        tolerance=tol,
        cases=violations,
        meta={"values": values},
    )


# ---------------------------------------------------------------------------
# One-dimensional ratio checks
# ---------------------------------------------------------------------------


def _quad_1d(
    fn: Callable[[float], float],
    mu: Optional[LogConcaveScalar],
    lo: float,
    hi: float,
    breaks: Sequence[float],
) -> float:
    weight = (lambda t: 1.0) if mu is None else mu
    val, _ = _scipy_integrate.quad(
        lambda t: fn(t) * weight(t),
        lo,
        hi,
        points=[b for b in breaks if lo < b < hi],
        limit=200,
    )
    return float(val)


def _sampled_preconditions(
    f, g, h, lo: float, hi: float, n: int = 257
) -> None:
    ts = np.linspace(lo, hi, n)
    fv = np.array([f(t) for t in ts])
    gv = np.array([g(t) for t in ts])
    hv = np.array([h(t) for t in ts])
    scale = max(float(np.abs(gv).max()), 1e-12)
    bad_support = (np.abs(fv) > 1e-9 * scale) & (np.abs(gv) <= 1e-12 * scale)
    if bad_support.any():
        raise PreconditionError("f must vanish wherever g does (support containment)")
    live = np.abs(gv) > 1e-12 * scale
    ratio = np.where(live, fv / np.where(live, gv, 1.0), np.nan)
    r = ratio[live]
    if r.size >= 2 and np.any(np.diff(r) > 1e-9 * max(np.abs(r).max(), 1.0)):
        raise PreconditionError("f/g must be non-increasing where defined")
    if np.any(np.diff(hv) > 1e-9 * max(float(np.abs(hv).max()), 1.0)):
        raise PreconditionError("h must be non-increasing")


def check_ratio_lemmas(
    mu_density: Optional[LogConcaveScalar],
    f: Callable[[float], float],
    g: Callable[[float], float],
    h: Callable[[float], float],
    intervals: tuple[tuple[float, float], tuple[float, float]],
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
) -> VerificationReport:
    """Check the two one-dimensional ratio inequalities.

    On each interval, weighting by a non-increasing ``h`` cannot lower the
    f-to-g mass ratio: ``(int f)/(int g) <= (int f h)/(int g h)``.  And for
    two intervals ``[a, b]``, ``[c, d]`` with ``a < b <= d``, ``a <= c < d``
    the earlier window's ratio dominates the later one's.  Preconditions
    (support containment, monotone ``f/g`` and ``h``) are validated by
    sampling; integrals use adaptive quadrature against ``mu_density``
    (Lebesgue when None).
    """
    (ia, ib), (ic, id_) = intervals
    if not (ia < ib <= id_ and ia <= ic < id_):
        raise PreconditionError("intervals must satisfy a < b <= d and a <= c < d")
    _sampled_preconditions(f, g, h, min(ia, ic), max(ib, id_))

    worst = math.inf
    n_undefined = 0
    cases = []

    def window(lo: float, hi: float, weighted: bool) -> tuple[float, float]:
        wrap = (lambda t: f(t) * h(t), lambda t: g(t) * h(t)) if weighted else (f, g)
        return (
            _quad_1d(wrap[0], mu_density, lo, hi, breakpoints),
            _quad_1d(wrap[1], mu_density, lo, hi, breakpoints),
        )

    # h-weighting can only raise the ratio, on each window separately
    for lo, hi in intervals:
        fn_p, gn_p = window(lo, hi, weighted=False)
        fn_h, gn_h = window(lo, hi, weighted=True)
        scale = max(abs(v) for v in (fn_p, gn_p, fn_h, gn_h))
        if not (ratio_defined(fn_p, gn_p, scale) and ratio_defined(fn_h, gn_h, scale)):
            n_undefined += 1
            continue
        margin = (fn_h * gn_p - fn_p * gn_h) / max(
            abs(fn_h * gn_p), abs(fn_p * gn_h), 1e-300
        ) + tol
        worst = min(worst, margin)
        if margin < 0.0:
            cases.append({"check": "weighting-raises-ratio", "interval": (lo, hi), "margin": margin})

    # the earlier window's ratio dominates the later one's
    fa, ga = window(ia, ib, weighted=False)
    fc, gc = window(ic, id_, weighted=False)
    scale = max(abs(v) for v in (fa, ga, fc, gc))
    if ratio_defined(fa, ga, scale) and ratio_defined(fc, gc, scale):
        margin = (fa * gc - fc * ga) / max(abs(fa * gc), abs(fc * ga), 1e-300) + tol
        worst = min(worst, margin)
        if margin < 0.0:
            cases.append({"check": "earlier-window-dominates", "margin": margin})
    else:
        n_undefined += 1

    n_checked = 3
    return VerificationReport(
        name="one-dimensional-ratio-pair",
        passed=not cases,
        n_checked=n_checked,
        n_violations=len(cases),
        n_undefined=n_undefined,
        worst_margin=None if worst is math.inf else worst,
        tolerance=tol,
        cases=cases,
    )
