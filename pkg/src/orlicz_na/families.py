"""Randomized model and instance factories for the verification suites.

Every factory accepts either a seed or a ``numpy.random.Generator`` so
sweeps stay reproducible.  Draws that come out degenerate (no mass, no
ratio gap) are resampled a bounded number of times and then reported as
errors rather than silently narrowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .localization import SlicePair, global_ratio_pair
from .model import ModelError, OrliczModel
from .quadrature import QuadratureSpec, mass
from .scalars import (
    DegenerateFunctionError,
    LogConcaveScalar,
    YoungFunction,
    indicator,
    log_affine,
    log_quadratic,
    young_identity,
    young_power,
    young_zero_with_cutoff,
)
from .theta import PreconditionError

__all__ = [
    "FamilyError",
    "ViolationInstance",
    "corrupted_models",
    "random_increasing_poly",
    "random_logconcave",
    "random_model",
    "random_u_weights",
    "random_young",
    "uniform_cap_model",
    "violation_instance",
]

#: cheap grid used only to confirm a random draw carries mass
_MASS_CHECK_SPEC = QuadratureSpec(resolution=3, gauss_order=4)


class FamilyError(RuntimeError):
    """A random family failed to produce an admissible draw."""


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_young(seed_or_rng) -> YoungFunction:
    """One random Young part: identity, power, clipped power, or box."""
    rng = _rng(seed_or_rng)
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return young_identity()
    if kind == 1:
        return young_power(rng.uniform(0.5, 2.0), rng.uniform(1.0, 2.5))
    if kind == 2:
        return young_power(
            rng.uniform(0.5, 1.5), rng.uniform(1.0, 2.0), cutoff=rng.uniform(1.5, 3.0)
        )
    return young_zero_with_cutoff(rng.uniform(1.0, 3.0))


def _random_cap(rng: np.random.Generator) -> LogConcaveScalar:
    level = rng.uniform(1.5, 3.5)
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return indicator(0.0, level)
    if kind == 1:
        return log_affine(-rng.uniform(0.2, 1.2), 0.0, 0.0, level)
    return log_quadratic(-rng.uniform(0.05, 0.5), -rng.uniform(0.0, 0.4), 0.0, 0.0, level)


def _random_weight(rng: np.random.Generator, hi: float = 3.0) -> Optional[LogConcaveScalar]:
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return None
    if kind == 1:
        return indicator(0.0, rng.uniform(0.8, hi))
    if kind == 2:
        return log_affine(rng.uniform(-0.8, 0.4), 0.0, 0.0, hi)
    return log_quadratic(-rng.uniform(0.05, 0.6), rng.uniform(-0.3, 0.5), 0.0, 0.0, hi)


def random_model(
    seed_or_rng,
    dim: Optional[int] = None,
    weightless: bool = False,
    max_resample: int = 25,
) -> OrliczModel:
    """A random admissible model, ``dim`` drawn from {2, 3} when not given.

    Young parts, cap, and per-axis weights are drawn independently from the
    stock shapes; draws whose density integrates to (numerically) nothing
    are thrown away.
    """
    rng = _rng(seed_or_rng)
    for _ in range(max_resample):
        n = int(dim) if dim is not None else int(rng.integers(2, 4))
        youngs = [random_young(rng) for _ in range(n)]
        cap = _random_cap(rng)
        weights = None if weightless else [_random_weight(rng) for _ in range(n)]
        try:
            model = OrliczModel(youngs, cap, weights)
        except (ModelError, DegenerateFunctionError):
            continue
        if mass(model, _MASS_CHECK_SPEC) > 1e-10:
            return model
    raise FamilyError("no admissible random model after resampling")


def uniform_cap_model(seed_or_rng, dim: Optional[int] = None) -> OrliczModel:
    """Uniform measure on a random Orlicz ball (indicator cap, no weights)."""
    rng = _rng(seed_or_rng)
    n = int(dim) if dim is not None else int(rng.integers(2, 4))
    for _ in range(25):
        youngs = [random_young(rng) for _ in range(n)]
        model = OrliczModel(youngs, indicator(0.0, rng.uniform(1.5, 3.5)))
        if mass(model, _MASS_CHECK_SPEC) > 1e-10:
            return model
    raise FamilyError("no admissible uniform-cap model after resampling")


def corrupted_models() -> list[tuple[str, OrliczModel]]:
    """Deliberately broken models for negative controls.

    Each has one log-convex factor smuggled past validation, which the
    sweep checks must flag as at least one violation.
    """
    bad_cap = OrliczModel(
        [young_identity()] * 3,
        log_quadratic(0.8, -0.2, 0.0, 0.0, 3.0, validate=False),
        validate=False,
    )
    bad_weight = OrliczModel(
        [young_identity()] * 3,
        indicator(0.0, 3.0),
        [None, log_quadratic(1.2, -2.4, 0.0, 0.0, 3.0, validate=False), None],
        validate=False,
    )
    bad_plane = OrliczModel(
        [young_identity()] * 2,
        indicator(0.0, 3.0),
        [log_quadratic(2.0, -1.0, 0.0, 0.0, 3.0, validate=False), None],
        validate=False,
    )
    return [
        ("log-convex cap", bad_cap),
        ("log-convex weight, 3 axes", bad_weight),
        ("log-convex weight, 2 axes", bad_plane),
    ]


def random_logconcave(seed_or_rng, hi: float = 3.0) -> LogConcaveScalar:
    """A random compactly supported log-concave scalar factor."""
    rng = _rng(seed_or_rng)
    upper = rng.uniform(0.8, hi)
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return indicator(0.0, upper)
    if kind == 1:
        return log_affine(rng.uniform(-1.0, 0.6), 0.0, 0.0, upper)
    return log_quadratic(
        -rng.uniform(0.05, 0.8), rng.uniform(-0.4, 0.6), 0.0, 0.0, upper
    )


def random_u_weights(
    seed_or_rng, count: int, none_probability: float = 0.3
) -> tuple[Optional[LogConcaveScalar], ...]:
    """Per-axis log-concave carriers for slice-pair constructions."""
    rng = _rng(seed_or_rng)
    out = []
    for _ in range(count):
        if rng.random() < none_probability:
            out.append(None)
        elif rng.random() < 0.5:
            out.append(log_quadratic(-rng.uniform(0.05, 0.3), rng.uniform(-0.2, 0.3)))
        else:
            out.append(log_affine(rng.uniform(-0.5, 0.3)))
    return tuple(out)


def random_increasing_poly(seed_or_rng, degree: int = 3, floor: float = 0.0):
    """A nondecreasing polynomial ``t -> floor + sum_k c_k t^k``, ``c_k >= 0``."""
    rng = _rng(seed_or_rng)
    coeffs = rng.uniform(0.0, 1.0, size=degree + 1)
    coeffs[0] = 0.0
    base = float(floor)

    def poly(t: float) -> float:
        return base + sum(float(c) * t**k for k, c in enumerate(coeffs))

    return poly


# ---------------------------------------------------------------------------
# Synthetic violation instances for the localization engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ViolationInstance:
    """A localization input whose ratio gap has been verified up front.

    ``target`` and ``h_bound`` are the global plain and weighted ratios as
    computed by quadrature at build time; ``margin`` is their gap, strictly
    positive by construction.
    """

    model: OrliczModel
    pair: SlicePair
    u_weights: Optional[tuple]
    h_coeffs: tuple[float, float, float]
    target: float
    h_bound: float

    @property
    def margin(self) -> float:
        return self.target - self.h_bound

    def h(self, points: np.ndarray) -> np.ndarray:
        c0, cx, cy = self.h_coeffs
        return c0 + cx * points[:, 0] + cy * points[:, 1]


#: candidate increasing ramps tried in order during the gap search
_RAMP_GRID = (
    (1.0, 2.0),
    (2.0, 1.0),
    (1.0, 1.0),
    (0.5, 2.0),
    (2.0, 0.5),
    (3.0, 1.0),
    (1.0, 3.0),
    (0.5, 0.5),
    (3.0, 3.0),
)


def violation_instance(
    seed: int,
    spec: Optional[QuadratureSpec] = None,
    min_gap: float = 1e-3,
    max_resample: int = 20,
) -> ViolationInstance:
    """A random slice-pair instance with a verified plain/weighted ratio gap.

    Models are three-axis with smooth caps (so the pair ratio varies
    smoothly over the carrier plane); ``h`` is an increasing affine ramp
    picked from a fixed grid, first one whose relative gap clears
    ``min_gap``.
    """
    rng = _rng(seed)
    for _ in range(max_resample):
        youngs = [
            young_power(rng.uniform(0.7, 1.5), rng.uniform(1.0, 2.2)) for _ in range(3)
        ]
        level = rng.uniform(2.5, 3.5)
        if rng.random() < 0.5:
            cap = log_quadratic(
                -rng.uniform(0.05, 0.4), -rng.uniform(0.0, 0.3), 0.0, 0.0, level
            )
        else:
            cap = log_affine(-rng.uniform(0.2, 0.9), 0.0, 0.0, level)
        model = OrliczModel(youngs, cap)
        pair = SlicePair(z1=rng.uniform(0.1, 0.3), z2=rng.uniform(0.55, 0.85))
        if rng.random() < 0.7:
            u: Optional[tuple] = tuple(
                log_quadratic(-rng.uniform(0.05, 0.3), rng.uniform(-0.2, 0.3))
                for _ in range(2)
            )
        else:
            u = None
        for cx, cy in _RAMP_GRID:
            coeffs = (1.0, float(cx), float(cy))

            def h(points, _c=coeffs):
                return _c[0] + _c[1] * points[:, 0] + _c[2] * points[:, 1]

            try:
                target, bound = global_ratio_pair(
                    model, pair, h, spec=spec, u_weights=u
                )
            except PreconditionError:
                break
            if (target - bound) / max(1.0, abs(target)) > min_gap:
                return ViolationInstance(
                    model=model,
                    pair=pair,
                    u_weights=u,
                    h_coeffs=coeffs,
                    target=target,
                    h_bound=bound,
                )
    raise FamilyError("no violation instance with the requested gap")
