"""Scalar building blocks: Young functions and log-concave weight factors.

Two one-dimensional function families underpin every density in this
package:

* ``YoungFunction`` -- nondecreasing convex ``f: [0, inf) -> [0, inf]`` with
  ``f(0) = 0``.  Values may be exactly ``+inf`` beyond a cutoff point; a
  function may also be identically infinite.  The family is closed under
  the two operations used when restricting a density to a hyperplane or
  moving the origin:

  - ``t -> f(a*t + b) + g(t) - f(b)`` (``compose_shift_young``)
  - ``t -> f(t + x0) - f(x0)``       (``shift_young``)

  Internally a Young function is a piecewise sum of shifted power terms
  ``coeff * (t - shift)**exponent`` plus a constant, which is exactly the
  closure of {powers, affine pieces} under those operations.

* ``LogConcaveScalar`` -- a nonnegative function stored in log space as a
  piecewise (affine or concave-quadratic) exponent over an interval
  support.  Closed under pointwise products, argument shifts and affine
  argument substitutions.  Used for per-axis weights and for the cap
  function applied to the accumulated Young sum.

Infinity is represented by the IEEE ``inf`` value and never by a large
finite float; the convention ``inf - inf = inf`` required by the
hyperplane merge is enforced structurally (the subtraction branch is never
reached when the subtrahend is infinite).

Shape conventions: ``*_vec`` methods take and return numpy arrays and are
the hot path for quadrature and sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

INF = math.inf

#: relative tolerance for the sampled convexity / concavity checks
SHAPE_CHECK_TOL = 1e-10
#: number of sampled triples used by the shape checks
SHAPE_CHECK_SAMPLES = 100

_CHECK_RNG_SEED = 0x5CA1AB1E


class DomainError(ValueError):
    """Raised when a scalar function is evaluated outside its domain."""


class DegenerateFunctionError(ValueError):
    """Raised when construction-time invariants fail."""


# ---------------------------------------------------------------------------
# Young functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerTerm:
    """One additive term ``coeff * (t - shift)**exponent`` of a piece."""

    coeff: float
    exponent: float
    shift: float = 0.0


@dataclass(frozen=True)
class YoungPiece:
    """Polynomial-in-shifted-powers piece active on ``[start, next_start)``."""

    start: float
    constant: float
    terms: tuple[PowerTerm, ...]

    def value(self, t: float) -> float:
        v = self.constant
        for term in self.terms:
            v += term.coeff * max(t - term.shift, 0.0) ** term.exponent
        return v


class YoungFunction:
    """Nondecreasing convex ``f: [0, inf) -> [0, inf]`` with ``f(0) = 0``.

    Parameters
    ----------
    pieces:
        Ordered pieces starting at 0.  Ignored when ``identically_infinite``.
    infinity_cutoff:
        If set, ``f(t) = inf`` for ``t > infinity_cutoff`` (the value *at*
        the cutoff stays finite).
    identically_infinite:
        Represents the degenerate member ``f == inf`` of the family.
    validate:
        Run the construction-time invariant checks (monotonicity and
        convexity are verified on sampled triples, not symbolically).
        Disabled only for deliberately corrupted negative-control inputs.
    """

    __slots__ = ("pieces", "infinity_cutoff", "identically_infinite", "_starts")

    def __init__(
        self,
        pieces: Sequence[YoungPiece] = (),
        infinity_cutoff: Optional[float] = None,
        identically_infinite: bool = False,
        validate: bool = True,
    ):
        if identically_infinite:
            pieces = ()
            infinity_cutoff = None
        pieces = tuple(
            YoungPiece(p.start, p.constant, tuple(t for t in p.terms if t.coeff != 0.0))
            for p in pieces
        )
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "infinity_cutoff", infinity_cutoff)
        object.__setattr__(self, "identically_infinite", identically_infinite)
        object.__setattr__(self, "_starts", np.array([p.start for p in pieces]))
        if validate:
            self._validate()

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("YoungFunction is immutable")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t: float) -> float:
        if t < 0:
            raise DomainError(f"Young function evaluated at negative t={t}")
        if self.identically_infinite:
            return INF
        if self.infinity_cutoff is not None and t > self.infinity_cutoff:
            return INF
        idx = int(np.searchsorted(self._starts, t, side="right")) - 1
        idx = max(idx, 0)
        return self.pieces[idx].value(t)

    def eval_vec(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("Young function evaluated at negative argument")
        if self.identically_infinite:
            return np.full(t.shape, INF)
        out = np.zeros(t.shape)
        idx = np.searchsorted(self._starts, t, side="right") - 1
        np.clip(idx, 0, len(self.pieces) - 1, out=idx)
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if not mask.any():
                continue
            tt = t[mask]
            v = np.full(tt.shape, piece.constant)
            for term in piece.terms:
                v += term.coeff * np.maximum(tt - term.shift, 0.0) ** term.exponent
            out[mask] = v
        if self.infinity_cutoff is not None:
            out[t > self.infinity_cutoff] = INF
        return out

    # -- structural queries -------------------------------------------------

    @property
    def finite_upper(self) -> float:
        """Supremum of the region where ``f`` is finite (``inf`` if everywhere)."""
        if self.identically_infinite:
            return -1.0
        return INF if self.infinity_cutoff is None else self.infinity_cutoff

    def is_finite_at(self, t: float) -> bool:
        return not math.isinf(self(t))

    def inverse_upper(self, y: float) -> Optional[float]:
        """``sup {t >= 0 : f(t) <= y}`` or ``None`` when the set is empty."""
        out = self.inverse_upper_vec(np.array([y]))
        v = float(out[0])
        return None if math.isnan(v) else v

    def inverse_upper_vec(self, y: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`inverse_upper`; empty set maps to ``nan``."""
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, np.nan)
        if self.identically_infinite:
            return out
        solvable = y >= 0
        if not solvable.any():
            return out
        ys = y[solvable]
        closed = self._closed_inverse(ys)
        if closed is not None:
            out[solvable] = closed
            return out
        if self.infinity_cutoff is not None:
            hi = np.full(ys.shape, float(self.infinity_cutoff))
        else:
            # grow an upper bracket until f(hi) > y (f is unbounded here)
            hi = np.full(ys.shape, max(1.0, float(self._starts[-1]) * 2 + 1.0))
            for _ in range(200):
                need = (self.eval_vec(hi) <= ys) & np.isfinite(ys)
                if not need.any():
                    break
                hi[need] *= 2.0
        res = np.where(np.isinf(ys), hi, np.nan)
        todo = np.isfinite(ys)
        lo = np.zeros(ys.shape)
        bhi = hi.copy()
        # keep the invariant f(lo) <= y; answer is the rightmost such point
        for _ in range(80):
            mid = 0.5 * (lo + bhi)
            ok = self.eval_vec(np.maximum(mid, 0.0)) <= ys
            lo = np.where(ok, mid, lo)
            bhi = np.where(ok, bhi, mid)
        res = np.where(todo, np.where(self.eval_vec(hi) <= ys, hi, lo), res)
        out[solvable] = res
        return out

    def _closed_inverse(self, ys: np.ndarray) -> Optional[np.ndarray]:
        """Inverse of a pure-power function, skipping the bisection.

        Only the single-piece ``coeff * t**exponent`` shape qualifies; it
        covers the stock constructors on the hot integration paths.
        """
        if len(self.pieces) != 1:
            return None
        piece = self.pieces[0]
        if piece.constant != 0.0 or len(piece.terms) != 1:
            return None
        term = piece.terms[0]
        if term.shift != 0.0 or not term.coeff > 0.0 or not term.exponent > 0.0:
            return None
        res = (ys / term.coeff) ** (1.0 / term.exponent)
        if self.infinity_cutoff is not None:
            res = np.minimum(res, float(self.infinity_cutoff))
        return res

    def piece_starts(self) -> tuple[float, ...]:
        return tuple(float(s) for s in self._starts)

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if self.identically_infinite:
            return
        if not self.pieces:
            raise DegenerateFunctionError("Young function needs at least one piece")
        if self.pieces[0].start != 0.0:
            raise DegenerateFunctionError("first piece must start at 0")
        starts = [p.start for p in self.pieces]
        if sorted(starts) != starts or len(set(starts)) != len(starts):
            raise DegenerateFunctionError("piece starts must be strictly increasing")
        if self.infinity_cutoff is not None and self.infinity_cutoff < 0:
            raise DegenerateFunctionError("cutoff must be nonnegative")
        if self.infinity_cutoff is not None and self.infinity_cutoff == 0.0:
            raise DegenerateFunctionError(
                "cutoff 0 leaves no finite region; the function is degenerate"
            )
        for p in self.pieces:
            for term in p.terms:
                if term.coeff < 0:
                    raise DegenerateFunctionError("power term needs coeff >= 0")
                if term.exponent < 1:
                    raise DegenerateFunctionError("power term needs exponent >= 1")
        v0 = self(0.0)
        if abs(v0) > 1e-12:
            raise DegenerateFunctionError(f"f(0) = {v0} != 0")
        hi = self.finite_upper
        span = hi if math.isfinite(hi) else max(2.0 * (self._starts[-1] + 1.0), 4.0)
        rng = np.random.default_rng(_CHECK_RNG_SEED)
        ts = np.sort(rng.uniform(0.0, span, (SHAPE_CHECK_SAMPLES, 3)), axis=1)
        # include piece joints among the sampled triples
        for s in self._starts[1:]:
            if 0 < s < span:
                ts = np.vstack([ts, [0.5 * s, s, min(span, 1.5 * s)]])
        a, b, c = ts[:, 0], ts[:, 1], ts[:, 2]
        fa, fb, fc = self.eval_vec(a), self.eval_vec(b), self.eval_vec(c)
        scale = np.maximum(np.maximum(np.abs(fa), np.abs(fc)), 1.0)
        if np.any(fb > fc + SHAPE_CHECK_TOL * scale):
            raise DegenerateFunctionError("sampled monotonicity check failed")
        # chord test for convexity: f(b)*(c-a) <= f(a)*(c-b) + f(c)*(b-a)
        lhs = fb * (c - a)
        rhs = fa * (c - b) + fc * (b - a)
        if np.any(lhs > rhs + SHAPE_CHECK_TOL * scale * np.maximum(c - a, 1.0)):
            raise DegenerateFunctionError("sampled convexity check failed")
        # Young axioms: somewhere nonzero, somewhere finite
        if self.infinity_cutoff is None:
            probe = self.eval_vec(np.linspace(0.0, span, 33))
            if float(probe.max()) == 0.0:
                raise DegenerateFunctionError("identically zero is not a Young function")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.identically_infinite:
            return "YoungFunction(inf)"
        return (
            f"YoungFunction(pieces={len(self.pieces)}, "
            f"cutoff={self.infinity_cutoff})"
        )


# -- constructors -----------------------------------------------------------


def young_power(
    coeff: float, exponent: float, cutoff: Optional[float] = None, validate: bool = True
) -> YoungFunction:
    """``f(t) = coeff * t**exponent`` with optional infinity cutoff."""
    piece = YoungPiece(0.0, 0.0, (PowerTerm(coeff, exponent),))
    return YoungFunction((piece,), infinity_cutoff=cutoff, validate=validate)


def young_identity() -> YoungFunction:
    return young_power(1.0, 1.0)


def young_zero_with_cutoff(cutoff: float) -> YoungFunction:
    """``f = 0`` on ``[0, cutoff]`` and ``inf`` beyond; the box constraint."""
    piece = YoungPiece(0.0, 0.0, ())
    return YoungFunction((piece,), infinity_cutoff=cutoff)


def young_infinite() -> YoungFunction:
    return YoungFunction(identically_infinite=True)


def young_from_pieces(
    segments: Sequence[tuple[float, float, float]],
    cutoff: Optional[float] = None,
    validate: bool = True,
) -> YoungFunction:
    """Continuous piecewise build from ``(start, coeff, exponent)`` triples.

    Each segment contributes ``coeff * (t - start)**exponent`` from its start
    onward; constants accumulate so the result is continuous.
    """
    segs = sorted(segments, key=lambda s: s[0])
    pieces: list[YoungPiece] = []
    const = 0.0
    active: list[PowerTerm] = []
    for start, coeff, exponent in segs:
        if pieces:
            const = pieces[-1].value(start) - sum(
                t.coeff * max(start - t.shift, 0.0) ** t.exponent for t in active
            )
            # keep earlier terms active (they continue to grow)
        active = active + [PowerTerm(coeff, exponent, start)]
        pieces.append(YoungPiece(start, 0.0, tuple(active)))
    if not pieces or pieces[0].start != 0.0:
        pieces.insert(0, YoungPiece(0.0, 0.0, ()))
    return YoungFunction(pieces, infinity_cutoff=cutoff, validate=validate)


# -- closure operations -----------------------------------------------------


def eval_young(f: YoungFunction, t: float) -> float:
    """Module-level evaluation helper (negative ``t`` raises)."""
    return f(t)


def _remap_pieces_affine(
    f: YoungFunction, a: float, b: float
) -> tuple[list[YoungPiece], Optional[float]]:
    """Pieces of ``t -> f(a t + b)`` for ``a > 0`` plus the remapped cutoff."""
    pieces: list[YoungPiece] = []
    for p in f.pieces:
        t_start = (p.start - b) / a
        terms = tuple(
            PowerTerm(term.coeff * a**term.exponent, term.exponent, (term.shift - b) / a)
            for term in p.terms
        )
        if t_start <= 0.0:
            # piece covers t=0; restart it at 0
            pieces = [YoungPiece(0.0, p.constant, terms)]
        else:
            pieces.append(YoungPiece(t_start, p.constant, terms))
    cutoff = None
    if f.infinity_cutoff is not None:
        cutoff = (f.infinity_cutoff - b) / a
    return pieces, cutoff


def _merge_piece_lists(
    p1: Sequence[YoungPiece], p2: Sequence[YoungPiece], const_shift: float
) -> list[YoungPiece]:
    starts = sorted({p.start for p in p1} | {p.start for p in p2})

    def active(pieces: Sequence[YoungPiece], s: float) -> YoungPiece:
        cur = pieces[0]
        for p in pieces:
            if p.start <= s + 1e-300:
                cur = p
        return cur

    merged = []
    for s in starts:
        a1, a2 = active(p1, s), active(p2, s)
        merged.append(
            YoungPiece(s, a1.constant + a2.constant + const_shift, a1.terms + a2.terms)
        )
    return merged


def compose_shift_young(
    f: YoungFunction, a: float, b: float, g: YoungFunction, validate: bool = True
) -> YoungFunction:
    """The hyperplane-merge map ``t -> f(a t + b) + g(t) - f(b)``.

    Uses the convention ``inf - inf = inf``: when ``f(b)`` is infinite the
    result is identically infinite (monotonicity forces ``f(a t + b) = inf``
    for every ``t >= 0``).
    """
    if a < 0 or b < 0:
        raise DomainError("affine substitution needs a >= 0 and b >= 0")
    if f.identically_infinite or g.identically_infinite:
        return young_infinite()
    fb = f(b)
    if math.isinf(fb):
        return young_infinite()
    if a == 0.0:
        # f(b) + g(t) - f(b) collapses to g
        return g
    part1, cut1 = _remap_pieces_affine(f, a, b)
    merged = _merge_piece_lists(part1, list(g.pieces), -fb)
    cutoff = _min_cutoff(cut1, g.infinity_cutoff)
    if cutoff is not None and cutoff <= 0.0:
        if cutoff < 0.0:
            return young_infinite()
        raise DegenerateFunctionError(
            "merged function is finite only at t=0 (cutoff collapsed to 0)"
        )
    return YoungFunction(merged, infinity_cutoff=cutoff, validate=validate)


def shift_young(f: YoungFunction, x0: float, validate: bool = True) -> YoungFunction:
    """Origin move ``t -> f(t + x0) - f(x0)``; requires ``f(x0) < inf``."""
    if x0 < 0:
        raise DomainError("shift distance must be nonnegative")
    if x0 == 0.0:
        return f
    if f.identically_infinite or math.isinf(f(x0)):
        raise DomainError("cannot shift the origin to a point with infinite value")
    fx0 = f(x0)
    pieces: list[YoungPiece] = []
    for p in f.pieces:
        start = p.start - x0
        terms = tuple(PowerTerm(t.coeff, t.exponent, t.shift - x0) for t in p.terms)
        if start <= 0.0:
            pieces = [YoungPiece(0.0, p.constant - fx0, terms)]
        else:
            pieces.append(YoungPiece(start, p.constant - fx0, terms))
    cutoff = None if f.infinity_cutoff is None else f.infinity_cutoff - x0
    if cutoff is not None and cutoff == 0.0:
        raise DegenerateFunctionError(
            "shift lands exactly on the cutoff; the result has no finite region"
        )
    return YoungFunction(pieces, infinity_cutoff=cutoff, validate=validate)


def _min_cutoff(c1: Optional[float], c2: Optional[float]) -> Optional[float]:
    if c1 is None:
        return c2
    if c2 is None:
        return c1
    return min(c1, c2)


# ---------------------------------------------------------------------------
# Log-concave scalar factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogPiece:
    """``log v(t) = a t^2 + b t + c`` on ``[start, next_start)``, ``a <= 0``."""

    start: float
    a: float
    b: float
    c: float

    def log_value(self, t):
        return (self.a * t + self.b) * t + self.c

    def slope(self, t):
        return 2.0 * self.a * t + self.b


class LogConcaveScalar:
    """Nonnegative log-concave function on an interval support.

    ``support is None`` encodes the zero function.  ``support = (lo, hi)``
    with ``hi = inf`` covers half-line supports.  Values are exactly 0 off
    the support.
    """

    __slots__ = ("support", "pieces", "_starts")

    def __init__(
        self,
        support: Optional[tuple[float, float]],
        pieces: Sequence[LogPiece] = (),
        validate: bool = True,
    ):
        if support is not None and support[0] > support[1]:
            support = None
        if support is None:
            pieces = ()
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "_starts", np.array([p.start for p in pieces]))
        if validate:
            self._validate()

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("LogConcaveScalar is immutable")

    @property
    def is_zero(self) -> bool:
        return self.support is None

    # -- evaluation ---------------------------------------------------------

    def log_eval(self, t: float) -> float:
        if self.is_zero:
            return -INF
        lo, hi = self.support
        if t < lo or t > hi:
            return -INF
        idx = int(np.searchsorted(self._starts, t, side="right")) - 1
        idx = max(idx, 0)
        return float(self.pieces[idx].log_value(t))

    def __call__(self, t: float) -> float:
        return math.exp(self.log_eval(t)) if self.log_eval(t) > -INF else 0.0

    def log_eval_vec(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, -INF)
        if self.is_zero:
            return out
        lo, hi = self.support
        inside = (t >= lo) & (t <= hi)
        if not inside.any():
            return out
        idx = np.searchsorted(self._starts, t, side="right") - 1
        np.clip(idx, 0, len(self.pieces) - 1, out=idx)
        for k, piece in enumerate(self.pieces):
            mask = inside & (idx == k)
            if mask.any():
                out[mask] = piece.log_value(t[mask])
        return out

    def eval_vec(self, t: np.ndarray) -> np.ndarray:
        logs = self.log_eval_vec(t)
        out = np.zeros(logs.shape)
        finite = logs > -INF
        out[finite] = np.exp(logs[finite])
        return out

    # -- algebra ------------------------------------------------------------

    def multiply(self, other: "LogConcaveScalar", validate: bool = True) -> "LogConcaveScalar":
        if self.is_zero or other.is_zero:
            return LogConcaveScalar(None)
        lo = max(self.support[0], other.support[0])
        hi = min(self.support[1], other.support[1])
        if lo > hi:
            return LogConcaveScalar(None)
        starts = {lo}
        for p in (*self.pieces, *other.pieces):
            if lo < p.start < hi:
                starts.add(p.start)
        pieces = []
        for s in sorted(starts):
            p1 = self._piece_at(s)
            p2 = other._piece_at(s)
            pieces.append(LogPiece(s, p1.a + p2.a, p1.b + p2.b, p1.c + p2.c))
        return LogConcaveScalar((lo, hi), pieces, validate=validate)

    def _piece_at(self, t: float) -> LogPiece:
        idx = int(np.searchsorted(self._starts, t, side="right")) - 1
        return self.pieces[max(idx, 0)]

    def shift(self, theta: float, validate: bool = True) -> "LogConcaveScalar":
        """Argument shift ``t -> v(t + theta)``."""
        if self.is_zero:
            return self
        lo, hi = self.support
        pieces = [
            LogPiece(
                p.start - theta,
                p.a,
                2.0 * p.a * theta + p.b,
                (p.a * theta + p.b) * theta + p.c,
            )
            for p in self.pieces
        ]
        return LogConcaveScalar((lo - theta, hi - theta), pieces, validate=validate)

    def affine_precompose(self, alpha: float, beta: float, validate: bool = True) -> "LogConcaveScalar":
        """Argument substitution ``t -> v(alpha t + beta)`` with ``alpha >= 0``."""
        if alpha < 0:
            raise DomainError("affine substitution needs alpha >= 0")
        if self.is_zero:
            return self
        if alpha == 0.0:
            lv = self.log_eval(beta)
            if lv == -INF:
                return LogConcaveScalar(None)
            return LogConcaveScalar((-INF, INF), [LogPiece(-INF, 0.0, 0.0, lv)], validate=False)
        lo, hi = self.support
        new_lo, new_hi = (lo - beta) / alpha, (hi - beta) / alpha if math.isfinite(hi) else INF
        pieces = []
        for p in self.pieces:
            a = p.a * alpha * alpha
            b = 2.0 * p.a * alpha * beta + p.b * alpha
            c = (p.a * beta + p.b) * beta + p.c
            pieces.append(LogPiece((p.start - beta) / alpha, a, b, c))
        return LogConcaveScalar((new_lo, new_hi), pieces, validate=validate)

    def restrict(self, lo: float, hi: float, validate: bool = True) -> "LogConcaveScalar":
        """Truncate the support to ``[lo, hi]``."""
        if self.is_zero:
            return self
        s_lo = max(lo, self.support[0])
        s_hi = min(hi, self.support[1])
        if s_lo > s_hi:
            return LogConcaveScalar(None)
        pieces = [LogPiece(s_lo, *_piece_coeffs(self._piece_at(s_lo)))]
        for p in self.pieces:
            if s_lo < p.start <= s_hi:
                pieces.append(p)
        return LogConcaveScalar((s_lo, s_hi), pieces, validate=validate)

    # -- structural queries --------------------------------------------------

    def sup_on(self, lo: float, hi: float) -> float:
        """Supremum over ``[lo, hi]`` (exact per-piece vertex analysis)."""
        if self.is_zero:
            return 0.0
        lo = max(lo, self.support[0])
        hi = min(hi, self.support[1])
        if lo > hi:
            return 0.0
        if not math.isfinite(hi):
            raise DomainError("supremum requested over an unbounded interval")
        best = -INF
        bounds = [lo, hi] + [p.start for p in self.pieces if lo < p.start < hi]
        for t in bounds:
            best = max(best, self.log_eval(t))
        for k, p in enumerate(self.pieces):
            seg_lo = max(lo, p.start)
            seg_hi = min(hi, self._piece_end(k))
            if seg_lo > seg_hi or p.a >= 0.0:
                continue
            vertex = -p.b / (2.0 * p.a)
            if seg_lo <= vertex <= seg_hi:
                best = max(best, p.log_value(vertex))
        return math.exp(best) if best > -INF else 0.0

    def _piece_end(self, k: int) -> float:
        if k + 1 < len(self.pieces):
            return self.pieces[k + 1].start
        return self.support[1]

    def piece_starts(self) -> tuple[float, ...]:
        return tuple(float(s) for s in self._starts)

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if self.is_zero:
            return
        lo, hi = self.support
        if math.isnan(lo) or math.isnan(hi):
            raise DegenerateFunctionError("support bounds must not be NaN")
        if not self.pieces:
            raise DegenerateFunctionError("non-zero function needs at least one piece")
        starts = [p.start for p in self.pieces]
        if sorted(starts) != starts:
            raise DegenerateFunctionError("piece starts must be increasing")
        for p in self.pieces:
            if p.a > 1e-15:
                raise DegenerateFunctionError(
                    "log piece has positive quadratic coefficient (log-convex)"
                )
        # continuity and slope monotonicity at interior junctions
        for prev, nxt in zip(self.pieces, self.pieces[1:]):
            s = nxt.start
            if lo < s < hi:
                v1, v2 = prev.log_value(s), nxt.log_value(s)
                scale = max(abs(v1), abs(v2), 1.0)
                if abs(v1 - v2) > 1e-9 * scale:
                    raise DegenerateFunctionError("log pieces are discontinuous")
                if nxt.slope(s) > prev.slope(s) + 1e-9:
                    raise DegenerateFunctionError("log slope increases at a junction")
        # sampled midpoint test, mirroring the Young convexity check
        if math.isfinite(hi):
            span_hi = hi
        elif math.isfinite(lo):
            span_hi = lo + max(4.0, 4.0 * abs(lo) + 4.0)
        else:
            span_hi = 4.0
        span_lo = lo if math.isfinite(lo) else span_hi - 8.0
        rng = np.random.default_rng(_CHECK_RNG_SEED + 1)
        pts = np.sort(rng.uniform(span_lo, span_hi, (SHAPE_CHECK_SAMPLES, 2)), axis=1)
        a, b = pts[:, 0], pts[:, 1]
        mid = 0.5 * (a + b)
        la, lb, lm = (self.log_eval_vec(x) for x in (a, b, mid))
        ok = np.isfinite(la) & np.isfinite(lb)
        scale = np.maximum(np.maximum(np.abs(la), np.abs(lb)), 1.0)
        if np.any(lm[ok] < 0.5 * (la[ok] + lb[ok]) - SHAPE_CHECK_TOL * scale[ok]):
            raise DegenerateFunctionError("sampled log-concavity midpoint check failed")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_zero:
            return "LogConcaveScalar(0)"
        return f"LogConcaveScalar(support={self.support}, pieces={len(self.pieces)})"


def _piece_coeffs(p: LogPiece) -> tuple[float, float, float]:
    return p.a, p.b, p.c


# -- constructors -----------------------------------------------------------


def indicator(lo: float, hi: float) -> LogConcaveScalar:
    """Indicator of ``[lo, hi]`` (the flat weight)."""
    return LogConcaveScalar((lo, hi), [LogPiece(lo, 0.0, 0.0, 0.0)])


def constant_one() -> LogConcaveScalar:
    return LogConcaveScalar((-INF, INF), [LogPiece(-INF, 0.0, 0.0, 0.0)], validate=False)


def log_affine(rate: float, const: float = 0.0, lo: float = 0.0, hi: float = INF) -> LogConcaveScalar:
    """``exp(rate * t + const)`` on ``[lo, hi]``."""
    return LogConcaveScalar((lo, hi), [LogPiece(lo, 0.0, rate, const)])


def log_quadratic(
    a: float, b: float = 0.0, c: float = 0.0, lo: float = 0.0, hi: float = INF, validate: bool = True
) -> LogConcaveScalar:
    """``exp(a t^2 + b t + c)`` on ``[lo, hi]``; needs ``a <= 0`` unless unchecked."""
    return LogConcaveScalar((lo, hi), [LogPiece(lo, a, b, c)], validate=validate)


def zero_scalar() -> LogConcaveScalar:
    return LogConcaveScalar(None)


# -- module-level op aliases -------------------------------------------------


def eval_logconcave(w: LogConcaveScalar, t: float) -> float:
    return w(t)


def multiply_logconcave(a: LogConcaveScalar, b: LogConcaveScalar) -> LogConcaveScalar:
    return a.multiply(b)
