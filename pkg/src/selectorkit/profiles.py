"""Scalar profile functions used to build radial and composed Hamiltonians.

A radial Hamiltonian on R^2n is written ``H(x) = h(pi |x|^2)``; the profile
``h`` is a C^1 piecewise cubic in Hermite form.  Everything downstream that
needs a closed form (admissibility, spectrum oracle, slope bounds) reads the
same interpolant, so the oracles never see a different function than the
flows do.
"""

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq, minimize_scalar

from .exceptions import InputError

_ROOT_TOL = 1e-13


class PiecewiseCubic:
    """C^1 piecewise cubic Hermite function with constant extension.

    Parameters
    ----------
    knots : array_like, shape (m,)
        Strictly increasing abscissae.
    values, slopes : array_like, shape (m,)
        Function values and first derivatives at the knots.

    Outside ``[knots[0], knots[-1]]`` the function is extended by the end
    values; end slopes must vanish for that extension to be C^1.
    """

    def __init__(self, knots, values, slopes):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        slopes = np.asarray(slopes, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise InputError("need at least two knots")
        if values.shape != knots.shape or slopes.shape != knots.shape:
            raise InputError("knots, values and slopes must have equal length")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))):
            raise InputError("knot data must be finite")
        if np.any(np.diff(knots) <= 0):
            raise InputError("knots must be strictly increasing")
        self.knots = knots
        self.values = values
        self.slopes = slopes
        self._spline = CubicHermiteSpline(knots, values, slopes, extrapolate=False)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    # evaluation -------------------------------------------------------
    def _eval(self, s, poly, left, right):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lo = s <= self.knots[0]
        hi = s >= self.knots[-1]
        mid = ~(lo | hi)
        out[lo] = left
        out[hi] = right
        if np.any(mid):
            out[mid] = poly(s[mid])
        return out

    def __call__(self, s):
        return self.value(s)

    def value(self, s):
        return self._eval(s, self._spline, self.values[0], self.values[-1])

    def d1(self, s):
        # the constant extension has zero slope; knots[0] keeps its own slope
        s = np.asarray(s, dtype=float)
        out = self._eval(s, self._d1, 0.0, 0.0)
        at_left = s == self.knots[0]
        out[at_left] = self.slopes[0]
        return out

    def d2(self, s):
        return self._eval(s, self._d2, 0.0, 0.0)

    # piece algebra ----------------------------------------------------
    def _pieces(self):
        """Yield (a, b, c3, c2, c1, c0) with f = c3 u^3 + c2 u^2 + c1 u + c0, u = s - a."""
        c = self._spline.c
        for i in range(self.knots.size - 1):
            yield self.knots[i], self.knots[i + 1], c[0, i], c[1, i], c[2, i], c[3, i]

    def extrema(self):
        """Exact (min, max) over the real line."""
        cand = [self.values.min(), self.values.max()]
        for a, b, c3, c2, c1, c0 in self._pieces():
            for u in _quadratic_roots(3 * c3, 2 * c2, c1, 0.0, b - a):
                cand.append(((c3 * u + c2) * u + c1) * u + c0)
        return float(min(cand)), float(max(cand))

    def max(self):
        return self.extrema()[1]

    def min(self):
        return self.extrema()[0]

    def sup_abs_slope(self):
        """Exact sup |f'|: f' is quadratic on each piece."""
        best = float(np.max(np.abs(self.slopes)))
        for a, b, c3, c2, c1, c0 in self._pieces():
            if c3 != 0.0:
                u = -c2 / (3 * c3)
                if 0.0 < u < b - a:
                    best = max(best, abs(3 * c3 * u * u + 2 * c2 * u + c1))
        return best

    def derivative_roots(self, c, lo=None, hi=None):
        """Solve f'(s) = c.

        Returns
        -------
        roots : list of (s, f''(s))
            Isolated solutions (shared knots reported once).
        bands : list of (a, b)
            Intervals on which f' is identically ``c``.
        """
        roots, bands = [], []
        for a, b, c3, c2, c1, c0 in self._pieces():
            qa, qb, qc = 3 * c3, 2 * c2, c1 - c
            scale = max(abs(qa) * (b - a) ** 2, abs(qb) * (b - a), abs(c1), abs(c), 1.0)
            if max(abs(qa) * (b - a) ** 2, abs(qb) * (b - a), abs(qc)) <= 1e-12 * scale:
                bands.append((a, b))
                continue
            for u in _quadratic_roots(qa, qb, qc, 0.0, b - a):
                s = a + u
                roots.append((s, 6 * c3 * u + 2 * c2))
        roots.sort()
        merged = []
        for s, h2 in roots:
            if any(a - 1e-12 <= s <= b + 1e-12 for a, b in bands):
                continue
            if merged and abs(s - merged[-1][0]) <= 1e-11 * max(1.0, abs(s)):
                continue
            merged.append((s, h2))
        if lo is not None:
            merged = [(s, h2) for s, h2 in merged if s >= lo]
        if hi is not None:
            merged = [(s, h2) for s, h2 in merged if s <= hi]
        return merged, _merge_bands(bands)

    def scaled(self, factor):
        return type(self)._from_parts(self.knots, factor * self.values, factor * self.slopes)

    @classmethod
    def _from_parts(cls, knots, values, slopes):
        return cls(knots, values, slopes)

    def __repr__(self):
        return f"{type(self).__name__}(knots={self.knots.tolist()}, values={self.values.tolist()}, slopes={self.slopes.tolist()})"


class ProfileFunction(PiecewiseCubic):
    """Radial profile ``h`` with ``H(x) = h(pi |x|^2)``.

    The first knot must sit at ``s = 0`` and the profile must reach 0 with
    zero slope at the last knot ``s_max``; beyond it the profile is
    identically 0, so ``supp H`` lies in the closed ball of area ``s_max``.
    If ``slopes`` is omitted, monotone (PCHIP) slopes are used.
    """

    def __init__(self, knots, values, slopes=None):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if slopes is None:
            slopes = _pchip_slopes(knots, values)
            slopes[-1] = 0.0
        super().__init__(knots, values, slopes)
        if self.knots[0] != 0.0:
            raise InputError("radial profile knots must start at s = 0")
        if abs(self.values[-1]) > 0 or abs(self.slopes[-1]) > 0:
            raise InputError("radial profile must end with value 0 and slope 0 at s_max")

    @property
    def s_max(self):
        return float(self.knots[-1])

    @property
    def support_radius(self):
        return float(np.sqrt(self.s_max / np.pi))

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self._eval(s, self._spline, self.values[0], 0.0)

    def d1(self, s):
        s = np.asarray(s, dtype=float)
        out = self._eval(s, self._d1, self.slopes[0], 0.0)
        return out

    def d2(self, s):
        s = np.asarray(s, dtype=float)
        return self._eval(s, self._d2, 0.0, 0.0)

    def critical_values(self):
        """Values at s with h'(s) = 0, plus h(0) (the origin is always critical) and 0."""
        roots, bands = self.derivative_roots(0.0)
        vals = [float(self.values[0]), 0.0]
        vals += [float(self.value(np.array([s]))[0]) for s, _ in roots]
        vals += [float(self.value(np.array([0.5 * (a + b)]))[0]) for a, b in bands]
        return np.unique(np.round(vals, 14))

    # factories --------------------------------------------------------
    @classmethod
    def zero(cls, s_max=1.0):
        return cls([0.0, s_max], [0.0, 0.0], [0.0, 0.0])

    @classmethod
    def bump(cls, height, plateau_end, support_end, corner=None):
        """Plateau of value ``height`` on [0, plateau_end], then a smoothed
        linear descent reaching 0 at ``support_end``.

        ``corner`` is the width of the two quadratic transitions (default
        10% of the ramp).  The linear part has slope
        ``-height / (ramp - corner)``, which is also ``sup |h'|``.
        """
        height = float(height)
        s_p, s_m = float(plateau_end), float(support_end)
        if not 0.0 < s_p < s_m:
            raise InputError("need 0 < plateau_end < support_end")
        ramp = s_m - s_p
        w = 0.1 * ramp if corner is None else float(corner)
        if not 0.0 < w <= 0.5 * ramp:
            raise InputError("corner must lie in (0, ramp/2]")
        m = height / (ramp - w)
        knots = [0.0, s_p, s_p + w, s_m - w, s_m]
        values = [height, height, height - m * w / 2, m * w / 2, 0.0]
        slopes = [0.0, 0.0, -m, -m, 0.0]
        if abs(ramp - 2 * w) < 1e-15:
            knots = [0.0, s_p, s_p + w, s_m]
            values = [height, height, height / 2, 0.0]
            slopes = [0.0, 0.0, -m, 0.0]
        return cls(knots, values, slopes)

    @classmethod
    def shelf(cls, height, shelf_value, plateau_end, shelf_start, shelf_end, support_end, corner_frac=0.1):
        """Plateau, descent to a flat shelf at ``shelf_value``, then descent to 0.

        Critical values are {0, shelf_value, height}, so the result lies in
        the epsilon-class whenever ``shelf_value <= eps * height``.
        """
        upper = cls.bump(height - shelf_value, plateau_end, shelf_start,
                         corner=corner_frac * (shelf_start - plateau_end))
        lower = cls.bump(shelf_value, shelf_end, support_end,
                         corner=corner_frac * (support_end - shelf_end))
        knots = list(upper.knots[:-1]) + [shelf_start] + [k for k in lower.knots if k >= shelf_end]
        values = [v + shelf_value for v in upper.values[:-1]] + [shelf_value] + \
                 [float(lower.value(np.array([k]))[0]) for k in lower.knots if k >= shelf_end]
        slopes = list(upper.slopes[:-1]) + [0.0] + \
                 [float(lower.d1(np.array([k]))[0]) if k > shelf_end else 0.0 for k in lower.knots if k >= shelf_end]
        return cls(knots, values, slopes)

    @classmethod
    def from_function(cls, func, knots, dfunc):
        knots = np.asarray(knots, dtype=float)
        return cls(knots, func(knots), dfunc(knots))


class _SampledProfile:
    """Shared machinery for profiles without a piecewise-cubic closed form.

    Extrema and roots come from dense sampling between break points followed
    by bounded refinement; subclasses supply ``value``, ``d1``, ``d2``,
    ``s_max`` and ``_breaks``.
    """

    samples_per_piece = 64

    @property
    def support_radius(self):
        return float(np.sqrt(self.s_max / np.pi))

    def __call__(self, s):
        return self.value(s)

    def _breaks(self):
        return np.array([0.0, self.s_max])

    def _grid(self):
        b = np.unique(np.asarray(self._breaks(), dtype=float))
        pts = [np.linspace(a, c, self.samples_per_piece + 1)[:-1] for a, c in zip(b[:-1], b[1:])]
        return np.unique(np.concatenate(pts + [b]))

    def _refine_extreme(self, fun, grid, sign):
        vals = sign * fun(grid)
        best = float(np.max(vals))
        for i in np.argsort(vals)[-8:]:
            a = grid[max(i - 1, 0)]
            b = grid[min(i + 1, grid.size - 1)]
            if b <= a:
                continue
            res = minimize_scalar(lambda s: -sign * float(fun(np.array([s]))[0]), bounds=(a, b),
                                  method="bounded", options={"xatol": 1e-13})
            best = max(best, -float(res.fun))
        return sign * best

    def extrema(self):
        g = self._grid()
        return (float(self._refine_extreme(self.value, g, -1.0)),
                float(self._refine_extreme(self.value, g, 1.0)))

    def max(self):
        return self.extrema()[1]

    def min(self):
        return self.extrema()[0]

    def sup_abs_slope(self):
        g = self._grid()
        return max(abs(self._refine_extreme(self.d1, g, 1.0)), abs(self._refine_extreme(self.d1, g, -1.0)))

    def derivative_roots(self, c, lo=None, hi=None):
        g = self._grid()
        r = self.d1(g) - c
        flat = np.abs(r) <= 1e-12 * max(1.0, abs(c))
        roots, bands = [], []
        i = 0
        while i < g.size - 1:
            if flat[i] and flat[i + 1]:
                j = i
                while j + 1 < g.size and flat[j + 1]:
                    j += 1
                bands.append((g[i], g[j]))
                i = j + 1
                continue
            if flat[i]:
                roots.append(g[i])
            elif r[i] * r[i + 1] < 0:
                roots.append(brentq(lambda s: float(self.d1(np.array([s]))[0]) - c, g[i], g[i + 1], xtol=1e-15))
            i += 1
        out = [(s, float(self.d2(np.array([s]))[0])) for s in roots]
        if lo is not None:
            out = [(s, h2) for s, h2 in out if s >= lo]
        if hi is not None:
            out = [(s, h2) for s, h2 in out if s <= hi]
        return out, _merge_bands(bands)

    def critical_values(self):
        roots, bands = self.derivative_roots(0.0)
        vals = [float(self.value(np.array([0.0]))[0]), 0.0]
        vals += [float(self.value(np.array([s]))[0]) for s, _ in roots]
        vals += [float(self.value(np.array([0.5 * (a + b)]))[0]) for a, b in bands]
        return np.unique(np.round(vals, 14))

    def scaled(self, factor):
        return ScaledProfile(self, factor)


class ComposedProfile(_SampledProfile):
    """Profile ``s -> f(h(s))`` for a scalar function ``f`` and a profile ``h``.

    ``f`` must provide ``value``, ``d1`` and ``d2`` and satisfy ``f(0) = 0``.
    """

    def __init__(self, outer, inner, samples_per_piece=64):
        self.outer = outer
        self.inner = inner
        self.samples_per_piece = int(samples_per_piece)
        if abs(float(outer.value(np.array([0.0]))[0])) > 0:
            raise InputError("outer function must vanish at 0")

    @property
    def s_max(self):
        return self.inner.s_max

    @property
    def knots(self):
        return self.inner.knots

    def value(self, s):
        return self.outer.value(self.inner.value(s))

    def d1(self, s):
        return self.outer.d1(self.inner.value(s)) * self.inner.d1(s)

    def d2(self, s):
        h1 = self.inner.d1(s)
        hv = self.inner.value(s)
        return self.outer.d2(hv) * h1 * h1 + self.outer.d1(hv) * self.inner.d2(s)

    def _breaks(self):
        knots = np.asarray(self.inner.knots, dtype=float)
        extra = []
        # preimages of the outer knots, where f switches pieces
        for level in getattr(self.outer, "knots", ()):
            g = lambda s: float(self.inner.value(np.array([s]))[0]) - level
            fine = np.unique(np.concatenate([np.linspace(a, b, 9) for a, b in zip(knots[:-1], knots[1:])]))
            vals = np.array([g(s) for s in fine])
            for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
                extra.append(brentq(g, fine[i], fine[i + 1], xtol=1e-15))
        return np.concatenate([knots, extra])


class SumProfile(_SampledProfile):
    """Pointwise sum of profiles; used when the parts are not both piecewise cubic."""

    def __init__(self, *parts, samples_per_piece=64):
        self.parts = parts
        self.samples_per_piece = int(samples_per_piece)

    @property
    def s_max(self):
        return max(p.s_max for p in self.parts)

    @property
    def knots(self):
        return np.unique(np.concatenate([np.asarray(p.knots) for p in self.parts]))

    def value(self, s):
        return sum(p.value(s) for p in self.parts)

    def d1(self, s):
        return sum(p.d1(s) for p in self.parts)

    def d2(self, s):
        return sum(p.d2(s) for p in self.parts)

    def _breaks(self):
        return self.knots


def add_profiles(*parts):
    """Sum of radial profiles.

    Piecewise cubics on merged knots stay piecewise cubic, so the Hermite data
    at the merged knots reproduce the sum exactly.
    """
    if all(isinstance(p, ProfileFunction) for p in parts):
        knots = np.unique(np.concatenate([p.knots for p in parts]))
        values = sum(p.value(knots) for p in parts)
        slopes = sum(_right_slope(p, knots) for p in parts)
        values[-1] = 0.0
        slopes[-1] = 0.0
        return ProfileFunction(knots, values, slopes)
    return SumProfile(*parts)


def _right_slope(p, s):
    out = p.d1(s)
    out[s >= p.s_max] = 0.0
    return out



class ScaledProfile:
    """``s -> factor * base(s)`` without re-deriving the base representation."""

    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)

    s_max = property(lambda self: self.base.s_max)
    support_radius = property(lambda self: self.base.support_radius)
    knots = property(lambda self: self.base.knots)

    def value(self, s):
        return self.factor * self.base.value(s)

    __call__ = value

    def d1(self, s):
        return self.factor * self.base.d1(s)

    def d2(self, s):
        return self.factor * self.base.d2(s)

    def extrema(self):
        lo, hi = self.base.extrema()
        return (self.factor * lo, self.factor * hi) if self.factor >= 0 else (self.factor * hi, self.factor * lo)

    def max(self):
        return self.extrema()[1]

    def min(self):
        return self.extrema()[0]

    def sup_abs_slope(self):
        return abs(self.factor) * self.base.sup_abs_slope()

    def derivative_roots(self, c, lo=None, hi=None):
        if self.factor == 0.0:
            return ([], [(0.0, self.s_max)]) if c == 0 else ([], [])
        roots, bands = self.base.derivative_roots(c / self.factor, lo, hi)
        return [(s, self.factor * h2) for s, h2 in roots], bands

    def critical_values(self):
        return np.unique(np.round(self.factor * self.base.critical_values(), 14))

    def scaled(self, factor):
        return ScaledProfile(self.base, self.factor * factor)


def clamped_ramp(start, top, width):
    """C^1 ramp: 0 below ``start``, slope rising linearly 0 -> 1 over ``width``,
    slope 1, then falling 1 -> 0 over ``width``, constant ``top`` afterwards.

    Slopes stay in [0, 1]; the final value is exactly ``top``.
    """
    start, top, width = float(start), float(top), float(width)
    if top <= 0 or width <= 0:
        raise InputError("ramp needs positive top and width")
    if top <= width:
        # too short for a linear middle: two quadratic halves meeting at slope top/width
        peak = top / width
        knots = [start, start + width, start + 2 * width]
        values = [0.0, top / 2, top]
        slopes = [0.0, peak, 0.0]
        return PiecewiseCubic(knots, values, slopes)
    end = start + top + width
    knots = [start, start + width, end - width, end]
    values = [0.0, width / 2, top - width / 2, top]
    slopes = [0.0, 1.0, 1.0, 0.0]
    return PiecewiseCubic(knots, values, slopes)


def _quadratic_roots(a, b, c, lo, hi):
    """Real roots of a u^2 + b u + c in [lo, hi)."""
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) < 1e-14:
        if abs(b) < 1e-14:
            return []
        roots = [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc < -1e-14:
            return []
        disc = max(disc, 0.0)
        sq = np.sqrt(disc)
        q = -0.5 * (b + np.copysign(sq, b))
        roots = [q / a]
        if q != 0.0:
            roots.append(c / q)
    out = []
    for u in roots:
        if lo - _ROOT_TOL * max(1.0, hi) <= u < hi - _ROOT_TOL * max(1.0, hi) or (lo == u):
            out.append(min(max(u, lo), hi))
    return sorted(set(out))


def _merge_bands(bands):
    out = []
    for a, b in sorted(bands):
        if out and a <= out[-1][1] + 1e-12:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _pchip_slopes(x, y):
    from scipy.interpolate import PchipInterpolator

    return PchipInterpolator(x, y).derivative()(x)
