"""Edge-weight laws and the exact integral primitives built on them.

Every quantity in the co-influence machinery reduces to integrals of
piecewise-polynomial functions (degree <= 2) against ``dF``.  The laws
below therefore expose their CDF and partial moments
``M_k(x) = int_{[r, x]} y**k dF(y)`` for ``k in {0, 1, 2}`` directly.

Four kinds are supported:

``atomic``
    finitely many atoms ``(value, prob)``.
``uniform-interval``
    uniform on ``[a, b]``.
``shifted-exponential``
    ``shift + Exp(rate)``.
``user-table``
    continuous law given by CDF knots, linearly interpolated (piecewise
    constant density).  Partial moments go through adaptive quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "WeightDistribution",
    "atomic",
    "uniform",
    "shifted_exponential",
    "user_table",
    "parse_dist",
    "cdf",
    "partial_moment",
    "expect_positive_part",
    "expect_excess",
    "sample",
    "check_percolation_condition",
    "PRESETS",
]

ATOMIC = "atomic"
UNIFORM = "uniform-interval"
EXPONENTIAL = "shifted-exponential"
TABLE = "user-table"

PROB_SUM_TOL = 1e-12
QUAD_ABS_TOL = 1e-9

# critical bond-percolation thresholds; only d=2 is known exactly
PC_EXACT = {2: 0.5}


@dataclass(frozen=True)
class WeightDistribution:
    """An edge-weight law ``F`` on ``[0, inf)``.

    Construct through :func:`atomic`, :func:`uniform`,
    :func:`shifted_exponential`, :func:`user_table` or :func:`parse_dist`
    rather than directly.
    """

    kind: str
    atoms: tuple[tuple[float, float], ...] = ()
    params: tuple[float, ...] = ()
    r: float = 0.0
    mu: float = 0.0
    m2: float = 0.0
    spec: str = ""
    # cached arrays for the atomic kind
    _values: np.ndarray = field(default=None, repr=False, compare=False)
    _probs: np.ndarray = field(default=None, repr=False, compare=False)
    _cum: np.ndarray = field(default=None, repr=False, compare=False)

    # -- convenience wrappers around the module-level operations --------
    def cdf(self, x):
        return cdf(self, x)

    def partial_moment(self, order: int, x):
        return partial_moment(self, order, x)

    def expect_positive_part(self, z):
        return expect_positive_part(self, z)

    def sample(self, u):
        return sample(self, u)

    @property
    def is_atomic(self) -> bool:
        return self.kind == ATOMIC

    @property
    def is_integer_atomic(self) -> bool:
        """True when every atom is a nonnegative integer.

        This switches geodesy to exact integer weight sums.
        """
        return self.kind == ATOMIC and all(float(v).is_integer() for v, _ in self.atoms)

    @property
    def support_values(self) -> np.ndarray:
        if self.kind != ATOMIC:
            raise ValueError(f"{self.kind} law has no finite support")
        return self._values

    @property
    def atom_probs(self) -> np.ndarray:
        if self.kind != ATOMIC:
            raise ValueError(f"{self.kind} law has no atoms")
        return self._probs

    def quantile_upper(self) -> float:
        """A finite point carrying essentially all of the mass (for probes)."""
        if self.kind == ATOMIC:
            return float(self._values[-1])
        if self.kind == UNIFORM:
            return self.params[1]
        if self.kind == EXPONENTIAL:
            rate, shift = self.params
            return shift + 40.0 / rate
        return self.params[-2]

    def __str__(self) -> str:
        return self.spec


# ---------------------------------------------------------------------------
# construction


def atomic(atoms: Mapping[float, float] | Iterable[tuple[float, float]]) -> WeightDistribution:
    """Finite atomic law; ``atoms`` maps value -> probability."""
    pairs = list(atoms.items()) if isinstance(atoms, Mapping) else list(atoms)
    if not pairs:
        raise ValueError("atomic law needs at least one atom")
    merged: dict[float, float] = {}
    for value, prob in pairs:
        value, prob = float(value), float(prob)
        if value < 0 or not math.isfinite(value):
            raise ValueError(f"atom value must be finite and nonnegative, got {value}")
        if not 0.0 < prob <= 1.0:
            raise ValueError(f"atom probability must lie in (0, 1], got {prob}")
        merged[value] = merged.get(value, 0.0) + prob
    total = math.fsum(merged.values())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"atom probabilities sum to {total!r}, not 1")
    items = tuple(sorted(merged.items()))
    values = np.array([v for v, _ in items])
    probs = np.array([p for _, p in items])
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    mu = math.fsum(v * p for v, p in items)
    m2 = math.fsum(v * v * p for v, p in items)
    spec = "atomic:" + ",".join(f"{_fmt(v)}={_fmt(p)}" for v, p in items)
    return WeightDistribution(
        kind=ATOMIC,
        atoms=items,
        r=float(values[0]),
        mu=mu,
        m2=m2,
        spec=spec,
        _values=values,
        _probs=probs,
        _cum=cum,
    )


def uniform(a: float = 0.0, b: float = 1.0) -> WeightDistribution:
    a, b = float(a), float(b)
    if not 0.0 <= a < b < math.inf:
        raise ValueError(f"need 0 <= a < b < inf, got [{a}, {b}]")
    return WeightDistribution(
        kind=UNIFORM,
        params=(a, b),
        r=a,
        mu=(a + b) / 2.0,
        m2=(a * a + a * b + b * b) / 3.0,
        spec=f"uniform:{_fmt(a)},{_fmt(b)}",
    )


def shifted_exponential(rate: float = 1.0, shift: float = 0.0) -> WeightDistribution:
    rate, shift = float(rate), float(shift)
    if rate <= 0 or shift < 0:
        raise ValueError(f"need rate > 0 and shift >= 0, got rate={rate}, shift={shift}")
    return WeightDistribution(
        kind=EXPONENTIAL,
        params=(rate, shift),
        r=shift,
        mu=shift + 1.0 / rate,
        m2=shift * shift + 2.0 * shift / rate + 2.0 / rate**2,
        spec=f"exp:rate={_fmt(rate)},shift={_fmt(shift)}",
    )


def user_table(knots: Sequence[tuple[float, float]]) -> WeightDistribution:
    """Continuous law whose CDF linearly interpolates ``(x, F(x))`` knots.

    The first knot must carry ``F = 0`` and the last ``F = 1``.
    """
    xs = np.array([float(x) for x, _ in knots])
    fs = np.array([float(f) for _, f in knots])
    if len(xs) < 2 or np.any(np.diff(xs) <= 0) or np.any(np.diff(fs) < 0):
        raise ValueError("table knots must have increasing x and nondecreasing F")
    if xs[0] < 0 or fs[0] != 0.0 or abs(fs[-1] - 1.0) > PROB_SUM_TOL:
        raise ValueError("table must start at F=0 on x>=0 and end at F=1")
    fs[-1] = 1.0
    # infimum of the support: first knot after which F increases
    first = int(np.argmax(np.diff(fs) > 0))
    params = tuple(np.column_stack([xs, fs]).ravel().tolist())
    spec = "table:" + ",".join(f"{_fmt(x)}={_fmt(f)}" for x, f in zip(xs, fs))
    dist = WeightDistribution(kind=TABLE, params=params, r=float(xs[first]), spec=spec)
    mu = _table_quad(dist, 1, xs[-1])
    m2 = _table_quad(dist, 2, xs[-1])
    object.__setattr__(dist, "mu", mu)
    object.__setattr__(dist, "m2", m2)
    return dist


def _fmt(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def parse_dist(text: str) -> WeightDistribution:
    """Parse a distribution spec string.

    Accepted forms::

        atomic:1=0.5,2=0.5
        uniform:0,1
        exp:rate=1,shift=0
        table:0=0,0.5=0.8,1=1

    plus the preset names in :data:`PRESETS`.
    """
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]
    kind, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"cannot parse distribution spec {text!r}")
    kind = kind.strip().lower()
    parts = [p.strip() for p in body.split(",") if p.strip()]
    if kind == "atomic":
        pairs = []
        for part in parts:
            value, eq, prob = part.partition("=")
            if not eq:
                raise ValueError(f"atomic entry {part!r} is not value=prob")
            pairs.append((float(value), float(prob)))
        return atomic(pairs)
    if kind in ("uniform", "unif"):
        if len(parts) != 2:
            raise ValueError(f"uniform spec needs two endpoints, got {body!r}")
        return uniform(float(parts[0]), float(parts[1]))
    if kind in ("exp", "exponential"):
        kw = {"rate": 1.0, "shift": 0.0}
        for part in parts:
            key, eq, val = part.partition("=")
            if not eq or key.strip() not in kw:
                raise ValueError(f"exp entry {part!r} must be rate=.. or shift=..")
            kw[key.strip()] = float(val)
        return shifted_exponential(**kw)
    if kind == "table":
        knots = []
        for part in parts:
            x, eq, f = part.partition("=")
            if not eq:
                raise ValueError(f"table entry {part!r} is not x=F")
            knots.append((float(x), float(f)))
        return user_table(knots)
    raise ValueError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# CDF, partial moments and positive parts


def cdf(dist: WeightDistribution, x):
    """``F(x) = P(w <= x)``, right-continuous.  Vectorised over ``x``."""
    x = np.asarray(x, dtype=float)
    if dist.kind == ATOMIC:
        idx = np.searchsorted(dist._values, x, side="right")
        out = np.where(idx > 0, dist._cum[np.maximum(idx - 1, 0)], 0.0)
    elif dist.kind == UNIFORM:
        a, b = dist.params
        out = np.clip((x - a) / (b - a), 0.0, 1.0)
    elif dist.kind == EXPONENTIAL:
        rate, shift = dist.params
        out = np.where(x < shift, 0.0, -np.expm1(-rate * np.maximum(x - shift, 0.0)))
    else:
        xs, fs = _table_knots(dist)
        out = np.interp(x, xs, fs, left=0.0, right=1.0)
    return out[()] if out.ndim == 0 else out


def partial_moment(dist: WeightDistribution, order: int, x):
    """``int_{[r, x]} y**order dF(y)`` for ``order`` in ``{0, 1, 2}``."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if order == 0:
        return cdf(dist, x)
    x = np.asarray(x, dtype=float)
    if dist.kind == ATOMIC:
        weighted = np.concatenate([[0.0], np.cumsum(dist._probs * dist._values**order)])
        idx = np.searchsorted(dist._values, x, side="right")
        out = weighted[idx]
    elif dist.kind == UNIFORM:
        a, b = dist.params
        c = np.clip(x, a, b)
        out = (c ** (order + 1) - a ** (order + 1)) / ((order + 1) * (b - a))
    elif dist.kind == EXPONENTIAL:
        rate, shift = dist.params
        z = np.maximum(x - shift, 0.0)
        tail = np.exp(-rate * z)
        f0 = -np.expm1(-rate * z)
        i1 = f0 / rate - tail * z
        if order == 1:
            out = shift * f0 + i1
        else:
            i2 = 2.0 * (f0 / rate**2 - tail * z / rate) - tail * z * z
            out = shift * shift * f0 + 2.0 * shift * i1 + i2
    else:
        out = np.vectorize(lambda xx: _table_quad(dist, order, xx), otypes=[float])(x)
    return out[()] if np.ndim(out) == 0 else out


def expect_positive_part(dist: WeightDistribution, z):
    """``int (z - y)_+ dF(y)``; zero for ``z <= r``."""
    z = np.asarray(z, dtype=float)
    if dist.kind == UNIFORM:
        a, b = dist.params
        c = np.clip(z, a, b)
        out = (c - a) ** 2 / (2.0 * (b - a)) + np.maximum(z - b, 0.0)
    elif dist.kind == EXPONENTIAL:
        rate, shift = dist.params
        w = np.maximum(z - shift, 0.0)
        # int_0^w F = w - (1 - e^{-rate w}) / rate; series where that cancels
        x = rate * w
        series = w * x * (0.5 - x / 6.0 + x * x / 24.0 - x**3 / 120.0)
        out = np.where(x < 1e-3, series, w + np.expm1(-x) / rate)
    else:
        out = z * cdf(dist, z) - partial_moment(dist, 1, z)
    out = np.where(z <= dist.r, 0.0, np.maximum(out, 0.0))
    return out[()] if out.ndim == 0 else out


def expect_excess(dist: WeightDistribution, c):
    """``int (y - c)_+ dF(y)``, the complementary positive part."""
    c = np.asarray(c, dtype=float)
    out = dist.mu - c + expect_positive_part(dist, c)
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def sample(dist: WeightDistribution, u):
    """Generalised inverse CDF, deterministic in ``u`` in ``[0, 1)``."""
    u = np.asarray(u, dtype=float)
    if dist.kind == ATOMIC:
        idx = np.searchsorted(dist._cum, u, side="right")
        out = dist._values[np.minimum(idx, len(dist._values) - 1)]
    elif dist.kind == UNIFORM:
        a, b = dist.params
        out = a + (b - a) * u
    elif dist.kind == EXPONENTIAL:
        rate, shift = dist.params
        out = shift - np.log1p(-u) / rate
    else:
        xs, fs = _table_knots(dist)
        # right-most knot with F <= u, then interpolate inside the segment
        j = np.clip(np.searchsorted(fs, u, side="right") - 1, 0, len(xs) - 2)
        span = fs[j + 1] - fs[j]
        frac = np.where(span > 0, (u - fs[j]) / np.where(span > 0, span, 1.0), 0.0)
        out = xs[j] + frac * (xs[j + 1] - xs[j])
    return out[()] if out.ndim == 0 else out


def check_percolation_condition(dist: WeightDistribution, d: int, pc: float | None = None) -> bool:
    """Advisory check of ``F(0) < p_c(d)``; warns instead of raising.

    Only ``p_c(2) = 1/2`` is built in; other dimensions need ``pc``.
    Returns False when the condition is known to fail.
    """
    if pc is None:
        pc = PC_EXACT.get(d)
    if pc is None:
        return True
    f0 = float(cdf(dist, 0.0))
    if f0 >= pc:
        warnings.warn(
            f"F(0) = {f0} >= p_c({d}) = {pc}: geodesics may fail to exist",
            RuntimeWarning,
            stacklevel=2,
        )
        return False
    return True


# ---------------------------------------------------------------------------
# user-table helpers


def _table_knots(dist: WeightDistribution) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(dist.params).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def _table_quad(dist: WeightDistribution, order: int, x: float) -> float:
    xs, fs = _table_knots(dist)
    hi = min(float(x), float(xs[-1]))
    if hi <= xs[0]:
        return 0.0
    dens = np.diff(fs) / np.diff(xs)

    def integrand(y: float) -> float:
        j = min(max(int(np.searchsorted(xs, y, side="right")) - 1, 0), len(dens) - 1)
        return y**order * dens[j]

    inner = [float(k) for k in xs[1:-1] if xs[0] < k < hi]
    val, _ = integrate.quad(integrand, float(xs[0]), hi, points=inner or None,
                            epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=200)
    return float(val)


PRESETS: dict[str, WeightDistribution] = {
    "uniform": uniform(0.0, 1.0),
    "exp": shifted_exponential(1.0, 0.0),
    "atomic12": atomic({1.0: 0.5, 2.0: 0.5}),
}
