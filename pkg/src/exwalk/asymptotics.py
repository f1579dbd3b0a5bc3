"""Large-window limits: critical fractions, band growth rates, tie weights,
and the continuum jump-response model.

As the window N grows with threshold fractions M_i/N -> r_i, each band's
stationary mass grows like J_i^N.  The band with the largest J dictates the
limiting speed; exact ties are resolved by finite weights computed from
integer offsets along subsequences where r_i * N is integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .errors import (
    NeedsOffsetsError,
    QuadratureError,
    TieError,
    UnsupportedRefinementError,
    ValidationError,
)
from .model import PROB_EPS
from .numutil import log_binom, logit, xlogx

# Two band growth rates count as tied when their logs differ by less than
# this; each log J is a product of O(l) factors known to ~1e-15 relative.
TIE_LOG_TOL = 1e-9

_FIXED_POINT_GRID = 10_000
_BISECT_TOL = 1e-12
_F_UNIQUE_TOL = 1e-9


def rate_function(s: float) -> float:
    """Large-deviation cost of a rights-fraction s under fair coins:
    log 2 + s log s + (1-s) log(1-s), with 0 log 0 = 0."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} out of [0, 1]")
    return math.log(2.0) + xlogx(s) + xlogx(1.0 - s)


def r_star(p0: float, p1: float) -> float:
    """Critical threshold fraction separating the two limiting speeds."""
    if not (0.0 < p0 < p1 < 1.0):
        raise ValueError(f"need 0 < p0 < p1 < 1, got p0={p0}, p1={p1}")
    return math.log((1.0 - p0) / (1.0 - p1)) / (logit(p1) - logit(p0))


def limit_speed_single(p0: float, p1: float, r: float, tie_tol: float = 1e-12) -> float:
    """Limiting speed for a single threshold fraction r != r*(p0, p1)."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r={r} out of [0, 1]")
    rs = r_star(p0, p1)
    if abs(r - rs) < tie_tol:
        raise TieError(
            f"r={r} is at the critical fraction r*={rs}; "
            "use limit_speed_single_boundary with an alpha weight"
        )
    return 2.0 * p1 - 1.0 if r < rs else 2.0 * p0 - 1.0


def limit_speed_single_boundary(p0: float, p1: float, alpha: float) -> float:
    """Limiting speed exactly at r*, indexed by the offset weight alpha.

    alpha = 0 recovers 2 p0 - 1, alpha = inf recovers 2 p1 - 1, and finite
    alpha interpolates through the displayed convex combination.
    """
    if not (0.0 < p0 < p1 < 1.0):
        raise ValueError(f"need 0 < p0 < p1 < 1, got p0={p0}, p1={p1}")
    if alpha < 0.0 or math.isnan(alpha):
        raise ValueError(f"alpha={alpha} must be >= 0 (math.inf allowed)")
    if math.isinf(alpha):
        return 2.0 * p1 - 1.0
    num = (2.0 * p0 - 1.0) * (1.0 - p1) + (2.0 * p1 - 1.0) * (1.0 - p0) * alpha
    den = (1.0 - p1) + (1.0 - p0) * alpha
    return num / den


@dataclass(frozen=True)
class LimitSpec:
    """Limit configuration: probabilities p_0..p_l and fractions r_1..r_l.

    Fractions may be floats or exact :class:`fractions.Fraction`s; offsets
    ``c`` (one per fraction, integers or +/-inf) encode M_k - N * r_k along
    subsequences where every r_k * N is integral, and are required only to
    resolve exact ties.
    """

    p: tuple[float, ...]
    r: tuple = ()
    c: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(q) for q in self.p))
        object.__setattr__(self, "r", tuple(self.r))
        if self.c is not None:
            object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @property
    def l(self) -> int:
        return len(self.r)

    @property
    def r_full(self) -> tuple[float, ...]:
        """(r_0, r_1, ..., r_l, r_{l+1}) = (0, r..., 1) as floats."""
        return (0.0,) + tuple(float(x) for x in self.r) + (1.0,)

    def violations(self) -> list[str]:
        out = []
        if len(self.p) != len(self.r) + 1:
            out.append(
                f"p must have one more entry than r (got {len(self.p)} vs {len(self.r)})"
            )
        for i, q in enumerate(self.p):
            if not (PROB_EPS <= q <= 1.0 - PROB_EPS):
                out.append(f"p[{i}]={q} out of (0, 1)")
        for i in range(1, len(self.p)):
            if self.p[i] <= self.p[i - 1]:
                out.append(f"p must be strictly increasing at index {i}")
        rf = [float(x) for x in self.r]
        for i, x in enumerate(rf):
            if not (0.0 <= x <= 1.0):
                out.append(f"r[{i + 1}]={x} out of [0, 1]")
        for i in range(1, len(rf)):
            if rf[i] < rf[i - 1]:
                out.append(f"r must be nondecreasing at index {i + 1}")
        if self.c is not None:
            if len(self.c) != len(self.r):
                out.append("offsets c must have the same length as r")
            for i, x in enumerate(self.c):
                if math.isnan(x) or not (math.isinf(x) or x == int(x)):
                    out.append(f"c[{i + 1}]={x} must be an integer or +/-inf")
            for x in self.r:
                if not isinstance(x, (Fraction, int)):
                    out.append("offsets require exact rational fractions r")
                    break
        return out

    def require_valid(self) -> "LimitSpec":
        bad = self.violations()
        if bad:
            raise ValidationError(bad)
        return self

    @property
    def subsequence_step(self) -> int | None:
        """lcm of the r denominators: N must run over its multiples for the
        offsets to stay constant.  None when fractions are not exact."""
        if not all(isinstance(x, (Fraction, int)) for x in self.r):
            return None
        step = 1
        for x in self.r:
            step = math.lcm(step, Fraction(x).denominator)
        return step


@dataclass(frozen=True)
class JValue:
    """Growth rate of one band's stationary mass, as N -> infinity."""

    index: int
    log_j: float
    branch: str  # "interior", "pinned-left", or "pinned-right"


def j_values(spec: LimitSpec) -> tuple[JValue, ...]:
    """Per-band growth rates J_i (in log form) with branch classification.

    The optimal rights-fraction of band i is p_i when the band contains it
    ("interior"); otherwise it is pinned at the nearer band edge.  The
    common factor 1/2 is included uniformly in every branch, so only
    ratios of J values are meaningful across conventions.
    """
    spec.require_valid()
    rf = spec.r_full
    out = []
    prefix = 0.0  # log prod_{k<=i} (p_{k-1}/(1-p_{k-1}))^{r_k - r_{k-1}}
    for i, p_i in enumerate(spec.p):
        r_lo, r_hi = rf[i], rf[i + 1]
        if r_lo > p_i:
            branch = "pinned-left"
            lj = -math.log(2.0) - xlogx(r_lo) - xlogx(1.0 - r_lo) + prefix
        elif r_hi < p_i:
            branch = "pinned-right"
            lj = (
                -math.log(2.0)
                - xlogx(r_hi)
                - xlogx(1.0 - r_hi)
                + (r_hi - r_lo) * logit(p_i)
                + prefix
            )
        else:
            branch = "interior"
            lj = (
                -math.log(2.0)
                - (r_lo * math.log(p_i) + (1.0 - r_lo) * math.log1p(-p_i))
                + prefix
            )
        out.append(JValue(index=i, log_j=lj, branch=branch))
        if i < spec.l:
            prefix += (rf[i + 1] - rf[i]) * logit(p_i)
    return tuple(out)


@dataclass(frozen=True)
class TieReport:
    """Outcome of the band-dominance analysis for a limit configuration."""

    admissible: tuple[int, ...]
    j: tuple[JValue, ...]
    argmax: tuple[int, ...]
    alphas: tuple[float, ...] | None
    limit_speed: float

    @property
    def is_tie(self) -> bool:
        return len(self.argmax) > 1


def _tie_alphas(spec: LimitSpec, winners: tuple[int, ...]) -> tuple[float, ...]:
    """Offset weights alpha for the tied bands (log-space, exp at the end).

    alpha_i = (p_i/(1-p_i))^{-c_i} * prod_{k<=i} (p_{k-1}/(1-p_{k-1}))^{c_k - c_{k-1}}
    with c_0 = 0, evaluated in the telescoped form
    log alpha_i = sum_{k<=i} c_k * (logit(p_{k-1}) - logit(p_k))
    so that +/-inf offsets produce alpha in {0, inf} without inf - inf.
    """
    deltas = [logit(spec.p[k - 1]) - logit(spec.p[k]) for k in range(1, spec.l + 1)]
    log_alphas = []
    for i in winners:
        la = sum(spec.c[k - 1] * deltas[k - 1] for k in range(1, i + 1))
        if math.isnan(la):
            raise ValidationError(
                [f"offsets for band {i} are indeterminate (opposing infinities)"]
            )
        log_alphas.append(la)

    def exp_ext(la: float) -> float:
        if la > 700.0:
            return math.inf
        if la < -745.0:
            return 0.0
        return math.exp(la)

    return tuple(exp_ext(la) for la in log_alphas)


def limit_speed_multi(spec: LimitSpec, tie_log_tol: float = TIE_LOG_TOL) -> TieReport:
    """Limiting speed of the multi-threshold walk as N -> infinity.

    A unique dominant band i0 gives 2 p_{i0} - 1.  Tied bands are averaged
    with weights alpha/(1-p), which requires offsets; at most one alpha may
    be infinite (it then wins outright).
    """
    spec.require_valid()
    jv = j_values(spec)
    rf = spec.r_full
    admissible = tuple(
        i for i in range(spec.l + 1) if rf[i] < spec.p[i] < rf[i + 1]
    )
    if not admissible:
        raise ValidationError(
            ["no band satisfies r_i < p_i < r_{i+1}; the limit theory needs one"]
        )
    best = max(jv[i].log_j for i in admissible)
    winners = tuple(i for i in admissible if best - jv[i].log_j <= tie_log_tol)
    if len(winners) == 1:
        return TieReport(
            admissible=admissible,
            j=jv,
            argmax=winners,
            alphas=None,
            limit_speed=2.0 * spec.p[winners[0]] - 1.0,
        )
    if spec.c is None:
        raise NeedsOffsetsError(
            f"bands {winners} tie at the maximal growth rate; "
            "supply integer offsets c to resolve the limit"
        )
    alphas = _tie_alphas(spec, winners)
    infinite = [i for i, a in zip(winners, alphas) if math.isinf(a)]
    if len(infinite) > 1:
        raise UnsupportedRefinementError(
            f"bands {infinite} all have alpha = inf; refining same-order "
            "infinities is not supported"
        )
    if len(infinite) == 1:
        speed = 2.0 * spec.p[infinite[0]] - 1.0
    else:
        weights = [a / (1.0 - spec.p[i]) for i, a in zip(winners, alphas)]
        total = sum(weights)
        if total == 0.0:
            raise ValidationError(["all tie weights vanish (every alpha = 0)"])
        speed = sum(w * (2.0 * spec.p[i] - 1.0) for w, i in zip(weights, winners)) / total
    return TieReport(
        admissible=admissible, j=jv, argmax=winners, alphas=alphas, limit_speed=speed
    )


@dataclass(frozen=True)
class WindowSumCheck:
    """Both evaluations of the tilted binomial window sum, in log space.

    ``log_direct`` sums C(N,j) (p/(1-p))^{j-M} term by term; ``log_tilted``
    uses the change-of-measure identity
    sum = (p/(1-p))^{-M} (1-p)^{-N} P(M <= Bin(N,p) <= M_next - 1)
    with the binomial tail computed in exact rational arithmetic.
    """

    log_direct: float
    log_tilted: float

    @property
    def relative_gap(self) -> float:
        return abs(math.expm1(self.log_direct - self.log_tilted))


def binomial_window_sum(N: int, p: float, M: int, M_next: int) -> WindowSumCheck:
    """Evaluate one band's weight sum along two independent routes."""
    if not (0 <= M < M_next <= N + 1):
        raise ValueError(f"need 0 <= M < M_next <= N+1, got M={M}, M_next={M_next}")
    if not (PROB_EPS <= p <= 1.0 - PROB_EPS):
        raise ValueError(f"p={p} out of (0, 1)")
    js = np.arange(M, M_next, dtype=np.float64)
    log_direct = float(logsumexp(log_binom(N, js) + (js - M) * logit(p)))

    pf = Fraction(p)
    qf = 1 - pf
    term = math.comb(N, M) * pf**M * qf ** (N - M)
    tail = Fraction(0)
    for j in range(M, M_next):
        tail += term
        if j + 1 < M_next:
            term = term * (N - j) * pf / ((j + 1) * qf)
    log_tail = math.log(tail.numerator) - math.log(tail.denominator)
    log_tilted = -M * logit(p) - N * math.log1p(-p) + log_tail
    return WindowSumCheck(log_direct=log_direct, log_tilted=log_tilted)


@dataclass(frozen=True)
class GSpec:
    """Nondecreasing jump-response curve G: [0,1] -> (0,1).

    Either linear (G(x) = rho0 + (rho1 - rho0) x) or a monotone table with
    piecewise-linear interpolation between knots.
    """

    kind: str
    rho0: float | None = None
    rho1: float | None = None
    knots: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def linear(cls, rho0: float, rho1: float) -> "GSpec":
        return cls(kind="linear", rho0=float(rho0), rho1=float(rho1))

    @classmethod
    def constant(cls, q: float) -> "GSpec":
        return cls(kind="linear", rho0=float(q), rho1=float(q))

    @classmethod
    def table(cls, knots, values) -> "GSpec":
        return cls(
            kind="table",
            knots=tuple(float(x) for x in knots),
            values=tuple(float(v) for v in values),
        )

    def violations(self) -> list[str]:
        out = []
        if self.kind == "linear":
            if self.rho0 is None or self.rho1 is None:
                return ["linear GSpec needs rho0 and rho1"]
            for name, v in (("rho0", self.rho0), ("rho1", self.rho1)):
                if not (PROB_EPS <= v <= 1.0 - PROB_EPS):
                    out.append(f"{name}={v} out of (0, 1)")
            if self.rho1 < self.rho0:
                out.append("rho1 < rho0 makes G decreasing")
        elif self.kind == "table":
            if not self.knots or not self.values or len(self.knots) != len(self.values):
                return ["table GSpec needs matching knots and values"]
            if self.knots[0] != 0.0 or self.knots[-1] != 1.0:
                out.append("table knots must start at 0 and end at 1")
            if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
                out.append("table knots must be strictly increasing")
            if any(b < a for a, b in zip(self.values, self.values[1:])):
                out.append("table values must be nondecreasing")
            if any(not (PROB_EPS <= v <= 1.0 - PROB_EPS) for v in self.values):
                out.append("table values must lie in (0, 1)")
        else:
            out.append(f"unknown GSpec kind {self.kind!r}")
        return out

    def require_valid(self) -> "GSpec":
        bad = self.violations()
        if bad:
            raise ValidationError(bad)
        return self

    def __call__(self, x):
        if self.kind == "linear":
            return self.rho0 + (self.rho1 - self.rho0) * np.asarray(x, dtype=np.float64)
        return np.interp(x, self.knots, self.values)

    def at(self, x: float) -> float:
        return float(self(x))


def _adaptive_simpson(f, a, b, tol, max_depth=50):
    """Recursive adaptive Simpson with Richardson extrapolation."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson hit depth {max_depth} on [{a}, {b}]"
            )
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + recurse(
            m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
        )

    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 0)


def _logit_integral(g: GSpec, p: float, tol: float) -> float:
    """Integral of log(G/(1-G)) over [0, p]."""
    if g.kind == "linear":
        slope = g.rho1 - g.rho0
        if slope == 0.0:
            return p * logit(g.rho0)

        def anti(x):  # antiderivative of log(rho0 + slope t) at t = x
            u = g.rho0 + slope * x
            return (u * math.log(u) - u) / slope

        def anti1(x):  # antiderivative of log(1 - rho0 - slope t)
            u = 1.0 - g.rho0 - slope * x
            return -(u * math.log(u) - u) / slope

        return (anti(p) - anti(0.0)) - (anti1(p) - anti1(0.0))

    def f(x):
        v = g.at(x)
        return math.log(v) - math.log1p(-v)

    pieces = [k for k in g.knots if 0.0 < k < p]
    bounds = [0.0] + pieces + [p]
    piece_tol = tol / (len(bounds) - 1)
    return sum(
        _adaptive_simpson(f, a, b, piece_tol) for a, b in zip(bounds, bounds[1:])
    )


def g_potential(g: GSpec, p: float, tol: float = 1e-10) -> float:
    """The variational functional F(p) whose maximizer gives the limit speed:
    integral of logit(G) over [0, p] plus the entropy of p."""
    g.require_valid()
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} out of [0, 1]")
    return _logit_integral(g, p, tol) - xlogx(p) - xlogx(1.0 - p)


@dataclass(frozen=True)
class GLimitReport:
    """Fixed points of G, their F values, and the selected maximizer."""

    fixed_points: tuple[float, ...]
    f_values: tuple[float, ...]
    p_star: float | None
    speed: float | None
    competing: tuple[float, ...] = ()

    @property
    def unique(self) -> bool:
        return self.p_star is not None


def _bisect_fixed_point(g: GSpec, lo: float, hi: float) -> float:
    """Root of G(x) - x in [lo, hi] given a sign change."""
    flo = g.at(lo) - lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = g.at(mid) - mid
        if fmid == 0.0 or hi - lo < _BISECT_TOL:
            return mid
        if (flo > 0) == (fmid > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_limit_speed(g: GSpec, f_tol: float = _F_UNIQUE_TOL) -> GLimitReport:
    """Limiting speed 2 p* - 1 of the N-threshold G model.

    p* is the F-maximizing fixed point of G.  For linear G the fixed point
    is unique and available in closed form; tables are scanned for sign
    changes of G(x) - x on a 10^4 grid and bisected.  A non-unique maximum
    (within ``f_tol``) returns a report listing the competing points.
    """
    g.require_valid()
    if g.kind == "linear":
        p_star = g.rho0 / (1.0 - g.rho1 + g.rho0)
        f_val = g_potential(g, p_star)
        return GLimitReport(
            fixed_points=(p_star,),
            f_values=(f_val,),
            p_star=p_star,
            speed=2.0 * p_star - 1.0,
        )
    grid = np.linspace(0.0, 1.0, _FIXED_POINT_GRID + 1)
    h = np.asarray(g(grid)) - grid
    roots: list[float] = []
    for a, b, ha, hb in zip(grid, grid[1:], h, h[1:]):
        if ha == 0.0:
            roots.append(float(a))
        elif (ha > 0) != (hb > 0):
            roots.append(_bisect_fixed_point(g, float(a), float(b)))
    deduped: list[float] = []
    for x in roots:
        if not deduped or x - deduped[-1] > 10 * _BISECT_TOL:
            deduped.append(x)
    if not deduped:
        raise ValidationError(["G has no fixed point; it cannot be a valid GSpec"])
    f_vals = [g_potential(g, x) for x in deduped]
    best = max(f_vals)
    top = [x for x, fv in zip(deduped, f_vals) if best - fv <= f_tol]
    if len(top) > 1:
        return GLimitReport(
            fixed_points=tuple(deduped),
            f_values=tuple(f_vals),
            p_star=None,
            speed=None,
            competing=tuple(top),
        )
    p_star = top[0]
    return GLimitReport(
        fixed_points=tuple(deduped),
        f_values=tuple(f_vals),
        p_star=p_star,
        speed=2.0 * p_star - 1.0,
    )
