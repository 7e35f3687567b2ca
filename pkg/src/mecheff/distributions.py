"""Value distributions on [0, inf) and their hazard/reserve machinery.

Every distribution exposes four evaluators (cdf, pdf of the continuous
part, hazard, quantile) that accept scalars or numpy arrays. The cdf is
right-continuous; point masses are listed in `atoms` and the quantile maps
an atom's whole mass interval onto its location, which is what inverse-cdf
sampling needs.

The reserve price of a distribution is the x solving x * hazard(x) = 1,
i.e. the point where the virtual value x - 1/hazard(x) crosses zero. For
any distribution with nondecreasing hazard the cdf at the reserve can
never exceed 1 - 1/e; that cap is what makes `GFamily` (which attains it)
the extremal member of its class.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoRoot
from .numerics import bisect, bracket_root

# Universal cap on cdf(reserve) for nondecreasing-hazard distributions.
ALPHA = 1.0 - 1.0 / math.e


def _promote(x):
    arr = np.asarray(x, dtype=np.float64)
    return np.atleast_1d(arr), arr.ndim == 0


def _demote(out, scalar):
    return float(out[0]) if scalar else out


class ValueDistribution(ABC):
    """A nonnegative value distribution known through its evaluators.

    Subclasses provide closed-form cdf/pdf/quantile; `hazard` defaults to
    pdf/(1-cdf) but is overridden wherever a cleaner form exists. All
    evaluators are vectorized over numpy arrays and return plain floats
    for scalar input. Instances are immutable after construction.
    """

    @property
    @abstractmethod
    def support_hi(self) -> float:
        """Upper end of the support (may be inf). Lower end is always 0."""

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        """Point masses as (location, mass) pairs, ordered by location."""
        return ()

    @property
    def exact_reserve(self) -> float | None:
        """Closed-form reserve price, when the family stores one."""
        return None

    @abstractmethod
    def cdf(self, x):
        ...

    @abstractmethod
    def pdf(self, x):
        ...

    @abstractmethod
    def quantile(self, u):
        ...

    def hazard(self, x):
        x, scalar = _promote(x)
        surv = 1.0 - np.asarray(self.cdf(x))
        dens = np.asarray(self.pdf(x))
        out = np.full_like(surv, np.inf)
        ok = surv > 0.0
        out[ok] = dens[ok] / surv[ok]
        return _demote(out, scalar)


@dataclass(frozen=True)
class Exponential(ValueDistribution):
    """Memoryless family; hazard is constant and equal to `rate`."""

    rate: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")

    @property
    def support_hi(self):
        return math.inf

    @property
    def exact_reserve(self):
        # constant hazard: x*h(x) = 1 at x = 1/rate
        return 1.0 / self.rate

    def cdf(self, x):
        x, scalar = _promote(x)
        out = -np.expm1(-self.rate * np.maximum(x, 0.0))
        return _demote(out, scalar)

    def pdf(self, x):
        x, scalar = _promote(x)
        out = np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)
        return _demote(out, scalar)

    def hazard(self, x):
        x, scalar = _promote(x)
        return _demote(np.full(x.shape, self.rate), scalar)

    def quantile(self, u):
        u, scalar = _promote(u)
        return _demote(-np.log1p(-u) / self.rate, scalar)


@dataclass(frozen=True)
class Uniform(ValueDistribution):
    """Uniform on [0, hi]. `lo` is kept for the record format and must be 0."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.lo != 0.0:
            raise ValueError("support must start at 0")
        if not (math.isfinite(self.hi) and self.hi > 0.0):
            raise ValueError(f"hi must be positive and finite, got {self.hi}")

    @property
    def support_hi(self):
        return self.hi

    @property
    def exact_reserve(self):
        # x/(hi - x) = 1 at the midpoint
        return 0.5 * self.hi

    def cdf(self, x):
        x, scalar = _promote(x)
        return _demote(np.clip(x / self.hi, 0.0, 1.0), scalar)

    def pdf(self, x):
        x, scalar = _promote(x)
        out = np.where((x >= 0.0) & (x < self.hi), 1.0 / self.hi, 0.0)
        return _demote(out, scalar)

    def hazard(self, x):
        x, scalar = _promote(x)
        out = np.full(x.shape, np.inf)
        inside = x < self.hi
        out[inside] = 1.0 / (self.hi - x[inside])
        return _demote(out, scalar)

    def quantile(self, u):
        u, scalar = _promote(u)
        return _demote(u * self.hi, scalar)


@dataclass(frozen=True)
class GFamily(ValueDistribution):
    """Extremal nondecreasing-hazard family with reserve r and cdf(r) = phi.

    Three regimes: no mass below the knot t = r*(1 + ln(1-phi)), constant
    hazard 1/r from the knot up to r, and a thin linear slab of width eps
    just above r carrying the remaining 1-phi mass. Within the class of
    nondecreasing-hazard distributions sharing (r, phi), this cdf is the
    pointwise-lowest on [0, r], which makes the family the worst case for
    the below-reserve efficiency shortfall.

    phi may not exceed 1 - 1/e (the class is empty beyond that). eps
    defaults to 1e-6*r; the family keeps a nondecreasing hazard only for
    eps <= r.
    """

    phi: float
    r: float
    eps: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError(f"r must be positive and finite, got {self.r}")
        if not (0.0 <= self.phi <= ALPHA + 1e-12):
            raise DomainError(f"phi must lie in [0, 1-1/e], got {self.phi}")
        if self.phi > ALPHA:
            object.__setattr__(self, "phi", ALPHA)
        if self.eps is None:
            object.__setattr__(self, "eps", 1e-6 * self.r)
        if not (math.isfinite(self.eps) and self.eps > 0.0):
            raise ValueError(f"eps must be positive and finite, got {self.eps}")

    @property
    def t_knot(self) -> float:
        """Lower edge of the constant-hazard regime, r*(1 + ln(1-phi))."""
        t = self.r * (1.0 + math.log1p(-self.phi))
        return min(self.r, max(0.0, t))

    @property
    def support_hi(self):
        return self.r + self.eps

    @property
    def exact_reserve(self):
        return self.r

    def cdf(self, x):
        x, scalar = _promote(x)
        t, r, eps, phi = self.t_knot, self.r, self.eps, self.phi
        out = np.zeros(x.shape)
        mid = (x >= t) & (x < r)
        out[mid] = -np.expm1(-(x[mid] - t) / r)
        slab = (x >= r) & (x < r + eps)
        out[slab] = phi + (1.0 - phi) * (x[slab] - r) / eps
        out[x >= r + eps] = 1.0
        return _demote(out, scalar)

    def pdf(self, x):
        # the constant-hazard regime owns its right endpoint r, so the
        # hazard there is 1/r and the stored reserve satisfies x*h(x) = 1
        x, scalar = _promote(x)
        t, r, eps, phi = self.t_knot, self.r, self.eps, self.phi
        out = np.zeros(x.shape)
        mid = (x >= t) & (x <= r)
        out[mid] = np.exp(-(x[mid] - t) / r) / r
        slab = (x > r) & (x < r + eps)
        out[slab] = (1.0 - phi) / eps
        return _demote(out, scalar)

    def hazard(self, x):
        x, scalar = _promote(x)
        t, r, eps = self.t_knot, self.r, self.eps
        out = np.zeros(x.shape)
        out[(x >= t) & (x <= r)] = 1.0 / r
        slab = (x > r) & (x < r + eps)
        out[slab] = 1.0 / (eps - (x[slab] - r))
        out[x >= r + eps] = np.inf
        return _demote(out, scalar)

    def quantile(self, u):
        u, scalar = _promote(u)
        t, r, eps, phi = self.t_knot, self.r, self.eps, self.phi
        out = np.empty(u.shape)
        low = u <= phi
        out[low] = t - r * np.log1p(-u[low])
        out[~low] = r + eps * (u[~low] - phi) / (1.0 - phi)
        return _demote(out, scalar)


@dataclass(frozen=True)
class PFamily(ValueDistribution):
    """Regular but not monotone-hazard: heavy lower tail, atom at the cap r.

    Below r the cdf is x/(x+eps) and the hazard 1/(x+eps) strictly
    decreases, while the virtual value is identically -eps, so the family
    is regular. The remaining eps/(r+eps) mass sits as an atom at r, and
    the reserve price equals r.
    """

    eps: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0.0):
            raise ValueError(f"eps must be positive and finite, got {self.eps}")
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError(f"r must be positive and finite, got {self.r}")

    @property
    def support_hi(self):
        return self.r

    @property
    def atoms(self):
        return ((self.r, self.eps / (self.r + self.eps)),)

    @property
    def exact_reserve(self):
        return self.r

    def cdf(self, x):
        x, scalar = _promote(x)
        out = np.ones(x.shape)
        below = (x >= 0.0) & (x < self.r)
        out[below] = x[below] / (x[below] + self.eps)
        out[x < 0.0] = 0.0
        return _demote(out, scalar)

    def pdf(self, x):
        x, scalar = _promote(x)
        out = np.zeros(x.shape)
        below = (x >= 0.0) & (x < self.r)
        out[below] = self.eps / (x[below] + self.eps) ** 2
        return _demote(out, scalar)

    def hazard(self, x):
        x, scalar = _promote(x)
        out = np.full(x.shape, np.inf)
        below = x < self.r
        out[below] = 1.0 / (x[below] + self.eps)
        return _demote(out, scalar)

    def quantile(self, u):
        u, scalar = _promote(u)
        out = np.full(u.shape, self.r)
        below = u < self.r / (self.r + self.eps)
        out[below] = self.eps * u[below] / (1.0 - u[below])
        return _demote(out, scalar)


@dataclass(frozen=True)
class MhrReport:
    """Outcome of a grid check for a nondecreasing hazard."""

    is_mhr: bool
    witness: tuple[float, float] | None
    grid_size: int


def reserve_price(dist: ValueDistribution) -> float:
    """Solve x * hazard(x) = 1 for the revenue-optimal reserve.

    Families that store the reserve in closed form return it exactly;
    otherwise the root is bracketed by geometric expansion from the median
    and bisected to an interval of width 1e-12. Raises NoRoot when
    x * hazard(x) stays below 1 over the whole support.
    """
    if dist.exact_reserve is not None:
        return float(dist.exact_reserve)

    def excess(x):
        return x * float(dist.hazard(x)) - 1.0

    start = float(dist.quantile(0.5))
    # Unbounded supports are truncated where 1-F underflows any tolerance.
    hi_cap = float(dist.quantile(1.0 - 1e-12))
    lo, hi = bracket_root(excess, start, lo_limit=0.0, hi_limit=hi_cap)
    return bisect(excess, lo, hi, width=1e-12)


def virtual_value(dist: ValueDistribution, x):
    """Value adjusted by inverse hazard: x - 1/hazard(x).

    Zero exactly at the reserve price. Raises DomainError where the hazard
    vanishes (the virtual value is -inf there; callers treat such values
    as below any reserve).
    """
    xa, scalar = _promote(x)
    h = np.asarray(_promote(dist.hazard(xa))[0])
    if np.any(h <= 0.0):
        raise DomainError("hazard is zero; virtual value is -inf")
    with np.errstate(divide="ignore"):
        out = xa - 1.0 / h
    return _demote(out, scalar)


def mhr_check(dist: ValueDistribution, grid_size: int = 256) -> MhrReport:
    """Test hazard monotonicity on a quantile-spaced grid avoiding atoms.

    Grid-based rather than symbolic so user-defined distributions, where
    only evaluators exist, can be checked too.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    u = (np.arange(grid_size) + 0.5) / grid_size
    x = np.asarray(dist.quantile(u))
    keep = 1.0 - np.asarray(dist.cdf(x)) > 1e-12
    for loc, _mass in dist.atoms:
        keep &= np.abs(x - loc) > 1e-12 * max(1.0, abs(loc))
    x = np.unique(x[keep])
    h = np.asarray(dist.hazard(x))
    finite = np.isfinite(h)
    x, h = x[finite], h[finite]
    drops = np.nonzero(h[1:] < h[:-1] - 1e-9)[0]
    if drops.size == 0:
        return MhrReport(is_mhr=True, witness=None, grid_size=grid_size)
    i = int(drops[0])
    return MhrReport(is_mhr=False, witness=(float(x[i]), float(x[i + 1])), grid_size=grid_size)


def lemma1_check(dist: ValueDistribution) -> bool:
    """cdf at the reserve never exceeds 1 - 1/e for nondecreasing hazards."""
    return bool(float(dist.cdf(reserve_price(dist))) <= ALPHA + 1e-9)


def domination_check(dist: ValueDistribution, grid_size: int = 256) -> bool:
    """Check that dist's cdf dominates its extremal class member on [0, r].

    Builds the GFamily sharing dist's reserve r and phi = cdf(r) and
    verifies cdf_dist(y) >= cdf_G(y) - 1e-9 on a grid over [0, r]. Holds
    for every nondecreasing-hazard distribution.
    """
    r = reserve_price(dist)
    phi = float(dist.cdf(r))
    extremal = GFamily(phi=min(phi, ALPHA), r=r)
    y = np.linspace(0.0, r, grid_size)
    return bool(np.all(np.asarray(dist.cdf(y)) >= np.asarray(extremal.cdf(y)) - 1e-9))


def sample(dist: ValueDistribution, u):
    """Inverse-cdf sampling: map uniform u in [0, 1) through the quantile."""
    ua, _ = _promote(u)
    if np.any((ua < 0.0) | (ua >= 1.0)):
        raise ValueError("u must lie in [0, 1)")
    return dist.quantile(u)


_FAMILIES = {"exponential", "uniform", "g", "p"}


def from_spec(record: dict) -> ValueDistribution:
    """Build a distribution from a tagged record, e.g. {"family": "g", ...}."""
    if not isinstance(record, dict) or "family" not in record:
        raise ValueError("distribution record must be a dict with a 'family' tag")
    family = record["family"]
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    args = {k: v for k, v in record.items() if k != "family"}
    try:
        if family == "exponential":
            return Exponential(rate=float(args.pop("rate", 1.0)), **args)
        if family == "uniform":
            return Uniform(lo=float(args.pop("lo", 0.0)), hi=float(args.pop("hi", 1.0)), **args)
        if family == "g":
            eps = args.pop("eps", None)
            return GFamily(
                phi=float(args.pop("phi")),
                r=float(args.pop("r")),
                eps=None if eps is None else float(eps),
                **args,
            )
        return PFamily(eps=float(args.pop("eps")), r=float(args.pop("r")), **args)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad parameters for family {family!r}: {exc}") from exc


def to_spec(dist: ValueDistribution) -> dict:
    """Inverse of from_spec, for self-describing reports."""
    if isinstance(dist, Exponential):
        return {"family": "exponential", "rate": dist.rate}
    if isinstance(dist, Uniform):
        return {"family": "uniform", "lo": dist.lo, "hi": dist.hi}
    if isinstance(dist, GFamily):
        return {"family": "g", "phi": dist.phi, "r": dist.r, "eps": dist.eps}
    if isinstance(dist, PFamily):
        return {"family": "p", "eps": dist.eps, "r": dist.r}
    raise ValueError(f"no record form for {type(dist).__name__}")
