import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mecheff.distributions import (
    ALPHA,
    Exponential,
    GFamily,
    PFamily,
    Uniform,
    ValueDistribution,
    domination_check,
    from_spec,
    lemma1_check,
    mhr_check,
    reserve_price,
    sample,
    to_spec,
    virtual_value,
)
from mecheff.errors import DomainError, NoRoot
from mecheff.numerics import adaptive_simpson

CONTINUOUS = [
    Exponential(rate=1.0),
    Exponential(rate=3.5),
    Uniform(hi=1.0),
    Uniform(hi=4.0),
    GFamily(phi=0.5, r=1.0),
    GFamily(phi=ALPHA, r=2.0, eps=1e-6),
    GFamily(phi=0.1, r=0.3),
]

mhr_family = st.one_of(
    st.floats(0.05, 20.0).map(lambda r: Exponential(rate=r)),
    st.floats(0.05, 20.0).map(lambda h: Uniform(hi=h)),
    st.tuples(st.floats(1e-3, ALPHA), st.floats(0.05, 20.0)).map(
        lambda pr: GFamily(phi=pr[0], r=pr[1], eps=1e-6 * pr[1])
    ),
)


class NoClosedFormExp(ValueDistribution):
    """Exponential seen only through evaluators; exercises the root finder."""

    @property
    def support_hi(self):
        return math.inf

    def cdf(self, x):
        return -np.expm1(-np.maximum(np.asarray(x, dtype=float), 0.0))

    def pdf(self, x):
        return np.exp(-np.maximum(np.asarray(x, dtype=float), 0.0))

    def quantile(self, u):
        return -np.log1p(-np.asarray(u, dtype=float))


class SubUnitHazard(ValueDistribution):
    """Pareto-type tail with x*h(x) = x/(2(1+x)) <= 1/2: no reserve exists."""

    @property
    def support_hi(self):
        return math.inf

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return 1.0 - 1.0 / np.sqrt(1.0 + x)

    def pdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return 0.5 * (1.0 + x) ** -1.5

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return (1.0 - u) ** -2.0 - 1.0


# --- reserve price -----------------------------------------------------------


def test_reserve_examples():
    assert reserve_price(Exponential(rate=1.0)) == pytest.approx(1.0, abs=1e-10)
    assert reserve_price(Uniform(hi=1.0)) == pytest.approx(0.5, abs=1e-10)
    assert reserve_price(GFamily(phi=0.5, r=2.0, eps=1e-6)) == 2.0
    assert reserve_price(PFamily(eps=0.1, r=1.0)) == 1.0


def test_reserve_root_finder_path():
    r = reserve_price(NoClosedFormExp())
    assert r == pytest.approx(1.0, abs=1e-10)
    d = NoClosedFormExp()
    assert abs(r * float(d.hazard(r)) - 1.0) <= 1e-10


def test_reserve_no_root():
    with pytest.raises(NoRoot):
        reserve_price(SubUnitHazard())


def test_lemma1_no_root_propagates():
    with pytest.raises(NoRoot):
        lemma1_check(SubUnitHazard())
    with pytest.raises(NoRoot):
        domination_check(SubUnitHazard())


# --- virtual value -----------------------------------------------------------


def test_virtual_value_examples():
    assert virtual_value(Exponential(1.0), 1.0) == pytest.approx(0.0, abs=1e-9)
    assert virtual_value(Uniform(hi=1.0), 0.75) == pytest.approx(0.5, abs=1e-12)
    assert virtual_value(PFamily(eps=0.1, r=1.0), 0.5) == pytest.approx(-0.1, abs=1e-12)


def test_virtual_value_zero_at_reserve():
    for dist in CONTINUOUS:
        r = reserve_price(dist)
        assert virtual_value(dist, r) == pytest.approx(0.0, abs=1e-9), dist


def test_virtual_value_zero_hazard_raises():
    g = GFamily(phi=0.5, r=1.0)
    assert g.t_knot > 0.0
    with pytest.raises(DomainError):
        virtual_value(g, 0.5 * g.t_knot)


@given(mhr_family)
@settings(max_examples=50, deadline=None)
def test_virtual_value_nondecreasing_on_mhr(dist):
    u = np.linspace(0.01, 0.97, 97)
    x = np.asarray(dist.quantile(u))
    lo = dist.t_knot if isinstance(dist, GFamily) else 0.0
    x = x[x > lo + 1e-12]
    psi = np.asarray(virtual_value(dist, x))
    assert np.all(np.diff(psi) >= -1e-9)


# --- hazard monotonicity -----------------------------------------------------


def test_mhr_check_examples():
    assert mhr_check(Exponential(1.0), 256).is_mhr
    assert mhr_check(GFamily(phi=0.5, r=1.0, eps=1e-6), 256).is_mhr
    report = mhr_check(PFamily(eps=0.1, r=1.0), 256)
    assert not report.is_mhr
    assert report.witness is not None
    x1, x2 = report.witness
    p = PFamily(eps=0.1, r=1.0)
    assert x1 < x2
    assert float(p.hazard(x1)) - float(p.hazard(x2)) > 1e-9


def test_mhr_check_grid_too_small():
    with pytest.raises(ValueError):
        mhr_check(Exponential(1.0), 8)


def test_mhr_witness_absent_when_true():
    report = mhr_check(Uniform(hi=3.0), 64)
    assert report.is_mhr and report.witness is None and report.grid_size == 64


# --- cdf cap at the reserve and pointwise domination -------------------------


def test_lemma1_examples():
    assert lemma1_check(Exponential(1.0))
    assert float(Exponential(1.0).cdf(1.0)) == pytest.approx(ALPHA, abs=1e-12)
    assert lemma1_check(Uniform(hi=1.0))
    assert float(Uniform(hi=1.0).cdf(0.5)) == 0.5
    assert lemma1_check(GFamily(phi=ALPHA, r=1.0, eps=1e-6))


@given(mhr_family)
@settings(max_examples=80, deadline=None)
def test_lemma1_universal(dist):
    assert lemma1_check(dist)


def test_domination_examples():
    exp = Exponential(1.0)
    assert domination_check(exp, 256)
    # the exponential is itself the extremal member: equality on [0, r]
    y = np.linspace(0.0, 1.0, 257)
    g = GFamily(phi=float(exp.cdf(1.0)), r=1.0)
    assert np.max(np.abs(np.asarray(exp.cdf(y)) - np.asarray(g.cdf(y)))) <= 1e-9
    assert domination_check(Uniform(hi=1.0), 256)
    assert domination_check(GFamily(phi=0.4, r=3.0, eps=1e-6), 256)


@given(mhr_family)
@settings(max_examples=60, deadline=None)
def test_domination_universal(dist):
    assert domination_check(dist, 128)


# --- sampling and quantile/cdf consistency ------------------------------------


def test_sample_examples():
    assert sample(Exponential(1.0), 0.0) == 0.0
    assert sample(Uniform(hi=1.0), 0.25) == 0.25
    # the atom holds everything past F(r-) = 1 - 0.1/1.1
    assert sample(PFamily(eps=0.1, r=1.0), 0.95) == 1.0


def test_sample_rejects_bad_u():
    with pytest.raises(ValueError):
        sample(Exponential(1.0), 1.0)
    with pytest.raises(ValueError):
        sample(Exponential(1.0), -0.2)


def test_quantile_cdf_roundtrip():
    u = np.linspace(1e-6, 1.0 - 1e-6, 501)
    for dist in CONTINUOUS:
        x = np.asarray(dist.quantile(u))
        assert np.max(np.abs(np.asarray(dist.cdf(x)) - u)) < 1e-10, dist
    # heavy-tail family: identity below the atom
    p = PFamily(eps=0.5, r=2.0)
    u_below = u[u < 2.0 / 2.5]
    x = np.asarray(p.quantile(u_below))
    assert np.max(np.abs(np.asarray(p.cdf(x)) - u_below)) < 1e-10


def test_quantile_monotone_and_atom_mapping():
    p = PFamily(eps=0.1, r=1.0)
    u = np.linspace(0.0, 0.999999, 2001)
    x = np.asarray(p.quantile(u))
    assert np.all(np.diff(x) >= 0.0)
    thresh = 1.0 / 1.1
    assert np.all(x[u >= thresh] == 1.0)


def test_hazard_identity():
    for dist in CONTINUOUS:
        u = np.linspace(0.01, 0.95, 95)
        x = np.asarray(dist.quantile(u))
        surv = 1.0 - np.asarray(dist.cdf(x))
        keep = surv > 1e-12
        lhs = np.asarray(dist.hazard(x))[keep]
        rhs = np.asarray(dist.pdf(x))[keep] / surv[keep]
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12), dist


def test_total_mass():
    for dist in CONTINUOUS + [PFamily(eps=0.1, r=1.0), PFamily(eps=3.0, r=0.5)]:
        hi = dist.support_hi
        if not math.isfinite(hi):
            hi = float(dist.quantile(1.0 - 1e-12))
        breaks = [loc for loc, _ in dist.atoms]
        if isinstance(dist, GFamily):
            breaks += [dist.t_knot, dist.r]
        cont = adaptive_simpson(lambda x: float(dist.pdf(x)), 0.0, hi, tol=1e-10, breakpoints=breaks)
        atom_mass = sum(m for _, m in dist.atoms)
        assert cont + atom_mass == pytest.approx(1.0, abs=1e-8), dist


def test_sampling_reproduces_cdf_ks():
    # Kolmogorov-Smirnov distance below 0.01 at n = 1e6 (invariant)
    rng = np.random.default_rng(2718281828)
    n = 1_000_000
    u = rng.random(n)
    for dist in (Exponential(1.0), Uniform(hi=2.0), GFamily(phi=ALPHA, r=1.0, eps=1e-6)):
        x = np.sort(np.asarray(sample(dist, u)))
        f = np.asarray(dist.cdf(x))
        emp_hi = np.arange(1, n + 1) / n
        emp_lo = np.arange(0, n) / n
        ks = max(np.max(np.abs(emp_hi - f)), np.max(np.abs(f - emp_lo)))
        assert ks < 0.01, dist
    # atom frequency matches its mass
    p = PFamily(eps=0.1, r=1.0)
    x = np.asarray(sample(p, u))
    freq = np.mean(x == 1.0)
    mass = p.atoms[0][1]
    assert abs(freq - mass) < 4.0 * math.sqrt(mass * (1.0 - mass) / n)


# --- family-specific structure -------------------------------------------------


def test_g_family_knots_and_edges():
    g = GFamily(phi=0.5, r=2.0, eps=1e-4)
    assert g.t_knot == pytest.approx(2.0 * (1.0 + math.log(0.5)), abs=1e-12)
    assert 0.0 <= g.t_knot <= g.r
    assert float(g.cdf(g.t_knot)) == 0.0
    assert float(g.cdf(2.0)) == pytest.approx(0.5, abs=1e-12)
    assert float(g.cdf(2.0 + 1e-4)) == 1.0


def test_g_family_phi_zero_degenerates_to_slab():
    g = GFamily(phi=0.0, r=1.0, eps=1e-6)
    assert g.t_knot == 1.0
    assert float(g.cdf(1.0)) == 0.0
    assert float(g.cdf(1.0 + 1e-6)) == 1.0
    assert float(g.quantile(0.5)) == pytest.approx(1.0 + 0.5e-6, abs=1e-12)


def test_g_family_rejects_phi_beyond_cap():
    with pytest.raises(DomainError):
        GFamily(phi=ALPHA + 1e-3, r=1.0)
    # boundary itself is fine
    GFamily(phi=ALPHA, r=1.0)


def test_g_family_default_eps():
    g = GFamily(phi=0.3, r=4.0)
    assert g.eps == pytest.approx(4e-6)


def test_p_family_structure():
    p = PFamily(eps=0.1, r=1.0)
    assert p.atoms == ((1.0, pytest.approx(0.1 / 1.1)),)
    assert float(p.cdf(0.9999999)) < 1.0
    assert float(p.cdf(1.0)) == 1.0  # right-continuous through the atom
    x = np.linspace(0.0, 0.99, 100)
    h = np.asarray(p.hazard(x))
    assert np.all(np.diff(h) < 0.0)  # strictly decreasing hazard


def test_bad_family_params():
    with pytest.raises(ValueError):
        Exponential(rate=0.0)
    with pytest.raises(ValueError):
        Uniform(lo=0.5, hi=1.0)
    with pytest.raises(ValueError):
        GFamily(phi=0.2, r=-1.0)
    with pytest.raises(ValueError):
        PFamily(eps=0.0, r=1.0)


# --- record format -------------------------------------------------------------


def test_from_spec_records():
    assert from_spec({"family": "exponential", "rate": 2.0}) == Exponential(rate=2.0)
    assert from_spec({"family": "uniform", "lo": 0, "hi": 1}) == Uniform(lo=0.0, hi=1.0)
    assert from_spec({"family": "g", "phi": 0.5, "r": 1.0, "eps": 1e-6}) == GFamily(
        phi=0.5, r=1.0, eps=1e-6
    )
    assert from_spec({"family": "p", "eps": 0.1, "r": 1.0}) == PFamily(eps=0.1, r=1.0)


def test_spec_roundtrip():
    for dist in [Exponential(2.0), Uniform(hi=3.0), GFamily(phi=0.2, r=1.5), PFamily(eps=0.2, r=2.0)]:
        assert from_spec(to_spec(dist)) == dist


def test_from_spec_rejects_garbage():
    with pytest.raises(ValueError):
        from_spec({"family": "cauchy"})
    with pytest.raises(ValueError):
        from_spec({"rate": 1.0})
    with pytest.raises(ValueError):
        from_spec({"family": "g", "phi": 0.5})
