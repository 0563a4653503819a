import math

import numpy as np
import pytest

from relent import (
    BoundRequest,
    ExplicitSpectrum,
    OscillatorSpec,
    bipartite_bound,
    bipartite_bound_oscillator,
    entropy_ceiling,
    g_func,
    g_min,
    g_oscillator,
    gibbs_solve,
    multipartite_bound_sqrt,
    multipartite_bound_t,
)
from relent.bounds import _bipartite_expr

LN2 = math.log(2.0)
OSC = OscillatorSpec(1, (1.0,))


def _g_vec(spec, e):
    e = np.asarray(e, dtype=float)
    l = spec.modes
    return l * (np.log((e + 2 * spec.ground_energy) / (l * spec.mean_frequency)) + 1.0)


def _gfun_vec(x):
    x = np.asarray(x, dtype=float)
    return (x + 1) * np.log(x + 1) - np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def test_gibbs_oscillator_reference():
    lam, s = gibbs_solve(OSC, 1.0)
    # closed form at mean photon number 1
    assert abs(s - 2 * LN2) <= 1e-9
    assert abs(lam - LN2) <= 1e-9
    # independent oracle: a long truncated spectrum treated exactly
    trunc = ExplicitSpectrum(tuple(range(200)))
    _, s2 = gibbs_solve(trunc, 1.0)
    assert abs(s - s2) <= 1e-9


def test_gibbs_small_energy_and_two_level():
    _, s = gibbs_solve(OSC, 1e-6)
    assert s <= 2e-5
    lam, s = gibbs_solve(ExplicitSpectrum((0.0, 1.0)), 0.5)
    assert abs(s - LN2) <= 1e-12 and lam == 0.0
    _, s = gibbs_solve(ExplicitSpectrum((0.0, 1.0)), 0.25)
    p = 0.25  # mean energy p equals the excited population
    assert abs(s - (-p * math.log(p) - (1 - p) * math.log(1 - p))) <= 1e-9


def test_gibbs_errors():
    with pytest.raises(ValueError):
        gibbs_solve(OSC, 0.0)
    with pytest.raises(ValueError):
        gibbs_solve(ExplicitSpectrum((0.0, 1.0)), 0.8)
    with pytest.raises(ExceptionGroup if False else Exception):
        gibbs_solve(ExplicitSpectrum((0.5, 1.0)), 0.6)


def test_entropy_ceiling_monotone_concave():
    es = np.linspace(0.2, 8.0, 25)
    vals = np.array([entropy_ceiling(OSC, e) for e in es])
    assert np.all(np.diff(vals) > 0)
    assert np.all(np.diff(np.diff(vals)) < 1e-9)


def test_g_min_properties():
    for e in (0.5, 1.0, 3.0):
        v = g_min(OSC, e, 1e4)
        assert v >= entropy_ceiling(OSC, e) - 1e-12
        v_hi = g_min(OSC, e, 1e4, n_grid=400)
        assert abs(v - v_hi) <= 1e-3 * max(v, 1.0)
    es = np.geomspace(0.5, 50.0, 12)
    ratio = [g_min(OSC, e, 1e4) / math.sqrt(e) for e in es]
    assert all(b <= a + 1e-9 for a, b in zip(ratio, ratio[1:]))
    with pytest.raises(ValueError):
        g_min(OSC, 2.0, 1.0)


def test_g_oscillator_values():
    assert abs(g_oscillator(OSC, 0.0) - 1.0) <= 1e-12
    assert abs(g_oscillator(OSC, 1.0) - (LN2 + 1.0)) <= 1e-12
    for e in np.geomspace(0.01, 100.0, 30):
        assert g_oscillator(OSC, e) >= entropy_ceiling(OSC, e) - 1e-9


def test_bipartite_bound_dense_scan():
    req = BoundRequest(eps=0.02, energy=4.0, d0=4)
    value, t_star = bipartite_bound(req, lambda e: g_oscillator(OSC, e))
    cap = (1.0 / req.eps)  # G^-1(ln 4) < E here, so the cap is below 1/eps
    ts = np.geomspace(1e-7 / req.eps, t_star * 50, 200_000)
    ts = ts[ts <= 1.0 / req.eps]
    vals = (req.eps * (1 + 4 * ts) * (_g_vec(OSC, req.energy / (req.eps * ts) ** 2)
                                      + 1.0 / req.d0 + LN2)
            + 2 * _gfun_vec(req.eps * ts) + _gfun_vec(req.eps * (1 + 2 * ts)))
    assert value <= vals.min() + 1e-12
    assert abs(value - vals.min()) <= 1e-7


def test_bipartite_bound_invalid_d0():
    with pytest.raises(ValueError):
        bipartite_bound(BoundRequest(eps=0.01, energy=10.0, d0=2),
                        lambda e: g_oscillator(OSC, e))


def test_bipartite_oscillator_matches_generic_expression():
    # with the 1/d0 constant replaced by exp(-l), the two forms share the
    # same bracketed expression; check on a grid plus at the minimizer
    req = BoundRequest(eps=0.05, energy=6.0, d0=3)
    extra = math.exp(-1.0)
    for t in (0.1, 1.0, 5.0):
        direct = _bipartite_expr(t, req.eps, req.energy,
                                 lambda e: g_oscillator(OSC, e), extra)
        manual = (req.eps * (1 + 4 * t)
                  * (g_oscillator(OSC, req.energy / (req.eps * t) ** 2) + extra + LN2)
                  + 2 * g_func(req.eps * t) + g_func(req.eps * (1 + 2 * t)))
        assert abs(direct - manual) <= 1e-12
    value, t_star = bipartite_bound_oscillator(req, OSC)
    assert value <= _bipartite_expr(max(t_star, 1e-9), req.eps, req.energy,
                                    lambda e: g_oscillator(OSC, e), extra) + 1e-12


def test_bipartite_eps_ladder_and_energy_monotonicity():
    prev = None
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        val, _ = bipartite_bound_oscillator(
            BoundRequest(eps=eps, energy=10.0, d0=2), OSC)
        if prev is not None:
            assert val < prev
        prev = val
    vals = [bipartite_bound_oscillator(BoundRequest(eps=0.01, energy=e, d0=2), OSC)[0]
            for e in (1.0, 5.0, 25.0, 125.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_multipartite_sqrt():
    req = BoundRequest(eps=0.3, energy=2.0, m=2, s=1, variant="multipartite")
    v = multipartite_bound_sqrt(req, lambda e: entropy_ceiling(OSC, e))
    direct = (math.sqrt(2 * req.eps) * entropy_ceiling(OSC, req.energy / req.eps)
              + g_func(math.sqrt(2 * req.eps)))
    assert abs(v - direct) <= 1e-12

    # compositional oracle at m=3, s=2: re-derive from the Gibbs solver
    req = BoundRequest(eps=0.5, energy=1.0, m=3, s=2, variant="multipartite")
    v = multipartite_bound_sqrt(req, lambda e: entropy_ceiling(OSC, e))
    f_joint = 2.0 * gibbs_solve(OSC, (2.0 * 1.0 / 0.5) / 2.0)[1]
    expect = (2.0 / 2.0) * math.sqrt(2 * 0.5) * f_joint + g_func(math.sqrt(2 * 0.5))
    assert abs(v - expect) <= 1e-9

    with pytest.raises(ValueError):
        multipartite_bound_sqrt(
            BoundRequest(eps=0.1, energy=1.0, m=4, s=1, variant="bipartite"),
            lambda e: entropy_ceiling(OSC, e))


def test_multipartite_t_dense_scan():
    req = BoundRequest(eps=0.02, energy=5.0, m=2, s=2, variant="multipartite")
    value, t_star = multipartite_bound_t(req, lambda e: g_oscillator(OSC, e))
    ts = np.geomspace(1e-9 / req.eps, (1 - 1e-12) / req.eps, 200_000)
    et = req.eps * ts
    vals = ((req.m - 1) * ((req.eps + et**2) * _g_vec(OSC, req.s * req.energy / et**2)
                           + 2 * np.sqrt(2 * et) * _g_vec(OSC, req.energy / et))
            + _gfun_vec(req.eps + et**2) + 2 * _gfun_vec(np.sqrt(2 * et)))
    assert value <= vals.min() + 1e-12
    assert abs(value - vals.min()) <= 1e-7
    assert value > 0.0

    small = [multipartite_bound_t(
        BoundRequest(eps=e, energy=5.0, m=2, s=2, variant="multipartite"),
        lambda x: g_oscillator(OSC, x))[0] for e in (1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(small, small[1:]))


def test_request_validation():
    with pytest.raises(ValueError):
        BoundRequest(eps=0.0, energy=1.0)
    with pytest.raises(ValueError):
        BoundRequest(eps=0.5, energy=-1.0)
    with pytest.raises(ValueError):
        BoundRequest(eps=0.5, energy=1.0, m=4, s=1, variant="multipartite")
    with pytest.raises(Exception):
        OscillatorSpec(1, (0.0,))
    with pytest.raises(Exception):
        ExplicitSpectrum((1.0, 2.0))
