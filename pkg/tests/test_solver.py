import math

import numpy as np
import pytest

from conftest import bell_state, isotropic_sigma1, random_density, random_pure
from relent import (
    DimensionError,
    HermitianOp,
    PiSep,
    Ppt,
    Sep,
    SingleState,
    SolverConfig,
    almost_convexity_gap,
    auto_candidate_X,
    certify,
    dual_certificate,
    minimize_primal,
    minimizer_continuity_probe,
    partial_trace,
    petz_dual_value,
    pure_state,
    rains_bound,
    relative_entropy,
    trace_norm,
    two_copy_subadditivity_check,
    von_neumann_entropy,
)

LN2 = math.log(2.0)
CFG = SolverConfig(max_iters=300, tol=1e-6, lmo_restarts=12, seed=3)


def _isotropic_ppt_oracle():
    """Grid minimum of D(Bell || p*Bell + (1-p)(1-Bell)/3) over PPT members.

    By symmetry the closest PPT state to the Bell projector lies in this
    one-parameter family; PPT holds iff p <= 1/2.
    """
    best = np.inf
    phi = bell_state().mat
    rest = (np.eye(4) - phi) / 3.0
    for p in np.linspace(1e-4, 0.5, 4001):
        sig = HermitianOp((2, 2), p * phi + (1 - p) * rest)
        mineig = np.linalg.eigvalsh(np.kron(np.eye(1), sig.mat).reshape(2, 2, 2, 2)
                                    .transpose(0, 3, 2, 1).reshape(4, 4))[0]
        if mineig < -1e-12:
            continue
        best = min(best, float(relative_entropy(bell_state(), sig).value))
    return best


def test_product_state_sep():
    rho = pure_state(np.kron([1, 0], [0, 1]), (2, 2))
    res = minimize_primal(rho, Sep((2, 2), (0,)), CFG)
    assert res.upper <= 1e-6
    assert res.lower <= res.upper + 1e-9
    assert res.converged


def test_bell_sep_equals_ln2():
    res = minimize_primal(bell_state(), Sep((2, 2), (0,)), CFG)
    assert abs(res.upper - LN2) <= 1e-3
    assert res.lower <= LN2 + 1e-9
    assert res.membership <= 1e-9
    # trace is non-increasing after line-search steps
    objs = [row[1] for row in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))


def test_bell_ppt_equals_ln2():
    oracle = _isotropic_ppt_oracle()
    assert abs(oracle - LN2) <= 1e-6  # frozen family scan
    res = minimize_primal(bell_state(), Ppt((2, 2), (0,)), CFG)
    assert abs(res.upper - LN2) <= 1e-3
    assert res.lower <= LN2 + 1e-9


def test_rains_values(rng):
    sep = HermitianOp((2, 2), np.kron(random_density(rng, (2,)).mat,
                                      random_density(rng, (2,)).mat))
    res = rains_bound(sep, (0,), CFG)
    assert res.upper <= 1e-6

    res = rains_bound(bell_state(), (0,), CFG)
    # scan oracle over the sub-normalized isotropic family t*(p Phi + ...)
    phi = bell_state().mat
    rest = (np.eye(4) - phi) / 3.0
    best = np.inf
    for p in np.linspace(0.05, 0.5, 200):
        for t in np.linspace(0.5, 1.0, 100):
            sig = t * (p * phi + (1 - p) * rest)
            pt = sig.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
            if np.abs(np.linalg.eigvalsh(pt)).sum() > 1.0 + 1e-12:
                continue
            val = float(relative_entropy(bell_state(),
                                         HermitianOp((2, 2), sig)).value) + 1 - t
            best = min(best, val)
    assert abs(best - LN2) <= 1e-3  # the scan pins the family minimum at ln 2
    assert abs(res.upper - LN2) <= 1e-2
    assert res.lower <= LN2 + 1e-9


def test_single_state_family(rng):
    rho = random_density(rng, (2, 2))
    sig = random_density(rng, (2, 2))
    res = minimize_primal(rho, SingleState((2, 2), sigma=sig), CFG)
    assert res.upper == pytest.approx(float(relative_entropy(rho, sig).value), abs=1e-12)
    assert res.gap == 0.0 and res.converged


def test_pure_state_marginal_entropy(rng):
    for _ in range(4):
        psi = random_pure(rng, (3, 3))
        rho = pure_state(psi, (3, 3))
        s_a = von_neumann_entropy(partial_trace(rho, (0,)))
        res = minimize_primal(rho, Sep((3, 3), (0,)), CFG)
        assert abs(res.upper - s_a) <= 1e-3
        assert res.lower <= s_a + 1e-9


def test_two_qubit_chain(rng):
    for _ in range(6):
        rho = random_density(rng, (2, 2))
        rs = minimize_primal(rho, Sep((2, 2), (0,)), CFG)
        rp = minimize_primal(rho, Ppt((2, 2), (0,)), CFG)
        rr = rains_bound(rho, (0,), CFG)
        s_a = von_neumann_entropy(partial_trace(rho, (0,)))
        assert rr.lower <= rp.upper + 3 * CFG.tol
        assert rp.lower <= rs.upper + 3 * CFG.tol
        assert rs.upper <= s_a + 3 * CFG.tol
        for r in (rs, rp, rr):
            assert r.lower <= r.upper + 1e-9
            assert r.membership <= 1e-8


def test_non_uniqueness_witness():
    # two distinct closest free states achieving the same divergence
    phi = bell_state()
    sig1 = isotropic_sigma1()
    m = phi.mat / 2.0
    m[1, 1] += 0.25
    m[2, 2] += 0.25
    sig2 = HermitianOp((2, 2), m)
    d1 = float(relative_entropy(phi, sig1).value)
    d2 = float(relative_entropy(phi, sig2).value)
    assert abs(d1 - LN2) <= 1e-12 and abs(d2 - LN2) <= 1e-12
    assert trace_norm(HermitianOp((2, 2), sig1.mat - sig2.mat)) > 0.1


def test_uniqueness_probe_seed_stability(rng):
    # faithful target, convex family: independent seeds land on the same
    # minimizer
    base = HermitianOp((2, 2), 0.55 * np.kron(random_density(rng, (2,)).mat,
                                              random_density(rng, (2,)).mat)
                       + 0.45 * np.eye(4) / 4)
    cfg1 = SolverConfig(max_iters=400, tol=1e-9, lmo_restarts=16, seed=11)
    cfg2 = SolverConfig(max_iters=400, tol=1e-9, lmo_restarts=16, seed=77)
    r1 = minimize_primal(base, Sep((2, 2), (0,)), cfg1)
    r2 = minimize_primal(base, Sep((2, 2), (0,)), cfg2)
    dist = trace_norm(HermitianOp((2, 2), r1.minimizer.mat - r2.minimizer.mat))
    assert dist <= 1e-4


def test_dual_certificate_single_state(rng):
    rho = random_density(rng, (2, 2))
    sig = random_density(rng, (2, 2))
    x = auto_candidate_X(rho, sig, 1e-3)
    cert = dual_certificate(rho, SingleState((2, 2), sigma=sig), x, CFG)
    assert cert.bound == pytest.approx(petz_dual_value(rho, sig, x), abs=1e-14)
    assert cert.inner_sup_residual == 0.0


def test_dual_certificate_zero_candidate():
    z = HermitianOp((2, 2), np.zeros((4, 4)))
    cert = dual_certificate(bell_state(), Sep((2, 2), (0,)), z, CFG)
    assert abs(cert.bound) <= 1e-9
    assert cert.inner_sup_residual <= 1e-6


def test_certify_bell_sep():
    cfg = SolverConfig(max_iters=300, tol=1e-4, lmo_restarts=12, seed=3)
    cert, primal = certify(bell_state(), Sep((2, 2), (0,)), cfg)
    assert cert.bound >= LN2 - 5e-2
    assert primal is not None and abs(primal.upper - LN2) <= 1e-3


def test_auto_candidate(rng):
    rho = HermitianOp((2, 2), 0.7 * random_density(rng, (2, 2)).mat + 0.3 * np.eye(4) / 4)
    x = auto_candidate_X(rho, rho, 1e-6)
    assert np.abs(x.mat).max() <= 1e-3

    p = np.array([0.4, 0.3, 0.2, 0.1])
    q = np.array([0.1, 0.2, 0.3, 0.4])
    eps = 1e-3
    rho_d = HermitianOp((4,), np.diag(p).astype(complex))
    xi_d = HermitianOp((4,), np.diag(q * 0.9).astype(complex))
    x = auto_candidate_X(rho_d, xi_d, eps)
    expect = np.log(p + eps**2) - np.log(0.9 * q + eps) + (0.9 - 1.0)
    assert np.abs(np.diag(x.mat).real - expect).max() <= 1e-12
    with pytest.raises(ValueError):
        auto_candidate_X(rho_d, xi_d, 1.5)


def test_two_copy_checks(rng):
    cfg = SolverConfig(max_iters=200, tol=1e-5, lmo_restarts=10, seed=5)
    prod = HermitianOp((2, 2), np.kron(random_density(rng, (2,)).mat,
                                       random_density(rng, (2,)).mat))
    val = two_copy_subadditivity_check(prod, Sep((2, 2, 2, 2), (0, 2)), cfg)
    assert abs(val) <= 2e-5

    val = two_copy_subadditivity_check(bell_state(), Ppt((2, 2, 2, 2), (0, 2)), cfg)
    assert val <= 2 * cfg.tol

    th = 0.9
    psi = np.array([th, 0, 0, math.sqrt(1 - th**2)], dtype=complex)
    val = two_copy_subadditivity_check(pure_state(psi, (2, 2)),
                                       Sep((2, 2, 2, 2), (0, 2)), cfg)
    assert val <= 2e-4

    with pytest.raises(DimensionError):
        two_copy_subadditivity_check(random_density(rng, (3, 3)),
                                     Sep((3, 3, 3, 3), (0, 2)), cfg)


def test_minimizer_continuity_probe(rng):
    rho = HermitianOp((2, 2), 0.6 * random_density(rng, (2, 2)).mat + 0.4 * np.eye(4) / 4)
    cfg = SolverConfig(max_iters=300, tol=1e-8, seed=4)
    rep = minimize_primal(rho, Ppt((2, 2), (0,)), cfg)
    assert rep.converged

    out = minimizer_continuity_probe(rho, Ppt((2, 2), (0,)), 0.0, trials=2, cfg=cfg)
    assert out["max_displacement"] <= 1e-12

    out = minimizer_continuity_probe(rho, SingleState((2, 2), sigma=rep.minimizer),
                                     1e-3, trials=2, cfg=cfg)
    assert out["max_displacement"] <= 1e-12

    flat = pure_state(np.kron([1, 0], [1, 0]), (2, 2))
    with pytest.raises(Exception):
        minimizer_continuity_probe(flat, Ppt((2, 2), (0,)), 1e-3, trials=1, cfg=cfg)


def test_almost_convexity_solver_family(rng):
    cfg = SolverConfig(max_iters=150, tol=1e-5, lmo_restarts=8, seed=2)
    rho = random_density(rng, (2, 2))
    sig = random_density(rng, (2, 2))
    gap = almost_convexity_gap(rho, sig, Sep((2, 2), (0,)), 0.5, cfg)
    assert gap >= -1e-6


def test_multipartite_chain(rng):
    cfg = SolverConfig(max_iters=150, tol=1e-5, lmo_restarts=10, seed=6)
    full = PiSep((2, 2, 2), (((0,), (1,), (2,)),))
    bisep = PiSep((2, 2, 2), (((0,), (1, 2)), ((1,), (0, 2)), ((2,), (0, 1))))
    for _ in range(2):
        rho = random_density(rng, (2, 2, 2))
        r_full = minimize_primal(rho, full, cfg)
        r_bi = minimize_primal(rho, bisep, cfg)
        s_sum = (von_neumann_entropy(partial_trace(rho, (0,)))
                 + von_neumann_entropy(partial_trace(rho, (1,))))
        assert r_bi.lower <= r_full.upper + cfg.tol
        assert r_full.upper <= s_sum + cfg.tol
        # averaged form over all parties
        s_all = sum(von_neumann_entropy(partial_trace(rho, (k,))) for k in range(3))
        assert r_full.upper <= (2.0 / 3.0) * s_all + cfg.tol


def test_harmonic_step_rule():
    cfg = SolverConfig(max_iters=120, tol=1e-6, lmo_restarts=8, seed=3,
                       step_rule="harmonic")
    res = minimize_primal(bell_state(), Sep((2, 2), (0,)), cfg)
    assert abs(res.upper - LN2) <= 5e-3


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(epsilon_reg=1.0)
    with pytest.raises(ValueError):
        SolverConfig(step_rule="newton")


def test_dims_mismatch(rng):
    with pytest.raises(DimensionError):
        minimize_primal(random_density(rng, (2, 2)), Sep((2, 3), (0,)), CFG)
