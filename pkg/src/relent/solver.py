"""Relative-entropy distance to a free family, with certified brackets.

``minimize_primal`` computes D_F(rho) = inf over the family of D(rho||sigma).
Families with a linear minimization oracle (separable, partition-separable)
are solved by conditional gradient with exact golden-section line search and
pairwise (weight-transfer) steps over the accumulated product-state atoms,
so the minimizer is returned as an explicit convex combination of family
members.  Projection-style families (PPT, trace-norm ball) are solved by
projected gradient descent with the same line search.

The gradient of sigma -> D(rho||sigma) is the Frechet derivative of the
operator logarithm transported through rho: grad = 1 - L_sigma(rho), where
L is ``operators.loewner_log_frechet``.  Every iterate yields a rigorous
lower bound: the linearization of the convex objective is bounded over the
family through top eigenvalues of the transported gradient and of its
partial transposes across cuts along which all members stay PPT.  The best
such bound is reported as ``lower``; it never relies on the heuristic oracle.

``dual_certificate`` evaluates the variational lower bound
Tr[rho X] - sup over the family of ln Tr exp(ln sigma + X) for a candidate
Hermitian X; ``auto_candidate_X`` builds the regularized ansatz
ln(rho + e^2) - ln(xi + e) + (Tr xi - 1) that recovers the optimum as e -> 0.
"""

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from . import _core
from .entropy import relative_entropy
from .errors import DimensionError, InfeasibleStartError, NotPSDError
from .freesets import (
    PiSep,
    Ppt,
    RainsSet,
    Sep,
    SingleState,
    _alternating_lmo,
    _herm,
    _ppt_project_impl,
    _pt,
    _rains_project_impl,
    maximally_mixed_member,
    membership_residual,
    transpose_cuts,
)
from .operators import (
    SUPPORT_CUTOFF,
    HermitianOp,
    _loewner_apply,
    _loewner_kernel,
    tensor,
)

INTERIOR_MIX = 1e-3  # weight of the full-support member in the initial iterate


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the primal solvers and the dual certifier."""

    max_iters: int = 500
    tol: float = 1e-6          # duality-gap target, nats
    lmo_restarts: int = 24
    seed: int = 7
    epsilon_reg: float = 1e-4  # regularization for the dual-candidate ansatz
    step_rule: str = "linesearch"  # or "harmonic" (fixed decaying steps)

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.epsilon_reg < 1.0:
            raise ValueError("epsilon_reg must lie in (0, 1)")
        if self.step_rule not in ("linesearch", "harmonic"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass(frozen=True)
class SolveResult:
    """Converged value with certified brackets and the iteration trace."""

    upper: float
    lower: float
    minimizer: HermitianOp
    gap: float
    iterations: int
    trace: tuple
    converged: bool
    membership: float  # membership-necessary-condition residual of the minimizer


@dataclass(frozen=True)
class DualCertificate:
    """Candidate X with the evaluated inner supremum and resulting bound.

    ``bound`` = Tr[rho X] - inner_sup_value is a valid lower bound on the
    resource measure up to ``inner_sup_residual`` (the certified optimality
    gap of the inner maximization).
    """

    x: HermitianOp
    inner_sup_value: float
    bound: float
    inner_sup_residual: float


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

class _FixedState:
    """Spectral data of the solver target, precomputed once."""

    def __init__(self, rho: HermitianOp):
        w, v = _core.eigh(rho.mat)
        top = max(float(w[-1]), 0.0)
        if float(w[0]) < -SUPPORT_CUTOFF * max(top, 1.0):
            raise NotPSDError(f"target has negative eigenvalue {float(w[0]):.3e}")
        if abs(float(w.sum()) - 1.0) > 1e-8:
            raise NotPSDError(f"target trace {float(w.sum()):.12f} differs from 1")
        p = np.where(w > SUPPORT_CUTOFF * top, w, 0.0)
        self.op = rho
        self.p = np.ascontiguousarray(p)
        self.vecs = np.ascontiguousarray(v)
        pos = p > 0
        self.plogp = float((p[pos] * np.log(p[pos])).sum())
        self.trp = float(p.sum())

    def objective(self, sigma_mat, trace_coeff=1.0):
        return _core.relent_fixed(self.p, self.vecs, self.plogp, self.trp,
                                  np.ascontiguousarray(sigma_mat),
                                  trace_coeff=trace_coeff)

    def line_search(self, base, direction, gmax, trace_coeff=1.0, xtol=1e-8):
        return _core.line_search_dir(self.p, self.vecs, self.plogp, self.trp,
                                     np.ascontiguousarray(base),
                                     np.ascontiguousarray(direction),
                                     gmax, xtol=xtol, trace_coeff=trace_coeff)


def _log_gradient(sigma_mat, rho_mat):
    """Transported gradient L_sigma(rho), restricted to the support of sigma.

    On the face of iterates containing the target's support, the objective's
    one-sided directional derivatives are generated by the support-restricted
    derivative of the log (the kernel block contributes nothing when the
    target has no kernel overlap), so this is a valid subgradient for the
    linearization bounds even at rank-deficient iterates.
    """
    w, v = _core.eigh(sigma_mat)
    return _herm(_loewner_apply(w, v, rho_mat, cutoff=SUPPORT_CUTOFF))


def _certified_linearization(spec, state, w, v, trace_coeff, cert_cutoff):
    """Lower bound on the family optimum from a cleaned linearization point.

    Convexity gives f(omega) >= f(s) + <grad f(s), omega - s> at ANY PSD
    point s, so the certificate is evaluated at the spectral truncation of
    the iterate (eigenvalues below ``cert_cutoff`` relative dropped).  This
    removes the near-kernel noise that would otherwise pollute the
    transported gradient through its 1/eigenvalue diagonal.  Returns
    ``(lower, gradient)``; the gradient doubles as the search direction.
    """
    top = max(float(w[-1]), 0.0)
    keep = w > cert_cutoff * top
    if not keep.any():
        return -np.inf, None
    wc = np.where(keep, w, 0.0)
    vk = v[:, keep]
    rho_block = vk.conj().T @ state.op.mat @ vk
    kern = _loewner_kernel(w[keep])
    g = _herm(vk @ (kern * rho_block) @ vk.conj().T)
    s_clean = (v * wc) @ v.conj().T
    f_clean = state.objective(s_clean, trace_coeff)
    if not math.isfinite(f_clean):
        return -np.inf, g
    tr_gs = float(np.trace(rho_block).real)  # Tr[G s] collapses to the kept mass
    bound = _linear_max_bound(spec, g, spec.dims)
    lower = f_clean + trace_coeff * (1.0 - float(wc.sum())) + tr_gs - bound
    return lower, g


def _linear_max_bound(spec, g, dims):
    """Certified upper bound on max Tr[G omega] over the family."""
    if isinstance(spec, RainsSet):
        vals = [max(float(np.linalg.eigvalsh(g)[-1]), 0.0),
                float(np.abs(np.linalg.eigvalsh(_pt(g, dims, spec.split))).max())]
        return min(vals)
    vals = [float(np.linalg.eigvalsh(g)[-1])]
    for cut in transpose_cuts(spec):
        vals.append(float(np.linalg.eigvalsh(_pt(g, dims, cut))[-1]))
    return min(vals)


def _lmo(spec, g, restarts, seed, warm_cache=None, max_sweeps=30):
    """Family oracle maximizing Tr[G omega]; returns (state, value).

    ``warm_cache`` maps block structures to the vectors of the previous call,
    which seed the first restart; the gradient moves slowly between solver
    iterations, so this cuts the alternation to a few sweeps.
    """
    def run(blocks):
        warm = warm_cache.get(blocks) if warm_cache is not None else None
        ps, val = _alternating_lmo(-g, spec.dims, blocks, restarts, seed,
                                   warm=warm, max_sweeps=max_sweeps)
        if warm_cache is not None:
            warm_cache[blocks] = ps.vectors
        return ps, -val

    if isinstance(spec, Sep):
        rest = tuple(i for i in range(len(spec.dims)) if i not in spec.split)
        return run((spec.split, rest))
    if isinstance(spec, PiSep):
        best, best_val = None, -np.inf
        for part in spec.partitions:
            ps, val = run(part)
            if val > best_val:
                best, best_val = ps, val
        return best, best_val
    raise TypeError(f"{type(spec).__name__} has no linear minimization oracle")


def _tr_prod(a, b):
    return float(np.einsum("ij,ji->", a, b).real)


# ---------------------------------------------------------------------------
# Conditional gradient over oracle families
# ---------------------------------------------------------------------------

class _Atom:
    __slots__ = ("mat", "weight", "vectors", "blocks")

    def __init__(self, mat, weight, vectors=None, blocks=None):
        self.mat = mat
        self.weight = weight
        self.vectors = vectors
        self.blocks = blocks


def _product_atom(ps, weight):
    return _Atom(ps.op.mat, weight, ps.vectors, ps.blocks)


def _rebuild(atoms):
    total = sum(a.weight for a in atoms)
    for a in atoms:
        a.weight /= total
    out = np.zeros_like(atoms[0].mat)
    for a in atoms:
        out += a.weight * a.mat
    return out


def _polish_weights(state, atoms, sigma, f, rounds=30, trace_coeff=1.0):
    """Exponentiated-gradient reoptimization of the atom weights.

    The restricted problem (objective over the simplex of atom weights) is
    convex with cheap gradients: one transported-gradient evaluation gives
    the directional derivative of every atom at once.  Improves the iterate
    in place; returns the updated (sigma, f).
    """
    w = np.array([a.weight for a in atoms])
    stack = np.stack([a.mat for a in atoms])
    eta = 0.5
    for _ in range(rounds):
        g = _log_gradient(sigma, state.op.mat)
        slopes = trace_coeff - np.einsum("kij,ji->k", stack, g).real
        slopes -= slopes.min()
        improved = False
        for _ in range(12):
            wn = w * np.exp(-eta * slopes)
            total = wn.sum()
            if not np.isfinite(total) or total <= 0:
                eta *= 0.25
                continue
            wn /= total
            sn = np.einsum("k,kij->ij", wn, stack)
            fn = state.objective(sn, trace_coeff)
            if fn < f - 1e-15:
                w, sigma, f = wn, sn, fn
                eta = min(eta * 1.3, 50.0)
                improved = True
                break
            eta *= 0.4
        if not improved:
            break
    for a, wi in zip(atoms, w):
        a.weight = float(wi)
    return sigma, f


def _refine_atoms(state, spec, atoms, sigma, f, g, seed):
    """Move weight from each product atom to its locally improved version.

    Re-runs the block alternation on the current gradient seeded at the
    atom's own vectors (one restart, few sweeps), then transfers weight by
    exact line search.  This breaks the zigzag of pure conditional-gradient
    steps on the curved atom family, where new oracle atoms stop helping
    long before the iterate reaches the optimal face.
    """
    heavy = sorted((a for a in atoms if a.vectors is not None and a.weight > 1e-8),
                   key=lambda a: -a.weight)[:6]
    for atom in heavy:
        ps, _ = _alternating_lmo(-g, spec.dims, atom.blocks, 1, seed,
                                 warm=atom.vectors, max_sweeps=6)
        direction = ps.op.mat - atom.mat
        if float(np.abs(direction).max()) < 1e-15:
            continue
        gamma, f_new = state.line_search(sigma, direction, atom.weight)
        if f_new < f - 1e-15:
            sigma = sigma + gamma * direction
            atom.weight -= gamma
            atoms.append(_product_atom(ps, gamma))
            f = f_new
    return sigma, f


def _solve_conditional_gradient(state: _FixedState, spec, cfg: SolverConfig):
    dims = spec.dims
    mix = maximally_mixed_member(spec).mat
    seed0 = cfg.seed * 1_000_003
    warm_cache = {}
    ps0, _ = _lmo(spec, state.op.mat, cfg.lmo_restarts, seed0, warm_cache)

    atoms = [_Atom(mix, INTERIOR_MIX), _product_atom(ps0, 1.0 - INTERIOR_MIX)]
    sigma = _rebuild(atoms)
    f = state.objective(sigma)
    if not math.isfinite(f):
        sigma = mix.copy()
        atoms = [_Atom(mix, 1.0)]
        f = state.objective(sigma)
        if not math.isfinite(f):
            raise InfeasibleStartError("no initialization with finite objective")

    best_lower = 0.0
    trace_rows = []
    converged = False
    iterations = 0
    cert_cutoff = max(SUPPORT_CUTOFF, cfg.tol * 1e-3)
    stall = 0
    history = deque(maxlen=21)

    for k in range(cfg.max_iters):
        iterations = k + 1
        f_before = f
        w, v = _core.eigh(sigma)
        lower_k, g = _certified_linearization(spec, state, w, v, 1.0, cert_cutoff)
        if g is None:
            g = _log_gradient(sigma, state.op.mat)
        best_lower = max(best_lower, min(lower_k, f))

        if f - best_lower <= cfg.tol:
            trace_rows.append((k, f, 0.0, best_lower))
            converged = True
            break

        omega, lmo_val = _lmo(spec, g, cfg.lmo_restarts, seed0 + k + 1, warm_cache)
        fw_gap = lmo_val - _tr_prod(g, sigma)
        trace_rows.append((k, f, fw_gap, best_lower))

        if cfg.step_rule == "harmonic":
            gamma = 2.0 / (k + 3.0)  # capped below 1 so the interior mix survives
            sigma = sigma + gamma * (omega.op.mat - sigma)
            for a in atoms:
                a.weight *= 1.0 - gamma
            atoms.append(_product_atom(omega, gamma))
            f = state.objective(sigma)
        else:
            # pairwise step: move weight from the atom the gradient most
            # wants removed onto the oracle atom; fall back to a plain step
            # when the transfer stalls.
            j = min(range(len(atoms)), key=lambda i: _tr_prod(g, atoms[i].mat))
            moved = False
            if atoms[j].weight > 1e-12:
                direction = omega.op.mat - atoms[j].mat
                gamma, f_new = state.line_search(sigma, direction, atoms[j].weight)
                if f_new < f - 1e-15:
                    sigma = sigma + gamma * direction
                    atoms[j].weight -= gamma
                    atoms.append(_product_atom(omega, gamma))
                    f = f_new
                    moved = True
            if not moved:
                direction = omega.op.mat - sigma
                gamma, f_new = state.line_search(sigma, direction, 1.0)
                if f_new < f - 1e-15:
                    sigma = sigma + gamma * direction
                    for a in atoms:
                        a.weight *= 1.0 - gamma
                    atoms.append(_product_atom(omega, gamma))
                    f = f_new

        if cfg.step_rule == "linesearch" and k % 10 == 9:
            sigma, f = _refine_atoms(state, spec, atoms, sigma, f, g, seed0 - k)
            sigma, f = _polish_weights(state, atoms, sigma, f)
        atoms = [a for a in atoms if a.weight > 1e-14]
        if len(atoms) > 160 or k % 25 == 24:
            atoms.sort(key=lambda a: -a.weight)
            atoms = atoms[:160]
            sigma = _rebuild(atoms)
            f = state.objective(sigma)

        stall = stall + 1 if f_before - f < 1e-14 else 0
        gap_now = f - best_lower
        history.append(gap_now)
        # diminishing returns: at the current rate the remaining certified
        # gap would take hundreds more iterations, and it may be dominated
        # by the gap between this family and its PPT superset anyway
        window_dead = (len(history) == history.maxlen
                       and history[0] - gap_now < 0.05 * max(gap_now, 0.0))
        if stall >= 12 or window_dead:
            break

    sigma = _rebuild(atoms)
    f_exact = state.objective(sigma)
    if cfg.step_rule == "linesearch":
        sigma, f_exact = _polish_weights(state, atoms, sigma, f_exact)
    f = min(f, f_exact) if math.isfinite(f_exact) else f

    if not converged and f - best_lower > cfg.tol:
        # the linearization certificate is tight only at the boundary of the
        # transposition cone; harvest it from a short projection solve of
        # the PPT relaxation (a valid lower bound for any subfamily)
        cuts = transpose_cuts(spec)
        if cuts:
            aux = _solve_projected(state, Ppt(dims, cuts[0]),
                                   replace(cfg, max_iters=80), sigma0=sigma)
            best_lower = max(best_lower, aux.lower)
            converged = f - best_lower <= cfg.tol

    best_lower = min(max(best_lower, 0.0), f)
    minimizer = HermitianOp(dims, _herm(sigma))
    return SolveResult(
        upper=f, lower=best_lower, minimizer=minimizer, gap=f - best_lower,
        iterations=iterations, trace=tuple(trace_rows), converged=converged,
        membership=membership_residual(spec, minimizer),
    )


# ---------------------------------------------------------------------------
# Projected descent over projection families
# ---------------------------------------------------------------------------

def _solve_projected(state: _FixedState, spec, cfg: SolverConfig, rains=False,
                     sigma0=None):
    dims = spec.dims
    trace_coeff = 0.0 if rains else 1.0

    if rains:
        def project(m):
            h = _herm(m)
            tol = 1e-7 * max(1.0, float(np.linalg.norm(h)))
            return _rains_project_impl(h, dims, spec.split, 3000, tol, strict=False)
    else:
        def project(m):
            h = _herm(m)
            tol = 1e-7 * max(1.0, float(np.linalg.norm(h)))
            return _ppt_project_impl(h, dims, spec.split, 3000, tol, strict=False)

    mix = maximally_mixed_member(Ppt(dims, spec.split)).mat
    if sigma0 is not None:
        sigma = sigma0.copy()
    else:
        start = project(state.op.mat)
        sigma = (1.0 - INTERIOR_MIX) * start + INTERIOR_MIX * mix
    f = state.objective(sigma, trace_coeff)
    if not math.isfinite(f):
        sigma = mix.copy()
        f = state.objective(sigma, trace_coeff)
        if not math.isfinite(f):
            raise InfeasibleStartError("no initialization with finite objective")

    eta = 1.0
    best_lower = 0.0
    stall = 0
    trace_rows = []
    converged = False
    iterations = 0
    cert_cutoff = max(SUPPORT_CUTOFF, cfg.tol * 1e-3)
    eye = np.eye(sigma.shape[0])
    sigma_prev = None
    t_mom = 1.0
    history = deque(maxlen=21)

    def full_grad(mat):
        g = _log_gradient(mat, state.op.mat)
        return (eye - g) if not rains else -g

    for k in range(cfg.max_iters):
        iterations = k + 1
        w, v = _core.eigh(sigma)
        lower_k, g = _certified_linearization(spec, state, w, v, trace_coeff, cert_cutoff)
        best_lower = max(best_lower, min(lower_k, f))
        if f - best_lower <= cfg.tol:
            trace_rows.append((k, f, 0.0, best_lower))
            converged = True
            break

        # extrapolated probe point (projected back into the family); the
        # momentum step is what keeps the projected descent from crawling
        # at larger dimensions, and the monotone line search from sigma
        # keeps the iterate trace non-increasing
        y = sigma
        if sigma_prev is not None:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
            beta = (t_mom - 1.0) / t_new
            t_mom = t_new
            y_try = project(sigma + beta * (sigma - sigma_prev))
            if math.isfinite(state.objective(y_try, trace_coeff)):
                y = y_try
        candidate = project(y - eta * full_grad(y))
        direction = candidate - sigma
        gamma, f_new = state.line_search(sigma, direction, 1.0, trace_coeff)
        step = gamma * float(np.linalg.norm(direction))
        trace_rows.append((k, f, step, best_lower))
        if f_new < f - 1e-15:
            sigma_prev = sigma
            sigma = sigma + gamma * direction
            f = f_new
            stall = 0
            if gamma > 0.9:
                eta = min(eta * 1.6, 1e3)
            elif gamma < 0.05:
                eta = max(eta * 0.5, 1e-8)
        else:
            eta = max(eta * 0.3, 1e-8)
            t_mom = 1.0
            sigma_prev = None
            stall += 1
            if stall >= 8:
                break
        gap_now = f - best_lower
        history.append(gap_now)
        if (len(history) == history.maxlen
                and history[0] - gap_now < 0.05 * max(gap_now, 0.0)):
            break

    best_lower = min(max(best_lower, 0.0), f)
    minimizer = HermitianOp(dims, _herm(sigma))
    return SolveResult(
        upper=f, lower=best_lower, minimizer=minimizer, gap=f - best_lower,
        iterations=iterations, trace=tuple(trace_rows), converged=converged,
        membership=membership_residual(spec, minimizer),
    )


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def minimize_primal(rho: HermitianOp, spec, cfg: SolverConfig = None) -> SolveResult:
    """Minimize D(rho||sigma) over the family described by ``spec``.

    Oracle families (``Sep``, ``PiSep``) run conditional gradient; ``Ppt``
    runs projected descent; ``RainsSet`` delegates to ``rains_bound`` (whose
    objective carries the trace correction); ``SingleState`` is a direct
    evaluation.  The returned bracket always satisfies lower <= upper, with
    ``lower`` certified independently of the heuristic oracle.
    """
    cfg = cfg or SolverConfig()
    if rho.dims != spec.dims:
        raise DimensionError(f"state dims {rho.dims} do not match family dims {spec.dims}")

    if isinstance(spec, SingleState):
        rep = relative_entropy(rho, spec.sigma)
        val = float(rep.value)
        return SolveResult(upper=val, lower=val, minimizer=spec.sigma, gap=0.0,
                           iterations=0, trace=(), converged=True,
                           membership=membership_residual(spec, spec.sigma))
    state = _FixedState(rho)
    if isinstance(spec, (Sep, PiSep)):
        return _solve_conditional_gradient(state, spec, cfg)
    if isinstance(spec, Ppt):
        return _solve_projected(state, spec, cfg, rains=False)
    if isinstance(spec, RainsSet):
        return _solve_projected(state, spec, cfg, rains=True)
    raise TypeError(f"unsupported family {type(spec).__name__}")


def rains_bound(rho: HermitianOp, split, cfg: SolverConfig = None) -> SolveResult:
    """Minimize D(rho||sigma) + 1 - Tr[sigma] over the trace-norm-ball family.

    For that family the two trace terms cancel, so the objective reduces to
    -S(rho) - Tr[rho ln sigma]; the reported value already includes the
    correction.
    """
    cfg = cfg or SolverConfig()
    spec = RainsSet(rho.dims, split)
    return _solve_projected(_FixedState(rho), spec, cfg, rains=True)


def auto_candidate_X(rho: HermitianOp, xi: HermitianOp, eps: float) -> HermitianOp:
    """Regularized dual candidate ln(rho + e^2) - ln(xi + e) + (Tr xi - 1).

    Exact in the limit e -> 0+; at floating point, e trades regularization
    bias against conditioning (see ``certify`` for the ladder search).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    d = rho.dim
    eye = np.eye(d)

    def logm(m):
        w, v = np.linalg.eigh(m)
        return (v * np.log(w)) @ v.conj().T

    x = logm(rho.mat + eps**2 * eye) - logm(xi.mat + eps * eye)
    x = x + (xi.trace - 1.0) * eye
    return HermitianOp(rho.dims, _herm(x))


def _log_trace_exp_mat(xi_mat, x_mat, rel_cutoff=SUPPORT_CUTOFF):
    w, v = _core.eigh(xi_mat)
    top = max(float(w[-1]), 0.0)
    keep = w > rel_cutoff * top
    if not keep.any():
        return -np.inf
    vk = v[:, keep]
    block = np.diag(np.log(w[keep])) + vk.conj().T @ x_mat @ vk
    mu = np.linalg.eigvalsh(_herm(block))
    peak = float(mu.max())
    return peak + math.log(float(np.exp(mu - peak).sum()))


def _h_gradient(xi_mat, x_mat, rel_cutoff=SUPPORT_CUTOFF):
    """Gradient of xi -> ln Tr exp(ln xi + X) on the support of xi."""
    w, v = _core.eigh(xi_mat)
    top = max(float(w[-1]), 1e-300)
    keep = w > rel_cutoff * top
    vk = v[:, keep]
    block = np.diag(np.log(w[keep])) + vk.conj().T @ x_mat @ vk
    mu, u = np.linalg.eigh(_herm(block))
    pr = np.exp(mu - mu.max())
    pr /= pr.sum()
    m_norm = (u * pr) @ u.conj().T
    k = _loewner_kernel(np.maximum(w[keep], top * 1e-200))
    return _herm(vk @ (k * m_norm) @ vk.conj().T)


def _maximize_h_segment(x_mat, base, direction, gmax, xtol=1e-8):
    phi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(gamma):
        return _log_trace_exp_mat(base + gamma * direction, x_mat)

    a, b = 0.0, gmax
    best_g, best_f = a, f(a)
    fb = f(b)
    if fb > best_f:
        best_g, best_f = b, fb
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol * max(gmax, 1.0):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
            if fc > best_f:
                best_g, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
            if fd > best_f:
                best_g, best_f = d, fd
    return best_g, best_f


def dual_certificate(rho: HermitianOp, spec, x: HermitianOp,
                     cfg: SolverConfig = None) -> DualCertificate:
    """Evaluate the lower-bound certificate for a candidate Hermitian X.

    Maximizes the concave inner objective sigma -> ln Tr exp(ln sigma + X)
    over the family (conditional gradient for oracle families, projected
    ascent otherwise; a direct evaluation for a singleton) and returns
    Tr[rho X] minus the found supremum.  The certified optimality gap of the
    inner ascent is reported as ``inner_sup_residual``; the bound is valid up
    to that residual.  The inner tolerance is a tenth of the outer one.
    """
    cfg = cfg or SolverConfig()
    if rho.dims != spec.dims or x.dims != spec.dims:
        raise DimensionError("state, family, and candidate dims must agree")
    tr_rho_x = _tr_prod(rho.mat, x.mat)

    if isinstance(spec, SingleState):
        val = _log_trace_exp_mat(spec.sigma.mat, x.mat)
        return DualCertificate(x, val, tr_rho_x - val, 0.0)

    dims = spec.dims
    inner_tol = cfg.tol / 10.0
    xi = maximally_mixed_member(spec).mat
    h = _log_trace_exp_mat(xi, x.mat)
    residual = np.inf
    eta = 1.0
    stall = 0
    seed0 = cfg.seed * 9_176_941
    warm_cache = {}

    for k in range(cfg.max_iters):
        g = _h_gradient(xi, x.mat)
        tr_gx = _tr_prod(g, xi)
        residual = max(_linear_max_bound(spec, g, dims) - tr_gx, 0.0)
        if residual <= inner_tol:
            break
        if isinstance(spec, (Sep, PiSep)):
            omega, _ = _lmo(spec, g, cfg.lmo_restarts, seed0 + k, warm_cache)
            gamma, h_new = _maximize_h_segment(x.mat, xi, omega.op.mat - xi, 1.0)
            if h_new <= h + 1e-15:
                stall += 1
                if stall >= 15:
                    break
            else:
                xi = xi + gamma * (omega.op.mat - xi)
                h = h_new
                stall = 0
        else:
            probe = _herm(xi + eta * g)
            ptol = 1e-8 * max(1.0, float(np.linalg.norm(probe)))
            if isinstance(spec, RainsSet):
                candidate = _rains_project_impl(probe, dims, spec.split,
                                                3000, ptol, strict=False)
            else:
                candidate = _ppt_project_impl(probe, dims, spec.split,
                                              3000, ptol, strict=False)
            gamma, h_new = _maximize_h_segment(x.mat, xi, candidate - xi, 1.0)
            if h_new > h + 1e-15:
                xi = xi + gamma * (candidate - xi)
                h = h_new
                stall = 0
                eta = min(eta * 1.6, 1e3) if gamma > 0.9 else eta
            else:
                eta = max(eta * 0.3, 1e-8)
                stall += 1
                if stall >= 15:
                    break

    return DualCertificate(x, h, tr_rho_x - h, float(residual))


def certify(rho: HermitianOp, spec, cfg: SolverConfig = None,
            eps_ladder=None, x: HermitianOp = None):
    """Best ansatz-driven certificate for D_F(rho).

    With no explicit candidate, solves the primal first, then evaluates the
    regularized ansatz at each ladder value of the regularization strength
    and keeps the best bound.  The default ladder is a decade around
    ``cfg.epsilon_reg``.  Returns ``(certificate, primal_result)``
    (``primal_result`` is None when ``x`` was supplied).
    """
    cfg = cfg or SolverConfig()
    if eps_ladder is None:
        eps_ladder = (min(10.0 * cfg.epsilon_reg, 0.5), cfg.epsilon_reg,
                      cfg.epsilon_reg / 10.0)
    if x is not None:
        return dual_certificate(rho, spec, x, cfg), None
    primal = minimize_primal(rho, spec, cfg)
    best = None
    for eps in eps_ladder:
        cand = auto_candidate_X(rho, primal.minimizer, eps)
        cert = dual_certificate(rho, spec, cand, cfg)
        if best is None or cert.bound > best.bound:
            best = cert
    return best, primal


def two_copy_subadditivity_check(rho: HermitianOp, spec_doubled,
                                 cfg: SolverConfig = None) -> float:
    """E(rho x rho) - 2 E(rho) for a family given on the doubled system.

    The doubled family must have dims equal to two concatenated copies of
    the state's dims, with the bipartition replicated on both copies; the
    single-copy family is derived from it.  Expected non-positive up to
    solver uncertainty for tensor-stable families.
    """
    cfg = cfg or SolverConfig()
    m = len(rho.dims)
    if spec_doubled.dims != rho.dims + rho.dims:
        raise DimensionError("doubled family dims must be two copies of the state dims")
    if int(np.prod(spec_doubled.dims)) > 36:
        raise DimensionError("doubled system dimension exceeds the cap of 36")
    if not isinstance(spec_doubled, (Sep, Ppt)):
        raise TypeError("two-copy check supports bipartite Sep and Ppt families")
    single_split = tuple(i for i in spec_doubled.split if i < m)
    expected = tuple(sorted(single_split + tuple(i + m for i in single_split)))
    if spec_doubled.split != expected:
        raise DimensionError("doubled bipartition must replicate the single-copy one")
    single = type(spec_doubled)(rho.dims, single_split)

    e1 = minimize_primal(rho, single, cfg)
    e2 = minimize_primal(tensor(rho, rho), spec_doubled, cfg)
    return e2.upper - 2.0 * e1.upper


def minimizer_continuity_probe(rho: HermitianOp, spec, delta: float,
                               trials: int = 4, cfg: SolverConfig = None) -> dict:
    """Empirical stability of the closest free state under perturbations.

    Solves for ``rho`` and for ``trials`` random perturbations at trace
    distance at most ``delta``, reporting the largest displacement of the
    minimizer in trace norm.  Requires a faithful target (min eigenvalue
    above 1e-6), where the minimizer is unique.
    """
    cfg = cfg or SolverConfig()
    wmin = float(np.linalg.eigvalsh(rho.mat)[0])
    if wmin <= 1e-6:
        raise NotPSDError(f"probe requires a faithful state (min eigenvalue {wmin:.1e})")
    base = minimize_primal(rho, spec, cfg)
    rng = np.random.default_rng(cfg.seed + 202)
    d = rho.dim
    displacements = []
    for _ in range(max(int(trials), 1)):
        h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = _herm(h)
        h -= (h.trace().real / d) * np.eye(d)
        tn = float(np.abs(np.linalg.eigvalsh(h)).sum())
        h *= delta / tn if tn > 0 else 0.0
        pert = rho.mat + h
        while float(np.linalg.eigvalsh(pert)[0]) < 1e-12:
            h *= 0.5
            pert = rho.mat + h
        res = minimize_primal(HermitianOp(rho.dims, pert), spec, cfg)
        diff = res.minimizer.mat - base.minimizer.mat
        displacements.append(float(np.abs(np.linalg.eigvalsh(_herm(diff))).sum()))
    return {
        "delta": float(delta),
        "displacements": tuple(displacements),
        "max_displacement": max(displacements),
        "base_value": base.upper,
    }
