"""Free-state families as computational objects.

Each family is a tagged spec.  The separable families expose a linear
minimization oracle (alternating smallest-eigenvector descent over product
vectors, batched over random restarts); the positive-partial-transpose and
trace-norm-ball families expose Frobenius metric projections via Dykstra's
algorithm, since their linear oracles would be semidefinite programs while
their projections are cheap eigenvalue clippings.

Also provides the recursive-Schmidt construction of a fully separable state
matching all single-party marginals of a given pure state.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ProjectionError
from .operators import (
    HermitianOp,
    partial_transpose_many,
    schmidt_decompose,
)

PPT_EIG_TOL = 1e-10


# ---------------------------------------------------------------------------
# Family specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeSetSpec:
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))


def _check_split(dims, split):
    split = tuple(sorted(int(i) for i in split))
    m = len(dims)
    if not split or len(split) >= m or len(set(split)) != len(split):
        raise DimensionError(f"invalid bipartition {split} of {m} factors")
    if any(i < 0 or i >= m for i in split):
        raise DimensionError(f"bipartition index out of range in {split}")
    return split


@dataclass(frozen=True)
class Sep(FreeSetSpec):
    """Convex hull of pure product states across one bipartition."""

    split: tuple = (0,)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "split", _check_split(self.dims, self.split))


@dataclass(frozen=True)
class PiSep(FreeSetSpec):
    """States product across at least one allowed partition of the parties.

    ``partitions`` is a tuple of partitions; each partition is a tuple of
    pairwise-disjoint non-empty blocks (tuples of factor indices) covering
    every factor.
    """

    partitions: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        m = len(self.dims)
        cleaned = []
        for part in self.partitions:
            blocks = tuple(tuple(sorted(int(i) for i in b)) for b in part)
            seen = [i for b in blocks for i in b]
            if not blocks or any(not b for b in blocks):
                raise DimensionError("partition blocks must be non-empty")
            if sorted(seen) != list(range(m)):
                raise DimensionError(
                    f"partition {blocks} does not tile the {m} factors"
                )
            cleaned.append(tuple(sorted(blocks)))
        if not cleaned:
            raise DimensionError("at least one partition is required")
        object.__setattr__(self, "partitions", tuple(cleaned))


@dataclass(frozen=True)
class Ppt(FreeSetSpec):
    """States whose partial transpose across the bipartition stays PSD."""

    split: tuple = (0,)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "split", _check_split(self.dims, self.split))


@dataclass(frozen=True)
class RainsSet(FreeSetSpec):
    """PSD operators whose partial transpose has trace norm at most one."""

    split: tuple = (0,)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "split", _check_split(self.dims, self.split))


@dataclass(frozen=True)
class SingleState(FreeSetSpec):
    """The singleton family {sigma}."""

    sigma: HermitianOp = None

    def __post_init__(self):
        super().__post_init__()
        if self.sigma is None:
            raise DimensionError("SingleState requires a reference operator")
        if self.sigma.dims != self.dims:
            raise DimensionError("SingleState reference dims do not match the spec dims")


@dataclass(frozen=True)
class ProductState:
    """Pure product state: one unit vector per partition block."""

    blocks: tuple
    vectors: tuple = field(repr=False)
    op: HermitianOp = field(repr=False)


# ---------------------------------------------------------------------------
# Linear minimization oracles
# ---------------------------------------------------------------------------

def _block_permuted_tensor(gmat, dims, blocks):
    m = len(dims)
    perm = [i for b in blocks for i in b]
    t = gmat.reshape(tuple(dims) + tuple(dims))
    t = t.transpose([*perm, *[m + i for i in perm]])
    bdims = [int(np.prod([dims[i] for i in b])) for b in blocks]
    return t.reshape(tuple(bdims) + tuple(bdims)), perm, bdims


def _random_unit(rng, r, d):
    v = rng.standard_normal((r, d)) + 1j * rng.standard_normal((r, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _bottom_eig_batch(m):
    """Smallest eigenpair of a stack of Hermitian matrices.

    Qubit-sized blocks use the closed form (they dominate the workload and
    LAPACK dispatch would dwarf the arithmetic); larger blocks fall back to
    the batched solver.
    """
    if m.shape[-1] == 2:
        a = m[:, 0, 0].real
        c = m[:, 1, 1].real
        b = m[:, 0, 1]
        absb = np.abs(b)
        r = np.hypot(0.5 * (a - c), absb)
        lam = 0.5 * (a + c) - r
        top = a - lam
        vec = np.empty((m.shape[0], 2), dtype=np.complex128)
        vec[:, 0] = -b
        vec[:, 1] = top
        nrm = np.sqrt(absb * absb + top * top)
        bad = nrm < 1e-300  # diagonal input with the bottom value in slot 0
        if bad.any():
            vec[bad, 0] = 1.0
            vec[bad, 1] = 0.0
            nrm[bad] = 1.0
        vec /= nrm[:, None]
        return lam, vec
    w, v = np.linalg.eigh(m)
    return w[:, 0], np.ascontiguousarray(v[:, :, 0])


def _transfer_matrices(gmat, dims, blocks):
    """One matrix per block mapping the outer weights of the other blocks to
    the contracted Hermitian matrix on that block."""
    k = len(blocks)
    gt, perm, bdims = _block_permuted_tensor(gmat, dims, blocks)
    tensors = []
    for j in range(k):
        axes = [j, k + j]
        for i in range(k):
            if i != j:
                axes.extend([i, k + i])
        rest = int(np.prod([bdims[i] ** 2 for i in range(k) if i != j]))
        tensors.append(gt.transpose(axes).reshape(bdims[j] ** 2, rest))
    return tensors, perm, bdims


def _alternating_lmo(gmat, dims, blocks, restarts, seed, ftol=1e-12,
                     max_sweeps=150, warm=None):
    """Minimize <v1...vk| G |v1...vk> over product vectors, block-wise.

    Fixing all blocks but one contracts G to a Hermitian matrix on that
    block, whose bottom eigenvector is the exact one-block update, so the
    value is non-increasing through every update; a restart stops once a
    full sweep improves it by less than ``ftol``.  All restarts run in
    lockstep (batched eigensolves and one GEMM per block update); the best
    restart wins, ties resolved by restart index, so the result is
    deterministic for a fixed seed.  ``warm`` optionally seeds restart 0
    with known block vectors.
    """
    k = len(blocks)
    transfer, perm, bdims = _transfer_matrices(gmat, dims, blocks)
    rng = np.random.default_rng(seed)
    vs = [_random_unit(rng, restarts, d) for d in bdims]
    if warm is not None:
        for j, wv in enumerate(warm):
            vs[j][0] = wv / np.linalg.norm(wv)

    def pair_weights(exclude):
        w = None
        for i in range(k):
            if i == exclude:
                continue
            wi = (vs[i].conj()[:, :, None] * vs[i][:, None, :]).reshape(len(vs[i]), -1)
            w = wi if w is None else (w[:, :, None] * wi[:, None, :]).reshape(len(wi), -1)
        if w is None:  # single-block partition: nothing to contract against
            w = np.ones((len(vs[exclude]), 1), dtype=np.complex128)
        return w

    def update(j):
        d = bdims[j]
        m = (pair_weights(j) @ transfer[j].T).reshape(-1, d, d)
        m = (m + np.conj(np.swapaxes(m, 1, 2))) / 2.0
        w, v = _bottom_eig_batch(m)
        vs[j] = v
        return w

    nall = restarts
    final_vecs = [np.empty((nall, d), dtype=np.complex128) for d in bdims]
    final_vals = np.full(nall, np.inf)
    active = np.arange(nall)

    values = None
    for j in range(k):
        values = update(j)
    for _ in range(max_sweeps):
        prev = values
        for j in range(k):
            values = update(j)
        settled = prev - values < ftol
        if settled.any():
            rows = active[settled]
            final_vals[rows] = values[settled]
            for j in range(k):
                final_vecs[j][rows] = vs[j][settled]
            keep = ~settled
            active = active[keep]
            if active.size == 0:
                break
            vs = [v[keep] for v in vs]
            values = values[keep]
    if active.size:
        final_vals[active] = values
        for j in range(k):
            final_vecs[j][active] = vs[j]

    best = int(np.argmin(final_vals))
    vecs = [np.ascontiguousarray(final_vecs[j][best]) for j in range(k)]

    full = vecs[0]
    for v in vecs[1:]:
        full = np.kron(full, v)
    pdims = [dims[i] for i in perm]
    inv = np.argsort(perm)
    full = full.reshape(pdims).transpose(inv).ravel()
    op = HermitianOp(tuple(dims), np.outer(full, full.conj()))
    ps = ProductState(tuple(tuple(b) for b in blocks), tuple(vecs), op)
    return ps, float(final_vals[best])


def sep_lmo(g: HermitianOp, split, restarts: int = 32, seed: int = 0) -> ProductState:
    """Best product state for the linear functional Tr[G (psi x phi)(..)^dag].

    Alternates smallest-eigenvector updates between the two sides of the
    bipartition from ``restarts`` random initializations and keeps the best;
    deterministic for a fixed seed.  The returned value is an upper bound on
    the true product minimum (exact in the commuting case).
    """
    split = _check_split(g.dims, split)
    rest = tuple(i for i in range(len(g.dims)) if i not in split)
    ps, _ = _alternating_lmo(g.mat, g.dims, (split, rest), restarts, seed)
    return ps


def pi_sep_lmo(g: HermitianOp, partitions, restarts: int = 32, seed: int = 0) -> ProductState:
    """Best product state across any of the allowed partitions (blocks fused)."""
    spec = PiSep(g.dims, tuple(partitions))
    best = None
    best_val = np.inf
    for part in spec.partitions:
        ps, val = _alternating_lmo(g.mat, g.dims, part, restarts, seed)
        if val < best_val:
            best, best_val = ps, val
    return best


def lmo_for(spec, g: HermitianOp, restarts: int = 32, seed: int = 0) -> ProductState:
    """Dispatch the linear minimization oracle of an LMO-style family."""
    if isinstance(spec, Sep):
        return sep_lmo(g, spec.split, restarts, seed)
    if isinstance(spec, PiSep):
        return pi_sep_lmo(g, spec.partitions, restarts, seed)
    raise TypeError(f"{type(spec).__name__} has no linear minimization oracle")


# ---------------------------------------------------------------------------
# Membership and projections
# ---------------------------------------------------------------------------

def is_ppt(sigma: HermitianOp, split) -> bool:
    """Partial-transpose positivity test (min eigenvalue >= -1e-10)."""
    split = _check_split(sigma.dims, split)
    pt = partial_transpose_many(sigma, split)
    return float(np.linalg.eigvalsh(pt.mat)[0]) >= -PPT_EIG_TOL


def _proj_simplex(w):
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(w) + 1)
    cond = u - css / idx > 0
    k = idx[cond][-1]
    theta = css[k - 1] / k
    return np.maximum(w - theta, 0.0)


def _proj_l1_ball(w, radius=1.0):
    a = np.abs(w)
    if a.sum() <= radius:
        return w.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, len(w) + 1)
    k = idx[u - css / idx > 0][-1]
    theta = css[k - 1] / k
    return np.sign(w) * np.maximum(a - theta, 0.0)


def _herm(m):
    return (m + m.conj().T) / 2.0


def _proj_spectrahedron(m):
    w, v = np.linalg.eigh(_herm(m))
    return (v * _proj_simplex(w)) @ v.conj().T


def _proj_psd(m):
    w, v = np.linalg.eigh(_herm(m))
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def _pt(mat, dims, split):
    m = len(dims)
    t = mat.reshape(tuple(dims) + tuple(dims))
    axes = list(range(2 * m))
    for s in split:
        axes[s], axes[m + s] = axes[m + s], axes[s]
    return t.transpose(axes).reshape(mat.shape)


def _dykstra(a0, proj1, proj2, max_iters, tol, strict=True):
    x = a0.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    residual = np.inf
    for _ in range(max_iters):
        y = proj1(x + p)
        p = x + p - y
        x_new = proj2(y + q)
        q = y + q - x_new
        residual = float(np.linalg.norm(y - x_new))
        x = x_new
        if residual <= tol:
            return y, x, residual
    if strict:
        raise ProjectionError(residual)
    return y, x, residual


def _ppt_project_impl(mat, dims, split, max_iters, tol, strict=True):
    def proj_cone(m):
        return _pt(_proj_psd(_pt(m, dims, split)), dims, split)

    y, _, residual = _dykstra(mat, _proj_spectrahedron, proj_cone, max_iters, tol,
                              strict=strict)
    for _ in range(200):
        wmin = float(np.linalg.eigvalsh(_pt(y, dims, split))[0])
        if wmin >= -1e-12:
            return y
        y = _proj_spectrahedron(proj_cone(y))
    raise ProjectionError(residual, "PPT cleanup failed to settle")


def ppt_project(a: HermitianOp, split, max_iters: int = 5000, tol: float = 1e-9) -> HermitianOp:
    """Frobenius-nearest state with a PSD partial transpose.

    Dykstra iteration between the spectrahedron {X >= 0, Tr X = 1}
    (eigenvalue simplex projection) and the cone {X : X^Gamma >= 0}
    (eigenvalue clipping in the transposed picture), followed by a short
    plain-alternation cleanup so the output is exactly unit trace, exactly
    PSD, and PPT to well within the ``is_ppt`` tolerance.
    """
    split = _check_split(a.dims, split)
    return HermitianOp(a.dims, _ppt_project_impl(a.mat, a.dims, split, max_iters, tol))


def _rains_project_impl(mat, dims, split, max_iters, tol, strict=True):
    def proj_ball(m):
        t = _pt(m, dims, split)
        w, v = np.linalg.eigh(_herm(t))
        t = (v * _proj_l1_ball(w)) @ v.conj().T
        return _pt(t, dims, split)

    y, _, residual = _dykstra(mat, _proj_psd, proj_ball, max_iters, tol,
                              strict=strict)
    for _ in range(200):
        tn = float(np.abs(np.linalg.eigvalsh(_pt(y, dims, split))).sum())
        if tn <= 1.0 + 1e-12:
            return y
        y = _proj_psd(proj_ball(y))
    raise ProjectionError(residual, "trace-norm-ball cleanup failed to settle")


def rains_project(a: HermitianOp, split, max_iters: int = 5000, tol: float = 1e-9) -> HermitianOp:
    """Frobenius-nearest point of {X >= 0, ||X^Gamma||_1 <= 1}.

    Dykstra between the PSD cone and the transposed-picture trace-norm unit
    ball, whose projection is eigenvalue soft-thresholding at the exact
    water-filling level.
    """
    split = _check_split(a.dims, split)
    return HermitianOp(a.dims, _rains_project_impl(a.mat, a.dims, split, max_iters, tol))


def maximally_mixed_member(spec) -> HermitianOp:
    """A full-support member of the family, used for interior initialization."""
    if isinstance(spec, SingleState):
        return spec.sigma
    d = int(np.prod(spec.dims))
    return HermitianOp(spec.dims, np.eye(d, dtype=np.complex128) / d)


def transpose_cuts(spec):
    """Bipartitions across which every member of the family is PPT.

    Used to certify optimality gaps: a linear functional over the family is
    bounded by the top eigenvalue of its partial transpose across any such
    cut.
    """
    m = len(spec.dims)
    if isinstance(spec, (Sep, Ppt)):
        return [spec.split]
    if isinstance(spec, PiSep):
        cuts = []
        for size in range(1, m):
            for s in itertools.combinations(range(m), size):
                if 0 in s:
                    continue  # complements give the same spectrum
                sset = set(s)
                ok = all(
                    all(set(b) <= sset or not (set(b) & sset) for b in part)
                    for part in spec.partitions
                )
                if ok:
                    cuts.append(tuple(s))
        return cuts
    return []


def membership_residual(spec, op: HermitianOp) -> float:
    """Necessary-condition residual for membership (zero means consistent).

    For the separable families this tests the partial-transpose criteria
    across every certified cut (exact separability testing is not
    attempted); for PPT and the trace-norm-ball family the test is exact.
    """
    res = 0.0
    if isinstance(spec, SingleState):
        return float(np.abs(op.mat - spec.sigma.mat).max())
    wmin = float(np.linalg.eigvalsh(op.mat)[0])
    res = max(res, -wmin)
    if isinstance(spec, RainsSet):
        tn = float(np.abs(np.linalg.eigvalsh(_pt(op.mat, op.dims, spec.split))).sum())
        return max(res, tn - 1.0)
    res = max(res, abs(op.trace - 1.0))
    for cut in transpose_cuts(spec):
        wmin = float(np.linalg.eigvalsh(_pt(op.mat, op.dims, cut))[0])
        res = max(res, -wmin)
    return res


# ---------------------------------------------------------------------------
# Separable witness from iterated Schmidt decompositions
# ---------------------------------------------------------------------------

def separable_witness_from_pure(psi, dims) -> HermitianOp:
    """Fully separable state matching every single-party marginal of ``psi``.

    Built by Schmidt-decomposing across the cuts first-party : rest,
    recursively on the right factors, and dephasing in the resulting product
    basis.  The relative entropy from |psi><psi| to the output is the Shannon
    entropy of the accumulated branch weights, which never exceeds the sum of
    the first m-1 single-party marginal entropies.
    """
    dims = tuple(int(d) for d in dims)
    v = np.asarray(psi, dtype=np.complex128).ravel()
    if v.size != int(np.prod(dims)):
        raise DimensionError("vector length does not match dims")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("witness construction requires a normalized vector")

    def build(vec, ds):
        if len(ds) == 1:
            return np.outer(vec, vec.conj())
        coeff, left, right = schmidt_decompose(vec, ds, (0,))
        d_rest = int(np.prod(ds[1:]))
        out = np.zeros((ds[0] * d_rest, ds[0] * d_rest), dtype=np.complex128)
        for c, lv, rv in zip(coeff, left, right):
            out += c**2 * np.kron(np.outer(lv, lv.conj()), build(rv, ds[1:]))
        return out

    return HermitianOp(dims, build(v, dims))
