"""Dense Hermitian-operator algebra on tensor-product spaces.

Operators carry an explicit factorization into subsystem dimensions, which is
what partial trace, partial transposition, and Schmidt decompositions act on.
Matrix functions (log, exp) are spectral; the log is restricted to the support
with a relative eigenvalue cutoff.  ``loewner_log_frechet`` evaluates the
Frechet derivative of the operator logarithm, the gradient object driving the
relative-entropy solvers.

All functions are pure; operators are treated as immutable values.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import DimensionError, NotHermitianError, NotPSDError, SupportMismatchError

#: relative eigenvalue threshold below which spectra are treated as zero
SUPPORT_CUTOFF = 1e-12
#: squared-overlap tolerance for declaring a support inclusion violated
SUPPORT_OVERLAP_TOL = 1e-10
#: relative eigenvalue gap below which the log divided difference is degenerate
LOEWNER_DEGENERACY_TOL = 1e-10

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class HermitianOp:
    """Dense self-adjoint operator with a declared tensor factorization.

    ``dims`` lists the subsystem dimensions; ``mat`` is the (prod(dims) x
    prod(dims)) complex matrix.  Construction verifies Hermiticity to
    ``HERMITICITY_TOL`` per entry and stores the exactly symmetrized matrix.
    """

    dims: tuple
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"invalid subsystem dimensions {dims}")
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        d = int(np.prod(dims))
        if mat.shape != (d, d):
            raise DimensionError(
                f"matrix shape {mat.shape} does not match dims {dims} (total {d})"
            )
        asym = float(np.abs(mat - mat.conj().T).max(initial=0.0))
        if asym > HERMITICITY_TOL:
            raise NotHermitianError(asym)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", (mat + mat.conj().T) / 2.0)

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def trace(self):
        return float(self.mat.trace().real)

    def with_mat(self, mat):
        return HermitianOp(self.dims, mat)


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition: ascending eigenvalues, unitary column vectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class SupportInfo:
    """Support data of a PSD operator: rank, projector, and the cutoff used."""

    rank: int
    projector: HermitianOp
    cutoff_used: float


def identity(dims):
    d = int(np.prod(dims))
    return HermitianOp(tuple(dims), np.eye(d, dtype=np.complex128))


def pure_state(vec, dims):
    """Rank-one projector |psi><psi| with the given factorization."""
    v = np.asarray(vec, dtype=np.complex128).ravel()
    return HermitianOp(tuple(dims), np.outer(v, v.conj()))


def _canonical_phase(v):
    # First component of non-negligible magnitude is made real positive.
    out = v.copy()
    n = np.abs(out)
    peak = n.max(initial=0.0)
    if peak == 0.0:
        return out
    idx = int(np.argmax(n > 1e-8 * peak))
    ph = out[idx]
    if abs(ph) > 0:
        out *= ph.conjugate() / abs(ph)
    return out


def eig_hermitian(a: HermitianOp) -> EigenSystem:
    """Spectral decomposition with a deterministic ordering.

    Eigenvalues ascend; exact eigenvalue ties are broken by comparing the
    phase-canonicalized eigenvector columns lexicographically (real part
    first, then imaginary part, component by component).
    """
    w, v = _core.eigh(a.mat)
    cols = [_canonical_phase(v[:, j]) for j in range(v.shape[1])]

    def key(j):
        c = cols[j]
        return (w[j],) + tuple(x for pair in zip(c.real, c.imag) for x in pair)

    order = sorted(range(len(cols)), key=key)
    w = np.array([w[j] for j in order])
    v = np.column_stack([cols[j] for j in order])
    return EigenSystem(w, v)


def _check_psd(w, what="operator", rel=SUPPORT_CUTOFF):
    top = max(float(w[-1]), 0.0)
    floor = -rel * max(top, 1.0) if top == 0.0 else -rel * top
    if float(w[0]) < floor:
        raise NotPSDError(f"{what} has negative eigenvalue {float(w[0]):.3e}")


def matrix_log_support(a: HermitianOp, cutoff: float = SUPPORT_CUTOFF):
    """Logarithm restricted to the support.

    Returns ``(P ln(P A P) P, SupportInfo)`` where P projects onto the
    eigenspaces with eigenvalue above ``cutoff`` times the top eigenvalue.
    Raises ``NotPSDError`` if an eigenvalue falls below that threshold
    negatively.
    """
    es = eig_hermitian(a)
    w, v = es.eigenvalues, es.eigenvectors
    _check_psd(w, "matrix_log_support input", rel=cutoff)
    top = max(float(w[-1]), 0.0)
    keep = w > cutoff * top
    rank = int(keep.sum())
    vk = v[:, keep]
    logm = (vk * np.log(w[keep])) @ vk.conj().T if rank else np.zeros_like(a.mat)
    proj = vk @ vk.conj().T if rank else np.zeros_like(a.mat)
    return a.with_mat(logm), SupportInfo(rank, a.with_mat(proj), float(cutoff))


def matrix_exp(h: HermitianOp) -> HermitianOp:
    es = eig_hermitian(h)
    v = es.eigenvectors
    return h.with_mat((v * np.exp(es.eigenvalues)) @ v.conj().T)


def _axes_perm(dims, front):
    rest = [i for i in range(len(dims)) if i not in front]
    return list(front) + rest


def _check_indices(dims, idx, what="subsystem indices"):
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != len(idx) or any(i < 0 or i >= len(dims) for i in idx):
        raise DimensionError(f"invalid {what} {idx} for {len(dims)} factors")
    return idx


def partial_trace(a: HermitianOp, keep) -> HermitianOp:
    """Trace out every factor not listed in ``keep`` (order preserved)."""
    keep = _check_indices(a.dims, keep, "keep set")
    if not keep:
        raise DimensionError("keep set must be non-empty")
    keep = tuple(sorted(keep))
    dims = a.dims
    m = len(dims)
    perm = _axes_perm(dims, keep)
    dk = int(np.prod([dims[i] for i in keep]))
    dt = a.dim // dk
    t = a.mat.reshape(dims + dims)
    t = t.transpose([*perm, *[m + i for i in perm]])
    t = t.reshape(dk, dt, dk, dt)
    out = np.einsum("ikjk->ij", t)
    return HermitianOp(tuple(dims[i] for i in keep), out)


def partial_transpose(a: HermitianOp, subsystem: int) -> HermitianOp:
    """Transpose one tensor factor in the computational basis."""
    (subsystem,) = _check_indices(a.dims, (subsystem,))
    dims = a.dims
    m = len(dims)
    t = a.mat.reshape(dims + dims)
    axes = list(range(2 * m))
    axes[subsystem], axes[m + subsystem] = axes[m + subsystem], axes[subsystem]
    return a.with_mat(t.transpose(axes).reshape(a.dim, a.dim))


def partial_transpose_many(a: HermitianOp, subsystems) -> HermitianOp:
    out = a
    for s in subsystems:
        out = partial_transpose(out, s)
    return out


def trace_norm(a: HermitianOp) -> float:
    """Sum of singular values; for Hermitian input, sum of |eigenvalues|."""
    return float(np.abs(np.linalg.eigvalsh(a.mat)).sum())


def tensor(a: HermitianOp, b: HermitianOp) -> HermitianOp:
    return HermitianOp(a.dims + b.dims, np.kron(a.mat, b.mat))


def _loewner_kernel(w, degeneracy_tol=LOEWNER_DEGENERACY_TOL):
    """Divided-difference table of ln on the eigenvalues ``w`` (all > 0)."""
    w = np.asarray(w, float)
    diff = w[:, None] - w[None, :]
    mean = (w[:, None] + w[None, :]) / 2.0
    degenerate = np.abs(diff) < degeneracy_tol * max(float(w.max()), 1e-300)
    safe = np.where(degenerate, 1.0, diff)
    k = np.where(degenerate, 1.0 / mean, (np.log(w)[:, None] - np.log(w)[None, :]) / safe)
    return k


def _loewner_apply(w, v, x, cutoff=SUPPORT_CUTOFF):
    """Frechet derivative of ln at the PSD operator with eigensystem (w, v),
    applied to the matrix ``x``; restricted to the support block."""
    top = max(float(w[-1]), 0.0)
    keep = w > cutoff * top
    vk = v[:, keep]
    xk = vk.conj().T @ x @ vk
    k = _loewner_kernel(w[keep])
    return vk @ (k * xk) @ vk.conj().T


def loewner_log_frechet(xi: HermitianOp, x: HermitianOp,
                        cutoff: float = SUPPORT_CUTOFF) -> HermitianOp:
    """Derivative of the operator log at ``xi`` in direction ``x``.

    Equals the integral of (xi + s)^-1 x (xi + s)^-1 over s in [0, inf),
    evaluated in closed form through the divided-difference table of ln in
    the eigenbasis of ``xi``.  Requires supp x within supp xi: eigenvectors
    of ``x`` with |eigenvalue| above ``cutoff`` times its spectral radius may
    overlap the kernel of ``xi`` by at most ``SUPPORT_OVERLAP_TOL``.
    """
    es = eig_hermitian(xi)
    w, v = es.eigenvalues, es.eigenvectors
    _check_psd(w, "loewner_log_frechet base point", rel=cutoff)
    top = max(float(w[-1]), 0.0)
    keep = w > cutoff * top

    if not keep.all():
        ker = v[:, ~keep]
        wx, vx = np.linalg.eigh(x.mat)
        xtop = float(np.abs(wx).max(initial=0.0))
        sig = np.abs(wx) > cutoff * xtop
        if sig.any():
            leak = np.abs(ker.conj().T @ vx[:, sig]) ** 2
            worst = float(leak.sum(axis=0).max())
            if worst > SUPPORT_OVERLAP_TOL:
                raise SupportMismatchError(
                    f"direction leaks outside the base support (overlap {worst:.3e})"
                )
    return xi.with_mat(_loewner_apply(w, v, x.mat, cutoff))


def schmidt_decompose(psi, dims, left):
    """Schmidt data of a unit vector across the bipartition ``left`` vs rest.

    Returns ``(coefficients, left_vectors, right_vectors)`` with descending
    non-negative coefficients whose squares sum to one, and orthonormal
    vector families (rows of the returned 2-d arrays).
    """
    dims = tuple(int(d) for d in dims)
    left = _check_indices(dims, left, "left side")
    if not left or len(left) == len(dims):
        raise DimensionError("bipartition must be proper and non-empty")
    v = np.asarray(psi, dtype=np.complex128).ravel()
    if v.size != int(np.prod(dims)):
        raise DimensionError("vector length does not match dims")
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"vector is not normalized: |psi| = {nrm:.12f}")
    left = tuple(sorted(left))
    perm = _axes_perm(dims, left)
    dl = int(np.prod([dims[i] for i in left]))
    m = v.reshape(dims).transpose(perm).reshape(dl, v.size // dl)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > 1e-14
    return s[keep], u[:, keep].T.copy(), vh[keep].copy()
