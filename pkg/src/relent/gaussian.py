"""Truncated-Fock-space continuous-variable utilities.

Quadratures follow the convention [x, p] = i with the vacuum variance
normalized so that the covariance matrix of the vacuum is the identity:
V = Tr[rho {r - s, (r - s)^T}] with r = (x_1..x_m, p_1..p_m).  Under this
normalization a thermal state with mean photon number N has symplectic
eigenvalue nu = 2N + 1.

The divergence from the closest Gaussian state has the closed form
S(rho_G) - S(rho), where rho_G is the Gaussian state sharing the first and
second moments of rho; only the symplectic spectrum of the covariance is
needed for S(rho_G).  Truncation quality is tracked through the population
of the top two Fock levels per mode.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .entropy import von_neumann_entropy
from .errors import DimensionError, LeakageError, NotPSDError
from .operators import HermitianOp

LEAK_WARN = 1e-4
LEAK_ERROR = 1e-2


@dataclass(frozen=True)
class FockRep:
    """State of an m-mode system truncated to ``cutoff`` Fock levels per mode."""

    modes: int
    cutoff: int
    state: HermitianOp = field(repr=False)

    def __post_init__(self):
        if self.cutoff < 2:
            raise DimensionError("cutoff must be at least 2")
        if self.state.dims != (self.cutoff,) * self.modes:
            raise DimensionError(
                f"state dims {self.state.dims} do not match {self.modes} modes "
                f"at cutoff {self.cutoff}"
            )
        w = np.linalg.eigvalsh(self.state.mat)
        if float(w[0]) < -1e-10:
            raise NotPSDError(f"state has negative eigenvalue {float(w[0]):.3e}")
        if abs(float(w.sum()) - 1.0) > 1e-8:
            raise NotPSDError(f"state trace {float(w.sum()):.10f} differs from 1")


@dataclass(frozen=True)
class MomentData:
    """First and second moments: mean vector s, anticommutator covariance V."""

    mean: np.ndarray
    covariance: np.ndarray
    symplectic_form: np.ndarray
    leakage: float


def symplectic_form(m: int) -> np.ndarray:
    omega = np.zeros((2 * m, 2 * m))
    omega[:m, m:] = np.eye(m)
    omega[m:, :m] = -np.eye(m)
    return omega


def _ladder(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(np.complex128)


def _embed(op_single, mode, modes, cutoff):
    out = np.array([[1.0 + 0j]])
    for j in range(modes):
        out = np.kron(out, op_single if j == mode else np.eye(cutoff))
    return out


def quadrature_ops(m: int, cutoff: int):
    """Truncated quadrature operators (x_1..x_m, p_1..p_m) on the joint space.

    The truncated ladder construction satisfies [x_j, p_j] = i exactly except
    on the top Fock level of each mode.
    """
    if cutoff < 2:
        raise DimensionError("cutoff must be at least 2")
    a = _ladder(cutoff)
    x1 = (a + a.conj().T) / np.sqrt(2.0)
    p1 = 1j * (a.conj().T - a) / np.sqrt(2.0)
    dims = (cutoff,) * m
    xs = [HermitianOp(dims, _embed(x1, j, m, cutoff)) for j in range(m)]
    ps = [HermitianOp(dims, _embed(p1, j, m, cutoff)) for j in range(m)]
    return xs, ps


def _leakage(rho: FockRep) -> float:
    """Largest per-mode population of the top two Fock levels."""
    worst = 0.0
    diag = np.real(np.diag(rho.state.mat))
    idx = np.array(np.unravel_index(np.arange(diag.size), rho.state.dims))
    for mode in range(rho.modes):
        mask = idx[mode] >= rho.cutoff - 2
        worst = max(worst, float(diag[mask].sum()))
    return worst


def moments(rho: FockRep) -> MomentData:
    """Mean vector and anticommutator covariance of a truncated state.

    Warns when the top-two-level population exceeds ``LEAK_WARN``: moment
    estimates degrade quadratically in that tail mass.
    """
    xs, ps = quadrature_ops(rho.modes, rho.cutoff)
    rs = [op.mat for op in xs] + [op.mat for op in ps]
    n = 2 * rho.modes
    state = rho.state.mat
    s = np.array([float(np.trace(state @ r).real) for r in rs])
    v = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            second = float(np.trace(state @ (rs[i] @ rs[j] + rs[j] @ rs[i])).real)
            v[i, j] = v[j, i] = second - 2.0 * s[i] * s[j]
    leak = _leakage(rho)
    if leak > LEAK_WARN:
        warnings.warn(
            f"truncation leakage {leak:.2e} exceeds {LEAK_WARN:.0e}; "
            "moments may be unreliable",
            stacklevel=2,
        )
    return MomentData(s, v, symplectic_form(rho.modes), leak)


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix: |eig(i Omega V)|, paired.

    Physical covariances have every value >= 1; inputs below 1 - 1e-6 are
    rejected as unphysical.
    """
    v = np.asarray(v, float)
    if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
        raise DimensionError("covariance must be a square matrix of even size")
    if np.abs(v - v.T).max() > 1e-10:
        raise DimensionError("covariance must be symmetric")
    m = v.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(m) @ v))
    ev = np.sort(ev)
    nu = (ev[0::2] + ev[1::2]) / 2.0
    if np.any(nu < 1.0 - 1e-6):
        raise NotPSDError(f"unphysical covariance: symplectic value {nu.min():.8f} < 1")
    return nu


def gaussian_entropy(v: np.ndarray) -> float:
    """Entropy (nats) of the Gaussian state with covariance ``v`` and any mean."""
    def h(nu):
        if nu <= 1.0 + 1e-14:
            return 0.0
        up, dn = (nu + 1.0) / 2.0, (nu - 1.0) / 2.0
        return up * np.log(up) - dn * np.log(dn)

    return float(sum(h(nu) for nu in symplectic_eigenvalues(v)))


def relent_non_gaussianity(rho: FockRep) -> float:
    """Divergence from the closest Gaussian state, S(rho_G) - S(rho).

    Non-negative (the Gaussian maximizes entropy at fixed moments) whenever
    the moments are trustworthy; raises ``LeakageError`` when more than
    ``LEAK_ERROR`` of per-mode population sits in the top two Fock levels.
    """
    leak = _leakage(rho)
    if leak > LEAK_ERROR:
        raise LeakageError(
            f"truncation leakage {leak:.2e} exceeds {LEAK_ERROR:.0e}; "
            "increase the cutoff"
        )
    data = moments(rho)
    return gaussian_entropy(data.covariance) - von_neumann_entropy(rho.state)
