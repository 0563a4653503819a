"""Entropic functionals with exact support semantics.

The relative entropy follows the double-sum definition over spectral data,
with the conventions D(0||0) = 0 and D(X||0) = +inf for X != 0, and value
+inf whenever the support of the first argument is not contained in the
support of the second.  Infinite values are an explicit tagged quantity
(`ExtendedReal`), never a floating-point overflow.

`log_trace_exp` is the perturbed log-partition functional
ln Tr exp(ln xi + X) restricted to the support of xi; it is concave and
monotonically non-decreasing in xi and is the inner building block of the
dual lower-bound certificates in `relent.solver`.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NotPSDError
from .operators import (
    SUPPORT_CUTOFF,
    SUPPORT_OVERLAP_TOL,
    HermitianOp,
    eig_hermitian,
)


@dataclass(frozen=True)
class ExtendedReal:
    """A real number or a tagged +infinity."""

    finite: bool
    value: float = 0.0

    @staticmethod
    def of(x):
        return ExtendedReal(True, float(x))

    @staticmethod
    def infinity():
        return ExtendedReal(False, math.inf)

    def __float__(self):
        return self.value if self.finite else math.inf

    def __repr__(self):
        return repr(self.value) if self.finite else "+inf"


@dataclass(frozen=True)
class SpectrumSummary:
    x_min: float
    x_max: float
    y_min: float
    y_max: float


@dataclass(frozen=True)
class EntropyReport:
    """Relative-entropy value together with the support verdict."""

    value: ExtendedReal
    support_ok: bool
    spectrum_summary: SpectrumSummary


def _psd_spectral(op: HermitianOp, what):
    es = eig_hermitian(op)
    w = es.eigenvalues
    top = max(float(w[-1]), 0.0)
    if float(w[0]) < -SUPPORT_CUTOFF * max(top, 1.0):
        raise NotPSDError(f"{what} has negative eigenvalue {float(w[0]):.3e}")
    w = np.where(w > SUPPORT_CUTOFF * top, w, 0.0)
    return w, es.eigenvectors


def von_neumann_entropy(x: HermitianOp) -> float:
    """S(X) = -Tr X ln X in nats, with 0 ln 0 = 0."""
    w, _ = _psd_spectral(x, "entropy argument")
    pos = w > 0
    return float(-(w[pos] * np.log(w[pos])).sum())


def relative_entropy(x: HermitianOp, y: HermitianOp) -> EntropyReport:
    """Relative entropy D(X||Y) of PSD operators, in nats.

    Evaluates sum_ij |<e_i|f_j>|^2 (x_i ln x_i - x_i ln y_j + y_j - x_i) over
    the spectral data of both arguments, which for trace-class operators
    equals Tr[X(ln X - ln Y) + Y - X].  The value is +inf when supp X is not
    contained in supp Y (an eigenvector of X with significant eigenvalue
    overlapping ker Y by more than ``SUPPORT_OVERLAP_TOL``), and follows the
    conventions D(0||0) = 0 and D(X||0) = +inf for X != 0.
    """
    wx, vx = _psd_spectral(x, "first argument")
    wy, vy = _psd_spectral(y, "second argument")
    summary = SpectrumSummary(float(wx[0]), float(wx[-1]), float(wy[0]), float(wy[-1]))

    rows = wx > 0
    cols = wy > 0
    if not rows.any():
        # X = 0: distance is just Tr Y, zero iff Y = 0.
        return EntropyReport(ExtendedReal.of(float(wy.sum())), True, summary)

    ov = np.abs(vx.conj().T @ vy) ** 2
    if not cols.all():
        leak = ov[np.ix_(rows, ~cols)].sum(axis=1)
        if np.any(leak > SUPPORT_OVERLAP_TOL):
            return EntropyReport(ExtendedReal.infinity(), False, summary)

    xlogx = float((wx[rows] * np.log(wx[rows])).sum())
    cross = float((wx[rows, None] * ov[np.ix_(rows, cols)] * np.log(wy[cols])[None, :]).sum())
    val = xlogx - cross + float(wy.sum()) - float(wx.sum())
    return EntropyReport(ExtendedReal.of(val), True, summary)


def binary_entropy(p: float) -> float:
    """-p ln p - (1-p) ln(1-p) on [0, 1], zero at the endpoints."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy argument {p} outside [0, 1]")
    out = 0.0
    if p > 0.0:
        out -= p * math.log(p)
    if p < 1.0:
        out -= (1.0 - p) * math.log(1.0 - p)
    return out


def g_func(x: float) -> float:
    """(x+1) ln(x+1) - x ln x for x >= 0, with g(0) = 0."""
    if x < 0.0:
        raise ValueError(f"g_func argument {x} is negative")
    if x == 0.0:
        return 0.0
    return (x + 1.0) * math.log(x + 1.0) - x * math.log(x)


def log_trace_exp(xi: HermitianOp, x: HermitianOp) -> float:
    """ln Tr exp(ln xi + X) on the support of xi.

    With P the support projector of xi, evaluates
    ln Tr exp(P ln(P xi P) P + P X P).  Concave and monotonically
    non-decreasing as a function of xi.  Raises for xi = 0.
    """
    w, v = _psd_spectral(xi, "log_trace_exp base")
    keep = w > 0
    if not keep.any():
        raise ValueError("log_trace_exp is undefined for the zero operator")
    vk = v[:, keep]
    block = np.diag(np.log(w[keep])) + vk.conj().T @ x.mat @ vk
    mu = np.linalg.eigvalsh((block + block.conj().T) / 2.0)
    return float(logsumexp(mu))


def petz_dual_value(rho: HermitianOp, sigma: HermitianOp, x: HermitianOp) -> float:
    """Tr rho X - ln Tr exp(ln sigma + X); a lower bound on D(rho||sigma)."""
    tr = float(np.real(np.trace(rho.mat @ x.mat)))
    return tr - log_trace_exp(sigma, x)


def almost_convexity_gap(rho: HermitianOp, sigma: HermitianOp, omega_ref, p: float,
                         cfg=None) -> float:
    """Slack of the mixing lower bound for divergence-from-a-target.

    For f(.) = D(.||omega) when ``omega_ref`` is an operator, or
    f(.) = min over the family ``omega_ref`` when it is a free-set
    description, returns

        f(p rho + (1-p) sigma) - [p f(rho) + (1-p) f(sigma) - h2(p)]

    which is non-negative up to solver tolerance.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("mixing weight must lie strictly between 0 and 1")
    mix = rho.with_mat(p * rho.mat + (1.0 - p) * sigma.mat)
    if isinstance(omega_ref, HermitianOp):
        def f(state):
            return float(relative_entropy(state, omega_ref).value)
    else:
        from .solver import SolverConfig, minimize_primal

        cfg = cfg or SolverConfig()

        def f(state):
            return minimize_primal(state, omega_ref, cfg).upper

    return f(mix) - (p * f(rho) + (1.0 - p) * f(sigma) - binary_entropy(p))
