"""Pure-NumPy implementations of the hot kernels.

Reference semantics for the compiled extension in ``_kernels.pyx``; both
backends expose the same three entry points:

``eigh(a)``
    Hermitian eigendecomposition, ascending eigenvalues.
``relent_fixed(...)``
    Relative-entropy-style objective of a matrix against a fixed spectral
    decomposition of the first argument.
``line_search_dir(...)``
    Golden-section minimization of that objective along a matrix segment.
"""

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def eigh(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    return np.linalg.eigh(a)


def _objective(p, up, plogp, trp, sigma, rel_cutoff, support_tol, trace_coeff):
    s, v = np.linalg.eigh(sigma)
    m = up.conj().T @ v
    ov = m.real**2 + m.imag**2

    pmax = float(p.max(initial=0.0))
    rows = p > pmax * rel_cutoff
    smax = max(float(s[-1]), 0.0) if s.size else 0.0
    pos = s > smax * rel_cutoff

    if rows.any() and not pos.all():
        leak = ov[np.ix_(rows, ~pos)].sum(axis=1)
        if np.any(leak > support_tol):
            return np.inf

    cross = 0.0
    if rows.any() and pos.any():
        cross = float((p[rows, None] * ov[np.ix_(rows, pos)] * np.log(s[pos])[None, :]).sum())
    return plogp - cross + trace_coeff * (float(s.sum()) - trp)


def relent_fixed(p, up, plogp, trp, sigma, rel_cutoff=1e-12, support_tol=1e-10,
                 trace_coeff=1.0):
    """Divergence-type objective of ``sigma`` against a fixed eigensystem.

    Given the spectral data ``(p, up)`` of a PSD operator X (eigenvalues ``p``,
    eigenvector columns ``up``) together with the precomputed ``plogp`` =
    sum_i p_i ln p_i and ``trp`` = Tr X, returns

        plogp - sum_ij |<e_i|f_j>|^2 p_i ln s_j
              + trace_coeff * (Tr sigma - trp)

    where (s_j, f_j) is the eigensystem of ``sigma``.  Eigenvalues at or below
    ``rel_cutoff`` times the top eigenvalue are treated as exact zeros; if any
    eigenvector of X with a significant eigenvalue has squared overlap above
    ``support_tol`` with the kernel of ``sigma``, the value is ``+inf``.

    ``trace_coeff=1`` gives the relative entropy D(X||sigma) up to the support
    convention; ``trace_coeff=0`` drops the affine trace terms.
    """
    return _objective(np.asarray(p, float), np.asarray(up), float(plogp), float(trp),
                      np.asarray(sigma), float(rel_cutoff), float(support_tol),
                      float(trace_coeff))


def line_search_dir(p, up, plogp, trp, base, direction, gmax, xtol=1e-8,
                    rel_cutoff=1e-12, support_tol=1e-10, trace_coeff=1.0):
    """Golden-section search of gamma -> objective(base + gamma*direction).

    Minimizes over gamma in [0, gmax] the objective of ``relent_fixed``; the
    objective is convex along matrix segments, so the search is exact up to
    ``xtol * gmax`` in the argument.  Returns ``(gamma, value)`` for the best
    point seen (endpoints included).
    """
    p = np.asarray(p, float)
    up = np.asarray(up)
    base = np.asarray(base)
    direction = np.asarray(direction)

    def f(g):
        return _objective(p, up, plogp, trp, base + g * direction,
                          rel_cutoff, support_tol, trace_coeff)

    a, b = 0.0, float(gmax)
    best_g, best_f = a, f(a)
    fb = f(b)
    if fb < best_f:
        best_g, best_f = b, fb

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    tol = xtol * max(float(gmax), 1.0)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
            if fc < best_f:
                best_g, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
            if fd < best_f:
                best_g, best_f = d, fd
    return best_g, best_f
