"""Energy-constrained continuity bounds.

``gibbs_solve`` computes the maximum entropy attainable at a given mean
energy (realized by the Gibbs state, whose inverse temperature is found by
bisection); the resulting entropy-ceiling function F_H feeds the bound
evaluators.  ``g_min`` builds the least regular envelope G >= F_H with
G(E)/sqrt(E) non-increasing, and ``g_oscillator`` is the closed-form
envelope for a multimode harmonic oscillator.

The bipartite and multipartite bound evaluators minimize their bracketed
expressions over the free parameter t by a log-grid-seeded golden-section
search; an independent dense scan reproduces the values to high accuracy
(see the test suite).
"""

import math
from dataclasses import dataclass

import numpy as np

from .entropy import g_func
from .errors import DimensionError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class OscillatorSpec:
    """Harmonic modes with positive frequencies; grounded by construction."""

    modes: int
    freqs: tuple

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.freqs)
        if self.modes < 1 or len(freqs) != self.modes or any(w <= 0 for w in freqs):
            raise DimensionError("oscillator needs one positive frequency per mode")
        object.__setattr__(self, "freqs", freqs)

    @property
    def ground_energy(self):
        """Half the frequency sum (the zero-point offset in the envelope)."""
        return 0.5 * sum(self.freqs)

    @property
    def mean_frequency(self):
        """Geometric mean of the frequencies."""
        return float(np.prod(self.freqs)) ** (1.0 / self.modes)


@dataclass(frozen=True)
class ExplicitSpectrum:
    """Grounded truncated spectrum, treated as exact."""

    eigenvalues: tuple

    def __post_init__(self):
        ev = tuple(sorted(float(e) for e in self.eigenvalues))
        if len(ev) < 2:
            raise DimensionError("spectrum needs at least two levels")
        if abs(ev[0]) > 1e-12:
            raise DimensionError(f"spectrum must be grounded (min level {ev[0]:.3e})")
        object.__setattr__(self, "eigenvalues", ev)


@dataclass(frozen=True)
class BoundRequest:
    """Inputs of the continuity-bound evaluators."""

    eps: float
    energy: float
    d0: int = 2
    m: int = 2
    s: int = 1
    variant: str = "bipartite"

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if self.energy <= 0.0:
            raise ValueError("energy must be positive")
        if self.variant not in ("bipartite", "multipartite"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "multipartite" and self.s not in (self.m - 1, self.m):
            raise ValueError("s must equal m-1 or m")


def _osc_mean_energy(spec, lam):
    total = 0.0
    for w in spec.freqs:
        x = lam * w
        if x > 700.0:
            continue
        total += w / math.expm1(x)
    return total


def _osc_entropy(spec, lam):
    s = 0.0
    for w in spec.freqs:
        x = lam * w
        if x > 700.0:
            continue
        n = 1.0 / math.expm1(x)
        s += (n + 1.0) * math.log(n + 1.0) - n * math.log(n)
    return s


def _spec_stats(ev, lam):
    e = np.asarray(ev)
    w = np.exp(-lam * e)
    z = float(w.sum())
    mean = float((e * w).sum()) / z
    return mean, math.log(z)


def gibbs_solve(ham, energy: float):
    """Inverse temperature and entropy of the Gibbs state at mean energy E.

    Solves E * Tr exp(-lam H) = Tr H exp(-lam H) for lam by bisection to a
    relative tolerance of 1e-10 and returns (lam, entropy); the entropy is
    the maximum over all states with energy at most E.  For an explicit
    spectrum, E must lie strictly between 0 and the spectrum mean; any
    positive E is attainable for an oscillator.
    """
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    if isinstance(ham, OscillatorSpec):
        mean = lambda lam: _osc_mean_energy(ham, lam)
    elif isinstance(ham, ExplicitSpectrum):
        flat_mean = float(np.mean(ham.eigenvalues))
        if energy > flat_mean * (1.0 + 1e-12):
            raise ValueError(
                f"energy {energy} is not attainable by a Gibbs state of this "
                f"spectrum (must not exceed the flat mean {flat_mean:.6g})"
            )
        if energy >= flat_mean * (1.0 - 1e-12):
            # infinite temperature: the ceiling saturates at ln(levels)
            return 0.0, math.log(len(ham.eigenvalues))
        mean = lambda lam: _spec_stats(ham.eigenvalues, lam)[0]
    else:
        raise TypeError("ham must be OscillatorSpec or ExplicitSpectrum")

    lo = 1.0
    while mean(lo) <= energy:
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError("failed to bracket the inverse temperature from below")
    hi = max(2.0 * lo, 1.0)
    while mean(hi) >= energy:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("failed to bracket the inverse temperature from above")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = mean(mid)
        if val > energy:
            lo = mid
        else:
            hi = mid
        if abs(val - energy) <= 1e-10 * energy:
            lam = mid
            break
    else:
        lam = 0.5 * (lo + hi)

    if isinstance(ham, OscillatorSpec):
        return lam, _osc_entropy(ham, lam)
    _, logz = _spec_stats(ham.eigenvalues, lam)
    return lam, lam * energy + logz


def entropy_ceiling(ham, energy: float) -> float:
    """F_H(E): the Gibbs entropy at mean energy E (zero at E = 0)."""
    if energy == 0.0:
        return 0.0
    return gibbs_solve(ham, energy)[1]


def g_min(ham, energy: float, e_max: float, n_grid: int = 200) -> float:
    """Least envelope of F_H with G(E)/sqrt(E) non-increasing.

    Evaluates sqrt(E) * sup of F_H(E')/sqrt(E') over E' in [E, e_max] on a
    geometric grid; the sup is eventually non-increasing because F_H grows
    slower than sqrt, so truncation at e_max is a best-effort envelope.
    """
    if e_max < energy:
        raise ValueError("e_max must be at least the evaluation energy")
    grid = np.geomspace(energy, e_max, n_grid)
    sup = max(entropy_ceiling(ham, e) / math.sqrt(e) for e in grid)
    return math.sqrt(energy) * sup


def g_oscillator(spec: OscillatorSpec, energy: float) -> float:
    """Closed-form entropy envelope of an oscillator bank.

    l * (ln((E + sum(w)) / (l * geomean(w))) + 1); dominates the Gibbs
    entropy at every energy and has all the regularity needed by the bound
    evaluators.
    """
    if energy < 0.0:
        raise ValueError("energy must be non-negative")
    l = spec.modes
    return l * (math.log((energy + 2.0 * spec.ground_energy) / (l * spec.mean_frequency)) + 1.0)


def _g_inverse(g, y):
    if y <= g(0.0):
        raise ValueError("value below G(0); inverse undefined")
    hi = 1.0
    while g(hi) < y:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("failed to bracket the envelope inverse")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def _golden_min(f, lo, hi, seeds=64):
    grid = np.geomspace(max(lo, hi * 1e-8), hi, seeds)
    vals = [f(t) for t in grid]
    i = int(np.argmin(vals))
    a = grid[i - 1] if i > 0 else max(lo, grid[0] * 1e-4)
    b = grid[i + 1] if i + 1 < len(grid) else hi
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    best_t, best_v = (c, fc) if fc < fd else (d, fd)
    if vals[i] < best_v:
        best_t, best_v = grid[i], vals[i]
    while b - a > 1e-13 * max(hi, 1.0):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
            if fc < best_v:
                best_t, best_v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
            if fd < best_v:
                best_t, best_v = d, fd
    return best_v, best_t


def _bipartite_expr(t, eps, energy, g, extra):
    return (eps * (1.0 + 4.0 * t) * (g(energy / (eps * t) ** 2) + extra + LN2)
            + 2.0 * g_func(eps * t) + g_func(eps * (1.0 + 2.0 * t)))


def bipartite_bound(req: BoundRequest, g):
    """Continuity bound for an energy constraint on one party of a pair.

    Minimizes over t in (0, T] the expression
    eps (1+4t) (G(E/(eps t)^2) + 1/d0 + ln 2) + 2 g(eps t) + g(eps (1+2t)),
    with T = (1/eps) min(1, sqrt(E / G^-1(ln d0))); d0 must satisfy
    ln d0 > G(0).  Returns (value, t_star).
    """
    if math.log(req.d0) <= g(0.0):
        raise ValueError(f"invalid d0 = {req.d0}: ln d0 must exceed G(0) = {g(0.0):.6g}")
    gamma0 = _g_inverse(g, math.log(req.d0))
    cap = (1.0 / req.eps) * min(1.0, math.sqrt(req.energy / gamma0))
    return _golden_min(lambda t: _bipartite_expr(t, req.eps, req.energy, g, 1.0 / req.d0),
                       0.0, cap)


def bipartite_bound_oscillator(req: BoundRequest, spec: OscillatorSpec):
    """Oscillator specialization of ``bipartite_bound``.

    Uses the closed-form envelope, replaces the 1/d0 constant by exp(-l),
    and caps t at T = (1/eps) min(1, sqrt(E / E0)) with E0 the zero-point
    energy.  Returns (value, t_star).
    """
    cap = (1.0 / req.eps) * min(1.0, math.sqrt(req.energy / spec.ground_energy))
    extra = math.exp(-spec.modes)
    return _golden_min(
        lambda t: _bipartite_expr(t, req.eps, req.energy,
                                  lambda e: g_oscillator(spec, e), extra),
        0.0, cap)


def multipartite_bound_sqrt(req: BoundRequest, f_h) -> float:
    """Square-root-type multipartite bound.

    Evaluates ((m-1)/s) sqrt(2 eps) F_[s](s E / eps) + g(sqrt(2 eps)), where
    F_[s] is the entropy ceiling of s identical parties, F_[s](E) = s F_H(E/s).
    """
    if req.s not in (req.m - 1, req.m):
        raise ValueError("s must equal m-1 or m")
    s = req.s
    f_joint = s * f_h(req.energy / req.eps)
    return ((req.m - 1) / s) * math.sqrt(2.0 * req.eps) * f_joint \
        + g_func(math.sqrt(2.0 * req.eps))


def multipartite_bound_t(req: BoundRequest, g):
    """Refined multipartite bound with a free parameter t in (0, 1/eps).

    Minimizes (m-1)[(eps + eps^2 t^2) G(sE/(eps t)^2) + 2 sqrt(2 eps t)
    G(E/(eps t))] + g(eps + eps^2 t^2) + 2 g(sqrt(2 eps t)) and returns
    (value, t_star).  Requires identical single-party ceilings.
    """
    if req.s not in (req.m - 1, req.m):
        raise ValueError("s must equal m-1 or m")
    eps, energy, m, s = req.eps, req.energy, req.m, req.s

    def expr(t):
        et = eps * t
        return ((m - 1) * ((eps + et**2) * g(s * energy / et**2)
                           + 2.0 * math.sqrt(2.0 * et) * g(energy / et))
                + g_func(eps + et**2) + 2.0 * g_func(math.sqrt(2.0 * et)))

    cap = (1.0 / eps) * (1.0 - 1e-12)
    return _golden_min(expr, 0.0, cap)
