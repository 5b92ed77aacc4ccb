"""Characteristic function of the jump problem and its positive zeros.

The boundary value problem on (0, 1) is rewritten as two half-problems on
(0, d) and (0, 1 - d) (the second in the reflected variable), coupled through
the jump coefficients a1, a2.  Eigenvalues are the squared zeros of

    Delta(lam) = a1 phi1 phi2' + (1/a1) phi1' phi2 + a2 phi1 phi2,

with phi_j the half-problem solutions normalized by phi_j(0) = 1,
phi_j'(0) = h_j, evaluated at d and 1 - d.  Zeros are located by a dense
scan seeded from the zero set of the free problem, refined by bisection and
one Newton polish.  Each located zero is annotated with the index of the
nearest free-problem zero ("slot"), which is the index used by the
asymptotic formulas downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RootLocalizationError
from .ode_core import (DEFAULT_NODES_PER_UNIT, EndpointData, PotentialFn,
                       integrate_ivp, integrate_phi, phi_batch)

_POSITIVE_FLOOR = 1e-9


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem data: jump position d, half-potentials, Robin and jump
    coefficients.  q2 lives on [0, 1 - d] in the reflected variable."""

    d: float
    q1: PotentialFn
    q2: PotentialFn
    h1: float
    h2: float
    a1: float
    a2: float

    def __post_init__(self):
        if not (0.0 < self.d <= 0.5):
            raise DomainError("jump position d must lie in (0, 1/2]")
        if not (self.a1 > 0.0):
            raise DomainError("a1 must be positive")
        if abs(self.q1.length - self.d) > 1e-9:
            raise DomainError("q1 must be defined on [0, d]")
        if abs(self.q2.length - (1.0 - self.d)) > 1e-9:
            raise DomainError("q2 must be defined on [0, 1 - d]")
        for name in ("h1", "h2", "a2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @classmethod
    def free(cls, d: float = 0.5, a1: float = 1.0, a2: float = 0.0,
             h1: float = 0.0, h2: float = 0.0,
             nodes_per_unit: int = DEFAULT_NODES_PER_UNIT):
        return cls(d, PotentialFn.zero(d, nodes_per_unit),
                   PotentialFn.zero(1.0 - d, nodes_per_unit), h1, h2, a1, a2)

    @property
    def left_endpoint(self) -> EndpointData:
        return EndpointData(h=self.h1, length=self.d)

    @property
    def right_endpoint(self) -> EndpointData:
        return EndpointData(h=self.h2, length=1.0 - self.d)


@dataclass(frozen=True)
class Spectrum:
    """Ordered positive square-root eigenvalues with their asymptotic slots."""

    values: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = np.asarray(self.indices, dtype=int)
        if v.ndim != 1 or n.ndim != 1 or v.size != n.size:
            raise DomainError("values and indices must be 1-d of equal length")
        if not np.all(np.isfinite(v)):
            raise DomainError("spectrum values must be finite")
        if np.any(v <= 0):
            raise DomainError("spectrum values must be positive")
        if np.any(np.diff(v) <= 0) or np.any(np.diff(n) <= 0):
            raise DomainError("spectrum must be strictly increasing")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "indices", n)

    def __len__(self) -> int:
        return int(self.values.size)

    def subset(self, slots) -> "Spectrum":
        slots = np.asarray(slots, dtype=int)
        mask = np.isin(self.indices, slots)
        return Spectrum(self.values[mask], self.indices[mask])


def char_delta(spec: ProblemSpec, lam: float) -> float:
    """Characteristic function at a single lam (reference scalar route)."""
    if not math.isfinite(lam):
        raise DomainError("lam must be finite")
    p1, dp1 = integrate_phi(spec.q1, spec.h1, lam, spec.d)
    p2, dp2 = integrate_phi(spec.q2, spec.h2, lam, 1.0 - spec.d)
    return spec.a1 * p1 * dp2 + dp1 * p2 / spec.a1 + spec.a2 * p1 * p2


def char_delta_batch(spec: ProblemSpec, lams) -> np.ndarray:
    """Characteristic function on an array of lam values (production route)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    p1, dp1 = phi_batch(spec.q1, spec.h1, lams, spec.d)
    p2, dp2 = phi_batch(spec.q2, spec.h2, lams, 1.0 - spec.d)
    return spec.a1 * p1 * dp2 + dp1 * p2 / spec.a1 + spec.a2 * p1 * p2


def char_delta_direct(spec: ProblemSpec, lam: float) -> float:
    """Shoot through the jump conditions across [0, 1]; validation route.

    Equals char_delta identically (the two are the same Wronskian), so any
    disagreement beyond the ODE tolerance indicates an implementation defect.
    """
    u, du = integrate_phi(spec.q1, spec.h1, lam, spec.d)
    u_plus = spec.a1 * u
    du_plus = du / spec.a1 + spec.a2 * u
    # reflected right potential: q(x) = q2(1 - x) for x in (d, 1)
    q_right = PotentialFn(spec.q2.x, spec.q2.values[::-1])
    y, dy = integrate_ivp(q_right, u_plus, du_plus, lam, 1.0 - spec.d)
    return dy + spec.h2 * y


def _free_delta_reduced(d: float, a1: float, lams: np.ndarray) -> np.ndarray:
    """Free-problem characteristic function with the -lam prefactor removed."""
    return (a1 * np.cos(lams * d) * np.sin(lams * (1.0 - d))
            + np.sin(lams * d) * np.cos(lams * (1.0 - d)) / a1)


def _scan_and_refine(fun, lo: float, hi: float, step: float,
                     bisect_width: float = 1e-12, newton_step: float = 1e-6):
    """All sign-change zeros of a vectorized function on [lo, hi]."""
    grid = np.arange(lo, hi + step, step)
    vals = fun(grid)
    sign = np.sign(vals)
    flip = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    exact = np.nonzero(vals == 0.0)[0]
    a = grid[flip].copy()
    b = grid[flip + 1].copy()
    fa = vals[flip].copy()
    it = max(1, int(math.ceil(math.log2(max(step, 1e-15) / bisect_width))))
    for _ in range(it):
        mid = 0.5 * (a + b)
        fm = fun(mid)
        left = fa * fm <= 0
        b = np.where(left, mid, b)
        a = np.where(left, a, mid)
        fa = np.where(left, fa, fm)
    roots = 0.5 * (a + b)
    if roots.size:
        # one Newton polish with a central-difference derivative
        f0 = fun(roots)
        der = (fun(roots + newton_step) - fun(roots - newton_step)) / (2 * newton_step)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = roots - f0 / der
        ok = np.isfinite(cand) & (cand > a) & (cand < b)
        roots = np.where(ok, cand, roots)
    roots = np.concatenate([roots, grid[exact]])
    return np.sort(roots)


def model_zeros(d: float, a1: float, N: int) -> np.ndarray:
    """First N nonnegative zeros of the free jump problem (q = 0, h = 0,
    a2 = 0); these seed brackets and define the slot numbering."""
    if not (0.0 < d <= 0.5) or a1 <= 0 or N < 1:
        raise DomainError("need 0 < d <= 1/2, a1 > 0, N >= 1")
    if abs(d - 0.5) < 1e-14:
        return math.pi * np.arange(N, dtype=float)
    # zero density is 1/pi per unit lam; scan with a safety margin
    hi = (N + 3) * math.pi
    step = min(math.pi / 8.0, math.pi * d / 4.0)
    roots = _scan_and_refine(lambda g: _free_delta_reduced(d, a1, g),
                             step * 1e-3, hi, step)
    while roots.size < N - 1:
        hi *= 1.5
        step *= 0.5
        roots = _scan_and_refine(lambda g: _free_delta_reduced(d, a1, g),
                                 step * 1e-3, hi, step)
    return np.concatenate([[0.0], roots])[:N]


def model_zeros_quarter(a1: float, N: int) -> np.ndarray:
    """First N nonnegative zeros of the d = 1/4 model function
    (lam/2) * ((a1 + 1/a1) sin(lam) + (a1 - 1/a1) sin(lam/2))."""
    if a1 <= 0 or N < 1:
        raise DomainError("need a1 > 0 and N >= 1")
    A = a1 + 1.0 / a1
    B = a1 - 1.0 / a1

    def g(lam):
        return A * np.sin(lam) + B * np.sin(lam / 2.0)

    hi = (N + 2) * math.pi
    roots = _scan_and_refine(g, 1e-4, hi, math.pi / 64.0)
    return np.concatenate([[0.0], roots])[:N]


def _assign_slots(roots: np.ndarray, model: np.ndarray) -> np.ndarray:
    """Monotone nearest-model assignment of located roots to slot numbers."""
    slots = np.empty(roots.size, dtype=int)
    j = 0
    for i, r in enumerate(roots):
        while j + 1 < model.size and abs(model[j + 1] - r) <= abs(model[j] - r):
            j += 1
        slots[i] = j
        j += 1
        if j >= model.size:
            # extend the numbering with the asymptotic gap
            gap = model[-1] - model[-2] if model.size > 1 else math.pi
            model = np.concatenate([model, [model[-1] + gap]])
    return slots


def eigenvalues(spec: ProblemSpec, N: int, scan_step: float | None = None,
                max_retries: int = 3) -> Spectrum:
    """First N positive zeros of the characteristic function.

    Brackets come from a sign-change scan seeded by the free-problem zero
    spacing; each bracket is narrowed by bisection to 1e-12 and polished by
    one Newton step.  Raises RootLocalizationError if, after repeatedly
    refining the scan, fewer than N zeros are found.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    model = model_zeros(spec.d, spec.a1, N + 3)
    hi = model[-1] + math.pi
    step = scan_step or min(math.pi / 8.0, math.pi * spec.d / 4.0)

    def fun(g):
        return char_delta_batch(spec, g)

    roots = _scan_and_refine(fun, 1e-6, hi, step)
    roots = roots[roots > _POSITIVE_FLOOR]
    tries = 0
    while roots.size < N and tries < max_retries:
        tries += 1
        step *= 0.25
        hi += math.pi
        roots = _scan_and_refine(fun, 1e-6, hi, step)
        roots = roots[roots > _POSITIVE_FLOOR]
    if roots.size < N:
        raise RootLocalizationError(int(roots.size))
    roots = roots[:N + 2] if roots.size > N + 2 else roots
    slots = _assign_slots(roots, model)
    return Spectrum(roots[:N], slots[:N])


def shift_spectrum(spec: ProblemSpec, c: float) -> ProblemSpec:
    """Shift both potentials by c, moving every squared eigenvalue by c.

    Used to make all square-root eigenvalues positive when the lowest
    eigenvalue is nonpositive; record c and undo the shift at the end of an
    inverse pipeline."""
    return ProblemSpec(spec.d, spec.q1.shifted(c), spec.q2.shifted(c),
                       spec.h1, spec.h2, spec.a1, spec.a2)


def shifted_values(spectrum: Spectrum, c: float) -> Spectrum:
    """Square-root eigenvalues after shifting the squared spectrum by c."""
    moved = spectrum.values**2 + c
    if np.any(moved <= 0):
        raise DomainError("shift makes the squared spectrum nonpositive")
    return Spectrum(np.sqrt(moved), spectrum.indices)
