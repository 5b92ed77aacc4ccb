"""Moment system for the unknown kernel pair K = (K1, K2).

The working Hilbert space is H = L2(0, d) + L2(0, d) with the componentwise
scalar product.  Each located square-root eigenvalue lam_n contributes one
basis vector-function

    v_n(x) = ( c_sin sin(lam_n x), c_cos cos(lam_n x) ),
    c_sin = (a1 phi2'(1-d, lam_n) + a2 phi2(1-d, lam_n)) / lam_n,
    c_cos = phi2(1-d, lam_n) / a1,

and one scalar f_n, and the kernel pair solves (K, v_n)_H = f_n for all n.
A truncated Gram solve replaces the biorthonormal expansion: the Gram matrix
is assembled from exact trigonometric antiderivatives, so the reported
residuals |(K, v_n) - f_n| reflect only the linear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BasisDegenerateError, DomainError
from .forward_spectrum import model_zeros
from .ode_core import DEFAULT_NODES_PER_UNIT, PotentialFn, integrate_phi, phi_batch
from .trig import filon_cos, filon_sin, int_cos_cos, int_sin_sin

MIN_EIGENVALUE_GAP = 1e-6


@dataclass(frozen=True)
class TrigModes:
    """Exact trigonometric-sum representation of a kernel pair."""

    lambdas: np.ndarray
    amp_sin: np.ndarray
    amp_cos: np.ndarray


@dataclass(frozen=True)
class KernelPair:
    """Element of H sampled on a common grid over [0, d]; solver outputs also
    carry their exact trig-sum form in ``modes``."""

    d: float
    K1: PotentialFn
    K2: PotentialFn
    modes: TrigModes | None = None

    def __post_init__(self):
        if abs(self.K1.length - self.d) > 1e-9 or abs(self.K2.length - self.d) > 1e-9:
            raise DomainError("kernel components must live on [0, d]")
        if self.K1.nodes != self.K2.nodes:
            raise DomainError("kernel components must share one grid")

    @classmethod
    def zero(cls, d: float, nodes_per_unit: int = DEFAULT_NODES_PER_UNIT):
        return cls(d, PotentialFn.zero(d, nodes_per_unit),
                   PotentialFn.zero(d, nodes_per_unit))


@dataclass(frozen=True)
class BasisElement:
    """Analytic parameters of one basis vector-function on [0, d].

    ``lambda_`` is positive for spectral elements; the model family from the
    free problem may carry lambda_ = 0 (its sine component then vanishes).
    """

    n: int
    lambda_: float
    c_sin: float
    c_cos: float
    d: float

    def __post_init__(self):
        if self.lambda_ < 0 or not math.isfinite(self.lambda_):
            raise DomainError("basis frequency must be finite and >= 0")
        if not (math.isfinite(self.c_sin) and math.isfinite(self.c_cos)):
            raise DomainError("basis coefficients must be finite")
        if not (0.0 < self.d <= 0.5):
            raise DomainError("basis interval must be (0, d], d in (0, 1/2]")

    def components(self, x):
        x = np.asarray(x, dtype=float)
        return (self.c_sin * np.sin(self.lambda_ * x),
                self.c_cos * np.cos(self.lambda_ * x))


@dataclass(frozen=True)
class MainEqRHS:
    n: int
    f: float

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise DomainError("right-hand side must be finite")


def build_vn(q2: PotentialFn, h2: float, a1: float, a2: float, d: float,
             lambda_n: float, n: int) -> BasisElement:
    """Basis vector-function for one eigenvalue (scalar reference route)."""
    if lambda_n <= 0:
        raise DomainError("lambda_n must be positive")
    if a1 <= 0:
        raise DomainError("a1 must be positive")
    p2, dp2 = integrate_phi(q2, h2, lambda_n, 1.0 - d)
    return BasisElement(n=n, lambda_=lambda_n,
                        c_sin=(a1 * dp2 + a2 * p2) / lambda_n,
                        c_cos=p2 / a1, d=d)


def _fn_value(lam, d, omega1, c_sin, c_cos):
    # (K, v_n) = f_n once the zero-order terms of phi1 are moved to the right
    A = lam * math.cos(lam * d) + omega1 * math.sin(lam * d)
    B = -lam * math.sin(lam * d) + omega1 * math.cos(lam * d)
    return -(A * c_sin + B * c_cos)


def build_fn(q2: PotentialFn, h2: float, a1: float, a2: float, d: float,
             omega1: float, lambda_n: float, n: int = -1) -> MainEqRHS:
    """Right-hand side of the moment system for one eigenvalue."""
    v = build_vn(q2, h2, a1, a2, d, lambda_n, n)
    return MainEqRHS(n=n, f=_fn_value(lambda_n, d, omega1, v.c_sin, v.c_cos))


def build_basis_and_rhs(q2: PotentialFn, h2: float, a1: float, a2: float,
                        d: float, omega1: float, lams, slots):
    """Vectorized construction of all basis elements and right-hand sides."""
    lams = np.asarray(lams, dtype=float)
    slots = np.asarray(slots, dtype=int)
    p2, dp2 = phi_batch(q2, h2, lams, 1.0 - d)
    c_sin = (a1 * dp2 + a2 * p2) / lams
    c_cos = p2 / a1
    basis = [BasisElement(n=int(s), lambda_=float(l), c_sin=float(cs),
                          c_cos=float(cc), d=d)
             for s, l, cs, cc in zip(slots, lams, c_sin, c_cos)]
    rhs = [MainEqRHS(n=int(s), f=float(_fn_value(l, d, omega1, cs, cc)))
           for s, l, cs, cc in zip(slots, lams, c_sin, c_cos)]
    return basis, rhs


def model_element(slot: int, d: float, a1: float,
                  model: np.ndarray | None = None) -> BasisElement:
    """Free-problem basis element at the model zero of the given slot."""
    if model is None:
        model = model_zeros(d, a1, slot + 1)
    lam0 = float(model[slot])
    if lam0 == 0.0:
        return BasisElement(n=slot, lambda_=0.0, c_sin=0.0, c_cos=1.0 / a1, d=d)
    return BasisElement(n=slot, lambda_=lam0,
                        c_sin=-a1 * math.sin(lam0 * (1.0 - d)),
                        c_cos=math.cos(lam0 * (1.0 - d)) / a1, d=d)


def inner_product(u, v: BasisElement) -> float:
    """Scalar product in H = L2(0, d) + L2(0, d).

    Basis-basis pairs use exact trig antiderivatives.  Kernel-basis pairs use
    the exact integral of the stored piecewise-linear samples, or the trig
    closed form when the kernel carries its ``modes`` representation.
    """
    if isinstance(u, BasisElement):
        if abs(u.d - v.d) > 1e-12:
            raise DomainError("mismatched intervals in inner product")
        return float(u.c_sin * v.c_sin * int_sin_sin(u.lambda_, v.lambda_, u.d)
                     + u.c_cos * v.c_cos * int_cos_cos(u.lambda_, v.lambda_, u.d))
    if isinstance(u, KernelPair):
        if abs(u.d - v.d) > 1e-12:
            raise DomainError("mismatched intervals in inner product")
        if u.modes is not None:
            m = u.modes
            s = np.sum(m.amp_sin * int_sin_sin(m.lambdas, v.lambda_, u.d))
            c = np.sum(m.amp_cos * int_cos_cos(m.lambdas, v.lambda_, u.d))
            return float(v.c_sin * s + v.c_cos * c)
        return (v.c_sin * float(filon_sin(u.K1.x, u.K1.values, v.lambda_))
                + v.c_cos * float(filon_cos(u.K2.x, u.K2.values, v.lambda_)))
    raise DomainError(f"unsupported left operand {type(u).__name__}")


def gram_matrix(basis: list[BasisElement]) -> np.ndarray:
    """Gram matrix of the basis in H from exact antiderivatives."""
    d = basis[0].d
    lam = np.array([b.lambda_ for b in basis])
    cs = np.array([b.c_sin for b in basis])
    cc = np.array([b.c_cos for b in basis])
    L1, L2 = np.meshgrid(lam, lam, indexing="ij")
    return (np.outer(cs, cs) * int_sin_sin(L1, L2, d)
            + np.outer(cc, cc) * int_cos_cos(L1, L2, d))


def normalized_condition(G: np.ndarray) -> float:
    scale = 1.0 / np.sqrt(np.diag(G))
    return float(np.linalg.cond(G * np.outer(scale, scale)))


def solve_K(basis: list[BasisElement], rhs: list[MainEqRHS], N: int,
            nodes_per_unit: int = DEFAULT_NODES_PER_UNIT,
            cond_limit: float = 1e8) -> KernelPair:
    """Galerkin solution of the moment system truncated at N.

    K_N = sum c_m v_m with Gram * c = f.  Refuses nearly coincident
    frequencies and Gram matrices whose normalized condition number exceeds
    ``cond_limit`` (the truncated family is then not a usable frame).
    """
    if N > len(basis) or N > len(rhs):
        raise DomainError("N exceeds the number of built elements")
    basis = basis[:N]
    d = basis[0].d
    f = np.array([r.f for r in rhs[:N]])
    lam = np.array([b.lambda_ for b in basis])
    if lam.size > 1 and np.min(np.diff(np.sort(lam))) < MIN_EIGENVALUE_GAP:
        raise BasisDegenerateError(
            "basis degenerate: eigenvalue gap below 1e-6 (simplicity violated)")
    G = gram_matrix(basis)
    cond = normalized_condition(G)
    if not np.isfinite(cond) or cond > cond_limit:
        raise BasisDegenerateError(
            f"basis degenerate - not a Riesz frame at this truncation "
            f"(normalized Gram condition {cond:.3e})")
    c = np.linalg.solve(G, f)
    amp_sin = c * np.array([b.c_sin for b in basis])
    amp_cos = c * np.array([b.c_cos for b in basis])
    n = max(2, int(round(d * nodes_per_unit)))
    x = np.linspace(0.0, d, n + 1)
    K1 = np.sin(np.outer(x, lam)) @ amp_sin
    K2 = np.cos(np.outer(x, lam)) @ amp_cos
    return KernelPair(d=d, K1=PotentialFn(x, K1), K2=PotentialFn(x, K2),
                      modes=TrigModes(lam, amp_sin, amp_cos))


def main_equation_residual(K: KernelPair, basis: list[BasisElement],
                           rhs: list[MainEqRHS]) -> float:
    """max_n |(K, v_n) - f_n| over the built range."""
    return float(max(abs(inner_product(K, b) - r.f)
                     for b, r in zip(basis, rhs)))


def psi_from_K(K: KernelPair, lam):
    """(psi1, psi2) = (sine transform of K1, cosine transform of K2) on [0, d].

    Exact for the stored representation; psi1 is odd and psi2 even in lam by
    construction.
    """
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if K.modes is not None:
        m = K.modes
        psi1 = int_sin_sin(m.lambdas[:, None], lam_arr[None, :], K.d).T @ m.amp_sin
        psi2 = int_cos_cos(m.lambdas[:, None], lam_arr[None, :], K.d).T @ m.amp_cos
    else:
        psi1 = np.atleast_1d(filon_sin(K.K1.x, K.K1.values, lam_arr))
        psi2 = np.atleast_1d(filon_cos(K.K2.x, K.K2.values, lam_arr))
    if scalar:
        return float(psi1[0]), float(psi2[0])
    return psi1, psi2


def closeness_terms(basis: list[BasisElement], a1: float, d: float) -> np.ndarray:
    """||v_n - v_n^0||_H^2 per element, against the free-model family."""
    max_slot = max(b.n for b in basis)
    model = model_zeros(d, a1, max_slot + 1)
    out = np.empty(len(basis))
    for i, b in enumerate(basis):
        b0 = model_element(b.n, d, a1, model)
        ss = (b.c_sin**2 * int_sin_sin(b.lambda_, b.lambda_, d)
              - 2 * b.c_sin * b0.c_sin * int_sin_sin(b.lambda_, b0.lambda_, d)
              + b0.c_sin**2 * int_sin_sin(b0.lambda_, b0.lambda_, d))
        cc = (b.c_cos**2 * int_cos_cos(b.lambda_, b.lambda_, d)
              - 2 * b.c_cos * b0.c_cos * int_cos_cos(b.lambda_, b0.lambda_, d)
              + b0.c_cos**2 * int_cos_cos(b0.lambda_, b0.lambda_, d))
        out[i] = float(ss + cc)
    return out


def basis_diagnostics(basis: list[BasisElement], a1: float, d: float):
    """(closeness, gram_condition): accumulated squared distance to the model
    family, and the condition number of the diagonally normalized Gram."""
    if len(basis) < 8:
        raise DomainError("diagnostics need at least 8 elements")
    closeness = float(np.sum(closeness_terms(basis, a1, d)))
    cond = normalized_condition(gram_matrix(basis))
    return closeness, cond


@dataclass(frozen=True)
class CompletenessReport:
    """Advisory density check for a subspectrum index set."""

    density: float
    threshold: float
    passes: bool
    gram_condition: float


def completeness_heuristic(indices, d: float, lambdas,
                           basis: list[BasisElement] | None = None) -> CompletenessReport:
    """Empirical counting density of the chosen subsequence against the
    density 2d/pi needed for exponential-system completeness on (-2d, 2d);
    advisory only.  Without an explicit basis, the Gram condition is taken
    for the free-model coefficient pattern at the supplied frequencies."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size < 2:
        raise DomainError("need at least 2 values")
    Lam = float(np.max(lambdas))
    density = float(np.sum(lambdas <= Lam) / Lam)
    threshold = 2.0 * d / math.pi
    passes = density >= threshold * (1.0 - 1e-9)
    if basis is None:
        basis = []
        for s, l in zip(np.asarray(indices, int), lambdas):
            if l == 0.0:
                basis.append(BasisElement(n=int(s), lambda_=0.0, c_sin=0.0,
                                          c_cos=1.0, d=d))
            else:
                basis.append(BasisElement(
                    n=int(s), lambda_=float(l),
                    c_sin=-math.sin(l * (1.0 - d)),
                    c_cos=math.cos(l * (1.0 - d)), d=d))
    cond = normalized_condition(gram_matrix(basis))
    return CompletenessReport(density=density, threshold=threshold,
                              passes=passes, gram_condition=cond)
