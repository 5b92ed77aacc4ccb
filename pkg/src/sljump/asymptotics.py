"""Asymptotic constants of a d = 1/2 spectrum and admissible perturbations.

For d = 1/2 the square-root eigenvalues behave like

    lam_n = n pi + ((-1)^n a + b) / (n pi) + beta_n / n,   {beta_n} in l2,

where a and b are determined by the jump and Robin data:

    a = a2/(a1 + 1/a1) + (a1 - 1/a1)/(a1 + 1/a1) * (omega2 - omega1),
    b = a2/(a1 + 1/a1) + omega1 + omega2.

``extract_ab`` inverts the asymptotics empirically from a tail window;
``solve_omega1_a2`` inverts the 2x2 linear system above; ``perturb_spectrum``
generates sequences at a prescribed weighted-l2 distance with the same (a, b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AsymptoticClassError, DomainError, InsufficientTailError,
                     PerturbationTooLargeError)
from .forward_spectrum import Spectrum

MIN_EIGENVALUES = 16


@dataclass(frozen=True)
class AsymptoticConstants:
    """Estimated tail constants with the window used and the leftover l2 mass."""

    a: float
    b: float
    tail_start: int
    residual: float

    def __post_init__(self):
        if self.residual < 0:
            raise DomainError("residual must be nonnegative")
        if self.tail_start < 2:
            raise DomainError("tail window must start at slot >= 2")


def ab_from_constants(omega1: float, omega2: float, a1: float, a2: float):
    """Forward map from problem constants to the tail constants (a, b)."""
    if a1 <= 0:
        raise DomainError("a1 must be positive")
    A = a1 + 1.0 / a1
    B = a1 - 1.0 / a1
    a = a2 / A + (B / A) * (omega2 - omega1)
    b = a2 / A + omega1 + omega2
    return a, b


def solve_omega1_a2(ab: AsymptoticConstants, a1: float, omega2: float):
    """Invert ab_from_constants for (omega1, a2); unique for a1 > 0."""
    if a1 <= 0:
        raise DomainError("a1 must be positive")
    A = a1 + 1.0 / a1
    omega1 = -(A * (ab.a - ab.b) + 2.0 * omega2 / a1) / (2.0 * a1)
    a2 = (ab.b - omega1 - omega2) * A
    return omega1, a2


def _gamma(lam: float, slot: int) -> float:
    return (lam - math.pi * slot) * math.pi * slot


def extract_ab(spectrum: Spectrum, tail_start: int | None = None) -> AsymptoticConstants:
    """Estimate (a, b) from even/odd pair combinations of the tail.

    gamma_n = (lam_n - pi n) pi n tends to (-1)^n a + b, so half-sums and
    half-differences of consecutive even/odd pairs converge to b and a.  The
    estimate is a plain mean over the last ceil(N/4) pairs (or from the pair
    containing ``tail_start`` when given); slot 0 never enters.
    """
    n_total = len(spectrum)
    if n_total < MIN_EIGENVALUES:
        raise InsufficientTailError(
            f"insufficient tail: need >= {MIN_EIGENVALUES} eigenvalues, got {n_total}")
    lam_of = {int(s): float(v) for s, v in zip(spectrum.indices, spectrum.values)}
    max_slot = int(spectrum.indices[-1])
    pairs = [k for k in range(1, max_slot // 2 + 1)
             if 2 * k in lam_of and 2 * k + 1 in lam_of]
    if len(pairs) < 4:
        raise InsufficientTailError("insufficient tail: fewer than 4 usable pairs")
    g_even = np.array([_gamma(lam_of[2 * k], 2 * k) for k in pairs])
    g_odd = np.array([_gamma(lam_of[2 * k + 1], 2 * k + 1) for k in pairs])
    # divergence guard: along the tail, same-parity gamma increments must
    # vanish for a bounded-limit sequence; a misindexed or non-admissible
    # sequence drifts by an O(1) amount per step
    half = len(pairs) // 2
    drift = max(float(np.median(np.abs(np.diff(g_even[half:])))),
                float(np.median(np.abs(np.diff(g_odd[half:])))))
    if drift > 0.5:
        raise AsymptoticClassError(
            f"not in asymptotic class: gamma_n drifts ({drift:.3g} per step)")
    if tail_start is None:
        n_tail = max(2, math.ceil(n_total / 4))
        first = max(0, len(pairs) - n_tail)
    else:
        first = next((i for i, k in enumerate(pairs) if 2 * k >= tail_start), 0)
    win = pairs[first:]
    ge, go = g_even[first:], g_odd[first:]
    a = float(np.mean(0.5 * (ge - go)))
    b = float(np.mean(0.5 * (ge + go)))
    used_slots = [n for k in win for n in (2 * k, 2 * k + 1)]
    beta = np.array([(lam_of[n] - math.pi * n - (((-1) ** n) * a + b) / (math.pi * n)) * n
                     for n in used_slots])
    return AsymptoticConstants(a=a, b=b, tail_start=2 * win[0],
                               residual=float(np.sqrt(np.sum(beta**2))))


def rho(s1: Spectrum, s2: Spectrum) -> float:
    """Weighted l2 distance sum (n+1)^2 (lam_n - mu_n)^2 over common slots."""
    if not np.array_equal(s1.indices, s2.indices):
        raise DomainError("spectra must share the same slot set")
    w = (s1.indices + 1).astype(float)
    return float(np.sqrt(np.sum((w * (s1.values - s2.values)) ** 2)))


def rho_subspectrum(s1: Spectrum, s2: Spectrum) -> float:
    """Subspectrum distance: weights lam_n of the reference sequence."""
    if not np.array_equal(s1.indices, s2.indices):
        raise DomainError("spectra must share the same slot set")
    return float(np.sqrt(np.sum((s1.values * (s1.values - s2.values)) ** 2)))


def perturb_spectrum(spectrum: Spectrum, epsilon: float, seed: int) -> Spectrum:
    """A sequence at weighted-l2 distance exactly epsilon, same (a, b).

    Only the l2-remainder term moves: a uniform draw per slot, damped by
    1/(n+1), rescaled so the recomputed distance equals epsilon.  The result
    is deterministic in ``seed``.
    """
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    if epsilon == 0.0:
        return Spectrum(spectrum.values.copy(), spectrum.indices.copy())
    slots = spectrum.indices.astype(float)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=len(spectrum))
    u[np.abs(u) < 1e-12] = 0.5  # avoid a degenerate all-zero profile
    profile = np.where(slots >= 1, u / np.maximum(slots * (slots + 1.0), 1.0), u)
    weighted = (slots + 1.0) * profile
    scale = epsilon / math.sqrt(float(np.sum(weighted**2)))
    moved = spectrum.values + scale * profile
    if np.any(moved <= 0) or np.any(np.diff(moved) <= 0):
        raise PerturbationTooLargeError(
            "perturbation too large: ordering or positivity breaks")
    return Spectrum(moved, spectrum.indices.copy())
