"""From a recovered kernel pair to the left potential and Robin coefficient.

The kernel pair defines two even entire functions

    eta1(lam) = cos(lam d) + omega1 sin(lam d)/lam + psi1(lam)/lam,
    eta2(lam) = -lam sin(lam d) + omega1 cos(lam d) + psi2(lam),

which reproduce the left half-problem solution and its derivative at the jump
point.  Their positive zeros {mu_n} and {nu_n} are the square-root spectra of
the half-problems with a Dirichlet, respectively Neumann, condition at d and
the common Robin condition at 0.  The classical two-spectra step then fits a
cosine-parameterized potential plus Robin coefficient to those zeros with a
Levenberg-damped Gauss-Newton iteration; the known constant
omega1 = h1 + (1/2) int q1 eliminates h1 exactly, so the recovered pair
always satisfies that constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (BorgDivergedError, DomainError, RootLocalizationError,
                     WeylPoleError)
from .forward_spectrum import _scan_and_refine
from .main_equation import KernelPair, psi_from_K
from .ode_core import DEFAULT_NODES_PER_UNIT, PotentialFn, phi_batch
from .trig import pl_moment

_SMALL_LAM = 1e-4


@dataclass(frozen=True)
class TwoSpectra:
    """Square-root spectra of the Dirichlet-at-d and Neumann-at-d problems."""

    mu: np.ndarray
    nu: np.ndarray
    d: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        for name, arr in (("mu", mu), ("nu", nu)):
            if arr.ndim != 1 or arr.size < 1:
                raise DomainError(f"{name} must be a nonempty 1-d sequence")
            if np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
                raise DomainError(f"{name} must be positive and strictly increasing")
        if not (0.0 < self.d <= 0.5):
            raise DomainError("d must lie in (0, 1/2]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    def interlacing_violations(self) -> int:
        """Number of adjacent same-family pairs in the merged ordering."""
        tagged = sorted([(v, 0) for v in self.mu] + [(v, 1) for v in self.nu])
        return sum(1 for i in range(len(tagged) - 1)
                   if tagged[i][1] == tagged[i + 1][1])


def eval_eta(K: KernelPair, omega1: float, lam):
    """(eta1, eta2) at lam (scalar or array); both even in lam.

    The removable singularity of eta1 at lam = 0 is taken analytically:
    eta1(0) = 1 + omega1 d + integral K1(x) x dx.
    """
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    d = K.d
    psi1, psi2 = psi_from_K(K, lam_arr)
    eta1 = np.empty_like(lam_arr)
    eta2 = (-lam_arr * np.sin(lam_arr * d) + omega1 * np.cos(lam_arr * d) + psi2)
    small = np.abs(lam_arr) * d < _SMALL_LAM
    big = ~small
    if np.any(big):
        lb = lam_arr[big]
        eta1[big] = np.cos(lb * d) + omega1 * np.sin(lb * d) / lb + psi1[big] / lb
    if np.any(small):
        m1 = pl_moment(K.K1.x, K.K1.values, 1)
        m3 = pl_moment(K.K1.x, K.K1.values, 3)
        ls = lam_arr[small]
        # even Taylor of cos + omega1*sinc + psi1/lam around lam = 0
        eta1[small] = (1.0 + omega1 * d + m1
                       + ls**2 * (-d * d / 2.0 - omega1 * d**3 / 6.0 - m3 / 6.0))
    if scalar:
        return float(eta1[0]), float(eta2[0])
    return eta1, eta2


def _first_n_positive_zeros(fun, spacing: float, N: int, label: str) -> np.ndarray:
    """Scan-and-refine driver shared by the eta and phi zero finders."""
    hi = (N + 1.5) * spacing
    step = spacing / 8.0
    zeros = _scan_and_refine(fun, 1e-6, hi, step)
    zeros = zeros[zeros > 1e-9]
    tries = 0
    while zeros.size < N and tries < 3:
        tries += 1
        step *= 0.25
        hi += spacing
        zeros = _scan_and_refine(fun, 1e-6, hi, step)
        zeros = zeros[zeros > 1e-9]
    if zeros.size < N:
        raise RootLocalizationError(
            int(zeros.size), f"zero localization failed at index {zeros.size} ({label})")
    return zeros[:N]


def zeros_eta(K: KernelPair, omega1: float, which: int, N: int) -> np.ndarray:
    """First N positive zeros of eta1 (which = 1) or eta2 (which = 2)."""
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    if N < 1:
        raise DomainError("N must be >= 1")
    idx = which - 1

    def fun(g):
        return eval_eta(K, omega1, g)[idx]

    return _first_n_positive_zeros(fun, math.pi / K.d, N, f"eta{which}")


def weyl(K: KernelPair, omega1: float, lam: float) -> float:
    """eta2 / eta1; raises at (numerical) poles."""
    e1, e2 = eval_eta(K, omega1, float(lam))
    if abs(e1) < 1e-12 * (1.0 + abs(e2)):
        raise WeylPoleError(f"pole of the Weyl function near lam = {lam}")
    return e2 / e1


def phi_zeros(q: PotentialFn, h: float, which: int, N: int) -> np.ndarray:
    """First N positive zeros of phi(L, .) (which = 1) or phi'(L, .)
    (which = 2) for the half-problem with data (q, h); forward oracle for the
    two-spectra step."""
    idx = which - 1

    def fun(g):
        return phi_batch(q, h, g, q.length)[idx]

    return _first_n_positive_zeros(fun, math.pi / q.length, N, f"phi{which}")


def mu_slots(vals: np.ndarray, d: float) -> np.ndarray:
    """Asymptotic slot of each Dirichlet-type zero: mu_n ~ (n + 1/2) pi / d."""
    return np.rint(np.asarray(vals) * d / math.pi - 0.5).astype(int)


def nu_slots(vals: np.ndarray, d: float) -> np.ndarray:
    """Asymptotic slot of each Neumann-type zero: nu_n ~ n pi / d."""
    return np.rint(np.asarray(vals) * d / math.pi).astype(int)


@dataclass(frozen=True)
class BorgResult:
    q1: PotentialFn
    h1: float
    coefficients: np.ndarray
    weighted_residual: float
    iterations: int


class _CandidateZeros:
    """Warm-started Newton zero tracker for the Gauss-Newton inner loop.

    One batched propagation per Newton sweep serves both families: zeros of
    phi use (phi, dphi/dlam), zeros of phi' use (phi', dphi'/dlam).
    """

    def __init__(self, d: float, nodes_per_unit: int, mu_seeds, nu_seeds):
        self.d = d
        self.nodes_per_unit = nodes_per_unit
        self.n_mu = len(mu_seeds)
        self.seeds = np.concatenate([mu_seeds, nu_seeds])
        self.guard = 0.45 * math.pi / d

    def compute(self, coeffs: np.ndarray, h1: float, start=None) -> np.ndarray:
        q = PotentialFn.from_cosine_modes(coeffs, self.d, self.nodes_per_unit)
        z = np.array(self.seeds if start is None else start, dtype=float)
        for _ in range(10):
            ph, dph, ph_l, dph_l = phi_batch(q, h1, z, self.d, derivative=True)
            f = np.concatenate([ph[: self.n_mu], dph[self.n_mu:]])
            df = np.concatenate([ph_l[: self.n_mu], dph_l[self.n_mu:]])
            step = -f / df
            step = np.clip(step, -0.2 * self.guard, 0.2 * self.guard)
            z = z + step
            # drive to the propagator noise floor: leftover zero noise is
            # amplified by the weighted fit through the inverse sensitivity
            if np.max(np.abs(step)) < 1e-13 * np.max(z):
                break
        if np.max(np.abs(z - self.seeds)) > self.guard or np.any(np.diff(z[: self.n_mu]) <= 0) \
                or np.any(np.diff(z[self.n_mu:]) <= 0):
            return None  # left the tracking basin; caller treats as bad trial
        return z


def _borg_fit(spectra: TwoSpectra, omega1: float, M: int, n_pairs: int,
              nodes_per_unit: int = DEFAULT_NODES_PER_UNIT,
              max_iter: int = 100, fd_step: float = 1e-6,
              tol_abs: float = 1e-11) -> BorgResult:
    d = spectra.d
    mu_t = spectra.mu[:n_pairs]
    nu_t = spectra.nu[:n_pairs]
    w = np.concatenate([mu_slots(mu_t, d) + 1.0, nu_slots(nu_t, d) + 1.0])
    targets = np.concatenate([mu_t, nu_t])
    tracker = _CandidateZeros(d, nodes_per_unit, mu_t, nu_t)

    def h_of(c):
        return omega1 - 0.5 * c[0] * d

    def residual(c, start=None):
        z = tracker.compute(c, h_of(c), start)
        if z is None:
            return None, None
        return w * (z - targets), z

    c = np.zeros(M)
    r, z = residual(c)
    if r is None:
        raise BorgDivergedError(math.inf, 0, "Borg step diverged: seed tracking failed")
    S = float(np.dot(r, r))
    damp = 1e-3
    flat_count = 0
    for it in range(1, max_iter + 1):
        if math.sqrt(S) < tol_abs:
            return BorgResult(PotentialFn.from_cosine_modes(c, d, nodes_per_unit),
                              h_of(c), c, math.sqrt(S), it)
        # finite-difference Jacobian, columns warm-started from current zeros
        J = np.empty((targets.size, M))
        for k in range(M):
            ck = c.copy()
            ck[k] += fd_step
            rk, _ = residual(ck, start=z)
            if rk is None:
                rk = r
            J[:, k] = (rk - r) / fd_step
        JtJ = J.T @ J
        g = J.T @ r
        accepted = False
        stalled = False
        for _ in range(30):
            A = JtJ + damp * np.diag(np.diag(JtJ)) + 1e-14 * np.eye(M)
            try:
                delta = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                damp *= 10.0
                continue
            r_new, z_new = residual(c + delta, start=z)
            if r_new is not None:
                S_new = float(np.dot(r_new, r_new))
                if S_new < S * (1.0 - 1e-9):
                    rel_drop = (math.sqrt(S) - math.sqrt(S_new)) / max(math.sqrt(S), 1e-300)
                    c = c + delta
                    r, z, S = r_new, z_new, S_new
                    damp = max(damp / 3.0, 1e-12)
                    accepted = True
                    flat_count = flat_count + 1 if rel_drop < 1e-8 else 0
                    break
                if S_new < S:
                    # only noise-level improvement remains: keep the current
                    # iterate rather than wander in weakly-identified modes
                    stalled = True
                    break
            damp *= 10.0
            if damp > 1e14:
                break
        if stalled or not accepted or flat_count >= 2:
            # stationary: either the weighted least-squares optimum for
            # inconsistent targets, or genuine convergence
            return BorgResult(PotentialFn.from_cosine_modes(c, d, nodes_per_unit),
                              h_of(c), c, math.sqrt(S), it)
    raise BorgDivergedError(math.sqrt(S), max_iter)


def recover_q1_h1(spectra: TwoSpectra, omega1: float, M: int,
                  n_pairs: int | None = None,
                  nodes_per_unit: int = DEFAULT_NODES_PER_UNIT,
                  max_iter: int = 100):
    """Two-spectra recovery of (q1, h1) on [0, d].

    q1 is parameterized by M cosine coefficients on [0, d]; h1 is eliminated
    through omega1 = h1 + (1/2) int q1, making that constraint exact.  The
    Gauss-Newton iteration minimizes the (slot+1)-weighted squared mismatch
    of the first ``n_pairs`` zeros of each family (default 2M, capped by the
    available lists).
    """
    res = borg_fit(spectra, omega1, M, n_pairs, nodes_per_unit, max_iter)
    return res.q1, res.h1


def borg_fit(spectra: TwoSpectra, omega1: float, M: int,
             n_pairs: int | None = None,
             nodes_per_unit: int = DEFAULT_NODES_PER_UNIT,
             max_iter: int = 100) -> BorgResult:
    """recover_q1_h1 with the fit diagnostics kept."""
    if M < 1:
        raise DomainError("M must be >= 1")
    if len(spectra.mu) < M + 4 or len(spectra.nu) < M + 4:
        raise DomainError(f"need at least M + 4 = {M + 4} entries in each list")
    if spectra.interlacing_violations() > 0:
        raise DomainError("rejected input: mu/nu interlacing violated")
    n_pairs = min(len(spectra.mu), len(spectra.nu), n_pairs or 2 * M)
    return _borg_fit(spectra, omega1, M, n_pairs, nodes_per_unit, max_iter)
