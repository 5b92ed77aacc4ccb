"""End-to-end drivers: full-spectrum inversion (d = 1/2), subspectrum
inversion (0 < d < 1/2), forward-inverse round trips, and the empirical
Lipschitz-stability sweep."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .asymptotics import extract_ab, perturb_spectrum, rho, solve_omega1_a2
from .errors import DeficientIndexSetError, DomainError
from .forward_spectrum import ProblemSpec, Spectrum, eigenvalues
from .main_equation import (build_basis_and_rhs, completeness_heuristic,
                            gram_matrix, main_equation_residual,
                            normalized_condition, solve_K)
from .ode_core import DEFAULT_NODES_PER_UNIT, PotentialFn, omega
from .reconstruction import TwoSpectra, borg_fit, zeros_eta


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the inverse pipelines."""

    truncation: int = 64           # Galerkin size for d = 1/2
    subspectrum_truncation: int = 48
    guard: int = 16                # extra eigenvalues for tail estimation
    borg_modes: int = 32           # cosine coefficients of q1
    borg_pairs: int | None = None  # matched zeros per family; default 2*modes
    borg_max_iter: int = 100
    nodes_per_unit: int = DEFAULT_NODES_PER_UNIT
    gram_cond_limit: float = 1e8
    tail_start: int | None = None

    def pairs(self) -> int:
        return self.borg_pairs or 2 * self.borg_modes


@dataclass(frozen=True)
class Truth:
    """Planted coefficients for error reporting."""

    q1: PotentialFn
    h1: float
    a2: float | None = None


@dataclass(frozen=True)
class ReconstructionReport:
    q1: PotentialFn
    h1: float
    a2: float | None
    omega1: float
    residual_main_eq: float
    residual_borg: float
    gram_condition: float
    q1_error: float | None = None
    h1_error: float | None = None
    a2_error: float | None = None
    rho: float | None = None
    wall_time: float = 0.0

    def __post_init__(self):
        for name in ("residual_main_eq", "residual_borg"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")


def _q1_error(q_rec: PotentialFn, q_true: PotentialFn) -> float:
    diff = q_rec(q_true.x) - q_true.values
    return float(math.sqrt(np.trapezoid(diff**2, q_true.x)))


def _check_full(spectrum: Spectrum) -> None:
    slots = spectrum.indices
    if slots[0] not in (0, 1) or np.any(np.diff(slots) != 1):
        raise DomainError("full spectrum required: slots must be contiguous from 0 or 1")


def _errors(truth: Truth | None, q1, h1, a2):
    if truth is None:
        return None, None, None
    qe = _q1_error(q1, truth.q1)
    he = abs(h1 - truth.h1)
    ae = abs(a2 - truth.a2) if (a2 is not None and truth.a2 is not None) else None
    return qe, he, ae


def solve_ip1(spectrum: Spectrum, q2: PotentialFn, h2: float, a1: float,
              options: SolverOptions = SolverOptions(),
              truth: Truth | None = None,
              rho_value: float | None = None) -> ReconstructionReport:
    """Full-spectrum inversion at d = 1/2: recover (q1, h1, a2).

    Stages: phi2 data and omega2 from the known half; tail constants (a, b);
    (omega1, a2) from the linear system; basis and right-hand sides; Galerkin
    kernel solve; eta functions and their two zero families; two-spectra fit.
    """
    t0 = time.perf_counter()
    d = 1.0 - q2.length
    if abs(d - 0.5) > 1e-9:
        raise DomainError("solve_ip1 requires d = 1/2 data lengths")
    _check_full(spectrum)
    omega2 = omega(q2, h2)
    ab = extract_ab(spectrum, tail_start=options.tail_start)
    omega1, a2 = solve_omega1_a2(ab, a1, omega2)
    trunc = min(options.truncation, max(8, len(spectrum) - options.guard))
    lams = spectrum.values[:trunc]
    slots = spectrum.indices[:trunc]
    basis, rhs = build_basis_and_rhs(q2, h2, a1, a2, d, omega1, lams, slots)
    K = solve_K(basis, rhs, trunc, options.nodes_per_unit, options.gram_cond_limit)
    resid_main = main_equation_residual(K, basis, rhs)
    gram_cond = normalized_condition(gram_matrix(basis))
    n_pairs = options.pairs()
    mu = zeros_eta(K, omega1, 1, n_pairs)
    nu = zeros_eta(K, omega1, 2, n_pairs)
    borg = borg_fit(TwoSpectra(mu, nu, d), omega1, options.borg_modes, n_pairs,
                    options.nodes_per_unit, options.borg_max_iter)
    qe, he, ae = _errors(truth, borg.q1, borg.h1, a2)
    return ReconstructionReport(
        q1=borg.q1, h1=borg.h1, a2=a2, omega1=omega1,
        residual_main_eq=resid_main, residual_borg=borg.weighted_residual,
        gram_condition=gram_cond, q1_error=qe, h1_error=he, a2_error=ae,
        rho=rho_value, wall_time=time.perf_counter() - t0)


def solve_ip2(subspectrum: Spectrum, q2: PotentialFn, h2: float, a1: float,
              a2: float, omega1: float, d: float,
              options: SolverOptions = SolverOptions(),
              truth: Truth | None = None,
              rho_value: float | None = None,
              allow_deficient: bool = False) -> ReconstructionReport:
    """Subspectrum inversion at 0 < d < 1/2 with (a2, omega1) known."""
    t0 = time.perf_counter()
    if not (0.0 < d < 0.5):
        raise DomainError("solve_ip2 requires 0 < d < 1/2")
    if abs(q2.length - (1.0 - d)) > 1e-9:
        raise DomainError("q2 must be defined on [0, 1 - d]")
    report = completeness_heuristic(subspectrum.indices, d, subspectrum.values)
    if not report.passes and not allow_deficient:
        raise DeficientIndexSetError(
            f"index set likely deficient: density {report.density:.4f} below "
            f"threshold {report.threshold:.4f}")
    trunc = min(options.subspectrum_truncation, len(subspectrum))
    lams = subspectrum.values[:trunc]
    slots = subspectrum.indices[:trunc]
    basis, rhs = build_basis_and_rhs(q2, h2, a1, a2, d, omega1, lams, slots)
    K = solve_K(basis, rhs, trunc, options.nodes_per_unit, options.gram_cond_limit)
    resid_main = main_equation_residual(K, basis, rhs)
    gram_cond = normalized_condition(gram_matrix(basis))
    n_pairs = options.pairs()
    mu = zeros_eta(K, omega1, 1, n_pairs)
    nu = zeros_eta(K, omega1, 2, n_pairs)
    borg = borg_fit(TwoSpectra(mu, nu, d), omega1, options.borg_modes, n_pairs,
                    options.nodes_per_unit, options.borg_max_iter)
    qe, he, _ = _errors(truth, borg.q1, borg.h1, None)
    return ReconstructionReport(
        q1=borg.q1, h1=borg.h1, a2=None, omega1=omega1,
        residual_main_eq=resid_main, residual_borg=borg.weighted_residual,
        gram_condition=gram_cond, q1_error=qe, h1_error=he, a2_error=None,
        rho=rho_value, wall_time=time.perf_counter() - t0)


def roundtrip(spec: ProblemSpec, N: int,
              options: SolverOptions = SolverOptions(),
              index_set=None, shift: float | None = None) -> ReconstructionReport:
    """Forward eigenvalues, then the matching inverse pipeline, with error
    norms against the planted coefficients.

    For d = 1/2 the full spectrum feeds solve_ip1 (N is the Galerkin
    truncation; the guard eigenvalues are computed on top).  For d < 1/2 the
    chosen slots (default: even) feed solve_ip2 with the true (a2, omega1).
    A nonzero ``shift`` moves both potentials up by that constant before the
    forward solve (use it when the lowest eigenvalue is nonpositive) and is
    removed again from the recovered potential and the reported errors.
    Keep the shift minimal: slot numbering matches each value to the nearest
    free-problem zero, which needs the shifted lowest value to stay below
    half the free gap.
    """
    if shift:
        from .forward_spectrum import shift_spectrum
        report = roundtrip(shift_spectrum(spec, shift), N, options, index_set)
        q1 = report.q1.shifted(-shift)
        qe = _q1_error(q1, spec.q1)
        he = abs(report.h1 - spec.h1)
        return replace(report, q1=q1, q1_error=qe, h1_error=he)
    truth = Truth(q1=spec.q1, h1=spec.h1, a2=spec.a2)
    if abs(spec.d - 0.5) <= 1e-9:
        opts = options if options.truncation <= N else \
            replace(options, truncation=N)
        spectrum = eigenvalues(spec, N + options.guard)
        return solve_ip1(spectrum, spec.q2, spec.h2, spec.a1, opts, truth)
    spectrum = eigenvalues(spec, N)
    if index_set is None:
        index_set = spectrum.indices[spectrum.indices % 2 == 0]
    sub = spectrum.subset(index_set)
    omega1 = omega(spec.q1, spec.h1)
    return solve_ip2(sub, spec.q2, spec.h2, spec.a1, spec.a2, omega1, spec.d,
                     options, truth)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    seed: int
    rho: float
    q1_error: float | None
    h1_error: float | None
    ratio_q1: float | None
    ratio_h1: float | None
    spectrum_match: float | None
    status: str = "ok"


@dataclass(frozen=True)
class SweepResult:
    rows: list
    fitted_C: float
    max_over_median: float
    all_succeeded: bool


def _spectrum_match(spec: ProblemSpec, report: ReconstructionReport,
                    perturbed: Spectrum, n_check: int) -> float:
    """Max |lam_n(reconstructed) - lam_n(input)| over slots < n_check."""
    rebuilt = ProblemSpec(spec.d, report.q1, spec.q2, report.h1, spec.h2,
                          spec.a1, report.a2)
    take = int(np.sum(perturbed.indices < n_check))
    eig = eigenvalues(rebuilt, take + 1)
    ref = {int(s): v for s, v in zip(perturbed.indices, perturbed.values)}
    diffs = [abs(v - ref[int(s)]) for s, v in zip(eig.indices, eig.values)
             if int(s) in ref and s < n_check]
    if not diffs:
        raise DomainError("no common slots for the spectrum fidelity check")
    return float(max(diffs))


def stability_sweep(spec: ProblemSpec, N: int, epsilons, trials: int,
                    options: SolverOptions = SolverOptions(),
                    n_check: int = 32) -> SweepResult:
    """Perturb the spectrum at each epsilon for ``trials`` seeds, re-solve,
    and tabulate error/rho ratios plus the forward-spectrum fidelity of each
    reconstruction.  Individual trial failures are recorded, not raised."""
    if abs(spec.d - 0.5) > 1e-9:
        raise DomainError("stability sweep requires d = 1/2")
    opts = options if options.truncation <= N else \
        replace(options, truncation=N)
    base = eigenvalues(spec, N + opts.guard)
    truth = Truth(q1=spec.q1, h1=spec.h1, a2=spec.a2)
    rows = []
    for eps in epsilons:
        for seed in range(trials):
            try:
                pert = perturb_spectrum(base, float(eps), seed)
                dist = rho(base, pert)
                rep = solve_ip1(pert, spec.q2, spec.h2, spec.a1, opts,
                                truth=truth, rho_value=dist)
                match = _spectrum_match(spec, rep, pert, n_check)
                rows.append(SweepRow(
                    epsilon=float(eps), seed=seed, rho=dist,
                    q1_error=rep.q1_error, h1_error=rep.h1_error,
                    ratio_q1=rep.q1_error / dist if dist > 0 else None,
                    ratio_h1=rep.h1_error / dist if dist > 0 else None,
                    spectrum_match=match))
            except DomainError as exc:
                rows.append(SweepRow(epsilon=float(eps), seed=seed, rho=float(eps),
                                     q1_error=None, h1_error=None, ratio_q1=None,
                                     ratio_h1=None, spectrum_match=None,
                                     status=f"failed: {exc}"))
    ok_ratios = [r.ratio_q1 for r in rows
                 if r.status == "ok" and r.ratio_q1 is not None]
    if ok_ratios:
        fitted_C = float(max(ok_ratios))
        max_over_median = float(max(ok_ratios) / np.median(ok_ratios))
    else:
        fitted_C = math.inf
        max_over_median = math.inf
    return SweepResult(rows=rows, fitted_C=fitted_C,
                       max_over_median=max_over_median,
                       all_succeeded=all(r.status == "ok" for r in rows))
