"""Forward and partial inverse spectral solvers for Sturm-Liouville problems
with an interior jump."""

from .asymptotics import (AsymptoticConstants, ab_from_constants, extract_ab,
                          perturb_spectrum, rho, rho_subspectrum,
                          solve_omega1_a2)
from .forward_spectrum import (ProblemSpec, Spectrum, char_delta,
                               char_delta_batch, eigenvalues, model_zeros,
                               model_zeros_quarter, shift_spectrum)
from .main_equation import (BasisElement, KernelPair, MainEqRHS,
                            basis_diagnostics, build_fn, build_vn,
                            completeness_heuristic, inner_product, psi_from_K,
                            solve_K)
from .ode_core import EndpointData, PotentialFn, integrate_phi, omega, phi_batch
from .pipeline import (ReconstructionReport, SolverOptions, roundtrip,
                       solve_ip1, solve_ip2, stability_sweep)
from .reconstruction import (TwoSpectra, eval_eta, recover_q1_h1, weyl,
                             zeros_eta)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticConstants", "BasisElement", "EndpointData", "KernelPair",
    "MainEqRHS", "PotentialFn", "ProblemSpec", "ReconstructionReport",
    "SolverOptions", "Spectrum", "TwoSpectra", "ab_from_constants",
    "basis_diagnostics", "build_fn", "build_vn", "char_delta",
    "char_delta_batch", "completeness_heuristic", "eigenvalues", "eval_eta",
    "extract_ab", "inner_product", "integrate_phi", "model_zeros",
    "model_zeros_quarter", "omega", "perturb_spectrum", "phi_batch",
    "psi_from_K", "recover_q1_h1", "rho", "rho_subspectrum", "roundtrip",
    "shift_spectrum", "solve_K", "solve_ip1", "solve_ip2", "solve_omega1_a2",
    "stability_sweep", "weyl", "zeros_eta",
]
