"""Flat-text configuration, serialization of every domain type, and the
command-line surface.

All formats are plain text with 17-significant-digit floats, so writing and
re-reading reproduces every value exactly.  Exit codes: 0 success, 1 domain
error, 2 configuration / IO error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .forward_spectrum import ProblemSpec, Spectrum, eigenvalues
from .main_equation import (KernelPair, basis_diagnostics, build_basis_and_rhs,
                            completeness_heuristic)
from .ode_core import DEFAULT_NODES_PER_UNIT, PotentialFn, omega
from .pipeline import (ReconstructionReport, SolverOptions, SweepResult,
                       Truth, roundtrip, solve_ip1, solve_ip2, stability_sweep)
from .reconstruction import TwoSpectra

FMT = "%.17g"

MODES = ("forward", "ip1", "ip2", "roundtrip", "stability")

_FLOAT_KEYS = {"d", "a1", "a2", "h1", "h2", "omega1", "gram_cond_limit"}
_INT_KEYS = {"num_eigenvalues", "truncation", "subspectrum_truncation",
             "guard", "borg_modes", "borg_pairs", "nodes_per_unit", "seed",
             "trials", "tail_start", "borg_max_iter"}
_STR_KEYS = {"mode", "q1_file", "q2_file", "spectrum_file"}
_LIST_KEYS = {"epsilons", "index_set"}
_BOOL_KEYS = {"allow_deficient"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS | _BOOL_KEYS


@dataclass
class RunConfig:
    """Fully-populated run description (problem + solver + mode)."""

    mode: str = "forward"
    d: float = 0.5
    a1: float = 1.0
    a2: float = 0.0
    h1: float = 0.0
    h2: float = 0.0
    q1_file: str | None = None
    q2_file: str | None = None
    spectrum_file: str | None = None
    omega1: float | None = None
    num_eigenvalues: int = 64
    truncation: int = 64
    subspectrum_truncation: int = 48
    guard: int = 16
    borg_modes: int = 32
    borg_pairs: int | None = None
    borg_max_iter: int = 100
    nodes_per_unit: int = DEFAULT_NODES_PER_UNIT
    gram_cond_limit: float = 1e8
    tail_start: int | None = None
    seed: int = 0
    trials: int = 8
    epsilons: tuple = (1e-3, 3e-3, 1e-2)
    index_set: tuple | None = None
    allow_deficient: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got '{self.mode}'")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite")
        if not (0.0 < self.d <= 0.5):
            raise ConfigError("d must lie in (0, 1/2]")
        if self.a1 <= 0:
            raise ConfigError("a1 must be positive (a1 > 0)")

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            truncation=self.truncation,
            subspectrum_truncation=self.subspectrum_truncation,
            guard=self.guard, borg_modes=self.borg_modes,
            borg_pairs=self.borg_pairs, borg_max_iter=self.borg_max_iter,
            nodes_per_unit=self.nodes_per_unit,
            gram_cond_limit=self.gram_cond_limit, tail_start=self.tail_start)

    def effective_text(self) -> str:
        """Canonical re-parseable echo of every field."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                lines.append(f"{f.name} = {'true' if v else 'false'}")
            elif isinstance(v, float):
                lines.append(f"{f.name} = {FMT % v}")
            elif isinstance(v, tuple):
                if f.name == "epsilons":
                    lines.append(f"{f.name} = " + ",".join(FMT % x for x in v))
                else:
                    lines.append(f"{f.name} = " + ",".join(str(int(x)) for x in v))
            else:
                lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Parse flat ``key = value`` text; unknown keys, malformed numbers and
    missing referenced files are rejected with their line number."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _BOOL_KEYS:
                if val.lower() not in ("true", "false"):
                    raise ValueError(val)
                values[key] = val.lower() == "true"
            elif key == "epsilons":
                values[key] = tuple(float(x) for x in val.split(",") if x.strip())
            elif key == "index_set":
                values[key] = tuple(int(x) for x in val.split(",") if x.strip())
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: malformed value for '{key}': {val}") from exc
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:  # pragma: no cover - guarded by _ALL_KEYS
        raise ConfigError(str(exc)) from exc
    base = Path(base_dir)
    for key in ("q1_file", "q2_file", "spectrum_file"):
        name = getattr(cfg, key)
        if name is not None and not (base / name).exists():
            raise ConfigError(f"referenced file does not exist: {name}")
    return cfg


# ---------------------------------------------------------------------------
# domain-type serialization


def write_potential(q: PotentialFn, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"length={FMT % q.length} nodes={q.nodes}\n")
        for x, v in zip(q.x, q.values):
            fh.write(f"{FMT % x} {FMT % v}\n")


def read_potential(path) -> PotentialFn:
    with open(path) as fh:
        header = fh.readline().split()
        try:
            length = float(header[0].split("=", 1)[1])
            nodes = int(header[1].split("=", 1)[1])
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"malformed potential header in {path}") from exc
        try:
            data = np.loadtxt(fh, ndmin=2)
        except ValueError as exc:
            raise ConfigError(f"malformed potential data in {path}: {exc}") from exc
    if data.shape != (nodes, 2):
        raise ConfigError(f"{path}: expected {nodes} 'x value' rows")
    q = PotentialFn(data[:, 0], data[:, 1])
    if abs(q.length - length) > 1e-12 * max(1.0, length):
        raise ConfigError(f"{path}: header length disagrees with grid")
    return q


def write_spectrum(s: Spectrum, path) -> None:
    with open(path, "w") as fh:
        for n, v in zip(s.indices, s.values):
            fh.write(f"{n} {FMT % v}\n")


def read_spectrum(path) -> Spectrum:
    try:
        data = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"malformed spectrum file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"{path}: expected 'n lambda_n' rows")
    return Spectrum(data[:, 1], data[:, 0].astype(int))


def write_two_spectra(ts: TwoSpectra, path) -> None:
    n = min(len(ts.mu), len(ts.nu))
    with open(path, "w") as fh:
        for i in range(n):
            fh.write(f"{i} {FMT % ts.mu[i]} {FMT % ts.nu[i]}\n")


def read_two_spectra(path, d: float) -> TwoSpectra:
    try:
        data = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"malformed two-spectra file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 3:
        raise ConfigError(f"{path}: expected 'n mu_n nu_n' rows")
    return TwoSpectra(data[:, 1], data[:, 2], d)


def write_kernel(K: KernelPair, out_dir) -> None:
    write_potential(K.K1, Path(out_dir) / "kernel_K1.txt")
    write_potential(K.K2, Path(out_dir) / "kernel_K2.txt")


def write_report(report: ReconstructionReport, out_dir) -> None:
    """report.txt with every scalar field plus potential files alongside."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_potential(report.q1, out / "q1_recovered.txt")
    with open(out / "report.txt", "w") as fh:
        fh.write("q1_file q1_recovered.txt\n")
        for name in ("h1", "a2", "omega1", "residual_main_eq", "residual_borg",
                     "gram_condition", "q1_error", "h1_error", "a2_error",
                     "rho", "wall_time"):
            v = getattr(report, name)
            if v is None:
                continue
            fh.write(f"{name} {FMT % v}\n")


def read_report(out_dir) -> ReconstructionReport:
    out = Path(out_dir)
    values: dict = {}
    with open(out / "report.txt") as fh:
        for line in fh:
            key, _, val = line.strip().partition(" ")
            values[key] = val
    q1 = read_potential(out / values.pop("q1_file"))
    floats = {k: float(v) for k, v in values.items()}
    return ReconstructionReport(q1=q1, **{
        "h1": floats.get("h1"), "a2": floats.get("a2"),
        "omega1": floats.get("omega1"),
        "residual_main_eq": floats.get("residual_main_eq"),
        "residual_borg": floats.get("residual_borg"),
        "gram_condition": floats.get("gram_condition"),
        "q1_error": floats.get("q1_error"), "h1_error": floats.get("h1_error"),
        "a2_error": floats.get("a2_error"), "rho": floats.get("rho"),
        "wall_time": floats.get("wall_time", 0.0)})


def write_stability(result: SweepResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("epsilon,seed,rho,q1_error,h1_error,ratio_q1,ratio_h1,"
                 "spectrum_match,status\n")
        for r in result.rows:
            cells = [FMT % r.epsilon, str(r.seed), FMT % r.rho]
            for v in (r.q1_error, r.h1_error, r.ratio_q1, r.ratio_h1,
                      r.spectrum_match):
                cells.append(FMT % v if v is not None else "")
            cells.append(r.status)
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# CLI


def _load_config(args) -> RunConfig:
    if args.config:
        path = Path(args.config)
        cfg = parse_config(path.read_text(), base_dir=path.parent)
    else:
        cfg = RunConfig()
    overrides = {}
    for key in ("num_eigenvalues", "truncation", "borg_modes", "borg_pairs",
                "seed", "tail_start", "trials"):
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            overrides[key] = v
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilons"] = tuple(args.epsilon)
    if overrides:
        cfg = RunConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)},
                           **overrides})
    return cfg


def _problem_from_config(cfg: RunConfig, base_dir: Path) -> ProblemSpec:
    d = cfg.d
    q1 = (read_potential(base_dir / cfg.q1_file) if cfg.q1_file
          else PotentialFn.zero(d, cfg.nodes_per_unit))
    q2 = (read_potential(base_dir / cfg.q2_file) if cfg.q2_file
          else PotentialFn.zero(1.0 - d, cfg.nodes_per_unit))
    return ProblemSpec(d, q1, q2, cfg.h1, cfg.h2, cfg.a1, cfg.a2)


def _q2_from_config(cfg: RunConfig, base_dir: Path) -> PotentialFn:
    if cfg.q2_file:
        return read_potential(base_dir / cfg.q2_file)
    return PotentialFn.zero(1.0 - cfg.d, cfg.nodes_per_unit)


def _echo_config(cfg: RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.txt").write_text(cfg.effective_text())


def _cmd_forward(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    spec = _problem_from_config(cfg, base_dir)
    s = eigenvalues(spec, cfg.num_eigenvalues)
    write_spectrum(s, out / "spectrum.txt")
    print(f"wrote {len(s)} eigenvalues to {out / 'spectrum.txt'}")


def _cmd_invert(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    if not cfg.spectrum_file:
        raise ConfigError("invert needs spectrum_file")
    spectrum = read_spectrum(base_dir / cfg.spectrum_file)
    q2 = _q2_from_config(cfg, base_dir)
    report = solve_ip1(spectrum, q2, cfg.h2, cfg.a1, cfg.solver_options())
    write_report(report, out)
    print(f"recovered h1 = {report.h1:.12g}, a2 = {report.a2:.12g}; "
          f"report in {out}")


def _cmd_invert_partial(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    if not cfg.spectrum_file:
        raise ConfigError("invert-partial needs spectrum_file")
    if cfg.omega1 is None:
        raise ConfigError("invert-partial needs omega1")
    spectrum = read_spectrum(base_dir / cfg.spectrum_file)
    if cfg.index_set is not None:
        spectrum = spectrum.subset(np.asarray(cfg.index_set, dtype=int))
    q2 = _q2_from_config(cfg, base_dir)
    report = solve_ip2(spectrum, q2, cfg.h2, cfg.a1, cfg.a2, cfg.omega1,
                       cfg.d, cfg.solver_options(),
                       allow_deficient=cfg.allow_deficient)
    write_report(report, out)
    print(f"recovered h1 = {report.h1:.12g}; report in {out}")


def _cmd_roundtrip(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    spec = _problem_from_config(cfg, base_dir)
    index_set = np.asarray(cfg.index_set, int) if cfg.index_set else None
    report = roundtrip(spec, cfg.num_eigenvalues, cfg.solver_options(),
                       index_set=index_set)
    write_report(report, out)
    print(f"roundtrip q1_error = {report.q1_error:.3e}, "
          f"h1_error = {report.h1_error:.3e}; report in {out}")


def _cmd_stability(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    spec = _problem_from_config(cfg, base_dir)
    result = stability_sweep(spec, cfg.num_eigenvalues, cfg.epsilons,
                             cfg.trials, cfg.solver_options())
    write_stability(result, out / "stability.csv")
    print(f"sweep: {len(result.rows)} trials, all_succeeded={result.all_succeeded}, "
          f"fitted C = {result.fitted_C:.3g}, max/median = {result.max_over_median:.3g}")


def _cmd_basis_check(cfg: RunConfig, base_dir: Path, out: Path) -> None:
    spec = _problem_from_config(cfg, base_dir)
    if cfg.spectrum_file:
        s = read_spectrum(base_dir / cfg.spectrum_file)
    else:
        s = eigenvalues(spec, cfg.num_eigenvalues)
    if cfg.index_set is not None:
        s = s.subset(np.asarray(cfg.index_set, dtype=int))
    omega1 = cfg.omega1 if cfg.omega1 is not None else 0.0
    basis, _ = build_basis_and_rhs(spec.q2, spec.h2, spec.a1, spec.a2, spec.d,
                                   omega1, s.values, s.indices)
    closeness, cond = basis_diagnostics(basis, spec.a1, spec.d)
    comp = completeness_heuristic(s.indices, spec.d, s.values, basis)
    lines = [f"closeness {FMT % closeness}",
             f"gram_condition {FMT % cond}",
             f"density {FMT % comp.density}",
             f"density_threshold {FMT % comp.threshold}",
             f"density_pass {comp.passes}"]
    (out / "basis_check.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


_COMMANDS = {
    "forward": _cmd_forward,
    "invert": _cmd_invert,
    "invert-partial": _cmd_invert_partial,
    "roundtrip": _cmd_roundtrip,
    "stability": _cmd_stability,
    "basis-check": _cmd_basis_check,
}

_MODE_OF = {"forward": "forward", "invert": "ip1", "invert-partial": "ip2",
            "roundtrip": "roundtrip", "stability": "stability",
            "basis-check": "forward"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sljump",
        description="Forward and partial inverse spectral solvers for "
                    "Sturm-Liouville problems with an interior jump.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--num-eigenvalues", type=int, dest="num_eigenvalues")
        p.add_argument("--truncation", type=int)
        p.add_argument("--borg-modes", type=int, dest="borg_modes")
        p.add_argument("--borg-pairs", type=int, dest="borg_pairs")
        p.add_argument("--epsilon", type=float, action="append",
                       help="stability perturbation size (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--tail-start", type=int, dest="tail_start")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        cfg = RunConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)},
                           "mode": _MODE_OF[args.command]})
        base_dir = Path(args.config).parent if args.config else Path(".")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _echo_config(cfg, out)
        _COMMANDS[args.command](cfg, base_dir, out)
        return 0
    except (ConfigError, OSError) as exc:
        print(f"config/io error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
