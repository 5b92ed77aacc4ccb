import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sljump.errors import ConfigError
from sljump.forward_spectrum import Spectrum
from sljump.io_cli import (RunConfig, main, parse_config, read_potential,
                           read_report, read_spectrum, read_two_spectra,
                           write_kernel, write_potential, write_report,
                           write_spectrum, write_stability, write_two_spectra)
from sljump.main_equation import KernelPair
from sljump.ode_core import PotentialFn
from sljump.pipeline import ReconstructionReport, SweepResult, SweepRow
from sljump.reconstruction import TwoSpectra


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config("")
        assert cfg.d == 0.5
        assert cfg.mode == "forward"
        assert cfg.a1 == 1.0

    def test_negative_a1_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("a1 = -1.0")

    def test_unknown_key_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("d = 0.5\nbogus = 1\n")

    def test_malformed_number_with_line_number(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("d = zero point five")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("d = 0.5\nd = 0.25\n")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config("q2_file = nope.txt", base_dir=tmp_path)

    def test_malformed_spectrum_file_is_config_error(self, tmp_path):
        bad = tmp_path / "s.txt"
        bad.write_text("1 three\n")
        with pytest.raises(ConfigError, match="malformed spectrum"):
            read_spectrum(bad)

    def test_comments_and_blanks_skipped(self):
        cfg = parse_config("# comment\n\nd = 0.25  # trailing\n")
        assert cfg.d == 0.25

    def test_effective_text_round_trip(self):
        cfg = RunConfig(mode="stability", d=0.5, a1=2.0, h1=0.3,
                        epsilons=(1e-3, 1e-2), trials=4, seed=9,
                        index_set=(0, 2, 4), allow_deficient=True)
        again = parse_config(cfg.effective_text())
        assert again == cfg

    @given(d=st.floats(0.05, 0.5), a1=st.floats(0.1, 9.0),
           h1=st.floats(-3, 3), trunc=st.integers(8, 128),
           seed=st.integers(0, 10**6))
    def test_round_trip_randomized(self, d, a1, h1, trunc, seed):
        cfg = RunConfig(d=d, a1=a1, h1=h1, truncation=trunc, seed=seed)
        assert parse_config(cfg.effective_text()) == cfg


class TestSerialization:
    def test_potential_round_trip_exact(self, tmp_path):
        q = PotentialFn.from_callable(lambda x: math.sin(5.1 * x) / 3, 0.5,
                                      nodes_per_unit=64)
        path = tmp_path / "q.txt"
        write_potential(q, path)
        back = read_potential(path)
        assert np.array_equal(back.x, q.x)
        assert np.array_equal(back.values, q.values)

    def test_spectrum_round_trip_exact(self, tmp_path):
        s = Spectrum(np.array([1.1, 2.3, math.pi * 17 + 1e-13]),
                     np.array([0, 1, 2]))
        path = tmp_path / "s.txt"
        write_spectrum(s, path)
        back = read_spectrum(path)
        assert np.array_equal(back.values, s.values)
        assert np.array_equal(back.indices, s.indices)

    def test_two_spectra_round_trip(self, tmp_path):
        ts = TwoSpectra(np.array([1.0, 4.0]), np.array([2.0, 5.0]), 0.5)
        path = tmp_path / "ts.txt"
        write_two_spectra(ts, path)
        back = read_two_spectra(path, 0.5)
        assert np.array_equal(back.mu, ts.mu)
        assert np.array_equal(back.nu, ts.nu)

    def test_kernel_files(self, tmp_path):
        K = KernelPair.zero(0.5, nodes_per_unit=32)
        write_kernel(K, tmp_path)
        k1 = read_potential(tmp_path / "kernel_K1.txt")
        assert k1.length == 0.5

    def test_report_round_trip_exact(self, tmp_path):
        q = PotentialFn.from_callable(lambda x: x * 0.123456789012345, 0.5,
                                      nodes_per_unit=32)
        rep = ReconstructionReport(
            q1=q, h1=0.1 + 1e-15, a2=0.5, omega1=0.2,
            residual_main_eq=1.25e-12, residual_borg=3.5e-9,
            gram_condition=7.2, q1_error=1e-3, h1_error=2e-4, a2_error=None,
            rho=1e-3, wall_time=4.2)
        write_report(rep, tmp_path)
        back = read_report(tmp_path)
        for name in ("h1", "a2", "omega1", "residual_main_eq", "residual_borg",
                     "gram_condition", "q1_error", "h1_error", "rho",
                     "wall_time"):
            assert getattr(back, name) == getattr(rep, name)
        assert back.a2_error is None
        assert np.array_equal(back.q1.values, q.values)

    def test_free_problem_report_q1_zero(self, tmp_path):
        rep = ReconstructionReport(
            q1=PotentialFn.zero(0.5, nodes_per_unit=32), h1=0.0, a2=0.0,
            omega1=0.0, residual_main_eq=0.0, residual_borg=0.0,
            gram_condition=1.0)
        write_report(rep, tmp_path)
        assert np.all(read_report(tmp_path).q1.values == 0.0)

    def test_stability_csv(self, tmp_path):
        rows = [SweepRow(1e-3, 0, 1e-3, 0.01, 0.002, 10.0, 2.0, 1e-8),
                SweepRow(1e-3, 1, 1e-3, None, None, None, None, None,
                         status="failed: synthetic")]
        res = SweepResult(rows=rows, fitted_C=10.0, max_over_median=1.0,
                          all_succeeded=False)
        path = tmp_path / "stab.csv"
        write_stability(res, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("epsilon,seed,rho")
        assert len(lines) == 3
        assert lines[2].endswith("failed: synthetic")


class TestCLI:
    def test_forward_free_problem(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = forward\nd = 0.5\na1 = 1.0\n"
                       "num_eigenvalues = 5\nnodes_per_unit = 256\n")
        out = tmp_path / "out"
        rc = main(["forward", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        s = read_spectrum(out / "spectrum.txt")
        assert np.allclose(s.values, math.pi * np.arange(1, 6), atol=1e-8)
        assert (out / "effective_config.txt").exists()

    def test_num_eigenvalues_flag_overrides(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("num_eigenvalues = 5\nnodes_per_unit = 256\n")
        out = tmp_path / "out"
        rc = main(["forward", "--config", str(cfg), "--out", str(out),
                   "--num-eigenvalues", "3"])
        assert rc == 0
        assert len(read_spectrum(out / "spectrum.txt")) == 3

    def test_bad_config_exit_code_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nonsense_key = 1\n")
        assert main(["forward", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2

    def test_domain_error_exit_code_1(self, tmp_path):
        # invert on a gapped spectrum file: domain failure, exit 1
        spath = tmp_path / "spec.txt"
        n = np.concatenate([np.arange(1, 30), [31]])
        write_spectrum(Spectrum(n * math.pi, n), spath)
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"mode = ip1\nspectrum_file = {spath.name}\n"
                       "nodes_per_unit = 256\n")
        assert main(["invert", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1

    def test_invert_free_spectrum(self, tmp_path):
        spath = tmp_path / "spec.txt"
        n = np.arange(1, 81)
        write_spectrum(Spectrum(n * math.pi, n), spath)
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"mode = ip1\nspectrum_file = {spath.name}\n"
                       "a1 = 2.0\ntruncation = 32\nborg_modes = 12\n")
        out = tmp_path / "out"
        rc = main(["invert", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        rep = read_report(out)
        assert abs(rep.h1) < 1e-7
        assert abs(rep.a2) < 1e-7
        assert rep.q1.l2_norm() < 1e-6

    def test_roundtrip_with_potential_files(self, tmp_path):
        d = 0.5
        q1 = PotentialFn.from_callable(lambda x: 0.3 * math.cos(2 * math.pi * x), d)
        q2 = PotentialFn.from_callable(lambda x: 0.2 * math.sin(math.pi * x), 1 - d)
        write_potential(q1, tmp_path / "q1.txt")
        write_potential(q2, tmp_path / "q2.txt")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = roundtrip\nq1_file = q1.txt\nq2_file = q2.txt\n"
                       "h1 = 0.1\nh2 = -0.1\na1 = 2.0\na2 = 0.3\n"
                       "num_eigenvalues = 48\ntruncation = 48\nborg_modes = 16\n")
        out = tmp_path / "out"
        rc = main(["roundtrip", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        rep = read_report(out)
        assert rep.q1_error <= 5e-2
        assert rep.h1_error <= 5e-2

    def test_stability_smoke(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = stability\na1 = 1.5\nh1 = 0.1\n"
                       "num_eigenvalues = 40\ntruncation = 40\n"
                       "borg_modes = 12\ntrials = 1\n")
        out = tmp_path / "out"
        rc = main(["stability", "--config", str(cfg), "--out", str(out),
                   "--epsilon", "1e-3"])
        assert rc == 0
        lines = (out / "stability.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].endswith("ok")

    def test_identical_configs_byte_identical_outputs(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = forward\nd = 0.25\na1 = 2.0\nh2 = 0.1\n"
                       "num_eigenvalues = 8\nnodes_per_unit = 256\nseed = 3\n")
        outs = []
        for name in ("o1", "o2"):
            out = tmp_path / name
            assert main(["forward", "--config", str(cfg), "--out", str(out)]) == 0
            outs.append((out / "spectrum.txt").read_bytes())
        assert outs[0] == outs[1]

    def test_identical_inverse_runs_byte_identical_reports(self, tmp_path):
        spath = tmp_path / "spec.txt"
        n = np.arange(1, 41)
        write_spectrum(Spectrum(n * math.pi, n), spath)
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"mode = ip1\nspectrum_file = {spath.name}\na1 = 1.5\n"
                       "truncation = 24\nborg_modes = 8\nnodes_per_unit = 512\n")
        reports = []
        for name in ("o1", "o2"):
            out = tmp_path / name
            assert main(["invert", "--config", str(cfg), "--out", str(out)]) == 0
            text = (out / "report.txt").read_text()
            # wall_time is the one genuinely nondeterministic field
            reports.append("\n".join(l for l in text.splitlines()
                                     if not l.startswith("wall_time")))
            reports.append((out / "q1_recovered.txt").read_bytes())
        assert reports[0] == reports[2]
        assert reports[1] == reports[3]

    def test_basis_check_quarter(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("d = 0.25\na1 = 2.0\nnum_eigenvalues = 24\n"
                       "nodes_per_unit = 512\n")
        out = tmp_path / "out"
        rc = main(["basis-check", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        text = (out / "basis_check.txt").read_text()
        assert "gram_condition" in text and "density" in text
