import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sljump import ProblemSpec, eigenvalues, omega
from sljump._kernels import warmup
from sljump.ode_core import PotentialFn
from sljump.pipeline import Truth

settings.register_profile(
    "ci", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT-compile the propagator once so no timed test pays for it
    warmup()


def make_planted_half():
    """The reference d = 1/2 instance used across round-trip tests."""
    d = 0.5
    q1 = PotentialFn.from_callable(lambda x: 0.4 * math.cos(2 * math.pi * x), d)
    q2 = PotentialFn.from_callable(lambda x: 0.3 * math.sin(math.pi * x), 1 - d)
    return ProblemSpec(d, q1, q2, h1=0.2, h2=-0.1, a1=2.0, a2=0.5)


def make_planted_quarter():
    """Smooth d = 1/4 instance with a positive lowest eigenvalue."""
    d = 0.25
    q1 = PotentialFn.from_callable(
        lambda x: 0.5 + 0.3 * math.cos(4 * math.pi * x) + 0.2 * math.sin(2 * math.pi * x), d)
    q2 = PotentialFn.from_callable(lambda x: 0.1 + 0.2 * math.sin(math.pi * x), 1 - d)
    return ProblemSpec(d, q1, q2, h1=0.3, h2=0.1, a1=2.0, a2=0.5)


@pytest.fixture(scope="session")
def planted_half():
    return make_planted_half()


@pytest.fixture(scope="session")
def planted_half_truth(planted_half):
    return Truth(q1=planted_half.q1, h1=planted_half.h1, a2=planted_half.a2)


@pytest.fixture(scope="session")
def planted_half_spectrum_100(planted_half):
    return eigenvalues(planted_half, 100)


@pytest.fixture(scope="session")
def planted_half_spectrum_80(planted_half_spectrum_100):
    s = planted_half_spectrum_100
    return type(s)(s.values[:80].copy(), s.indices[:80].copy())


@pytest.fixture(scope="session")
def planted_half_omegas(planted_half):
    return (omega(planted_half.q1, planted_half.h1),
            omega(planted_half.q2, planted_half.h2))


@pytest.fixture(scope="session")
def planted_quarter():
    return make_planted_quarter()


@pytest.fixture(scope="session")
def free_half_a2():
    return ProblemSpec.free(d=0.5, a1=2.0)


@pytest.fixture(scope="session")
def free_half_spectrum_80(free_half_a2):
    return eigenvalues(free_half_a2, 80)


def l2_difference(q_rec: PotentialFn, q_ref: PotentialFn) -> float:
    diff = q_rec(q_ref.x) - q_ref.values
    return float(np.sqrt(np.trapezoid(diff**2, q_ref.x)))
