import sys

import pytest
from hypothesis import HealthCheck, settings

from pvadirac.config import RunConfig
from pvadirac.dirac import dirac_reduce
from pvadirac.model import sl3min, sl3red
from pvadirac.pva import PVAStructure

settings.register_profile(
    "default", max_examples=100, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def sl3(cfg):
    return sl3min(cfg)


@pytest.fixture(scope="session")
def sl3_reduced_model(cfg):
    return sl3red(cfg)


@pytest.fixture(scope="session")
def sl3_dirac(sl3):
    """Dirac reduction of H1 by phi, with H0 as companion."""
    return dirac_reduce(sl3.structure("H1"), sl3.constraints("phi"), 8,
                        companion=sl3.structure("H0"))


@pytest.fixture(scope="session")
def reduced_pair(sl3, sl3_dirac):
    HC = PVAStructure("H0C", sl3_dirac.H_C)
    HD = sl3_dirac.reduced("H1D")
    HD.frac = sl3.fraction("HD1")
    return HC, HD


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
