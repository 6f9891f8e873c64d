"""Shared pytest configuration and fixtures."""

import sys
from pathlib import Path

import pytest

# Add the src directory to the Python path for imports
src_dir = Path(__file__).parent / "src"
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

from finite_gamma.spectra import build_gg_space, decompose  # noqa: E402


@pytest.fixture(autouse=True)
def setup_test_environment(monkeypatch, tmp_path):
    """Keep every test away from the user's cache directory."""
    monkeypatch.setenv("FINITE_GAMMA_CACHE_DIR", str(tmp_path / "cache"))
    yield


@pytest.fixture(scope="session")
def gg_2_3():
    """Gelfand-Graev space of GL_2(F_3), dimension 16."""
    return build_gg_space(2, 3)


@pytest.fixture(scope="session")
def components_2_3(gg_2_3):
    """Generic components of GL_2(F_3)."""
    return decompose(gg_2_3, seed=0)


@pytest.fixture(scope="session")
def cuspidal_2_3(components_2_3):
    return [c for c in components_2_3 if c.cuspidal]


@pytest.fixture(scope="session")
def components_1_3():
    """The two characters of F_3^x."""
    return decompose(build_gg_space(1, 3), seed=0)


@pytest.fixture(scope="session")
def components_3_2():
    """Generic components of GL_3(F_2), dimension 21."""
    return decompose(build_gg_space(3, 2), seed=0)


@pytest.fixture(scope="session")
def cuspidal_3_2(components_3_2):
    return [c for c in components_3_2 if c.cuspidal]


@pytest.fixture(scope="session")
def components_2_2():
    """Generic components of GL_2(F_2)."""
    return decompose(build_gg_space(2, 2), seed=0)


@pytest.fixture(scope="session")
def trivial_tau_1_3(components_1_3):
    """The trivial character of F_3^x."""
    return next(c for c in components_1_3 if abs(c.omega(2) - 1) < 1e-9)
