"""Shared fixtures: cheap cached domain objects and artifact isolation."""
import pytest

from wormym.params import PhysParams
from wormym.statics import enumerate_statics, find_static, saddle_profile


@pytest.fixture(scope="session")
def p35() -> PhysParams:
    return PhysParams(ell=3.5)


@pytest.fixture(scope="session")
def saddle35(p35):
    return saddle_profile(p35)


@pytest.fixture(scope="session")
def w1_35(p35):
    return find_static(p35, 1)


@pytest.fixture(scope="session")
def w2_35(p35):
    return find_static(p35, 2)


@pytest.fixture(scope="session")
def catalogue65():
    return enumerate_statics(PhysParams(ell=6.5))


@pytest.fixture(autouse=True)
def _isolated_artifacts(tmp_path, monkeypatch):
    """Keep every test's artifacts and config lookups inside tmp_path."""
    monkeypatch.delenv("WORMYM_OUTDIR", raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
