import numpy as np
import pytest

from jointwitness import database
from jointwitness.config import settings


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def temp_database(tmp_path, monkeypatch):
    """Point the run history at a fresh sqlite file."""
    url = f"sqlite+aiosqlite:///{tmp_path / 'history' / 'runs.db'}"
    monkeypatch.setattr(settings, "database_url", url)
    monkeypatch.setattr(database, "engine", None)
    monkeypatch.setattr(database, "async_session", None)
    return url
