"""Pytest configuration and fixtures.

Shared settings, the service container and a handful of small graphs used
across the suite live here. Service-specific fixtures stay in the test
modules.
"""

from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

from app.app_config import AppSettings
from app.config import Settings
from app.models.graph import BipartitePair
from app.services.container import ServiceContainer
from app.startup import create_container

# Load test environment variables from .env.test
_TEST_ENV_FILE = Path(__file__).parent.parent / ".env.test"
if _TEST_ENV_FILE.exists():
    load_dotenv(_TEST_ENV_FILE, override=True)


@pytest.fixture
def test_settings() -> Settings:
    """Infrastructure settings for tests."""
    return Settings(run_env="testing", log_level="DEBUG", default_seed=0, task_max_workers=2)


@pytest.fixture
def test_app_settings() -> AppSettings:
    """Algorithm settings for tests, with invariant checking switched on."""
    return AppSettings(check_invariants=True)


@pytest.fixture
def container(test_settings: Settings, test_app_settings: AppSettings) -> ServiceContainer:
    """Fully wired service container."""
    return create_container(test_settings, test_app_settings)


# ---------------------------------------------------------------------------
# Small pairs
# ---------------------------------------------------------------------------


@pytest.fixture
def complete_pair() -> BipartitePair:
    """K_{4,4} with X = 0..3 and Y = 4..7."""
    return BipartitePair.complete(4, 4)


@pytest.fixture
def perfect_matching_pair() -> BipartitePair:
    """Perfect matching x_i ~ y_i on 4 + 4 vertices."""
    return BipartitePair(range(4), range(4, 8), np.eye(4, dtype=bool))


@pytest.fixture
def two_block_pair() -> BipartitePair:
    """Two disjoint K_{2,2} blocks: {0,1}x{4,5} and {2,3}x{6,7}."""
    matrix = np.zeros((4, 4), dtype=bool)
    matrix[:2, :2] = True
    matrix[2:, 2:] = True
    return BipartitePair(range(4), range(4, 8), matrix)


@pytest.fixture
def eight_cycle_pair() -> BipartitePair:
    """The 8-cycle x0 y0 x1 y1 x2 y2 x3 y3 as a 4 + 4 pair."""
    matrix = np.zeros((4, 4), dtype=bool)
    for i in range(4):
        matrix[i, i] = True
        matrix[i, (i - 1) % 4] = True
    return BipartitePair(range(4), range(4, 8), matrix)


@pytest.fixture
def derangement_pair() -> BipartitePair:
    """K_{4,4} minus the perfect matching x_i ~ y_i."""
    return BipartitePair(range(4), range(4, 8), ~np.eye(4, dtype=bool))
