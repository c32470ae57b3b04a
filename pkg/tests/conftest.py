import os
import sys
from unittest.mock import Mock

import pytest

# Add src directory to path BEFORE importing modules
current_dir = os.path.dirname(__file__)
src_dir = os.path.join(current_dir, '..', 'src')
sys.path.insert(0, src_dir)

from core.config import Settings  # noqa: E402
from models.multiindex import QMatrix, random_q  # noqa: E402
from schemas.config import RunConfig  # noqa: E402
from services.verification_suites import RunContext  # noqa: E402


@pytest.fixture
def mock_settings():
    """Create a settings object for tests."""
    settings = Settings(
        log_level="INFO",
        log_format="console",
        max_workers=2,
    )
    return settings


@pytest.fixture
def mock_logger():
    """Create a mock structlog logger for tests."""
    # Simple mock that has the structlog interface
    mock_logger = Mock()
    mock_logger.info = Mock()
    mock_logger.error = Mock()
    mock_logger.warning = Mock()
    mock_logger.debug = Mock()
    return mock_logger


@pytest.fixture
def q_zero():
    """Two generators with vanishing deformation."""
    return QMatrix.zero(2)


@pytest.fixture
def q_half():
    """Two generators with real q_12 = q_21 = 0.5."""
    return QMatrix.from_pairs(2, {(1, 2): 0.5})


@pytest.fixture
def q_complex():
    """Two generators with q_12 = 0.3+0.4j, so q_21 = 0.3-0.4j and |q| = 0.5."""
    return QMatrix.from_pairs(2, {(1, 2): 0.3 + 0.4j})


@pytest.fixture
def q_random3():
    """Three generators with a seeded random deformation."""
    return random_q(3, 0.6, seed=7)


@pytest.fixture
def small_config():
    """A run config with windows small enough for unit tests."""
    return RunConfig.model_validate(
        {
            "d": 2,
            "q_entries": [[None, [0.3, 0.2]], [[0.3, -0.2], None]],
            "fock_depth": 3,
            "j_depth": 3,
            "tail": {"ref": ";2", "L": 3, "M": 2},
            "normal_order": {
                "max_length": 3,
                "random_pairs": 20,
                "random_length": 4,
                "random_words": 50,
                "word_length": 8,
            },
        }
    )


@pytest.fixture
def run_context(small_config):
    """A run context over ``small_config``."""
    return RunContext(config=small_config, q_matrix=small_config.q_matrix(), max_workers=2)
