from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from service_setup import LiveService  # noqa: E402


@pytest.fixture(scope="session")
def live_service():
    with LiveService() as service:
        yield service
