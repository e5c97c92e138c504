import pytest

from literalis import FeatureRecord
from support import make_record


@pytest.fixture
def record() -> FeatureRecord:
    return make_record()
