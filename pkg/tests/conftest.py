import pytest

from fetchguard import ContextSnapshot, DecisionEngine, default_config


@pytest.fixture(scope="session")
def shipped_config():
    # One shared instance so validation is memoized across the whole run.
    return default_config()


@pytest.fixture()
def engine(shipped_config):
    return DecisionEngine(shipped_config)


@pytest.fixture()
def friendly_context():
    return ContextSnapshot(room="kitchen", adult_present=True, verbal_affirmation=True, timestamp=0)
