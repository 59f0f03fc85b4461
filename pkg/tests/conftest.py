import pytest

from cmsg.backends import BackendClient, BackendEndpointConfig, FakeBackend, bundled_fixtures
from cmsg.lexicon import bundled_lexicon


@pytest.fixture(scope="session")
def lexicon():
    return bundled_lexicon()


@pytest.fixture(scope="session")
def fixtures():
    return bundled_fixtures()


@pytest.fixture(scope="session")
def fake_backend():
    return FakeBackend()


@pytest.fixture(scope="session")
def client(fake_backend):
    return BackendClient(BackendEndpointConfig(), fake=fake_backend)
