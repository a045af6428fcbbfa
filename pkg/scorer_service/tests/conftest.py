import logging

import pytest
from fastapi.testclient import TestClient

from scorer_service.app import create_app
from scorer_service.tiny import create_tiny_bundle

logging.getLogger("transformers").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory):
    return str(create_tiny_bundle(tmp_path_factory.mktemp("bundle"), seed=3))


@pytest.fixture(scope="session")
def client(bundle_dir):
    app = create_app(model_path=bundle_dir, max_batch=64)
    with TestClient(app) as test_client:
        yield test_client
