import pytest

from cvcodec.fixtures import generate_fixture_corpus
from cvcodec.pipeline import EncodeManifest


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    generate_fixture_corpus(root)
    return root


@pytest.fixture(scope="session")
def corpus_manifest_path(corpus_dir):
    return corpus_dir / "manifest.json"


@pytest.fixture()
def corpus_manifest(corpus_manifest_path):
    return EncodeManifest.from_file(corpus_manifest_path)
