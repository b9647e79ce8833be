"""
Configuration for the command-line integration suite.

These tests drive the ``spectriple`` entry point end to end and write
their reports into a temporary directory.
"""

import json
import shutil
import tempfile

import pytest


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "integration: mark test as integration test")
    config.addinivalue_line("markers", "slow: mark test as slow running")


@pytest.fixture(scope="session")
def test_output_dir():
    """
    Create a temporary directory for test outputs.

    Yields
    ------
    str
        Path to temporary output directory
    """
    temp_dir = tempfile.mkdtemp(prefix="spectriple_integration_")
    yield temp_dir
    # Cleanup after tests
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def write_document(tmp_path):
    """
    Write a triple document (or raw text) to a file and return its path.
    """

    def _write(doc, name="triple.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return _write


# Pytest collection configuration
def pytest_collection_modifyitems(config, items):
    """Add the integration marker to everything collected from this directory."""
    for item in items:
        if "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)
