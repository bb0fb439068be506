import pytest


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Every test gets its own eigenvalue cache directory."""
    d = tmp_path / "cache"
    monkeypatch.setenv("HENONBIF_CACHE_DIR", str(d))
    return d
