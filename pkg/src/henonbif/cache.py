"""On-disk JSON cache for eigenvalue sweeps.

One file per (N, alpha, m). Writes go through a temporary file and an
atomic rename under a file lock, so concurrent sweeps never see a torn
file. A file that fails to parse is reported, discarded and rebuilt.
"""

import json
import logging
import os
import tempfile
import warnings
from pathlib import Path

from filelock import FileLock

ENV_VAR = "HENONBIF_CACHE_DIR"
FORMAT_VERSION = 1

log = logging.getLogger(__name__)


def default_cache_dir():
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "henonbif"


def entry_key(resolution, p):
    return f"{int(resolution)}|{float(p)!r}"


class EigenCache:
    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def path(self, N, alpha, m):
        return self.directory / f"nu_N{N}_a{float(alpha)!r}_m{m}.json"

    def _lock(self, path):
        return FileLock(str(path) + ".lock")

    def _read(self, path):
        if not path.exists():
            return {}
        try:
            with open(path) as fh:
                data = json.load(fh)
            if data.get("version") != FORMAT_VERSION or not isinstance(data.get("entries"), dict):
                raise ValueError("unexpected layout")
            return data["entries"]
        except (OSError, ValueError) as exc:
            msg = f"discarding unreadable cache file {path}: {exc}"
            log.warning(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            try:
                path.unlink()
            except OSError:
                pass
            return {}

    def load(self, N, alpha, m):
        path = self.path(N, alpha, m)
        if not path.exists():
            return {}
        with self._lock(path):
            return self._read(path)

    def update(self, N, alpha, m, new_entries):
        """Merge ``new_entries`` (key -> list of eigenvalues) into the file."""
        if not new_entries:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(N, alpha, m)
        with self._lock(path):
            entries = self._read(path)
            entries.update(new_entries)
            payload = {"version": FORMAT_VERSION, "N": N, "alpha": alpha, "m": m, "entries": entries}
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=path.name, suffix=".tmp")
            try:
                with os.fdopen(fd, "w") as fh:
                    json.dump(payload, fh)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


class MemoryCache:
    """Process-local stand-in for :class:`EigenCache` (same interface)."""

    def __init__(self):
        self._store = {}

    def load(self, N, alpha, m):
        return dict(self._store.get((N, float(alpha), m), {}))

    def update(self, N, alpha, m, new_entries):
        self._store.setdefault((N, float(alpha), m), {}).update(new_entries)
