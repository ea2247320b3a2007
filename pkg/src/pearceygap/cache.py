"""Content-addressed cache for assembled kernel blocks, plus the advisory
per-root process lock.

Entries are keyed by a SHA-256 over (family, block times, contour/parameter
record, node coordinates), so identical kernel blocks are recognized across
runs and across the many stencil shifts of the PDE study that share times.
Every payload carries its own checksum; a mismatch (torn write, bit rot) is
treated as a miss and recomputed, never silently reused.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import zipfile

import numpy as np

from .exceptions import ConcurrencyError

__all__ = ["KernelCache", "CacheLock", "block_key", "default_root"]

_FORMAT = b"pearceygap-cache-1"
ENV_ROOT = "PEARCEYGAP_CACHE"
_DEFAULT_DIRNAME = ".pearceygap-cache"


def default_root(flag_value: str | None = None) -> str:
    """Cache root precedence: explicit flag, environment, project-local."""
    if flag_value:
        return flag_value
    env = os.environ.get(ENV_ROOT, "").strip()
    if env:
        return env
    return _DEFAULT_DIRNAME


def block_key(family: str, t_i: float, t_j: float, record: str, x_i, x_j) -> str:
    """Content address of one kernel block."""
    h = hashlib.sha256()
    h.update(_FORMAT)
    for part in (family, repr(float(t_i)), repr(float(t_j)), record):
        data = part.encode()
        h.update(str(len(data)).encode())
        h.update(data)
    for arr in (x_i, x_j):
        data = np.ascontiguousarray(arr, dtype=float).tobytes()
        h.update(str(len(data)).encode())
        h.update(data)
    return h.hexdigest()


def _payload_digest(grid: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(grid.dtype).encode())
    h.update(str(grid.shape).encode())
    h.update(np.ascontiguousarray(grid).tobytes())
    return h.hexdigest()


class KernelCache:
    """Directory of <key>.npz files, each holding one grid and its checksum."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> str:
        return os.path.join(self.root, key + ".npz")

    def lookup(self, key: str) -> np.ndarray | None:
        path = self._path(key)
        try:
            with np.load(path, allow_pickle=False) as data:
                grid = np.asarray(data["grid"])
                stored = str(data["digest"])
        except (OSError, KeyError, ValueError, EOFError, zipfile.BadZipFile):
            self.misses += 1
            return None
        if _payload_digest(grid) != stored:
            try:
                os.remove(path)
            except OSError:
                pass
            self.misses += 1
            return None
        self.hits += 1
        return grid

    def store(self, key: str, grid: np.ndarray) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".part")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, grid=grid, digest=_payload_digest(grid))
            os.replace(tmp, self._path(key))
        except BaseException:
            try:
                os.remove(tmp)
            except OSError:
                pass
            raise


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class CacheLock:
    """Advisory one-process-per-cache-root lock (pid file, stale-safe)."""

    def __init__(self, root: str):
        self.root = root
        self.path = os.path.join(root, "lock.pid")
        self._held = False

    def acquire(self) -> "CacheLock":
        os.makedirs(self.root, exist_ok=True)
        for _ in range(2):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if self._holder_stale():
                    try:
                        os.remove(self.path)
                    except OSError:
                        pass
                    continue
                raise ConcurrencyError(
                    f"cache root {self.root} is locked by another process"
                )
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            self._held = True
            return self
        raise ConcurrencyError(f"could not acquire lock in {self.root}")

    def _holder_stale(self) -> bool:
        try:
            with open(self.path) as fh:
                pid = int(fh.read().strip())
        except (OSError, ValueError):
            return True
        return not _pid_alive(pid)

    def release(self) -> None:
        if self._held:
            try:
                os.remove(self.path)
            except OSError:
                pass
            self._held = False

    def __enter__(self) -> "CacheLock":
        return self.acquire()

    def __exit__(self, *exc) -> None:
        self.release()
