"""Run manifests: command line, input digests (64-bit FNV-1a), config echo."""

from __future__ import annotations

import os
import shlex
from dataclasses import dataclass, field

import numpy as np

from . import __version__

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF
_FAST_THRESHOLD = 4 << 20

_fast = None


def _fnv1a64_py(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def _fast_impl():
    global _fast
    if _fast is None:
        try:
            import numba
        except ImportError:
            _fast = False
        else:
            @numba.njit(cache=True)
            def loop(a, h):
                p = np.uint64(FNV_PRIME)
                for b in a:
                    h = (h ^ np.uint64(b)) * p
                return h

            _fast = loop
    return _fast


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of ``data``.

    Large buffers go through a numba-compiled loop when numba is installed;
    the result is identical either way.
    """
    if len(data) >= _FAST_THRESHOLD:
        loop = _fast_impl()
        if loop:
            return int(loop(np.frombuffer(data, dtype=np.uint8), np.uint64(FNV_OFFSET)))
    return _fnv1a64_py(data)


def file_digest(path: str | os.PathLike) -> str:
    with open(path, "rb") as fh:
        return f"{fnv1a64(fh.read()):016x}"


@dataclass
class RunManifest:
    argv: list[str]
    inputs: dict[str, str] = field(default_factory=dict)  # path -> hex digest
    config: dict[str, object] = field(default_factory=dict)
    version: str = f"costarr {__version__}"

    def add_input(self, path: str | os.PathLike) -> None:
        self.inputs[str(path)] = file_digest(path)

    def render(self) -> str:
        lines = [f"tool={self.version}", "command=" + shlex.join(["costarr", *self.argv])]
        lines += [f"input {p} fnv1a64={d}" for p, d in self.inputs.items()]
        lines += [f"config {k}={v}" for k, v in self.config.items()]
        return "\n".join(lines) + "\n"

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())
