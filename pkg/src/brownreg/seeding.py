"""Reproducible random streams keyed by ``(root_seed, stream_id)``.

Splitting function: a stream is the numpy ``SeedSequence`` with
``entropy=root_seed`` and ``spawn_key=(stream_id, *subkey)``, fed to a
``PCG64`` bit generator.  Distinct keys give statistically independent
streams, and the same key always reproduces the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    root_seed: int = 0
    stream_id: int = 0
    subkey: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.root_seed) < _U64:
            raise ConfigError(f"root_seed must be a 64-bit unsigned integer, got {self.root_seed}")
        if int(self.stream_id) < 0 or any(int(k) < 0 for k in self.subkey):
            raise ConfigError("stream identifiers must be non-negative")

    def spawn(self, *keys: int) -> "SeedSpec":
        """Child stream, independent of the parent and of its siblings."""
        return SeedSpec(self.root_seed, self.stream_id, self.subkey + tuple(int(k) for k in keys))

    def trial(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.root_seed, int(stream_id), self.subkey)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.root_seed), spawn_key=(int(self.stream_id),) + self.subkey
        )
        return np.random.Generator(np.random.PCG64(seq))

    def to_dict(self) -> dict:
        return {"root_seed": int(self.root_seed), "stream_id": int(self.stream_id),
                "subkey": list(self.subkey)}


def check_seed(seed) -> SeedSpec:
    """Coerce ``None``, an int or a :class:`SeedSpec` into a :class:`SeedSpec`."""
    if seed is None:
        return SeedSpec()
    if isinstance(seed, SeedSpec):
        return seed
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return SeedSpec(int(seed))
    raise ConfigError(f"cannot interpret {seed!r} as a seed")
