"""Deterministic, splittable randomness source."""

import hashlib

import numpy as np

_STREAM_MASK = (1 << 63) - 1


class RngState:
    """Seed plus stream counter from which numpy generators are derived.

    Two states with the same seed and stream produce identical draw
    sequences. Child streams are derived by hashing a label into a new
    stream id, so a single seed reproduces an entire pipeline run.
    """

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = int(seed)
        self.stream = int(stream)
        self._generator: np.random.Generator | None = None

    def generator(self) -> np.random.Generator:
        """Return the generator for this stream, created on first use."""
        if self._generator is None:
            sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
            self._generator = np.random.Generator(np.random.PCG64(sequence))
        return self._generator

    def spawn(self, label: str) -> "RngState":
        """Derive an independent state for a named stage."""
        digest = hashlib.blake2b(f"{self.stream}:{label}".encode(), digest_size=8).digest()
        return RngState(self.seed, int.from_bytes(digest, "big") & _STREAM_MASK)

    def child(self, index: int) -> "RngState":
        """Derive the state of the index-th sample of a batch."""
        return self.spawn(f"#{index}")

    def to_dict(self) -> dict[str, int]:
        return {"seed": self.seed, "stream": self.stream}

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, stream={self.stream})"
