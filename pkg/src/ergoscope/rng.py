"""Counter-addressed uniform deviates.

Every draw is a pure function of ``(seed, stream, index)``, so sample ``i``
gets the same numbers whether it is generated alone, inside a chunk, or on
another worker. Backed by the Philox4x64 counter-based generator: the key
holds ``(seed, stream)``, the counter holds the sample index.
"""
import numpy as np

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4


class CounterStream:
    """Deterministic stream of uniform deviates addressed by sample index."""

    def __init__(self, seed, stream=0, width=6):
        if width < 1:
            raise ValueError("width must be >= 1")
        self.seed = int(seed)
        self.stream = int(stream)
        self.width = int(width)
        self._blocks = -(-self.width // _WORDS_PER_BLOCK)
        self._key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)

    def uniforms(self, start, count):
        """Return a ``(count, width)`` array of deviates in [0, 1) for indices start..start+count-1."""
        if count <= 0:
            return np.empty((0, self.width))
        words = self._blocks * _WORDS_PER_BLOCK
        counter = int(start) * self._blocks
        bg = np.random.Philox(
            counter=np.array([counter & _MASK64, counter >> 64, 0, 0], dtype=np.uint64),
            key=self._key,
        )
        raw = bg.random_raw(int(count) * words).reshape(int(count), words)[:, : self.width]
        return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def at(self, index):
        """Deviates for a single sample index."""
        return self.uniforms(index, 1)[0]


def chunk_ranges(n, chunk_size):
    """Fixed partition of ``range(n)``; independent of worker count."""
    return [(s, min(chunk_size, n - s)) for s in range(0, n, chunk_size)]
