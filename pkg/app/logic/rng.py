"""splitmix64 substreams, one per record.

The state for record `i` under master seed `s` is mix64(s ^ mix64(i * GOLDEN)), so any
record can be regenerated on its own and index ranges can run in parallel.
"""
from bisect import bisect_right

from app.logic.weights import CategoricalDistribution

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def substream_state(master_seed: int, index: int) -> int:
    return mix64((master_seed & MASK64) ^ mix64((index * GOLDEN) & MASK64))


class RandomStream:
    __slots__ = ("state", "draws")

    def __init__(self, state: int):
        self.state = state & MASK64
        self.draws = 0

    @classmethod
    def for_record(cls, master_seed: int, index: int) -> "RandomStream":
        return cls(substream_state(master_seed, index))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        self.draws += 1
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform in [0, bound): top-k-bit candidates, rejecting those >= bound."""
        if bound < 1 or bound > 1 << 64:
            raise ValueError(f"bound {bound} out of range")
        shift = 64 - (bound - 1).bit_length()
        while True:
            r = self.next_u64() >> shift
            if r < bound:
                return r


def draw_categorical(dist: CategoricalDistribution, stream: RandomStream) -> str:
    r = stream.below(dist.total_weight)
    return dist.categories[bisect_right(dist.cumulative, r)]
