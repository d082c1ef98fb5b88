"""Deterministic low-discrepancy sample generation.

Every sample is a pure function of (seed, pixel_index, sample_index,
dimension_index): a radical-inverse sequence in the dimension's prime base,
decorrelated per pixel/dimension by a Cranley-Patterson rotation whose offset
comes from a splitmix64 hash chain. Bit-identical across runs, thread
schedules, and between the compiled and pure-Python engines.
"""

from __future__ import annotations

from dataclasses import dataclass

_MASK64 = (1 << 64) - 1

#: Prime bases for the first 16 dimensions; higher dimensions reuse them
#: (the rotation offset still differs per dimension).
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)

_INV_2_64 = 1.0 / float(1 << 64)


def splitmix64(x: int) -> int:
    """One splitmix64 step; the core 64-bit mixing function."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def scramble_offset(seed: int, pixel_index: int, dimension: int) -> float:
    """Rotation offset in [0,1) for a (seed, pixel, dimension) triple."""
    h = splitmix64(seed & _MASK64)
    h = splitmix64((h ^ pixel_index) & _MASK64)
    h = splitmix64((h ^ dimension) & _MASK64)
    return h * _INV_2_64


def radical_inverse(base: int, index: int) -> float:
    """Digit-reversed fraction of index in the given base (van der Corput)."""
    if base < 2:
        raise ValueError("base must be >= 2")
    inv_base = 1.0 / base
    value = 0.0
    factor = inv_base
    i = index
    while i > 0:
        value += (i % base) * factor
        i //= base
        factor *= inv_base
    return value


def sample_value(seed: int, pixel_index: int, sample_index: int, dimension: int) -> float:
    """Scrambled low-discrepancy value in [0,1) for the given coordinates."""
    base = PRIMES[dimension % len(PRIMES)]
    v = radical_inverse(base, sample_index) + scramble_offset(seed, pixel_index, dimension)
    if v >= 1.0:
        v -= 1.0
    return v


@dataclass
class SampleStream:
    """Cursor over the sample lattice for one (seed, pixel, sample) triple.

    next_sample() consumes one dimension per call; the underlying values
    depend only on the four indices, never on call order or thread timing.
    """

    seed: int
    pixel_index: int
    sample_index: int = 0
    dimension: int = 0

    def next_sample(self) -> float:
        v = sample_value(self.seed, self.pixel_index, self.sample_index, self.dimension)
        self.dimension += 1
        return v

    def start_sample(self, sample_index: int) -> None:
        self.sample_index = sample_index
        self.dimension = 0


def star_discrepancy_1d(points) -> float:
    """Exact 1-D star discrepancy; brute-force oracle used by the tests."""
    xs = sorted(points)
    n = len(xs)
    if n == 0:
        raise ValueError("empty point set")
    worst = 0.0
    for i, x in enumerate(xs):
        worst = max(worst, abs((i + 1) / n - x), abs(x - i / n))
    return worst
