"""Self-contained deterministic random stream.

Benchmark instances and noise draws must be reproducible from a written
description alone, independent of any library's generator internals.  The
stream below is therefore fully specified here:

* State update (SplitMix64): ``state = (state + 0x9E3779B97F4A7C15) mod 2**64``,
  then the output ``z`` is the state passed through
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` with all arithmetic mod 2**64.
* A uniform double in ``[0, 1)`` is ``(z >> 11) * 2**-53``.
* Standard normals come from the Box-Muller transform: with ``u1`` drawn in
  ``(0, 1]`` as ``((z >> 11) + 1) * 2**-53`` and ``u2`` in ``[0, 1)``,
  the pair is ``r*cos(2*pi*u2), r*sin(2*pi*u2)`` where ``r = sqrt(-2*ln(u1))``.
  The cosine member is returned first; the sine member is cached and returned
  by the next call.

Consumers document their draw order next to their sampling code.
"""

from __future__ import annotations

import math

__all__ = ["SplitMix64"]

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit stream seeded by any integer."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = (z ^ (z >> 30)) * _MIX1 & _MASK
        z = (z ^ (z >> 27)) * _MIX2 & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_symmetric(self, amplitude: float) -> float:
        """Uniform double in [-amplitude, amplitude]."""
        return amplitude * (2.0 * self.uniform() - 1.0)

    def normal(self) -> float:
        """Standard normal draw via Box-Muller, one transform per two draws."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def normals(self, count: int) -> list[float]:
        return [self.normal() for _ in range(count)]
