"""Seeded, counter-based random streams.

Every trial owns one :class:`RngStream` derived from ``(master_seed, stream_index)``
through a Philox generator, so two runs with the same pair draw identical bits
no matter how trials are scheduled.

This is a research artifact. Philox is not a cryptographic source and floating
point Laplace/Gaussian samplers are known to leak through their low-order bits;
do not deploy this as a production privacy system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveScale

_MASK64 = (1 << 64) - 1


@dataclass
class RngStream:
    """Independent stream of random draws for one trial.

    With ``disable_noise=True`` every *privacy noise* draw (Laplace, Gaussian,
    Cauchy) returns exactly zero. Sampling draws are unaffected. The flag exists
    for deterministic tests only and makes every mechanism non-private.
    """

    master_seed: int
    stream_index: int = 0
    disable_noise: bool = False
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed) & _MASK64, spawn_key=(int(self.stream_index),)
        )
        self._gen = np.random.Generator(np.random.Philox(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, index: int) -> RngStream:
        """Child stream keyed on this stream's identity plus ``index``."""
        mixed = (int(self.master_seed) * 0x9E3779B97F4A7C15 + int(self.stream_index) + 1) & _MASK64
        return RngStream(mixed, index, self.disable_noise)

    # sampling draws

    def uniform(self, size=None):
        return self._gen.random(size)

    def bernoulli_mask(self, n: int, q: float) -> np.ndarray:
        if q >= 1.0:
            return np.ones(n, dtype=bool)
        if q <= 0.0:
            return np.zeros(n, dtype=bool)
        return self._gen.random(n) < q

    def choice_without_replacement(self, population: int, k: int) -> np.ndarray:
        return np.sort(self._gen.choice(population, size=k, replace=False))

    # privacy noise

    def laplace(self, scale: float, size=None):
        """Laplace(0, scale) by inverting the CDF of a uniform draw."""
        if not scale > 0:
            raise NonPositiveScale(f"Laplace scale must be positive, got {scale}")
        if self.disable_noise:
            return 0.0 if size is None else np.zeros(size)
        u = self._gen.random(size) - 0.5
        # 1 - 2|u| lies in (0, 1]; u = -0.5 exactly would give log(0)
        mag = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
        draw = -scale * np.sign(u) * np.log(mag)
        return float(draw) if size is None else draw

    def gaussian(self, sigma: float, size=None):
        if not sigma > 0:
            raise NonPositiveScale(f"Gaussian sigma must be positive, got {sigma}")
        if self.disable_noise:
            return 0.0 if size is None else np.zeros(size)
        draw = sigma * self._gen.standard_normal(size)
        return float(draw) if size is None else draw

    def cauchy(self, scale: float, size=None):
        if not scale > 0:
            raise NonPositiveScale(f"Cauchy scale must be positive, got {scale}")
        if self.disable_noise:
            return 0.0 if size is None else np.zeros(size)
        u = self._gen.random(size)
        draw = scale * np.tan(math.pi * (u - 0.5))
        return float(draw) if size is None else draw
