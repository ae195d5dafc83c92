"""Integer-percentage relative noise: specs, grid enumeration and boxes.

A noise vector ``d`` perturbs an input ``x`` node-wise as
``x[i] + x[i] * d[i] / 100``.  The all-zero vector adds an exact zero, so it
is the identity on every input.  Each rounded step is monotone in ``d[i]``,
which is what lets interval endpoints of a box be computed by applying the
box corners.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, GridTooLarge, SingletonBox

NoiseVector = tuple[int, ...]

MAX_GRID = 2**63 - 1


@dataclass(frozen=True)
class NoiseSpec:
    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        ranges = tuple((int(lo), int(hi)) for lo, hi in self.ranges)
        for i, (lo, hi) in enumerate(ranges):
            if lo > hi:
                raise ValueError(f"node {i}: empty noise range [{lo}, {hi}]")
        object.__setattr__(self, "ranges", ranges)

    @classmethod
    def symmetric(cls, delta: int, n: int) -> "NoiseSpec":
        if delta < 0:
            raise ValueError("noise bound must be non-negative")
        return cls(((-delta, delta),) * n)

    @property
    def dim(self) -> int:
        return len(self.ranges)

    @property
    def delta(self) -> int | None:
        """The bound D if this is ``symmetric(D)``, else None."""
        bounds = {hi for lo, hi in self.ranges if lo == -hi}
        if len(bounds) == 1 and all(lo == -hi for lo, hi in self.ranges):
            return bounds.pop()
        return None

    def cardinality(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self.ranges)

    def box(self) -> "NoiseBox":
        return NoiseBox(tuple(lo for lo, _ in self.ranges), tuple(hi for _, hi in self.ranges))

    def contains(self, nv: Sequence[int]) -> bool:
        return len(nv) == self.dim and all(lo <= d <= hi for d, (lo, hi) in zip(nv, self.ranges))

    def encode(self) -> str:
        if self.delta is not None:
            return str(self.delta)
        return ",".join(f"{lo}:{hi}" for lo, hi in self.ranges)

    @classmethod
    def parse_ranges(cls, text: str) -> "NoiseSpec":
        """Parse ``lo0:hi0,lo1:hi1,...``."""
        ranges = []
        for part in text.split(","):
            lo, _, hi = part.strip().partition(":")
            ranges.append((int(lo), int(hi)))
        return cls(tuple(ranges))


def apply_noise(x, nv) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(nv, dtype=np.int64)
    if x.shape[-1] != d.shape[-1]:
        raise DimensionMismatch(f"{x.shape[-1]} features but {d.shape[-1]} noise entries")
    return x + x * d.astype(np.float64) / 100.0


def grid_iterator(spec: NoiseSpec) -> Iterator[NoiseVector]:
    """Every grid point of ``spec`` once, in lexicographic order."""
    if spec.cardinality() > MAX_GRID:
        raise GridTooLarge(f"grid has {spec.cardinality()} points")
    return itertools.product(*(range(lo, hi + 1) for lo, hi in spec.ranges))


def grid_chunks(spec: NoiseSpec, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """Lexicographic grid as (k, N) int64 arrays of at most ``chunk`` rows."""
    total = spec.cardinality()
    if total > MAX_GRID:
        raise GridTooLarge(f"grid has {total} points")
    lows = np.array([lo for lo, _ in spec.ranges], dtype=np.int64)
    radix = [hi - lo + 1 for lo, hi in spec.ranges]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        if not radix:
            yield np.zeros((len(idx), 0), dtype=np.int64)
            continue
        digits = np.empty((len(idx), len(radix)), dtype=np.int64)
        for i in range(len(radix) - 1, -1, -1):
            idx, digits[:, i] = np.divmod(idx, radix[i])
        yield digits + lows


@dataclass(frozen=True, order=True)
class NoiseBox:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"malformed box {self.lo} .. {self.hi}")

    @classmethod
    def from_intervals(cls, intervals) -> "NoiseBox":
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.lo, self.hi))

    def size(self) -> int:
        return math.prod(b - a + 1 for a, b in zip(self.lo, self.hi))

    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def spec(self) -> NoiseSpec:
        return NoiseSpec(tuple(self.intervals))


def split_box(box: NoiseBox) -> tuple[NoiseBox, NoiseBox]:
    """Halve ``box`` along its widest dimension (lowest index on ties)."""
    if box.is_singleton():
        raise SingletonBox(f"cannot split single grid point {box.lo}")
    widths = [b - a for a, b in zip(box.lo, box.hi)]
    k = widths.index(max(widths))
    mid = (box.lo[k] + box.hi[k]) // 2
    left_hi = box.hi[:k] + (mid,) + box.hi[k + 1 :]
    right_lo = box.lo[:k] + (mid + 1,) + box.lo[k + 1 :]
    return NoiseBox(box.lo, left_hi), NoiseBox(right_lo, box.hi)


def noisy_input_bounds(x: np.ndarray, box: NoiseBox) -> tuple[np.ndarray, np.ndarray]:
    """Exact float range of ``apply_noise(x, d)`` over ``d`` in ``box``."""
    a = apply_noise(x, box.lo)
    b = apply_noise(x, box.hi)
    return np.minimum(a, b), np.maximum(a, b)
