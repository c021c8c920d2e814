"""Positive-type infinite-measure base built by cutting and stacking.

Stage 0 is the unit interval B = [0, 1).  Stage m + 1 cuts the stage-m
column into two halves, puts the right half directly on top of the left and
adds spacers above so that the column height is growth**(m + 1).  After
``depth`` stages B occupies the levels

    L = { sum_{j < depth} d_j growth**j : d_j in {0, 1} }

of a column of width 2**-depth.  Spacers grow without bound, so the total
measure is infinite, while B returns to itself with probability one half at
every column height.  Those heights are the rigidity lags.

A sampled point is stored by its level relative to the column through which
its window orbit passes.  Levels below the column are spacers of a later
stage as long as they stay within the top spacer gap, which is what bounds
the representable index range.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ._core import BaseSystem, DeclaredClass, DepthExceededError, PointBlock, WindowSpec


class RigidTowerBase(BaseSystem):
    family = "RigidTower"
    declared_class = DeclaredClass.POSITIVE_TYPE

    def __init__(self, stage_depth: int, growth: int = 10, mark: float = 1.0):
        if int(stage_depth) != stage_depth or stage_depth < 1:
            raise ValueError("stage_depth must be a positive integer")
        if int(growth) != growth or growth < 3:
            raise ValueError("growth must be an integer >= 3 so that every stage adds spacers")
        if mark == 0 or not np.isfinite(mark):
            raise ValueError("mark value must be finite and nonzero")
        self.depth = int(stage_depth)
        self.growth = int(growth)
        self.mark = float(mark)
        if self.growth ** self.depth > 10 ** 7:
            raise ValueError("column height above 1e7 levels is not supported")

    def params(self) -> dict:
        return {"stage_depth": self.depth, "growth": self.growth, "cuts": 2,
                "spacers": self.spacer_counts, "mark": self.mark}

    @property
    def observable(self) -> str:
        return f"f(x) = {self.mark:g} * 1{{x in [0, 1)}}"

    @property
    def nonnegative(self) -> bool:
        return self.mark > 0

    @property
    def height(self) -> int:
        return self.growth ** self.depth

    @property
    def spacer_counts(self) -> list[int]:
        """Spacers added on top at each stage."""
        return [self.growth ** (m + 1) - 2 * self.growth ** m for m in range(self.depth)]

    @cached_property
    def levels(self) -> np.ndarray:
        lv = np.zeros(1, dtype=np.int64)
        for j in range(self.depth):
            lv = np.concatenate([lv, lv + self.growth ** j])
        return np.sort(lv)

    @cached_property
    def _membership(self) -> np.ndarray:
        member = np.zeros(self.height, dtype=bool)
        member[self.levels] = True
        return member

    @property
    def level_width(self) -> float:
        return 2.0 ** -self.depth

    @property
    def max_span(self) -> int:
        """Largest orbit span whose visits to B are fixed by the column alone."""
        return self.height - int(self.levels[-1]) - 1

    @property
    def rigidity_lags(self) -> tuple[int, ...]:
        return tuple(self.growth ** m for m in range(self.depth))

    def representable_lags(self, n: int) -> tuple[int, ...]:
        return tuple(k for k in self.rigidity_lags if n + k <= self.max_span)

    def _check_span(self, span: int):
        if span > self.max_span:
            raise DepthExceededError(
                f"orbit span {span} exceeds {self.max_span} representable at stage_depth {self.depth}"
            )

    # -- exact combinatorics --------------------------------------------------
    def in_base(self, level) -> np.ndarray:
        level = np.asarray(level, dtype=np.int64)
        out = np.zeros(level.shape, dtype=bool)
        ok = (level >= 0) & (level < self.height)
        out[ok] = self._membership[level[ok]]
        return out

    def window_levels(self, n: int) -> np.ndarray:
        """Levels (relative to the column) whose orbit enters B within n steps."""
        self._check_span(n)
        return np.unique((self.levels[:, None] - np.arange(n)[None, :]).ravel())

    def hit_mass(self, w: WindowSpec) -> float:
        if abs(self.mark) <= w.threshold:
            return 0.0
        return self.level_width * self.window_levels(w.length).size

    def correlation_exact(self, w: WindowSpec, k: int) -> float:
        if abs(self.mark) <= w.threshold:
            return 0.0
        k = abs(int(k))
        self._check_span(w.length + k)
        u = self.window_levels(w.length)
        return self.level_width * np.intersect1d(u, u - k).size

    def small_jump_bound(self, w: WindowSpec) -> np.ndarray:
        # points outside A(w) have f o T^i = 0 on the window, or |mark| <= eps
        if abs(self.mark) > w.threshold:
            return np.zeros(w.length)
        return np.full(w.length, self.mark ** 2)

    def marginal_atoms(self, coords, w):
        coords = np.asarray(coords, dtype=int)
        if coords.min() < 0 or coords.max() >= w.length:
            raise ValueError("tower marginals are only available for coordinates inside the window")
        if abs(self.mark) <= w.threshold:
            return np.zeros(0), np.zeros((0, coords.size))
        u = self.window_levels(w.length)
        vals = self.mark * self.in_base(u[:, None] + coords[None, :])
        vals = vals[np.any(vals != 0, axis=1)]
        if vals.size == 0:
            return np.zeros(0), np.zeros((0, coords.size))
        uniq, counts = np.unique(vals, axis=0, return_counts=True)
        return counts * self.level_width, uniq.astype(float)

    # -- sampling -----------------------------------------------------------
    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        self._check_span(max(hi, w.length - lo))
        u = self.window_levels(w.length)
        level = u[rng.integers(u.size, size=count)]
        values = self.mark * self.in_base(level[:, None] + np.arange(lo, hi)[None, :])
        return PointBlock(self, values.astype(float), lo, {"level": level})

    def orbit_value(self, block, row, i) -> float:
        level = int(block.state["level"][row])
        lo_ok = level + i >= -(self.max_span - 1)
        hi_ok = level + i < self.height
        if not (lo_ok and hi_ok):
            raise DepthExceededError(f"orbit index {i} not representable at stage_depth {self.depth}")
        return self.mark * float(self.in_base(level + i))

    def _shift_state(self, state, k):
        return {"level": state["level"] + k}

    def scaled(self, b: float) -> "RigidTowerBase":
        return RigidTowerBase(self.depth, self.growth, self.mark * b)
