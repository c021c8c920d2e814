"""Conservative zero-type base: the stationary path measure of a recurrent walk.

Omega is the space of bi-infinite paths of a symmetric integer random walk,
mu = (counting measure on the time-0 position) x (walk law forward and
backward), T the time shift, and f(path) = v * 1{path(0) == 0}.  For a
symmetric walk the time reversal under counting measure is the same walk, so
every quantity reduces to finite dynamic programs over positions.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from ._core import BaseSystem, DeclaredClass, PointBlock, WindowSpec


class RandomWalkBase(BaseSystem):
    family = "NullRecurrentWalk"
    declared_class = DeclaredClass.ZERO_TYPE

    def __init__(self, steps, probs=None, mark: float = 1.0):
        steps = np.atleast_1d(np.asarray(steps))
        if not np.all(steps == np.round(steps)):
            raise ValueError("steps must be integers")
        steps = steps.astype(int)
        probs = np.full(steps.size, 1.0 / steps.size) if probs is None else np.asarray(probs, dtype=float)
        if probs.shape != steps.shape or np.any(probs < 0) or not np.isclose(probs.sum(), 1.0):
            raise ValueError("step probabilities must be a probability vector matching steps")
        law = {}
        for s, p in zip(steps.tolist(), probs.tolist()):
            if p > 0:
                law[s] = law.get(s, 0.0) + p
        drift = sum(s * p for s, p in law.items())
        if abs(drift) > 1e-12:
            raise ValueError(f"step law has drift {drift}; the walk is transient")
        if any(abs(law.get(-s, 0.0) - p) > 1e-12 for s, p in law.items()):
            raise ValueError("step law must be symmetric (the reversed chain is assumed to be the same walk)")
        if set(law) <= {0}:
            raise ValueError("step law must move")
        if mark == 0 or not np.isfinite(mark):
            raise ValueError("mark value must be finite and nonzero")
        self.steps = np.array(sorted(law), dtype=int)
        self.probs = np.array([law[s] for s in self.steps])
        self.mark = float(mark)
        self.reach = int(np.abs(self.steps).max())
        self._kernel = np.zeros(2 * self.reach + 1)
        self._kernel[self.steps + self.reach] = self.probs

    def params(self) -> dict:
        return {"steps": self.steps.tolist(), "probs": self.probs.tolist(), "mark": self.mark}

    @property
    def observable(self) -> str:
        return f"f(path) = {self.mark:g} * 1{{path(0) == 0}}"

    @property
    def nonnegative(self) -> bool:
        return self.mark > 0

    # -- dynamic programs ---------------------------------------------------
    def _constrained_prob(self, constraints: dict) -> float:
        """P_0(path(d) == 0 where constraints[d], path(d) != 0 where not), d >= 1."""
        if not constraints:
            return 1.0
        horizon = max(constraints)
        dist = np.array([1.0])
        for d in range(1, horizon + 1):
            dist = np.convolve(dist, self._kernel)
            centre = dist.size // 2
            if d in constraints:
                if constraints[d]:
                    keep = dist[centre]
                    dist = np.zeros_like(dist)
                    dist[centre] = keep
                else:
                    dist[centre] = 0.0
        return float(dist.sum())

    @lru_cache(maxsize=64)
    def _avoid_table(self, depth: int) -> np.ndarray:
        """a[r, x + X] = P_x(no visit to 0 during the next r steps), |x| <= X."""
        X = self.reach * (depth + 1)
        table = np.ones((depth + 1, 2 * X + 1))
        for r in range(1, depth + 1):
            prev = np.pad(table[r - 1], self.reach, constant_values=1.0)
            prev[self.reach + X] = 0.0  # landing on 0 is forbidden
            cur = np.zeros(2 * X + 1)
            for s, p in zip(self.steps, self.probs):
                cur += p * prev[self.reach + s: self.reach + s + 2 * X + 1]
            table[r] = cur
        return table

    def first_hit_masses(self, n: int) -> np.ndarray:
        """m_i = mu(first visit to 0 inside [0, n) happens at time i)."""
        table = self._avoid_table(max(n - 1, 0))
        X = (table.shape[1] - 1) // 2
        m = np.ones(n)
        for i in range(1, n):
            nz = self.steps != 0
            m[i] = np.sum(self.probs[nz] * table[i - 1][self.steps[nz] + X])
        return m

    def visit_mass(self, times) -> float:
        """mu(path visits 0 at some time in the given finite set)."""
        times = sorted(set(int(t) for t in times))
        total = 0.0
        for j, t in enumerate(times):
            total += self._constrained_prob({t - s: False for s in times[:j]})
        return total

    def return_probability(self, k: int) -> float:
        return self._constrained_prob({abs(k): True}) if k else 1.0

    # -- measure ------------------------------------------------------------
    def _marked(self, w: WindowSpec) -> bool:
        return abs(self.mark) > w.threshold

    def hit_mass(self, w: WindowSpec) -> float:
        return float(self.first_hit_masses(w.length).sum()) if self._marked(w) else 0.0

    def correlation_exact(self, w: WindowSpec, k: int) -> float:
        if not self._marked(w):
            return 0.0
        k = abs(int(k))
        n = w.length
        if k == 0:
            return self.hit_mass(w)
        union = set(range(n)) | set(range(k, k + n))
        return 2 * self.hit_mass(w) - self.visit_mass(union)

    def small_jump_bound(self, w: WindowSpec) -> np.ndarray:
        return np.full(w.length, 0.0 if self._marked(w) else self.mark ** 2)

    def marginal_atoms(self, coords, w):
        coords = [int(c) for c in coords]
        if min(coords) < 0 or max(coords) >= w.length:
            raise ValueError("walk marginals are only available for coordinates inside the window")
        if not self._marked(w):
            return np.zeros(0), np.zeros((0, len(coords)))
        uniq = sorted(set(coords))
        weights, vectors = [], []
        for pattern in product((0, 1), repeat=len(uniq)):
            if not any(pattern):
                continue
            first = pattern.index(1)
            t0 = uniq[first]
            back = {t0 - c: False for c in uniq[:first]}
            fwd = {c - t0: bool(z) for c, z in zip(uniq[first + 1:], pattern[first + 1:])}
            mass = self._constrained_prob(back) * self._constrained_prob(fwd)
            if mass > 0:
                zeros = dict(zip(uniq, pattern))
                weights.append(mass)
                vectors.append([self.mark * zeros[c] for c in coords])
        return np.array(weights), np.array(vectors, dtype=float).reshape(-1, len(coords))

    # -- sampling -----------------------------------------------------------
    def _free_steps(self, size, rng):
        return self.steps[rng.choice(self.steps.size, size=size, p=self.probs)]

    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        n = w.length
        m = self.first_hit_masses(n)
        first = rng.choice(n, size=count, p=m / m.sum()) if count else np.zeros(0, int)
        table = self._avoid_table(max(n - 1, 0))
        X = (table.shape[1] - 1) // 2
        width = hi - lo
        pos = np.zeros((count, width), dtype=np.int64)
        # forward from the first hit: unconditioned
        for t in range(lo, hi):
            c = t - lo
            after = first < t
            if c > 0 and after.any():
                pos[after, c] = pos[after, c - 1] + self._free_steps(int(after.sum()), rng)
            pos[first == t, c] = 0
        # backward from the first hit: avoid 0 on [0, first) via the DP table, free before 0
        cum = np.cumsum(self.probs)
        for t in range(min(n, hi) - 1, lo - 1, -1):
            rows = np.flatnonzero(first > t)
            if rows.size == 0:
                continue
            x = pos[rows, t + 1 - lo]
            if t >= 0:
                y = x[:, None] + self.steps[None, :]
                inside = np.abs(y) <= X
                avoid = np.ones(y.shape)
                avoid[inside] = table[t][y[inside] + X]
                wts = self.probs[None, :] * avoid * (y != 0)
                cw = np.cumsum(wts, axis=1)
                u = rng.random(rows.size) * cw[:, -1]
                j = (cw < u[:, None]).sum(axis=1)
                pos[rows, t - lo] = y[np.arange(rows.size), j]
            else:
                j = np.searchsorted(cum, rng.random(rows.size) * cum[-1], side="right")
                pos[rows, t - lo] = x + self.steps[np.minimum(j, self.steps.size - 1)]
        values = self.mark * (pos == 0)
        return PointBlock(self, values.astype(float), lo, {"first_hit": first})

    def _shift_state(self, state, k):
        return {"first_hit": state["first_hit"] - k}

    def scaled(self, b: float) -> "RandomWalkBase":
        return RandomWalkBase(self.steps, self.probs, self.mark * b)
