"""Disjoint union of base systems with nonnegative weights."""
from __future__ import annotations

import numpy as np

from ._core import BaseSystem, DeclaredClass, PointBlock, WindowSpec


class DisjointUnionBase(BaseSystem):
    """mu = sum_j weight_j * mu_j on the disjoint union of the component spaces."""

    family = "DisjointUnion"
    declared_class = DeclaredClass.COMPOSITE

    def __init__(self, components, weights=None):
        components = list(components)
        if not components:
            raise ValueError("a disjoint union needs at least one component")
        weights = np.ones(len(components)) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (len(components),) or np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("one positive finite weight per component is required")
        for c in components:
            if not isinstance(c, BaseSystem):
                raise TypeError(f"component {c!r} is not a base system")
        self.components = components
        self.weights = weights

    def params(self):
        return {"components": [c.describe() for c in self.components], "weights": self.weights.tolist()}

    @property
    def observable(self):
        return "f restricted to each component is that component's observable"

    @property
    def nonnegative(self):
        return all(c.nonnegative for c in self.components)

    @property
    def square_integrable(self):
        return all(c.square_integrable for c in self.components)

    @property
    def rigidity_lags(self):
        return tuple(sorted({k for c in self.components for k in c.rigidity_lags}))

    def component_classes(self):
        return tuple(cls for c in self.components for cls in c.component_classes())

    def component_masses(self, w: WindowSpec) -> np.ndarray:
        return np.array([wt * c.hit_mass(w) for c, wt in zip(self.components, self.weights)])

    def hit_mass(self, w):
        return float(self.component_masses(w).sum())

    def correlation_exact(self, w, k):
        return float(sum(wt * c.correlation_exact(w, k) for c, wt in zip(self.components, self.weights)))

    def small_jump_bound(self, w):
        return sum(wt * c.small_jump_bound(w) for c, wt in zip(self.components, self.weights))

    def marginal_atoms(self, coords, w):
        parts = [c.marginal_atoms(coords, w) for c in self.components]
        weights = np.concatenate([wt * p[0] for p, wt in zip(parts, self.weights)])
        vectors = np.concatenate([p[1].reshape(-1, len(coords)) for p in parts])
        return weights, vectors

    def integrate(self, g, coords, w):
        return sum(wt * c.integrate(g, coords, w) for c, wt in zip(self.components, self.weights))

    def exp_integral(self, z, coords, w):
        return sum(wt * c.exp_integral(z, coords, w) for c, wt in zip(self.components, self.weights))

    def linear_compensator(self, w):
        return sum(wt * c.linear_compensator(w) for c, wt in zip(self.components, self.weights))

    def truncated_compensator(self, w):
        return sum(wt * c.truncated_compensator(w) for c, wt in zip(self.components, self.weights))

    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        masses = self.component_masses(w)
        pick = rng.choice(len(masses), size=count, p=masses / masses.sum()) if count else np.zeros(0, int)
        values = np.zeros((count, hi - lo))
        row = np.zeros(count, dtype=np.int64)
        parts = []
        for j, comp in enumerate(self.components):
            rows = np.flatnonzero(pick == j)
            sub = comp.sample_block(w, rows.size, rng, lo, hi) if rows.size else None
            parts.append(sub)
            if sub is not None:
                values[rows] = sub.values
                row[rows] = np.arange(rows.size)
        return PointBlock(self, values, lo, {"component": pick, "row": row}, {"parts": tuple(parts)})

    def orbit_value(self, block, row, i):
        j = int(block.state["component"][row])
        sub = block.shared["parts"][j]
        return self.components[j].orbit_value(sub, int(block.state["row"][row]), i)

    def shift_block(self, block, k):
        parts = tuple(None if p is None else p.system.shift_block(p, k) for p in block.shared["parts"])
        return PointBlock(self, block.values, block.lo - k, dict(block.state), {"parts": parts})

    def scaled(self, b):
        return DisjointUnionBase([c.scaled(b) for c in self.components], self.weights)
