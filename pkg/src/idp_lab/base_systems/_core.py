"""Shared machinery for base dynamical systems.

A base system is a sigma-finite measure space with an invertible
measure-preserving map T and a real observable f.  Nothing here ever samples
the (infinite) measure directly: samplers draw from mu restricted to the
finite-mass window-hit set

    A(w) = { omega : max_{0 <= i < n} |f(T^i omega)| > eps },

normalised to a probability.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np


class DeclaredClass(str, Enum):
    DISSIPATIVE = "Dissipative"
    ZERO_TYPE = "ConservativeZeroType"
    POSITIVE_TYPE = "PositiveTypeIIinf"
    TYPE_II1 = "TypeII1"
    COMPOSITE = "Composite"


class BaseSystemError(ValueError):
    pass


class DepthExceededError(BaseSystemError):
    """Orbit index outside what a finite-depth construction can represent."""


class OrbitRangeError(BaseSystemError):
    """Orbit value requested outside the index range stored for a point."""


class ZeroHitMassError(BaseSystemError):
    pass


@dataclass(frozen=True)
class WindowSpec:
    length: int
    threshold: float

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ValueError(f"window length must be a positive integer, got {self.length!r}")
        if not (self.threshold > 0 and np.isfinite(self.threshold)):
            raise ValueError(f"threshold must be positive and finite, got {self.threshold!r}")
        object.__setattr__(self, "length", int(self.length))
        object.__setattr__(self, "threshold", float(self.threshold))

    def widened(self, extra: int) -> "WindowSpec":
        return WindowSpec(self.length + int(extra), self.threshold)


@dataclass(frozen=True, eq=False)
class PointBlock:
    """A batch of base points drawn from the same system.

    ``values[r, j]`` holds f(T^(lo + j) omega_r).  ``state`` carries per-point
    family data (one array entry per row); ``shared`` carries anything that is
    not per point (e.g. sub-blocks of a disjoint union).
    """

    system: "BaseSystem"
    values: np.ndarray
    lo: int
    state: dict = field(default_factory=dict)
    shared: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.values.shape[1]

    def columns(self, coords) -> np.ndarray:
        """Orbit values at the given absolute indices, shape (count, len(coords))."""
        coords = np.asarray(coords, dtype=int)
        if coords.size and (coords.min() < self.lo or coords.max() >= self.hi):
            raise OrbitRangeError(
                f"indices {coords.min()}..{coords.max()} outside stored range [{self.lo}, {self.hi})"
            )
        return self.values[:, coords - self.lo]

    def take(self, idx) -> "PointBlock":
        idx = np.asarray(idx)
        state = {k: v[idx] for k, v in self.state.items()}
        return PointBlock(self.system, self.values[idx], self.lo, state, self.shared)

    def point(self, row: int) -> "BasePoint":
        return BasePoint(self, int(row))

    def points(self) -> list["BasePoint"]:
        return [BasePoint(self, r) for r in range(len(self))]


@dataclass(frozen=True)
class BasePoint:
    block: PointBlock
    row: int

    def orbit(self, i: int) -> float:
        return self.block.system.orbit_value(self.block, self.row, int(i))

    @property
    def state(self) -> dict:
        return {k: v[self.row] for k, v in self.block.state.items()}


def stored_value(block: PointBlock, row: int, i: int) -> float:
    if not block.lo <= i < block.hi:
        raise OrbitRangeError(f"index {i} outside stored range [{block.lo}, {block.hi})")
    return float(block.values[row, i - block.lo])


class BaseSystem(abc.ABC):
    """Contract shared by all parametric base families."""

    family: str = ""
    declared_class: DeclaredClass

    # -- description -------------------------------------------------------
    @abc.abstractmethod
    def params(self) -> dict:
        """JSON-serialisable parameter record."""

    @property
    def observable(self) -> str:
        return ""

    def describe(self) -> dict:
        return {
            "family": self.family,
            "declared_class": self.declared_class.value,
            "observable": self.observable,
            "params": self.params(),
        }

    @property
    def nonnegative(self) -> bool:
        return False

    @property
    def square_integrable(self) -> bool:
        return True

    @property
    def rigidity_lags(self) -> tuple[int, ...]:
        return ()

    def component_classes(self) -> tuple[DeclaredClass, ...]:
        return (self.declared_class,)

    # -- measure -----------------------------------------------------------
    @abc.abstractmethod
    def hit_mass(self, w: WindowSpec) -> float:
        """Exact mu(A(w))."""

    @abc.abstractmethod
    def correlation_exact(self, w: WindowSpec, k: int) -> float:
        """Exact mu(A(w) & T^-k A(w))."""

    @abc.abstractmethod
    def small_jump_bound(self, w: WindowSpec) -> np.ndarray:
        """Per window coordinate: integral of (f o T^i)^2 over the complement of A(w)."""

    def marginal_atoms(self, coords: Sequence[int], w: WindowSpec):
        """Push-forward of mu restricted to A(w) & {x_coords != 0} onto coords.

        Returns ``(weights, vectors)`` with vectors of shape (m, len(coords)).
        Raises NotImplementedError for non-atomic families.
        """
        raise NotImplementedError(f"{self.family} has no finite atomic push-forward")

    def integrate(self, g: Callable[[np.ndarray], np.ndarray], coords: Sequence[int], w: WindowSpec):
        """Exact integral of g(x_coords) over A(w) & {x_coords != 0}; g(0) must vanish."""
        weights, vectors = self.marginal_atoms(coords, w)
        if len(weights) == 0:
            return 0.0
        return np.sum(weights * g(vectors))

    def coordinate_integral(self, g, i: int, w: WindowSpec):
        return self.integrate(lambda x: g(x[:, 0]), (i,), w)

    def pair_integral(self, g, i: int, j: int, w: WindowSpec):
        return self.integrate(lambda x: g(x[:, 0], x[:, 1]), (i, j), w)

    def exp_integral(self, z, coords: Sequence[int], w: WindowSpec) -> complex:
        """Integral over A(w) of exp(<z, x_coords>) - 1 for a complex vector z."""
        z = np.asarray(z, dtype=complex)
        return complex(self.integrate(lambda x: np.exp(x @ z) - 1.0, coords, w))

    def linear_compensator(self, w: WindowSpec) -> np.ndarray:
        """Per window coordinate: integral of f o T^i over A(w)."""
        return np.array([np.real(self.coordinate_integral(lambda x: x, i, w)) for i in range(w.length)])

    def truncated_compensator(self, w: WindowSpec) -> np.ndarray:
        """Per window coordinate: integral of c(f o T^i) over A(w)."""
        return np.array([np.real(self.coordinate_integral(c_truncation, i, w)) for i in range(w.length)])

    # -- sampling ----------------------------------------------------------
    def sample_block(self, w: WindowSpec, count: int, rng: np.random.Generator,
                     lo: int = 0, hi: int | None = None) -> PointBlock:
        """Draw ``count`` i.i.d. points from mu|A(w) / mu(A(w)).

        Orbit values are stored for indices in [lo, hi), which must contain
        the window [0, n).
        """
        hi = w.length if hi is None else int(hi)
        if lo > 0 or hi < w.length:
            raise ValueError(f"stored range [{lo}, {hi}) must contain the window [0, {w.length})")
        if count and self.hit_mass(w) <= 0:
            raise ZeroHitMassError(f"{self.family}: window {w} has zero hit mass")
        block = self._sample_block(w, int(count), rng, int(lo), hi)
        if count:
            hits = np.abs(block.columns(np.arange(w.length))).max(axis=1) > w.threshold
            assert hits.all(), "sampled point outside the window-hit set"
        return block

    @abc.abstractmethod
    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        ...

    def orbit_footprint(self, w: WindowSpec) -> int:
        """Orbit values held per point by ``window_sums``."""
        return w.length

    def window_sums(self, w: WindowSpec, counts, rng: np.random.Generator) -> np.ndarray:
        """Sum of orbit values on [0, n) over ``counts[r]`` fresh points, for each replicate r."""
        counts = np.asarray(counts)
        block = self.sample_block(w, int(counts.sum()), rng)
        x = np.zeros((len(counts), w.length))
        if len(block):
            np.add.at(x, np.repeat(np.arange(len(counts)), counts), block.values)
        return x

    def orbit_value(self, block: PointBlock, row: int, i: int) -> float:
        return stored_value(block, row, i)

    def shift_block(self, block: PointBlock, k: int) -> PointBlock:
        """Re-anchor every point so that new.orbit(i) == old.orbit(i + k)."""
        return PointBlock(block.system, block.values, block.lo - k,
                          self._shift_state(block.state, k), block.shared)

    def _shift_state(self, state: dict, k: int) -> dict:
        return dict(state)

    def scaled(self, b: float) -> "BaseSystem":
        """The system whose observable is b * f (push-forward by S_b)."""
        raise NotImplementedError(f"{self.family} does not support scaling")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"


def c_truncation(x):
    """Truncation function c(x) = -1 below -1, x on [-1, 1], +1 above 1."""
    return np.clip(x, -1.0, 1.0)


def group_atoms(weights: np.ndarray, vectors: np.ndarray):
    """Merge identical atom vectors, summing their weights."""
    if len(weights) == 0:
        return weights, vectors
    uniq, inverse = np.unique(vectors, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse.ravel(), weights)
    return merged, uniq
