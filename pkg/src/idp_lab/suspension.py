"""Poisson suspensions over base systems, truncated to a window-hit set.

A configuration is the restriction of a Poisson random measure with
intensity mu to A(w).  Every test set used here must sit inside the part of
A(w) that the configuration is guaranteed to see (its ``hit_range``), and is
rejected otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Sequence

import numpy as np

from .base_systems import (
    BasePoint,
    BaseSystem,
    DisjointUnionBase,
    FiniteInvariantBase,
    MovingAverageBase,
    PointBlock,
    WindowSpec,
)
from .base_systems.finite_invariant import IIDDiscreteLaw, IIDUniformLaw


class SupportError(ValueError):
    """A test set or function reaches outside what the truncated configuration sees."""


# -- configurations -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConfigurationBatch:
    """``replicates`` independent truncated Poisson configurations sharing one point block.

    ``owner[j]`` is the replicate that point j belongs to.  ``hit_range`` is
    the index interval [a, b) for which every point with |f(T^i .)| > eps,
    i in [a, b), is present.
    """

    base: BaseSystem
    window: WindowSpec
    block: PointBlock
    owner: np.ndarray
    replicates: int
    hit_range: tuple[int, int]
    seed: int | None = None

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.replicates)

    def per_replicate(self, values: np.ndarray, reducer=np.add) -> np.ndarray:
        out = np.zeros(self.replicates, dtype=np.result_type(values, float))
        reducer.at(out, self.owner, values)
        return out

    def replicate(self, r: int) -> "PointConfiguration":
        idx = np.flatnonzero(self.owner == r)
        return PointConfiguration(self.base, self.window, self.block.take(idx),
                                  np.zeros(idx.size, dtype=np.int64), 1, self.hit_range, self.seed)


@dataclass(frozen=True, eq=False)
class PointConfiguration(ConfigurationBatch):
    """A single truncated configuration."""

    @property
    def points(self) -> list[BasePoint]:
        return self.block.points()

    def __len__(self) -> int:
        return len(self.block)


def _rng(rng_or_seed):
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed, None
    return np.random.default_rng(rng_or_seed), rng_or_seed


def sample_configurations(base: BaseSystem, w: WindowSpec, replicates: int, rng,
                          lo: int = 0, hi: int | None = None) -> ConfigurationBatch:
    """Independent configurations; orbit values are stored on [lo, hi)."""
    rng, seed = _rng(rng)
    hm = base.hit_mass(w)
    counts = rng.poisson(hm, size=replicates) if hm > 0 else np.zeros(replicates, dtype=np.int64)
    hi = w.length if hi is None else hi
    block = base.sample_block(w, int(counts.sum()), rng, lo, hi)
    owner = np.repeat(np.arange(replicates), counts)
    return ConfigurationBatch(base, w, block, owner, int(replicates), (0, w.length), seed)


def sample_configuration(base: BaseSystem, w: WindowSpec, rng, lo: int = 0,
                         hi: int | None = None) -> PointConfiguration:
    rng, seed = _rng(rng)
    b = sample_configurations(base, w, 1, rng, lo, hi)
    return PointConfiguration(base, w, b.block, b.owner, 1, b.hit_range, seed)


def shift(config: ConfigurationBatch, k: int) -> ConfigurationBatch:
    """Re-anchor every point so that new orbit(i) == old orbit(i + k)."""
    k = int(k)
    if k == 0:
        return config
    block = config.base.shift_block(config.block, k)
    a, b = config.hit_range
    cls = type(config)
    return cls(config.base, config.window, block, config.owner, config.replicates, (a - k, b - k), config.seed)


# -- test sets and functions ---------------------------------------------------

@dataclass(frozen=True)
class CoordinateEvent:
    """Points with |f(T^c .)| > threshold for any (or all) c in coords.

    ``component`` restricts the event to one component of a disjoint union.
    """

    coords: tuple[int, ...]
    threshold: float
    mode: str = "any"
    component: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in np.atleast_1d(self.coords)))
        if not self.coords:
            raise ValueError("an event needs at least one coordinate")
        if self.mode not in ("any", "all"):
            raise ValueError("mode must be 'any' or 'all'")
        if not self.threshold > 0:
            raise ValueError("event thresholds must be positive")

    def indicator(self, x: np.ndarray) -> np.ndarray:
        """x has one column per entry of ``coords``."""
        big = np.abs(x) > self.threshold
        return big.any(axis=1) if self.mode == "any" else big.all(axis=1)

    def contains(self, block: PointBlock) -> np.ndarray:
        inside = self.indicator(block.columns(self.coords))
        if self.component is not None:
            inside &= block.state["component"] == self.component
        return inside


def window_event(w: WindowSpec, component: int | None = None) -> CoordinateEvent:
    """A(w) itself (or its part in one union component)."""
    return CoordinateEvent(tuple(range(w.length)), w.threshold, "any", component)


def check_support(config: ConfigurationBatch, event: CoordinateEvent):
    a, b = config.hit_range
    if event.threshold < config.window.threshold:
        raise SupportError(
            f"event threshold {event.threshold} is below the truncation level {config.window.threshold}")
    if min(event.coords) < a or max(event.coords) >= b:
        raise SupportError(f"event coordinates {event.coords} leave the guaranteed range [{a}, {b})")
    if event.component is not None:
        if not isinstance(config.base, DisjointUnionBase):
            raise SupportError("component events need a disjoint-union base")
        if not 0 <= event.component < len(config.base.components):
            raise SupportError(f"no component {event.component}")


def _translated(events, w: WindowSpec):
    # mu is shift invariant, so a conjunction may be moved to start at index 0
    lo = min(c for e in events for c in e.coords)
    moved = [CoordinateEvent(tuple(c - lo for c in e.coords), e.threshold, e.mode, e.component)
             for e in events]
    for e in moved:
        if e.threshold < w.threshold or max(e.coords) >= w.length:
            raise SupportError(f"{e} is not contained in the window-hit set of {w}")
    return moved


def event_mass(base: BaseSystem, events: Sequence[CoordinateEvent], w: WindowSpec) -> float:
    """Exact mu of the intersection of the given events (all inside A(w))."""
    events = _translated(list(events), w)
    if isinstance(base, DisjointUnionBase):
        total = 0.0
        for j, (comp, wt) in enumerate(zip(base.components, base.weights)):
            if any(e.component not in (None, j) for e in events):
                continue
            plain = [CoordinateEvent(e.coords, e.threshold, e.mode) for e in events]
            total += wt * event_mass(comp, plain, w)
        return total
    if any(e.component is not None for e in events):
        raise SupportError("component events need a disjoint-union base")
    if isinstance(base, MovingAverageBase):
        return _moving_average_mass(base, events, w)
    if isinstance(base, FiniteInvariantBase) and isinstance(base.law, (IIDUniformLaw, IIDDiscreteLaw)):
        return base.intensity * _iid_probability(base.law, events)
    coords = sorted({c for e in events for c in e.coords})
    pos = {c: j for j, c in enumerate(coords)}

    def g(x):
        out = np.ones(len(x), dtype=bool)
        for e in events:
            out &= e.indicator(x[:, [pos[c] for c in e.coords]])
        return out.astype(float)

    return float(np.real(base.integrate(g, coords, w)))


def _moving_average_mass(base: MovingAverageBase, events, w) -> float:
    # per offset every event reads |v| * |h| > t, so the intersection is a tail in |v|
    taus, reach = base._offsets(w)
    total = 0.0
    for tau, r in zip(taus, reach):
        need = w.threshold / r
        for e in events:
            hs = np.abs(base.h(np.asarray(e.coords) - tau))
            scale = hs.max() if e.mode == "any" else hs.min()
            if scale == 0:
                need = math.inf
                break
            need = max(need, e.threshold / scale)
        if np.isfinite(need):
            total += base.amplitude.tail_mass(need)
    return total


def _iid_probability(law, events) -> float:
    # coordinates are independent: enumerate the threshold band of each one
    coords = sorted({c for e in events for c in e.coords})
    cuts = {c: sorted({e.threshold for e in events if c in e.coords}) for c in coords}

    def tail(t):
        if isinstance(law, IIDUniformLaw):
            a, b = max(law.low, -t), min(law.high, t)
            return 1.0 - max(b - a, 0.0) / (law.high - law.low)
        return float(law.probs[np.abs(law.values) > t].sum())

    total = 0.0
    for bands in product(*[range(len(cuts[c]) + 1) for c in coords]):
        band = dict(zip(coords, bands))
        # band j means the magnitude exceeds exactly the j smallest cuts
        passes = [
            [band[c] > cuts[c].index(e.threshold) for c in e.coords] for e in events
        ]
        if not all(any(p) if e.mode == "any" else all(p) for p, e in zip(passes, events)):
            continue
        p = 1.0
        for c, j in band.items():
            ts = cuts[c]
            p *= (tail(ts[j - 1]) if j > 0 else 1.0) - (tail(ts[j]) if j < len(ts) else 0.0)
        total += p
    return total


def count(config: ConfigurationBatch, event: CoordinateEvent):
    """Number of points in ``event`` (per replicate for a batch)."""
    check_support(config, event)
    inside = event.contains(config.block)
    out = np.bincount(config.owner[inside], minlength=config.replicates)
    return int(out[0]) if isinstance(config, PointConfiguration) else out


@dataclass(frozen=True)
class TestFunction:
    """h = sum_j coefficient_j * 1_{event_j}; coefficients may be complex."""

    __test__ = False     # keep pytest from collecting this as a test class

    terms: tuple[tuple[complex, CoordinateEvent], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((c, e) for c, e in self.terms))

    @classmethod
    def indicator(cls, event: CoordinateEvent, coefficient: complex = 1.0) -> "TestFunction":
        return cls(((coefficient, event),))

    def scaled(self, s: complex) -> "TestFunction":
        return TestFunction(tuple((s * c, e) for c, e in self.terms))

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(self.terms + other.terms)

    def values(self, block: PointBlock) -> np.ndarray:
        out = np.zeros(len(block), dtype=complex)
        for c, e in self.terms:
            out += c * e.contains(block)
        return out

    def integral(self, base: BaseSystem, w: WindowSpec) -> complex:
        return sum(c * event_mass(base, [e], w) for c, e in self.terms) + 0j

    def check(self, config: ConfigurationBatch):
        for _, e in self.terms:
            check_support(config, e)


def _finish(config, values):
    values = np.asarray(values)
    if np.iscomplexobj(values) and np.all(values.imag == 0):
        values = values.real
    return values[0].item() if isinstance(config, PointConfiguration) else values


def exponential_vector(config: ConfigurationBatch, h: TestFunction, integral: complex | None = None):
    """exp(-int h dmu) * prod over points of (1 + h(x))."""
    h.check(config)
    if integral is None:
        integral = h.integral(config.base, config.window)
    prod = np.ones(config.replicates, dtype=complex)
    np.multiply.at(prod, config.owner, 1.0 + h.values(config.block))
    return _finish(config, np.exp(-integral) * prod)


def charlier(counts, mass: float, order: int) -> np.ndarray:
    """J^(order)(1_B) from N(B) and mu(B): C_{m+1} = (N - t - m) C_m - m t C_{m-1}."""
    counts = np.asarray(counts, dtype=float)
    prev, cur = np.zeros_like(counts), np.ones_like(counts)
    for m in range(order):
        prev, cur = cur, (counts - mass - m) * cur - m * mass * prev
    return cur


def multiple_integral(config: ConfigurationBatch, f: TestFunction, n: int, integral: complex | None = None):
    """Off-diagonal compensated integral J^(n)(f^{(x) n}) for a simple function f.

    Uses sum_n s^n / n! J^(n)(f) = exp(-s int f) prod_x (1 + s f(x)); for a
    single indicator this is the Charlier recursion.
    """
    if not 1 <= n <= 4:
        raise ValueError("multiple integrals are supported for orders 1..4")
    f.check(config)
    if integral is None:
        integral = f.integral(config.base, config.window)
    if len(f.terms) == 1 and f.terms[0][0] == 1:
        event = f.terms[0][1]
        inside = event.contains(config.block)
        counts = np.bincount(config.owner[inside], minlength=config.replicates)
        return _finish(config, charlier(counts, float(np.real(integral)), n))
    # polynomial in s per replicate, truncated at degree n
    vals = f.values(config.block)
    poly = np.zeros((config.replicates, n + 1), dtype=complex)
    poly[:, 0] = 1.0
    order = np.argsort(config.owner, kind="stable")
    for j in order:
        r, v = config.owner[j], vals[j]
        if v != 0:
            poly[r, 1:] = poly[r, 1:] + v * poly[r, :-1]
    comp = np.array([(-integral) ** k / math.factorial(k) for k in range(n + 1)])
    coeff = sum(poly[:, k] * comp[n - k] for k in range(n + 1))
    return _finish(config, math.factorial(n) * coeff)


def multiple_integral_bruteforce(config: PointConfiguration, f: TestFunction, n: int,
                                 integral: complex | None = None):
    """Oracle: sum_k C(n, k) (-int f)^(n-k) sum over ordered distinct k-tuples of prod f."""
    f.check(config)
    if integral is None:
        integral = f.integral(config.base, config.window)
    vals = f.values(config.block)
    total = 0j
    for k in range(n + 1):
        s = sum((np.prod([vals[i] for i in tup]) for tup in permutations(range(len(vals)), k)), 0j)
        total += math.comb(n, k) * (-integral) ** (n - k) * s
    return total.real if total.imag == 0 else total


def cross_integrals(base: BaseSystem, w: WindowSpec, hs: Sequence[TestFunction]) -> dict:
    """int prod_{i in S} h_i dmu for every index subset S with |S| >= 2."""
    out = {}
    for size in range(2, len(hs) + 1):
        for subset in combinations(range(len(hs)), size):
            total = 0j
            for terms in product(*[hs[i].terms for i in subset]):
                coef = np.prod([c for c, _ in terms])
                if coef != 0:
                    total += coef * event_mass(base, [e for _, e in terms], w)
            out[frozenset(subset)] = total
    return out


def moment_oracle(hs: Sequence[TestFunction], cross: dict) -> complex:
    """Exact E[prod_i eps_{h_i}] = exp(sum over |S| >= 2 of int prod_{i in S} h_i dmu)."""
    if len(hs) > 4:
        raise ValueError("moment oracle is supported for up to 4 functions")
    total = 0j
    for size in range(2, len(hs) + 1):
        for subset in combinations(range(len(hs)), size):
            key = frozenset(subset)
            if key not in cross:
                raise KeyError(f"missing cross integral for {sorted(subset)}")
            total += cross[key]
    out = np.exp(total)
    return out.real if out.imag == 0 else out
