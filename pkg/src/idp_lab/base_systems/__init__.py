"""Parametric sigma-finite base systems and their window-hit samplers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import (
    BasePoint,
    BaseSystem,
    BaseSystemError,
    DeclaredClass,
    DepthExceededError,
    OrbitRangeError,
    PointBlock,
    WindowSpec,
    ZeroHitMassError,
    c_truncation,
)
from .amplitudes import DiscreteAmplitude, PowerLawAmplitude, amplitude_from_params
from .finite_invariant import (
    ConstantLaw,
    FiniteInvariantBase,
    IIDDiscreteLaw,
    IIDUniformLaw,
    StationaryLaw,
    law_from_params,
)
from .moving_average import MovingAverageBase
from .random_walk import RandomWalkBase
from .tower import RigidTowerBase
from .union import DisjointUnionBase

__all__ = [
    "BasePoint", "BaseSystem", "BaseSystemError", "DeclaredClass", "DepthExceededError",
    "OrbitRangeError", "PointBlock", "WindowSpec", "ZeroHitMassError", "c_truncation",
    "DiscreteAmplitude", "PowerLawAmplitude", "ConstantLaw", "IIDDiscreteLaw", "IIDUniformLaw",
    "StationaryLaw", "FiniteInvariantBase", "MovingAverageBase", "RandomWalkBase",
    "RigidTowerBase", "DisjointUnionBase", "EmpiricalCorrelation",
    "moving_average_base", "null_recurrent_walk_base", "rigid_tower_base",
    "finite_invariant_base", "disjoint_union", "system_from_params",
    "hit_mass", "sample_conditioned", "orbit_eval", "correlation_estimate",
]


def moving_average_base(pulse, amplitude) -> MovingAverageBase:
    if isinstance(amplitude, dict):
        amplitude = amplitude_from_params(amplitude)
    return MovingAverageBase(pulse, amplitude)


def null_recurrent_walk_base(steps=(-1, 1), probs=None, mark: float = 1.0) -> RandomWalkBase:
    return RandomWalkBase(steps, probs, mark)


def rigid_tower_base(stage_depth: int, growth: int = 10, mark: float = 1.0) -> RigidTowerBase:
    return RigidTowerBase(stage_depth, growth, mark)


def finite_invariant_base(intensity: float, law) -> FiniteInvariantBase:
    if isinstance(law, dict):
        law = law_from_params(law)
    return FiniteInvariantBase(intensity, law)


def disjoint_union(components, weights=None) -> DisjointUnionBase:
    return DisjointUnionBase(components, weights)


def system_from_params(spec: dict) -> BaseSystem:
    """Build a base system from a plain record ``{"family": ..., "params": {...}}``."""
    family = spec["family"]
    p = dict(spec.get("params", {}))
    if family == "MovingAverage":
        return moving_average_base(p["pulse"], p["amplitude"])
    if family == "NullRecurrentWalk":
        return null_recurrent_walk_base(p.get("steps", (-1, 1)), p.get("probs"), p.get("mark", 1.0))
    if family == "RigidTower":
        return rigid_tower_base(p["stage_depth"], p.get("growth", 10), p.get("mark", 1.0))
    if family == "FiniteInvariant":
        return finite_invariant_base(p["intensity"], p["law"])
    if family == "DisjointUnion":
        return disjoint_union([system_from_params(c) for c in p["components"]], p.get("weights"))
    raise ValueError(f"unknown base family {family!r}")


def hit_mass(system: BaseSystem, w: WindowSpec) -> float:
    m = system.hit_mass(w)
    assert np.isfinite(m) and m >= 0, f"hit mass must be finite and nonnegative, got {m}"
    return m


def sample_conditioned(system: BaseSystem, w: WindowSpec, rng: np.random.Generator,
                       lo: int = 0, hi: int | None = None) -> BasePoint:
    """One point from mu restricted to A(w), normalised."""
    return system.sample_block(w, 1, rng, lo, hi).point(0)


def orbit_eval(p: BasePoint, i: int) -> float:
    return p.orbit(i)


@dataclass(frozen=True)
class EmpiricalCorrelation:
    lag: int
    estimate: float
    std_error: float


def correlation_estimate(system: BaseSystem, w: WindowSpec, k: int, draws: int,
                         rng: np.random.Generator) -> EmpiricalCorrelation:
    """Estimate mu(A & T^-k A) as hit_mass * P(orbit also hits the window shifted by k)."""
    if draws < 1:
        raise ValueError("draws must be at least 1")
    k = int(k)
    hm = system.hit_mass(w)
    if k == 0 or hm == 0:
        return EmpiricalCorrelation(k, hm, 0.0)
    lo, hi = min(0, k), max(w.length, k + w.length)
    block = system.sample_block(w, draws, rng, lo, hi)
    shifted = block.columns(np.arange(k, k + w.length))
    hit = (np.abs(shifted).max(axis=1) > w.threshold).astype(float)
    se = hm * hit.std(ddof=1) / np.sqrt(draws) if draws > 1 else 0.0
    return EmpiricalCorrelation(k, hm * float(hit.mean()), float(se))
