"""Stationary infinitely divisible processes as integrals over Poisson suspensions.

A leaf specification pairs a base system (Q is the push-forward of mu by
omega -> (f(T^i omega))_i) with a drift b and a representation:

* ``Nonnegative``:  X_i = b + sum over points of f(T^i x)
* ``Centered``:     X_i = b + sum f(T^i x) - int_A f o T^i dmu
* ``Truncated``:    X_i = b + sum f(T^i x) - int_A c(f o T^i) dmu

Points are those of the configuration on the window-hit set A(w).  Jumps
outside A(w) are dropped; their per-coordinate variance is the reported
``small_jump_bound`` and sampling is refused when it exceeds the tolerance.
The functionals below (characteristic, Laplace, mean) are those of exactly
this window-truncated process, so Monte Carlo comparisons carry no bias.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import calibration
from .base_systems import (
    BaseSystem,
    DeclaredClass,
    MovingAverageBase,
    PowerLawAmplitude,
    WindowSpec,
    c_truncation,
)
from .base_systems.amplitudes import amplitude_from_params
from .suspension import CoordinateEvent, event_mass

__all__ = [
    "Representation", "LevyMeasureSpec", "TrajectoryBatch", "SmallJumpError", "SpecError",
    "leaf", "sample_trajectory", "c_truncation", "char_functional", "laplace_functional",
    "mean_value", "convolve", "canonical_four", "moving_average_roundtrip", "alpha_stable_spec",
    "scaling_check", "FunctionalValue", "required_threshold",
]

POINT_BUDGET = 4_000_000  # orbit values held in memory per sampling chunk


class Representation(str, Enum):
    TRUNCATED = "Truncated"
    CENTERED = "Centered"
    NONNEGATIVE = "Nonnegative"


class SpecError(ValueError):
    pass


class SmallJumpError(ValueError):
    """Neglected small jumps exceed the tolerance; carries the threshold that would be accepted."""

    def __init__(self, bound: float, tolerance: float, required: float | None):
        self.bound, self.tolerance, self.required = bound, tolerance, required
        hint = f"; use threshold <= {required:.6g}" if required else ""
        super().__init__(f"small-jump variance {bound:.6g} exceeds tolerance {tolerance:.6g}{hint}")


@dataclass(frozen=True, eq=False)
class LevyMeasureSpec:
    """Generating data <0, b, Q> of an IDp process; a composite when ``components`` is set."""

    base: BaseSystem | None = None
    drift: float = 0.0
    representation: Representation = Representation.TRUNCATED
    components: tuple["LevyMeasureSpec", ...] = ()
    labels: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "representation", Representation(self.representation))
        if self.components:
            if self.base is not None:
                raise SpecError("a composite spec has components instead of a base")
            return
        if self.base is None:
            raise SpecError("a leaf spec needs a base system")
        if self.representation is Representation.NONNEGATIVE:
            if not self.base.nonnegative:
                raise SpecError("Nonnegative representation requires a nonnegative observable")
            if self.drift < 0:
                raise SpecError("Nonnegative representation requires drift >= 0")
        if self.representation is Representation.CENTERED and not self.base.square_integrable:
            raise SpecError("Centered representation requires a square-integrable Levy measure")

    @property
    def is_composite(self) -> bool:
        return bool(self.components)

    def leaves(self) -> list["LevyMeasureSpec"]:
        if not self.components:
            return [self]
        return [leaf_ for c in self.components for leaf_ in c.leaves()]

    def declared_classes(self) -> tuple[DeclaredClass, ...]:
        return tuple(cls for lf in self.leaves() for cls in lf.base.component_classes())

    def describe(self) -> dict:
        if self.components:
            return {"convolution": [c.describe() for c in self.components],
                    "labels": list(self.labels), **self.metadata}
        return {"base": self.base.describe(), "drift": self.drift,
                "representation": self.representation.value, **self.metadata}


def leaf(base: BaseSystem, drift: float = 0.0, representation="Truncated") -> LevyMeasureSpec:
    return LevyMeasureSpec(base=base, drift=float(drift), representation=Representation(representation))


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    windows: np.ndarray
    spec: LevyMeasureSpec
    window: WindowSpec
    compensation_mode: str
    small_jump_bound: float
    seed: int | None = None
    component_windows: tuple[np.ndarray, ...] = ()
    metadata: dict = field(default_factory=dict)

    @property
    def replicates(self) -> int:
        return self.windows.shape[0]

    @property
    def length(self) -> int:
        return self.windows.shape[1]

    @property
    def lipschitz_tolerance(self) -> float:
        """Bound on the shift of E g(X_i) for 1-Lipschitz g caused by the dropped jumps."""
        return math.sqrt(self.small_jump_bound)


# -- compensators and truncation control -----------------------------------------

def _compensator(spec: LevyMeasureSpec, w: WindowSpec) -> np.ndarray:
    rep = spec.representation
    if rep is Representation.NONNEGATIVE:
        return np.zeros(w.length)
    if rep is Representation.CENTERED:
        return spec.base.linear_compensator(w)
    return spec.base.truncated_compensator(w)


def _drift_shift(spec: LevyMeasureSpec, w: WindowSpec) -> np.ndarray:
    """Deterministic part b - C_i of the window-truncated process."""
    return spec.drift - _compensator(spec, w)


def required_threshold(base: BaseSystem, n: int, eps: float, tolerance: float) -> float | None:
    """Largest eps / 2^j whose small-jump bound is within tolerance (None if none is found)."""
    t = eps
    for _ in range(60):
        t /= 2
        if float(np.max(base.small_jump_bound(WindowSpec(n, t)))) <= tolerance:
            return t
    return None


def _small_jump(spec: LevyMeasureSpec, w: WindowSpec, tolerance: float) -> float:
    bound = float(np.max(spec.base.small_jump_bound(w)))
    if spec.representation is not Representation.NONNEGATIVE and bound > tolerance:
        raise SmallJumpError(bound, tolerance, required_threshold(spec.base, w.length, w.threshold, tolerance))
    return bound


# -- sampling -----------------------------------------------------------------------

def _sample_leaf(spec, w, replicates, rng):
    base = spec.base
    hm = base.hit_mass(w)
    chunk = max(1, int(POINT_BUDGET / ((hm + 1.0) * base.orbit_footprint(w) + w.length)))
    out = np.empty((replicates, w.length))
    for start in range(0, replicates, chunk):
        m = min(chunk, replicates - start)
        counts = rng.poisson(hm, size=m) if hm > 0 else np.zeros(m, dtype=np.int64)
        out[start:start + m] = base.window_sums(w, counts, rng)
    return out + _drift_shift(spec, w)[None, :]


def sample_trajectory(spec: LevyMeasureSpec, n: int, eps: float, replicates: int, rng,
                      tolerance: float | None = None) -> TrajectoryBatch:
    """``replicates`` independent windows (X_0, ..., X_{n-1})."""
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed, rng = rng, np.random.default_rng(rng)
    tol = calibration.DEFAULT.small_jump_tol if tolerance is None else tolerance
    w = WindowSpec(n, eps)
    parts, bound = [], 0.0
    for lf in spec.leaves():
        bound = max(bound, _small_jump(lf, w, tol))
    for lf in spec.leaves():
        parts.append(_sample_leaf(lf, w, replicates, rng))
    windows = np.sum(parts, axis=0)
    meta = {}
    if spec.is_composite:
        meta["promoted_drift"] = _promoted_drifts(spec, w)
    return TrajectoryBatch(windows, spec, w, _mode(spec), bound, seed,
                           tuple(parts) if spec.is_composite else (), meta)


def _mode(spec):
    reps = {lf.representation for lf in spec.leaves()}
    return reps.pop().value if len(reps) == 1 else Representation.TRUNCATED.value


def _promoted_drifts(spec, w):
    """Drift of each leaf once rewritten in the Truncated representation (coordinate 0)."""
    if _mode(spec) != Representation.TRUNCATED.value:
        return None
    out = []
    for lf in spec.leaves():
        b = lf.drift - _compensator(lf, w)[0] + lf.base.truncated_compensator(w)[0]
        out.append(float(b))
    return out


# -- functionals -----------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalValue:
    value: complex
    std_error: float = 0.0
    method: str = "analytic"

    def __complex__(self):
        return complex(self.value)


def _support(a) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    coords = np.flatnonzero(a)
    return coords, a[coords]


def _log_integral(base: BaseSystem, g, coords, w, method, draws, rng):
    """int over A(w) of g(x_coords) (g(0) = 0), analytically or by importance sampling."""
    if method == "analytic":
        return complex(base.integrate(g, list(coords), w)), 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    hm = base.hit_mass(w)
    block = base.sample_block(w, draws, rng)
    vals = g(block.columns(coords))
    return complex(hm * vals.mean()), float(hm * np.std(vals) / math.sqrt(draws))


def _leaf_exp_integral(lf, z, coords, w, method, draws, rng):
    if method == "analytic":
        return lf.base.exp_integral(z, coords, w), 0.0
    return _log_integral(lf.base, lambda x: np.exp(x @ z) - 1.0, coords, w, method, draws, rng)


def _check_window(coords, w):
    if coords.size and coords.max() >= w.length:
        raise SpecError(f"test vector support {coords.tolist()} exceeds the window of length {w.length}")


def char_functional(spec: LevyMeasureSpec, a, w: WindowSpec, method: str = "analytic",
                    draws: int = 20000, rng=None) -> FunctionalValue:
    """E exp(i <a, X>) for the window-truncated process."""
    coords, av = _support(a)
    _check_window(coords, w)
    if coords.size == 0:
        return FunctionalValue(1.0 + 0j, 0.0, method)
    log_total, var = 0j, 0.0
    for lf in spec.leaves():
        shift_ = _drift_shift(lf, w)
        integral, se = _leaf_exp_integral(lf, 1j * av, coords, w, method, draws, rng)
        log_total += 1j * float(av @ shift_[coords]) + integral
        var += se ** 2
    value = np.exp(log_total)
    return FunctionalValue(complex(value), float(abs(value) * math.sqrt(var)), method)


def laplace_functional(spec: LevyMeasureSpec, a, w: WindowSpec, method: str = "analytic",
                       draws: int = 20000, rng=None) -> FunctionalValue:
    """E exp(-<a, X>) for nonnegative representations."""
    coords, av = _support(a)
    if np.any(av < 0):
        raise SpecError("Laplace functionals need a nonnegative test vector")
    _check_window(coords, w)
    for lf in spec.leaves():
        if lf.representation is not Representation.NONNEGATIVE:
            raise SpecError("Laplace functionals need the Nonnegative representation")
    if coords.size == 0:
        return FunctionalValue(1.0, 0.0, method)
    log_total, var = 0.0, 0.0
    for lf in spec.leaves():
        integral, se = _leaf_exp_integral(lf, -av.astype(complex), coords, w, method, draws, rng)
        log_total += -float(av @ np.full(coords.size, lf.drift)) + float(np.real(integral))
        var += se ** 2
    value = math.exp(log_total)
    return FunctionalValue(value, value * math.sqrt(var), method)


def mean_value(spec: LevyMeasureSpec, w: WindowSpec, coordinate: int = 0) -> float:
    """E[X_i] of the window-truncated process: b + int_A x_i dQ - C_i."""
    i = int(coordinate)
    total = 0.0
    for lf in spec.leaves():
        if lf.representation is Representation.NONNEGATIVE:
            total += lf.drift + float(lf.base.linear_compensator(w)[i])
        elif lf.representation is Representation.CENTERED:
            total += lf.drift
        else:
            total += lf.drift + float(lf.base.linear_compensator(w)[i] - lf.base.truncated_compensator(w)[i])
    return total


# -- composition -----------------------------------------------------------------------

def convolve(specs: Sequence[LevyMeasureSpec], labels: Sequence[str] = ()) -> LevyMeasureSpec:
    """Independent sum; Levy measures add.  Mixed representations are reported as Truncated."""
    specs = list(specs)
    if not specs:
        raise SpecError("convolve needs at least one spec")
    reps = {lf.representation for s in specs for lf in s.leaves()}
    meta = {"promoted_to": Representation.TRUNCATED.value} if len(reps) > 1 else {}
    return LevyMeasureSpec(components=tuple(specs), labels=tuple(labels), metadata=meta)


SLOTS = (
    ("B", DeclaredClass.DISSIPATIVE),
    ("m", DeclaredClass.ZERO_TYPE),
    ("wm", DeclaredClass.POSITIVE_TYPE),
    ("ne", DeclaredClass.TYPE_II1),
)


def canonical_four(spec_B=None, spec_m=None, spec_wm=None, spec_ne=None) -> LevyMeasureSpec:
    """Convolution of up to four single-class specs, each checked against its slot."""
    chosen, labels = [], []
    for (name, cls), s in zip(SLOTS, (spec_B, spec_m, spec_wm, spec_ne)):
        if s is None:
            continue
        classes = set(s.declared_classes())
        if classes != {cls}:
            raise SpecError(f"slot {name} expects {cls.value}, got {sorted(c.value for c in classes)}")
        chosen.append(s)
        labels.append(name)
    return convolve(chosen, labels)


def moving_average_roundtrip(spec: LevyMeasureSpec, w: WindowSpec | None = None):
    """Extract the generator law Q_g = Q restricted to {tau = 0} and rebuild Q = sum_k Q_g o T^-k.

    Returns ``(generator, reconstructed_spec)``.
    """
    base = spec.base
    if spec.is_composite or not isinstance(base, MovingAverageBase):
        raise SpecError("round trip needs a single spec over a moving-average (dissipative) base")
    support = np.flatnonzero(base.pulse)
    generator = {
        "wandering_set": base.wandering_set,
        "support": [int(support[0]), int(support[-1]) + 1],
        "profile": base.pulse[support[0]:support[-1] + 1].tolist(),
        "amplitude": base.amplitude.params(),
    }
    if w is not None:
        taus, _, masses = base._offset_masses(w)
        generator["offset_masses"] = {int(t): float(m) for t, m in zip(taus, masses)}
    pulse = np.zeros(generator["support"][1])
    pulse[generator["support"][0]:] = generator["profile"]
    rebuilt = MovingAverageBase(pulse, amplitude_from_params(generator["amplitude"]))
    return generator, LevyMeasureSpec(base=rebuilt, drift=spec.drift, representation=spec.representation)


# -- alpha-stable family ---------------------------------------------------------------

def alpha_stable_spec(alpha: float, pulse, eps: float = 1.0) -> LevyMeasureSpec:
    """Symmetric alpha-stable moving average: rho(dv) = (alpha / 2) |v|^(-alpha-1) dv."""
    if not 0 < alpha < 2:
        raise SpecError(f"alpha must lie in (0, 2), got {alpha}")
    base = MovingAverageBase(pulse, PowerLawAmplitude(alpha, 0.5, 0.5))
    return LevyMeasureSpec(base=base, drift=0.0, representation=Representation.TRUNCATED,
                           metadata={"alpha": float(alpha), "threshold": float(eps)})


def scaling_check(spec: LevyMeasureSpec, b: float, events: Sequence[CoordinateEvent]) -> dict:
    """Compare Q(S_b^-1 E) / Q(E) with b^alpha for tail events E, plus structural checks."""
    alpha = spec.metadata.get("alpha")
    if alpha is None:
        raise SpecError("scaling_check needs a spec built by alpha_stable_spec")
    base = spec.base
    rows = []
    for e in events:
        pre = CoordinateEvent(e.coords, e.threshold / b, e.mode)
        lowest = min(e.threshold, pre.threshold)
        n = max(e.coords) + 1
        w = WindowSpec(n, lowest)
        q_e = event_mass(base, [e], w)
        q_pre = event_mass(base, [pre], w)
        ratio = q_pre / q_e
        rows.append({"event": {"coords": list(e.coords), "threshold": e.threshold, "mode": e.mode},
                     "ratio": ratio, "expected": b ** alpha,
                     "rel_error": abs(ratio - b ** alpha) / b ** alpha})
    scaled = base.scaled(b)
    return {
        "alpha": alpha,
        "b": b,
        "events": rows,
        "class_invariant": scaled.declared_class == base.declared_class,
        "wandering_set_invariant": scaled.wandering_set == base.wandering_set,
    }
