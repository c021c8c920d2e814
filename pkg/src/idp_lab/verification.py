"""Monte Carlo identity suite run by ``idp-lab verify``.

Each check compares a sample mean with an exact value and passes when the
gap is within ``n_se`` standard errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calibration
from .base_systems import BaseSystem, WindowSpec
from .process import LevyMeasureSpec, mean_value, sample_trajectory
from .spectral import levy_covariance
from .suspension import (
    CoordinateEvent,
    TestFunction,
    count,
    cross_integrals,
    exponential_vector,
    moment_oracle,
    multiple_integral,
    sample_configurations,
    window_event,
)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    empirical: complex
    exact: complex
    std_error: float
    passed: bool

    def as_dict(self) -> dict:
        def num(z):
            z = complex(z)
            return z.real if z.imag == 0 else {"real": z.real, "imag": z.imag}
        return {"name": self.name, "empirical": num(self.empirical), "exact": num(self.exact),
                "std_error": self.std_error, "pass": self.passed}


def _mc_check(name, samples, exact, cal) -> IdentityCheck:
    samples = np.asarray(samples)
    m = samples.mean()
    if np.iscomplexobj(samples):
        se = math.hypot(samples.real.std(ddof=1), samples.imag.std(ddof=1)) / math.sqrt(len(samples))
    else:
        se = samples.std(ddof=1) / math.sqrt(len(samples))
    return IdentityCheck(name, complex(m), complex(exact), float(se),
                         bool(abs(m - exact) <= cal.n_se * se + 1e-12))


def suspension_checks(base: BaseSystem, w: WindowSpec, draws: int, rng,
                      cal: calibration.Calibration = calibration.DEFAULT) -> list[IdentityCheck]:
    """Exponential vectors, chaos isometry, joint moments and independence on disjoint sets."""
    n, t = w.length, w.threshold
    first = CoordinateEvent((0,), t)
    last = CoordinateEvent((n - 1,), t)
    middle = CoordinateEvent((0, n // 2), t)
    h = TestFunction.indicator(first, 0.5)
    g = TestFunction.indicator(last, -0.3)
    k = TestFunction.indicator(middle, 0.2 + 0.1j)
    cfg = sample_configurations(base, w, draws, rng)
    cross = cross_integrals(base, w, [h, g, k])
    out = []

    eh = exponential_vector(cfg, h)
    eg = exponential_vector(cfg, g)
    ek = exponential_vector(cfg, k)
    out.append(_mc_check("exponential_vector_mean", eh, 1.0, cal))
    out.append(_mc_check("exponential_vector_pair", eh * eg, np.exp(cross[frozenset({0, 1})]), cal))
    out.append(_mc_check("joint_moment_oracle", eh * eg * ek, moment_oracle([h, g, k], cross), cal))

    f1 = TestFunction.indicator(first)
    f2 = TestFunction.indicator(middle)
    inner = f1.integral(base, w)     # first is contained in middle
    for order in (1, 2):
        a = multiple_integral(cfg, f1, order)
        b = multiple_integral(cfg, f2, order)
        out.append(_mc_check(f"chaos_isometry_order{order}", a * b, math.factorial(order) * inner ** order, cal))
    out.append(_mc_check("chaos_orthogonality_1_2",
                         multiple_integral(cfg, f1, 1) * multiple_integral(cfg, f2, 2), 0.0, cal))

    inside = count(cfg, first)
    rest = count(cfg, window_event(w)) - inside
    m1, m2 = inside.mean(), rest.mean()
    out.append(_mc_check("disjoint_count_independence", (inside - m1) * (rest - m2), 0.0, cal))
    return out


def process_checks(spec: LevyMeasureSpec, w: WindowSpec, replicates: int, K: int, rng,
                   cal: calibration.Calibration = calibration.DEFAULT,
                   compensator_shift: float = 0.0) -> list[IdentityCheck]:
    """Mean and second-moment identities of X against the exact Levy-measure integrals.

    ``compensator_shift`` is a fault-injection hook: it is added to the
    compensator of every coordinate after sampling.
    """
    batch = sample_trajectory(spec, w.length, w.threshold, replicates, rng, cal.small_jump_tol)
    x = batch.windows - compensator_shift
    mu = [mean_value(spec, w, i) for i in range(w.length)]
    out = [_mc_check("mean_value", x[:, 0], mu[0], cal)]
    if all(lf.base.square_integrable for lf in spec.leaves()):
        for lag in range(min(K, w.length - 1) + 1):
            try:
                c = levy_covariance(spec, lag, w)[lag]
            except NotImplementedError:
                continue
            out.append(_mc_check(f"covariance_isometry_lag{lag}", x[:, 0] * x[:, lag], c + mu[0] * mu[lag], cal))
    return out
