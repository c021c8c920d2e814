"""Amplitude (mark) measures rho on R \\ {0} for moving-average bases."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def _quad_complex(func, a, b, **kw):
    re = integrate.quad(lambda u: float(np.real(func(u))), a, b, limit=400, **kw)[0]
    im = integrate.quad(lambda u: float(np.imag(func(u))), a, b, limit=400, **kw)[0]
    return complex(re, im)


class DiscreteAmplitude:
    """Finite measure sum_j w_j delta_{v_j}."""

    kind = "atoms"

    def __init__(self, values, weights=None):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        weights = np.ones_like(values) if weights is None else np.atleast_1d(np.asarray(weights, dtype=float))
        if values.shape != weights.shape or values.ndim != 1 or values.size == 0:
            raise ValueError("atom values and weights must be matching non-empty 1-d sequences")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(weights))):
            raise ValueError("amplitude atoms must be finite")
        if np.any(values == 0):
            raise ValueError("amplitude measure must not charge 0")
        if np.any(weights <= 0):
            raise ValueError("atom weights must be positive")
        self.values = values
        self.weights = weights

    def params(self) -> dict:
        return {"atoms": [[float(v), float(w)] for v, w in zip(self.values, self.weights)]}

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.values > 0))

    def tail_mass(self, t: float) -> float:
        return float(self.weights[np.abs(self.values) > t].sum())

    def restricted(self, t: float):
        keep = np.abs(self.values) > t
        return self.weights[keep], self.values[keep]

    def sample_tail(self, t: float, size: int, rng: np.random.Generator) -> np.ndarray:
        w, v = self.restricted(t)
        return v[rng.choice(len(v), size=size, p=w / w.sum())]

    def restricted_integral(self, g, t: float):
        w, v = self.restricted(t)
        if len(v) == 0:
            return 0.0
        return np.sum(w * g(v))

    def restricted_linear(self, t: float) -> float:
        return float(self.restricted_integral(lambda v: v, t))

    def restricted_exp(self, s: complex, t: float) -> complex:
        """Integral of exp(s v) - 1 over |v| > t."""
        return complex(self.restricted_integral(lambda v: np.exp(s * v) - 1.0, t))

    def restricted_c(self, a: float, t: float) -> float:
        return float(self.restricted_integral(lambda v: np.clip(a * v, -1.0, 1.0), t))

    def small_second_moment(self, t: float) -> float:
        keep = np.abs(self.values) <= t
        return float(np.sum(self.weights[keep] * self.values[keep] ** 2))

    def second_moment(self) -> float:
        return float(np.sum(self.weights * self.values ** 2))

    def scaled_intensity(self, s: float) -> "DiscreteAmplitude":
        return DiscreteAmplitude(self.values, self.weights * s)


class PowerLawAmplitude:
    """rho(dv) = alpha |v|^(-alpha-1) (positive 1{v>0} + negative 1{v<0}) dv, 0 < alpha < 2.

    The symmetric alpha-stable choice is positive = negative = 1/2, for which
    rho{|v| > t} = t^-alpha.
    """

    kind = "power_law"

    def __init__(self, alpha: float, positive: float = 0.5, negative: float = 0.5):
        if not 0 < alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
        if positive < 0 or negative < 0 or positive + negative <= 0:
            raise ValueError("tail weights must be nonnegative and not both zero")
        self.alpha = float(alpha)
        self.positive = float(positive)
        self.negative = float(negative)

    def params(self) -> dict:
        return {"power_law": {"alpha": self.alpha, "positive": self.positive, "negative": self.negative}}

    @property
    def nonnegative(self) -> bool:
        return self.negative == 0

    @property
    def symmetric(self) -> bool:
        return self.positive == self.negative

    def tail_mass(self, t: float) -> float:
        return (self.positive + self.negative) * t ** (-self.alpha)

    def sample_tail(self, t: float, size: int, rng: np.random.Generator) -> np.ndarray:
        # inverse CDF of the Pareto tail beyond t
        u = 1.0 - rng.random(size)
        mag = t * u ** (-1.0 / self.alpha)
        total = self.positive + self.negative
        sign = np.where(rng.random(size) < self.positive / total, 1.0, -1.0)
        return sign * mag

    def restricted_integral(self, g, t: float):
        """Integral of g over |v| > t by the substitution u = (t / v)^alpha."""
        a = self.alpha
        scale = t ** (-a)
        total = 0.0
        for weight, sgn in ((self.positive, 1.0), (self.negative, -1.0)):
            if weight == 0:
                continue
            f = lambda u, s=sgn: g(np.array([s * t * u ** (-1.0 / a)]))[0]
            total = total + weight * scale * _quad_complex(f, 0.0, 1.0)
        if isinstance(total, complex) and total.imag == 0:
            return total.real
        return total

    def _fourier_parts(self, sigma: float, t: float):
        """C = int_t^inf (cos(sigma v) - 1) alpha v^-a-1 dv and S = int_t^inf sin(sigma v) alpha v^-a-1 dv."""
        a = self.alpha
        T = sigma * t
        cos_part, sin_part = 0.0, 0.0
        if T < 1:
            cos_part += integrate.quad(lambda y: (math.cos(y) - 1.0) * y ** (-a - 1), T, 1.0, limit=200)[0]
            sin_part += integrate.quad(lambda y: math.sin(y) * y ** (-a - 1), T, 1.0, limit=200)[0]
            start = 1.0
        else:
            start = T
        cos_part += integrate.quad(lambda y: y ** (-a - 1), start, np.inf, weight="cos", wvar=1.0)[0]
        cos_part -= start ** (-a) / a
        sin_part += integrate.quad(lambda y: y ** (-a - 1), start, np.inf, weight="sin", wvar=1.0)[0]
        scale = a * sigma ** a
        return scale * cos_part, scale * sin_part

    def restricted_exp(self, s: complex, t: float) -> complex:
        """Integral of exp(s v) - 1 over |v| > t, for s purely imaginary or real."""
        s = complex(s)
        if s == 0:
            return 0j
        if s.real == 0:
            sigma = abs(s.imag)
            c, si = self._fourier_parts(sigma, t)
            si = math.copysign(si, s.imag)
            return complex((self.positive + self.negative) * c, (self.positive - self.negative) * si)
        if s.imag == 0 and s.real < 0 and self.negative == 0:
            a, r = self.alpha, -s.real
            val = integrate.quad(lambda v: math.expm1(-r * v) * a * v ** (-a - 1), t, np.inf, limit=200)[0]
            return complex(self.positive * val)
        return complex(self.restricted_integral(lambda v: np.exp(s * v) - 1.0, t))

    def restricted_linear(self, t: float) -> float:
        a = self.alpha
        if a > 1:
            return (self.positive - self.negative) * a / (a - 1) * t ** (1 - a)
        if self.symmetric:
            return 0.0
        raise ValueError(f"first moment of an asymmetric power law with alpha={a} <= 1 diverges")

    def _c_positive(self, a: float, t: float) -> float:
        # integral over v > t of c(a v) alpha v^(-alpha-1) dv for a > 0
        al = self.alpha
        if a * t >= 1:
            return t ** (-al)
        top = 1.0 / a
        if al == 1:
            body = a * al * math.log(top / t)
        else:
            body = a * al * (top ** (1 - al) - t ** (1 - al)) / (1 - al)
        return body + a ** al

    def restricted_c(self, a: float, t: float) -> float:
        if a == 0:
            return 0.0
        return math.copysign(1.0, a) * (self.positive - self.negative) * self._c_positive(abs(a), t)

    def small_second_moment(self, t: float) -> float:
        a = self.alpha
        return (self.positive + self.negative) * a / (2 - a) * t ** (2 - a)

    def second_moment(self) -> float:
        return math.inf

    def scaled_intensity(self, s: float) -> "PowerLawAmplitude":
        return PowerLawAmplitude(self.alpha, self.positive * s, self.negative * s)


def amplitude_from_params(params: dict):
    if "atoms" in params:
        atoms = np.asarray(params["atoms"], dtype=float).reshape(-1, 2)
        return DiscreteAmplitude(atoms[:, 0], atoms[:, 1])
    if "power_law" in params:
        return PowerLawAmplitude(**params["power_law"])
    raise ValueError(f"unrecognised amplitude description {params!r}")
