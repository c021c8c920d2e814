"""Finite invariant base: Q = c * (law of a stationary sequence)."""
from __future__ import annotations

from itertools import product

import numpy as np
from scipy import integrate

from ._core import BaseSystem, DeclaredClass, PointBlock, WindowSpec, group_atoms


class StationaryLaw:
    """A stationary law on R^Z, addressed through finite windows."""

    name = "law"

    def sample(self, width: int, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def hit_probability(self, w: WindowSpec) -> float:
        raise NotImplementedError

    def pair_hit_probability(self, w: WindowSpec, k: int) -> float:
        """P(window hits and the window shifted by k hits)."""
        raise NotImplementedError

    def marginal_atoms(self, coords):
        """Joint law of the coordinates as (probabilities, vectors)."""
        raise NotImplementedError(f"{self.name} is not atomic")

    def restricted_atoms(self, coords, w: WindowSpec):
        """Law of the coordinates restricted to windows that hit, as (masses, vectors)."""
        raise NotImplementedError(f"{self.name} is not atomic")

    def params(self) -> dict:
        return {"name": self.name}


class ConstantLaw(StationaryLaw):
    """Constant sequences x_i = V with V drawn from a finite distribution."""

    name = "constant"

    def __init__(self, values, probs=None):
        self.values = np.atleast_1d(np.asarray(values, dtype=float))
        self.probs = (np.full(self.values.size, 1.0 / self.values.size) if probs is None
                      else np.atleast_1d(np.asarray(probs, dtype=float)))
        _check_discrete(self.values, self.probs)

    def params(self):
        return {"name": self.name, "values": self.values.tolist(), "probs": self.probs.tolist()}

    def sample(self, width, count, rng):
        v = self.values[rng.choice(self.values.size, size=count, p=self.probs)]
        return np.repeat(v[:, None], width, axis=1)

    def hit_probability(self, w):
        return float(self.probs[np.abs(self.values) > w.threshold].sum())

    def pair_hit_probability(self, w, k):
        return self.hit_probability(w)

    def marginal_atoms(self, coords):
        return self.probs.copy(), np.repeat(self.values[:, None], len(coords), axis=1)

    def restricted_atoms(self, coords, w):
        keep = np.abs(self.values) > w.threshold
        probs, vals = self.marginal_atoms(coords)
        return probs[keep], vals[keep]


class IIDDiscreteLaw(StationaryLaw):
    name = "iid_discrete"

    def __init__(self, values, probs=None):
        self.values = np.atleast_1d(np.asarray(values, dtype=float))
        self.probs = (np.full(self.values.size, 1.0 / self.values.size) if probs is None
                      else np.atleast_1d(np.asarray(probs, dtype=float)))
        _check_discrete(self.values, self.probs)

    def params(self):
        return {"name": self.name, "values": self.values.tolist(), "probs": self.probs.tolist()}

    def sample(self, width, count, rng):
        return self.values[rng.choice(self.values.size, size=(count, width), p=self.probs)]

    def _quiet(self, eps):
        return float(self.probs[np.abs(self.values) <= eps].sum())

    def hit_probability(self, w):
        return 1.0 - self._quiet(w.threshold) ** w.length

    def pair_hit_probability(self, w, k):
        q, n = self._quiet(w.threshold), w.length
        return 1.0 - 2 * q ** n + q ** (n + min(abs(k), n))

    def marginal_atoms(self, coords):
        uniq = sorted(set(int(c) for c in coords))
        pos = [uniq.index(int(c)) for c in coords]
        probs, vectors = [], []
        for combo in product(range(self.values.size), repeat=len(uniq)):
            probs.append(float(np.prod(self.probs[list(combo)])))
            vectors.append([self.values[combo[p]] for p in pos])
        return np.array(probs), np.array(vectors)

    def restricted_atoms(self, coords, w):
        # the window coordinates outside ``coords`` are independent of them
        probs, vals = self.marginal_atoms(coords)
        inside = [j for j, c in enumerate(coords) if 0 <= c < w.length]
        free = w.length - len({coords[j] for j in inside})
        loud = np.any(np.abs(vals[:, inside]) > w.threshold, axis=1) if inside else np.zeros(len(probs), bool)
        p_hit = np.where(loud, 1.0, 1.0 - self._quiet(w.threshold) ** free)
        return probs * p_hit, vals


class IIDUniformLaw(StationaryLaw):
    """i.i.d. Uniform(low, high) coordinates."""

    name = "iid_uniform"

    def __init__(self, low: float = 0.0, high: float = 1.0):
        if not high > low:
            raise ValueError("uniform law needs high > low")
        self.low, self.high = float(low), float(high)

    def params(self):
        return {"name": self.name, "low": self.low, "high": self.high}

    def sample(self, width, count, rng):
        return rng.uniform(self.low, self.high, size=(count, width))

    def _quiet(self, eps):
        a, b = max(self.low, -eps), min(self.high, eps)
        return max(b - a, 0.0) / (self.high - self.low)

    def hit_probability(self, w):
        return 1.0 - self._quiet(w.threshold) ** w.length

    def pair_hit_probability(self, w, k):
        q, n = self._quiet(w.threshold), w.length
        return 1.0 - 2 * q ** n + q ** (n + min(abs(k), n))


def _check_discrete(values, probs):
    if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
        raise ValueError("values and probabilities must be matching non-empty 1-d sequences")
    if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0):
        raise ValueError("probabilities must be nonnegative and sum to 1")
    if probs[values != 0].sum() <= 0:
        raise ValueError("law is concentrated on the zero sequence")


def _uniform_mgf(law: IIDUniformLaw, z: complex, lo: float, hi: float) -> complex:
    """int_lo^hi exp(z x) dx / (high - low)."""
    if hi <= lo:
        return 0j
    width = law.high - law.low
    if z == 0:
        return complex((hi - lo) / width)
    return complex((np.exp(z * hi) - np.exp(z * lo)) / z / width)


_LAWS = {"constant": ConstantLaw, "iid_discrete": IIDDiscreteLaw, "iid_uniform": IIDUniformLaw}


def law_from_params(params: dict) -> StationaryLaw:
    params = dict(params)
    name = params.pop("name")
    if name not in _LAWS:
        raise ValueError(f"unknown law {name!r}; expected one of {sorted(_LAWS)}")
    return _LAWS[name](**params)


class FiniteInvariantBase(BaseSystem):
    """Q = c * law.  Conditioned windows are drawn by rejection from the law.

    Orbit values are only defined inside the index range stored at sampling
    time; callers request a wider range up front when they need shifts.
    """

    family = "FiniteInvariant"
    declared_class = DeclaredClass.TYPE_II1

    max_rejection_rounds = 10_000

    def __init__(self, intensity: float, law: StationaryLaw):
        if not (intensity > 0 and np.isfinite(intensity)):
            raise ValueError(f"intensity must be positive and finite, got {intensity}")
        if not isinstance(law, StationaryLaw):
            raise TypeError("law must be a StationaryLaw")
        self.intensity = float(intensity)
        self.law = law

    def params(self):
        return {"intensity": self.intensity, "law": self.law.params()}

    @property
    def observable(self):
        return "f(x) = x_0"

    @property
    def nonnegative(self):
        if isinstance(self.law, (ConstantLaw, IIDDiscreteLaw)):
            return bool(np.all(self.law.values >= 0))
        if isinstance(self.law, IIDUniformLaw):
            return self.law.low >= 0
        return False

    @property
    def total_mass(self) -> float:
        return self.intensity

    def hit_mass(self, w):
        return self.intensity * self.law.hit_probability(w)

    def correlation_exact(self, w, k):
        return self.intensity * self.law.pair_hit_probability(w, k)

    def small_jump_bound(self, w):
        # mass of windows that never exceed eps, weighted by the squared value
        if isinstance(self.law, ConstantLaw):
            quiet = np.abs(self.law.values) <= w.threshold
            second = np.sum(self.law.probs[quiet] * self.law.values[quiet] ** 2)
            return np.full(w.length, self.intensity * second)
        if isinstance(self.law, IIDDiscreteLaw):
            quiet = np.abs(self.law.values) <= w.threshold
            second = np.sum(self.law.probs[quiet] * self.law.values[quiet] ** 2)
            q = self.law._quiet(w.threshold)
        elif isinstance(self.law, IIDUniformLaw):
            lo, hi = self.law.low, self.law.high
            a, b = max(lo, -w.threshold), min(hi, w.threshold)
            if b <= a:
                return np.zeros(w.length)
            q = (b - a) / (hi - lo)
            second = (b ** 3 - a ** 3) / 3 / (hi - lo)
        else:
            raise NotImplementedError
        return np.full(w.length, self.intensity * second * q ** (w.length - 1))

    def marginal_atoms(self, coords, w):
        coords = [int(c) for c in coords]
        probs, vals = self.law.restricted_atoms(coords, w)
        keep = (probs > 0) & np.any(vals != 0, axis=1)
        return group_atoms(self.intensity * probs[keep], vals[keep])

    def integrate(self, g, coords, w):
        if not isinstance(self.law, IIDUniformLaw):
            return super().integrate(g, coords, w)
        if len(set(coords)) != 1:
            raise NotImplementedError("joint integrals are only available for atomic laws")
        m = len(coords)
        return self._uniform_coordinate(lambda x: g(np.repeat(x, m, axis=1)), w)

    def exp_integral(self, z, coords, w):
        if not isinstance(self.law, IIDUniformLaw):
            return super().exp_integral(z, coords, w)
        # E[(e^{zx} - 1) 1_A] = E[e^{zx}] - 1 - E[e^{zx} 1_{A^c}] + P(A^c), coordinates independent
        law = self.law
        zmap = {}
        for c, zc in zip(coords, np.asarray(z, dtype=complex)):
            zmap[int(c)] = zmap.get(int(c), 0j) + zc
        if any(c < 0 or c >= w.length for c in zmap):
            raise ValueError("coordinates must lie inside the window")
        a, b = max(law.low, -w.threshold), min(law.high, w.threshold)
        full = np.prod([_uniform_mgf(law, zc, law.low, law.high) for zc in zmap.values()])
        quiet = np.prod([_uniform_mgf(law, zmap.get(i, 0j), a, b) for i in range(w.length)])
        q = max(b - a, 0.0) / (law.high - law.low)
        return complex(self.intensity * (full - 1.0 - quiet + q ** w.length))

    def _uniform_coordinate(self, g, w):
        # E[g(x_i); window hits] = E[g(x)] - E[g(x); |x| <= eps] * q^(n-1)
        lo, hi = self.law.low, self.law.high
        a, b = max(lo, -w.threshold), min(hi, w.threshold)
        full = integrate.quad(lambda x: float(g(np.array([[x]]))[0]), lo, hi, limit=200)[0] / (hi - lo)
        if b <= a:
            return self.intensity * full
        quiet = integrate.quad(lambda x: float(g(np.array([[x]]))[0]), a, b, limit=200)[0] / (hi - lo)
        q = (b - a) / (hi - lo)
        return self.intensity * (full - quiet * q ** (w.length - 1))

    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        width = hi - lo
        out = np.empty((count, width))
        filled = 0
        for _ in range(self.max_rejection_rounds):
            if filled == count:
                break
            need = count - filled
            p = max(self.law.hit_probability(w), 1e-6)
            batch = self.law.sample(width, int(need / p * 1.2) + 16, rng)
            ok = np.abs(batch[:, -lo:-lo + w.length]).max(axis=1) > w.threshold
            take = batch[ok][:need]
            out[filled:filled + len(take)] = take
            filled += len(take)
        if filled < count:
            raise RuntimeError("rejection sampler did not converge")
        return PointBlock(self, out, lo)
