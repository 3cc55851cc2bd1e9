"""T-periodic visco-elastic environment.

Force convention: ``f`` is the force applied to the robot,

    f = F0(t) + KS(t) (x - x0(t)) + KD(t) xdot,

so a restoring wall has negative-definite KS and KD.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonConstantEnvironment, SingularStiffness

MAX_HARMONICS = 5


@dataclass(frozen=True)
class Periodic:
    """Constant or truncated Fourier series with fundamental 2*pi/T.

    ``mean`` fixes the value shape (vector or matrix); ``cos[k]`` and
    ``sin[k]`` are the coefficients of harmonic k+1.
    """

    mean: np.ndarray
    T: float = 1.0
    cos: tuple = ()
    sin: tuple = ()

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cos = tuple(np.broadcast_to(np.asarray(c, float), mean.shape).copy() for c in self.cos)
        sin = tuple(np.broadcast_to(np.asarray(s, float), mean.shape).copy() for s in self.sin)
        if max(len(cos), len(sin)) > MAX_HARMONICS:
            raise ValueError(f"at most {MAX_HARMONICS} harmonics are supported")
        if not self.T > 0:
            raise ValueError("period T must be positive")
        for a in (mean,) + cos + sin:
            a.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cos", cos)
        object.__setattr__(self, "sin", sin)
        object.__setattr__(self, "_constant", not any(np.any(c) for c in cos + sin))

    @classmethod
    def constant(cls, value, T=1.0):
        return cls(np.asarray(value, float), T)

    @property
    def is_constant(self):
        return self._constant

    @property
    def shape(self):
        return self.mean.shape

    def __call__(self, t):
        """Value at scalar time t (read-only when constant)."""
        if self._constant:
            return self.mean
        phase = 2.0 * np.pi * (np.fmod(t, self.T) / self.T)
        out = self.mean.copy()
        for k, c in enumerate(self.cos, start=1):
            out += c * np.cos(k * phase)
        for k, s in enumerate(self.sin, start=1):
            out += s * np.sin(k * phase)
        return out

    def sample(self, t):
        """Vectorised evaluation: returns an array of shape (len(t), *shape)."""
        t = np.asarray(t, dtype=float)
        out = np.broadcast_to(self.mean, t.shape + self.mean.shape).copy()
        if self.is_constant:
            return out
        phase = 2.0 * np.pi * (np.fmod(t, self.T) / self.T)
        extra = (slice(None),) + (None,) * self.mean.ndim
        for k, c in enumerate(self.cos, start=1):
            out += np.cos(k * phase)[extra] * c
        for k, s in enumerate(self.sin, start=1):
            out += np.sin(k * phase)[extra] * s
        return out

    def derivative(self, t):
        if self.is_constant:
            return np.zeros_like(self.mean)
        w = 2.0 * np.pi / self.T
        phase = w * np.fmod(t, self.T)
        out = np.zeros_like(self.mean)
        for k, c in enumerate(self.cos, start=1):
            out -= k * w * c * np.sin(k * phase)
        for k, s in enumerate(self.sin, start=1):
            out += k * w * s * np.cos(k * phase)
        return out


class EffectiveForceParams(NamedTuple):
    F_star: np.ndarray
    KS_star: np.ndarray
    KD_star: np.ndarray


@dataclass(frozen=True)
class EnvironmentProfile:
    T: float
    F0: Periodic
    KS: Periodic
    KD: Periodic
    x0: Periodic

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        n = self.F0.shape[0]
        for name in ("KS", "KD"):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
        if self.x0.shape != (n,):
            raise ValueError(f"x0 must have length {n}")
        # constant profiles reduce to f = F* + KS x + KD xdot
        frozen = None
        if self.is_constant:
            KS = self.KS.mean
            frozen = (self.F0.mean - KS @ self.x0.mean, KS, self.KD.mean)
        object.__setattr__(self, "_frozen", frozen)

    def force(self, t, x, xdot):
        if self._frozen is not None:
            F_star, KS, KD = self._frozen
            return F_star + KS @ x + KD @ xdot
        return self.F0(t) + self.KS(t) @ (x - self.x0(t)) + self.KD(t) @ xdot

    @property
    def n(self):
        return self.F0.shape[0]

    @property
    def is_constant(self):
        return all(p.is_constant for p in (self.F0, self.KS, self.KD, self.x0))

    @classmethod
    def free_space(cls, n, T):
        z = np.zeros(n)
        Z = np.zeros((n, n))
        return cls(T, Periodic.constant(z, T), Periodic.constant(Z, T),
                   Periodic.constant(Z, T), Periodic.constant(z, T))

    @classmethod
    def constant(cls, T, F0, KS, KD, x0):
        return cls(T, *(Periodic.constant(v, T) for v in (F0, KS, KD, x0)))


def interaction_force(env: EnvironmentProfile, t, x, xdot):
    return env.force(t, np.asarray(x, float), np.asarray(xdot, float))


def environment_truth(env: EnvironmentProfile, t) -> EffectiveForceParams:
    KS = env.KS(t)
    return EffectiveForceParams(env.F0(t) - KS @ env.x0(t), KS, env.KD(t))


def truth_series(env: EnvironmentProfile, t):
    """Vectorised environment_truth over a time array."""
    KS = env.KS.sample(t)
    F_star = env.F0.sample(t) - np.einsum("kij,kj->ki", KS, env.x0.sample(t))
    return EffectiveForceParams(F_star, KS, env.KD.sample(t))


def steady_desired_position(env: EnvironmentProfile, F_d):
    """Rest position x_d with F_d = F* + KS* x_d for a constant environment."""
    if not env.is_constant:
        raise NonConstantEnvironment("steady desired position needs a constant environment")
    F_star, KS, _ = environment_truth(env, 0.0)
    if abs(np.linalg.det(KS)) < 1e-12 * max(1.0, np.abs(KS).max()) ** KS.shape[0]:
        raise SingularStiffness("environment stiffness is singular")
    return np.linalg.solve(KS, np.asarray(F_d, float) - F_star)
