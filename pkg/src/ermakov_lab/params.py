"""Physical parameters, frequency schedules, and classical drives.

All quantities default to the nondimensional convention hbar = m = 1; every
constant remains an explicit field so dimensional runs stay possible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

#: Sentinel for an infinite measurement time constant (1/tau = 0).
TAU_INFINITE = math.inf

#: Damping-coefficient variants for the reduced width equation.
COEFF_CONSISTENT = "consistent"        # 1/(4 tau^2)
COEFF_PAPER_LITERAL = "paper_literal"  # 1/(4 tau^4)

_VARIANTS = (COEFF_CONSISTENT, COEFF_PAPER_LITERAL)


@dataclass(frozen=True)
class PhysParams:
    """Physical constants of the measured oscillator.

    m, hbar > 0; tau > 0 (math.inf switches the measurement off);
    coeff_variant selects 1/(4 tau^2) vs 1/(4 tau^4) in the width equation.
    """

    m: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0
    lam: float = 0.0
    tau: float = TAU_INFINITE
    coeff_variant: str = COEFF_CONSISTENT

    def __post_init__(self):
        if not (self.m > 0):
            raise ConfigurationError("m must be positive")
        if not (self.hbar > 0):
            raise ConfigurationError("hbar must be positive")
        if not (self.omega >= 0):
            raise ConfigurationError("omega must be non-negative")
        if not (self.tau > 0):
            raise ConfigurationError("tau must be positive (math.inf allowed)")
        if self.coeff_variant not in _VARIANTS:
            raise ConfigurationError(
                f"coeff_variant must be one of {_VARIANTS}, got {self.coeff_variant!r}"
            )

    @property
    def inv_tau(self) -> float:
        """1/tau, exactly zero for the infinite-tau sentinel."""
        return 0.0 if math.isinf(self.tau) else 1.0 / self.tau

    @property
    def c_tau(self) -> float:
        """Coefficient added to omega^2 in the width equation."""
        it = self.inv_tau
        if self.coeff_variant == COEFF_CONSISTENT:
            return 0.25 * it * it
        return 0.25 * it ** 4


@dataclass(frozen=True)
class OmegaSpec:
    """Time-dependent frequency omega^2(t) = omega0^2 (1 + eps sin(omega_m t))."""

    omega0: float = 1.0
    eps: float = 0.0
    omega_m: float = 0.0

    def __post_init__(self):
        if not (self.omega0 >= 0):
            raise ConfigurationError("omega0 must be non-negative")
        if not (abs(self.eps) < 1):
            raise ConfigurationError("|eps| must be < 1 so omega^2(t) stays positive")

    @classmethod
    def constant(cls, omega0: float) -> "OmegaSpec":
        return cls(omega0=omega0)

    @classmethod
    def sinusoidal(cls, omega0: float, eps: float, omega_m: float) -> "OmegaSpec":
        return cls(omega0=omega0, eps=eps, omega_m=omega_m)

    def omega2(self, t: float) -> float:
        if self.eps == 0.0:
            return self.omega0 * self.omega0
        return self.omega0 * self.omega0 * (1.0 + self.eps * math.sin(self.omega_m * t))


@dataclass(frozen=True)
class DriveSpec:
    """The classical drive X(t) coupled to the oscillator through lambda*x*X(t).

    Kinds: zero, constant, sinusoid X0*cos(Omega t + phase), conserving
    (state-dependent, keeps the reduced invariant constant), and tabulated
    (linear interpolation between strictly increasing sample times).
    """

    kind: str = "zero"
    x0: float = 0.0
    freq: float = 0.0
    phase: float = 0.0
    table: tuple = field(default=())

    _KINDS = ("zero", "constant", "sinusoid", "conserving", "tabulated")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigurationError(f"unknown drive kind {self.kind!r}")
        if self.kind == "tabulated":
            ts = [p[0] for p in self.table]
            if len(ts) < 2:
                raise ConfigurationError("tabulated drive needs at least two samples")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ConfigurationError("tabulated drive times must be strictly increasing")

    @classmethod
    def zero(cls) -> "DriveSpec":
        return cls(kind="zero")

    @classmethod
    def constant(cls, x0: float) -> "DriveSpec":
        return cls(kind="constant", x0=x0)

    @classmethod
    def sinusoid(cls, x0: float, freq: float, phase: float = 0.0) -> "DriveSpec":
        return cls(kind="sinusoid", x0=x0, freq=freq, phase=phase)

    @classmethod
    def conserving(cls) -> "DriveSpec":
        return cls(kind="conserving")

    @classmethod
    def tabulated(cls, points) -> "DriveSpec":
        return cls(kind="tabulated", table=tuple((float(t), float(x)) for t, x in points))

    def value(self, t: float, state=None, params: PhysParams | None = None) -> float:
        """Evaluate X(t); the conserving kind needs the current reduced state."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.x0
        if self.kind == "sinusoid":
            return self.x0 * math.cos(self.freq * t + self.phase)
        if self.kind == "tabulated":
            ts = [p[0] for p in self.table]
            xs = [p[1] for p in self.table]
            return float(np.interp(t, ts, xs))
        # conserving
        if state is None or params is None:
            raise ConfigurationError("conserving drive requires the current state and params")
        from .ermakov import conserving_drive

        return conserving_drive(state, params)
