"""Reduced ODE systems and their invariants.

Two systems are integrated with fixed-step RK4:

  * classical: q'' = -omega^2(t) q together with the auxiliary amplitude
    alpha'' = 1/alpha^3 - omega^2(t) alpha, carrying the Lewis invariant
    I = [(q' alpha - alpha' q)^2 + (q/alpha)^2] / 2.

  * measurement: the reduced width/centroid system
    alpha'' = 1/alpha^3 - alpha'/tau - (omega^2 + C_tau) alpha,
    xbar''  = -omega^2 xbar - (lambda/m) X(t),
    carrying the analogous invariant built from (alpha, xbar) and its
    analytic rate, which the conserving drive zeroes identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    InvalidStateError,
    TrajectoryAborted,
    WidthCollapseError,
)
from .params import DriveSpec, OmegaSpec, PhysParams

#: Width below which the 1/alpha^3 term is considered a collapse.
ALPHA_MIN = 1e-8


@dataclass(frozen=True)
class ClassicalState:
    t: float
    q: float
    qdot: float
    alpha: float
    alphadot: float


@dataclass(frozen=True)
class ErmakovState:
    t: float
    alpha: float
    alphadot: float
    xbar: float
    xbardot: float


def classical_rhs(s: ClassicalState, w: OmegaSpec) -> tuple[float, float]:
    """Accelerations (q'', alpha'') of the classical baseline system."""
    vals = (s.t, s.q, s.qdot, s.alpha, s.alphadot)
    if not all(math.isfinite(v) for v in vals):
        raise InvalidStateError(f"non-finite classical state {s}")
    if s.alpha <= 0:
        raise DomainError("alpha must be positive")
    w2 = w.omega2(s.t)
    qddot = -w2 * s.q
    addot = 1.0 / s.alpha ** 3 - w2 * s.alpha
    return qddot, addot


def measurement_rhs(s: ErmakovState, p: PhysParams, d: DriveSpec) -> tuple[float, float]:
    """Accelerations (alpha'', xbar'') of the reduced measurement system."""
    vals = (s.t, s.alpha, s.alphadot, s.xbar, s.xbardot)
    if not all(math.isfinite(v) for v in vals):
        raise InvalidStateError(f"non-finite state {s}")
    if s.alpha < ALPHA_MIN:
        raise WidthCollapseError(f"alpha={s.alpha} below collapse floor {ALPHA_MIN}")
    w2 = p.omega * p.omega
    x_drive = d.value(s.t, s, p)
    addot = 1.0 / s.alpha ** 3 - p.inv_tau * s.alphadot - (w2 + p.c_tau) * s.alpha
    xddot = -w2 * s.xbar - (p.lam / p.m) * x_drive
    return addot, xddot


def lewis_invariant(q: float, qdot: float, alpha: float, alphadot: float) -> float:
    """Lewis invariant of the classical pair (q, alpha)."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return 0.5 * ((qdot * alpha - alphadot * q) ** 2 + (q / alpha) ** 2)


def els_invariant(s: ErmakovState) -> float:
    """Invariant of the reduced measurement system, built from (alpha, xbar)."""
    if s.alpha <= 0:
        raise DomainError("alpha must be positive")
    return 0.5 * ((s.alphadot * s.xbar - s.xbardot * s.alpha) ** 2 + (s.xbar / s.alpha) ** 2)


def els_invariant_rate(s: ErmakovState, p: PhysParams, d: DriveSpec) -> float:
    """Analytic dI/dt along the measurement flow.

    Evaluated in the xbar-cancelled form so xbar = 0 is regular:
      dI/dt = [alpha'/(alpha tau) + C_tau] alpha^3 xbar w - (lambda X/m) alpha^3 w,
      w = d/dt (xbar/alpha) = (xbar' alpha - xbar alpha') / alpha^2.
    """
    if s.alpha <= 0:
        raise DomainError("alpha must be positive")
    x_drive = d.value(s.t, s, p)
    w = (s.xbardot * s.alpha - s.xbar * s.alphadot) / s.alpha ** 2
    a3 = s.alpha ** 3
    coeff = s.alphadot / s.alpha * p.inv_tau + p.c_tau
    return coeff * a3 * s.xbar * w - (p.lam * x_drive / p.m) * a3 * w


def conserving_drive(s: ErmakovState, p: PhysParams) -> float:
    """Drive X that makes the analytic invariant rate vanish identically."""
    if p.lam == 0:
        raise ConfigurationError("conserving drive requires lambda != 0")
    if s.alpha <= 0:
        raise DomainError("alpha must be positive")
    return (p.m / p.lam) * (s.alphadot / s.alpha * p.inv_tau + p.c_tau) * s.xbar


def delta_from_alpha(alpha: float, p: PhysParams) -> float:
    """Physical width delta = (hbar^2 / 4 m^2)^(1/4) alpha."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return (p.hbar ** 2 / (4.0 * p.m ** 2)) ** 0.25 * alpha


def alpha_from_delta(delta: float, p: PhysParams) -> float:
    """Inverse of delta_from_alpha."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    return delta / (p.hbar ** 2 / (4.0 * p.m ** 2)) ** 0.25


@dataclass
class Trajectory:
    """Uniformly sampled trajectory of either reduced system.

    For kind="classical" the x/xdot columns hold q/qdot; delta and drive
    are identically the width map of alpha and zero respectively.
    """

    kind: str
    params: PhysParams
    dt: float
    t: np.ndarray
    alpha: np.ndarray
    alphadot: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    delta: np.ndarray
    invariant: np.ndarray
    dIdt_analytic: np.ndarray
    drive: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def dIdt_numeric(self) -> np.ndarray:
        """Centered finite difference of the invariant (one-sided at the ends)."""
        return np.gradient(self.invariant, self.t)

    def final_state(self):
        i = len(self.t) - 1
        if self.kind == "classical":
            return ClassicalState(self.t[i], self.x[i], self.xdot[i],
                                  self.alpha[i], self.alphadot[i])
        return ErmakovState(self.t[i], self.alpha[i], self.alphadot[i],
                            self.x[i], self.xdot[i])


def _package(kind, params, dt, rows):
    cols = np.array(rows, dtype=float).T
    return Trajectory(kind=kind, params=params, dt=dt,
                      t=cols[0], alpha=cols[1], alphadot=cols[2],
                      x=cols[3], xdot=cols[4], delta=cols[5],
                      invariant=cols[6], dIdt_analytic=cols[7], drive=cols[8])


def integrate(kind: str,
              init,
              params: PhysParams,
              drive: DriveSpec | None = None,
              omega_spec: OmegaSpec | None = None,
              t_end: float = 10.0,
              dt: float = 1e-3,
              stride: int = 1) -> Trajectory:
    """Integrate one of the reduced systems with fixed-step RK4.

    kind is "classical" (init: ClassicalState, requires omega_spec) or
    "measurement" (init: ErmakovState, requires drive).  Records every
    `stride` steps, always including the initial and final states.  A
    width collapse or non-finite value raises TrajectoryAborted carrying
    the records accumulated so far.
    """
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    if t_end <= init.t:
        raise ConfigurationError("t_end must exceed the initial time")
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")

    classical = kind == "classical"
    if classical:
        if omega_spec is None:
            omega_spec = OmegaSpec.constant(params.omega)
        y = (init.q, init.qdot, init.alpha, init.alphadot)

        def deriv(t, y):
            s = ClassicalState(t, y[0], y[1], y[2], y[3])
            qdd, add = classical_rhs(s, omega_spec)
            return (y[1], qdd, y[3], add)

        def record(t, y):
            inv = lewis_invariant(y[0], y[1], y[2], y[3])
            dlt = delta_from_alpha(y[2], params)
            return (t, y[2], y[3], y[0], y[1], dlt, inv, 0.0, 0.0)
    elif kind == "measurement":
        if drive is None:
            drive = DriveSpec.zero()
        y = (init.alpha, init.alphadot, init.xbar, init.xbardot)

        def deriv(t, y):
            s = ErmakovState(t, y[0], y[1], y[2], y[3])
            add, xdd = measurement_rhs(s, params, drive)
            return (y[1], add, y[3], xdd)

        def record(t, y):
            s = ErmakovState(t, y[0], y[1], y[2], y[3])
            inv = els_invariant(s)
            rate = els_invariant_rate(s, params, drive)
            x_t = drive.value(t, s, params)
            return (t, y[0], y[1], y[2], y[3],
                    delta_from_alpha(y[0], params), inv, rate, x_t)
    else:
        raise ConfigurationError(f"unknown system kind {kind!r}")

    n_steps = int(round((t_end - init.t) / dt))
    t = init.t
    rows = [record(t, y)]
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n_steps):
        try:
            k1 = deriv(t, y)
            y2 = tuple(a + half * b for a, b in zip(y, k1))
            k2 = deriv(t + half, y2)
            y3 = tuple(a + half * b for a, b in zip(y, k2))
            k3 = deriv(t + half, y3)
            y4 = tuple(a + dt * b for a, b in zip(y, k3))
            k4 = deriv(t + dt, y4)
            y = tuple(a + sixth * (b1 + 2 * b2 + 2 * b3 + b4)
                      for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
            t = init.t + (i + 1) * dt
            if not all(math.isfinite(v) for v in y):
                raise InvalidStateError(f"non-finite state at t={t}")
            if (i + 1) % stride == 0 or i == n_steps - 1:
                rows.append(record(t, y))
        except (WidthCollapseError, InvalidStateError) as exc:
            partial = _package(kind, params, dt * stride, rows)
            raise TrajectoryAborted(f"integration aborted at t~{t}: {exc}",
                                    partial=partial) from exc
    return _package(kind, params, dt * stride, rows)
