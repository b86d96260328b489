"""Time integration of planar fields, with deck-transition wrapping.

A single stepping engine drives three entry points: integrate (trajectory
with boundary crossing events), step_dense (one dense step, no domain) and
integrate_variational (position plus the 2x2 fundamental matrix, composing
segment pushforwards at crossings).

Boundary crossings are located by bisection on the step size to 1e-12 in the
signed boundary distance, then the exit point is carried through the segment
transition and integration continues with the field re-evaluated at the
mapped point.  A crossing that lands at a cusp marker ends the trajectory
("cusp-hit"): for fields built with cusp vanishing these are equilibria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .geometry import reduce_to_domain

__all__ = [
    "IntegratorConfig",
    "State",
    "CrossingEvent",
    "Trajectory",
    "IntegrationError",
    "StepLimitError",
    "NonFiniteError",
    "integrate",
    "step_dense",
    "integrate_variational",
]


class IntegrationError(RuntimeError):
    pass


class StepLimitError(IntegrationError):
    pass


class NonFiniteError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepper settings.  rk45 (Dormand-Prince) is the default scheme;
    fixed-step rk4 is kept for convergence-order work."""

    scheme: str = "rk45"
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.05
    max_steps: int = 2_000_000
    cusp_tol: float = 1e-9

    def __post_init__(self):
        if self.scheme not in ("rk4", "rk45"):
            raise ValueError(f"scheme must be rk4 or rk45, got {self.scheme!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class State:
    x: float
    y: float
    t: float = 0.0

    @property
    def point(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    segment: int           # 1-based index of the segment exited through
    direction: int         # +1: outward (the only kind recorded)
    word: tuple            # accumulated deck word including this letter
    point_exit: tuple      # where the trajectory met the boundary
    point_entry: tuple     # image under the transition


@dataclass
class Trajectory:
    samples: list = dfield(default_factory=list)  # (t, x, y) tuples
    events: list = dfield(default_factory=list)
    status: str = "ok"  # or "cusp-hit"

    @property
    def word(self):
        return tuple(e.segment for e in self.events)

    @property
    def final(self):
        t, x, y = self.samples[-1]
        return State(x, y, t)

    @property
    def times(self):
        return np.array([s[0] for s in self.samples])

    @property
    def points(self):
        return np.array([(s[1], s[2]) for s in self.samples])


def _rhs_of(field):
    """Accept a VectorField-like object or a bare callable f(x, y, t)."""
    if hasattr(field, "eval"):
        return field.eval
    return field


def _jac_of(field):
    if hasattr(field, "jacobian_eval"):
        return field.jacobian_eval
    raise TypeError(
        "variational integration needs a field with jacobian_eval(x, y, t)"
    )


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
)


def _rk4_step(rhs, t, u, h):
    k1 = rhs(t, u)
    k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2)
    k4 = rhs(t + h, u + h * k3)
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), None


def _dp45_step(rhs, t, u, h):
    """One Dormand-Prince step; returns (u5, error_vector)."""
    ks = []
    for i in range(7):
        ui = u.copy()
        for j, a in enumerate(_DP_A[i]):
            if a != 0.0:
                ui = ui + (h * a) * ks[j]
        ks.append(rhs(t + _DP_C[i] * h, ui))
    u5 = u.copy()
    err = np.zeros_like(u)
    for i in range(7):
        if _DP_B5[i] != 0.0:
            u5 = u5 + (h * _DP_B5[i]) * ks[i]
        db = _DP_B5[i] - _DP_B4[i]
        if db != 0.0:
            err = err + (h * db) * ks[i]
    return u5, err


def _error_norm(err, u_old, u_new, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(u_old), np.abs(u_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


class _Engine:
    """Shared stepping machinery for all three entry points."""

    def __init__(self, field, cfg, dom=None, variational=False):
        self.cfg = cfg
        self.dom = dom
        self.variational = variational
        f = _rhs_of(field)
        if variational:
            jac = _jac_of(field)

            def rhs(t, u):
                fx, fy = f(u[0], u[1], t)
                (axx, axy), (ayx, ayy) = jac(u[0], u[1], t)
                return np.array(
                    [
                        fx,
                        fy,
                        axx * u[2] + axy * u[4],
                        axx * u[3] + axy * u[5],
                        ayx * u[2] + ayy * u[4],
                        ayx * u[3] + ayy * u[5],
                    ]
                )

        else:

            def rhs(t, u):
                fx, fy = f(u[0], u[1], t)
                return np.array([fx, fy])

        self.rhs = rhs
        self.speed = lambda t, u: math.hypot(*f(u[0], u[1], t))
        self.step_once = _rk4_step if cfg.scheme == "rk4" else _dp45_step
        if dom is not None:
            self.geo_cap_len = 0.5 * dom.min_segment_length()

    def max_h(self, t, u, remaining):
        h = min(self.cfg.max_step, remaining)
        if self.dom is not None:
            v = self.speed(t, u)
            if v > 0.0:
                h = min(h, self.geo_cap_len / v)
        return h

    def attempt(self, t, u, h):
        """Take one step; adapt h for rk45.  Returns (u_new, h_used, h_next)."""
        cfg = self.cfg
        if cfg.scheme == "rk4":
            u_new, _ = _rk4_step(self.rhs, t, u, h)
            return u_new, h, h
        h_try = h
        for _ in range(60):
            u_new, err = _dp45_step(self.rhs, t, u, h_try)
            norm = _error_norm(err, u, u_new, cfg.rel_tol, cfg.abs_tol)
            if norm <= 1.0 or h_try <= 1e-14 * max(1.0, abs(t)):
                if norm > 0.0:
                    factor = min(5.0, max(0.2, 0.9 * norm ** -0.2))
                else:
                    factor = 5.0
                return u_new, h_try, h_try * factor
            h_try *= min(0.9, max(0.2, 0.9 * norm ** -0.2))
        raise StepLimitError(f"step size underflow at t={t}")

    def wrap_crossing(self, t, u, h, u_out, on_sample):
        """Resolve a step that left the rectangle.

        Bisects the step size until the crossing point is within 1e-12 of the
        boundary, applies the transition, and returns the continuation state
        (or None for a cusp hit).
        """
        dom = self.dom
        lo, hi = 0.0, h
        u_lo, u_hi = u, u_out
        for _ in range(200):
            viol_hi = dom.boundary_violation((u_hi[0], u_hi[1]))
            if viol_hi <= 1e-12 or hi - lo <= 1e-16 * max(1.0, abs(t)):
                break
            mid = 0.5 * (lo + hi)
            u_mid, _ = self.step_once(self.rhs, t, u, mid)
            if dom.boundary_violation((u_mid[0], u_mid[1])) > 0.0:
                hi, u_hi = mid, u_mid
            else:
                lo, u_lo = mid, u_mid
        t_cross = t + hi
        u_cross = u_hi
        exit_pt = (u_cross[0], u_cross[1])
        dist, _cusp = dom.nearest_cusp(exit_pt)
        if dist < self.cfg.cusp_tol:
            return None, t_cross, u_cross, None
        wrapped, letters = reduce_to_domain(exit_pt, dom)
        u_next = u_cross.copy()
        u_next[0], u_next[1] = wrapped
        if self.variational:
            m = dom.word_matrix(letters)
            j = u_cross[2:].reshape(2, 2)
            u_next[2:] = (m @ j).ravel()
        return letters, t_cross, u_next, exit_pt

    def run(self, u0, t0, t_end, record=None):
        """March from t0 to t_end.  record(t, u) is called on accepted states.

        Returns (t, u, events, status).
        """
        cfg = self.cfg
        dom = self.dom
        t = t0
        u = u0.copy()
        events = []
        word = []
        status = "ok"
        h_next = self.max_h(t, u, t_end - t0)
        steps = 0
        while t < t_end - 1e-14 * max(1.0, abs(t_end)):
            steps += 1
            if steps > cfg.max_steps:
                raise StepLimitError(
                    f"exceeded max_steps={cfg.max_steps} at t={t}"
                )
            h = min(h_next, self.max_h(t, u, t_end - t))
            u_new, h_used, h_next = self.attempt(t, u, h)
            if not np.all(np.isfinite(u_new)):
                raise NonFiniteError(f"non-finite state at t={t + h_used}")
            if dom is None or dom.boundary_violation(
                (u_new[0], u_new[1])
            ) <= 0.0:
                t += h_used
                u = u_new
                if record is not None:
                    record(t, u)
                continue
            # crossing inside this step
            letters, t_cross, u_next, exit_pt = self.wrap_crossing(
                t, u, h_used, u_new, record
            )
            if letters is None:
                t = t_cross
                u = u_next
                if record is not None:
                    record(t, u)
                status = "cusp-hit"
                break
            if t_cross <= t + 1e-15 * max(1.0, abs(t)):
                # stalled exactly on the boundary: wrap in place
                t_cross = t
            word.extend(letters)
            for letter in letters:
                events.append(
                    CrossingEvent(
                        time=t_cross,
                        segment=letter,
                        direction=1,
                        word=tuple(word),
                        point_exit=exit_pt,
                        point_entry=(u_next[0], u_next[1]),
                    )
                )
            if t_cross > t and record is not None:
                record(t_cross, u_next)
            t = t_cross
            u = u_next
        return t, u, events, status


def integrate(field, s0, t_end, dom=None, cfg=None):
    """Integrate from state s0 up to time t_end.

    With a domain, exits through boundary segments are wrapped by the segment
    transitions and recorded as crossing events; the trajectory ends early
    with status "cusp-hit" if a crossing lands on a cusp marker.
    """
    cfg = cfg or IntegratorConfig()
    if t_end <= s0.t:
        raise ValueError(f"t_end={t_end} must exceed start time {s0.t}")
    if dom is not None and dom.boundary_violation((s0.x, s0.y)) > 1e-12:
        raise ValueError(f"start point {(s0.x, s0.y)} outside the domain")
    eng = _Engine(field, cfg, dom=dom)
    traj = Trajectory()
    traj.samples.append((s0.t, s0.x, s0.y))

    def record(t, u):
        traj.samples.append((t, float(u[0]), float(u[1])))

    u0 = np.array([s0.x, s0.y], dtype=float)
    _, _, events, status = eng.run(u0, s0.t, t_end, record=record)
    traj.events = events
    traj.status = status
    return traj


def step_dense(field, s, dt, cfg=None):
    """Advance by dt with no domain logic.

    rk4 takes a single step of size dt; rk45 integrates [t, t+dt]
    adaptively.  Used by root finding and variational code.
    """
    cfg = cfg or IntegratorConfig()
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    eng = _Engine(field, cfg)
    u = np.array([s.x, s.y], dtype=float)
    if cfg.scheme == "rk4":
        u_new, _ = _rk4_step(eng.rhs, s.t, u, dt)
        if not np.all(np.isfinite(u_new)):
            raise NonFiniteError(f"non-finite state after step from t={s.t}")
        return State(float(u_new[0]), float(u_new[1]), s.t + dt)
    _, u_end, _, _ = eng.run(u, s.t, s.t + dt)
    return State(float(u_end[0]), float(u_end[1]), s.t + dt)


def integrate_variational(field, s0, t_end, dom=None, cfg=None):
    """Flow s0 to t_end carrying the 2x2 fundamental matrix.

    The matrix evolves by Jdot = A(t) J with A the field's spatial Jacobian
    along the trajectory, and is pushed forward by the segment transition's
    linear part at every crossing.  Returns (final_state, J, word, status).
    """
    cfg = cfg or IntegratorConfig()
    eng = _Engine(field, cfg, dom=dom, variational=True)
    u0 = np.array([s0.x, s0.y, 1.0, 0.0, 0.0, 1.0], dtype=float)
    t, u, events, status = eng.run(u0, s0.t, t_end)
    state = State(float(u[0]), float(u[1]), t)
    jac = u[2:].reshape(2, 2).copy()
    word = tuple(e.segment for e in events)
    return state, jac, word, status
