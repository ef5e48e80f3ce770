"""One-dimensional comparison ODE in phase/amplitude form.

Solves the initial value problem

    (p-1)|w'|^(p-2) w'' = T(t) w'^(p-1) - lam * w^(p-1),
    w(a) = -1,  w'(a) = 0,

with drift T(t) = -(n-1)/t for finite a >= 0, or T = 0 for the
distinguished value a = INFINITY.  The integration is carried out in
phase/amplitude variables

    alpha*w = e*sin_p(phi),   w' = e*cos_p(phi),

with alpha = (lam/(p-1))**(1/p), which turn the second-order equation
into the first-order system

    phi' = alpha - T/(p-1) * cos_p(phi)^(p-1) * sin_p(phi),
    (log e)' = T/(p-1) * |cos_p(phi)|^p.

The module locates the first critical point b (phi = pi_p/2), the zero
t0 of w (phi = 0), and reports delta = b - a and the terminal maximum
m_max = w(b).  Internally every problem is rescaled to lam = p-1
(alpha = 1); results are mapped back through the exact scale covariance
t -> alpha*t of the equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ._util import as_scalar_or_array, spow
from .ptrig import PExponent, _pval, inv_sin_p, pi_p, sin_cos_p

__all__ = [
    "INFINITY",
    "PParams",
    "ModelProblem",
    "PrueferState",
    "ModelSolution",
    "solve_model",
    "delta",
    "m_max",
    "delta_scan",
    "integrate_phase",
]

INFINITY = math.inf

_DEFAULT_H0 = 1e-7  # first mesh point for the a = 0 start (normalized scale)


@dataclass(frozen=True)
class PParams:
    """Problem data (p, n_dim, lam) with the derived scale alpha.

    n_dim may be any real >= 1 (the comparison argument allows
    replacing the integer dimension by a real n' >= n).
    """

    p: float
    n_dim: float
    lam: float
    alpha: float = field(init=False)

    def __post_init__(self):
        pv = _pval(self.p)
        object.__setattr__(self, "p", pv)
        n = float(self.n_dim)
        if not math.isfinite(n) or n < 1.0:
            raise ValueError(f"n_dim must be a finite real >= 1, got {self.n_dim!r}")
        object.__setattr__(self, "n_dim", n)
        lam = float(self.lam)
        if not math.isfinite(lam) or lam <= 0.0:
            raise ValueError(f"lam must be finite and positive, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", (lam / (pv - 1.0)) ** (1.0 / pv))


@dataclass(frozen=True)
class ModelProblem:
    """A PParams instance plus the left endpoint a.

    a is a nonnegative real, or INFINITY to select the driftless T = 0
    equation (which has an exact closed-form solution).
    """

    params: PParams
    a: float

    def __post_init__(self):
        a = float(self.a)
        if math.isnan(a) or a < 0.0:
            raise ValueError(f"a must be >= 0 or INFINITY, got {self.a!r}")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class PrueferState:
    """A single phase/amplitude sample (t, phi, log_e)."""

    t: float
    phi: float
    log_e: float


class ModelSolution:
    """Solved model problem with dense evaluators.

    Attributes
    ----------
    problem : ModelProblem
    a_eff : float       left endpoint of the computed window
    b : float           first critical point of w after a
    t0 : float          unique zero of w in (a, b)
    delta : float       b - a (or the window length for T = 0)
    m_max : float       w(b), the terminal maximum
    trajectory : dict   arrays t, phi, e, w, wdot sampled along the orbit
    diagnostics : dict  solver metadata (nfev, start-step check, ...)

    Callable evaluators: w(t), wdot(t), phi(t), e(t), w_inverse(s).
    Instances are immutable by convention once constructed.
    """

    def __init__(
        self,
        problem: ModelProblem,
        a_eff: float,
        b: float,
        t0: float,
        m_max: float,
        phi_fn,
        log_e_fn,
        diagnostics: dict,
        n_samples: int = 600,
    ):
        self.problem = problem
        self.a_eff = float(a_eff)
        self.b = float(b)
        self.t0 = float(t0)
        self.delta = self.b - self.a_eff
        self.m_max = float(m_max)
        self._phi_fn = phi_fn
        self._log_e_fn = log_e_fn
        self.diagnostics = diagnostics
        ts = np.linspace(self.a_eff, self.b, n_samples)
        ts = np.unique(np.concatenate([ts, [self.t0]]))
        self.trajectory = {
            "t": ts,
            "phi": self.phi(ts),
            "e": self.e(ts),
            "w": self.w(ts),
            "wdot": self.wdot(ts),
        }

    # -- evaluators ------------------------------------------------------

    def phi(self, t):
        """Phase phi(t) with phi(a) = -pi_p/2, phi(t0) = 0, phi(b) = pi_p/2."""
        return self._phi_fn(t)

    def log_e(self, t):
        """log of the amplitude e(t) = (wdot^p + alpha^p w^p)^(1/p)."""
        return self._log_e_fn(t)

    def e(self, t):
        return np.exp(self._log_e_fn(t))

    def w(self, t):
        p = self.problem.params
        s, _ = sin_cos_p(self._phi_fn(t), p.p)
        return np.exp(self._log_e_fn(t)) * s / p.alpha

    def wdot(self, t):
        p = self.problem.params
        _, c = sin_cos_p(self._phi_fn(t), p.p)
        return np.exp(self._log_e_fn(t)) * c

    def phase_rate(self, t):
        """phi'(t) evaluated from the right-hand side of the phase equation."""
        p = self.problem.params
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        s, c = sin_cos_p(self._phi_fn(arr), p.p)
        if self.problem.a == INFINITY:
            tv = np.zeros_like(arr)
        else:
            tv = -(p.n_dim - 1.0) / arr
        out = p.alpha - tv / (p.p - 1.0) * spow(c, p.p - 1.0) * s
        return as_scalar_or_array(out[0] if scalar else out, scalar)

    def w_inverse(self, s):
        """Inverse of w on [a_eff, b], accepting s in [-1, m_max].

        Values outside the range (up to rounding) are clamped to the
        endpoints.
        """
        arr = np.asarray(s, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        lo, hi = self.a_eff, self.b
        w_lo = float(np.asarray(self.w(lo)))
        w_hi = float(np.asarray(self.w(hi)))
        out = np.empty_like(arr)
        for i, sv in enumerate(arr):
            if sv <= w_lo:
                out[i] = lo
            elif sv >= w_hi:
                out[i] = hi
            else:
                out[i] = brentq(
                    lambda t: float(self.w(t)) - sv, lo, hi, xtol=1e-13, rtol=1e-15
                )
        return as_scalar_or_array(out[0] if scalar else out, scalar)

    def initial_state(self) -> PrueferState:
        """Phase/amplitude data at the left endpoint."""
        p = self.problem.params
        return PrueferState(
            t=self.a_eff, phi=-0.5 * pi_p(p.p), log_e=math.log(p.alpha)
        )


def _phase_rhs(p: float, n: float):
    """Right-hand side of the normalized (alpha = 1) phase system."""

    def rhs(t, y):
        s, c = sin_cos_p(y[0], p)
        tv = -(n - 1.0) / t
        dphi = 1.0 - tv / (p - 1.0) * spow(c, p - 1.0) * s
        dl = tv * abs(c) ** p / (p - 1.0)
        return [dphi, dl]

    return rhs


def _solve_normalized(p, n, a_n, tol, rtol, atol, max_step, h0):
    """Integrate the normalized system from a_n to the first phi = pi_p/2.

    Returns (a_eff, b, t0, log_m, dense) in the normalized time scale.
    """
    hp = 0.5 * pi_p(p)
    rhs = _phase_rhs(p, n)

    if a_n > 0.0:
        t_start = a_n
        y0 = [-hp, 0.0]
    else:
        # The drift term is 0/0 at t = 0: freeze the first step at the
        # limiting rate phi'(0) = 1/n (normalized), starting from t = h0.
        t_start = h0
        y0 = [-hp + h0 / n, 0.0]

    def ev_zero(t, y):
        return y[0]

    ev_zero.direction = 1.0

    def ev_top(t, y):
        return y[0] - hp

    ev_top.terminal = True
    ev_top.direction = 1.0

    t_max = max(a_n, t_start) + 1.05 * n * 2.0 * hp + 1.0
    kwargs = dict(
        events=[ev_zero, ev_top],
        rtol=rtol,
        atol=atol,
        dense_output=True,
        method="RK45",
    )
    if max_step is not None:
        kwargs["max_step"] = max_step
    sol = solve_ivp(rhs, (t_start, t_max), y0, **kwargs)
    if len(sol.t_events[1]) == 0:
        raise RuntimeError(
            f"phase never reached pi_p/2 before t = {t_max:.3g} "
            f"(status {sol.status}: {sol.message})"
        )
    if len(sol.t_events[0]) == 0:
        raise RuntimeError("zero of w not located before the critical point")
    b_n = float(sol.t_events[1][0])
    t0_n = float(sol.t_events[0][0])
    log_m = float(sol.y_events[1][0][1])
    return t_start, b_n, t0_n, log_m, sol


def solve_model(
    prob: ModelProblem,
    tol: float = 1e-10,
    *,
    rtol: float = 1e-12,
    atol: float = 1e-13,
    max_step: float | None = None,
    n_samples: int = 600,
    check_start: bool = False,
    _normalize: bool = True,
) -> ModelSolution:
    """Solve the model problem and locate b, t0, delta, m_max.

    Parameters
    ----------
    prob : ModelProblem
    tol : event-location tolerance used by the solution validity checks
    rtol, atol : integrator step tolerances
    max_step : optional cap on the integrator step (original time scale)
    check_start : for a = 0, repeat the start with a halved first mesh
        point and record the induced shift of b in diagnostics
    _normalize : solve at lam = p-1 and rescale (default); disabling
        integrates at the requested lam directly, which exists so the
        scale covariance can be verified as a genuine property

    Raises RuntimeError if event localization fails.
    """
    pp = prob.params
    p, n, lam, alpha = pp.p, pp.n_dim, pp.lam, pp.alpha
    hp = 0.5 * pi_p(p)

    if prob.a == INFINITY:
        # T = 0: exact closed form w(t) = sin_p(alpha*t - pi_p/2) on a
        # canonical window [0, pi_p/alpha]; e is constant = alpha.
        b = 2.0 * hp / alpha

        def phi_fn(t):
            return alpha * np.asarray(t, dtype=float) - hp

        def log_e_fn(t):
            arr = np.asarray(t, dtype=float)
            return np.zeros_like(arr) + math.log(alpha)

        sol = ModelSolution(
            prob,
            a_eff=0.0,
            b=b,
            t0=hp / alpha,
            m_max=1.0,
            phi_fn=phi_fn,
            log_e_fn=log_e_fn,
            diagnostics={"closed_form": True},
            n_samples=n_samples,
        )
        # closed-form inverse is cheaper and exact; override the brentq one
        def w_inverse(s, _p=p, _alpha=alpha, _hp=hp):
            return (inv_sin_p(np.clip(s, -1.0, 1.0), _p) + _hp) / _alpha

        sol.w_inverse = w_inverse
        return sol

    if _normalize:
        scale = alpha  # normalized time is alpha * t
        lam_n = p - 1.0
    else:
        scale = 1.0
        lam_n = lam
    alpha_n = (lam_n / (p - 1.0)) ** (1.0 / p)
    a_n = prob.a * scale
    ms = None if max_step is None else max_step * scale
    h0 = _DEFAULT_H0

    if _normalize:
        a_eff_n, b_n, t0_n, log_m, dense = _solve_normalized(
            p, n, a_n, tol, rtol, atol, ms, h0
        )
    else:
        # direct solve at the requested lam: same code with time
        # rescaled on the fly through alpha_n
        a_eff_n, b_n, t0_n, log_m, dense = _solve_unscaled(
            p, n, a_n, lam_n, tol, rtol, atol, ms, h0
        )

    diagnostics = {
        "nfev": int(dense.nfev),
        "closed_form": False,
        "normalized": bool(_normalize),
    }
    if prob.a == 0.0 and check_start:
        _, b2, _, _, _ = (
            _solve_normalized(p, n, a_n, tol, rtol, atol, ms, h0 / 2.0)
            if _normalize
            else _solve_unscaled(p, n, a_n, lam_n, tol, rtol, atol, ms, h0 / 2.0)
        )
        diagnostics["start_halving_shift"] = abs(b2 - b_n) / scale if scale else abs(
            b2 - b_n
        )

    t_lo, t_hi = dense.t[0], dense.t[-1]

    def phi_fn(t, _d=dense, _s=scale, _lo=t_lo, _hi=t_hi):
        tt = np.clip(np.asarray(t, dtype=float) * _s, _lo, _hi)
        out = _d.sol(tt)[0]
        return as_scalar_or_array(out, np.asarray(t).ndim == 0)

    def log_e_fn(t, _d=dense, _s=scale, _lo=t_lo, _hi=t_hi, _la=math.log(alpha)):
        tt = np.clip(np.asarray(t, dtype=float) * _s, _lo, _hi)
        out = _d.sol(tt)[1] + _la
        return as_scalar_or_array(out, np.asarray(t).ndim == 0)

    a_eff = prob.a
    sol = ModelSolution(
        prob,
        a_eff=a_eff,
        b=b_n / scale,
        t0=t0_n / scale,
        m_max=math.exp(log_m),
        phi_fn=phi_fn,
        log_e_fn=log_e_fn,
        diagnostics=diagnostics,
        n_samples=n_samples,
    )
    # |wdot(b)| itself scales like (phase error)^(1/(p-1)), so the honest
    # terminal check is on the located phase
    phi_b = abs(float(sol.phi(sol.b)) - hp)
    if phi_b > max(tol, 1e-9) * max(1.0, abs(b_n)):
        raise RuntimeError(f"critical-phase location error {phi_b:.2e} exceeds tol")
    return sol


def _solve_unscaled(p, n, a_s, lam, tol, rtol, atol, max_step, h0):
    """Direct integration at a given lam (no internal normalization)."""
    hp = 0.5 * pi_p(p)
    alpha = (lam / (p - 1.0)) ** (1.0 / p)

    def rhs(t, y):
        s, c = sin_cos_p(y[0], p)
        tv = -(n - 1.0) / t
        dphi = alpha - tv / (p - 1.0) * spow(c, p - 1.0) * s
        dl = tv * abs(c) ** p / (p - 1.0)
        return [dphi, dl]

    if a_s > 0.0:
        t_start = a_s
        y0 = [-hp, 0.0]
    else:
        t_start = h0 / alpha
        y0 = [-hp + alpha * (h0 / alpha) / n, 0.0]

    def ev_zero(t, y):
        return y[0]

    ev_zero.direction = 1.0

    def ev_top(t, y):
        return y[0] - hp

    ev_top.terminal = True
    ev_top.direction = 1.0

    t_max = max(a_s, t_start) + 1.05 * n * 2.0 * hp / alpha + 1.0
    kwargs = dict(
        events=[ev_zero, ev_top], rtol=rtol, atol=atol, dense_output=True
    )
    if max_step is not None:
        kwargs["max_step"] = max_step
    sol = solve_ivp(rhs, (t_start, t_max), y0, **kwargs)
    if len(sol.t_events[1]) == 0 or len(sol.t_events[0]) == 0:
        raise RuntimeError("event localization failed in direct solve")
    return (
        t_start,
        float(sol.t_events[1][0]),
        float(sol.t_events[0][0]),
        float(sol.y_events[1][0][1]),
        sol,
    )


def delta(a, params: PParams, tol: float = 1e-10) -> float:
    """The gap b(a) - a; equals pi_p/alpha exactly for a = INFINITY."""
    if a == INFINITY:
        return pi_p(params.p) / params.alpha
    return solve_model(ModelProblem(params, a), tol).delta


def m_max(a, params: PParams, tol: float = 1e-10) -> float:
    """Terminal maximum w(b(a)); equals 1 for a = INFINITY."""
    if a == INFINITY:
        return 1.0
    return solve_model(ModelProblem(params, a), tol).m_max


def delta_scan(a_grid, params: PParams, tol: float = 1e-10):
    """One row per a value: dict(a, delta, m_max, t0, b, status).

    Rows are produced in input order; a failing row carries its error
    message in 'status' and the scan continues.
    """
    rows = []
    for a in a_grid:
        try:
            if a == INFINITY:
                sol = solve_model(ModelProblem(params, INFINITY), tol)
            else:
                sol = solve_model(ModelProblem(params, float(a)), tol)
            rows.append(
                {
                    "a": float(a),
                    "delta": sol.delta,
                    "m_max": sol.m_max,
                    "t0": sol.t0,
                    "b": sol.b,
                    "status": "ok",
                }
            )
        except Exception as exc:  # per-row marker, scan continues
            rows.append(
                {
                    "a": float(a),
                    "delta": math.nan,
                    "m_max": math.nan,
                    "t0": math.nan,
                    "b": math.nan,
                    "status": f"error: {exc}",
                }
            )
    return rows


def integrate_phase(
    prob: ModelProblem, phi_target: float, tol: float = 1e-10, rtol: float = 1e-12
) -> float:
    """Continue the phase past b until phi reaches phi_target.

    The phase is monotone increasing, so the orbit crosses each odd
    multiple of pi_p/2 (where the right-hand side loses smoothness)
    exactly once; integration restarts at every crossing so each
    segment sees a smooth field.  Returns the time of first arrival at
    phi_target, in the original scale.
    """
    pp = prob.params
    p, n = pp.p, pp.n_dim
    hp = 0.5 * pi_p(p)
    if prob.a == INFINITY:
        return (phi_target + hp) / pp.alpha
    rhs = _phase_rhs(p, n)
    a_n = prob.a * pp.alpha
    h0 = _DEFAULT_H0
    if a_n > 0.0:
        t, y = a_n, [-hp, 0.0]
    else:
        t, y = h0, [-hp + h0 / n, 0.0]

    target = float(phi_target)
    if target <= y[0]:
        raise ValueError("phi_target must exceed the initial phase -pi_p/2")
    for _ in range(1000):
        k = math.floor((y[0] + hp) / (2.0 * hp))
        next_kink = (2 * k + 1) * hp
        stop = min(next_kink, target)

        def ev_stop(tt, yy, _s=stop):
            return yy[0] - _s

        ev_stop.terminal = True
        ev_stop.direction = 1.0
        span = 1.05 * n * (stop - y[0]) + 1.0
        sol = solve_ivp(
            rhs, (t, t + span), y, events=[ev_stop], rtol=rtol, atol=1e-13
        )
        if len(sol.t_events[0]) == 0:
            raise RuntimeError("phase continuation failed to reach its target")
        t = float(sol.t_events[0][0])
        y = [float(v) for v in sol.y_events[0][0]]
        y[0] = stop  # land exactly on the kink / target
        if stop >= target:
            return t / pp.alpha
    raise RuntimeError("phase continuation exceeded the segment limit")
