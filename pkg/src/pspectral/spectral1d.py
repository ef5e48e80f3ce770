"""Discrete spectral-gap solvers on weighted one-dimensional domains.

Domains: a circle of given circumference (periodic, uniform weights), a
segment (uniform interior weights, trapezoid-halved endpoints), and a
radial ball model on [0, R] with measure weight t^(n-1) (trapezoid).

The first nontrivial eigenvalue of the p-Laplacian is computed two ways:

* solve_eigen_variational: minimizes the discrete Rayleigh quotient
  sum(cell_w |Du|^p) / sum(w |u|^p) over the zero-p-mean constraint set
  by projected, weight-preconditioned, normalized subgradient descent
  with backtracking line search, warm-started through a coarse-to-fine
  mesh hierarchy;
* solve_eigen_shooting (radial only): solves the phase-form comparison
  ODE once at lam = p-1, then rescales by the exact scale covariance
  lam(R) = (p-1) (b1/R)^p and samples the profile onto the mesh.

Also provided: a cell-level gradient-bound check of a discrete
eigenfunction against a matched comparison profile, the normalized
mass-ratio profile E(s) with a monotonicity verdict, and a table of
closed-form lower bounds for the gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ._util import spow
from .model1d import ModelProblem, ModelSolution, PParams, solve_model
from .ptrig import pi_p, sin_p

__all__ = [
    "Domain1D",
    "DiscreteFunction",
    "EigenResult",
    "SolverOptions",
    "build_domain",
    "rayleigh_quotient",
    "solve_eigen_variational",
    "solve_eigen_shooting",
    "gradient_comparison_check",
    "E_profile",
    "bounds_table",
]

_KINDS = ("circle", "segment", "radial")


@dataclass(frozen=True)
class Domain1D:
    """A uniform 1-d mesh with a node measure and cell (midpoint) measure.

    weights: per-node quadrature weights of the domain measure (zero at
    t = 0 on radial domains with n > 1).  cell_weights: per-cell weights
    used by the energy numerator, evaluated at cell midpoints.
    """

    kind: str
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    cell_weights: np.ndarray
    spacing: float
    length: float
    n_weight: float = 1.0

    @property
    def periodic(self) -> bool:
        return self.kind == "circle"

    def diff(self, values: np.ndarray) -> np.ndarray:
        """Forward difference per cell (periodic wrap on circles)."""
        if self.periodic:
            return (np.roll(values, -1) - values) / self.spacing
        return np.diff(values) / self.spacing

    def diff_adjoint(self, q: np.ndarray) -> np.ndarray:
        """Adjoint of diff against the plain (unweighted) node sum."""
        if self.periodic:
            return (np.roll(q, 1) - q) / self.spacing
        out = np.zeros(self.N)
        out[:-1] -= q / self.spacing
        out[1:] += q / self.spacing
        return out


@dataclass(frozen=True)
class DiscreteFunction:
    domain: Domain1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.domain.N,):
            raise ValueError(
                f"values must have shape ({self.domain.N},), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class EigenResult:
    """First-nontrivial-eigenvalue estimate with its eigenfunction.

    u is normalized to zero p-mean, and rescaled so min u = -1;
    normalization records the scale factor and the p-mean shift that
    produced it.  residual is the larger of the p-mean defect and the
    relative mismatch between lam and the Rayleigh quotient of u.
    """

    lam: float
    u: DiscreteFunction
    p: float
    method: str
    iterations: int
    residual: float
    normalization: dict
    converged: bool
    diagnostics: dict = dc_field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class SolverOptions:
    """Options for the variational backend.

    The descent stops on a relative Rayleigh-quotient stall below tol
    lasting stall_window accepted steps, on step collapse, or at the
    iteration caps (coarsest / intermediate / finest hierarchy level).
    """

    tol: float = 1e-10
    stall_window: int = 50
    max_iter: int = 1_000_000
    level_caps: tuple = (10_000, 5_000, 6_000)
    coarsest: int = 33
    seed: int = 0
    step0: float = 1.0
    hierarchical: bool = True
    noise: float = 0.01


def build_domain(kind: str, N: int, *, L: float | None = None,
                 x0: float = 0.0, x1: float = 1.0,
                 R: float | None = None, n: float | None = None) -> Domain1D:
    """Build a uniform mesh: circle(L), segment(x0, x1), radial(R, n)."""
    N = int(N)
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if N < 16:
        raise ValueError("N must be at least 16")
    if kind == "circle":
        if L is None or not (L > 0.0 and np.isfinite(L)):
            raise ValueError("circle needs a positive circumference L")
        h = L / N
        nodes = np.arange(N) * h
        w = np.full(N, h)
        cw = np.full(N, h)
        return Domain1D(kind, N, nodes, w, cw, h, float(L))
    if kind == "segment":
        if not (np.isfinite(x0) and np.isfinite(x1) and x1 > x0):
            raise ValueError("segment needs finite x1 > x0")
        length = x1 - x0
        h = length / (N - 1)
        nodes = np.linspace(x0, x1, N)
        w = np.full(N, h)
        w[0] *= 0.5
        w[-1] *= 0.5
        cw = np.full(N - 1, h)
        return Domain1D(kind, N, nodes, w, cw, h, float(length))
    if R is None or not (R > 0.0 and np.isfinite(R)):
        raise ValueError("radial needs a positive outer radius R")
    if n is None or not (n >= 1.0 and np.isfinite(n)):
        raise ValueError("radial needs a weight dimension n >= 1")
    h = R / (N - 1)
    nodes = np.linspace(0.0, R, N)
    w = nodes ** (n - 1.0) * h
    w[0] *= 0.5
    w[-1] *= 0.5
    cw = ((nodes[:-1] + nodes[1:]) / 2.0) ** (n - 1.0) * h
    return Domain1D(kind, N, nodes, w, cw, h, float(R), float(n))


def _pmean_shift(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """The unique c with sum(weights * spow(values - c, p-1)) = 0.

    The map is strictly decreasing in c, so bisection always converges;
    for p >= 2 a Newton step (the derivative exists) accelerates it.
    """
    lo = float(values.min())
    hi = float(values.max())
    if hi - lo < 1e-300:
        return lo

    def g(c):
        return float(np.dot(weights, spow(values - c, p - 1.0)))

    c = 0.5 * (lo + hi)
    for _ in range(200):
        gc = g(c)
        if gc > 0.0:
            lo = c
        else:
            hi = c
        nxt = None
        if p >= 2.0:
            dg = -(p - 1.0) * float(
                np.dot(weights, np.abs(values - c) ** (p - 2.0))
            )
            if dg != 0.0 and np.isfinite(dg):
                cand = c - gc / dg
                if lo < cand < hi:
                    nxt = cand
        c = nxt if nxt is not None else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, abs(hi) + abs(lo)):
            break
    return c


def _project(dom: Domain1D, values: np.ndarray, p: float):
    """Shift to zero p-mean, then scale to unit weighted p-norm."""
    c = _pmean_shift(values, dom.weights, p)
    v = values - c
    nrm = float(np.dot(dom.weights, np.abs(v) ** p)) ** (1.0 / p)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("function is identically zero after the p-mean shift")
    return v / nrm, c


def rayleigh_quotient(u: DiscreteFunction, p: float) -> float:
    """sum(cell_w |Du|^p) / sum(w |u|^p) after the zero-p-mean shift."""
    if not p > 1.0:
        raise ValueError("p must exceed 1")
    dom = u.domain
    v, _ = _project(dom, u.values, p)
    dv = dom.diff(v)
    num = float(np.dot(dom.cell_weights, np.abs(dv) ** p))
    den = float(np.dot(dom.weights, np.abs(v) ** p))
    return num / den


def _rq_raw(dom: Domain1D, v: np.ndarray, p: float) -> float:
    dv = dom.diff(v)
    num = float(np.dot(dom.cell_weights, np.abs(dv) ** p))
    den = float(np.dot(dom.weights, np.abs(v) ** p))
    return num / den


def _descend(dom: Domain1D, v: np.ndarray, p: float, opts: SolverOptions,
             cap: int):
    """Projected preconditioned subgradient descent on one mesh level.

    Returns (values, rq, iterations, stopped_by) with stopped_by one of
    "stall", "step_collapse", "gradient_zero", "cap".
    """
    v, _ = _project(dom, v, p)
    lam = _rq_raw(dom, v, p)
    precond = np.maximum(dom.weights, 1e-3 * dom.weights.mean())
    step = opts.step0
    stall = 0
    it = 0
    stopped = "cap"
    while it < cap:
        it += 1
        dv = dom.diff(v)
        # subgradient of the energy: zero element at cell kinks (Du = 0)
        q = dom.cell_weights * spow(dv, p - 1.0) * p
        grad = dom.diff_adjoint(q) - lam * p * dom.weights * spow(v, p - 1.0)
        grad = grad / precond
        gn = float(np.linalg.norm(grad))
        if gn < 1e-18:
            stopped = "gradient_zero"
            break
        grad /= gn
        improved = False
        while step > 1e-15:
            v2, _ = _project(dom, v - step * grad, p)
            lam2 = _rq_raw(dom, v2, p)
            if lam2 < lam:
                improved = True
                break
            step *= 0.5
        if not improved:
            stopped = "step_collapse"
            break
        rel = (lam - lam2) / max(abs(lam), 1e-300)
        v, lam = v2, lam2
        step *= 1.3
        stall = stall + 1 if rel < opts.tol else 0
        if stall >= opts.stall_window:
            stopped = "stall"
            break
    return v, lam, it, stopped


def _coarse_chain(N: int, coarsest: int) -> list:
    out = [N]
    while out[-1] > 2 * coarsest:
        out.append((out[-1] + 1) // 2)
    return out[::-1]


def _subdomain(dom: Domain1D, N: int) -> Domain1D:
    if dom.kind == "circle":
        return build_domain("circle", N, L=dom.length)
    if dom.kind == "segment":
        x0 = float(dom.nodes[0])
        return build_domain("segment", N, x0=x0, x1=x0 + dom.length)
    return build_domain("radial", N, R=dom.length, n=dom.n_weight)


def _prolong(coarse: Domain1D, fine: Domain1D, v: np.ndarray) -> np.ndarray:
    if coarse.periodic:
        xs = np.concatenate([coarse.nodes, [coarse.nodes[-1] + coarse.spacing]])
        vs = np.concatenate([v, [v[0]]])
        return np.interp(fine.nodes, xs, vs)
    return np.interp(fine.nodes, coarse.nodes, v)


def _initial_guess(dom: Domain1D, p: float, rng) -> np.ndarray:
    hp = pi_p(p) / 2.0
    span = dom.nodes - dom.nodes[0]
    periods = 2.0 if dom.periodic else 1.0
    v = sin_p(periods * 2.0 * hp * span / dom.length - hp, p)
    return v + 0.01 * rng.standard_normal(dom.N)


def _finalize(dom: Domain1D, v: np.ndarray, p: float, lam: float,
              method: str, iterations: int, converged: bool,
              diagnostics: dict) -> EigenResult:
    v, c = _project(dom, v, p)
    scale = -1.0 / float(v.min())
    v = v * scale
    u = DiscreteFunction(dom, v)
    pmean = abs(float(np.dot(dom.weights, spow(v, p - 1.0))))
    pnorm = float(np.dot(dom.weights, np.abs(v) ** p))
    rq = rayleigh_quotient(u, p)
    residual = max(pmean / pnorm, abs(rq - lam) / max(abs(lam), 1e-300))
    return EigenResult(
        lam=float(lam),
        u=u,
        p=float(p),
        method=method,
        iterations=int(iterations),
        residual=float(residual),
        normalization={"scale": float(scale), "shift": float(c)},
        converged=bool(converged),
        diagnostics=diagnostics,
    )


def solve_eigen_variational(domain: Domain1D, p: float,
                            opts: SolverOptions | None = None) -> EigenResult:
    """Minimize the Rayleigh quotient over the zero-p-mean set."""
    if not (p > 1.0 and np.isfinite(p)):
        raise ValueError("p must be finite and exceed 1")
    opts = opts or SolverOptions()
    rng = np.random.default_rng(opts.seed)
    chain = (_coarse_chain(domain.N, opts.coarsest)
             if opts.hierarchical else [domain.N])
    level_info = []
    total = 0
    prev = None
    v = None
    lam = np.inf
    stopped = "cap"
    for i, Ni in enumerate(chain):
        dom = _subdomain(domain, Ni) if Ni != domain.N else domain
        if i == 0:
            v = _initial_guess(dom, p, rng)
        else:
            v = _prolong(prev, dom, v)
        if i == 0:
            cap = opts.level_caps[0]
        elif Ni < domain.N:
            cap = opts.level_caps[1]
        else:
            cap = opts.level_caps[2]
        cap = min(cap, opts.max_iter - total)
        v, lam, it, stopped = _descend(dom, v, p, opts, cap)
        total += it
        level_info.append({"N": Ni, "iterations": it, "rq": lam,
                           "stopped_by": stopped})
        prev = dom
    converged = stopped in ("stall", "step_collapse", "gradient_zero")
    return _finalize(domain, v, p, lam, "variational", total, converged,
                     {"levels": level_info, "options": opts})


def solve_eigen_shooting(domain: Domain1D, p: float,
                         tol: float = 1e-10) -> EigenResult:
    """Radial backend: one phase-form solve at lam = p-1, rescaled by
    lam(R) = (p-1) (b1/R)^p, with the profile sampled onto the mesh."""
    if domain.kind != "radial":
        raise ValueError("shooting backend requires a radial domain")
    if not (p > 1.0 and np.isfinite(p)):
        raise ValueError("p must be finite and exceed 1")
    prob = ModelProblem(PParams(p=p, n_dim=domain.n_weight, lam=p - 1.0), a=0.0)
    sol = solve_model(prob, tol=tol)
    b1 = sol.b
    R = domain.length
    lam = (p - 1.0) * (b1 / R) ** p
    v = np.asarray(sol.w(domain.nodes * (b1 / R)), dtype=float)
    return _finalize(
        domain, v, p, lam, "shooting", 0, True,
        {"b1": b1, "t0_scaled": sol.t0 * R / b1, "m_max": sol.m_max,
         "model_tol": tol},
    )


def _matched_model(res: EigenResult, sol: ModelSolution):
    """Validate that the comparison profile matches the eigen-estimate."""
    if sol.problem.params.p != res.p:
        raise ValueError(
            f"exponent mismatch: result p = {res.p}, profile p = "
            f"{sol.problem.params.p}"
        )
    lam_m = sol.problem.params.lam
    if abs(lam_m - res.lam) > 1e-6 * max(1.0, abs(res.lam)):
        raise ValueError(
            f"eigenvalue mismatch: result {res.lam!r}, profile {lam_m!r}"
        )


def _coverage_clip(res: EigenResult, sol: ModelSolution, slack: float):
    u = res.u.values
    m = sol.m_max
    umin = float(u.min())
    umax = float(u.max())
    if umin < -1.0 - slack or umax > m + slack:
        raise ValueError(
            f"range [{umin:.6f}, {umax:.6f}] is not covered by the profile "
            f"range [-1, {m:.6f}] (allowed slack {slack:.2e})"
        )
    eps = 1e-13
    return np.clip(u, -1.0 + eps, m - eps)


def gradient_comparison_check(res: EigenResult, sol: ModelSolution,
                              tol: float = 5.0) -> dict:
    """Cell-level check |Du| <= max over the cell of wdot(w^-1(u)).

    The forward difference is an average of the gradient over the cell,
    so it is compared against the largest profile bound attained at the
    cell's endpoints and midpoint.  Violations are reported in the
    normalized frame (lengths scaled by alpha = (lam/(p-1))^(1/p)), and
    the check passes iff max_violation_normalized <= tol * alpha * h.
    """
    _matched_model(res, sol)
    dom = res.u.domain
    alpha = sol.problem.params.alpha
    h_norm = alpha * dom.spacing
    uc = _coverage_clip(res, sol, slack=max(1e-9, h_norm))
    du = dom.diff(uc)
    # profile bound at nodes and at cell midpoints
    mids = (uc + np.roll(uc, -1)) / 2.0 if dom.periodic else (uc[:-1] + uc[1:]) / 2.0
    m = sol.m_max
    eps = 1e-13
    mids = np.clip(mids, -1.0 + eps, m - eps)
    bnd_nodes = np.asarray(sol.wdot(sol.w_inverse(uc)), dtype=float)
    bnd_mids = np.asarray(sol.wdot(sol.w_inverse(mids)), dtype=float)
    if dom.periodic:
        bound = np.maximum(np.maximum(bnd_nodes, np.roll(bnd_nodes, -1)),
                           bnd_mids)
    else:
        bound = np.maximum(np.maximum(bnd_nodes[:-1], bnd_nodes[1:]),
                           bnd_mids)
    viol = np.abs(du) - bound
    worst = int(np.argmax(viol))
    max_v = float(viol[worst])
    allowed = tol * h_norm
    return {
        "max_violation": max_v,
        "max_violation_normalized": max_v / alpha,
        "allowed_normalized": allowed,
        "h_normalized": h_norm,
        "alpha": alpha,
        "worst_cell": worst,
        "worst_x": float(dom.nodes[worst]),
        "n_cells": int(len(du)),
        "tol": float(tol),
        "passed": bool(max_v / alpha <= allowed),
    }


def E_profile(res: EigenResult, sol: ModelSolution, n_s: int = 400,
              trim: float = 0.2, mono_tol: float | None = None,
              node_weights: np.ndarray | None = None) -> dict:
    """Mass-ratio profile E(s) of the discrete eigenfunction.

    Pushes the node measure forward under g = w^-1(u) and compares its
    signed profile mass with the profile's own measure t^(n-1) dt:

        E(s) = sum_{g_i <= s} w_i u_i^(p-1)
               / integral_a^s w(t)^(p-1) t^(n-1) dt.

    Samples with denominator below trim * max|denominator| are dropped
    (both integrals vanish at the window ends).  The verdict demands E
    nondecreasing before the profile's zero t0 and nonincreasing after,
    within mono_tol (default 10 * alpha * h * median|E|).  node_weights
    overrides the pushed-forward measure (negative controls).
    """
    _matched_model(res, sol)
    dom = res.u.domain
    params = sol.problem.params
    alpha = params.alpha
    h_norm = alpha * dom.spacing
    uc = _coverage_clip(res, sol, slack=max(1e-9, h_norm))
    g = np.asarray(sol.w_inverse(uc), dtype=float)
    weights = dom.weights if node_weights is None else np.asarray(node_weights,
                                                                  dtype=float)
    if weights.shape != (dom.N,):
        raise ValueError("node_weights must have one entry per node")
    order = np.argsort(g)
    gs = g[order]
    num_cum = np.cumsum(weights[order] * spow(uc[order], params.p - 1.0))

    lo = sol.a_eff + max(1e-9, 1e-9 * sol.delta)
    tg = np.linspace(lo, sol.b, 4001)
    integ = spow(np.asarray(sol.w(tg)), params.p - 1.0) * tg ** (params.n_dim - 1.0)
    den_cum = np.concatenate(
        [[0.0], np.cumsum((integ[1:] + integ[:-1]) / 2.0 * np.diff(tg))]
    )
    dmax = float(np.max(np.abs(den_cum)))

    svals = np.linspace(gs[2], gs[-2], n_s)
    dens = np.interp(svals, tg, den_cum)
    keep = np.abs(dens) >= trim * dmax
    s_kept = svals[keep]
    nums = num_cum[np.searchsorted(gs, s_kept, side="right") - 1]
    E = nums / dens[keep]

    med = float(np.median(E))
    scale = max(abs(med), 1e-300)
    spread = float(np.max(np.abs(E / med - 1.0))) if len(E) else np.nan
    if mono_tol is None:
        mono_tol = 10.0 * h_norm * abs(med)
    t0 = sol.t0
    left = E[s_kept <= t0]
    right = E[s_kept >= t0]
    incr_defect = float(np.max(np.maximum(0.0, -np.diff(left)))) if len(left) > 1 else 0.0
    decr_defect = float(np.max(np.maximum(0.0, np.diff(right)))) if len(right) > 1 else 0.0
    incr_ok = incr_defect <= mono_tol
    decr_ok = decr_defect <= mono_tol
    return {
        "s": s_kept,
        "E": E,
        "t0": t0,
        "median": med,
        "spread": spread,
        "h_normalized": h_norm,
        "mono_tol": float(mono_tol),
        "increasing_defect": incr_defect,
        "decreasing_defect": decr_defect,
        "increasing_ok": bool(incr_ok),
        "decreasing_ok": bool(decr_ok),
        "monotone_ok": bool(incr_ok and decr_ok),
        "n_kept": int(len(E)),
        "n_samples": int(n_s),
        "trim": float(trim),
    }


def bounds_table(p: float, d: float, n: float | None = None) -> list:
    """Closed-form lower bounds for the spectral gap at diameter d.

    Rows: sharp      (p-1) (pi_p/d)^p            any p > 1
          hui        (p-1) (pi_p/(2d))^p         any p > 1 (= sharp/2^p)
          kn         (pi/(4d))^p / (p-1)         requires p >= 2
          li_yau     pi^2/(4 d^2)                requires p = 2
          zhong_yang pi^2/d^2                    requires p = 2
    Values are always computed; the applicable flag records whether the
    bound's hypotheses cover the requested exponent.
    """
    if not (p > 1.0 and np.isfinite(p)):
        raise ValueError("p must be finite and exceed 1")
    if not (d > 0.0 and np.isfinite(d)):
        raise ValueError("d must be positive and finite")
    if n is not None and not n >= 1.0:
        raise ValueError("n must be at least 1 when given")
    pp = pi_p(p)
    rows = [
        {
            "name": "sharp",
            "value": (p - 1.0) * (pp / d) ** p,
            "applicable": True,
            "requires": "p > 1",
            "description": "sharp gap bound (p-1) (pi_p/d)^p",
        },
        {
            "name": "hui",
            "value": (p - 1.0) * (pp / (2.0 * d)) ** p,
            "applicable": True,
            "requires": "p > 1",
            "description": "doubled-diameter bound, sharp/2^p",
        },
        {
            "name": "kn",
            "value": (np.pi / (4.0 * d)) ** p / (p - 1.0),
            "applicable": bool(p >= 2.0),
            "requires": "p >= 2",
            "description": "earlier power-type bound (pi/(4d))^p/(p-1)",
        },
        {
            "name": "li_yau",
            "value": np.pi**2 / (4.0 * d * d),
            "applicable": bool(p == 2.0),
            "requires": "p = 2",
            "description": "classical quadratic-case bound pi^2/(4d^2)",
        },
        {
            "name": "zhong_yang",
            "value": np.pi**2 / (d * d),
            "applicable": bool(p == 2.0),
            "requires": "p = 2",
            "description": "sharp quadratic-case bound pi^2/d^2",
        },
    ]
    return rows
