"""Generalized p-trigonometric functions.

Implements the half-period pi_p, the generalized sine/cosine pair
(sin_p, cos_p), the inverse sine, and the p-arctangent.  On the
principal branch sin_p inverts the incomplete integral

    x = integral_0^s (1 - sigma**p)**(-1/p) dsigma,        |s| <= 1,

whose half-period is pi_p = 2*pi/(p*sin(pi/p)).  The pair satisfies
|sin_p|**p + |cos_p|**p = 1 with cos_p = d/dx sin_p, and sin_p extends
to the real line by oddness, the reflection sin_p(pi_p - x) = sin_p(x),
and 2*pi_p periodicity.  For p = 2 everything reduces to the classical
circular functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betainc, betaincinv, gamma

from ._util import as_scalar_or_array

__all__ = [
    "PExponent",
    "pi_p",
    "pi_p_quadrature",
    "sin_p",
    "cos_p",
    "sin_cos_p",
    "inv_sin_p",
    "inv_sin_p_quadrature",
    "tan_p",
    "arctan_p",
]


@dataclass(frozen=True)
class PExponent:
    """A validated exponent p for the p-trigonometric family.

    Rejects p <= 1 and non-finite values at construction.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError(f"exponent must be finite, got {self.value!r}")
        if v <= 1.0:
            raise ValueError(f"exponent must satisfy p > 1, got {v}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


def _pval(p) -> float:
    """Coerce a PExponent or plain number to a validated float."""
    if isinstance(p, PExponent):
        return p.value
    return PExponent(float(p)).value


def pi_p(p) -> float:
    """Half-period of sin_p: 2*pi/(p*sin(pi/p)); pi_2 = pi."""
    pv = _pval(p)
    return 2.0 * math.pi / (pv * math.sin(math.pi / pv))


def _quad_integrand(t: float, pv: float) -> float:
    # After the substitution sigma = 1 - t**q with q = p/(p-1), the
    # integrand q*t**(q-1) * (1 - (1-t**q)**p)**(-1/p) is bounded on
    # [0, 1]; 1 - (1-u)**p is evaluated via expm1/log1p to keep full
    # relative accuracy for small u.
    q = pv / (pv - 1.0)
    if t <= 0.0:
        return q * pv ** (-1.0 / pv)
    u = t**q
    if u >= 1.0:
        one_minus = 1.0
    else:
        one_minus = -math.expm1(pv * math.log1p(-u))
    return q * t ** (q - 1.0) * one_minus ** (-1.0 / pv)


def inv_sin_p_quadrature(s: float, p) -> float:
    """Inverse p-sine by adaptive quadrature of the defining integral.

    Evaluates integral_0^s (1-sigma**p)**(-1/p) dsigma with the
    endpoint singularity at sigma = 1 removed by the substitution
    sigma = 1 - t**(p/(p-1)).  Slower than inv_sin_p but entirely
    independent of the incomplete-beta route; used as a cross-check.
    """
    pv = _pval(p)
    sv = float(s)
    if abs(sv) > 1.0:
        raise ValueError(f"argument must lie in [-1, 1], got {sv}")
    if sv == 0.0:
        return 0.0
    q = pv / (pv - 1.0)
    t_lo = (1.0 - abs(sv)) ** (1.0 / q)
    val, _ = integrate.quad(
        _quad_integrand, t_lo, 1.0, args=(pv,), epsabs=1e-14, epsrel=1e-13, limit=200
    )
    return math.copysign(val, sv)


def pi_p_quadrature(p) -> float:
    """Half-period via the defining integral (independent of the closed form)."""
    return 2.0 * inv_sin_p_quadrature(1.0, p)


def inv_sin_p(s, p):
    """Inverse of sin_p on the principal branch [-pi_p/2, pi_p/2].

    Uses the substitution u = sigma**p, which turns the defining
    integral into an incomplete beta integral:

        inv_sin_p(s) = (pi_p/2) * I(1/p, 1-1/p; s**p),

    where I is the regularized incomplete beta function.  Raises on
    |s| > 1.
    """
    pv = _pval(p)
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(np.abs(arr) > 1.0 + 1e-15):
        bad = arr[np.abs(arr) > 1.0 + 1e-15][0]
        raise ValueError(f"argument must lie in [-1, 1], got {bad}")
    arr = np.clip(arr, -1.0, 1.0)
    a, b = 1.0 / pv, 1.0 - 1.0 / pv
    out = np.sign(arr) * 0.5 * pi_p(pv) * betainc(a, b, np.abs(arr) ** pv)
    return as_scalar_or_array(out[0] if scalar else out, scalar)


def _principal_sin_cos(x: np.ndarray, pv: float):
    """sin_p and cos_p for x in [0, pi_p/2], vectorized.

    Inverts the incomplete-beta form of the defining integral with
    betaincinv, then applies safeguarded Newton corrections on the
    monotone map itself.  Near the right endpoint the complement
    variable z = 1 - s**p (= cos_p**p) is solved instead so that cos_p
    retains full relative accuracy.
    """
    hp = 0.5 * pi_p(pv)
    a, b = 1.0 / pv, 1.0 - 1.0 / pv
    beta_ab = gamma(a) * gamma(b)
    y = np.clip(x / hp, 0.0, 1.0)
    s = np.empty_like(y)
    z = np.empty_like(y)  # z = 1 - s**p = cos_p**p

    lo = y < 0.7
    hi = ~lo
    if np.any(lo):
        yl = y[lo]
        u = betaincinv(a, b, yl)
        sv = u ** (1.0 / pv)
        # Newton on G(s) = I(a, b; s**p) - y; G'(s) = p*(1-s**p)**(-1/p)/B(a,b)
        for _ in range(2):
            one_minus = 1.0 - sv**pv
            one_minus = np.maximum(one_minus, 1e-300)
            res = betainc(a, b, sv**pv) - yl
            sv = sv - res * beta_ab / pv * one_minus ** (1.0 / pv)
            sv = np.clip(sv, 0.0, 1.0)
        s[lo] = sv
        z[lo] = np.maximum(1.0 - sv**pv, 0.0)
    if np.any(hi):
        yh = y[hi]
        # complement: I(b, a; z) = 1 - y with z = 1 - s**p
        zv = betaincinv(b, a, 1.0 - yh)
        # Newton on G2(z) = I(b, a; z) - (1-y); G2'(z) = z**(b-1)(1-z)**(a-1)/B
        for _ in range(2):
            zc = np.clip(zv, 1e-300, 1.0)
            res = betainc(b, a, zc) - (1.0 - yh)
            dg = zc ** (b - 1.0) * np.maximum(1.0 - zc, 1e-300) ** (a - 1.0) / beta_ab
            zv = zv - res / dg
            zv = np.clip(zv, 0.0, 1.0)
        z[hi] = zv
        s[hi] = (1.0 - zv) ** (1.0 / pv)
    c = z ** (1.0 / pv)
    return s, c


def sin_cos_p(x, p):
    """The pair (sin_p(x), cos_p(x)) for any real x.

    Reduces x to the principal branch using oddness of sin_p, evenness
    of cos_p, the reflection about pi_p/2, and 2*pi_p periodicity, then
    solves on [0, pi_p/2].
    """
    pv = _pval(p)
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).copy()
    pp = pi_p(pv)
    hp = 0.5 * pp

    r = np.mod(arr, 2.0 * pp)
    r = np.where(r > pp, r - 2.0 * pp, r)  # r in [-pi_p, pi_p]
    sgn_s = np.where(r < 0.0, -1.0, 1.0)
    r = np.abs(r)  # r in [0, pi_p]
    sgn_c = np.where(r > hp, -1.0, 1.0)
    r = np.where(r > hp, pp - r, r)  # r in [0, pi_p/2]

    s, c = _principal_sin_cos(r, pv)
    s_out = sgn_s * s
    c_out = sgn_c * c
    if scalar:
        return float(s_out[0]), float(c_out[0])
    return s_out, c_out


def sin_p(x, p):
    """Generalized sine; odd, 2*pi_p periodic, values in [-1, 1]."""
    s, _ = sin_cos_p(x, p)
    return s


def cos_p(x, p):
    """Generalized cosine, the derivative of sin_p; even, 2*pi_p periodic."""
    _, c = sin_cos_p(x, p)
    return c


def tan_p(x, p):
    """Generalized tangent sin_p/cos_p on the principal branch."""
    s, c = sin_cos_p(x, p)
    return s / c


def arctan_p(y, p):
    """Inverse of tan_p, mapping the extended line onto [-pi_p/2, pi_p/2].

    arctan_p(+-inf) = +-pi_p/2 by convention; monotone increasing.
    Solves |tan_p| = |y| in closed form: sin_p = |y|/(1+|y|**p)**(1/p).
    """
    pv = _pval(p)
    arr = np.asarray(y, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    hp = 0.5 * pi_p(pv)
    a, b = 1.0 / pv, 1.0 - 1.0 / pv
    out = np.empty_like(arr)
    inf_mask = np.isinf(arr)
    out[inf_mask] = np.sign(arr[inf_mask]) * hp
    fin = ~inf_mask
    if np.any(fin):
        yy = np.abs(arr[fin])
        res = np.empty_like(yy)
        big = yy > 1.0
        if np.any(big):
            # complement branch: 1 - sin_p**p = 1/(1+y**p) is exact in
            # the variable t = y**-p, keeping full absolute accuracy
            # where sin_p saturates to 1 in double precision.
            t = yy[big] ** (-pv)
            zc = t / (1.0 + t)
            res[big] = hp * (1.0 - betainc(b, a, zc))
        sm = ~big
        if np.any(sm):
            s = yy[sm] * (1.0 + yy[sm] ** pv) ** (-1.0 / pv)
            res[sm] = hp * betainc(a, b, np.minimum(s, 1.0) ** pv)
        out[fin] = np.sign(arr[fin]) * res
    return as_scalar_or_array(out[0] if scalar else out, scalar)
