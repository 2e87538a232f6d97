"""Density of states for circle-invariant metrics on the Riemann sphere.

The metric is given by a radial potential u(s), s = |z|^2, with
u = log(1 + s) + eps * psi(s) for a decaying bump psi; the associated area
density is w = (s u')' (total mass one, the polarization class is fixed).
Level-k sections are the monomials z^j, orthogonal by circle invariance,
with squared norms computed by radial quadrature.  The density of states

    rho_k(s) = sum_j |z^j|^2_h / ||z^j||^2

is normalized so that its integral against the k-scaled volume form equals
the section-space dimension k + 1, and rho_k -> 1 with first correction
a1 / k where a1 is half the scalar curvature (S is normalized so the round
metric has S = 2).

All radial differentiation of rho_k uses the closed-form moment identities
of the weight distribution nu_s(j) proportional to s^j / ||z^j||^2 — the
pulled-back Fubini-Study density at level k is exactly Var_{nu_s}(j)/(k s) —
never finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import sympy as sp
from scipy.special import logsumexp

from kstab.quadrature import QuadratureError, csum, panel_rule

__all__ = [
    "RadialMetric",
    "BergmanData",
    "scalar_curvature",
    "gram",
    "rho",
    "expansion_fit",
    "fs_pullback_form",
    "theta_total_variation",
    "moment_from_bergman",
    "image_cycle",
    "default_grid",
    "metric_from_json",
]

_S = sp.Symbol("s", nonnegative=True)


def _default_bump():
    return _S / (1 + _S) ** 2


class RadialMetric:
    """Circle-invariant potential u(s) = log(1+s) + eps * psi(s).

    ``bump`` is a sympy expression in one nonnegative symbol, or a pair of
    ascending coefficient lists (num, den) of a rational function in s.
    The bump must decay so that s * psi'(s) -> 0; total area is then the
    same as for the round reference metric.
    """

    def __init__(self, epsilon: float = 0.0, bump=None, check_points: int = 400):
        self.epsilon = float(epsilon)
        if bump is None:
            psi = _default_bump()
        elif isinstance(bump, (tuple, list)):
            num, den = bump
            psi = sp.Poly(list(reversed(num)), _S).as_expr() / sp.Poly(
                list(reversed(den)), _S
            ).as_expr()
        else:
            psi = sp.sympify(bump)
        self.psi = psi
        # exact rational coefficient keeps all downstream expressions rational,
        # so cancel() normalizes them quickly
        eps_exact = sp.Rational(__import__("fractions").Fraction(self.epsilon).limit_denominator(10**9))
        u = sp.log(1 + _S) + eps_exact * psi
        self._u = u
        uprime = sp.diff(u, _S)
        w = sp.cancel(sp.diff(_S * uprime, _S))
        # scalar curvature S = -(s (log w)')' / w with (log w)' = w'/w
        logw_term = sp.diff(_S * sp.cancel(sp.diff(w, _S) / w), _S)
        scal = sp.cancel(-logw_term / w)
        self._fn_u = sp.lambdify(_S, u, "numpy")
        self._fn_uprime = sp.lambdify(_S, uprime, "numpy")
        self._fn_w = sp.lambdify(_S, w, "numpy")
        self._fn_scal = sp.lambdify(_S, scal, "numpy")
        self._certify(check_points)

    def _certify(self, npts: int):
        # certificate: minimum of the density relative to the round one,
        # which stays bounded away from zero for genuine metrics
        x = np.linspace(1e-6, 1 - 1e-6, npts)
        s = x / (1 - x)
        w = np.asarray(self._fn_w(s), dtype=float)
        self.positivity_certificate = float(np.min(w * (1.0 + s) ** 2))
        if self.positivity_certificate <= 0:
            raise ValueError(
                f"potential is not a metric: density minimum "
                f"{self.positivity_certificate:g} <= 0 relative to round"
            )

    # evaluated callables ------------------------------------------------
    def u(self, s):
        return np.asarray(self._fn_u(s), dtype=float)

    def density(self, s):
        """Area density w(s) = (s u')'; integrates to 1 over [0, inf)."""
        return np.asarray(self._fn_w(s), dtype=float)

    def scalar(self, s):
        return np.asarray(self._fn_scal(s), dtype=float)

    @property
    def is_round(self) -> bool:
        return self.epsilon == 0.0

    def area(self, order: int = 64) -> float:
        val, _ = _radial_integral(lambda s: self.density(s), tol=1e-12, order=order)
        return val


def _radial_integral(f, tol: float, order: int = 32, max_panels: int = 256):
    """Integral over s in [0, inf) via x = s/(1+s), with panel doubling."""

    def g(x):
        s = x / (1.0 - x)
        jac = 1.0 / (1.0 - x) ** 2
        return f(s) * jac

    panels = 2
    nodes, weights = panel_rule(order, panels)
    prev = csum(weights * g(nodes))
    while panels <= max_panels:
        panels *= 2
        nodes, weights = panel_rule(order, panels)
        cur = csum(weights * g(nodes))
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureError(
        f"radial quadrature stalled at error {err:g} (tol {tol:g})"
    )


def scalar_curvature(metric: RadialMetric, grid: np.ndarray) -> np.ndarray:
    """Scalar curvature field on a grid of s-values.

    Computed by exact symbolic differentiation of the radial formula
    S = -(s (log w)')' / w; the round metric gives the constant 2.
    """
    return metric.scalar(np.asarray(grid, dtype=float))


def gram(metric: RadialMetric, k: int, tol: float = 1e-12) -> np.ndarray:
    """Squared norms ||z^j||^2, j = 0..k, by adaptive radial quadrature.

    The Gram matrix of the monomial basis is diagonal by circle symmetry;
    only the diagonal is returned.
    """
    if k < 1:
        raise ValueError("level k must be >= 1")
    j = np.arange(k + 1)

    def make_f(scale_log):
        def f(s):
            s = np.asarray(s, dtype=float)
            logs = np.log(s)
            expo = j[:, None] * logs[None, :] - k * metric.u(s)[None, :]
            return np.exp(expo - scale_log[:, None]) * metric.density(s)[None, :]
        return f

    # first pass to find per-j scales, then converge panels
    nodes, weights = panel_rule(32, 8)
    s = nodes / (1.0 - nodes)
    expo = j[:, None] * np.log(s)[None, :] - k * metric.u(s)[None, :]
    scale_log = np.max(expo, axis=1)

    panels = 8
    prev = None
    while panels <= 512:
        nodes, weights = panel_rule(32, panels)
        s = nodes / (1.0 - nodes)
        jac = 1.0 / (1.0 - nodes) ** 2
        vals = make_f(scale_log)(s) * jac[None, :]
        cur = vals @ weights
        if prev is not None:
            err = np.max(np.abs(cur - prev) / np.abs(cur))
            if err <= tol:
                break
        prev = cur
        panels *= 2
    else:
        raise QuadratureError(f"Gram quadrature stalled (rel change {err:g})")
    norms = k * cur * np.exp(scale_log)
    if np.any(norms <= 0):
        raise QuadratureError("nonpositive squared norm; quadrature failed")
    return norms


def _log_moments(metric: RadialMetric, k: int, norms: np.ndarray, s: np.ndarray):
    """log T_p(s) for T_p = sum_j j^p s^j / ||z^j||^2, p = 0, 1, 2."""
    j = np.arange(k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(s)
        base = j[:, None] * logs[None, :] - np.log(norms)[:, None]
    base[0] = -np.log(norms[0])  # s^0 = 1 even at s = 0
    lt0 = logsumexp(base, axis=0)
    # j = 0 contributes zero to T1, T2; drop it so the logsumexp weights stay positive
    lt1 = logsumexp(base[1:], axis=0, b=j[1:, None].astype(float))
    lt2 = logsumexp(base[1:], axis=0, b=(j[1:, None] ** 2).astype(float))
    return lt0, lt1, lt2


def rho(metric: RadialMetric, k: int, grid: np.ndarray, norms: Optional[np.ndarray] = None) -> np.ndarray:
    """Density of states rho_k on a grid of s-values."""
    if norms is None:
        norms = gram(metric, k)
    s = np.asarray(grid, dtype=float)
    lt0, _, _ = _log_moments(metric, k, norms, s)
    return np.exp(lt0 - k * metric.u(s))


def fs_pullback_form(
    metric: RadialMetric, k: int, grid: np.ndarray, norms: Optional[np.ndarray] = None
) -> np.ndarray:
    """Radial density of the level-k pulled-back Fubini-Study form.

    Equals w + (1/k) * (s (log rho_k)')' computed in closed form: the
    moment identity gives exactly Var_{nu_s}(j) / (k s) for the weights
    nu_s(j) ~ s^j / ||z^j||^2.  Positive for every metric and level.
    """
    if norms is None:
        norms = gram(metric, k)
    s = np.asarray(grid, dtype=float)
    lt0, lt1, lt2 = _log_moments(metric, k, norms, s)
    a = np.exp(lt1 - lt0)
    b = np.exp(lt2 - lt0)
    density = (b - a * a) / (k * s)
    if np.any(density <= 0):
        raise QuadratureError(
            "pulled-back form lost positivity; level k too small for this grid"
        )
    return density


def theta_total_variation(
    metric: RadialMetric, k: int, tol: float = 1e-8
) -> float:
    """Total variation of the discrepancy between the normalized density
    of states volume and the pulled-back Fubini-Study volume.

    Integrates |rho_k w / P(k) - w_FS,k| over the sphere with
    P(k) = (k+1)/k; zero exactly for the round metric.
    """
    norms = gram(metric, k)
    p_k = (k + 1.0) / k

    def f(s):
        s = np.asarray(s, dtype=float)
        r = rho(metric, k, s, norms)
        wk = fs_pullback_form(metric, k, s, norms)
        return np.abs(r * metric.density(s) / p_k - wk)

    val, _ = _radial_integral(f, tol=tol)
    return val


@dataclass
class FitResult:
    a1: np.ndarray
    remainders: np.ndarray  # shape (len(klist), len(grid))
    klist: tuple
    residual: float
    condition: float


def expansion_fit(
    metric: RadialMetric, klist: Sequence[int], grid: np.ndarray
) -> FitResult:
    """Pointwise extrapolation of the first density-of-states correction.

    Fits k (rho_k - 1) = a1 + c / k over the supplied levels and returns
    the a1 field together with the second-order remainder fields
    k^2 (rho_k - 1 - a1/k).
    """
    klist = tuple(int(k) for k in klist)
    if len(klist) < 3:
        raise ValueError("expansion fit needs at least three levels")
    grid = np.asarray(grid, dtype=float)
    ys = []
    for k in klist:
        r = rho(metric, k, grid)
        ys.append(k * (r - 1.0))
    y = np.stack(ys)  # (nk, ngrid)
    design = np.stack([np.ones(len(klist)), 1.0 / np.asarray(klist, dtype=float)], axis=1)
    cond = float(np.linalg.cond(design))
    if cond > 1e8:
        raise ValueError(f"ill-conditioned expansion fit (cond {cond:g})")
    sol, res, _, _ = np.linalg.lstsq(design, y, rcond=None)
    a1 = sol[0]
    # k^2 (rho_k - 1 - a1/k) = k (y_k - a1)
    rem = np.stack([klist[i] * (ys[i] - a1) for i in range(len(klist))])
    residual = float(np.sqrt(np.mean((design @ sol - y) ** 2)))
    return FitResult(a1=a1, remainders=rem, klist=klist, residual=residual, condition=cond)


def moment_from_bergman(metric: RadialMetric, k: int, a: Sequence[float], tol: float = 1e-10) -> float:
    """Moment pairing <M_k, A> for a diagonal weight vector A on the
    level-k monomial basis, via the density-of-states representation.

    Integrates H_A * w_FS,k over the sphere, where H_A is the rho-weighted
    average of the eigenvalues at each point.  Requires len(a) == k + 1.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] != k + 1:
        raise ValueError(f"weight vector must have length k+1 = {k + 1}")
    norms = gram(metric, k)
    j = np.arange(k + 1)

    def f(s):
        s = np.asarray(s, dtype=float)
        logs = np.log(s)
        base = j[:, None] * logs[None, :] - np.log(norms)[:, None]
        lt0 = logsumexp(base, axis=0)
        num, sign = logsumexp(base, axis=0, b=a[:, None], return_sign=True)
        h = sign * np.exp(num - lt0)
        return h * fs_pullback_form(metric, k, s, norms)

    val, _ = _radial_integral(f, tol=tol)
    return val


def image_cycle(metric: RadialMetric, k: int):
    """The level-k embedding of the sphere as a parametrized cycle in P^k,
    using the orthonormal monomial frame z^j / ||z^j||."""
    from kstab.cycles import Component, ProjectiveCycle

    norms = gram(metric, k)
    coeffs = np.zeros((k + 1, k + 1), dtype=complex)
    for j in range(k + 1):
        coeffs[j, j] = 1.0 / np.sqrt(norms[j])
    return ProjectiveCycle(k, [Component(coeffs)])


def default_grid(npts: int = 100, lo: float = 0.02, hi: float = 0.98) -> np.ndarray:
    """Interior grid of s-values, uniform in x = s/(1+s)."""
    x = np.linspace(lo, hi, npts)
    return x / (1.0 - x)


@dataclass
class BergmanData:
    """One level's worth of density-of-states data."""

    k: int
    gram_norms: np.ndarray
    grid: np.ndarray
    rho: np.ndarray
    a1_fit: Optional[np.ndarray] = None
    remainder: Optional[np.ndarray] = None

    @classmethod
    def compute(cls, metric: RadialMetric, k: int, grid: Optional[np.ndarray] = None) -> "BergmanData":
        if grid is None:
            grid = default_grid()
        norms = gram(metric, k)
        return cls(k=k, gram_norms=norms, grid=grid, rho=rho(metric, k, grid, norms))


def metric_from_json(obj) -> RadialMetric:
    """Parse {"epsilon": e, "bump": {"type": "rational", "num": [...],
    "den": [...]}}; "default" uses s/(1+s)^2."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    eps = float(obj.get("epsilon", 0.0))
    bump = obj.get("bump")
    if bump is None or bump.get("type") == "default":
        return RadialMetric(epsilon=eps)
    if bump.get("type") != "rational":
        raise ValueError(f"unsupported bump type {bump.get('type')!r}")
    num = bump.get("num", bump.get("coeffs"))
    den = bump.get("den", [1, 2, 1])  # default denominator (1+s)^2
    if num is None:
        raise ValueError("rational bump needs numerator coefficients")
    return RadialMetric(epsilon=eps, bump=(list(num), list(den)))
