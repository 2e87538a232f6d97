"""Stability weight polynomials of equivariant degenerations.

A weight system assigns an integer weight to each degree-one monomial
section; the induced level-k weights are the monomial weight sums (for a
hypersurface, monomials modulo multiples of the equivariant initial form).
The weight-sum polynomial tau, its leading coefficient I, the Chow numbers
Ch_k, and the Futaki invariant are all exact rationals.

Sign convention (calibrated, see README): tau_k is MINUS the sum of induced
section weights, and "normalized" means the smallest generator weight is
zero.  With these choices the leading coefficient I is strictly negative
for every nontrivial normalized system, any diagonal system on full
projective space has Futaki invariant zero, and the k = 1 Chow number
matches the moment pairing of the central fiber computed by quadrature
(with the weight vector negated between the section and cycle sides).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

__all__ = [
    "CALIBRATED_SIGN",
    "Geometry",
    "WeightSystem",
    "TauPolynomial",
    "induced_weights",
    "gap",
    "tau_poly",
    "I_coefficient",
    "chow_k",
    "futaki",
    "relative_futaki",
    "fit_exact_polynomial",
    "weight_system_from_json",
    "weight_report",
]

CALIBRATED_SIGN = -1


@dataclass(frozen=True)
class Geometry:
    kind: str  # "projective" | "hypersurface"
    degree: Optional[int] = None
    initial_weight: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("projective", "hypersurface"):
            raise ValueError(f"unsupported geometry {self.kind!r}")
        if self.kind == "hypersurface":
            if self.degree is None or self.degree < 1:
                raise ValueError("hypersurface geometry needs a degree >= 1")
            if self.initial_weight is None:
                raise ValueError("hypersurface geometry needs an initial weight")


@dataclass(frozen=True)
class WeightSystem:
    """Integer weights on the degree-one monomial basis.

    For ``projective`` geometry the variety is all of P^n and there are
    n + 1 generators.  For ``hypersurface`` geometry the variety is a
    degree-d hypersurface in P^(n+1) (n + 2 generators) whose ideal is
    generated, after degenerating, by an initial form of weight
    ``initial_weight``.
    """

    dim: int
    generators: tuple
    geometry: Geometry

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(int(w) for w in self.generators))
        expected = self.dim + 1 if self.geometry.kind == "projective" else self.dim + 2
        if len(self.generators) != expected:
            raise ValueError(
                f"{self.geometry.kind} geometry in dimension {self.dim} needs "
                f"{expected} generator weights, got {len(self.generators)}"
            )
        if self.geometry.kind == "hypersurface":
            d = self.geometry.degree
            lam = self.geometry.initial_weight
            if lam not in _degree_sums(self.generators, d):
                raise ValueError(
                    f"initial weight {lam} is not a sum of {d} generator weights"
                )

    @property
    def ambient_count(self) -> int:
        return len(self.generators)

    @property
    def is_trivial(self) -> bool:
        return len(set(self.generators)) == 1

    @property
    def is_normalized(self) -> bool:
        return min(self.generators) == 0


def _degree_sums(weights, d):
    """Set of achievable weight sums of degree-d monomials."""
    sums = {0}
    for _ in range(d):
        sums = {s + w for s in sums for w in weights}
    return sums


def _weight_distribution(weights, k):
    """dict weight -> number of degree-k monomials with that weight."""
    # DP over generators; counts monomials (multisets), not sequences.
    table = {0: {0: 1}}  # degree -> {weight: count} using first m generators
    for w in weights:
        new = {}
        for deg in range(k + 1):
            row = {}
            for j in range(deg + 1):  # exponent of the current generator
                prev = table.get(deg - j)
                if not prev:
                    continue
                shift = j * w
                for wt, cnt in prev.items():
                    row[wt + shift] = row.get(wt + shift, 0) + cnt
            if row:
                new[deg] = row
        table = new
    return table.get(k, {})


def induced_weights(w: WeightSystem, k: int):
    """Sorted list of weights on a monomial basis at level k."""
    if k < 1:
        raise ValueError("level k must be >= 1")
    dist = _weight_distribution(w.generators, k)
    if w.geometry.kind == "hypersurface":
        d = w.geometry.degree
        lam = w.geometry.initial_weight
        if k >= d:
            sub = _weight_distribution(w.generators, k - d)
            for wt, cnt in sub.items():
                key = wt + lam
                have = dist.get(key, 0)
                if have < cnt:
                    raise ValueError(
                        f"initial form weight inconsistent at level {k}: "
                        f"weight {key} occurs {have} < {cnt} times"
                    )
                if have == cnt:
                    del dist[key]
                else:
                    dist[key] = have - cnt
    out = []
    for wt in sorted(dist):
        out.extend([wt] * dist[wt])
    return out


def gap(weights) -> int:
    """Spread max - min of a nonempty list of integers."""
    ws = list(weights)
    if not ws:
        raise ValueError("gap of an empty weight list is undefined")
    return max(ws) - min(ws)


def fit_exact_polynomial(points, degree):
    """Exact polynomial coefficients (ascending) through the given points.

    ``points`` is a list of (x, y) pairs with len == degree + 1; Lagrange
    interpolation over Fractions.
    """
    if len(points) != degree + 1:
        raise ValueError("need exactly degree + 1 sample points")
    coeffs = [Fraction(0)] * (degree + 1)
    for i, (xi, yi) in enumerate(points):
        # numerator polynomial prod_{j != i} (x - xj), then scale
        num = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            num = _poly_mul_linear(num, -Fraction(xj))
            denom *= Fraction(xi) - Fraction(xj)
        scale = Fraction(yi) / denom
        for d, c in enumerate(num):
            coeffs[d] += scale * c
    return coeffs


def _poly_mul_linear(coeffs, c0):
    """Multiply coefficient list (ascending) by (x + c0)."""
    out = [Fraction(0)] * (len(coeffs) + 1)
    for d, c in enumerate(coeffs):
        out[d] += c * c0
        out[d + 1] += c
    return out


def _poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class TauPolynomial:
    """Exact total-weight polynomial with its Hilbert data.

    ``coeffs`` are the ascending coefficients of the degree-(n+1)
    polynomial k -> tau_k.  ``hilbert`` are the ascending coefficients of
    the degree-n polynomial k -> N(k) + 1 = dim of the level-k section
    space; its leading coefficient is the volume V.
    """

    dim: int
    coeffs: tuple
    hilbert: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "hilbert", tuple(Fraction(c) for c in self.hilbert))
        if len(self.coeffs) != self.dim + 2:
            raise ValueError("tau must have degree <= dim + 1")
        if len(self.hilbert) != self.dim + 1:
            raise ValueError("hilbert polynomial must have degree dim")
        if self.volume <= 0:
            raise ValueError("leading Hilbert coefficient must be positive")

    @property
    def volume(self) -> Fraction:
        return self.hilbert[-1]

    @property
    def alpha1(self) -> Fraction:
        if self.dim == 0:
            return Fraction(0)
        return self.hilbert[-2] / self.volume

    def tau_at(self, k) -> Fraction:
        return _poly_eval(self.coeffs, Fraction(k))

    def sections_at(self, k) -> Fraction:
        return _poly_eval(self.hilbert, Fraction(k))


def tau_poly(w: WeightSystem, sign_convention: int = CALIBRATED_SIGN, k0: int = 1) -> TauPolynomial:
    """Fit the exact weight-sum polynomial and Hilbert data of a system.

    The polynomial is fitted on n + 2 consecutive levels starting at ``k0``
    and verified at three further levels; disagreement raises ValueError
    ("not eventually polynomial"), signalling unsupported weight data.
    For hypersurfaces of degree d the window starts no earlier than
    d - n - 1, the first level at which the section counts agree with
    their polynomial extension.
    """
    if sign_convention not in (1, -1):
        raise ValueError("sign convention must be +1 or -1")
    n = w.dim
    if w.geometry.kind == "hypersurface":
        k0 = max(k0, w.geometry.degree - n - 1)
    k0 = max(k0, 1)
    levels = list(range(k0, k0 + n + 5))
    data = {k: induced_weights(w, k) for k in levels}
    tau_pts = [(k, sign_convention * sum(data[k])) for k in levels]
    dim_pts = [(k, len(data[k])) for k in levels]

    coeffs = fit_exact_polynomial(tau_pts[: n + 2], n + 1)
    hilbert = fit_exact_polynomial(dim_pts[: n + 1], n)
    for k, y in tau_pts[n + 2:]:
        if _poly_eval(coeffs, k) != y:
            raise ValueError(
                "not eventually polynomial: weight sums disagree at level "
                f"{k}; unsupported weight data"
            )
    for k, y in dim_pts[n + 1:]:
        if _poly_eval(hilbert, k) != y:
            raise ValueError(
                "not eventually polynomial: dimension counts disagree at "
                f"level {k}; unsupported weight data"
            )
    return TauPolynomial(dim=n, coeffs=tuple(coeffs), hilbert=tuple(hilbert))


def I_coefficient(tau: TauPolynomial) -> Fraction:
    """Leading (k^(n+1)) coefficient of tau."""
    return tau.coeffs[-1]


def chow_k(tau: TauPolynomial, k: int) -> Fraction:
    """Chow number tau_k / (N(k)+1) - k I / V at level k."""
    if k < 1:
        raise ValueError("level k must be >= 1")
    return tau.tau_at(k) / tau.sections_at(k) - Fraction(k) * I_coefficient(tau) / tau.volume


def futaki(tau: TauPolynomial) -> Fraction:
    """Limit of the Chow numbers: (J - I * alpha_1) / V exactly.

    J is the k^n coefficient of tau and alpha_1 the subleading Hilbert
    ratio.
    """
    I = tau.coeffs[-1]
    J = tau.coeffs[-2]
    return (J - I * tau.alpha1) / tau.volume


def relative_futaki(tau1: TauPolynomial, tau2: TauPolynomial) -> Fraction:
    """Futaki invariant of the difference of two weight polynomials."""
    if tau1.dim != tau2.dim:
        raise ValueError("dimension mismatch between weight polynomials")
    if tau1.hilbert != tau2.hilbert:
        raise ValueError("Hilbert data mismatch between weight polynomials")
    diff = TauPolynomial(
        dim=tau1.dim,
        coeffs=tuple(a - b for a, b in zip(tau1.coeffs, tau2.coeffs)),
        hilbert=tau1.hilbert,
    )
    return futaki(diff)


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


def weight_system_from_json(obj) -> WeightSystem:
    if isinstance(obj, str):
        obj = json.loads(obj)
    geo = obj["geometry"]
    geometry = Geometry(
        kind=geo["type"],
        degree=geo.get("degree"),
        initial_weight=geo.get("initial_weight"),
    )
    return WeightSystem(
        dim=int(obj["dim"]), generators=tuple(obj["generators"]), geometry=geometry
    )


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def weight_report(w: WeightSystem, kmax: int = 10, sign_convention: int = CALIBRATED_SIGN) -> dict:
    """Full exact report: tau coefficients, I, V, alpha_1, Ch_k table, Futaki."""
    tau = tau_poly(w, sign_convention)
    return {
        "dim": w.dim,
        "generators": list(w.generators),
        "geometry": {
            "type": w.geometry.kind,
            "degree": w.geometry.degree,
            "initial_weight": w.geometry.initial_weight,
        },
        "sign_convention": sign_convention,
        "tau_coefficients": [_frac_str(c) for c in tau.coeffs],
        "hilbert_coefficients": [_frac_str(c) for c in tau.hilbert],
        "I": _frac_str(I_coefficient(tau)),
        "V": _frac_str(tau.volume),
        "alpha1": _frac_str(tau.alpha1),
        "chow": {str(k): _frac_str(chow_k(tau, k)) for k in range(1, kmax + 1)},
        "futaki": _frac_str(futaki(tau)),
    }
