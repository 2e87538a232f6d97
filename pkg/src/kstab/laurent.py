"""Exact Laurent-polynomial matrices and loop factorization.

A *loop* is a square matrix of Laurent polynomials in one variable t over
exact rationals whose determinant is a nonzero Laurent polynomial, i.e. an
invertible matrix family on a small punctured disc around t = 0.  The central
operation is :func:`factorize`, which writes a loop as

    g = left * t^A * right

where ``left`` is a polynomial matrix invertible at t = 0, ``A`` is an
integer exponent diagonal, and ``right`` is a polynomial matrix with unit
diagonal that is triangular with bounded entry degrees in the basis order
that sorts the exponents.  All arithmetic in this module is exact; no
floating point is used anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "DegenerateLoopError",
    "ZeroLaurentError",
    "LaurentPoly",
    "LaurentMatrix",
    "LoopFactorization",
    "multiply",
    "factorize",
    "normalize",
    "pole_order_vector",
    "section_degree",
    "det_pole_order",
    "loop_from_json",
    "loop_to_json",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class DegenerateLoopError(ValueError):
    """Raised when a loop has identically zero determinant."""


class ZeroLaurentError(ValueError):
    """Raised when an order/degree is requested of the zero element."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class LaurentPoly:
    """Finite Laurent polynomial sum_e c_e t^e with rational coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else coeffs
            for e, v in items:
                v = _as_fraction(v)
                if v:
                    e = int(e)
                    w = c.get(e, _ZERO) + v
                    if w:
                        c[e] = w
                    else:
                        del c[e]
        self._c = c

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: _ONE})

    @classmethod
    def t_power(cls, e: int, c=1) -> "LaurentPoly":
        return cls({int(e): _as_fraction(c)})

    @classmethod
    def from_triples(cls, triples) -> "LaurentPoly":
        """Build from ``[[exp, num, den], ...]`` triples."""
        return cls((int(e), Fraction(int(n), int(d))) for e, n, d in triples)

    # -- structure ----------------------------------------------------
    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def coefficient(self, e: int) -> Fraction:
        return self._c.get(int(e), _ZERO)

    @property
    def is_zero(self) -> bool:
        return not self._c

    def ord(self) -> int:
        """Lowest exponent with nonzero coefficient."""
        if not self._c:
            raise ZeroLaurentError("zero Laurent polynomial has no order")
        return min(self._c)

    def deg(self) -> int:
        if not self._c:
            raise ZeroLaurentError("zero Laurent polynomial has no degree")
        return max(self._c)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        c = dict(self._c)
        for e, v in other._c.items():
            w = c.get(e, _ZERO) + v
            if w:
                c[e] = w
            else:
                c.pop(e, None)
        out = LaurentPoly.__new__(LaurentPoly)
        out._c = c
        return out

    def __neg__(self) -> "LaurentPoly":
        out = LaurentPoly.__new__(LaurentPoly)
        out._c = {e: -v for e, v in self._c.items()}
        return out

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        c = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                e = e1 + e2
                w = c.get(e, _ZERO) + v1 * v2
                if w:
                    c[e] = w
                else:
                    del c[e]
        out = LaurentPoly.__new__(LaurentPoly)
        out._c = c
        return out

    def scale(self, c) -> "LaurentPoly":
        c = _as_fraction(c)
        out = LaurentPoly.__new__(LaurentPoly)
        out._c = {} if not c else {e: v * c for e, v in self._c.items()}
        return out

    def shift(self, e: int) -> "LaurentPoly":
        """Multiply by t^e."""
        out = LaurentPoly.__new__(LaurentPoly)
        out._c = {k + e: v for k, v in self._c.items()}
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def to_triples(self):
        return [
            [e, v.numerator, v.denominator] for e, v in sorted(self._c.items())
        ]

    def __repr__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for e, v in sorted(self._c.items()):
            if e == 0:
                parts.append(f"{v}")
            elif e == 1:
                parts.append(f"{v}*t")
            else:
                parts.append(f"{v}*t^{e}")
        return " + ".join(parts)


class LaurentMatrix:
    """Square matrix of :class:`LaurentPoly` entries."""

    __slots__ = ("size", "entries")

    def __init__(self, entries):
        self.entries = [list(row) for row in entries]
        self.size = len(self.entries)
        for row in self.entries:
            if len(row) != self.size:
                raise ValueError("loop matrix must be square")

    @classmethod
    def identity(cls, size: int) -> "LaurentMatrix":
        one, zero = LaurentPoly.one(), LaurentPoly.zero()
        return cls(
            [[one if i == j else zero for j in range(size)] for i in range(size)]
        )

    @classmethod
    def exponent_diagonal(cls, exps) -> "LaurentMatrix":
        """diag(t^{e_0}, ..., t^{e_N})."""
        size = len(exps)
        zero = LaurentPoly.zero()
        return cls(
            [
                [LaurentPoly.t_power(exps[i]) if i == j else zero for j in range(size)]
                for i in range(size)
            ]
        )

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.size == other.size and self.entries == other.entries

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return multiply(self, other)

    def shift(self, e: int) -> "LaurentMatrix":
        """Scalar multiplication by t^e."""
        return LaurentMatrix([[p.shift(e) for p in row] for row in self.entries])

    def scale_columns(self, exps) -> "LaurentMatrix":
        return LaurentMatrix(
            [[row[j].shift(exps[j]) for j in range(self.size)] for row in self.entries]
        )

    def apply(self, vector):
        """Matrix times a vector of Laurent polynomials."""
        if len(vector) != self.size:
            raise ValueError("vector length does not match loop size")
        out = []
        for i in range(self.size):
            acc = LaurentPoly.zero()
            for j in range(self.size):
                acc = acc + self.entries[i][j] * vector[j]
            out.append(acc)
        return out

    def det(self) -> LaurentPoly:
        """Exact determinant by cofactor expansion with memoization."""
        n = self.size
        cache = {}

        def minor(rows: int, start: int) -> LaurentPoly:
            # rows: bitmask of remaining row indices; expand along column `start`
            if rows in cache:
                return cache[rows]
            idx = [i for i in range(n) if rows >> i & 1]
            if len(idx) == 1:
                res = self.entries[idx[0]][start]
            else:
                res = LaurentPoly.zero()
                sign = 1
                for pos, i in enumerate(idx):
                    a = self.entries[i][start]
                    if not a.is_zero:
                        sub = minor(rows & ~(1 << i), start + 1)
                        term = a * sub
                        res = res + (term if sign > 0 else -term)
                    sign = -sign
            cache[rows] = res
            return res

        return minor((1 << n) - 1, 0)

    def value_at_zero(self):
        """Matrix of constant coefficients; requires no negative exponents."""
        vals = []
        for row in self.entries:
            r = []
            for p in row:
                if not p.is_zero and p.ord() < 0:
                    raise ValueError("entry has a pole at t=0")
                r.append(p.coefficient(0))
            vals.append(r)
        return vals

    def is_holomorphic(self) -> bool:
        return all(p.is_zero or p.ord() >= 0 for row in self.entries for p in row)

    def __repr__(self) -> str:
        rows = [", ".join(repr(p) for p in row) for row in self.entries]
        return "LaurentMatrix([\n  " + "\n  ".join(rows) + "\n])"


def multiply(a: LaurentMatrix, b: LaurentMatrix) -> LaurentMatrix:
    """Exact product of two loops of equal size."""
    if a.size != b.size:
        raise ValueError(f"size mismatch: {a.size} vs {b.size}")
    n = a.size
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = LaurentPoly.zero()
            for k in range(n):
                p = a.entries[i][k]
                q = b.entries[k][j]
                if not (p.is_zero or q.is_zero):
                    acc = acc + p * q
            row.append(acc)
        out.append(row)
    return LaurentMatrix(out)


def _rational_det(rows) -> Fraction:
    """Determinant of a matrix of Fractions by fraction Gaussian elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    det = _ONE
    for c in range(n):
        piv = None
        for r in range(c, n):
            if m[r][c]:
                piv = r
                break
        if piv is None:
            return _ZERO
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


@dataclass(frozen=True)
class LoopFactorization:
    """Normal form g = left * T * right.

    ``weights`` is the nonincreasing vector of exponents (the elementary
    divisors of the loop over the local ring at t = 0).  ``order`` records
    which original basis index carries which weight: weight ``weights[k]``
    sits on basis index ``order[k]``, so the exponent diagonal T is
    ``diag(t^{e_0}, ..., t^{e_N})`` with ``e_{order[k]} = weights[k]``.
    ``right`` has unit diagonal, vanishes at positions (order[i], order[j])
    for i < j, and its entry at (order[i], order[j]) for i > j is a
    polynomial in t of degree < weights[j] - weights[i].
    """

    left: LaurentMatrix
    weights: tuple
    right: LaurentMatrix
    order: tuple

    @property
    def size(self) -> int:
        return self.left.size

    def exponent_vector(self):
        """Exponents placed on the original basis: e[order[k]] = weights[k]."""
        e = [0] * self.size
        for k, c in enumerate(self.order):
            e[c] = self.weights[k]
        return e

    def middle(self) -> LaurentMatrix:
        return LaurentMatrix.exponent_diagonal(self.exponent_vector())

    def reassemble(self) -> LaurentMatrix:
        return multiply(self.left, multiply(self.middle(), self.right))

    def right_inverse(self) -> LaurentMatrix:
        """Exact inverse of the unit-diagonal triangular factor."""
        return _invert_unitriangular(self.right, list(self.order))


# ---------------------------------------------------------------------------
# factorization: valuation echelon over a truncated power-series window
# ---------------------------------------------------------------------------


class _WindowTooSmall(Exception):
    pass


def _ser_ord(a):
    for i, v in enumerate(a):
        if v:
            return i
    return None


def _ser_is_zero(a) -> bool:
    return all(not v for v in a)


def _ser_mul(a, b, K):
    out = [_ZERO] * K
    for i, av in enumerate(a):
        if av:
            top = K - i
            bi = b[:top]
            for j, bv in enumerate(bi):
                if bv:
                    out[i + j] += av * bv
    return out

def _ser_sub_mul(a, mu, b, K):
    """a - mu*b, all length-K coefficient lists."""
    out = list(a)
    for i, mv in enumerate(mu):
        if mv:
            top = K - i
            bi = b[:top]
            for j, bv in enumerate(bi):
                if bv:
                    out[i + j] -= mv * bv
    return out


def _ser_inv_unit(a, K):
    """Inverse of a unit power series (a[0] != 0) modulo t^K."""
    inv = [_ZERO] * K
    inv0 = 1 / a[0]
    inv[0] = inv0
    for m in range(1, K):
        acc = _ZERO
        top = min(m, len(a) - 1)
        for i in range(1, top + 1):
            ai = a[i]
            if ai:
                w = inv[m - i]
                if w:
                    acc += ai * w
        if acc:
            inv[m] = -acc * inv0
    return inv


def _echelon(rows, size, K):
    """Reduce spanning rows to the triangular normal-form basis.

    Returns (sigma, wts, basis) with wts[0] >= ... >= wts[size-1]; basis[k]
    is a row vector supported on coordinates sigma[0..k], whose sigma[k]
    entry is exactly t^{wts[k]} and whose sigma[j] entry (j < k) has
    exponents confined to [wts[k], wts[j]).
    """
    active = list(range(size))
    sigma = [0] * size
    wts = [0] * size
    basis = [None] * size

    for pos in range(size - 1, -1, -1):
        best = None  # (ord, -coord, row)
        for i in active:
            for c in range(size):
                o = _ser_ord(rows[i][c])
                if o is None:
                    continue
                key = (o, -c, i)
                if best is None or key < best:
                    best = key
        if best is None:
            raise _WindowTooSmall
        m, negc, istar = best
        cstar = -negc

        # normalize the pivot row so its cstar entry becomes exactly t^m
        unit = rows[istar][cstar][m:] + [_ZERO] * m
        uinv = _ser_inv_unit(unit, K)
        rows[istar] = [_ser_mul(uinv, col, K) for col in rows[istar]]

        for i in active:
            if i == istar:
                continue
            ent = rows[i][cstar]
            if _ser_is_zero(ent):
                continue
            mu = ent[m:] + [_ZERO] * m  # ord(ent) >= m, exact monomial division
            rows[i] = [
                _ser_sub_mul(rows[i][c], mu, rows[istar][c], K) for c in range(size)
            ]

        sigma[pos] = cstar
        wts[pos] = m
        basis[pos] = rows[istar]
        active.remove(istar)

    # second pass: reduce entries below each pivot exponent window
    for k in range(1, size):
        for j in range(k - 1, -1, -1):
            beta = basis[k][sigma[j]]
            q = beta[wts[j]:] + [_ZERO] * wts[j]
            if not _ser_is_zero(q):
                basis[k] = [
                    _ser_sub_mul(basis[k][c], q, basis[j][c], K) for c in range(size)
                ]
    return sigma, wts, basis


def _series_to_poly(ser, down: int) -> LaurentPoly:
    """Interpret a window series divided by t^down as a Laurent polynomial."""
    return LaurentPoly({e - down: v for e, v in enumerate(ser) if v})


def factorize(g: LaurentMatrix) -> LoopFactorization:
    """Factor a loop into the normal form left * t^A * right.

    Raises :class:`DegenerateLoopError` when det g = 0.  The result is
    deterministic: weights are sorted nonincreasing and ties between equal
    weights keep the original basis order.
    """
    det = g.det()
    if det.is_zero:
        raise DegenerateLoopError("degenerate loop: determinant vanishes identically")
    n = g.size

    nu = min(
        (p.ord() for row in g.entries for p in row if not p.is_zero), default=0
    )
    shifted = g.shift(-nu)  # polynomial entries
    det_ord_shifted = det.ord() - n * nu  # = sum of shifted weights
    span = max(
        (p.deg() for row in shifted.entries for p in row if not p.is_zero), default=0
    )
    K = max(span + 2 * det_ord_shifted + 8, 16)

    for _attempt in range(6):
        rows = [
            [
                _window_list(shifted.entries[i][j], K)
                for j in range(n)
            ]
            for i in range(n)
        ]
        try:
            sigma, wts, basis = _echelon(rows, n, K)
        except _WindowTooSmall:
            K *= 2
            continue
        fac = _assemble(g, sigma, wts, basis, nu, det)
        if fac is not None:
            return fac
        K *= 2
    raise RuntimeError("loop factorization failed to stabilize; window exhausted")


def _window_list(p: LaurentPoly, K: int):
    out = [_ZERO] * K
    for e, v in p.coeffs.items():
        if 0 <= e < K:
            out[e] = v
    return out


def _assemble(g, sigma, wts, basis, nu, det):
    """Build and exactly verify the factorization; None on window corruption."""
    n = g.size
    weights = tuple(w + nu for w in wts)
    if any(weights[k] < weights[k + 1] for k in range(n - 1)):
        return None

    zero, one = LaurentPoly.zero(), LaurentPoly.one()
    right_entries = [[zero] * n for _ in range(n)]
    for k in range(n):
        right_entries[sigma[k]][sigma[k]] = one
        for j in range(k):
            ser = basis[k][sigma[j]]
            o = _ser_ord(ser)
            if o is None:
                continue
            if o < wts[k]:
                return None
            right_entries[sigma[k]][sigma[j]] = _series_to_poly(ser, wts[k])
        # positions sigma[k], sigma[j] with j > k must vanish
        for j in range(k + 1, n):
            if not _ser_is_zero(basis[k][sigma[j]]):
                return None
    right = LaurentMatrix(right_entries)

    # degree bounds: entry (sigma[i], sigma[j]), i > j, has degree < w_j - w_i
    for i in range(n):
        for j in range(i):
            p = right_entries[sigma[i]][sigma[j]]
            if not p.is_zero and p.deg() >= weights[j] - weights[i]:
                return None

    rinv = _invert_unitriangular(right, sigma)
    left = multiply(g, rinv).scale_columns(_negated_exponents(sigma, weights, n))

    if not left.is_holomorphic():
        return None
    if _rational_det(left.value_at_zero()) == 0:
        return None

    fac = LoopFactorization(
        left=left, weights=weights, right=right, order=tuple(sigma)
    )
    if fac.reassemble() != g:
        return None
    if sum(weights) != det.ord():
        return None
    return fac


def _negated_exponents(sigma, weights, n):
    e = [0] * n
    for k, c in enumerate(sigma):
        e[c] = -weights[k]
    return e


def _invert_unitriangular(right: LaurentMatrix, sigma) -> LaurentMatrix:
    """Exact inverse of the unit-diagonal triangular factor."""
    n = right.size
    zero = LaurentPoly.zero()
    inv = [[zero] * n for _ in range(n)]
    for col in range(n):
        # solve right * x = e_col by substitution in sigma order
        x = [zero] * n
        for i in range(n):
            acc = LaurentPoly.one() if sigma[i] == col else zero
            for j in range(i):
                r = right.entries[sigma[i]][sigma[j]]
                if not (r.is_zero or x[sigma[j]].is_zero):
                    acc = acc - r * x[sigma[j]]
            x[sigma[i]] = acc
        for i in range(n):
            inv[i][col] = x[i]
    return LaurentMatrix(inv)


# ---------------------------------------------------------------------------
# derived operations
# ---------------------------------------------------------------------------


def normalize(g: LaurentMatrix) -> LaurentMatrix:
    """Rescale by a power of t so the largest factorization weight is zero."""
    fac = factorize(g)
    lam0 = fac.weights[0]
    return g.shift(-lam0)


def pole_order_vector(v) -> int:
    """Pole order at t = 0 of a vector of Laurent polynomials.

    Positive means a pole, negative a zero of that order.
    """
    orders = [p.ord() for p in v if not p.is_zero]
    if not orders:
        raise ZeroLaurentError("pole order of the zero vector is undefined")
    return -min(orders)


def section_degree(g: LaurentMatrix, gamma) -> int:
    """Degree of the section associated with an arc gamma on the generic fiber.

    ``gamma`` is a vector of Laurent polynomials; a common power of t is
    cleared first so that gamma defines a point of projective space at
    t = 0.  The result is the pole order of g(t) * gamma(t).
    """
    if all(p.is_zero for p in gamma):
        raise ZeroLaurentError("gamma is identically zero")
    common = min(p.ord() for p in gamma if not p.is_zero)
    cleared = [p.shift(-common) for p in gamma]
    return pole_order_vector(g.apply(cleared))


def det_pole_order(g: LaurentMatrix) -> int:
    """Pole order at t = 0 of det g."""
    det = g.det()
    if det.is_zero:
        raise DegenerateLoopError("degenerate loop: determinant vanishes identically")
    return -det.ord()


# ---------------------------------------------------------------------------
# JSON interface:  {"size": n, "entries": [[[exp, num, den], ...], ...]}
# ---------------------------------------------------------------------------


def loop_from_json(obj) -> LaurentMatrix:
    if isinstance(obj, str):
        obj = json.loads(obj)
    size = int(obj["size"])
    flat = obj["entries"]
    if len(flat) != size * size:
        raise ValueError(
            f"expected {size * size} entries for a size-{size} loop, got {len(flat)}"
        )
    entries = [
        [LaurentPoly.from_triples(flat[i * size + j]) for j in range(size)]
        for i in range(size)
    ]
    return LaurentMatrix(entries)


def loop_to_json(g: LaurentMatrix) -> dict:
    return {
        "size": g.size,
        "entries": [p.to_triples() for row in g.entries for p in row],
    }
