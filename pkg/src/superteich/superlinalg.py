"""(2|1)x(2|1) supermatrices over the Grassmann algebra and the group OSp(1|2).

Entries are indexed row-major with the block layout::

    a      alpha  b
    gamma  f      beta
    c      delta  d

so positions (0,1), (1,0), (1,2), (2,1) are odd and the remaining five are
even.  ``J``, ``D_a``, ``Z_a``, the prime transformations ``P_theta^+/-`` and
the upside-down transformation ``Upsilon^chi = J D_sqrt(chi)`` are built by
:func:`make_special`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NonInvertibleError, ParityError
from .grassmann import DEFAULT_TOL, GrassmannNumber, as_grassmann, parse, to_text

ODD_POSITIONS = frozenset({(0, 1), (1, 0), (1, 2), (2, 1)})


class SuperMatrix:
    """Immutable 3x3 matrix of :class:`GrassmannNumber` entries."""

    __slots__ = ("n", "entries")

    def __init__(self, rows: Sequence[Sequence], n: int | None = None):
        if n is None:
            n = next(e.n for row in rows for e in row if isinstance(e, GrassmannNumber))
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("supermatrix must be 3x3")
        self.n = n
        self.entries = tuple(tuple(as_grassmann(e, n) for e in row) for row in rows)

    @classmethod
    def identity(cls, n: int) -> "SuperMatrix":
        return cls([[1, 0, 0], [0, 1, 0], [0, 0, 1]], n)

    def __getitem__(self, ij: tuple[int, int]) -> GrassmannNumber:
        i, j = ij
        return self.entries[i][j]

    # block names
    a = property(lambda s: s.entries[0][0])
    alpha = property(lambda s: s.entries[0][1])
    b = property(lambda s: s.entries[0][2])
    gamma = property(lambda s: s.entries[1][0])
    f = property(lambda s: s.entries[1][1])
    beta = property(lambda s: s.entries[1][2])
    c = property(lambda s: s.entries[2][0])
    delta = property(lambda s: s.entries[2][1])
    d = property(lambda s: s.entries[2][2])

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        return matmul(self, other)

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        return SuperMatrix([[self[i, j] + other[i, j] for j in range(3)] for i in range(3)], self.n)

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        return SuperMatrix([[self[i, j] - other[i, j] for j in range(3)] for i in range(3)], self.n)

    def __neg__(self) -> "SuperMatrix":
        return SuperMatrix([[-e for e in row] for row in self.entries], self.n)

    def scale(self, x) -> "SuperMatrix":
        """Left multiplication of every entry by an even scalar ``x``."""
        return SuperMatrix([[x * e for e in row] for row in self.entries], self.n)

    def max_abs(self) -> float:
        return max(e.max_abs() for row in self.entries for e in row)

    def isclose(self, other: "SuperMatrix", tol: float = DEFAULT_TOL) -> bool:
        return (self - other).max_abs() <= tol

    def body(self) -> np.ndarray:
        return np.array([[e.body for e in row] for row in self.entries])

    def has_parity_pattern(self) -> bool:
        for i in range(3):
            for j in range(3):
                e = self.entries[i][j]
                ok = e.is_odd() if (i, j) in ODD_POSITIONS else e.is_even()
                if not ok:
                    return False
        return True

    def is_lower_triangular(self, tol: float = 0.0) -> bool:
        return all(self[i, j].max_abs() <= tol for i, j in ((0, 1), (0, 2), (1, 2)))

    def to_strings(self) -> list[str]:
        """Row-major list of nine Grassmann serializations."""
        return [to_text(e) for row in self.entries for e in row]

    @classmethod
    def from_strings(cls, items: Sequence[str], n: int) -> "SuperMatrix":
        if len(items) != 9:
            raise ValueError("expected 9 entries")
        vals = [parse(s, n) for s in items]
        return cls([vals[0:3], vals[3:6], vals[6:9]], n)

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return self.n == other.n and all(
            self[i, j] == other[i, j] for i in range(3) for j in range(3)
        )

    __hash__ = None

    def __repr__(self) -> str:
        rows = "; ".join(" , ".join(to_text(e) for e in row) for row in self.entries)
        return f"SuperMatrix([{rows}])"


def _require_pattern(g: SuperMatrix) -> None:
    if not g.has_parity_pattern():
        raise ParityError("supermatrix violates the (2|1)x(2|1) parity pattern")


def matmul(g: SuperMatrix, h: SuperMatrix) -> SuperMatrix:
    G, H = g.entries, h.entries
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            row.append(G[i][0] * H[0][j] + G[i][1] * H[1][j] + G[i][2] * H[2][j])
        rows.append(row)
    return SuperMatrix(rows, g.n)


def product(mats: Iterable[SuperMatrix], n: int) -> SuperMatrix:
    """Ordered product ``m0 @ m1 @ ...`` (identity for an empty sequence)."""
    out = SuperMatrix.identity(n)
    for m in mats:
        out = out @ m
    return out


def supertranspose(g: SuperMatrix) -> SuperMatrix:
    _require_pattern(g)
    return SuperMatrix(
        [
            [g.a, g.gamma, g.c],
            [-g.alpha, g.f, -g.delta],
            [g.b, g.beta, g.d],
        ],
        g.n,
    )


def sdet(g: SuperMatrix) -> GrassmannNumber:
    """Berezinian ``det(A - B f^-1 C) / f``.

    ``A`` is the even 2x2 block ``(a b; c d)``, ``B = (alpha; delta)`` the odd
    column and ``C = (gamma, beta)`` the odd row.  Equals 1 on OSp(1|2).
    """
    finv = g.f.inverse()
    m00 = g.a - g.alpha * finv * g.gamma
    m01 = g.b - g.alpha * finv * g.beta
    m10 = g.c - g.delta * finv * g.gamma
    m11 = g.d - g.delta * finv * g.beta
    return finv * (m00 * m11 - m01 * m10)


def sdet_naive(g: SuperMatrix) -> GrassmannNumber:
    """``f^-1 det((a b; c d) + f^-1 (alpha gamma, alpha delta; beta gamma, beta delta))``.

    Pairs the odd entries differently from :func:`sdet`; the two agree when
    those products vanish (for instance on lower-triangular matrices) but not
    on general group elements.
    """
    finv = g.f.inverse()
    m00 = g.a + finv * (g.alpha * g.gamma)
    m01 = g.b + finv * (g.alpha * g.delta)
    m10 = g.c + finv * (g.beta * g.gamma)
    m11 = g.d + finv * (g.beta * g.delta)
    return finv * (m00 * m11 - m01 * m10)


def supertrace(g: SuperMatrix) -> GrassmannNumber:
    return g.a + g.d - g.f


str_ = supertrace


@dataclass(frozen=True)
class OspCheck:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


def osp_residual(g: SuperMatrix) -> float:
    J = make_special("J", n=g.n)
    return (supertranspose(g) @ J @ g - J).max_abs()


def is_osp(g: SuperMatrix, tol: float = DEFAULT_TOL) -> OspCheck:
    """``g^st J g == J`` coefficientwise within ``tol``; parity-pattern violations fail."""
    if not g.has_parity_pattern():
        return OspCheck(False, math.inf)
    r = osp_residual(g)
    return OspCheck(r < tol, r)


def project_sl2(g: SuperMatrix) -> np.ndarray:
    """Body projection ``f_#^{-1/2} (a_# b_#; c_# d_#)`` onto SL(2, R)."""
    fb = g.f.body
    if fb <= 0:
        raise NonInvertibleError(f"projection needs f with positive body, got {fb!r}")
    return np.array([[g.a.body, g.b.body], [g.c.body, g.d.body]]) / math.sqrt(fb)


def inverse(g: SuperMatrix) -> SuperMatrix:
    """Gauss-Jordan inverse over the Grassmann ring (pivots chosen by body magnitude)."""
    n = g.n
    A = [list(row) for row in g.entries]
    I = [[GrassmannNumber.scalar(1.0 if i == j else 0.0, n) for j in range(3)] for i in range(3)]
    for col in range(3):
        piv = max(range(col, 3), key=lambda r: abs(A[r][col].body))
        if abs(A[piv][col].body) < 1e-300:
            raise NonInvertibleError("supermatrix body is singular")
        A[col], A[piv] = A[piv], A[col]
        I[col], I[piv] = I[piv], I[col]
        pinv = A[col][col].inverse()
        A[col] = [pinv * x for x in A[col]]
        I[col] = [pinv * x for x in I[col]]
        for r in range(3):
            if r == col or A[r][col].masks.size == 0:
                continue
            m = A[r][col]
            A[r] = [x - m * y for x, y in zip(A[r], A[col])]
            I[r] = [x - m * y for x, y in zip(I[r], I[col])]
    return SuperMatrix(I, n)


def make_special(kind: str, param=None, n: int | None = None) -> SuperMatrix:
    """Named matrices: ``Identity``, ``J``, ``D``, ``Z``, ``P_plus``, ``P_minus``, ``Upsilon``.

    ``D`` and ``Upsilon`` take an even parameter with positive body, ``Z`` an
    even parameter with positive body or the literal ``-1`` (fermionic
    reflection), ``P_plus``/``P_minus`` an odd parameter.
    """
    if n is None:
        if isinstance(param, GrassmannNumber):
            n = param.n
        else:
            raise ValueError("generator count n is required for scalar parameters")
    k = kind.lower().replace("-", "_")
    if k in ("identity", "i"):
        return SuperMatrix.identity(n)
    if k == "j":
        return SuperMatrix([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], n)
    x = as_grassmann(param, n)
    if k == "d":
        if not x.is_even() or x.body <= 0:
            raise ParityError(f"D_a needs even a with positive body, got {x}")
        return SuperMatrix([[x, 0, 0], [0, 1, 0], [0, 0, x.inverse()]], n)
    if k == "z":
        if not x.is_even():
            raise ParityError(f"Z_a needs even a, got {x}")
        if x.body <= 0 and not x.isclose(GrassmannNumber.scalar(-1.0, n), 0.0):
            raise ParityError(f"Z_a needs a positive body or a = -1, got {x}")
        return SuperMatrix([[x, 0, 0], [0, x * x, 0], [0, 0, x]], n)
    if k in ("p_plus", "p+", "pplus"):
        if not x.is_odd():
            raise ParityError(f"P_theta needs odd theta, got {x}")
        return SuperMatrix([[-1, x, 1], [-x, 1, 0], [-1, 0, 0]], n)
    if k in ("p_minus", "p-", "pminus"):
        if not x.is_odd():
            raise ParityError(f"P_theta needs odd theta, got {x}")
        return SuperMatrix([[0, 0, -1], [0, 1, -x], [1, -x, -1]], n)
    if k in ("upsilon", "y"):
        if not x.is_even() or x.body <= 0:
            raise ParityError(f"Upsilon^chi needs even chi with positive body, got {x}")
        return make_special("J", n=n) @ make_special("D", x.sqrt(), n)
    raise ValueError(f"unknown special matrix kind {kind!r}")


# ---------------------------------------------------------------------------
# superconformal action on the super upper half-plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexGrassmann:
    """``re + i*im`` with Grassmann-valued real and imaginary parts."""

    re: GrassmannNumber
    im: GrassmannNumber

    @classmethod
    def lift(cls, x, n: int) -> "ComplexGrassmann":
        if isinstance(x, ComplexGrassmann):
            return x
        if isinstance(x, complex):
            return cls(GrassmannNumber.scalar(x.real, n), GrassmannNumber.scalar(x.imag, n))
        return cls(as_grassmann(x, n), GrassmannNumber.zero(x.n if isinstance(x, GrassmannNumber) else n))

    @property
    def n(self) -> int:
        return self.re.n

    def __add__(self, o):
        o = ComplexGrassmann.lift(o, self.n)
        return ComplexGrassmann(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = ComplexGrassmann.lift(o, self.n)
        return ComplexGrassmann(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return ComplexGrassmann(-self.re, -self.im)

    def __mul__(self, o):
        o = ComplexGrassmann.lift(o, self.n)
        return ComplexGrassmann(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __rmul__(self, o):
        o = ComplexGrassmann.lift(o, self.n)
        return o * self

    def inverse(self) -> "ComplexGrassmann":
        # only for even values, whose parts commute
        norm = self.re * self.re + self.im * self.im
        ninv = norm.inverse()
        return ComplexGrassmann(self.re * ninv, -(self.im * ninv))

    @property
    def body(self) -> complex:
        return complex(self.re.body, self.im.body)

    def max_abs(self) -> float:
        return max(self.re.max_abs(), self.im.max_abs())


@dataclass(frozen=True)
class SuperPoint:
    """Point ``(z, eta)`` of the super upper half-plane (``Im z_# > 0``)."""

    z: ComplexGrassmann
    eta: ComplexGrassmann

    @classmethod
    def make(cls, z, eta, n: int) -> "SuperPoint":
        return cls(ComplexGrassmann.lift(z, n), ComplexGrassmann.lift(eta, n))

    def in_upper_half_plane(self) -> bool:
        return self.z.im.body > 0

    def distance(self, other: "SuperPoint") -> float:
        return max((self.z - other.z).max_abs(), (self.eta - other.eta).max_abs())


def superconformal_action(g: SuperMatrix, p: SuperPoint) -> SuperPoint:
    """Fractional-linear superconformal transformation of ``p`` by ``g``.

    ``z -> (az+b)/(cz+d) + eta (gamma z + delta)/(cz+d)^2`` and
    ``eta -> (gamma z + delta)/(cz+d) + eta (1 + delta gamma / 2)/(cz+d)``.
    """
    z, eta = p.z, p.eta
    den = g.c * z + g.d
    if abs(den.body) < 1e-300:
        raise NonInvertibleError("cz + d has vanishing body")
    dinv = den.inverse()
    odd_num = g.gamma * z + g.delta
    z_new = (g.a * z + g.b) * dinv + eta * odd_num * dinv * dinv
    half = GrassmannNumber.one(g.n) + (g.delta * g.gamma).scale(0.5)
    eta_new = odd_num * dinv + eta * half * dinv
    return SuperPoint(z_new, eta_new)
