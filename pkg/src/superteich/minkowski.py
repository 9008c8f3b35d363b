"""Super Minkowski space R^{2,1|2}, its light cone, and the OSp(1|2) action on it.

A point ``(x1, x2, y | phi, theta)`` together with an even parameter ``c``
is stored as the matrix::

    ( x1     phi    y - c )
    ( phi    c      theta )
    ( y + c  theta  x2    )

and ``g`` acts by ``M -> g M g^st``.  This is a left action
(``g.(h.A) = (g h).A``) and it preserves :func:`inner`.  Light-cone points
have ``c = 0``.  In this convention, for a standard triple ``A, B, C`` with
odd parameter ``phi``, ``P_phi^+`` sends ``(B, C, A)`` onto ``(A, B, C)``,
so it moves the standard position from ``ABC`` to ``BCA``.  Likewise
``Upsilon^chi`` sends ``(C, D, A)`` of a quadrilateral ``ABCD`` with cross
ratio ``chi`` into standard position.  Lower-triangular elements fix the
ray of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import superlinalg as sl
from .errors import NonInvertibleError, ParityError
from .grassmann import DEFAULT_TOL, GrassmannNumber, as_grassmann, parse, to_text


@dataclass(frozen=True)
class SuperVector:
    x1: GrassmannNumber
    x2: GrassmannNumber
    y: GrassmannNumber
    phi: GrassmannNumber
    theta: GrassmannNumber

    def __post_init__(self):
        for name in ("x1", "x2", "y"):
            if not getattr(self, name).is_even():
                raise ParityError(f"{name} must be even")
        for name in ("phi", "theta"):
            if not getattr(self, name).is_odd():
                raise ParityError(f"{name} must be odd")

    @classmethod
    def make(cls, x1, x2, y, phi=0.0, theta=0.0, n: int = 0) -> "SuperVector":
        vals = (x1, x2, y, phi, theta)
        if n == 0:
            n = max((v.n for v in vals if isinstance(v, GrassmannNumber)), default=0)
        return cls(*(as_grassmann(v, n) for v in vals))

    @property
    def n(self) -> int:
        return self.x1.n

    def slots(self) -> tuple[GrassmannNumber, ...]:
        return (self.x1, self.x2, self.y, self.phi, self.theta)

    def scale(self, r) -> "SuperVector":
        r = as_grassmann(r, self.n)
        return SuperVector(*(r * s for s in self.slots()))

    def __add__(self, other: "SuperVector") -> "SuperVector":
        return SuperVector(*(a + b for a, b in zip(self.slots(), other.slots())))

    def __sub__(self, other: "SuperVector") -> "SuperVector":
        return SuperVector(*(a - b for a, b in zip(self.slots(), other.slots())))

    def max_abs(self) -> float:
        return max(s.max_abs() for s in self.slots())

    def isclose(self, other: "SuperVector", tol: float = DEFAULT_TOL) -> bool:
        return (self - other).max_abs() <= tol

    def to_strings(self) -> list[str]:
        return [to_text(s) for s in self.slots()]

    @classmethod
    def from_strings(cls, items, n: int) -> "SuperVector":
        if len(items) != 5:
            raise ValueError("a super vector has five slots")
        return cls(*(parse(s, n) for s in items))


def e0(n: int) -> SuperVector:
    return SuperVector.make(1, 0, 0, n=n)


def e_theta(theta: GrassmannNumber, sign: int = 1) -> SuperVector:
    return SuperVector.make(1, 0, 0, 0, theta.scale(sign), n=theta.n)


def standard_triple(n: int, phi=0.0, r=1.0, t=1.0, s=1.0) -> tuple[SuperVector, SuperVector, SuperVector]:
    """``r(0,1,0|0,0)``, ``t(1,1,1|phi,phi)``, ``s(1,0,0|0,0)``."""
    phi = as_grassmann(phi, n)
    A = SuperVector.make(0, 1, 0, n=n).scale(r)
    B = SuperVector.make(1, 1, 1, phi, phi, n=n).scale(t)
    C = SuperVector.make(1, 0, 0, n=n).scale(s)
    return A, B, C


def inner(A: SuperVector, B: SuperVector) -> GrassmannNumber:
    """``(x1 x2' + x1' x2)/2 - y y' + phi theta' + phi' theta``."""
    return (
        (A.x1 * B.x2 + B.x1 * A.x2).scale(0.5)
        - A.y * B.y
        + A.phi * B.theta
        + B.phi * A.theta
    )


def lambda_length(A: SuperVector, B: SuperVector) -> GrassmannNumber:
    return inner(A, B).sqrt()


def is_light_cone(A: SuperVector, tol: float = DEFAULT_TOL) -> bool:
    """On the cone and in its closed upper nappe: ``x1, x2 >= 0`` by body, not both zero."""
    if inner(A, A).max_abs() > tol:
        return False
    b1, b2 = A.x1.body, A.x2.body
    return b1 >= -tol and b2 >= -tol and max(b1, b2) > tol


# ---------------------------------------------------------------------------
# matrix form and the group action
# ---------------------------------------------------------------------------

def to_matrix(A: SuperVector, c=0.0) -> sl.SuperMatrix:
    c = as_grassmann(c, A.n)
    if not c.is_even():
        raise ParityError("c must be even")
    return sl.SuperMatrix(
        [[A.x1, A.phi, A.y - c], [A.phi, c, A.theta], [A.y + c, A.theta, A.x2]], A.n
    )


def from_matrix(M: sl.SuperMatrix, tol: float = DEFAULT_TOL) -> tuple[SuperVector, GrassmannNumber]:
    """Inverse of :func:`to_matrix`; raises ParityError if ``M`` has the wrong shape."""
    c = M[1, 1]
    y = (M[0, 2] + M[2, 0]).scale(0.5)
    half_diff = (M[2, 0] - M[0, 2]).scale(0.5)
    if not (half_diff - c).max_abs() <= tol * max(1.0, M.max_abs()):
        raise ParityError("matrix does not have the point-matrix pattern (corner entries vs centre)")
    if not ((M[0, 1] - M[1, 0]).max_abs() <= tol * max(1.0, M.max_abs())
            and (M[1, 2] - M[2, 1]).max_abs() <= tol * max(1.0, M.max_abs())):
        raise ParityError("matrix does not have the point-matrix pattern (odd entries)")
    return SuperVector(M[0, 0], M[2, 2], y, M[0, 1], M[1, 2]), c


def adjoint_act(g: sl.SuperMatrix, A: SuperVector, c=0.0, tol: float = DEFAULT_TOL) -> tuple[SuperVector, GrassmannNumber]:
    """``g . M = g M g^st``; returns the new point and its ``c``."""
    M = g @ to_matrix(A, c) @ sl.supertranspose(g)
    return from_matrix(M, tol)


def act(g: sl.SuperMatrix, A: SuperVector, tol: float = DEFAULT_TOL) -> SuperVector:
    return adjoint_act(g, A, 0.0, tol)[0]


# ---------------------------------------------------------------------------
# standard position
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StandardPositionData:
    r: GrassmannNumber
    t: GrassmannNumber
    s: GrassmannNumber
    phi: GrassmannNumber


def _standard_residuals(A: SuperVector, B: SuperVector, C: SuperVector) -> tuple[list, list]:
    """Even and odd quantities that vanish exactly on a standard triple."""
    even = [A.x1, A.y, C.x2, C.y, B.x1 - B.x2, B.x1 - B.y]
    odd = [A.phi, A.theta, C.phi, C.theta, B.phi - B.theta]
    return even, odd


def is_standard_position(A: SuperVector, B: SuperVector, C: SuperVector,
                         tol: float = DEFAULT_TOL) -> StandardPositionData | bool:
    """Match ``A = r(0,1,0|0,0)``, ``B = t(1,1,1|phi,phi)``, ``C = s(1,0,0|0,0)``; False on mismatch."""
    even, odd = _standard_residuals(A, B, C)
    if max(x.max_abs() for x in even + odd) > tol:
        return False
    r, t, s = A.x2, B.x1, C.x1
    if min(r.body, t.body, s.body) <= tol:
        return False
    return StandardPositionData(r, t, s, t.inverse() * B.phi)


def _body_ray(A: SuperVector) -> np.ndarray:
    """``v`` with ``v v^T = (x1 y; y x2)`` at body level."""
    x1, x2, y = A.x1.body, A.x2.body, A.y.body
    v = np.array([np.sqrt(max(x1, 0.0)), np.sqrt(max(x2, 0.0))])
    if y < 0:
        v[1] = -v[1]
    return v


def _even_lift(h: np.ndarray, n: int) -> sl.SuperMatrix:
    return sl.SuperMatrix([[h[0, 0], 0, h[0, 1]], [0, 1, 0], [h[1, 0], 0, h[1, 1]]], n)


def _body_standardizer(A: SuperVector, B: SuperVector, C: SuperVector) -> np.ndarray:
    vA, vB, vC = (_body_ray(X) for X in (A, B, C))
    perp = lambda v: np.array([-v[1], v[0]])
    wA, wC = perp(vA), perp(vC)  # first row kills vA, second row kills vC
    D = wA[0] * wC[1] - wA[1] * wC[0]
    p, q = wA @ vB, wC @ vB
    if min(abs(D), abs(p), abs(q)) < 1e-12 * max(1.0, np.abs(np.c_[vA, vB, vC]).max() ** 2):
        raise NonInvertibleError("degenerate triple: two light-cone rays are proportional")
    sign = 1.0 if p * D / q > 0 else -1.0
    alpha = 1.0 / np.sqrt(sign * p * D / q)
    beta = sign * alpha * p / q
    return np.array([alpha * wA, beta * wC])


def _correction(params: list[GrassmannNumber], n: int) -> sl.SuperMatrix:
    """OSp element near the identity: sl(2) block times odd lower and upper factors."""
    e1, e2, e3, o1, o2 = params
    one = GrassmannNumber.one(n)
    a = one + e1
    d = (one + e2 * e3) * a.inverse()
    even = sl.SuperMatrix([[a, 0, e2], [0, 1, 0], [e3, 0, d]], n)
    lower = sl.SuperMatrix([[1, 0, 0], [o1, 1, 0], [0, -o1, 1]], n)
    upper = sl.SuperMatrix([[1, o2, 0], [0, 1, o2], [0, 0, 1]], n)
    return even @ lower @ upper


def _apply_all(g, triple, tol):
    return tuple(act(g, X, tol=max(tol, 1e-6)) for X in triple)


def _jacobians(triple_body) -> tuple[np.ndarray, np.ndarray]:
    """Exact first-order response of the residuals at a body-standard triple."""
    # an even probe g1 g2 and an odd probe g1 carry exact derivatives
    probe_even = GrassmannNumber.generator(1, 2) * GrassmannNumber.generator(2, 2)
    probe_odd = GrassmannNumber.generator(1, 2)
    zero = GrassmannNumber.zero(2)
    triple = tuple(SuperVector.make(*(s.body for s in X.slots()[:3]), n=2) for X in triple_body)
    Je = np.zeros((6, 3))
    Jo = np.zeros((5, 2))
    for k in range(3):
        p = [zero] * 5
        p[k] = probe_even
        ev, _ = _standard_residuals(*_apply_all(_correction(p, 2), triple, 1e-6))
        Je[:, k] = [x.coefficient(1, 2) for x in ev]
    for k in range(2):
        p = [zero] * 5
        p[3 + k] = probe_odd
        _, od = _standard_residuals(*_apply_all(_correction(p, 2), triple, 1e-6))
        Jo[:, k] = [x.coefficient(1) for x in od]
    return Je, Jo


def _solve_masks(J: np.ndarray, residuals: list[GrassmannNumber], n: int) -> list[GrassmannNumber]:
    """Least-squares ``J x = -residual`` independently for every basis monomial."""
    masks = sorted({int(m) for r in residuals for m in r.masks})
    cols = len(J[0])
    out = [dict() for _ in range(cols)]
    pinv = np.linalg.pinv(J)
    for m in masks:
        rhs = np.array([_coeff(r, m) for r in residuals])
        x = -pinv @ rhs
        for k in range(cols):
            if x[k] != 0.0:
                out[k][m] = x[k]
    return [GrassmannNumber.from_masks(n, list(d.keys()), list(d.values())) for d in out]


def _coeff(x: GrassmannNumber, mask: int) -> float:
    hit = np.nonzero(x.masks == np.uint64(mask))[0]
    return float(x.coeffs[hit[0]]) if hit.size else 0.0


def standardize_triple(A: SuperVector, B: SuperVector, C: SuperVector,
                       tol: float = DEFAULT_TOL) -> sl.SuperMatrix:
    """OSp element taking ``(A, B, C)`` to standard position.

    The body is fixed first by the unique PSL(2,R) element sending the three
    body rays to the standard ones.  The nilpotent remainder is removed by
    Newton steps on a five-parameter neighbourhood of the identity; with the
    body already exact every step gains one order in the generators, so the
    loop ends after at most ``n + 1`` steps.
    """
    n = A.n
    for X in (A, B, C):
        if not is_light_cone(X, tol=max(tol, 1e-9) * max(1.0, X.max_abs() ** 2)):
            raise ValueError("triple must lie on the light cone")
    h = _body_standardizer(A, B, C)
    g = _even_lift(h, n)
    cur = _apply_all(g, (A, B, C), tol)
    Je, Jo = _jacobians(cur)
    for _ in range(n + 3):
        even, odd = _standard_residuals(*cur)
        if max(x.max_abs() for x in even + odd) <= tol * 1e-3:
            break
        de = _solve_masks(Je, even, n)
        do = _solve_masks(Jo, odd, n)
        step = _correction(de + do, n)
        g = step @ g
        cur = _apply_all(g, (A, B, C), tol)
    return g


def standard_position_residual(g: sl.SuperMatrix, A: SuperVector, B: SuperVector, C: SuperVector) -> float:
    even, odd = _standard_residuals(*_apply_all(g, (A, B, C), 1e-6))
    return max(x.max_abs() for x in even + odd)
