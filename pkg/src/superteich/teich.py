"""Decorated super Teichmueller coordinates: lambda-lengths, mu-invariants, super Ptolemy flips."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import surface as sf
from .errors import ParityError
from .grassmann import DEFAULT_TOL, GrassmannNumber, as_grassmann


@dataclass(frozen=True)
class DecoratedCoords:
    """One even lambda-length per edge and one odd mu-invariant per triangle.

    The mu-invariants are only defined up to one overall sign;
    :meth:`canonical` picks the representative whose first nonzero
    coefficient is positive.
    """

    n: int
    lam: tuple[GrassmannNumber, ...]
    mu: tuple[GrassmannNumber, ...]

    def __post_init__(self):
        lam = tuple(as_grassmann(x, self.n) for x in self.lam)
        mu = tuple(as_grassmann(x, self.n) for x in self.mu)
        for e, x in enumerate(lam):
            if not x.is_even() or x.body <= 0:
                raise ParityError(f"lambda-length of edge {e} must be even with positive body, got {x}")
        for t, x in enumerate(mu):
            if not x.is_odd():
                raise ParityError(f"mu-invariant of triangle {t} must be odd, got {x}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_reals(cls, lam: Sequence[float], mu_coeffs: Sequence[float], n: int | None = None) -> "DecoratedCoords":
        """Real lambda-lengths and ``mu_t = m_t * g_{t+1}`` (the default one-generator-per-triangle layout)."""
        n = len(mu_coeffs) if n is None else n
        mu = [GrassmannNumber.generator(t + 1, n, m) if m else GrassmannNumber.zero(n) for t, m in enumerate(mu_coeffs)]
        return cls(n, tuple(GrassmannNumber.scalar(x, n) for x in lam), tuple(mu))

    def mu_matrix(self) -> np.ndarray:
        """Coefficients of each mu on the generators: row = triangle, column = generator."""
        out = np.zeros((len(self.mu), self.n))
        for t, x in enumerate(self.mu):
            for mask, c in zip(x.masks, x.coeffs):
                m = int(mask)
                if m & (m - 1) == 0:  # linear term
                    out[t, m.bit_length() - 1] = c
        return out

    def is_linear(self) -> bool:
        """Whether every mu is a linear combination of generators (no cubic or higher terms)."""
        return all(int(np.max(x.grades(), initial=1)) <= 1 for x in self.mu)

    def with_mu(self, mu: Sequence[GrassmannNumber]) -> "DecoratedCoords":
        return DecoratedCoords(self.n, self.lam, tuple(mu))

    def negated(self) -> "DecoratedCoords":
        return self.with_mu([-x for x in self.mu])

    def canonical(self) -> "DecoratedCoords":
        for x in self.mu:
            if x.coeffs.size:
                return self if x.coeffs[0] > 0 else self.negated()
        return self

    def isclose(self, other: "DecoratedCoords", tol: float = DEFAULT_TOL, up_to_sign: bool = True) -> bool:
        if len(self.lam) != len(other.lam) or len(self.mu) != len(other.mu):
            return False
        if any(not x.isclose(y, tol) for x, y in zip(self.lam, other.lam)):
            return False
        if all(x.isclose(y, tol) for x, y in zip(self.mu, other.mu)):
            return True
        return up_to_sign and all(x.isclose(-y, tol) for x, y in zip(self.mu, other.mu))


@dataclass(frozen=True)
class QuadData:
    """Quadrilateral with diagonal ``e``: sides ``a, b, c, d`` in cyclic order, ``sigma`` below, ``theta`` above."""

    a: GrassmannNumber
    b: GrassmannNumber
    c: GrassmannNumber
    d: GrassmannNumber
    e: GrassmannNumber
    sigma: GrassmannNumber
    theta: GrassmannNumber


@dataclass(frozen=True)
class FlipResult:
    f: GrassmannNumber
    mu: GrassmannNumber
    nu: GrassmannNumber


def cross_ratio(q: QuadData) -> GrassmannNumber:
    return q.a * q.c * (q.b * q.d).inverse()


def ptolemy_flip(q: QuadData) -> FlipResult:
    """Super Ptolemy transformation.

    ``ef = (ac + bd)(1 + sigma theta sqrt(chi) / (1 + chi))``,
    ``nu = (sigma + theta sqrt(chi)) / sqrt(1 + chi)``,
    ``mu = (sigma sqrt(chi) - theta) / sqrt(1 + chi)`` with ``chi = ac/bd``.
    """
    chi = cross_ratio(q)
    rchi = chi.sqrt()
    one_chi = chi + 1.0
    r1 = one_chi.sqrt().inverse()
    f = q.e.inverse() * (q.a * q.c + q.b * q.d) * (1.0 + q.sigma * q.theta * rchi * one_chi.inverse())
    nu = (q.sigma + q.theta * rchi) * r1
    mu = (q.sigma * rchi - q.theta) * r1
    return FlipResult(f, mu, nu)


def reverse_quad(q: QuadData, r: FlipResult) -> QuadData:
    """Quadrilateral seen from the new diagonal after a flip, ready for the flip back.

    The cyclic labels become ``(d, a, b, c)``.  After a flip the left
    triangle stores nu and the right one stores ``-mu``; the new arrow points
    into the left triangle, so ``sigma' = nu`` and ``theta' = -mu``.
    """
    return QuadData(q.d, q.a, q.b, q.c, r.f, r.nu, -r.mu)


def double_flip(q: QuadData) -> QuadData:
    """Flip, then flip the new diagonal back; returns the restored quadrilateral data.

    The second flip leaves ``-mu''`` in the sigma triangle together with a
    reversed fatgraph vertex there; undoing that reversal gives ``mu''``,
    which is what is returned as sigma.
    """
    r1 = ptolemy_flip(q)
    r2 = ptolemy_flip(reverse_quad(q, r1))
    return QuadData(q.a, q.b, q.c, q.d, r2.f, r2.mu, r2.nu)


# ---------------------------------------------------------------------------
# surface-level operations
# ---------------------------------------------------------------------------

def quad_for_edge(t: sf.Triangulation, o: Sequence[int], coords: DecoratedCoords, e: int) -> tuple[QuadData, sf.FlipRecord]:
    rec = sf.flip_record(t, o, e)
    lam = coords.lam
    q = QuadData(lam[rec.a], lam[rec.b], lam[rec.c], lam[rec.d], lam[e], coords.mu[rec.sigma_tri], coords.mu[rec.theta_tri])
    return q, rec


@dataclass(frozen=True)
class FlipLogEntry:
    edge: int
    e: GrassmannNumber
    f: GrassmannNumber
    mu: GrassmannNumber
    nu: GrassmannNumber
    record: sf.FlipRecord


def flip_decorated(
    t: sf.Triangulation, o: Sequence[int], coords: DecoratedCoords, e: int
) -> tuple[sf.Triangulation, sf.Orientation, DecoratedCoords, FlipLogEntry]:
    """Flip edge ``e``: combinatorics and orientation from :func:`surface.flip`, coordinates from :func:`ptolemy_flip`."""
    q, rec = quad_for_edge(t, o, coords, e)
    res = ptolemy_flip(q)
    new_t, new_o, _ = sf.flip(t, o, e)
    lam = list(coords.lam)
    lam[e] = res.f
    mu = list(coords.mu)
    mu[rec.mu_tri] = -res.mu
    mu[rec.nu_tri] = res.nu
    return new_t, new_o, DecoratedCoords(coords.n, tuple(lam), tuple(mu)), FlipLogEntry(e, q.e, res.f, res.mu, res.nu, rec)


@dataclass(frozen=True)
class FanData:
    puncture: int
    chi: tuple[GrassmannNumber, ...]
    theta: tuple[GrassmannNumber, ...]
    eps: tuple[int, ...]
    triangles: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.chi)


def fan_data(t: sf.Triangulation, coords: DecoratedCoords, fan: sf.PunctureFan, o: Sequence[int]) -> FanData:
    """Cross ratios, odd parameters and orientation signs along a puncture fan.

    For corners ``k`` and ``k+1`` sharing the fan edge ``E_{k+1}``,
    ``chi_k = lam(O_k) lam(E_{k+2}) / (lam(E_k) lam(O_{k+1}))`` where ``E_k``
    is the entering edge and ``O_k`` the outer edge at corner ``k``.
    ``eps_k = -1`` when the step from corner ``k`` to ``k+1`` follows the
    fatgraph orientation, ``+1`` otherwise.
    """
    lam = coords.lam
    cs = fan.corners
    m = len(cs)
    chis, thetas, eps, tris = [], [], [], []
    for k in range(m):
        cur, nxt = cs[k], cs[(k + 1) % m]
        num = lam[cur.outer_edge] * lam[nxt.leaving_edge]
        den = lam[cur.entering_edge] * lam[nxt.outer_edge]
        chis.append(num * den.inverse())
        thetas.append(coords.mu[cur.triangle])
        aligned = sf.traversal_sign(t, o, (cur.triangle, cur.leaving_side)) == 1
        eps.append(-1 if aligned else 1)
        tris.append(cur.triangle)
    return FanData(fan.puncture, tuple(chis), tuple(thetas), tuple(eps), tuple(tris))


def chi_product_residual(fd: FanData) -> float:
    prod = GrassmannNumber.one(fd.chi[0].n)
    for x in fd.chi:
        prod = prod * x
    return (prod - 1.0).max_abs()


def gauge_equivalent(t: sf.Triangulation, o1: Sequence[int], c1: DecoratedCoords,
                     o2: Sequence[int], c2: DecoratedCoords, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``(o2, c2)`` is ``(o1, c1)`` after vertex reversals and an overall mu sign.

    Reversing the fatgraph at a triangle negates that triangle's mu.
    """
    rev = sf.reversal_set(t, o1, o2)
    if rev is None or len(c1.lam) != len(c2.lam):
        return False
    if any(not x.isclose(y, tol) for x, y in zip(c1.lam, c2.lam)):
        return False
    expect = [-x if k in rev else x for k, x in enumerate(c1.mu)]
    return c1.with_mu(expect).isclose(c2, tol, up_to_sign=True)


def same_decorated_point(t1: sf.Triangulation, o1: Sequence[int], c1: DecoratedCoords,
                         t2: sf.Triangulation, o2: Sequence[int], c2: DecoratedCoords,
                         tol: float = DEFAULT_TOL) -> bool:
    """Compare two decorated spin triangulations up to triangle relabelling and gauge."""
    for m in sf.triangle_matchings(t1, t2):
        o_back = sf.pull_back_orientation(t1, t2, o2, m)
        mu_back = [c2.mu[m[(tri, 0)][0]] for tri in range(t1.num_triangles)]
        if gauge_equivalent(t1, o1, c1, o_back, c2.with_mu(mu_back), tol):
            return True
    return False
