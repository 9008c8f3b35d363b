"""OSp(1|2) holonomy along fatgraph paths and monodromy around punctures.

Each step of a path contributes ``Z_eps @ Upsilon^chi @ P_theta^(+/-)`` and a
path's holonomy is the product of its steps read right to left, so the
first step is the rightmost factor.  Around a puncture the walk is
counter-clockwise with left turns, and the product is lower triangular::

    ( s0    0   0 )
    ( -s1   1   0 )
    ( -s3   s2  s0 )

with ``c_k = -eps_k sqrt(chi_k)`` and

* ``s0 = prod c_k``
* ``s1 = sum_k theta_k prod_{j<k} 1/c_j``
* ``s2 = sum_k theta_k prod_{j>=k} c_j = s0 * s1``
* ``s3 = sum_k prod_{j<k} 1/c_j prod_{j>=k} c_j
  - sum_{i<k} theta_i theta_k prod_{j<i} 1/c_j prod_{j>=k} c_j``.

A puncture is Ramond when ``s0 = +1`` and Neveu-Schwarz when ``s0 = -1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import superlinalg as sl
from . import surface as sf
from . import teich
from .errors import CrossRatioError, NormalFormError, PunctureTypeError, RankDeficiencyError
from .grassmann import DEFAULT_TOL, GrassmannNumber


class PunctureType(str, enum.Enum):
    NS = "NS"
    RAMOND = "Ramond"


LEFT, RIGHT = 1, -1


@dataclass(frozen=True)
class PathStep:
    eps: int
    chi: GrassmannNumber
    theta: GrassmannNumber
    turn: int = LEFT
    edge: int | None = None


def turn_factor(eps: int, chi: GrassmannNumber, theta: GrassmannNumber, turn: int = LEFT) -> sl.SuperMatrix:
    if eps not in (1, -1) or turn not in (LEFT, RIGHT):
        raise ValueError("eps and turn must be +1 or -1")
    n = chi.n
    P = sl.make_special("P_plus" if turn == LEFT else "P_minus", theta, n)
    return sl.make_special("Z", float(eps), n) @ sl.make_special("Upsilon", chi, n) @ P


def path_holonomy(steps: Sequence[PathStep], n: int) -> sl.SuperMatrix:
    out = sl.SuperMatrix.identity(n)
    for s in steps:
        out = turn_factor(s.eps, s.chi, s.theta, s.turn) @ out
    return out


def fan_steps(fd: teich.FanData) -> list[PathStep]:
    return [PathStep(e, x, th, LEFT) for e, x, th in zip(fd.eps, fd.chi, fd.theta)]


@dataclass(frozen=True)
class ClosedForm:
    star0: GrassmannNumber
    star1: GrassmannNumber
    star2: GrassmannNumber
    star3: GrassmannNumber
    sign0: int

    def matrix(self) -> sl.SuperMatrix:
        n = self.star0.n
        return sl.SuperMatrix(
            [[self.star0, 0, 0], [-self.star1, 1, 0], [-self.star3, self.star2, self.star0]], n
        )


def _c_factors(fd_chi, fd_eps):
    return [x.sqrt().scale(-float(e)) for x, e in zip(fd_chi, fd_eps)]


def closed_form(chi: Sequence[GrassmannNumber], theta: Sequence[GrassmannNumber], eps: Sequence[int],
                tol: float = DEFAULT_TOL) -> ClosedForm:
    """Closed-form entries of the puncture monodromy (see module docstring)."""
    m = len(chi)
    if m == 0:
        raise ValueError("empty fan")
    n = chi[0].n
    one = GrassmannNumber.one(n)
    prod = one
    scale = 1.0
    for x in chi:
        prod = prod * x
        scale *= max(1.0, x.max_abs())
    # the product telescopes exactly, so only rounding can move it off 1
    if (prod - 1.0).max_abs() > tol * scale:
        raise CrossRatioError(f"cross ratios multiply to {prod}, not 1")
    c = _c_factors(chi, eps)
    cinv = [x.inverse() for x in c]
    # pre[k] = prod_{j<k} 1/c_j, suf[k] = prod_{j>=k} c_j
    pre = [one]
    for x in cinv:
        pre.append(pre[-1] * x)
    suf = [one] * (m + 1)
    for k in range(m - 1, -1, -1):
        suf[k] = c[k] * suf[k + 1]
    star0 = suf[0]
    star1 = GrassmannNumber.zero(n)
    star2 = GrassmannNumber.zero(n)
    star3 = GrassmannNumber.zero(n)
    for k in range(m):
        star1 = star1 + theta[k] * pre[k]
        star2 = star2 + theta[k] * suf[k]
        star3 = star3 + pre[k] * suf[k]
    for k in range(m):
        inner = GrassmannNumber.zero(n)
        for i in range(k):
            inner = inner + theta[i] * pre[i]
        star3 = star3 - inner * theta[k] * suf[k]
    sign0 = int(math.copysign(1, math.prod(-e for e in eps)))
    return ClosedForm(star0, star1, star2, star3, sign0)


def star3_naive(chi, theta, eps) -> GrassmannNumber:
    """Third closed-form entry with the quadratic odd term added and weighted by ``pre(k) suf(k)``.

    Kept for comparison only: it disagrees with the matrix product whenever
    two odd parameters are nonzero.
    """
    m = len(chi)
    n = chi[0].n
    c = _c_factors(chi, eps)
    cinv = [x.inverse() for x in c]
    one = GrassmannNumber.one(n)

    def pre(k):
        out = one
        for x in cinv[:k]:
            out = out * x
        return out

    def suf(k):
        out = one
        for x in c[k:]:
            out = out * x
        return out

    total = GrassmannNumber.zero(n)
    for j in range(m):
        total = total + pre(j) * suf(j)
    for j in range(m):
        for i in range(j):
            total = total + theta[i] * theta[j] * pre(j) * suf(j)
    return total


# ---------------------------------------------------------------------------
# monodromy reports
# ---------------------------------------------------------------------------

@dataclass
class MonodromyReport:
    puncture: int
    fan_length: int
    matrix: sl.SuperMatrix
    star0: GrassmannNumber
    star1: GrassmannNumber
    star2: GrassmannNumber
    star3: GrassmannNumber
    sign0: int
    puncture_type: PunctureType
    closed_form_error: float
    chi_residual: float
    aligned_steps: int
    eps: tuple[int, ...] = ()
    chi: tuple[GrassmannNumber, ...] = ()
    triangles: tuple[int, ...] = ()
    agrees: bool = True

    @property
    def constraint_residual(self) -> GrassmannNumber:
        return self.star1


def puncture_monodromy(t: sf.Triangulation, coords: teich.DecoratedCoords, o: Sequence[int], puncture: int,
                       tol: float = DEFAULT_TOL, fan: sf.PunctureFan | None = None) -> MonodromyReport:
    """Brute-force product and closed form for the loop around ``puncture``."""
    fan = sf.puncture_fan(t, puncture) if fan is None else fan
    fd = teich.fan_data(t, coords, fan, o)
    mat = path_holonomy(fan_steps(fd), coords.n)
    cf = closed_form(fd.chi, fd.theta, fd.eps, tol=max(tol, 1e-9))
    err = (mat - cf.matrix()).max_abs()
    ptype = PunctureType.RAMOND if cf.sign0 > 0 else PunctureType.NS
    return MonodromyReport(
        puncture=puncture,
        fan_length=len(fan),
        matrix=mat,
        star0=cf.star0,
        star1=cf.star1,
        star2=cf.star2,
        star3=cf.star3,
        sign0=cf.sign0,
        puncture_type=ptype,
        closed_form_error=err,
        chi_residual=teich.chi_product_residual(fd),
        aligned_steps=sum(1 for e in fd.eps if e == -1),
        eps=fd.eps,
        chi=fd.chi,
        triangles=fd.triangles,
        agrees=err <= tol,
    )


def all_monodromies(t, coords, o, tol: float = DEFAULT_TOL) -> list[MonodromyReport]:
    return [puncture_monodromy(t, coords, o, p, tol) for p in range(t.num_punctures)]


def classify(r: MonodromyReport, tol: float = DEFAULT_TOL) -> PunctureType:
    """NS/Ramond from the sign of s0, cross-checked against the projected trace and the fan parity."""
    by_sign = PunctureType.RAMOND if r.sign0 > 0 else PunctureType.NS
    by_star = PunctureType.RAMOND if r.star0.body > 0 else PunctureType.NS
    tr = float(np.trace(sl.project_sl2(r.matrix)))
    if abs(abs(tr) - 2.0) > tol:
        raise NormalFormError(f"puncture {r.puncture}: projected trace {tr} is not +-2")
    by_trace = PunctureType.RAMOND if tr > 0 else PunctureType.NS
    by_parity = PunctureType.RAMOND if (r.fan_length - r.aligned_steps) % 2 == 0 else PunctureType.NS
    if not by_sign == by_star == by_trace == by_parity:
        raise NormalFormError(
            f"puncture {r.puncture}: inconsistent classification "
            f"(s0 sign {by_sign.value}, s0 value {by_star.value}, trace {by_trace.value}, parity {by_parity.value})"
        )
    return by_sign


def ramond_constraint(fd: teich.FanData, tol: float = DEFAULT_TOL) -> GrassmannNumber:
    """Left-hand side ``s1`` of the linear Ramond constraint ``s1 = 0``.

    Also evaluates the ``s0``-multiplied form ``sum theta_k prod_{j>=k} c_j``
    and checks it equals ``s0 * s1``.
    """
    cf = closed_form(fd.chi, fd.theta, fd.eps, tol=max(tol, 1e-9))
    if cf.sign0 < 0:
        raise PunctureTypeError(f"puncture {fd.puncture} is NS; its monodromy constraint holds automatically")
    alt = _alternating_form(fd)
    if (alt - cf.star1).max_abs() > max(tol, 1e-9) * max(1.0, cf.star1.max_abs()):
        raise NormalFormError("expanded alternating form disagrees with s1")
    if (cf.star2 - cf.star0 * cf.star1).max_abs() > max(tol, 1e-9) * max(1.0, cf.star1.max_abs()):
        raise NormalFormError("s0-multiplied form is not proportional to s1")
    return cf.star1


def _alternating_form(fd: teich.FanData) -> GrassmannNumber:
    """``theta_1 - theta_2 eps_1/sqrt(chi_1) + theta_3 eps_1 eps_2/sqrt(chi_1 chi_2) - ...``."""
    n = fd.chi[0].n
    total = GrassmannNumber.zero(n)
    weight = GrassmannNumber.one(n)
    for k, th in enumerate(fd.theta):
        total = total + th * weight
        weight = weight * fd.chi[k].sqrt().inverse().scale(-float(fd.eps[k]))
    return total


def constraint_weights(fd: teich.FanData, num_triangles: int) -> list[GrassmannNumber]:
    """Even weight of each triangle's mu in ``s1`` (repeated visits add up)."""
    n = fd.chi[0].n
    w = [GrassmannNumber.zero(n) for _ in range(num_triangles)]
    c = _c_factors(fd.chi, fd.eps)
    pre = GrassmannNumber.one(n)
    for k, tri in enumerate(fd.triangles):
        w[tri] = w[tri] + pre
        pre = pre * c[k].inverse()
    return w


# ---------------------------------------------------------------------------
# conjugation to the standard form
# ---------------------------------------------------------------------------

def conjugate_to_standard(g: sl.SuperMatrix, tol: float = DEFAULT_TOL) -> sl.SuperMatrix:
    """Lower-triangular ``U`` with ``U g U^-1 = (+-1 0 0; 0 1 0; B 0 +-1)``.

    ``g`` must have the puncture normal form ``(+-1 0 0; theta 1 0; B phi +-1)``
    with ``phi = -+theta``.  For diagonal ``-1`` (NS) this is
    ``U = (1 0 0; theta/2 1 0; 0 -theta/2 1)``.  For diagonal ``+1`` (Ramond)
    a lower-triangular conjugation exists only when ``theta = 0``.
    """
    n = g.n
    if not g.is_lower_triangular(tol):
        raise NormalFormError("monodromy is not lower triangular")
    s = g.a.body
    if abs(abs(s) - 1.0) > tol or not g.a.isclose(GrassmannNumber.scalar(s, n), tol) or not g.d.isclose(g.a, tol):
        raise NormalFormError("diagonal entries are not a common +-1")
    if not g.f.isclose(GrassmannNumber.one(n), tol):
        raise NormalFormError("middle diagonal entry is not 1")
    theta = g.gamma
    sign = 1.0 if s > 0 else -1.0
    if not g.delta.isclose(theta.scale(-sign), tol):
        raise NormalFormError("odd entries violate phi = -+theta")
    if sign > 0:
        if theta.max_abs() > tol:
            raise NormalFormError(
                "Ramond monodromy with nonzero odd entry is not conjugate to the standard form "
                f"by a puncture-fixing element (theta = {theta})"
            )
        return sl.SuperMatrix.identity(n)
    half = theta.scale(0.5)
    return sl.SuperMatrix([[1, 0, 0], [half, 1, 0], [0, -half, 1]], n)


def is_standard_form(g: sl.SuperMatrix, tol: float = DEFAULT_TOL) -> bool:
    n = g.n
    return (
        g.is_lower_triangular(tol)
        and g.gamma.max_abs() <= tol
        and g.delta.max_abs() <= tol
        and g.f.isclose(GrassmannNumber.one(n), tol)
        and g.a.isclose(g.d, tol)
        and abs(abs(g.a.body) - 1.0) <= tol
        and (g.a - g.a.body).max_abs() <= tol
    )


# ---------------------------------------------------------------------------
# imposing the Ramond constraints
# ---------------------------------------------------------------------------

@dataclass
class ConstraintReport:
    coords: teich.DecoratedCoords
    rank: int
    n_ramond: int
    n_ns: int
    ramond_punctures: list[int]
    pivots: dict[int, int]  # Ramond puncture -> eliminated triangle
    substitutions: dict[int, dict[int, GrassmannNumber]]  # pivot triangle -> {free triangle: weight}
    free_odd: int
    expected_free_odd: int
    residuals: dict[int, float] = field(default_factory=dict)

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n_ramond


def constraint_system(t, coords, o, tol: float = DEFAULT_TOL):
    """Rows of even weights, one per Ramond puncture, acting on the vector of mu-invariants."""
    rows, ramond, ns = [], [], []
    for p in range(t.num_punctures):
        fan = sf.puncture_fan(t, p)
        fd = teich.fan_data(t, coords, fan, o)
        cf = closed_form(fd.chi, fd.theta, fd.eps, tol=max(tol, 1e-9))
        if cf.sign0 > 0:
            ramond.append(p)
            rows.append(constraint_weights(fd, t.num_triangles))
        else:
            ns.append(p)
    return rows, ramond, ns


def impose_constraints(t: sf.Triangulation, coords: teich.DecoratedCoords, o: Sequence[int],
                       tol: float = DEFAULT_TOL, pivot_tol: float = 1e-9) -> ConstraintReport:
    """Solve all Ramond constraints jointly by eliminating one mu per Ramond puncture.

    Gauss-Jordan elimination over the even Grassmann ring with partial
    pivoting on body magnitude.  Each pivot triangle's mu is replaced by the
    combination of free mu-invariants that makes every ``s1`` vanish.
    Raises :class:`RankDeficiencyError` when a Ramond row has no usable pivot.
    """
    n = coords.n
    F = t.num_triangles
    rows, ramond, ns = constraint_system(t, coords, o, tol)
    A = [list(r) for r in rows]
    pivots_col: list[int] = []
    pivot_row_of: dict[int, int] = {}
    r = 0
    deficient = []
    for i in range(len(A)):
        # choose the largest body in row r among unused columns
        best, best_val = None, pivot_tol
        for col in range(F):
            if col in pivot_row_of:
                continue
            v = abs(A[r][col].body)
            if v > best_val:
                best, best_val = col, v
        if best is None:
            deficient.append(ramond[i])
            A.pop(r)
            continue
        inv = A[r][best].inverse()
        A[r] = [inv * x for x in A[r]]
        for rr in range(len(A)):
            if rr != r and A[rr][best].masks.size:
                m = A[rr][best]
                A[rr] = [x - m * y for x, y in zip(A[rr], A[r])]
        pivot_row_of[best] = r
        pivots_col.append(best)
        r += 1
    if deficient:
        raise RankDeficiencyError(
            f"Ramond constraints at punctures {deficient} are dependent or have no pivot with nonzero body"
        )
    rank = len(pivots_col)
    free = [col for col in range(F) if col not in pivot_row_of]
    subs: dict[int, dict[int, GrassmannNumber]] = {}
    mu = list(coords.mu)
    for col in pivots_col:
        row = A[pivot_row_of[col]]
        weights = {fcol: -row[fcol] for fcol in free if row[fcol].masks.size}
        subs[col] = weights
        val = GrassmannNumber.zero(n)
        for fcol, w in weights.items():
            val = val + w * coords.mu[fcol]
        mu[col] = val
    new_coords = coords.with_mu(mu)
    pivots = {p: col for p, col in zip(ramond, pivots_col)}
    residuals = {}
    for p in ramond:
        rep = puncture_monodromy(t, new_coords, o, p, tol)
        residuals[p] = rep.star1.max_abs()
    expected = 4 * t.genus - 4 + 2 * len(ns) + len(ramond)
    return ConstraintReport(new_coords, rank, len(ramond), len(ns), ramond, pivots, subs, F - rank, expected, residuals)
