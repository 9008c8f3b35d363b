"""Constructors for standard and random triangulated surfaces with decorations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import surface as sf
from . import teich
from .grassmann import GrassmannNumber


def once_punctured_torus() -> sf.Triangulation:
    return sf.Triangulation(1, 1, ((0, 1, 2), (0, 1, 2)), ((0, 0, 0), (0, 0, 0)))


def thrice_punctured_sphere() -> sf.Triangulation:
    return sf.Triangulation(0, 3, ((0, 1, 2), (0, 2, 1)), ((0, 1, 2), (1, 0, 2)))


def polygon_surface(genus: int) -> sf.Triangulation:
    """One-punctured genus-``genus`` surface from a 4g-gon glued by ``a b a^-1 b^-1 ...``, fan-triangulated."""
    if genus < 1:
        raise ValueError("genus must be at least 1")
    m = 4 * genus
    # polygon side k runs from vertex k to vertex k+1; glue side 4j with 4j+2 reversed, 4j+1 with 4j+3
    side_edge = {}
    for j in range(genus):
        side_edge[4 * j] = side_edge[4 * j + 2] = 2 * j
        side_edge[4 * j + 1] = side_edge[4 * j + 3] = 2 * j + 1
    next_id = 2 * genus
    diag = {}  # diagonal from vertex 0 to vertex k
    for k in range(2, m - 1):
        diag[k] = next_id
        next_id += 1

    def chord(k):  # edge from vertex 0 to vertex k
        if k == 1:
            return side_edge[0]
        if k == m - 1:
            return side_edge[m - 1]
        return diag[k]

    triangles = []
    for k in range(1, m - 1):
        # vertices (0, k, k+1): sides 0->k, k->k+1, k+1->0
        triangles.append((chord(k), side_edge[k], chord(k + 1)))
    corners = tuple((0, 0, 0) for _ in triangles)
    return sf.Triangulation(genus, 1, tuple(triangles), corners)


def stellar_subdivision(t: sf.Triangulation, tri: int) -> sf.Triangulation:
    """Add a puncture inside triangle ``tri``, splitting it into three."""
    e0, e1, e2 = t.triangles[tri]
    p0, p1, p2 = t.corners[tri]
    q = t.num_punctures
    x0, x1, x2 = t.num_edges, t.num_edges + 1, t.num_edges + 2
    tris = list(t.triangles)
    corners = list(t.corners)
    tris[tri] = (e0, x1, x0)
    corners[tri] = (p0, p1, q)
    tris.append((e1, x2, x1))
    corners.append((p1, p2, q))
    tris.append((e2, x0, x2))
    corners.append((p2, p0, q))
    return sf.Triangulation(t.genus, q + 1, tuple(tris), tuple(corners))


def base_triangulation(genus: int, punctures: int) -> sf.Triangulation:
    if punctures < 1 or 2 * genus + punctures - 2 <= 0:
        raise ValueError(f"no ideal triangulation for genus {genus} with {punctures} punctures")
    if genus == 0:
        t, have = thrice_punctured_sphere(), 3
    elif genus == 1:
        t, have = once_punctured_torus(), 1
    else:
        t, have = polygon_surface(genus), 1
    for k in range(punctures - have):
        t = stellar_subdivision(t, k % t.num_triangles)
    return t


def random_flips(t: sf.Triangulation, o, count: int, rng, coords: teich.DecoratedCoords | None = None):
    """Apply ``count`` random generic flips; returns ``(t, o, coords)`` (coords may be None)."""
    for _ in range(count):
        edges = sf.generic_edges(t, o)
        if not edges:
            break
        e = int(rng.choice(edges))
        if coords is None:
            t, o, _ = sf.flip(t, o, e)
        else:
            t, o, coords, _ = teich.flip_decorated(t, o, coords, e)
    return t, o, coords


@dataclass(frozen=True)
class DecoratedSurface:
    triangulation: sf.Triangulation
    orientation: sf.Orientation
    coords: teich.DecoratedCoords


def random_coords(t: sf.Triangulation, rng, lam_range=(0.1, 10.0), mu_range=(-2.0, 2.0)) -> teich.DecoratedCoords:
    """Real lambda-lengths (log-uniform) and ``mu_t = m_t g_{t+1}`` with ``m_t`` uniform."""
    lo, hi = lam_range
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), size=t.num_edges))
    mu = rng.uniform(*mu_range, size=t.num_triangles)
    return teich.DecoratedCoords.from_reals(lam.tolist(), mu.tolist())


def random_surface(genus: int, punctures: int, rng=None, flips: int = 10, seed: int | None = None) -> DecoratedSurface:
    rng = np.random.default_rng(seed) if rng is None else rng
    t = base_triangulation(genus, punctures)
    o = sf.random_orientation(t, rng)
    t, o, _ = random_flips(t, o, flips, rng)
    return DecoratedSurface(t, o, random_coords(t, rng))


def zero_mu(c: teich.DecoratedCoords) -> teich.DecoratedCoords:
    return c.with_mu([GrassmannNumber.zero(c.n) for _ in c.mu])
