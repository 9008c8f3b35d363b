"""Ideal triangulations of punctured surfaces and their dual fatgraph spines.

Conventions
-----------
A triangle is a triple of edge ids listed counter-clockwise.  Side ``i`` runs
from corner ``i`` to corner ``i + 1`` (mod 3), and ``corners[t][i]`` is the
puncture sitting at corner ``i``.  Each edge is glued to exactly two sides
with opposite orientations.

The incidences of an edge are its two ``(triangle, side)`` pairs sorted
lexicographically.  An orientation of the dual fatgraph stores one sign per
edge: ``+1`` means the fatgraph edge points from the triangle of the first
incidence to the triangle of the second, ``-1`` the reverse.  Spin
structures are orientations modulo reversing every edge at a vertex.

A puncture fan walks counter-clockwise around a puncture.  At corner ``i`` of
a triangle the walk enters through side ``i`` and leaves through side
``i - 1``; the side ``i + 1`` opposite the corner is the outer edge.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import NonGenericFlipError

Incidence = tuple[int, int]  # (triangle, side)


@dataclass(frozen=True)
class Triangulation:
    genus: int
    num_punctures: int
    triangles: tuple[tuple[int, int, int], ...]
    corners: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "triangles", tuple(tuple(int(e) for e in t) for t in self.triangles))
        object.__setattr__(self, "corners", tuple(tuple(int(p) for p in c) for c in self.corners))

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def num_edges(self) -> int:
        ids = {e for t in self.triangles for e in t}
        return max(ids) + 1 if ids else 0

    @cached_property
    def _incidence_table(self) -> dict[int, tuple[Incidence, ...]]:
        table: dict[int, list[Incidence]] = {}
        for t, sides in enumerate(self.triangles):
            for i, e in enumerate(sides):
                table.setdefault(e, []).append((t, i))
        return {e: tuple(sorted(v)) for e, v in table.items()}

    def incidences(self, edge: int) -> tuple[Incidence, ...]:
        return self._incidence_table.get(edge, ())

    def other_incidence(self, inc: Incidence) -> Incidence:
        e = self.triangles[inc[0]][inc[1]]
        a, b = self.incidences(e)
        return b if inc == a else a

    def side_endpoints(self, t: int, i: int) -> tuple[int, int]:
        """Punctures at the start and end of side ``i`` of triangle ``t``."""
        return self.corners[t][i], self.corners[t][(i + 1) % 3]

    def expected_counts(self) -> tuple[int, int]:
        g, s = self.genus, self.num_punctures
        return 6 * g - 6 + 3 * s, 4 * g - 4 + 2 * s


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    errors: list[str]
    num_edges: int
    num_triangles: int
    fan_lengths: dict[int, int] = field(default_factory=dict)
    bad_edges: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate(t: Triangulation) -> ValidationReport:
    errors: list[str] = []
    bad_edges: list[int] = []
    g, s = t.genus, t.num_punctures
    if g < 0 or s < 1:
        errors.append(f"need genus >= 0 and at least one puncture, got g={g}, s={s}")
    if 2 * g + s - 2 <= 0:
        errors.append(f"2g+s-2 must be positive, got {2 * g + s - 2}")
    n_e, n_t = t.expected_counts()
    ids = sorted({e for tri in t.triangles for e in tri})
    if len(t.corners) != len(t.triangles):
        errors.append("corner labels must be given for every triangle")
    if ids != list(range(len(ids))):
        errors.append("edge ids must be the contiguous range 0..E-1")
    if len(ids) != n_e:
        errors.append(f"expected {n_e} edges for (g={g}, s={s}), found {len(ids)}")
    if t.num_triangles != n_t:
        errors.append(f"expected {n_t} triangles for (g={g}, s={s}), found {t.num_triangles}")
    for e in ids:
        incs = t.incidences(e)
        if len(incs) != 2:
            errors.append(f"edge {e} has {len(incs)} incidence(s), expected 2")
            bad_edges.append(e)
    labels = {p for c in t.corners for p in c}
    if any(not 0 <= p < s for p in labels):
        errors.append(f"corner labels must lie in 0..{s - 1}")
    missing = set(range(s)) - labels
    if missing:
        errors.append(f"punctures {sorted(missing)} label no corner")
    if not bad_edges and len(t.corners) == len(t.triangles):
        for e in ids:
            (t1, i1), (t2, i2) = t.incidences(e)
            p0, p1 = t.side_endpoints(t1, i1)
            q0, q1 = t.side_endpoints(t2, i2)
            if (p0, p1) != (q1, q0):
                errors.append(f"edge {e}: corner labels disagree across the gluing")
                bad_edges.append(e)
    if len(ids) and s - len(ids) + t.num_triangles != 2 - 2 * g:
        errors.append(
            f"Euler characteristic {s - len(ids) + t.num_triangles} differs from 2-2g={2 - 2 * g}"
        )
    fan_lengths: dict[int, int] = {}
    if not errors:
        seen: set[tuple[int, int]] = set()
        for p in range(s):
            fan = puncture_fan(t, p)
            fan_lengths[p] = len(fan)
            seen.update((c.triangle, c.corner) for c in fan.corners)
        if len(seen) != 3 * t.num_triangles:
            errors.append("some puncture label covers more than one vertex cycle")
        if not is_connected(dual_fatgraph(t)):
            errors.append("dual fatgraph is disconnected")
    return ValidationReport(not errors, errors, len(ids), t.num_triangles, fan_lengths, sorted(set(bad_edges)))


# ---------------------------------------------------------------------------
# dual fatgraph and orientations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fatgraph:
    """Trivalent ribbon graph: vertex ``v`` is triangle ``v``; ``cyclic[v]`` lists its edges counter-clockwise."""

    cyclic: tuple[tuple[int, int, int], ...]
    ends: tuple[tuple[Incidence, Incidence], ...]  # per edge: (first, second) incidence

    @property
    def num_vertices(self) -> int:
        return len(self.cyclic)

    @property
    def num_edges(self) -> int:
        return len(self.ends)

    def degree(self, v: int) -> int:
        return len(self.cyclic[v])


def dual_fatgraph(t: Triangulation) -> Fatgraph:
    ends = []
    for e in range(t.num_edges):
        incs = t.incidences(e)
        if len(incs) != 2:
            raise ValueError(f"edge {e} is not glued to two sides")
        ends.append((incs[0], incs[1]))
    return Fatgraph(t.triangles, tuple(ends))


def is_connected(fg: Fatgraph) -> bool:
    if fg.num_vertices == 0:
        return True
    adj: dict[int, set[int]] = {v: set() for v in range(fg.num_vertices)}
    for (a, _), (b, _) in fg.ends:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v] - seen:
            seen.add(w)
            queue.append(w)
    return len(seen) == fg.num_vertices


Orientation = tuple[int, ...]


def check_orientation(t: Triangulation, o: Sequence[int]) -> Orientation:
    o = tuple(int(x) for x in o)
    if len(o) != t.num_edges or any(x not in (1, -1) for x in o):
        raise ValueError(f"orientation needs one sign (+1/-1) for each of {t.num_edges} edges")
    return o


def traversal_sign(t: Triangulation, o: Sequence[int], start: Incidence) -> int:
    """+1 if crossing the edge at ``start`` toward its other side follows the orientation, else -1."""
    e = t.triangles[start[0]][start[1]]
    first, _ = t.incidences(e)
    forward = start == first
    return o[e] if forward else -o[e]


def vertex_reversal(t: Triangulation, o: Sequence[int], v: int) -> Orientation:
    """Reverse every fatgraph edge at vertex ``v``; a loop at ``v`` is reversed twice."""
    out = list(o)
    for e in t.triangles[v]:
        out[e] = -out[e]
    return tuple(out)


def random_orientation(t: Triangulation, rng) -> Orientation:
    return tuple(int(x) for x in rng.choice((-1, 1), size=t.num_edges))


def reversal_set(t: Triangulation, o1: Sequence[int], o2: Sequence[int]) -> frozenset[int] | None:
    """Vertices whose reversal turns ``o1`` into ``o2``, or None if no such set exists.

    The edges where ``o1`` and ``o2`` differ must form a cut: there is a 0/1
    labelling of the vertices such that an edge differs exactly when its
    endpoints carry different labels.  Loops can never differ.  The answer
    is unique up to complementing a connected component.
    """
    fg = dual_fatgraph(t)
    diff = [int(a != b) for a, b in zip(o1, o2)]
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(fg.num_vertices)}
    for e, ((a, _), (b, _)) in enumerate(fg.ends):
        if a == b:
            if diff[e]:
                return None
            continue
        adj[a].append((b, diff[e]))
        adj[b].append((a, diff[e]))
    label: dict[int, int] = {}
    for root in range(fg.num_vertices):
        if root in label:
            continue
        label[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w, d in adj[v]:
                want = label[v] ^ d
                if w not in label:
                    label[w] = want
                    queue.append(w)
                elif label[w] != want:
                    return None
    return frozenset(v for v, x in label.items() if x)


def spin_equivalent(t: Triangulation, o1: Sequence[int], o2: Sequence[int]) -> bool:
    """Whether two orientations differ by a set of vertex reversals."""
    return reversal_set(t, o1, o2) is not None


def reversal_orbit(t: Triangulation, o: Sequence[int]) -> set[Orientation]:
    """All orientations reachable by vertex reversals (enumerates the 2^V reversal group)."""
    out = set()
    for subset in itertools.product((0, 1), repeat=t.num_triangles):
        cur = tuple(o)
        for v, flag in enumerate(subset):
            if flag:
                cur = vertex_reversal(t, cur, v)
        out.add(cur)
    return out


# ---------------------------------------------------------------------------
# puncture fans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CornerVisit:
    triangle: int
    corner: int
    entering_edge: int
    leaving_edge: int
    outer_edge: int

    @property
    def entering_side(self) -> int:
        return self.corner

    @property
    def leaving_side(self) -> int:
        return (self.corner - 1) % 3

    @property
    def outer_side(self) -> int:
        return (self.corner + 1) % 3


@dataclass(frozen=True)
class PunctureFan:
    puncture: int
    corners: tuple[CornerVisit, ...]

    def __len__(self) -> int:
        return len(self.corners)

    def rotated(self, k: int) -> "PunctureFan":
        k %= len(self.corners)
        return PunctureFan(self.puncture, self.corners[k:] + self.corners[:k])


def _visit(t: Triangulation, tri: int, corner: int) -> CornerVisit:
    sides = t.triangles[tri]
    return CornerVisit(tri, corner, sides[corner], sides[(corner - 1) % 3], sides[(corner + 1) % 3])


def puncture_fan(t: Triangulation, p: int) -> PunctureFan:
    """Counter-clockwise cycle of corners at puncture ``p``.

    Starts at the corner whose entering edge has the lowest id (ties broken by
    triangle, then corner index).
    """
    starts = [(tri, i) for tri in range(t.num_triangles) for i in range(3) if t.corners[tri][i] == p]
    if not starts:
        raise ValueError(f"puncture {p} labels no corner")
    tri, corner = min(starts, key=lambda tc: (t.triangles[tc[0]][tc[1]], tc[0], tc[1]))
    visits = []
    cur = (tri, corner)
    for _ in range(3 * t.num_triangles + 1):
        v = _visit(t, *cur)
        visits.append(v)
        nxt = t.other_incidence((v.triangle, v.leaving_side))
        if t.corners[nxt[0]][nxt[1]] != p:
            raise ValueError(f"corner labels around puncture {p} are inconsistent")
        cur = nxt
        if cur == (tri, corner):
            return PunctureFan(p, tuple(visits))
    raise ValueError(f"fan around puncture {p} does not close")


def all_fans(t: Triangulation) -> list[PunctureFan]:
    return [puncture_fan(t, p) for p in range(t.num_punctures)]


# ---------------------------------------------------------------------------
# flips
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlipRecord:
    """Quadrilateral bookkeeping for a generic flip of ``edge``.

    Before the flip ``edge`` runs from ``left`` to ``right``.  The fatgraph
    arrow on ``edge`` points from ``lower_tri`` (corner ``bottom``) to
    ``upper_tri`` (corner ``top``).  Outer edges are ``a`` (left-top), ``b``
    (top-right), ``c`` (right-bottom) and ``d`` (bottom-left).  After the
    flip ``edge`` runs from ``bottom`` to ``top``; the left triangle (edges
    d, a) reuses the id ``lower_tri`` and the right one (edges b, c) reuses
    ``upper_tri``.

    Odd coordinates follow the arrow: sigma is read from the triangle the
    arrow points into and theta from the one it leaves; afterwards mu lives
    in the right triangle and nu in the left.
    """

    edge: int
    lower_tri: int
    upper_tri: int
    a: int
    b: int
    c: int
    d: int
    left: int
    right: int
    top: int
    bottom: int

    @property
    def left_tri(self) -> int:
        return self.lower_tri

    @property
    def right_tri(self) -> int:
        return self.upper_tri

    @property
    def sigma_tri(self) -> int:
        return self.upper_tri

    @property
    def theta_tri(self) -> int:
        return self.lower_tri

    @property
    def mu_tri(self) -> int:
        return self.right_tri

    @property
    def nu_tri(self) -> int:
        return self.left_tri


def flip_record(t: Triangulation, o: Sequence[int], e: int) -> FlipRecord:
    incs = t.incidences(e)
    if len(incs) != 2:
        raise NonGenericFlipError(f"edge {e} does not exist or is not glued to two sides")
    first, second = incs
    tail, head = (first, second) if o[e] == 1 else (second, first)
    (ts, i_s), (tt, i_t) = tail, head
    if ts == tt:
        raise NonGenericFlipError(f"edge {e} borders the same triangle twice (self-folded)")
    top_sides = t.triangles[tt]
    bot_sides = t.triangles[ts]
    b, a = top_sides[(i_t + 1) % 3], top_sides[(i_t + 2) % 3]
    d, c = bot_sides[(i_s + 1) % 3], bot_sides[(i_s + 2) % 3]
    if len({a, b, c, d, e}) != 5:
        raise NonGenericFlipError(
            f"edge {e}: outer edges a={a}, b={b}, c={c}, d={d} are not four distinct edges"
        )
    left, right = t.side_endpoints(tt, i_t)
    top = t.corners[tt][(i_t + 2) % 3]
    bottom = t.corners[ts][(i_s + 2) % 3]
    return FlipRecord(e, ts, tt, a, b, c, d, left, right, top, bottom)


def is_generic(t: Triangulation, o: Sequence[int], e: int) -> bool:
    try:
        flip_record(t, o, e)
    except NonGenericFlipError:
        return False
    return True


def generic_edges(t: Triangulation, o: Sequence[int]) -> list[int]:
    return [e for e in range(t.num_edges) if is_generic(t, o, e)]


def _points_into(t: Triangulation, o: Sequence[int], edge: int, tri: int) -> bool:
    """Whether the fatgraph arrow on ``edge`` points at the incidence lying in ``tri``."""
    first, second = t.incidences(edge)
    head = second if o[edge] == 1 else first
    return head[0] == tri


def flip(t: Triangulation, o: Sequence[int], e: int) -> tuple[Triangulation, Orientation, FlipRecord]:
    """Generic flip of edge ``e`` with the spin-graph orientation evolution.

    Outer edges a, c, d keep their direction relative to the quadrilateral,
    b is reversed, and the new diagonal points from the right triangle to
    the left one.
    """
    o = tuple(o)
    rec = flip_record(t, o, e)
    into = {x: _points_into(t, o, x, tri) for x, tri in (
        (rec.a, rec.upper_tri), (rec.b, rec.upper_tri), (rec.c, rec.lower_tri), (rec.d, rec.lower_tri))}
    into[rec.b] = not into[rec.b]

    tris = list(t.triangles)
    corners = list(t.corners)
    tris[rec.left_tri] = (rec.d, e, rec.a)
    corners[rec.left_tri] = (rec.left, rec.bottom, rec.top)
    tris[rec.right_tri] = (rec.b, e, rec.c)
    corners[rec.right_tri] = (rec.right, rec.top, rec.bottom)
    new_t = Triangulation(t.genus, t.num_punctures, tuple(tris), tuple(corners))

    new_o = list(o)
    for x, tri in ((rec.a, rec.left_tri), (rec.d, rec.left_tri), (rec.b, rec.right_tri), (rec.c, rec.right_tri)):
        new_o[x] = _sign_for_head(new_t, x, tri, into[x])
    new_o[e] = _sign_for_head(new_t, e, rec.left_tri, True)
    return new_t, tuple(new_o), rec


def _sign_for_head(t: Triangulation, edge: int, tri: int, toward: bool) -> int:
    first, second = t.incidences(edge)
    quad_inc_first = first[0] == tri
    # +1 points first -> second
    if toward:
        return -1 if quad_inc_first else 1
    return 1 if quad_inc_first else -1


def canonical_form(t: Triangulation) -> frozenset:
    """Triangles as rotation-invariant (edge, corner) cycles, for comparing up to side rotation."""
    out = []
    for sides, corners in zip(t.triangles, t.corners):
        rots = [tuple(zip(sides[k:] + sides[:k], corners[k:] + corners[:k])) for k in range(3)]
        out.append(min(rots))
    return frozenset(out)


def _rotations(sides, corners):
    for k in range(3):
        yield k, tuple(sides[k:] + sides[:k]), tuple(corners[k:] + corners[:k])


def triangle_matchings(src: Triangulation, dst: Triangulation) -> list[dict[Incidence, Incidence]]:
    """Ways to identify the sides of ``src`` with those of ``dst`` (same edges and corners up to rotation).

    Each matching maps ``(triangle, side)`` of ``src`` to ``(triangle, side)``
    of ``dst``.  Only surfaces with two identical triangles admit more than
    one matching.
    """
    if src.num_triangles != dst.num_triangles or src.num_punctures != dst.num_punctures:
        return []
    options = []
    for tri, (sides, corners) in enumerate(zip(src.triangles, src.corners)):
        cand = []
        for tri2, (s2, c2) in enumerate(zip(dst.triangles, dst.corners)):
            for k, rs, rc in _rotations(s2, c2):
                if rs == tuple(sides) and rc == tuple(corners):
                    cand.append((tri2, k))
        if not cand:
            return []
        options.append(cand)
    out = []
    for combo in itertools.product(*options):
        if len({tri2 for tri2, _ in combo}) != len(combo):
            continue
        # src side i equals dst side (i + k) mod 3 of the rotated triangle
        out.append({(tri, i): (tri2, (i + k) % 3) for tri, (tri2, k) in enumerate(combo) for i in range(3)})
    return out


def pull_back_orientation(src: Triangulation, dst: Triangulation, o_dst: Sequence[int],
                          matching: dict[Incidence, Incidence]) -> Orientation:
    """Express an orientation of ``dst`` in the edge conventions of ``src`` via a side matching."""
    out = []
    for e in range(src.num_edges):
        first, second = src.incidences(e)
        d_first, d_second = dst.incidences(e)
        head_dst = d_second if o_dst[e] == 1 else d_first
        out.append(1 if matching[second] == head_dst else -1)
    return tuple(out)
