"""Exact geometry of cyclic polytopes.

Vertices live on the moment curve t -> (t, t^2, ..., t^d) at integer
parameters 0..n, so every predicate reduces to integer determinant
signs or small exact linear programs.  The boundary classification is
done both combinatorially (gap parities) and geometrically (hyperplane
sign patterns); triangulations are validated by exact volume plus
pairwise proper intersection, with two independent intersection
deciders that the test suite cross-validates.

Convention: a facet is *lower* when the remaining vertices lie strictly
above its hyperplane in the last coordinate (nothing below it), *upper*
when they lie strictly below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from math import factorial

from .exactgeom import AffineSystem, det_int, hyperplane_through
from .subsets import Parity, Side, SubsetOfN, classify_subset, gale_facets, subset


class FacetSide(Enum):
    LOWER = "lower"
    UPPER = "upper"
    NOT_A_FACET = "not-a-facet"


class NotFlippable(Exception):
    pass


class ResourceLimit(Exception):
    pass


DESK_MAX_D = 3
DESK_MAX_N = 7


def moment_point(t: int, d: int) -> tuple[int, ...]:
    """The point (t, t^2, ..., t^d), exactly."""
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    return tuple(t ** (i + 1) for i in range(d))


def facet_side_geometric(members, n: int, d: int) -> FacetSide:
    """Classify the simplex on a (d+1)-subset within C([n], d+1).

    Computes the supporting hyperplane through the d+1 moment points in
    R^(d+1), oriented so the normal points up in the last coordinate,
    and inspects the signs of the remaining n-d points.  All above
    means a lower facet, all below an upper facet.  On the moment curve
    no sign can vanish, so a zero sign raises.
    """
    members = tuple(sorted(members))
    if len(members) != d + 1:
        raise ValueError(f"expected a {d + 1}-subset, got {members}")
    if n < d + 1:
        raise ValueError("need at least d+2 vertices to have a complement")
    pts = [moment_point(t, d + 1) for t in members]
    normal, offset = hyperplane_through(pts)
    if normal[-1] == 0:
        raise ArithmeticError("degenerate hyperplane on the moment curve")
    if normal[-1] < 0:
        normal = [-v for v in normal]
        offset = -offset
    above = below = False
    for t in range(n + 1):
        if t in members:
            continue
        val = sum(c * x for c, x in zip(normal, moment_point(t, d + 1))) - offset
        if val == 0:
            raise ArithmeticError("moment points cannot be affinely dependent")
        if val > 0:
            above = True
        else:
            below = True
        if above and below:
            return FacetSide.NOT_A_FACET
    return FacetSide.LOWER if above else FacetSide.UPPER


def simplex_volume_scaled(members, d: int) -> int:
    """d! times the Euclidean volume of the moment simplex (an integer)."""
    members = tuple(sorted(members))
    pts = [moment_point(t, d) for t in members]
    rows = [[pts[i][c] - pts[0][c] for c in range(d)] for i in range(1, d + 1)]
    return abs(det_int(rows))


@dataclass(frozen=True)
class Triangulation:
    n: int
    d: int
    simplices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "simplices", tuple(sorted(self.simplices)))

    def __contains__(self, s):
        return tuple(sorted(s)) in self.simplices

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "simplices": [list(s) for s in self.simplices]}


def canonical_triangulation(n: int, d: int, side: Side) -> Triangulation:
    lower, upper = gale_facets(n, d)
    chosen = lower if side is Side.LOWER else upper
    return Triangulation(n, d, tuple(s.members for s in chosen))


def polytope_volume_scaled(n: int, d: int) -> int:
    """d! times the volume of C([n], d), summed over the lower triangulation."""
    tri = canonical_triangulation(n, d, Side.LOWER)
    return sum(simplex_volume_scaled(s, d) for s in tri.simplices)


# ---------------------------------------------------------------------------
# Proper intersection, decided twice.
# ---------------------------------------------------------------------------


def improper_by_circuits(I, J, d: int) -> bool:
    """Alternating-circuit test for improper intersection.

    On the moment curve the minimal affine dependences are supported on
    d+2 points with alternating signs, so two simplices overlap beyond
    their common face exactly when some d+2 of their vertices alternate
    between a subset of I and a subset of J.
    """
    I, J = set(I), set(J)
    union = sorted(I | J)
    if len(union) < d + 2:
        return False
    for chain in itertools.combinations(union, d + 2):
        evens, odds = chain[0::2], chain[1::2]
        if all(v in I for v in evens) and all(v in J for v in odds):
            return True
        if all(v in J for v in evens) and all(v in I for v in odds):
            return True
    return False


def _meeting_system(I, J, d: int) -> AffineSystem:
    """Barycentric system for conv(I) meet conv(J), coordinates (lam, mu)."""
    I, J = tuple(sorted(I)), tuple(sorted(J))
    nI, nJ = len(I), len(J)
    nv = nI + nJ
    eqs = [[1] * nI + [0] * nJ + [1], [0] * nI + [1] * nJ + [1]]
    ptsI = [moment_point(t, d) for t in I]
    ptsJ = [moment_point(t, d) for t in J]
    for c in range(d):
        eqs.append([p[c] for p in ptsI] + [-q[c] for q in ptsJ] + [0])
    ineqs = [
        [0] * v + [-1] + [0] * (nv - v - 1) + [0] for v in range(nv)
    ]
    return AffineSystem(nv, eqs, ineqs)


def improper_by_lp(I, J, d: int) -> bool:
    """Exact-LP test for improper intersection.

    A common point has unique barycentric coordinates in each simplex,
    and lies in conv(I & J) exactly when both supports sit inside the
    shared vertices.  So the intersection is improper iff the meeting
    polytope admits a point with positive weight on some non-shared
    vertex, which is read off from exact coordinate projections.
    """
    I, J = tuple(sorted(I)), tuple(sorted(J))
    system = _meeting_system(I, J, d)
    if not system.feasible():
        return False
    nI, nv = len(I), len(I) + len(J)
    shared = set(I) & set(J)
    for pos, v in enumerate(I):
        if v not in shared:
            coeffs = [0] * nv
            coeffs[pos] = 1
            iv = system.functional_interval(coeffs, 0)
            if iv is not None and (iv[1] is None or iv[1] > 0):
                return True
    for pos, v in enumerate(J):
        if v not in shared:
            coeffs = [0] * nv
            coeffs[nI + pos] = 1
            iv = system.functional_interval(coeffs, 0)
            if iv is not None and (iv[1] is None or iv[1] > 0):
                return True
    return False


def intersect_properly(I, J, d: int, decider: str = "circuit") -> bool:
    if decider == "circuit":
        return not improper_by_circuits(I, J, d)
    if decider == "lp":
        return not improper_by_lp(I, J, d)
    raise ValueError(f"unknown decider {decider!r}")


def is_triangulation(simplices, n: int, d: int, decider: str = "circuit"):
    """Validate a set of (d+1)-subsets as a triangulation of C([n], d).

    Returns (ok, certificate).  The certificate carries the exact
    scaled volumes and, on failure, the first offending pair or the
    volume deficit.  Proper pairwise intersection plus exact total
    volume is equivalent to coverage with simplicial overlaps.
    """
    simplices = [tuple(sorted(s)) for s in simplices]
    cert: dict = {"n": n, "d": d, "count": len(simplices)}
    seen = set()
    for s in simplices:
        if len(s) != d + 1 or len(set(s)) != d + 1 or not all(0 <= v <= n for v in s):
            cert["error"] = {"kind": "bad-simplex", "simplex": list(s)}
            return False, cert
        if s in seen:
            cert["error"] = {"kind": "duplicate", "simplex": list(s)}
            return False, cert
        seen.add(s)
    for a, b in itertools.combinations(simplices, 2):
        if not intersect_properly(a, b, d, decider):
            cert["error"] = {"kind": "improper-pair", "pair": [list(a), list(b)]}
            return False, cert
    total = sum(simplex_volume_scaled(s, d) for s in simplices)
    target = polytope_volume_scaled(n, d)
    cert["volume_scaled"] = total
    cert["target_volume_scaled"] = target
    if total != target:
        cert["error"] = {"kind": "volume-mismatch", "got": total, "want": target}
        return False, cert
    return True, cert


def enumerate_triangulations(
    n: int, d: int, force: bool = False, max_results: int | None = None
) -> list[Triangulation]:
    """All triangulations of C([n], d), by exhaustive extension search.

    Candidates are the (d+1)-subsets in lexicographic order; partial
    selections are grown while pairwise proper and within the exact
    target volume, pruning on the remaining achievable volume.
    """
    if not force and (d > DESK_MAX_D or n > DESK_MAX_N):
        raise ResourceLimit(
            f"enumeration bounded to d <= {DESK_MAX_D}, n <= {DESK_MAX_N} (use force)"
        )
    candidates = [tuple(c) for c in itertools.combinations(range(n + 1), d + 1)]
    vols = [simplex_volume_scaled(c, d) for c in candidates]
    target = polytope_volume_scaled(n, d)
    m = len(candidates)
    compat = [[False] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            ok = intersect_properly(candidates[i], candidates[j], d)
            compat[i][j] = compat[j][i] = ok
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + vols[i]
    found: list[Triangulation] = []

    def extend(start: int, chosen: list[int], vol: int):
        if vol == target:
            found.append(Triangulation(n, d, tuple(candidates[i] for i in chosen)))
            return
        if max_results is not None and len(found) >= max_results:
            return
        for i in range(start, m):
            if vol + suffix[i] < target:
                break
            v = vols[i]
            if vol + v > target:
                continue
            if all(compat[i][j] for j in chosen):
                chosen.append(i)
                extend(i + 1, chosen, vol + v)
                chosen.pop()

    extend(0, [], 0)
    found.sort(key=lambda t: t.simplices)
    return found


def relabel_within(members, sub) -> SubsetOfN:
    """View a subset of `sub` as a subset of [len(sub)-1] via the order iso."""
    sub = tuple(sorted(sub))
    index = {v: i for i, v in enumerate(sub)}
    return SubsetOfN(len(sub) - 1, tuple(sorted(index[v] for v in members)))


def simplex_boundary_sides(members, d: int):
    """Lower and upper facet vertex-sets of the moment simplex on `members`.

    Facets are the d-subsets, classified by Gale parity after
    relabelling the vertex set to an initial segment.
    """
    members = tuple(sorted(members))
    lower, upper = [], []
    for f in itertools.combinations(members, d):
        p = classify_subset(relabel_within(f, members))
        if p in (Parity.EVEN, Parity.BOTH):
            lower.append(f)
        if p in (Parity.ODD, Parity.BOTH):
            upper.append(f)
    return lower, upper


def flip(tri: Triangulation, I) -> Triangulation:
    """Elementary flip across the (d+2)-subset I, lower facets to upper."""
    I = tuple(sorted(I))
    if len(I) != tri.d + 2:
        raise ValueError(f"flip support must be a {tri.d + 2}-subset, got {I}")
    lower, upper = simplex_boundary_sides(I, tri.d + 1)
    current = set(tri.simplices)
    if not all(f in current for f in lower):
        raise NotFlippable(f"lower facets of {I} not all present")
    replaced = (current - set(lower)) | set(upper)
    out = Triangulation(tri.n, tri.d, tuple(replaced))
    ok, cert = is_triangulation(out.simplices, tri.n, tri.d)
    if not ok:
        raise AssertionError(f"flip produced a non-triangulation: {cert}")
    return out


def flip_graph(n: int, d: int, force: bool = False):
    """Directed flip graph on all triangulations of C([n], d).

    Edges point from the triangulation containing the lower facets of
    the flip support to the one containing the upper facets.  Returns
    (nodes, edges) with nodes canonically sorted.
    """
    nodes = enumerate_triangulations(n, d, force=force)
    index = {t.simplices: i for i, t in enumerate(nodes)}
    edges = []
    for i, t in enumerate(nodes):
        for I in itertools.combinations(range(n + 1), d + 2):
            try:
                u = flip(t, I)
            except NotFlippable:
                continue
            edges.append((i, index[u.simplices], I))
    return nodes, edges


def flip_graph_connected(n: int, d: int, force: bool = False) -> dict:
    nodes, edges = flip_graph(n, d, force=force)
    adj: dict[int, set[int]] = {i: set() for i in range(len(nodes))}
    indeg = {i: 0 for i in range(len(nodes))}
    outdeg = {i: 0 for i in range(len(nodes))}
    for a, b, _ in edges:
        adj[a].add(b)
        adj[b].add(a)
        outdeg[a] += 1
        indeg[b] += 1
    seen = set()
    stack = [0] if nodes else []
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    lower = canonical_triangulation(n, d, Side.LOWER).simplices
    upper = canonical_triangulation(n, d, Side.UPPER).simplices
    index = {t.simplices: i for i, t in enumerate(nodes)}
    return {
        "count": len(nodes),
        "connected": len(seen) == len(nodes),
        "has_lower": lower in index,
        "has_upper": upper in index,
        "lower_is_source": lower in index and indeg[index[lower]] == 0,
        "upper_is_sink": upper in index and outdeg[index[upper]] == 0,
        "nodes": nodes,
        "edges": edges,
    }


# ---------------------------------------------------------------------------
# The "lies below" relation and its transitive closure.
# ---------------------------------------------------------------------------


def simplices_meet(I, J, d: int) -> bool:
    """Whether the two closed moment simplices share a point."""
    return _meeting_system(tuple(sorted(I)), tuple(sorted(J)), d).feasible()


def lies_below(I, J, n: int, d: int, empty_counts: bool = True) -> bool:
    """Whether the moment simplex on I lies below the one on J.

    The defining inclusion asks the intersection to land in the upper
    boundary of conv(I) and the lower boundary of conv(J).  A convex
    set inside a finite union of facet hyperplanes must lie inside a
    single one, so it suffices to find one upper facet of I and one
    lower facet of J whose hyperplanes both contain the intersection;
    containment is decided by exact projection of the facet functional.
    An empty intersection satisfies the inclusion vacuously (toggled by
    ``empty_counts``); see ``below_step`` for the stricter relation
    that generates the partial order.
    """
    I, J = tuple(sorted(I)), tuple(sorted(J))
    if len(I) != d + 1 or len(J) != d + 1:
        raise ValueError("both subsets must have d+1 members")
    system = _meeting_system(I, J, d)
    if not system.feasible():
        return empty_counts
    shared = set(I) & set(J)
    if not improper_by_circuits(I, J, d):
        # Proper: the intersection is conv(I & J), so containment in a
        # facet hyperplane is just containment of the shared vertices.
        if not shared:
            return True
        _, upperI = simplex_boundary_sides(I, d)
        lowerJ, _ = simplex_boundary_sides(J, d)
        return any(shared <= set(f) for f in upperI) and any(
            shared <= set(f) for f in lowerJ
        )
    ptsI = [moment_point(t, d) for t in I]
    nv = len(I) + len(J)

    def contained_in_some(facets):
        for f in facets:
            if not shared <= set(f):
                continue
            normal, offset = hyperplane_through([moment_point(t, d) for t in f])
            # Functional in lam-coordinates only: value at sum lam_i p_i.
            coeffs = [sum(c * x for c, x in zip(normal, p)) for p in ptsI]
            coeffs += [0] * (nv - len(ptsI))
            iv = system.functional_interval(coeffs, offset)
            if iv == (0, 0):
                return True
        return False

    _, upperI = simplex_boundary_sides(I, d)
    lowerJ, _ = simplex_boundary_sides(J, d)
    return contained_in_some(upperI) and contained_in_some(lowerJ)


def below_step(I, J, d: int) -> bool:
    """One generating step of the lies-below order: facet contact.

    The bare boundary inclusion of ``lies_below`` holds in both
    directions whenever the contact lies on the silhouette (vertices
    sit on upper and lower boundary at once), so it cannot generate a
    partial order.  A contact of dimension d-1 that satisfies the
    inclusion is forced to be a shared facet, upper for I and lower
    for J: a moment-curve hyperplane meets the curve in at most d
    points, so overlapping facets share their whole vertex set.  That
    combinatorial relation is the one whose transitive closure is
    checked for antisymmetry.
    """
    I, J = tuple(sorted(I)), tuple(sorted(J))
    shared = tuple(sorted(set(I) & set(J)))
    if len(shared) != d or I == J:
        return False
    if improper_by_circuits(I, J, d):
        return False
    _, upperI = simplex_boundary_sides(I, d)
    lowerJ, _ = simplex_boundary_sides(J, d)
    return shared in upperI and shared in lowerJ


def below_order_check(n: int, d: int, force: bool = False) -> dict:
    """Build the lies-below order and certify its closure is a DAG."""
    if not force and (d > DESK_MAX_D or n > DESK_MAX_N):
        raise ResourceLimit(
            f"below-order bounded to d <= {DESK_MAX_D}, n <= {DESK_MAX_N} (use force)"
        )
    simplices = [tuple(c) for c in itertools.combinations(range(n + 1), d + 1)]
    m = len(simplices)
    rel = [[False] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i != j and below_step(simplices[i], simplices[j], d):
                rel[i][j] = True
    closure = [row[:] for row in rel]
    for k in range(m):
        ck = closure[k]
        for i in range(m):
            if closure[i][k]:
                ci = closure[i]
                for j in range(m):
                    if ck[j]:
                        ci[j] = True
    cycles = [
        (simplices[i], simplices[j])
        for i in range(m)
        for j in range(i + 1, m)
        if closure[i][j] and closure[j][i]
    ]
    return {
        "n": n,
        "d": d,
        "simplices": simplices,
        "relation": [
            (simplices[i], simplices[j]) for i in range(m) for j in range(m) if rel[i][j]
        ],
        "antisymmetric": not cycles,
        "violations": cycles,
    }


def lower_facets_on_lower_boundary(members, n: int, d: int) -> bool:
    """Whether every lower facet of the simplex lies on the polytope's
    lower boundary (an ambient even d-subset)."""
    lower, _ = simplex_boundary_sides(tuple(sorted(members)), d)
    return all(
        classify_subset(subset(n, f)) in (Parity.EVEN, Parity.BOTH) for f in lower
    )


def upper_facets_on_upper_boundary(members, n: int, d: int) -> bool:
    _, upper = simplex_boundary_sides(tuple(sorted(members)), d)
    return all(
        classify_subset(subset(n, f)) in (Parity.ODD, Parity.BOTH) for f in upper
    )


def has_bottom_and_top_simplex(tri: Triangulation) -> dict:
    """Each triangulation contains a simplex whose lower facets sit on
    the polytope's lower boundary, and dually at the top."""
    bottom = [s for s in tri.simplices if lower_facets_on_lower_boundary(s, tri.n, tri.d)]
    top = [s for s in tri.simplices if upper_facets_on_upper_boundary(s, tri.n, tri.d)]
    return {"bottom_witnesses": bottom, "top_witnesses": top}


def volume_unscaled(scaled: int, d: int):
    from fractions import Fraction

    return Fraction(scaled, factorial(d))
