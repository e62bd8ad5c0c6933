"""Subset calculus on the linear order [n] = {0, 1, ..., n}.

Everything downstream (polytope boundaries, Segal posets, diagram
indexing) is driven by two kinds of data: strictly increasing vertex
subsets of [n] and weakly monotone maps [k] -> [n].  Subsets are kept
as sorted tuples of ints, monotone maps as tuples of their values; both
are plain value types so that all enumerations are deterministic and
serialize to stable JSON.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"
    NEITHER = "neither"
    BOTH = "both"  # gapless subsets satisfy the gap condition vacuously


class Side(Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class SubsetOfN:
    """A subset of [n], stored as a strictly increasing tuple."""

    ambient: int
    members: tuple[int, ...]

    def __post_init__(self):
        if any(m < 0 or m > self.ambient for m in self.members):
            raise ValueError(f"members {self.members} not within [0..{self.ambient}]")
        if any(a >= b for a, b in zip(self.members, self.members[1:])):
            raise ValueError(f"members {self.members} not strictly increasing")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members

    def gaps(self) -> tuple[int, ...]:
        present = set(self.members)
        return tuple(j for j in range(self.ambient + 1) if j not in present)

    def to_json(self) -> list[int]:
        return list(self.members)


def subset(ambient: int, members) -> SubsetOfN:
    return SubsetOfN(ambient, tuple(sorted(members)))


def classify_subset(s: SubsetOfN) -> Parity:
    """Gap-parity classification of a vertex subset.

    A gap is a vertex j outside the subset; its parity is the parity of
    the number of members above j.  The subset is even (odd) when every
    gap is even (odd).  A gapless subset is reported as BOTH since the
    condition is vacuous.
    """
    gaps = s.gaps()
    if not gaps:
        return Parity.BOTH
    members = s.members
    parities = set()
    for j in gaps:
        above = sum(1 for i in members if i > j)
        parities.add(above % 2)
        if len(parities) == 2:
            return Parity.NEITHER
    return Parity.EVEN if parities == {0} else Parity.ODD


def _matches_side(parity: Parity, side: Side) -> bool:
    if parity is Parity.BOTH:
        return True
    return parity is (Parity.EVEN if side is Side.LOWER else Parity.ODD)


def gale_facets(n: int, d: int) -> tuple[list[SubsetOfN], list[SubsetOfN]]:
    """All even and all odd (d+1)-subsets of [n], in sorted order.

    These are the vertex sets of the d-simplices in the lower
    (respectively upper) boundary of the cyclic polytope on n+1
    vertices in dimension d+1, by Gale's evenness criterion.
    """
    if d < 0 or n < d:
        raise ValueError(f"need n >= d >= 0, got n={n}, d={d}")
    lower, upper = [], []
    for members in itertools.combinations(range(n + 1), d + 1):
        s = SubsetOfN(n, members)
        p = classify_subset(s)
        if p in (Parity.EVEN, Parity.BOTH):
            lower.append(s)
        if p in (Parity.ODD, Parity.BOTH):
            upper.append(s)
    return lower, upper


@dataclass(frozen=True)
class SegalPoset:
    """The poset of subsets dominated by one side's Gale facets.

    ``maximal_elements`` are the even (lower) or odd (upper)
    (d+1)-subsets of [n]; ``all_elements`` is their downward closure
    under inclusion, sorted.
    """

    ambient: int
    degree: int
    side: Side
    maximal_elements: tuple[SubsetOfN, ...]
    all_elements: tuple[SubsetOfN, ...]

    def member_sets(self) -> list[tuple[int, ...]]:
        return [m.members for m in self.maximal_elements]

    def covers(self, members: tuple[int, ...]) -> bool:
        needle = set(members)
        return any(needle <= set(m.members) for m in self.maximal_elements)

    def to_json(self) -> dict:
        return {
            "n": self.ambient,
            "d": self.degree,
            "side": self.side.value,
            "maximal": [list(m.members) for m in self.maximal_elements],
        }


def segal_poset(n: int, d: int, side: Side) -> SegalPoset:
    if n < d:
        raise ValueError(f"need n >= d, got n={n}, d={d}")
    lower, upper = gale_facets(n, d)
    maximal = tuple(lower if side is Side.LOWER else upper)
    closure = set()
    for m in maximal:
        for r in range(1, len(m.members) + 1):
            closure.update(itertools.combinations(m.members, r))
    all_elements = tuple(
        SubsetOfN(n, members) for members in sorted(closure, key=lambda t: (len(t), t))
    )
    return SegalPoset(n, d, side, maximal, all_elements)


def ordinal_shift(s: SubsetOfN, offset: int, new_ambient: int) -> SubsetOfN:
    return SubsetOfN(new_ambient, tuple(v + offset for v in s.members))


def decompose_lower_poset(n: int, d: int) -> list[tuple[int, SegalPoset]]:
    """Split the lower poset into shifted upper posets of one degree less.

    The i-th piece is the upper poset on [i-1] in degree d-1 with the
    vertex i adjoined to every element; the pieces' maximal elements
    partition the maximal elements of the lower poset on [n] in degree
    d.  The pieces are returned with their ambient still [n].
    """
    if d < 1 or n < d:
        raise ValueError(f"need n >= d >= 1, got n={n}, d={d}")
    pieces = []
    for i in range(d, n + 1):
        up = segal_poset(i - 1, d - 1, Side.UPPER)
        maximal = tuple(
            SubsetOfN(n, m.members + (i,)) for m in up.maximal_elements
        )
        closure = set()
        for m in maximal:
            for r in range(1, len(m.members) + 1):
                closure.update(itertools.combinations(m.members, r))
        piece = SegalPoset(
            n,
            d,
            Side.LOWER,
            maximal,
            tuple(SubsetOfN(n, t) for t in sorted(closure, key=lambda t: (len(t), t))),
        )
        pieces.append((i, piece))
    return pieces


def has_adjacent_pair(members: tuple[int, ...]) -> bool:
    return any(b == a + 1 for a, b in zip(members, members[1:]))


def embed_in_even(gamma: SubsetOfN, n: int, k: int) -> SubsetOfN | None:
    """Find an even 2k-subset of [n] containing the (k+1)-subset gamma.

    Uses the inductive filling procedure: if the top vertex n lies in
    gamma, trade the maximal interior gap for n and recurse one ambient
    lower.  Succeeds exactly when gamma has two adjacent vertices; a
    subset with all vertices isolated meets each adjacent pair {i, i+1}
    at most once, so no union of k such pairs can contain it.
    """
    if len(gamma.members) != k + 1:
        raise ValueError(f"gamma must have k+1={k + 1} members, got {gamma.members}")
    if n < 2 * k:
        raise ValueError(f"need n >= 2k, got n={n}, k={k}")
    if not has_adjacent_pair(gamma.members):
        return None
    return SubsetOfN(n, _embed_even_rec(gamma.members, n, k))


def _embed_even_rec(members: tuple[int, ...], n: int, k: int) -> tuple[int, ...]:
    if n == 2 * k:
        # Gamma is not the alternating subset, so it misses some even
        # vertex j, and [n] minus {j} is even of cardinality 2k.
        for j in range(0, n + 1, 2):
            if j not in members:
                return tuple(v for v in range(n + 1) if v != j)
        raise AssertionError("subset with an adjacent pair cannot fill all even slots")
    if n not in members:
        return _embed_even_rec(members, n - 1, k)
    interior_gaps = [j for j in range(1, n) if j not in members]
    m = max(interior_gaps)
    swapped = tuple(sorted(set(members) - {n} | {m}))
    inner = _embed_even_rec(swapped, n - 1, k)
    return tuple(sorted(set(inner) - {m} | {n}))


# ---------------------------------------------------------------------------
# Weakly monotone maps [k] -> [n] and the simplicial operator calculus.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneMap:
    """A weakly monotone map [k] -> [n], stored by its k+1 values."""

    source_len: int
    target_len: int
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.source_len + 1:
            raise ValueError("values must have length source_len + 1")
        if any(v < 0 or v > self.target_len for v in self.values):
            raise ValueError(f"values {self.values} exceed target [0..{self.target_len}]")
        if any(a > b for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"values {self.values} not weakly increasing")

    def __call__(self, i: int) -> int:
        return self.values[i]

    def is_injective(self) -> bool:
        return all(a < b for a, b in zip(self.values, self.values[1:]))

    def is_surjective(self) -> bool:
        return set(self.values) == set(range(self.target_len + 1))

    def compose(self, inner: "MonotoneMap") -> "MonotoneMap":
        """self after inner, as maps of ordinals."""
        if inner.target_len != self.source_len:
            raise ValueError("maps not composable")
        return MonotoneMap(
            inner.source_len, self.target_len, tuple(self.values[v] for v in inner.values)
        )


def monotone(source_len: int, target_len: int, values) -> MonotoneMap:
    return MonotoneMap(source_len, target_len, tuple(values))


def face_map(i: int, n: int) -> MonotoneMap:
    """The injection [n-1] -> [n] skipping the vertex i."""
    if not 0 <= i <= n:
        raise IndexError(f"face index {i} out of range for [{n}]")
    return MonotoneMap(n - 1, n, tuple(v for v in range(n + 1) if v != i))


def degeneracy_map(j: int, n: int) -> MonotoneMap:
    """The surjection [n+1] -> [n] repeating the vertex j."""
    if not 0 <= j <= n:
        raise IndexError(f"degeneracy index {j} out of range for [{n}]")
    values = list(range(j + 1)) + list(range(j, n + 1))
    return MonotoneMap(n + 1, n, tuple(values))


def simplex_faces(beta: MonotoneMap) -> list[MonotoneMap]:
    """All d_i-restrictions of beta, deleting one position each."""
    k = beta.source_len
    if k == 0:
        return []
    return [beta.compose(face_map(i, k)) for i in range(k + 1)]


def simplex_face(beta: MonotoneMap, i: int) -> MonotoneMap:
    k = beta.source_len
    if not 0 <= i <= k:
        raise IndexError(f"face index {i} out of range for a {k}-simplex")
    return beta.compose(face_map(i, k))


def simplex_degeneracies(beta: MonotoneMap) -> list[MonotoneMap]:
    """All s_j-extensions of beta, duplicating one position each."""
    k = beta.source_len
    return [beta.compose(degeneracy_map(j, k)) for j in range(k + 1)]


def simplex_degeneracy(beta: MonotoneMap, j: int) -> MonotoneMap:
    k = beta.source_len
    if not 0 <= j <= k:
        raise IndexError(f"degeneracy index {j} out of range for a {k}-simplex")
    return beta.compose(degeneracy_map(j, k))


def all_monotone_maps(k: int, n: int):
    """All weakly monotone [k] -> [n], in lexicographic order."""
    for values in itertools.combinations_with_replacement(range(n + 1), k + 1):
        yield MonotoneMap(k, n, values)


def all_surjections(n: int, k: int):
    """All weakly monotone surjections [n] ->> [k], in lexicographic order."""
    if n < k:
        return
    # A surjection is determined by its jump set: k of the n slots.
    for jumps in itertools.combinations(range(n), k):
        values = []
        level = 0
        jump_set = set(jumps)
        for i in range(n + 1):
            values.append(level)
            if i in jump_set:
                level += 1
        yield MonotoneMap(n, k, tuple(values))
