"""Bounded-slice Segal map checks for grid-valued simplicial categories.

The limit of cell categories over a subset poset is taken strictly, but
category-level: a limit object is a compatible family of cells over the
maximal poset elements, i.e. a partial diagram on the union of their
index tuples.  Families are enumerated from per-member catalogs of
isomorphism-class representatives by *transport*: a candidate cell
whose overlap restriction is isomorphic to the partial data is
conjugated along that isomorphism so the overlap matches on the nose.
Every strictly compatible family over the (virtual) concrete cell
categories is isomorphic to one produced this way, so the class list is
complete; duplicates are removed by natural-isomorphism search.

Path spaces and the edgewise subdivision enter as index translations
into an underlying Waldhausen construction, so one engine serves the
plain, path-space and subdivided checks alike.
"""

from __future__ import annotations

import itertools
import os

from .backends import Backend, Variant
from .fincat import EquivalenceReport
from .grids import (
    CellGrid,
    cell_generators,
    cells_catalog,
    direct_sum_cells,
    index_tuples,
    natural_transformations,
    step_target,
)
from .subsets import SegalPoset, Side, segal_poset


class ResourceLimit(Exception):
    pass


def _max_cells_cap() -> int:
    return int(os.environ.get("SEGAL_LAB_MAX_CELLS", "200000"))


# ---------------------------------------------------------------------------
# Simplicial categories as index translations.
# ---------------------------------------------------------------------------


class GridSimplicial:
    """The Waldhausen-style construction S(backend, k, variant)."""

    def __init__(self, backend: Backend, k: int, variant: Variant, bound: int):
        self.backend = backend
        self.k = k
        self.variant = variant
        self.bound = bound

    def describe(self) -> str:
        return f"S^{self.k}[{self.variant.value}]({self.backend.name}; bound {self.bound})"

    def underlying_level(self, n: int) -> int:
        return n

    def translate(self, n: int, subset) -> tuple:
        return tuple(sorted(subset))

    def catalog(self, n: int):
        return cells_catalog(self.backend, self.k, self.underlying_level(n), self.variant, self.bound)


class PathSpaceRight(GridSimplicial):
    """Right path space: level n is the underlying level n+1."""

    def __init__(self, base: GridSimplicial):
        super().__init__(base.backend, base.k, base.variant, base.bound)
        self.base = base

    def describe(self) -> str:
        return f"P>({self.base.describe()})"

    def underlying_level(self, n: int) -> int:
        return self.base.underlying_level(n + 1)

    def translate(self, n: int, subset) -> tuple:
        return self.base.translate(n + 1, tuple(sorted(subset)) + (n + 1,))

    def catalog(self, n: int):
        return self.base.catalog(n + 1)


class PathSpaceLeft(GridSimplicial):
    """Left path space: prepend a bottom vertex."""

    def __init__(self, base: GridSimplicial):
        super().__init__(base.backend, base.k, base.variant, base.bound)
        self.base = base

    def describe(self) -> str:
        return f"P<({self.base.describe()})"

    def underlying_level(self, n: int) -> int:
        return self.base.underlying_level(n + 1)

    def translate(self, n: int, subset) -> tuple:
        return self.base.translate(n + 1, (0,) + tuple(v + 1 for v in sorted(subset)))

    def catalog(self, n: int):
        return self.base.catalog(n + 1)


class EdgewiseSubdivision(GridSimplicial):
    """Edgewise subdivision: level n is the underlying level 2n+1,
    along the reversed-then-forward vertex doubling."""

    def __init__(self, base: GridSimplicial):
        super().__init__(base.backend, base.k, base.variant, base.bound)
        self.base = base

    def describe(self) -> str:
        return f"e({self.base.describe()})"

    def underlying_level(self, n: int) -> int:
        return self.base.underlying_level(2 * n + 1)

    def translate(self, n: int, subset) -> tuple:
        doubled = set()
        for s in subset:
            doubled.add(n - s)
            doubled.add(n + 1 + s)
        return self.base.translate(2 * n + 1, tuple(sorted(doubled)))

    def catalog(self, n: int):
        return self.base.catalog(2 * n + 1)


# ---------------------------------------------------------------------------
# Partial diagrams over a family of covered index subsets.
# ---------------------------------------------------------------------------


class PartialDiagram:
    """Objects and composite arrows over the covered index tuples."""

    __slots__ = ("backend", "objects", "arrows")

    def __init__(self, backend, objects, arrows):
        self.backend = backend
        self.objects = objects  # tuple -> object
        self.arrows = arrows  # (src, dst) -> Mor, src < dst comparable

    def profile(self):
        return tuple(self.objects[t] for t in sorted(self.objects))

    def key(self):
        return (
            tuple(sorted(self.objects.items())),
            tuple(sorted(self.arrows.items())),
        )


def comparable_pairs(tuples):
    """Ordered pairs (s, t) with s <= t pointwise, s != t."""
    out = []
    for s, t in itertools.permutations(tuples, 2):
        if all(a <= b for a, b in zip(s, t)):
            out.append((s, t))
    return out


def covered_structure(covered_tuples, member_sets):
    """The arrow keys of the partial index category: comparable tuple
    pairs whose combined vertex set fits inside a single member."""
    keys = []
    for s, t in comparable_pairs(covered_tuples):
        joint = set(s) | set(t)
        if any(joint <= m for m in member_sets):
            keys.append((s, t))
    return tuple(keys)


def restrict_grid(grid: CellGrid, covered_tuples, member_sets, pair_keys=None) -> PartialDiagram:
    """The partial diagram of a full cell over the covered tuples."""
    if pair_keys is None:
        pair_keys = covered_structure(covered_tuples, [set(m) for m in member_sets])
    objects = {t: grid.objects[t] for t in covered_tuples}
    arrows = {key: grid.path_map(*key) for key in pair_keys}
    return PartialDiagram(grid.backend, objects, arrows)


def partial_iso(a: PartialDiagram, b: PartialDiagram, limit=1):
    if sorted(a.objects) != sorted(b.objects) or a.profile() != b.profile():
        return []
    if sorted(a.arrows) != sorted(b.arrows):
        return []
    arrows = [(s, t, m, b.arrows[(s, t)]) for (s, t), m in a.arrows.items()]
    return natural_transformations(
        a.backend, a.objects, b.objects, arrows, iso_only=True, limit=limit
    )


def partial_homs(a: PartialDiagram, b: PartialDiagram, limit=None, count_only=False):
    arrows = [(s, t, m, b.arrows[(s, t)]) for (s, t), m in a.arrows.items()]
    return natural_transformations(
        a.backend, a.objects, b.objects, arrows, limit=limit, count_only=count_only
    )


class _MemberCell:
    """A member's candidate cell, lifted to ambient vertex labels.

    The base grid lives at level len(member)-1; objects and composite
    arrows are re-keyed along the order isomorphism onto the member.
    """

    __slots__ = ("member", "grid", "objects", "arrows", "_auts")

    def __init__(self, member, base_grid: CellGrid):
        self.member = member
        self.grid = base_grid
        self._auts = None
        lift = lambda b: tuple(member[v] for v in b)
        self.objects = {lift(b): o for b, o in base_grid.objects.items()}
        self.arrows = {}
        for s, t in comparable_pairs(sorted(base_grid.objects)):
            self.arrows[(lift(s), lift(t))] = base_grid.path_map(s, t)

    def automorphisms(self, backend, cap: int = 512):
        """Natural self-isomorphisms, in ambient labels (or None if over cap)."""
        if self._auts is None:
            arrows = [(s, t, m, m) for (s, t), m in self.arrows.items()]
            auts = natural_transformations(
                backend, self.objects, self.objects, arrows, iso_only=True, limit=cap + 1
            )
            self._auts = None if len(auts) > cap else auts
            if self._auts is None:
                self._auts = False
        return None if self._auts is False else self._auts


def _transport_member(backend, member_cell: _MemberCell, overlap_keys, partial, iso):
    """Conjugate a member cell so its overlap equals the partial data.

    ``iso`` maps partial objects to the member cell's (components
    partial_t -> cell_t); entries at overlap keys are replaced by the
    partial's, and boundary-crossing arrows are conjugated.
    """
    objects = dict(member_cell.objects)
    arrows = {}
    inv = {}
    for t in overlap_keys:
        objects[t] = partial.objects[t]
        inv[t] = backend.inverse(iso[t])
    for (s, t), m in member_cell.arrows.items():
        if (s, t) in partial.arrows:
            arrows[(s, t)] = partial.arrows[(s, t)]
            continue
        if s in inv:
            m = backend.compose(m, iso[s])
        if t in inv:
            m = backend.compose(inv[t], m)
        arrows[(s, t)] = m
    return objects, arrows


def enumerate_limit_classes(engine_backend, k, members, member_catalogs, cap=None):
    """Compatible families over the members, one per isomorphism class.

    ``member_catalogs[i]`` lists class representatives for member i,
    already relabeled into ambient vertices.  Families are built member
    by member with transport, deduplicating partial states by natural
    isomorphism after every stage (isomorphic partials have matching
    extension classes, again by transport).
    """
    cap = cap or _max_cells_cap()
    states = [PartialDiagram(engine_backend, {}, {})]
    seen_tuples: set = set()
    seen_members: list = []
    for idx, member in enumerate(members):
        member_tuples = set(itertools.combinations(sorted(member), k + 1))
        overlap_keys = sorted(seen_tuples & member_tuples)
        # Arrow keys stored by every state on this overlap: pairs whose
        # joint support fits inside some earlier member.
        arrow_keys = []
        for s, t in comparable_pairs(overlap_keys):
            joint = set(s) | set(t)
            if any(joint <= prev for prev in seen_members):
                arrow_keys.append((s, t))
        arrow_keys.sort()
        cells = [_MemberCell(member, g) for g in member_catalogs[idx]]
        # Candidates must match the state on the overlap; bucket them by
        # the iso-invariant fingerprint of their overlap restriction.
        buckets: dict = {}
        for cell in cells:
            sig = (
                tuple(cell.objects[t] for t in overlap_keys),
                tuple(engine_backend.rank_of(cell.arrows[key]) for key in arrow_keys),
            )
            buckets.setdefault(sig, []).append(cell)
        new_states = []
        for st in states:
            overlap_arrows = {key: st.arrows[key] for key in arrow_keys}
            sig = (
                tuple(st.objects[t] for t in overlap_keys),
                tuple(engine_backend.rank_of(overlap_arrows[key]) for key in arrow_keys),
            )
            for cell in buckets.get(sig, []):
                isos = _overlap_isos(engine_backend, st, overlap_keys, overlap_arrows, cell)
                isos = _orbit_reps(engine_backend, isos, cell, overlap_keys)
                for iso in isos:
                    objects, arrows = _transport_member(
                        engine_backend, cell, overlap_keys, st, iso
                    )
                    merged_objs = dict(st.objects)
                    merged_objs.update(objects)
                    merged_arrows = dict(st.arrows)
                    ok = True
                    for key, m in arrows.items():
                        if key in merged_arrows:
                            if merged_arrows[key] != m:
                                ok = False
                                break
                        else:
                            merged_arrows[key] = m
                    if not ok:
                        continue
                    merged = PartialDiagram(engine_backend, merged_objs, merged_arrows)
                    if not _composition_consistent(engine_backend, merged, set(arrows)):
                        continue
                    new_states.append(merged)
                    if len(new_states) > cap:
                        raise ResourceLimit(
                            f"limit enumeration exceeded {cap} states"
                        )
        states = _dedupe_partials(new_states)
        seen_tuples |= member_tuples
        seen_members.append(set(member))
    return states


def _orbit_reps(backend, isos, cell: _MemberCell, overlap_keys):
    """One overlap iso per orbit of the cell's automorphism action.

    Transports along isos in the same orbit produce isomorphic merged
    states (conjugate by the automorphism on the new part), so only
    orbit representatives need to be pursued.
    """
    if len(isos) <= 1:
        return isos
    auts = cell.automorphisms(backend)
    if auts is None or len(auts) <= 1:
        return isos
    restricted = {
        tuple(sorted((t, a[t]) for t in overlap_keys)) for a in auts
    }
    if len(restricted) <= 1:
        return isos
    reps = []
    seen = set()
    for iso in isos:
        key = tuple(sorted(iso.items()))
        if key in seen:
            continue
        reps.append(iso)
        for a in auts:
            composed = {t: backend.compose(a[t], iso[t]) for t in overlap_keys}
            seen.add(tuple(sorted(composed.items())))
    return reps


def _overlap_isos(backend, partial, overlap_keys, overlap_arrows, cell: _MemberCell):
    objA = {t: partial.objects[t] for t in overlap_keys}
    objB = {}
    for t in overlap_keys:
        if t not in cell.objects:
            return []
        objB[t] = cell.objects[t]
    arrows = []
    for (s, t), m in overlap_arrows.items():
        if (s, t) not in cell.arrows:
            return []
        arrows.append((s, t, m, cell.arrows[(s, t)]))
    return natural_transformations(backend, objA, objB, arrows, iso_only=True)


def _composition_consistent(backend, partial: PartialDiagram, new_keys):
    """Functoriality across members: stored composites must agree."""
    arrows = partial.arrows
    by_src = {}
    by_dst = {}
    for (s, t) in arrows:
        by_src.setdefault(s, []).append(t)
        by_dst.setdefault(t, []).append(s)
    for (a, b) in new_keys:
        for c in by_src.get(b, []):
            if (a, c) in arrows:
                if backend.compose(arrows[(b, c)], arrows[(a, b)]) != arrows[(a, c)]:
                    return False
        for z in by_dst.get(a, []):
            if (z, b) in arrows:
                if backend.compose(arrows[(a, b)], arrows[(z, a)]) != arrows[(z, b)]:
                    return False
    return True


def _partial_signature(st: PartialDiagram):
    return (
        tuple(sorted(st.objects.items())),
        tuple((k, st.backend.rank_of(m)) for k, m in sorted(st.arrows.items())),
    )


def _dedupe_partials(states):
    buckets = {}
    for st in states:
        buckets.setdefault(_partial_signature(st), []).append(st)
    reps = []
    for signature in sorted(buckets):
        kept = []
        for st in buckets[signature]:
            if not any(partial_iso(st, other) for other in kept):
                kept.append(st)
        reps.extend(kept)
    return reps


# ---------------------------------------------------------------------------
# The Segal map check.
# ---------------------------------------------------------------------------


def segal_map_check(
    X: GridSimplicial,
    n: int,
    d: int,
    side: Side,
    poset: SegalPoset | None = None,
    ff_mode: str = "auto",
) -> EquivalenceReport:
    """Is the canonical restriction functor X_n -> lim over the side's
    poset an equivalence on the bounded slice?

    Essential surjectivity matches every compatible family against the
    full catalog up to isomorphism; full faithfulness checks, for every
    ordered pair of cell-class representatives, that restriction is a
    bijection from natural transformations of full cells to those of
    their partial restrictions.
    """
    if poset is None:
        poset = segal_poset(n, d, side)
    members = [X.translate(n, M) for M in poset.member_sets()]
    member_sets = [set(m) for m in members]
    full_catalog = list(X.catalog(n))
    backend = X.backend

    member_catalogs = []
    for member in members:
        base = cells_catalog(X.backend, X.k, len(member) - 1, X.variant, X.bound)
        member_catalogs.append(list(base))

    covered = sorted(
        {
            t
            for member in members
            for t in itertools.combinations(sorted(member), X.k + 1)
        }
    )
    pair_keys = covered_structure(covered, member_sets)

    limit_classes = enumerate_limit_classes(backend, X.k, members, member_catalogs)

    restrictions = [
        restrict_grid(g, covered, member_sets, pair_keys) for g in full_catalog
    ]

    # Essential surjectivity.
    ess = True
    ess_witness = None
    by_profile = {}
    for g, r in zip(full_catalog, restrictions):
        by_profile.setdefault(r.profile(), []).append(r)
    for L in limit_classes:
        candidates = by_profile.get(L.profile(), [])
        if not any(partial_iso(L, r) for r in candidates):
            ess = False
            ess_witness = {
                "unreached_family": {str(k): v for k, v in sorted(L.objects.items())}
            }
            break

    # Full faithfulness on class representatives.
    if ff_mode == "auto":
        ff_mode = "direct" if len(full_catalog) ** 2 <= 4096 else "generators"
    if ff_mode == "direct":
        ff, ff_witness = _ff_direct(full_catalog, restrictions)
    else:
        ff, ff_witness = _ff_by_generators(X, n, covered, member_sets, pair_keys)

    report = EquivalenceReport(ess, ff, ess_witness, ff_witness)
    report.details = {
        "construction": X.describe(),
        "n": n,
        "d": d,
        "side": side.value,
        "cell_classes": len(full_catalog),
        "limit_classes": len(limit_classes),
        "ff_mode": ff_mode,
        "maximal_elements": [list(m) for m in poset.member_sets()],
    }
    return report


def _restriction_key(FA: PartialDiagram, phi: dict):
    return tuple(sorted((t, phi[t]) for t in FA.objects))


def _pair_bijective(A, B, FA, FB):
    """Is restriction a bijection Hom(A, B) -> Hom(FA, FB)?

    Returns (ok, witness); compares the restricted full transformations
    with the independently enumerated partial ones.
    """
    full_homs = _full_homs(A, B)
    part_homs = partial_homs(FA, FB)
    images = [_restriction_key(FA, phi) for phi in full_homs]
    part_keys = {_restriction_key(FA, psi) for psi in part_homs}
    if len(set(images)) != len(images):
        return False, {"kind": "not-faithful", "pair": (repr(A), repr(B))}
    if set(images) != part_keys:
        return False, {
            "kind": "not-full",
            "pair": (repr(A), repr(B)),
            "full_count": len(images),
            "limit_count": len(part_homs),
        }
    return True, None


def _ff_direct(full_catalog, restrictions):
    for A, FA in zip(full_catalog, restrictions):
        for B, FB in zip(full_catalog, restrictions):
            ok, witness = _pair_bijective(A, B, FA, FB)
            if not ok:
                return False, witness
    return True, None


def _ff_by_generators(X: GridSimplicial, n: int, covered, member_sets, pair_keys=None):
    """Full faithfulness via the direct-sum generators.

    Every cell class is a direct sum of single-strand generators and
    restriction preserves sums on the nose, so hom bijectivity for all
    pairs reduces to generator pairs.  Over the matrix backends hom
    sets are products over generator pairs (additivity).  Over pointed
    sets a transformation assigns each source strand at most one target
    strand, subject to per-entry injectivity; reduction is then valid
    provided (checked here, full and partial sides alike):

    * generator-pair restriction maps are bijections,
    * no hom out of a generator hits two target strands
      (|Hom(P, R + R')| = |Hom(P, R)| + |Hom(P, R')| - 1), and
    * collisions are visible on covered entries: nonzero homs into a
      common target co-support on the covered tuples iff they
      co-support anywhere.
    """
    backend = X.backend
    if pair_keys is None:
        pair_keys = covered_structure(covered, member_sets)
    gens = cell_generators(backend, X.k, X.underlying_level(n), X.variant)
    gen_restr = [restrict_grid(g, covered, member_sets, pair_keys) for g in gens]
    for P, FP in zip(gens, gen_restr):
        for Q, FQ in zip(gens, gen_restr):
            ok, witness = _pair_bijective(P, Q, FP, FQ)
            if not ok:
                return False, witness
    if backend.key[0] != "f1":
        return True, None
    # Pointed sets: single-target and collision-detectability checks.
    for pi, P in enumerate(gens):
        FP = gen_restr[pi]
        for r1, R1 in enumerate(gens):
            for r2, R2 in enumerate(gens):
                if r2 < r1:
                    continue
                S = direct_sum_cells(backend, [R1, R2])
                FS = restrict_grid(S, covered, member_sets, pair_keys)
                nf = len(_full_homs(P, S))
                np_ = len(partial_homs(FP, FS))
                want_full = len(_full_homs(P, R1)) + len(_full_homs(P, R2)) - 1
                want_part = (
                    len(partial_homs(FP, gen_restr[r1]))
                    + len(partial_homs(FP, gen_restr[r2]))
                    - 1
                )
                if nf != want_full or np_ != want_part:
                    return False, {
                        "kind": "strand-mixing",
                        "source": repr(P),
                        "targets": (repr(R1), repr(R2)),
                        "counts": (nf, want_full, np_, want_part),
                    }
    covered_set = set(covered)
    for P1, FP1 in zip(gens, gen_restr):
        for P2 in gens:
            for R in gens:
                homs1 = [h for h in _full_homs(P1, R) if _support(h)]
                homs2 = [h for h in _full_homs(P2, R) if _support(h)]
                for h1 in homs1:
                    s1 = _support(h1)
                    for h2 in homs2:
                        s2 = _support(h2)
                        both = s1 & s2
                        if bool(both) != bool(both & covered_set):
                            return False, {
                                "kind": "hidden-collision",
                                "pair": (repr(P1), repr(P2)),
                                "target": repr(R),
                            }
    return True, None


def _support(phi: dict):
    return {t for t, m in phi.items() if any(v for v in m[2])}


def _full_homs(A: CellGrid, B: CellGrid):
    arrows = [
        (beta, step_target(beta, i, A.n), m, B.arrows[(beta, i)])
        for (beta, i), m in A.arrows.items()
    ]
    return natural_transformations(A.backend, A.objects, B.objects, arrows)


def fully_segal_check(X: GridSimplicial, n: int, d: int) -> dict:
    lower = segal_map_check(X, n, d, Side.LOWER)
    upper = segal_map_check(X, n, d, Side.UPPER)
    return {
        "lower": lower,
        "upper": upper,
        "verdict": lower.verdict and upper.verdict,
    }
