"""The direct-sum Segal construction via sheaves on sphere cells.

The simplicial pointed set has, in level n, the surjective monotone
maps [n] ->> [k] together with a basepoint absorbing everything else.
A sheaf valued in a pointed backend is determined by its stalks at the
non-base elements, and sections over any pointed subset are the direct
sums of the member stalks; morphisms act stalkwise.  Simplicial
restriction is the direct image: the stalk over beta is the sum over
the fiber of the collapse map.

Segal map checks exploit that objects are integer stalk tuples (direct
sums add sizes, so strict compatibility is arithmetic) and that limit
morphisms decompose into matrix components between top-level stalks;
merging and zero-forcing of those component slots is pure fiber
combinatorics, computed once per configuration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .backends import Backend
from .fincat import EquivalenceReport
from .subsets import SegalPoset, Side, SubsetOfN, segal_poset


@dataclass(frozen=True)
class SphereCell:
    """Non-base elements of the level-n cell of the pointed k-sphere."""

    k: int
    n: int
    elements: tuple[tuple[int, ...], ...]


def surjections(n: int, k: int):
    """Values of all monotone surjections [n] ->> [k], lexicographic."""
    if n < k:
        return []
    out = []
    for jumps in itertools.combinations(range(n), k):
        vals = []
        level = 0
        js = set(jumps)
        for i in range(n + 1):
            vals.append(level)
            if i in js:
                level += 1
        out.append(tuple(vals))
    return sorted(out)


def sphere_cells(k: int, n: int) -> SphereCell:
    return SphereCell(k, n, tuple(surjections(n, k)))


def restrict_surjection(alpha: tuple, subset) -> tuple | None:
    """alpha composed with the inclusion of the subset, or None when the
    restriction is no longer surjective (it hits the basepoint)."""
    vals = tuple(alpha[v] for v in sorted(subset))
    if set(vals) != set(range(max(alpha) + 1)):
        return None
    return vals


def pointed_preimage(mapping: dict, source_elements, U: frozenset) -> frozenset:
    """rho^x: pointed preimage of a pointed subset (basepoints implicit).

    ``mapping`` sends source elements to target elements or None.
    """
    return frozenset(e for e in source_elements if mapping.get(e) in U)


def sphere_map(k: int, psi_values: tuple, n: int, m: int) -> dict:
    """The pointed map S^k_n -> S^k_m induced by psi: [m] -> [n].

    Precomposition with psi; non-surjective composites collapse to the
    basepoint (None).
    """
    out = {}
    for alpha in surjections(n, k):
        vals = tuple(alpha[psi_values[v]] for v in range(m + 1))
        out[alpha] = vals if set(vals) == set(range(k + 1)) else None
    return out


def i_alpha(alpha: tuple, n: int) -> SubsetOfN:
    """The union of adjacent pairs at the jump positions of alpha."""
    members = set()
    for i in range(len(alpha) - 1):
        if alpha[i] < alpha[i + 1]:
            members.add(i)
            members.add(i + 1)
    return SubsetOfN(n, tuple(sorted(members)))


def singleton_fiber_elements(alpha: tuple, poset: SegalPoset):
    """Poset elements I with pointed-preimage fiber exactly {alpha}."""
    n = len(alpha) - 1
    out = []
    for I in poset.all_elements:
        beta = restrict_surjection(alpha, I.members)
        if beta is None:
            continue
        fiber = [
            a for a in surjections(n, max(alpha)) if restrict_surjection(a, I.members) == beta
        ]
        if fiber == [alpha]:
            out.append(I.members)
    return out


# ---------------------------------------------------------------------------
# Sheaf objects and the cells category view.
# ---------------------------------------------------------------------------


def sheaf_objects(backend: Backend, k: int, n: int, bound: int):
    """All stalk tuples within the bound, over the sorted sphere elements."""
    elements = surjections(n, k)
    out = []
    for combo in itertools.product(backend.objects_upto(bound), repeat=len(elements)):
        out.append(combo)
    return elements, out


def direct_image_sizes(stalks: dict, mapping: dict, target_elements):
    """Stalkwise direct image along a pointed map (sizes add over fibers)."""
    out = {b: 0 for b in target_elements}
    for a, size in stalks.items():
        b = mapping.get(a)
        if b is not None:
            out[b] += size
    return out


class SheafSimplicial:
    """The k-dimensional direct-sum construction over a backend.

    Stalk sizes are plain integers, so objects at every level are
    integer tuples and restriction is summation over fibers.
    """

    def __init__(self, backend: Backend, k: int, bound: int):
        self.backend = backend
        self.k = k
        self.bound = bound

    def describe(self) -> str:
        return f"Sum^{self.k}({self.backend.name}; bound {self.bound})"

    def elements(self, n: int):
        return surjections(n, self.k)


def _topfiber(n: int, k: int, member, beta):
    return tuple(
        a for a in surjections(n, k) if restrict_surjection(a, member) == beta
    )


def _slot_structure(k: int, n: int, members):
    """Merge/zero structure of limit hom component slots.

    Slots are (member, alpha, alpha') with alpha, alpha' sharing the
    member-fiber; constraints at pairwise intersections merge equal
    component slots and force the mismatched ones to zero.  Everything
    here is independent of the objects involved.
    """
    slots = {}
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    restr = {}
    for m in members:
        for a in surjections(n, k):
            restr[(m, a)] = restrict_surjection(a, m)
    for m in members:
        for a1 in surjections(n, k):
            b1 = restr[(m, a1)]
            if b1 is None:
                continue
            for a2 in surjections(n, k):
                if restr[(m, a2)] == b1:
                    key = (m, a1, a2)
                    slots[key] = False  # not zero-forced yet
                    parent[key] = key
    members_list = list(members)
    for i, m1 in enumerate(members_list):
        for m2 in members_list[i + 1 :]:
            inter = tuple(sorted(set(m1) & set(m2)))
            if not inter:
                continue
            for a1 in surjections(n, k):
                d1 = restrict_surjection(a1, inter)
                if d1 is None:
                    continue
                for a2 in surjections(n, k):
                    if restrict_surjection(a2, inter) != d1:
                        continue
                    same1 = restr[(m1, a1)] is not None and restr[(m1, a1)] == restr[(m1, a2)]
                    same2 = restr[(m2, a1)] is not None and restr[(m2, a1)] == restr[(m2, a2)]
                    if same1 and same2:
                        union((m1, a1, a2), (m2, a1, a2))
                    elif same1 and not same2:
                        slots[(m1, a1, a2)] = True
                    elif same2 and not same1:
                        slots[(m2, a1, a2)] = True
    classes = {}
    zero_forced = set()
    for key in slots:
        root = find(key)
        classes.setdefault(root, []).append(key)
    for key, forced in slots.items():
        if forced:
            zero_forced.add(find(key))
    return classes, zero_forced


def segal_check_sum(
    backend: Backend,
    k: int,
    n: int,
    bound: int,
    d: int | None = None,
    side: Side = Side.LOWER,
) -> EquivalenceReport:
    """Bounded-slice Segal map check for the direct-sum construction.

    Limit objects are stalk-size families over the maximal poset
    elements with matching sums on intersections; a family's unique
    possible preimage is read off at the singleton-fiber elements, so
    essential surjectivity is a direct computation.  Full faithfulness
    reduces to the component-slot structure: restriction is bijective
    on homs for every pair of objects iff every top stalk is seen by
    some member, each diagonal slot family merges to a single class,
    and every off-diagonal class is forced to zero.
    """
    if d is None:
        d = 2 * k - 1
    poset = segal_poset(n, d, side)
    members = [tuple(m) for m in poset.member_sets()]
    alphas = surjections(n, k)

    details = {
        "construction": f"Sum^{k}({backend.name})",
        "n": n,
        "d": d,
        "side": side.value,
        "bound": bound,
        "stalks": len(alphas),
        "maximal_elements": [list(m) for m in members],
    }

    # --- full faithfulness (object-independent slot analysis) ---------
    classes, zero_forced = _slot_structure(k, n, members)
    ff = True
    ff_witness = None
    relevant = {a: False for a in alphas}
    diag_classes = {a: set() for a in alphas}
    for root, keys in classes.items():
        for (m, a1, a2) in keys:
            if a1 == a2:
                relevant[a1] = True
                diag_classes[a1].add(root)
    for a in alphas:
        if not relevant[a]:
            ff = False
            ff_witness = {"kind": "stalk-invisible", "alpha": a}
            break
        if ff and len(diag_classes[a]) != 1:
            ff = False
            ff_witness = {"kind": "diagonal-unmerged", "alpha": a}
            break
        if ff and any(root in zero_forced for root in diag_classes[a]):
            ff = False
            ff_witness = {"kind": "diagonal-zero-forced", "alpha": a}
            break
    if ff:
        for root, keys in classes.items():
            m, a1, a2 = keys[0]
            if a1 != a2 and root not in zero_forced:
                ff = False
                ff_witness = {"kind": "off-diagonal-slot-free", "slot": (a1, a2)}
                break
    details["hom_slots"] = len(classes)

    # --- limit object enumeration and essential surjectivity ----------
    member_elements = {m: surjections(len(m) - 1, k) for m in members}
    fibers = {
        (m, b): _topfiber(n, k, m, b)
        for m in members
        for b in member_elements[m]
    }
    pair_constraints = []
    for i, m1 in enumerate(members):
        for m2 in members[i + 1 :]:
            inter = tuple(sorted(set(m1) & set(m2)))
            if not inter:
                continue
            for delta in surjections(len(inter) - 1, k):
                f1 = [
                    b
                    for b in member_elements[m1]
                    if restrict_surjection_rel(m1, b, inter) == delta
                ]
                f2 = [
                    b
                    for b in member_elements[m2]
                    if restrict_surjection_rel(m2, b, inter) == delta
                ]
                pair_constraints.append(((m1, tuple(f1)), (m2, tuple(f2))))

    var_keys = [(m, b) for m in members for b in member_elements[m]]
    var_caps = {key: bound * max(1, len(fibers[key])) for key in var_keys}

    profiles = []

    def extend(idx, assignment):
        if idx == len(var_keys):
            profiles.append(dict(assignment))
            return
        key = var_keys[idx]
        for v in range(var_caps[key] + 1):
            assignment[key] = v
            ok = True
            for (g1, g2) in pair_constraints:
                m1, f1 = g1
                m2, f2 = g2
                k1 = [(m1, b) for b in f1]
                k2 = [(m2, b) for b in f2]
                if all(kk in assignment for kk in k1) and all(
                    kk in assignment for kk in k2
                ):
                    if sum(assignment[kk] for kk in k1) != sum(
                        assignment[kk] for kk in k2
                    ):
                        ok = False
                        break
            if ok:
                extend(idx + 1, assignment)
            del assignment[key]

    extend(0, {})
    details["limit_objects"] = len(profiles)

    # Forced preimage per alpha: read off a singleton-fiber element.
    singleton_reader = {}
    for a in alphas:
        for I in poset.all_elements:
            beta = restrict_surjection(a, I.members)
            if beta is None:
                continue
            fib = [x for x in alphas if restrict_surjection(x, I.members) == beta]
            if fib == [a]:
                singleton_reader[a] = (I.members, beta)
                break

    def derived(profile, I, beta):
        for m in members:
            if set(I) <= set(m):
                rel = [
                    b
                    for b in member_elements[m]
                    if restrict_surjection_rel(m, b, I) == beta
                ]
                return sum(profile[(m, b)] for b in rel)
        raise ValueError(f"{I} not inside any maximal element")

    ess = True
    ess_witness = None
    decomposition_ok = True
    for profile in profiles:
        if len(singleton_reader) == len(alphas):
            candidate = {
                a: derived(profile, *singleton_reader[a]) for a in alphas
            }
        else:
            candidate = _search_preimage(backend, alphas, members, member_elements, fibers, profile, bound)
            if candidate is None:
                ess = False
                ess_witness = {"kind": "no-preimage", "profile": _profile_json(profile)}
                break
        if any(v > bound for v in candidate.values()):
            ess = False
            ess_witness = {
                "kind": "preimage-exceeds-bound",
                "profile": _profile_json(profile),
            }
            break
        for key in var_keys:
            m, b = key
            if sum(candidate[a] for a in fibers[key]) != profile[key]:
                ess = False
                ess_witness = {
                    "kind": "no-preimage",
                    "profile": _profile_json(profile),
                    "at": [list(m), list(b)],
                }
                break
        if not ess:
            break
        # Stalk decomposition consistency: the section at any poset
        # element splits into the singleton-fiber contributions.
        for I in poset.all_elements:
            for beta in surjections(len(I.members) - 1, k):
                lhs = derived(profile, I.members, beta)
                rhs = 0
                for a in alphas:
                    if restrict_surjection(a, I.members) == beta and a in singleton_reader:
                        rhs += derived(profile, *singleton_reader[a])
                if len(singleton_reader) == len(alphas) and lhs != rhs:
                    decomposition_ok = False
    details["stalk_decomposition_ok"] = decomposition_ok

    report = EquivalenceReport(ess and decomposition_ok, ff, ess_witness, ff_witness)
    report.details = details
    return report


def restrict_surjection_rel(member, beta, subset):
    """Restrict beta (indexed by the member) to a subset of the member."""
    positions = [member.index(v) for v in subset]
    vals = tuple(beta[p] for p in positions)
    top = max(beta)
    if set(vals) != set(range(top + 1)):
        return None
    return vals


def _search_preimage(backend, alphas, members, member_elements, fibers, profile, bound):
    for combo in itertools.product(range(bound + 1), repeat=len(alphas)):
        candidate = dict(zip(alphas, combo))
        ok = True
        for m in members:
            for b in member_elements[m]:
                if sum(candidate[a] for a in fibers[(m, b)]) != profile[(m, b)]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return candidate
    return None


def _profile_json(profile):
    return {f"{list(m)}|{list(b)}": v for (m, b), v in sorted(profile.items())}
