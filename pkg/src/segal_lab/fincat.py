"""Explicit finite categories, functors, strict limits, equivalences.

``FinCategory`` is a minimal protocol: a list of objects plus hom
enumeration, composition and identities.  ``TableCategory`` stores
everything in dictionaries and is the workhorse for small generic
constructions (strict limits over subset posets, contract tests).  The
heavy Segal checks use specialized engines, but they report through the
same ``EquivalenceReport``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


class FinCategory:
    """Protocol: objects(), hom(a, b), compose(g, f), identity(x)."""

    def objects(self):
        raise NotImplementedError

    def hom(self, a, b):
        raise NotImplementedError

    def compose(self, g, f):
        raise NotImplementedError

    def identity(self, a):
        raise NotImplementedError

    def hom_count(self, a, b) -> int:
        return len(self.hom(a, b))

    # -- derived -------------------------------------------------------
    def is_iso(self, f) -> bool:
        src, dst = self.mor_src(f), self.mor_dst(f)
        for g in self.hom(dst, src):
            if self.compose(g, f) == self.identity(src) and self.compose(
                f, g
            ) == self.identity(dst):
                return True
        return False

    def isomorphic(self, a, b) -> bool:
        if a == b:
            return True
        return any(self.is_iso(f) for f in self.hom(a, b))

    def mor_src(self, f):
        return f[0]

    def mor_dst(self, f):
        return f[1]

    def iso_classes(self):
        """Objects grouped into isomorphism classes (list of lists)."""
        classes: list[list] = []
        for x in self.objects():
            for cls in classes:
                if self.isomorphic(cls[0], x):
                    cls.append(x)
                    break
            else:
                classes.append([x])
        return classes

    def check_axioms(self):
        """Identity and associativity on all composable pairs/triples."""
        objs = self.objects()
        for a in objs:
            ida = self.identity(a)
            assert ida in self.hom(a, a)
        for a, b in itertools.product(objs, repeat=2):
            for f in self.hom(a, b):
                assert self.compose(f, self.identity(a)) == f
                assert self.compose(self.identity(b), f) == f
        for a, b, c, d in itertools.product(objs, repeat=4):
            for f in self.hom(a, b):
                for g in self.hom(b, c):
                    for h in self.hom(c, d):
                        assert self.compose(h, self.compose(g, f)) == self.compose(
                            self.compose(h, g), f
                        )


class TableCategory(FinCategory):
    """A finite category given by explicit tables.

    Morphisms are triples (src, dst, tag); composition is a dict keyed
    by pairs of morphisms; identities are tabulated per object and
    compose trivially by default.
    """

    def __init__(self, objects, homs, compose_table, identities=None):
        self._objects = list(objects)
        self._homs = {k: list(v) for k, v in homs.items()}
        self._compose = dict(compose_table)
        if identities is None:
            identities = {a: (a, a, "id") for a in objects}
            for a in objects:
                key = (a, a)
                if identities[a] not in self._homs.get(key, []):
                    self._homs.setdefault(key, []).append(identities[a])
        self._identities = identities

    def objects(self):
        return self._objects

    def hom(self, a, b):
        return self._homs.get((a, b), [])

    def identity(self, a):
        return self._identities[a]

    def compose(self, g, f):
        if f[1] != g[0]:
            raise ValueError("not composable")
        if (g, f) in self._compose:
            return self._compose[(g, f)]
        if f == self.identity(f[0]):
            return g
        if g == self.identity(g[1]):
            return f
        raise KeyError(f"composition not tabulated: {g} o {f}")


def terminal_category():
    return TableCategory(["*"], {}, {})


def discrete_category(objects):
    return TableCategory(objects, {}, {})


@dataclass
class EquivalenceReport:
    essentially_surjective: bool
    fully_faithful: bool
    surjectivity_witness: dict | None = None
    faithfulness_witness: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return self.essentially_surjective and self.fully_faithful

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "essentially_surjective": self.essentially_surjective,
            "fully_faithful": self.fully_faithful,
            "surjectivity_witness": _jsonable(self.surjectivity_witness),
            "faithfulness_witness": _jsonable(self.faithfulness_witness),
            "details": _jsonable(self.details),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return repr(x)


class CatFunctor:
    """A functor given by callables on objects and morphisms."""

    def __init__(self, source: FinCategory, target: FinCategory, on_object, on_morphism):
        self.source = source
        self.target = target
        self.on_object = on_object
        self.on_morphism = on_morphism

    def check_functoriality(self):
        src = self.source
        for a in src.objects():
            assert self.on_morphism(src.identity(a)) == self.target.identity(
                self.on_object(a)
            )
        objs = src.objects()
        for a, b, c in itertools.product(objs, repeat=3):
            for f in src.hom(a, b):
                for g in src.hom(b, c):
                    assert self.on_morphism(src.compose(g, f)) == self.target.compose(
                        self.on_morphism(g), self.on_morphism(f)
                    )


def is_equivalence(functor: CatFunctor) -> EquivalenceReport:
    """Decide equivalence of finite categories directly.

    Essential surjectivity searches the target's iso classes for images;
    full faithfulness checks hom bijections on iso-class representatives
    (hom cardinalities and the bijection property are invariant under
    replacing objects by isomorphic ones).
    """
    src, dst = functor.source, functor.target
    image = [functor.on_object(a) for a in src.objects()]
    ess = True
    ess_witness = None
    for cls in dst.iso_classes():
        rep = cls[0]
        if not any(dst.isomorphic(rep, im) for im in image):
            ess = False
            ess_witness = {"unreached_object": rep}
            break
    ff = True
    ff_witness = None
    reps = [cls[0] for cls in src.iso_classes()]
    for a, b in itertools.product(reps, repeat=2):
        homs = src.hom(a, b)
        mapped = [functor.on_morphism(f) for f in homs]
        target_homs = dst.hom(functor.on_object(a), functor.on_object(b))
        if len(set(mapped)) != len(homs):
            ff = False
            ff_witness = {"kind": "not-faithful", "pair": (a, b)}
            break
        if set(mapped) != set(target_homs):
            ff = False
            ff_witness = {"kind": "not-full", "pair": (a, b)}
            break
    return EquivalenceReport(ess, ff, ess_witness, ff_witness)


def limit_over_poset(poset, cells, restrictions) -> TableCategory:
    """Strict limit of categories over a subset poset.

    ``poset`` is a SegalPoset (or anything with maximal ``member_sets``);
    ``cells`` maps a member tuple to a FinCategory; ``restrictions`` maps
    (sup, sub) tuples to a CatFunctor.  Objects of the limit are
    families over the maximal elements that agree on pairwise
    intersections (which suffices: every element of the downward-closed
    poset sits under a maximal one, and agreement transports along
    intersections); morphisms are componentwise.
    """
    maximal = [tuple(m) for m in poset.member_sets()]
    cats = {m: cells(m) for m in maximal}
    pairs = [
        (m1, m2, tuple(sorted(set(m1) & set(m2))))
        for m1, m2 in itertools.combinations(maximal, 2)
        if set(m1) & set(m2)
    ]

    def restricted_obj(member, inter, x):
        return restrictions((member, inter)).on_object(x)

    families = []

    def extend(idx, current):
        if idx == len(maximal):
            families.append(tuple(current))
            return
        m = maximal[idx]
        for x in cats[m].objects():
            ok = True
            for m1, m2, inter in pairs:
                if m2 != m or m1 not in maximal[:idx]:
                    continue
                prev = current[maximal.index(m1)]
                if restricted_obj(m1, inter, prev) != restricted_obj(m, inter, x):
                    ok = False
                    break
            if ok:
                current.append(x)
                extend(idx + 1, current)
                current.pop()

    extend(0, [])

    homs = {}
    identities = {}
    for fam1 in families:
        for fam2 in families:
            mors = []
            choices = [cats[m].hom(x1, x2) for m, x1, x2 in zip(maximal, fam1, fam2)]
            for combo in itertools.product(*choices):
                ok = True
                for m1, m2, inter in pairs:
                    i1, i2 = maximal.index(m1), maximal.index(m2)
                    r1 = restrictions((m1, inter)).on_morphism(combo[i1])
                    r2 = restrictions((m2, inter)).on_morphism(combo[i2])
                    if r1 != r2:
                        ok = False
                        break
                if ok:
                    mors.append((fam1, fam2, combo))
            if mors:
                homs[(fam1, fam2)] = mors
    compose_table = {}
    for (fam1, fam2), fs in homs.items():
        for (fam2b, fam3), gs in homs.items():
            if fam2b != fam2:
                continue
            for f in fs:
                for g in gs:
                    combo = tuple(
                        cats[m].compose(gc, fc)
                        for m, gc, fc in zip(maximal, g[2], f[2])
                    )
                    compose_table[(g, f)] = (fam1, fam3, combo)
    for fam in families:
        identities[fam] = (fam, fam, tuple(cats[m].identity(x) for m, x in zip(maximal, fam)))
    return TableCategory(families, homs, compose_table, identities)
