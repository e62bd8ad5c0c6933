"""Diagram cells of the higher Waldhausen constructions.

A cell of dimension k at level n assigns a backend object to every
strictly increasing (k+1)-tuple in [n] (degenerate index tuples carry
the zero object implicitly) and a backend morphism to every elementary
step that increments one coordinate.  Validity asks every (k+2)-subset
to index a sequence of the variant's exactness class.

The catalog enumeration follows the spine route: chains at dimension
zero, then Kan extensions raising the dimension (appending a top vertex
with kernels, or by duality prepending a bottom vertex with cokernels).
A brute-force enumerator over all object/arrow assignments is kept as
an oracle for tiny bounds.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .backends import (
    Backend,
    Mor,
    SequenceClass,
    Variant,
    sequence_classify,
    sequence_satisfies,
)


def index_tuples(k: int, n: int):
    """All strictly increasing (k+1)-tuples in [n], lexicographic."""
    return list(itertools.combinations(range(n + 1), k + 1))


def step_target(beta: tuple, i: int, n: int):
    """beta with slot i incremented, or None if not strictly monotone."""
    v = beta[i] + 1
    if v > n or (i + 1 < len(beta) and v >= beta[i + 1]):
        return None
    return beta[:i] + (v,) + beta[i + 1 :]


def elementary_steps(beta: tuple, n: int):
    out = []
    for i in range(len(beta)):
        t = step_target(beta, i, n)
        if t is not None:
            out.append((i, t))
    return out


def face_of(gamma: tuple, j: int) -> tuple:
    """Delete the j-th smallest member."""
    return gamma[:j] + gamma[j + 1 :]


class ConstructionFailure(Exception):
    """A Kan or hyperplane construction could not produce a morphism."""


class CellGrid:
    """An immutable diagram cell; see the module docstring."""

    __slots__ = ("backend", "k", "n", "variant", "objects", "arrows", "_paths", "_key")

    def __init__(self, backend: Backend, k: int, n: int, variant: Variant, objects, arrows):
        self.backend = backend
        self.k = k
        self.n = n
        self.variant = variant
        self.objects = dict(objects)
        self.arrows = dict(arrows)
        self._paths = {}
        self._key = None

    def key(self):
        if self._key is None:
            self._key = (
                self.k,
                self.n,
                tuple(sorted(self.objects.items())),
                tuple(sorted(self.arrows.items())),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, CellGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<cell k={self.k} n={self.n} {self.variant.value} sizes={self.size_profile()}>"

    def size_profile(self):
        return tuple(self.objects[b] for b in sorted(self.objects))

    def entry(self, tup):
        """Object at a possibly-degenerate index tuple (0 when degenerate)."""
        if any(a >= b for a, b in zip(tup, tup[1:])):
            return 0
        return self.objects[tup]

    def path_map(self, src: tuple, dst: tuple) -> Mor:
        """Composite of elementary steps from src up to dst."""
        if src == dst:
            return self.backend.identity(self.objects[src])
        cached = self._paths.get((src, dst))
        if cached is not None:
            return cached
        # Raise the highest differing coordinate first; intermediates
        # stay strictly monotone.
        cur = src
        out = self.backend.identity(self.objects[src])
        for i in range(len(src) - 1, -1, -1):
            while cur[i] < dst[i]:
                nxt = cur[:i] + (cur[i] + 1,) + cur[i + 1 :]
                out = self.backend.compose(self.arrows[(cur, i)], out)
                cur = nxt
        self._paths[(src, dst)] = out
        return out

    def sequence_for(self, gamma: tuple):
        """The (k+2)-subset's sequence of k+1 composable maps."""
        faces = [face_of(gamma, j) for j in range(len(gamma))]
        maps = []
        for j in range(len(gamma) - 1, 0, -1):
            maps.append(self.path_map(faces[j], faces[j - 1]))
        return maps

    def to_json(self):
        return {
            "k": self.k,
            "n": self.n,
            "variant": self.variant.value,
            "objects": {" ".join(map(str, b)): o for b, o in sorted(self.objects.items())},
            "arrows": {
                f"{' '.join(map(str, b))}+{i}": list(map(list, m[2])) if isinstance(m[2], tuple) and m[2] and isinstance(m[2][0], tuple) else list(m[2])
                for (b, i), m in sorted(self.arrows.items())
            },
        }


def make_grid(backend, k, n, variant, objects, arrows, check_squares=True) -> CellGrid:
    g = CellGrid(backend, k, n, variant, objects, arrows)
    expected = set()
    for beta in g.objects:
        for i, t in elementary_steps(beta, n):
            expected.add((beta, i))
            m = g.arrows.get((beta, i))
            if m is None:
                raise ValueError(f"missing arrow {beta} +e_{i}")
            if m[0] != g.objects[beta] or m[1] != g.objects[t]:
                raise ValueError(f"arrow shape mismatch at {beta} +e_{i}")
    if set(g.arrows) != expected:
        raise ValueError("spurious arrows present")
    if check_squares:
        ok, witness = squares_commute(g)
        if not ok:
            raise ValueError(f"elementary squares do not commute: {witness}")
    return g


def squares_commute(g: CellGrid):
    for beta in g.objects:
        steps = elementary_steps(beta, g.n)
        for (i, ti), (j, tj) in itertools.combinations(steps, 2):
            tij = step_target(ti, j, g.n)
            tji = step_target(tj, i, g.n)
            if tij is None or tji is None or tij != tji:
                continue
            lhs = g.backend.compose(g.arrows[(ti, j)], g.arrows[(beta, i)])
            rhs = g.backend.compose(g.arrows[(tj, i)], g.arrows[(beta, j)])
            if lhs != rhs:
                return False, {"at": beta, "slots": (i, j)}
    return True, None


def validate_cell(g: CellGrid, variant: Variant | None = None):
    """Check every (k+2)-subset's sequence against the variant.

    Degenerate-level conditions hold by representation (degenerate
    tuples carry the zero object), and sequences indexed by degenerate
    (k+1)-simplices are automatically exact; only injective index
    tuples are checked.  Returns (ok, witness).
    """
    variant = variant or g.variant
    for gamma in itertools.combinations(range(g.n + 1), g.k + 2):
        maps = g.sequence_for(gamma)
        cls, witness = sequence_classify(g.backend, maps)
        if not sequence_satisfies(cls, variant):
            return False, {
                "gamma": gamma,
                "class": cls.value,
                "needed": variant.value,
                "witness": witness,
            }
    return True, None


# ---------------------------------------------------------------------------
# Natural transformations between diagrams (shared with partial diagrams).
# ---------------------------------------------------------------------------


def natural_transformations(
    backend,
    objA: dict,
    objB: dict,
    arrows,
    iso_only: bool = False,
    limit: int | None = None,
    count_only: bool = False,
):
    """All families (phi_key) commuting with the given arrow pairs.

    ``arrows`` is a list of (src_key, dst_key, morA, morB).  Components
    along epis (forward) and monos (backward) are forced; only the
    remaining keys are enumerated.  Returns a list of dicts, or a count.
    """
    if iso_only and any(objA[k] != objB[k] for k in objA):
        return 0 if count_only else []
    keys = sorted(objA)
    out_adj = {k: [] for k in keys}
    in_adj = {k: [] for k in keys}
    for (src, dst, mA, mB) in arrows:
        out_adj[src].append((dst, mA, mB, backend.epi_flag(mA)))
        in_adj[dst].append((src, mA, mB, backend.mono_flag(mB)))

    results = [] if not count_only else 0
    hom_sizes = {k: backend.hom_count(objA[k], objB[k]) for k in keys}

    def propagate(state, frontier):
        """Force components; returns updated keys or None on conflict."""
        added = []
        queue = list(frontier)
        while queue:
            key = queue.pop()
            phi = state[key]
            for dst, mA, mB, epi in out_adj[key]:
                rhs = backend.compose(mB, phi)
                if dst in state:
                    if backend.compose(state[dst], mA) != rhs:
                        for a in added:
                            del state[a]
                        return None
                elif epi:
                    forced = backend.solve_through_epi(mA, rhs)
                    if forced is None:
                        for a in added:
                            del state[a]
                        return None
                    state[dst] = forced
                    added.append(dst)
                    queue.append(dst)
            for src, mA, mB, mono in in_adj[key]:
                lhs = backend.compose(phi, mA)
                if src in state:
                    if backend.compose(mB, state[src]) != lhs:
                        for a in added:
                            del state[a]
                        return None
                elif mono:
                    forced = backend.solve_into_mono(mB, lhs)
                    if forced is None:
                        for a in added:
                            del state[a]
                        return None
                    state[src] = forced
                    added.append(src)
                    queue.append(src)
        return added

    def verify(state):
        for (src, dst, mA, mB) in arrows:
            if backend.compose(state[dst], mA) != backend.compose(mB, state[src]):
                return False
        return True

    def search(state):
        nonlocal results
        if limit is not None and (results if count_only else len(results)) >= limit:
            return
        unassigned = [k for k in keys if k not in state]
        if not unassigned:
            if verify(state):
                if count_only:
                    results += 1
                else:
                    results.append(dict(state))
            return
        pick = min(unassigned, key=hom_sizes.__getitem__)
        a, b = objA[pick], objB[pick]
        domain = backend.iso_list(a, b) if iso_only else backend.hom_list(a, b)
        for cand in domain:
            state[pick] = cand
            added = propagate(state, [pick])
            if added is not None:
                ok = True
                if iso_only:
                    ok = all(backend.is_iso(state[a2]) for a2 in added)
                if ok:
                    search(state)
                for a2 in added:
                    del state[a2]
            del state[pick]

    search({})
    return results


def grid_iso(a: CellGrid, b: CellGrid):
    """A natural isomorphism between two cells, or None."""
    if a.k != b.k or a.n != b.n or sorted(a.objects) != sorted(b.objects):
        return None
    if a.size_profile() != b.size_profile():
        return None
    arrows = [
        (beta, t, m, b.arrows[(beta, i)])
        for (beta, i), m in a.arrows.items()
        for t in [step_target(beta, i, a.n)]
    ]
    found = natural_transformations(
        a.backend, a.objects, b.objects, arrows, iso_only=True, limit=1
    )
    return found[0] if found else None


def grid_homs(a: CellGrid, b: CellGrid, limit=None, count_only=False):
    arrows = [
        (beta, step_target(beta, i, a.n), m, b.arrows[(beta, i)])
        for (beta, i), m in a.arrows.items()
    ]
    return natural_transformations(
        a.backend, a.objects, b.objects, arrows, limit=limit, count_only=count_only
    )


def grid_signature(g: CellGrid):
    """Iso-invariant fingerprint: entry sizes plus arrow rank data."""
    return (
        g.size_profile(),
        tuple(
            (beta, i, g.backend.rank_of(m)) for (beta, i), m in sorted(g.arrows.items())
        ),
    )


def dedupe_by_iso(grids):
    """One representative per natural-isomorphism class, stable order."""
    buckets = {}
    for g in grids:
        buckets.setdefault(grid_signature(g), []).append(g)
    reps = []
    for signature in sorted(buckets):
        kept = []
        for g in buckets[signature]:
            if not any(grid_iso(g, h) for h in kept):
                kept.append(g)
        reps.extend(kept)
    return reps


# ---------------------------------------------------------------------------
# Reindexing, duality, path-space forgetfuls, Kan extensions.
# ---------------------------------------------------------------------------


def reindex(g: CellGrid, psi_values: tuple, m: int, check=False) -> CellGrid:
    """Pull back along a monotone map [m] -> [n] given by its values.

    The result is the m-level cell with entries A_{psi o beta}; entries
    at tuples that psi degenerates become zero.
    """
    objects = {}
    arrows = {}
    for beta in index_tuples(g.k, m):
        image = tuple(psi_values[v] for v in beta)
        degenerate = any(x >= y for x, y in zip(image, image[1:]))
        objects[beta] = 0 if degenerate else g.objects[image]
    for beta in objects:
        image = tuple(psi_values[v] for v in beta)
        src_deg = any(x >= y for x, y in zip(image, image[1:]))
        for i, t in elementary_steps(beta, m):
            timage = tuple(psi_values[v] for v in t)
            dst_deg = any(x >= y for x, y in zip(timage, timage[1:]))
            if src_deg or dst_deg:
                arrows[(beta, i)] = g.backend.zero_mor(objects[beta], objects[t])
            elif image == timage:
                arrows[(beta, i)] = g.backend.identity(objects[beta])
            else:
                arrows[(beta, i)] = g.path_map(image, timage)
    out = CellGrid(g.backend, g.k, m, g.variant, objects, arrows)
    if check:
        ok, w = squares_commute(out)
        assert ok, w
    return out


def face(g: CellGrid, i: int) -> CellGrid:
    values = tuple(v for v in range(g.n + 1) if v != i)
    return reindex(g, values, g.n - 1)


def degeneracy(g: CellGrid, j: int) -> CellGrid:
    values = tuple(list(range(j + 1)) + list(range(j, g.n + 1)))
    return reindex(g, values, g.n + 1)


def dualize(g: CellGrid) -> CellGrid:
    """Reverse the index order and the backend morphisms."""
    n, k = g.n, g.k
    dual = lambda beta: tuple(sorted(n - v for v in beta))
    objects = {dual(b): o for b, o in g.objects.items()}
    arrows = {}
    for (beta, i), m in g.arrows.items():
        t = step_target(beta, i, n)
        arrows[(dual(t), k - i)] = g.backend.transpose(m)
    return CellGrid(g.backend, k, n, g.variant.dual(), objects, arrows)


def shift_level(g: CellGrid, offset: int, new_n: int) -> CellGrid:
    objects = {tuple(v + offset for v in b): o for b, o in g.objects.items()}
    arrows = {
        (tuple(v + offset for v in b), i): m for (b, i), m in g.arrows.items()
    }
    return CellGrid(g.backend, g.k, new_n, g.variant, objects, arrows)


def forget_append(g: CellGrid, variant: Variant) -> CellGrid:
    """Restrict to tuples ending at the top vertex, dropping it."""
    k, n = g.k, g.n
    objects = {}
    arrows = {}
    for beta in index_tuples(k - 1, n - 1):
        objects[beta] = g.objects[beta + (n,)]
    for beta in objects:
        for i, t in elementary_steps(beta, n - 1):
            arrows[(beta, i)] = g.arrows[(beta + (n,), i)]
    return CellGrid(g.backend, k - 1, n - 1, variant, objects, arrows)


def forget_prepend(g: CellGrid, variant: Variant) -> CellGrid:
    """Restrict to tuples starting at the bottom vertex, dropping it."""
    k, n = g.k, g.n
    objects = {}
    arrows = {}
    for beta in index_tuples(k - 1, n - 1):
        objects[beta] = g.objects[(0,) + tuple(v + 1 for v in beta)]
    for beta in objects:
        amb = (0,) + tuple(v + 1 for v in beta)
        for i, t in elementary_steps(beta, n - 1):
            arrows[(beta, i)] = g.arrows[(amb, i + 1)]
    return CellGrid(g.backend, k - 1, n - 1, variant, objects, arrows)


def forget_double(g: CellGrid, variant: Variant) -> CellGrid:
    return forget_append(forget_prepend(g, variant), variant)


_KAN_APPEND_OUT = {
    Variant.RIGHT_EXACT: Variant.EXACT,
    Variant.EXACT: Variant.EXACT,
    Variant.ACYCLIC: Variant.LEFT_EXACT,
    Variant.LEFT_EXACT: Variant.LEFT_EXACT,
}


def kan_append(g: CellGrid, validate: bool = True) -> CellGrid:
    """Extend a (k-1)-cell at level n to a k-cell at level n+1.

    Entries containing the new top vertex restrict to the input; the
    others are kernels of the two top face maps.  Right exact input
    yields an exact cell, acyclic input a left exact one.
    """
    backend = g.backend
    k = g.k + 1
    n = g.n + 1
    out_variant = _KAN_APPEND_OUT[g.variant]
    objects = {}
    kernel_monos = {}
    for beta in index_tuples(k, n):
        if beta[-1] == n:
            objects[beta] = g.objects[beta[:-1]]
        else:
            dk = beta[:-1]
            dk1 = beta[:-2] + (beta[-1],)
            obj, mono = backend.kernel(g.path_map(dk, dk1))
            objects[beta] = obj
            kernel_monos[beta] = mono
    arrows = {}
    for beta in objects:
        for i, t in elementary_steps(beta, n):
            if beta[-1] == n:
                arrows[(beta, i)] = g.arrows[(beta[:-1], i)]
            elif t[-1] == n:
                arrows[(beta, i)] = kernel_monos[beta]
            else:
                lead = backend.compose(
                    g.path_map(beta[:-1], t[:-1]), kernel_monos[beta]
                )
                ind = backend.solve_into_mono(kernel_monos[t], lead)
                if ind is None:
                    raise ConstructionFailure(
                        f"kernel comparison failed at {beta} +e_{i}"
                    )
                arrows[(beta, i)] = ind
    out = make_grid(backend, k, n, out_variant, objects, arrows)
    if validate:
        ok, w = validate_cell(out)
        if not ok:
            raise ConstructionFailure(f"kan extension invalid: {w}")
    return out


def kan_prepend(g: CellGrid, validate: bool = True) -> CellGrid:
    """Dual extension: prepend a bottom vertex using cokernels."""
    return dualize(kan_append(dualize(g), validate=validate))


_FORGET_APPEND_OUT = {
    Variant.EXACT: Variant.RIGHT_EXACT,
    Variant.LEFT_EXACT: Variant.ACYCLIC,
}

_FORGET_PREPEND_OUT = {
    Variant.EXACT: Variant.LEFT_EXACT,
    Variant.RIGHT_EXACT: Variant.ACYCLIC,
}


def kan_forget_append_roundtrip(g: CellGrid):
    """Natural iso kan_append(forget_append(g)) ~ g, or None.

    Components at tuples containing the top vertex are identities; at
    the kernel entries they are the canonical comparison maps into the
    rebuilt kernels.
    """
    spine = forget_append(g, _FORGET_APPEND_OUT[g.variant])
    rebuilt = kan_append(spine, validate=False)
    if sorted(rebuilt.objects) != sorted(g.objects):
        return None
    backend = g.backend
    iso = {}
    for beta in g.objects:
        if beta[-1] == g.n:
            if rebuilt.objects[beta] != g.objects[beta]:
                return None
            iso[beta] = backend.identity(g.objects[beta])
        else:
            # Both grids map beta into the top column; the comparison
            # solves through the rebuilt kernel embedding.
            top = beta[:-1] + (g.n,)
            mono = rebuilt.path_map(beta, top)
            lead = g.path_map(beta, top)
            comp = backend.solve_into_mono(mono, lead)
            if comp is None or not backend.is_iso(comp):
                return None
            iso[beta] = comp
    for (beta, i), m in g.arrows.items():
        t = step_target(beta, i, g.n)
        lhs = backend.compose(iso[t], m)
        rhs = backend.compose(rebuilt.arrows[(beta, i)], iso[beta])
        if lhs != rhs:
            return None
    return iso


def hyperplane_left(g: CellGrid, l: int, m: int, validate: bool = True) -> CellGrid:
    """Collapse dimension k to k-1 by cokernels along two vertices.

    Sends beta (a k-tuple in [l]) to coker(A_{beta+(l,)} -> A_{beta+(m,)}),
    where a repeated vertex means the zero object.  Requires
    1 <= k <= l < m <= n and left-exact (or exact) input.
    """
    backend = g.backend
    k, n = g.k, g.n
    if not (1 <= k <= l < m <= n):
        raise ValueError(f"need 1 <= k <= l < m <= n, got k={k}, l={l}, m={m}, n={n}")
    out_variant = g.variant
    objects = {}
    epis = {}
    for beta in index_tuples(k - 1, l):
        low = beta + (l,)
        if beta[-1] == l:
            src_obj = 0
            mu = backend.zero_mor(0, g.objects[beta + (m,)])
        else:
            src_obj = g.objects[low]
            mu = g.path_map(low, beta + (m,))
        if src_obj and not backend.is_admissible_mono(mu):
            raise ConstructionFailure(f"map at {beta} not an admissible mono")
        cok = backend.cokernel(mu)
        if cok is None:
            raise ConstructionFailure(f"cokernel missing at {beta}")
        objects[beta] = cok[0]
        epis[beta] = cok[1]
    arrows = {}
    for beta in objects:
        for i, t in elementary_steps(beta, l):
            lead = backend.compose(epis[t], g.path_map(beta + (m,), t + (m,)))
            ind = backend.solve_through_epi(epis[beta], lead)
            if ind is None:
                raise ConstructionFailure(f"cokernel comparison failed at {beta} +e_{i}")
            arrows[(beta, i)] = ind
    out = make_grid(backend, k - 1, l, out_variant, objects, arrows)
    if validate:
        ok, w = validate_cell(out)
        if not ok:
            raise ConstructionFailure(f"hyperplane image invalid: {w}")
    return out


def hyperplane_right(g: CellGrid, l: int, m: int, validate: bool = True) -> CellGrid:
    """Dual collapse using kernels, via the duality equivalence."""
    return dualize(hyperplane_left(dualize(g), l, m, validate=validate))


# ---------------------------------------------------------------------------
# Bicartesian hypercube conditions, by bounded universal property.
# ---------------------------------------------------------------------------


def _raw_increment(beta: tuple, i: int):
    """Increment slot i without monotonicity filtering (may degenerate)."""
    return beta[:i] + (beta[i] + 1,) + beta[i + 1 :]


def _cube_corners(g: CellGrid, beta):
    """All level-1 corners of the punctured cube at beta.

    Degenerate corners carry the zero object; the cone leg into them is
    forced to zero, which is what cuts the limit down to a kernel.
    """
    corners = []
    for i in range(len(beta)):
        raw = _raw_increment(beta, i)
        obj = g.entry(raw)
        if obj == 0 and any(a >= b for a, b in zip(raw, raw[1:])):
            arrow = g.backend.zero_mor(g.objects[beta], 0)
            corners.append((i, raw, 0, arrow))
        else:
            corners.append((i, raw, g.objects[raw], g.arrows[(beta, i)]))
    return corners


def hypercube_check(g: CellGrid, probe_bound: int, side: str = "auto"):
    """Limit/colimit cube conditions, tested against all small objects.

    For the left condition every eligible entry must be the limit of
    its punctured upper cube; eligibility is beta_{k-i} < n-i for all i.
    The right condition is dual.  Returns (ok, witness).
    """
    checks = []
    if side in ("left", "auto") and g.variant in (Variant.LEFT_EXACT, Variant.EXACT):
        checks.append("left")
    if side in ("right", "auto") and g.variant in (Variant.RIGHT_EXACT, Variant.EXACT):
        checks.append("right")
    if side in ("left", "right") and not checks:
        checks = [side]
    for which in checks:
        grid = g if which == "left" else dualize(g)
        for beta in grid.objects:
            if any(beta[grid.k - i] >= grid.n - i for i in range(grid.k + 1)):
                continue
            if not _is_cube_limit(grid, beta, probe_bound):
                return False, {"side": which, "beta": beta}
    return True, None


def _corner_to_level2(g: CellGrid, corner_raw, corner_obj, slot):
    """Arrow from a level-1 corner, incrementing ``slot`` again."""
    raw2 = _raw_increment(corner_raw, slot)
    obj2 = g.entry(raw2)
    degenerate2 = any(a >= b for a, b in zip(raw2, raw2[1:]))
    if degenerate2:
        obj2 = 0
    if corner_obj == 0 or obj2 == 0:
        return obj2, g.backend.zero_mor(corner_obj, obj2)
    return obj2, g.path_map(corner_raw, raw2)


def _is_cube_limit(g: CellGrid, beta, probe_bound: int) -> bool:
    backend = g.backend
    corners = _cube_corners(g, beta)
    for t_obj in backend.objects_upto(probe_bound):
        cones = _enumerate_cones(g, corners, t_obj)
        for cone in cones:
            lifts = [
                u
                for u in backend.hom_iter(t_obj, g.objects[beta])
                if all(
                    backend.compose(arrow, u) == cone[pos]
                    for pos, (i, raw, obj, arrow) in enumerate(corners)
                )
            ]
            if len(lifts) != 1:
                return False
    return True


def _enumerate_cones(g: CellGrid, corners, t_obj):
    backend = g.backend
    choices = [list(backend.hom_iter(t_obj, obj)) for i, raw, obj, arrow in corners]
    cones = []
    for combo in itertools.product(*choices):
        ok = True
        for (p1, (i, rawi, obji, _)), (p2, (j, rawj, objj, _)) in itertools.combinations(
            enumerate(corners), 2
        ):
            obj2, via_i = _corner_to_level2(g, rawi, obji, j)
            obj2b, via_j = _corner_to_level2(g, rawj, objj, i)
            assert obj2 == obj2b
            if backend.compose(via_i, combo[p1]) != backend.compose(via_j, combo[p2]):
                ok = False
                break
        if ok:
            cones.append(combo)
    return cones


# ---------------------------------------------------------------------------
# Catalog enumeration.
# ---------------------------------------------------------------------------


_MAX_CELLS_DEFAULT = 2_000_000


def _chain_step_ok(backend, variant: Variant, f) -> bool:
    if variant is Variant.LEFT_EXACT:
        return backend.is_admissible_mono(f)
    if variant is Variant.RIGHT_EXACT:
        return backend.is_admissible_epi(f)
    if variant is Variant.EXACT:
        return backend.is_iso(f)
    return backend.is_admissible(f)


def chain_catalog(backend, n: int, variant: Variant, bound: int):
    """All valid dimension-zero cells: chains A_0 -> ... -> A_n.

    Stepwise admissibility suffices for the mono/epi/iso variants; the
    acyclic variant additionally needs every composite admissible.
    """
    results = []

    def extend(objs, maps):
        if len(objs) == n + 1:
            if variant is Variant.ACYCLIC and n >= 2:
                grid = _chain_to_grid(backend, objs, maps, variant)
                ok, _ = validate_cell(grid)
                if not ok:
                    return
                results.append(grid)
            else:
                results.append(_chain_to_grid(backend, objs, maps, variant))
            return
        for nxt in backend.objects_upto(bound):
            for f in backend.hom_iter(objs[-1], nxt):
                if _chain_step_ok(backend, variant, f):
                    extend(objs + [nxt], maps + [f])

    for start in backend.objects_upto(bound):
        extend([start], [])
    return results


# Interval route: over these backends every valid chain splits into
# interval summands (elements/basis vectors born once and dying once),
# so the born/died multiset is a complete isomorphism invariant.  The
# test suite cross-checks this against the brute enumeration.
_INTERVAL_BACKENDS = ("f1", "fq", "freeab")


def direct_sum_cells(backend, cells):
    """Entrywise direct sum of cells with identical index shape."""
    if not cells:
        raise ValueError("need at least one summand")
    k, n, variant = cells[0].k, cells[0].n, cells[0].variant
    objects = {}
    for beta in cells[0].objects:
        objects[beta] = backend.direct_sum([c.objects[beta] for c in cells])
    arrows = {}
    for (beta, i), _ in cells[0].arrows.items():
        t = step_target(beta, i, n)
        srcs = [c.objects[beta] for c in cells]
        dsts = [c.objects[t] for c in cells]
        blocks = [c.arrows[(beta, i)] for c in cells]
        arrows[(beta, i)] = backend.direct_sum_mor(srcs, dsts, blocks)
    return CellGrid(backend, k, n, variant, objects, arrows)


def _interval_constraints(variant: Variant, n: int):
    if variant is Variant.LEFT_EXACT:
        return lambda b, d: d == n + 1
    if variant is Variant.RIGHT_EXACT:
        return lambda b, d: b == 0
    if variant is Variant.EXACT:
        return lambda b, d: b == 0 and d == n + 1
    return lambda b, d: True


def interval_chain_classes(backend, n: int, variant: Variant, bound: int):
    """Chain classes as canonical interval sums, one grid per class."""
    allowed = [
        (b, d)
        for b in range(n + 1)
        for d in range(b + 1, n + 2)
        if _interval_constraints(variant, n)(b, d)
    ]
    multisets = []

    def extend(idx, counts, alive):
        if idx == len(allowed):
            multisets.append(tuple(counts))
            return
        b, d = allowed[idx]
        max_more = bound - max(alive[t] for t in range(b, d))
        for c in range(max_more + 1):
            counts.append(c)
            for t in range(b, d):
                alive[t] += c
            extend(idx + 1, counts, alive)
            counts.pop()
            for t in range(b, d):
                alive[t] -= c

    extend(0, [], [0] * (n + 1))
    return [
        _chain_from_intervals(backend, n, variant, allowed, counts)
        for counts in sorted(multisets)
    ]


def _chain_from_intervals(backend, n, variant, allowed, counts):
    intervals = []
    for (b, d), c in zip(allowed, counts):
        intervals.extend([(b, d)] * c)
    intervals.sort()
    objs = []
    slots = []  # per level: list of interval ids alive, in canonical order
    for t in range(n + 1):
        alive = [i for i, (b, d) in enumerate(intervals) if b <= t < d]
        slots.append(alive)
        objs.append(len(alive))
    maps = []
    for t in range(n):
        src, dst = slots[t], slots[t + 1]
        pos = {iv: p for p, iv in enumerate(dst)}
        assignment = [pos.get(iv) for iv in src]
        maps.append(_matching_mor(backend, objs[t], objs[t + 1], assignment))
    return _chain_to_grid(backend, objs, maps, variant)


def _matching_mor(backend, a, b, assignment):
    """The canonical morphism sending source slot i to target slot
    assignment[i] (None = dies)."""
    name = backend.key[0]
    if name == "f1":
        return (a, b, tuple(0 if j is None else j + 1 for j in assignment))
    rows = [[0] * a for _ in range(b)]
    for i, j in enumerate(assignment):
        if j is not None:
            rows[j][i] = 1
    return (a, b, tuple(tuple(r) for r in rows))


def _chain_to_grid(backend, objs, maps, variant):
    objects = {(i,): objs[i] for i in range(len(objs))}
    arrows = {((i,), 0): maps[i] for i in range(len(maps))}
    return CellGrid(backend, 0, len(objs) - 1, variant, objects, arrows)


def zero_cell(backend, k: int, n: int, variant: Variant) -> CellGrid:
    return CellGrid(backend, k, n, variant, {}, {})


@lru_cache(maxsize=None)
def cell_generators(backend: Backend, k: int, n: int, variant: Variant):
    """Single-strand cells, the direct-sum generators of the catalogs.

    Base: chains of one interval.  Dimension k is reached by the Kan
    extensions (append with kernels for exact-from-right-exact, prepend
    with cokernels for right-exact-from-acyclic; left exact by
    duality).  All entries have size at most one.
    """
    if n < k or n < 0:
        return ()
    if k == 0:
        allowed = [
            (b, d)
            for b in range(n + 1)
            for d in range(b + 1, n + 2)
            if _interval_constraints(variant, n)(b, d)
        ]
        return tuple(
            _chain_from_intervals(backend, n, variant, [iv], [1]) for iv in allowed
        )
    if variant is Variant.EXACT:
        return tuple(
            kan_append(c)
            for c in cell_generators(backend, k - 1, n - 1, Variant.RIGHT_EXACT)
        )
    if variant is Variant.RIGHT_EXACT:
        return tuple(
            kan_prepend(c)
            for c in cell_generators(backend, k - 1, n - 1, Variant.ACYCLIC)
        )
    if variant is Variant.LEFT_EXACT:
        return tuple(
            dualize(c) for c in cell_generators(backend, k, n, Variant.RIGHT_EXACT)
        )
    raise ValueError(f"no generator route for {variant} at k={k}")


@lru_cache(maxsize=None)
def catalog_multisets(backend: Backend, k: int, n: int, variant: Variant, bound: int):
    """Generator-index multisets whose sums stay within the size bound."""
    gens = cell_generators(backend, k, n, variant)
    if not gens:
        return ((),) if n < k else ()
    betas = sorted(gens[0].objects)
    alive = [tuple(g.objects[b] for b in betas) for g in gens]
    multisets = []

    def extend(idx, counts, load):
        if idx == len(gens):
            multisets.append(tuple(counts))
            return
        for c in range(bound + 1):
            new_load = [l + c * a for l, a in zip(load, alive[idx])]
            if any(v > bound for v in new_load):
                break
            counts.append(c)
            extend(idx + 1, counts, new_load)
            counts.pop()

    extend(0, [], [0] * len(betas))
    return tuple(sorted(multisets))


@lru_cache(maxsize=None)
def cells_catalog(backend: Backend, k: int, n: int, variant: Variant, bound: int):
    """Representatives of all valid cells, one per isomorphism class.

    Each class is the direct sum of single-strand generators; the
    generator multiset is a complete isomorphism invariant over these
    backends (cross-checked against brute-force enumeration in the
    tests).  The acyclic variant in positive dimension has no
    generator route and falls back to brute force.
    """
    if n < 0:
        return ()
    if k == 0 and backend.key[0] not in _INTERVAL_BACKENDS:
        return tuple(dedupe_by_iso(chain_catalog(backend, n, variant, bound)))
    if n < k:
        return (zero_cell(backend, k, n, variant),)
    if k >= 1 and variant is Variant.ACYCLIC:
        return tuple(dedupe_by_iso(brute_force_cells(backend, k, n, variant, bound)))
    gens = cell_generators(backend, k, n, variant)
    out = []
    for mset in catalog_multisets(backend, k, n, variant, bound):
        summands = [g for g, c in zip(gens, mset) for _ in range(c)]
        if not summands:
            out.append(zero_like(backend, gens[0]))
        else:
            out.append(direct_sum_cells(backend, summands))
    return tuple(out)


def zero_like(backend, template: CellGrid) -> CellGrid:
    objects = {b: 0 for b in template.objects}
    arrows = {
        key: backend.zero_mor(0, 0) for key in template.arrows
    }
    return CellGrid(backend, template.k, template.n, template.variant, objects, arrows)


def catalog_strands(backend: Backend, k: int, n: int, variant: Variant, bound: int):
    """Parallel to cells_catalog: the generator multiset per entry."""
    return catalog_multisets(backend, k, n, variant, bound)


def brute_force_cells(backend, k, n, variant: Variant, bound: int, max_nodes=None):
    """Oracle enumeration over all object and arrow assignments.

    Exponential; only for tiny parameters and cross-checks.
    """
    tuples = index_tuples(k, n)
    preds = {
        t: [
            (s, i)
            for s in tuples
            for i in range(k + 1)
            if step_target(s, i, n) == t
        ]
        for t in tuples
    }
    gammas = list(itertools.combinations(range(n + 1), k + 2))
    gamma_ready = {}
    for gm in gammas:
        faces = [face_of(gm, j) for j in range(len(gm))]
        last = max(faces)
        gamma_ready.setdefault(last, []).append(gm)
    results = []

    def extend(idx, objects, arrows):
        if idx == len(tuples):
            grid = CellGrid(backend, k, n, variant, objects, arrows)
            ok, _ = validate_cell(grid)
            if ok:
                results.append(grid)
            return
        beta = tuples[idx]
        for obj in backend.objects_upto(bound):
            objects[beta] = obj
            choice_sets = [
                list(backend.hom_iter(objects[s], obj)) for s, i in preds[beta]
            ]
            for combo in itertools.product(*choice_sets):
                for (s, i), f in zip(preds[beta], combo):
                    arrows[(s, i)] = f
                grid = CellGrid(backend, k, n, variant, objects, arrows)
                ok, _ = _squares_around(grid, beta)
                if ok:
                    for gm in gamma_ready.get(beta, []):
                        maps = grid.sequence_for(gm)
                        cls, _ = sequence_classify(backend, maps)
                        if not sequence_satisfies(cls, variant):
                            ok = False
                            break
                if ok:
                    extend(idx + 1, objects, arrows)
                for (s, i), f in zip(preds[beta], combo):
                    del arrows[(s, i)]
            del objects[beta]

    extend(0, {}, {})
    return results


def _squares_around(g: CellGrid, top):
    backend = g.backend
    k, n = g.k, g.n
    for i, j in itertools.combinations(range(k + 1), 2):
        # Find s with s + e_i + e_j = top.
        if top[i] - 1 < 0 or top[j] - 1 < 0:
            continue
        s = list(top)
        s[i] -= 1
        s[j] -= 1
        s = tuple(s)
        if any(a >= b for a, b in zip(s, s[1:])) or s not in g.objects:
            continue
        si = step_target(s, i, n)
        sj = step_target(s, j, n)
        if si is None or sj is None:
            continue
        if si not in g.objects or sj not in g.objects:
            continue
        if (si, j) not in g.arrows or (sj, i) not in g.arrows:
            continue
        lhs = backend.compose(g.arrows[(si, j)], g.arrows[(s, i)])
        rhs = backend.compose(g.arrows[(sj, i)], g.arrows[(s, j)])
        if lhs != rhs:
            return False, {"at": s, "slots": (i, j)}
    return True, None
