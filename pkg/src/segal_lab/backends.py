"""Concrete proto-exact categories with decidable structure.

Three main backends, all with objects encoded by a single size integer
and morphisms by plain tuples (src, dst, data):

* ``F1Vect`` -- finite pointed sets; morphisms are pointed maps that are
  injective away from the basepoint preimage (partial injections).
  data[i] in 0..dst is the image of element i+1, with 0 the basepoint.
* ``FqVect`` -- finite dimensional vector spaces over a prime field;
  morphisms are dst x src matrices (tuples of row tuples).
* ``FreeAb`` -- finitely generated free abelian groups; morphisms are
  integer matrices.  Admissible monos are the pure injections (all
  Smith divisors 1), admissible epis the surjections.  Enumeration is
  bounded by a declared matrix entry bound.

A fourth optional backend ``NilMod`` (free modules over F2[x]/(x^2))
exercises an additive stringent category that is not abelian.

Kernels and cokernels are canonical: the kernel object is the plain
size integer and the structure map picks a canonical basis, so repeated
constructions are reproducible.
"""

from __future__ import annotations

import itertools
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import comb, perm


Mor = tuple  # (src, dst, data)


class SequenceClass(Enum):
    NOT_ACYCLIC = "not-acyclic"
    ACYCLIC = "acyclic"
    LEFT_EXACT = "left-exact"
    RIGHT_EXACT = "right-exact"
    EXACT = "exact"


class Backend:
    """Shared helpers; concrete backends fill in the primitives."""

    name: str

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Backend) and self.key == other.key

    def __repr__(self):
        return f"<backend {self.name}>"

    # -- memoized views used by the hot search loops -------------------
    def _cache(self, name: str) -> dict:
        cache = self.__dict__.get(name)
        if cache is None:
            cache = self.__dict__[name] = {}
        return cache

    def hom_list(self, a: int, b: int) -> tuple:
        cache = self._cache("_hom_lists")
        out = cache.get((a, b))
        if out is None:
            out = cache[(a, b)] = tuple(self.hom_iter(a, b))
        return out

    def iso_list(self, a: int, b: int) -> tuple:
        cache = self._cache("_iso_lists")
        out = cache.get((a, b))
        if out is None:
            out = cache[(a, b)] = tuple(self.iso_iter(a, b))
        return out

    def epi_flag(self, f: Mor) -> bool:
        cache = self._cache("_epi_flags")
        out = cache.get(f)
        if out is None:
            out = cache[f] = self.is_admissible_epi(f)
        return out

    def mono_flag(self, f: Mor) -> bool:
        cache = self._cache("_mono_flags")
        out = cache.get(f)
        if out is None:
            out = cache[f] = self.is_admissible_mono(f)
        return out

    def rank_of(self, f: Mor):
        cache = self._cache("_rank_cache")
        out = cache.get(f)
        if out is None:
            out = cache[f] = self.mor_rank(f)
        return out

    # -- basics -------------------------------------------------------
    def objects_upto(self, bound: int):
        return list(range(bound + 1))

    def zero_mor(self, src: int, dst: int) -> Mor:
        raise NotImplementedError

    def is_zero_mor(self, f: Mor) -> bool:
        return f == self.zero_mor(f[0], f[1])

    def is_admissible(self, f: Mor) -> bool:
        return self.factor_admissible(f) is not None

    def is_iso(self, f: Mor) -> bool:
        return self.is_admissible_mono(f) and self.is_admissible_epi(f)

    def inverse(self, f: Mor) -> Mor:
        g = self.solve_through_epi(f, self.identity(f[0]))
        if g is None or self.compose(f, g) != self.identity(f[1]):
            raise ValueError("morphism is not invertible")
        return g

    def iso_iter(self, a: int, b: int):
        if a != b:
            return
        for f in self.hom_iter(a, b):
            if self.is_iso(f):
                yield f

    # -- direct sums ----------------------------------------------------
    def direct_sum(self, objs) -> int:
        return sum(objs)

    def injection(self, objs, i: int) -> Mor:
        """Canonical inclusion of the i-th summand."""
        total = sum(objs)
        offset = sum(objs[:i])
        return self._shift_embed(objs[i], total, offset)

    def projection(self, objs, i: int) -> Mor:
        return self.transpose(self.injection(objs, i))

    def direct_sum_mor(self, srcs, dsts, blocks) -> Mor:
        out = self.zero_mor(sum(srcs), sum(dsts))
        for i, f in enumerate(blocks):
            out = self._add_mor(
                out,
                self.compose(
                    self.injection(dsts, i), self.compose(f, self.projection(srcs, i))
                ),
            )
        return out

    def block_of(self, f: Mor, srcs, dsts, i: int, j: int) -> Mor:
        """Component dsts[i] <- srcs[j] of a map between direct sums."""
        return self.compose(
            self.projection(dsts, i), self.compose(f, self.injection(srcs, j))
        )

    # -- derived categorical ops ---------------------------------------
    def image_factor(self, f: Mor):
        """Coimage and image data: (coim_epi, coim_obj, mid, im_obj, im_mono).

        Returns None when kernel or cokernel is missing.  ``mid`` is the
        natural comparison coim(f) -> im(f).
        """
        ker = self.kernel(f)
        cok = self.cokernel(f)
        if ker is None or cok is None:
            return None
        coim_obj, coim_epi = self.cokernel(ker[1])
        im_obj, im_mono = self.kernel(cok[1])
        g1 = self.solve_through_epi(coim_epi, f)
        if g1 is None:
            return None
        mid = self.solve_into_mono(im_mono, g1)
        if mid is None:
            return None
        return coim_epi, coim_obj, mid, im_obj, im_mono


def _check_short_exact(backend: Backend, m: Mor, e: Mor):
    """Witness dict when (m, e) is not a kernel-cokernel pair of admissibles."""
    if m[1] != e[0]:
        return {"kind": "not-composable"}
    if not backend.is_admissible_mono(m):
        return {"kind": "not-admissible-mono", "mor": m}
    if not backend.is_admissible_epi(e):
        return {"kind": "not-admissible-epi", "mor": e}
    if not backend.is_zero_mor(backend.compose(e, m)):
        return {"kind": "composite-nonzero"}
    ker = backend.kernel(e)
    if ker is None:
        return {"kind": "kernel-missing"}
    phi = backend.solve_into_mono(ker[1], m)
    if phi is None or not backend.is_iso(phi):
        return {"kind": "mono-not-kernel", "mono": m, "epi": e}
    cok = backend.cokernel(m)
    if cok is None:
        return {"kind": "cokernel-missing"}
    psi = backend.solve_through_epi(cok[1], e)
    if psi is None or not backend.is_iso(psi):
        return {"kind": "epi-not-cokernel", "mono": m, "epi": e}
    return None


def is_short_exact(backend: Backend, m: Mor, e: Mor) -> bool:
    return _check_short_exact(backend, m, e) is None


def sequence_classify(backend: Backend, maps: list[Mor]):
    """Classify a composable chain per the acyclicity ladder.

    ``maps`` runs left to right, A_t -> A_{t-1} -> ... -> A_0.  Each
    map must factor as admissible epi then admissible mono, and at
    every interior object the incoming mono with the outgoing epi must
    form a short exact sequence.  Returns (SequenceClass, witness).
    """
    t = len(maps)
    if t == 0:
        return SequenceClass.EXACT, None
    for f, g in zip(maps, maps[1:]):
        if f[1] != g[0]:
            return SequenceClass.NOT_ACYCLIC, {"kind": "not-composable"}
    factors = []
    for j, f in enumerate(maps):
        fac = backend.factor_admissible(f)
        if fac is None:
            return SequenceClass.NOT_ACYCLIC, {"kind": "not-admissible", "position": j}
        factors.append(fac)
    for j in range(t - 1):
        # Interior object between maps[j] and maps[j+1]: incoming mono
        # from the j-th factorization, outgoing epi from the (j+1)-st.
        mono = factors[j][1]
        epi = factors[j + 1][0]
        witness = _check_short_exact(backend, mono, epi)
        if witness is not None:
            witness["position"] = j + 1
            return SequenceClass.NOT_ACYCLIC, witness
    left = backend.is_admissible_mono(maps[0])
    right = backend.is_admissible_epi(maps[-1])
    if left and right:
        return SequenceClass.EXACT, None
    if left:
        return SequenceClass.LEFT_EXACT, None
    if right:
        return SequenceClass.RIGHT_EXACT, None
    return SequenceClass.ACYCLIC, None


def sequence_satisfies(cls: SequenceClass, variant: "Variant") -> bool:
    order = {
        SequenceClass.NOT_ACYCLIC: set(),
        SequenceClass.ACYCLIC: {Variant.ACYCLIC},
        SequenceClass.LEFT_EXACT: {Variant.ACYCLIC, Variant.LEFT_EXACT},
        SequenceClass.RIGHT_EXACT: {Variant.ACYCLIC, Variant.RIGHT_EXACT},
        SequenceClass.EXACT: {
            Variant.ACYCLIC,
            Variant.LEFT_EXACT,
            Variant.RIGHT_EXACT,
            Variant.EXACT,
        },
    }
    return variant in order[cls]


class Variant(Enum):
    ACYCLIC = "acyclic"
    LEFT_EXACT = "left-exact"
    RIGHT_EXACT = "right-exact"
    EXACT = "exact"

    def dual(self) -> "Variant":
        if self is Variant.LEFT_EXACT:
            return Variant.RIGHT_EXACT
        if self is Variant.RIGHT_EXACT:
            return Variant.LEFT_EXACT
        return self


# ---------------------------------------------------------------------------
# Pointed sets with partial injections.
# ---------------------------------------------------------------------------


class F1Vect(Backend):
    name = "f1"
    key = ("f1",)

    def mor_rank(self, f: Mor) -> int:
        return sum(1 for v in f[2] if v)

    def identity(self, a: int) -> Mor:
        return (a, a, tuple(range(1, a + 1)))

    def zero_mor(self, src: int, dst: int) -> Mor:
        return (src, dst, (0,) * src)

    def compose(self, g: Mor, f: Mor) -> Mor:
        if f[1] != g[0]:
            raise ValueError(f"not composable: {f} then {g}")
        gv = g[2]
        return (f[0], g[1], tuple(gv[v - 1] if v else 0 for v in f[2]))

    def hom_iter(self, a: int, b: int):
        slots = range(1, a + 1)
        for j in range(min(a, b) + 1):
            for support in itertools.combinations(slots, j):
                for images in itertools.permutations(range(1, b + 1), j):
                    vals = [0] * a
                    for s, im in zip(support, images):
                        vals[s - 1] = im
                    yield (a, b, tuple(vals))

    def hom_count(self, a: int, b: int) -> int:
        return sum(comb(a, j) * perm(b, j) for j in range(min(a, b) + 1))

    def transpose(self, f: Mor) -> Mor:
        a, b, vals = f
        out = [0] * b
        for i, v in enumerate(vals):
            if v:
                out[v - 1] = i + 1
        return (b, a, tuple(out))

    def is_admissible_mono(self, f: Mor) -> bool:
        return all(v != 0 for v in f[2])

    def is_admissible_epi(self, f: Mor) -> bool:
        hit = [v for v in f[2] if v]
        return len(set(hit)) == len(hit) == f[1]

    def kernel(self, f: Mor):
        a, b, vals = f
        killed = [i + 1 for i, v in enumerate(vals) if v == 0]
        return (len(killed), (len(killed), a, tuple(killed)))

    def cokernel(self, f: Mor):
        a, b, vals = f
        hit = {v for v in vals if v}
        missed = [j for j in range(1, b + 1) if j not in hit]
        out = [0] * b
        for rank, j in enumerate(missed):
            out[j - 1] = rank + 1
        return (len(missed), (b, len(missed), tuple(out)))

    def factor_admissible(self, f: Mor):
        a, b, vals = f
        image = sorted(v for v in vals if v)
        rank = {v: i + 1 for i, v in enumerate(image)}
        epi = (a, len(image), tuple(rank[v] if v else 0 for v in vals))
        mono = (len(image), b, tuple(image))
        return epi, mono

    def solve_through_epi(self, e: Mor, h: Mor):
        if e[0] != h[0]:
            raise ValueError("domain mismatch")
        a, c, ev = e
        out = [0] * c
        for i, v in enumerate(ev):
            if v:
                out[v - 1] = h[2][i]
            elif h[2][i] != 0:
                return None
        g = (c, h[1], tuple(out))
        vals = [v for v in out if v]
        if len(set(vals)) != len(vals):
            return None
        return g

    def solve_into_mono(self, m: Mor, h: Mor):
        if m[1] != h[1]:
            raise ValueError("codomain mismatch")
        k, a, mv = m
        pos = {v: i + 1 for i, v in enumerate(mv)}
        out = []
        for v in h[2]:
            if v == 0:
                out.append(0)
            elif v in pos:
                out.append(pos[v])
            else:
                return None
        return (h[0], k, tuple(out))

    def _shift_embed(self, size: int, total: int, offset: int) -> Mor:
        return (size, total, tuple(range(offset + 1, offset + size + 1)))

    def _add_mor(self, f: Mor, g: Mor) -> Mor:
        # Supports disjoint in the direct-sum assembly.
        vals = tuple(a or b for a, b in zip(f[2], g[2]))
        return (f[0], f[1], vals)

    def pullback_epi_mono(self, e: Mor, m: Mor):
        """Pullback of an admissible epi along an admissible mono."""
        if e[1] != m[1]:
            raise ValueError("cospan mismatch")
        a, c, ev = e
        b, _, mv = m
        pairs = []
        mset = set(mv)
        pre = {}
        for i, v in enumerate(ev):
            if v:
                pre[v] = i + 1
        for j, v in enumerate(mv):
            if v in pre:
                pairs.append((pre[v], j + 1))
        for i, v in enumerate(ev):
            if v == 0:
                pairs.append((i + 1, 0))
        pairs.sort()
        to_a = tuple(p[0] for p in pairs)
        to_b = tuple(p[1] for p in pairs)
        return (len(pairs), (len(pairs), a, to_a), (len(pairs), b, to_b))

    def pushout_mono_epi(self, m: Mor, e: Mor):
        """Pushout of an admissible mono along an admissible epi."""
        pb, ta, tb = self.pullback_epi_mono(self.transpose(m), self.transpose(e))
        return (pb, self.transpose(ta), self.transpose(tb))


# ---------------------------------------------------------------------------
# Matrix backends.
# ---------------------------------------------------------------------------


def _mat_mul(rowsg, rowsf, reduce):
    if not rowsg:
        return ()
    inner = len(rowsf)
    cols = len(rowsf[0]) if rowsf else 0
    out = []
    for grow in rowsg:
        out.append(
            tuple(
                reduce(sum(grow[t] * rowsf[t][c] for t in range(inner)))
                for c in range(cols)
            )
        )
    return tuple(out)


class MatrixBackend(Backend):
    """Common matrix plumbing; rows are dst x src tuples."""

    def identity(self, a: int) -> Mor:
        return (a, a, tuple(tuple(1 if i == j else 0 for j in range(a)) for i in range(a)))

    def zero_mor(self, src: int, dst: int) -> Mor:
        return (src, dst, tuple((0,) * src for _ in range(dst)))

    def compose(self, g: Mor, f: Mor) -> Mor:
        if f[1] != g[0]:
            raise ValueError(f"not composable: {f} then {g}")
        if f[0] == 0 or g[1] == 0 or f[1] == 0:
            return self.zero_mor(f[0], g[1])
        return (f[0], g[1], _mat_mul(g[2], f[2], self._reduce))

    def transpose(self, f: Mor) -> Mor:
        a, b, rows = f
        cols = tuple(tuple(rows[r][c] for r in range(b)) for c in range(a))
        return (b, a, cols)

    def _shift_embed(self, size: int, total: int, offset: int) -> Mor:
        rows = tuple(
            tuple(1 if r == offset + c else 0 for c in range(size)) for r in range(total)
        )
        return (size, total, rows)

    def _add_mor(self, f: Mor, g: Mor) -> Mor:
        rows = tuple(
            tuple(self._reduce(x + y) for x, y in zip(rf, rg))
            for rf, rg in zip(f[2], g[2])
        )
        return (f[0], f[1], rows)


class FqVect(MatrixBackend):
    """Finite-dimensional vector spaces over the prime field F_q."""

    def __init__(self, q: int = 2):
        for p in range(2, q):
            if q % p == 0:
                raise ValueError("q must be prime")
        self.q = q
        self.name = f"fq:{q}"
        self.key = ("fq", q)

    def _reduce(self, v: int) -> int:
        return v % self.q

    def hom_iter(self, a: int, b: int):
        entries = a * b
        for combo in itertools.product(range(self.q), repeat=entries):
            rows = tuple(combo[r * a : (r + 1) * a] for r in range(b))
            yield (a, b, rows)

    def hom_count(self, a: int, b: int) -> int:
        return self.q ** (a * b)

    def _rref(self, rows):
        """Row-reduce; returns (reduced rows as lists, pivot columns)."""
        q = self.q
        m = [list(r) for r in rows]
        pivots = []
        r = 0
        ncols = len(m[0]) if m else 0
        for c in range(ncols):
            pr = next((i for i in range(r, len(m)) if m[i][c] % q), None)
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            inv = pow(m[r][c], -1, q)
            m[r] = [(v * inv) % q for v in m[r]]
            for i in range(len(m)):
                if i != r and m[i][c] % q:
                    f = m[i][c]
                    m[i] = [(v - f * w) % q for v, w in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return m, pivots

    def rank(self, f: Mor) -> int:
        return len(self._rref(f[2])[1])

    def mor_rank(self, f: Mor) -> int:
        return self.rank(f)

    def is_admissible_mono(self, f: Mor) -> bool:
        return self.rank(f) == f[0]

    def is_admissible_epi(self, f: Mor) -> bool:
        return self.rank(f) == f[1]

    def kernel(self, f: Mor):
        a, b, rows = f
        red, pivots = self._rref(rows)
        free = [c for c in range(a) if c not in pivots]
        basis = []
        for fc in free:
            vec = [0] * a
            vec[fc] = 1
            for r, pc in enumerate(pivots):
                vec[pc] = (-red[r][fc]) % self.q
            basis.append(vec)
        k = len(basis)
        mono = (k, a, tuple(tuple(basis[j][r] for j in range(k)) for r in range(a)))
        return (k, mono)

    def cokernel(self, f: Mor):
        # Left null space of f = kernel of the transpose.
        cok, mono = self.kernel(self.transpose(f))
        return (cok, self.transpose(mono))

    def factor_admissible(self, f: Mor):
        a, b, rows = f
        # Image basis: pivot columns of f.
        red, pivots = self._rref(rows)
        cols = [[rows[r][c] for r in range(b)] for c in pivots]
        rank = len(pivots)
        mono = (rank, b, tuple(tuple(col[r] for col in cols) for r in range(b)))
        epi = self.solve_into_mono(mono, f)
        return (epi, mono)

    def solve_into_mono(self, m: Mor, h: Mor):
        """Unique g with m g = h, if h lands in the image of m."""
        k, a, mrows = m
        x, _, hrows = h
        aug = [list(mrows[r]) + list(hrows[r]) for r in range(a)]
        red, pivots = self._rref(aug)
        if any(p >= k for p in pivots):
            return None
        g = [[0] * x for _ in range(k)]
        for r, p in enumerate(pivots):
            for c in range(x):
                g[p][c] = red[r][k + c]
        return (x, k, tuple(tuple(row) for row in g))

    def solve_through_epi(self, e: Mor, h: Mor):
        """Unique g with g e = h, if h kills ker e."""
        gt = self.solve_into_mono(self.transpose(e), self.transpose(h))
        return None if gt is None else self.transpose(gt)

    def pullback_epi_mono(self, e: Mor, m: Mor):
        a, c, _ = e
        b = m[0]
        joint = (
            a + b,
            c,
            tuple(
                tuple(e[2][r]) + tuple(self._reduce(-v) for v in m[2][r]) for r in range(c)
            ),
        )
        p, mono = self.kernel(joint)
        objs = [a, b]
        to_a = self.compose(self.projection(objs, 0), mono)
        to_b = self.compose(self.projection(objs, 1), mono)
        return (p, to_a, to_b)

    def pushout_mono_epi(self, m: Mor, e: Mor):
        p, ta, tb = self.pullback_epi_mono(self.transpose(m), self.transpose(e))
        return (p, self.transpose(ta), self.transpose(tb))

    def subspaces(self, dim: int, sub: int):
        """All sub-dimensional subspaces of F_q^dim, as canonical rref bases."""
        seen = set()
        vecs = [v for v in itertools.product(range(self.q), repeat=dim)]
        for combo in itertools.combinations([v for v in vecs if any(v)], sub):
            red, pivots = self._rref(list(combo))
            if len(pivots) != sub:
                continue
            key = tuple(tuple(row) for row in red[:sub])
            seen.add(key)
        return sorted(seen)


class FreeAb(MatrixBackend):
    """Finitely generated free abelian groups and integer matrices."""

    def __init__(self, entry_bound: int = 2):
        self.entry_bound = entry_bound
        self.name = "freeab"
        self.key = ("freeab", entry_bound)

    def _reduce(self, v: int) -> int:
        return v

    def hom_iter(self, a: int, b: int):
        entries = a * b
        rng = sorted(range(-self.entry_bound, self.entry_bound + 1), key=lambda v: (abs(v), v < 0))
        for combo in itertools.product(rng, repeat=entries):
            rows = tuple(combo[r * a : (r + 1) * a] for r in range(b))
            yield (a, b, rows)

    def hom_count(self, a: int, b: int) -> int:
        return (2 * self.entry_bound + 1) ** (a * b)

    # -- exact integer linear algebra ----------------------------------
    @staticmethod
    def _snf(rows, nrows, ncols):
        """Smith normal form: returns (divisors, U, V) with U A V = D."""
        A = [list(r) for r in rows]
        U = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
        V = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
        t = 0
        while t < min(nrows, ncols):
            # Find a nonzero pivot in the remaining block.
            piv = None
            best = None
            for i in range(t, nrows):
                for j in range(t, ncols):
                    if A[i][j] != 0 and (best is None or abs(A[i][j]) < best):
                        best = abs(A[i][j])
                        piv = (i, j)
            if piv is None:
                break
            i, j = piv
            A[t], A[i] = A[i], A[t]
            U[t], U[i] = U[i], U[t]
            for r in range(nrows):
                A[r][t], A[r][j] = A[r][j], A[r][t]
            for r in range(ncols):
                V[r][t], V[r][j] = V[r][j], V[r][t]
            stable = False
            while not stable:
                stable = True
                for i in range(t + 1, nrows):
                    if A[i][t]:
                        qt = A[i][t] // A[t][t]
                        A[i] = [x - qt * y for x, y in zip(A[i], A[t])]
                        U[i] = [x - qt * y for x, y in zip(U[i], U[t])]
                        if A[i][t]:
                            A[t], A[i] = A[i], A[t]
                            U[t], U[i] = U[i], U[t]
                            stable = False
                for j in range(t + 1, ncols):
                    if A[t][j]:
                        qt = A[t][j] // A[t][t]
                        for r in range(nrows):
                            A[r][j] -= qt * A[r][t]
                        for r in range(ncols):
                            V[r][j] -= qt * V[r][t]
                        if A[t][j]:
                            for r in range(nrows):
                                A[r][t], A[r][j] = A[r][j], A[r][t]
                            for r in range(ncols):
                                V[r][t], V[r][j] = V[r][j], V[r][t]
                            stable = False
            if A[t][t] < 0:
                A[t] = [-x for x in A[t]]
                U[t] = [-x for x in U[t]]
            t += 1
        # Divisibility normalization is irrelevant for these predicates
        # (only the multiset of elementary divisors is consulted).
        divisors = [A[i][i] for i in range(min(nrows, ncols)) if A[i][i] != 0]
        return divisors, U, V, A

    def _snf_of(self, f: Mor):
        a, b, rows = f
        return self._snf(rows, b, a)

    def rank(self, f: Mor) -> int:
        return len(self._snf_of(f)[0])

    def mor_rank(self, f: Mor):
        divisors = self._snf_of(f)[0]
        return (len(divisors), tuple(sorted(map(abs, divisors))))

    def is_admissible_mono(self, f: Mor) -> bool:
        divisors = self._snf_of(f)[0]
        return len(divisors) == f[0] and all(d == 1 for d in divisors)

    def is_admissible_epi(self, f: Mor) -> bool:
        divisors = self._snf_of(f)[0]
        return len(divisors) == f[1] and all(d == 1 for d in divisors)

    @staticmethod
    def _unimodular_inverse(M):
        n = len(M)
        aug = [[Fraction(v) for v in row] + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(M)]
        for c in range(n):
            pr = next(i for i in range(c, n) if aug[i][c] != 0)
            aug[c], aug[pr] = aug[pr], aug[c]
            pv = aug[c][c]
            aug[c] = [v / pv for v in aug[c]]
            for i in range(n):
                if i != c and aug[i][c] != 0:
                    f = aug[i][c]
                    aug[i] = [v - f * w for v, w in zip(aug[i], aug[c])]
        inv = [[int(aug[i][n + j]) for j in range(n)] for i in range(n)]
        return inv

    def kernel(self, f: Mor):
        a, b, rows = f
        divisors, U, V, D = self._snf_of(f)
        r = len(divisors)
        # Kernel basis: columns of V at positions >= r.
        basis_cols = [[V[i][j] for i in range(a)] for j in range(r, a)]
        k = len(basis_cols)
        mono = (k, a, tuple(tuple(col[i] for col in basis_cols) for i in range(a)))
        return (k, mono)

    def cokernel(self, f: Mor):
        a, b, rows = f
        divisors, U, V, D = self._snf_of(f)
        r = len(divisors)
        # U f V = D, so rows r.. of U kill the saturation of the image.
        epi_rows = [U[i] for i in range(r, b)]
        epi = (b, b - r, tuple(tuple(row) for row in epi_rows))
        return (b - r, epi)

    def factor_admissible(self, f: Mor):
        a, b, rows = f
        divisors, U, V, D = self._snf_of(f)
        if any(d != 1 for d in divisors):
            return None
        r = len(divisors)
        Uinv = self._unimodular_inverse(U)
        mono = (r, b, tuple(tuple(Uinv[i][j] for j in range(r)) for i in range(b)))
        epi = self.solve_into_mono(mono, f)
        if epi is None:
            return None
        return (epi, mono)

    def solve_into_mono(self, m: Mor, h: Mor):
        """Unique integer g with m g = h, or None."""
        k, a, mrows = m
        x = h[0]
        aug = [[Fraction(v) for v in mrows[r]] + [Fraction(w) for w in h[2][r]] for r in range(a)]
        pivots = []
        r = 0
        for c in range(k):
            pr = next((i for i in range(r, a) if aug[i][c] != 0), None)
            if pr is None:
                continue
            aug[r], aug[pr] = aug[pr], aug[r]
            pv = aug[r][c]
            aug[r] = [v / pv for v in aug[r]]
            for i in range(a):
                if i != r and aug[i][c] != 0:
                    f = aug[i][c]
                    aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
            pivots.append(c)
            r += 1
        if len(pivots) < k:
            # Mono must have full column rank; defensive.
            return None
        for i in range(r, a):
            if any(aug[i][k + c] != 0 for c in range(x)):
                return None
        g = [[Fraction(0)] * x for _ in range(k)]
        for rr, p in enumerate(pivots):
            for c in range(x):
                g[p][c] = aug[rr][k + c]
        if any(v.denominator != 1 for row in g for v in row):
            return None
        return (x, k, tuple(tuple(int(v) for v in row) for row in g))

    def solve_through_epi(self, e: Mor, h: Mor):
        gt = self.transpose(e), self.transpose(h)
        out = self.solve_into_mono(*gt)
        return None if out is None else self.transpose(out)

    def pullback_epi_mono(self, e: Mor, m: Mor):
        a, c, _ = e
        b = m[0]
        joint = (
            a + b,
            c,
            tuple(tuple(e[2][r]) + tuple(-v for v in m[2][r]) for r in range(c)),
        )
        p, mono = self.kernel(joint)
        objs = [a, b]
        to_a = self.compose(self.projection(objs, 0), mono)
        to_b = self.compose(self.projection(objs, 1), mono)
        return (p, to_a, to_b)

    def pushout_mono_epi(self, m: Mor, e: Mor):
        p, ta, tb = self.pullback_epi_mono(self.transpose(m), self.transpose(e))
        return (p, self.transpose(ta), self.transpose(tb))


# ---------------------------------------------------------------------------
# Free modules over F2[x]/(x^2): additive, stringent, not abelian.
# ---------------------------------------------------------------------------


class NilMod(Backend):
    """Free modules over F2[x]/(x^2); entries are (a, b) for a + b x.

    Kernels and cokernels exist only when the corresponding module of
    solutions is free, which is exactly when a categorical (co)kernel
    exists among free modules; the multiplication-by-x map has neither.
    """

    name = "nil:2"
    key = ("nil", 2)

    ZERO = (0, 0)
    ONE = (1, 0)

    @staticmethod
    def _emul(u, v):
        return ((u[0] * v[0]) % 2, (u[0] * v[1] + u[1] * v[0]) % 2)

    @staticmethod
    def _eadd(u, v):
        return ((u[0] + v[0]) % 2, (u[1] + v[1]) % 2)

    def identity(self, a: int) -> Mor:
        return (a, a, tuple(tuple(self.ONE if i == j else self.ZERO for j in range(a)) for i in range(a)))

    def zero_mor(self, src: int, dst: int) -> Mor:
        return (src, dst, tuple((self.ZERO,) * src for _ in range(dst)))

    def compose(self, g: Mor, f: Mor) -> Mor:
        if f[1] != g[0]:
            raise ValueError("not composable")
        a, _, frows = f
        _, c, grows = g
        out = []
        for r in range(c):
            row = []
            for j in range(a):
                acc = self.ZERO
                for t in range(f[1]):
                    acc = self._eadd(acc, self._emul(grows[r][t], frows[t][j]))
                row.append(acc)
            out.append(tuple(row))
        return (a, c, tuple(out))

    def transpose(self, f: Mor) -> Mor:
        a, b, rows = f
        return (b, a, tuple(tuple(rows[r][c] for r in range(b)) for c in range(a)))

    def mor_rank(self, f: Mor) -> int:
        f2 = FqVect(2)
        real = self._realify(f)
        return f2.rank((2 * f[0], 2 * f[1], tuple(tuple(r) for r in real)))

    def hom_iter(self, a: int, b: int):
        cells = a * b
        for combo in itertools.product([(0, 0), (1, 0), (0, 1), (1, 1)], repeat=cells):
            rows = tuple(combo[r * a : (r + 1) * a] for r in range(b))
            yield (a, b, rows)

    def hom_count(self, a: int, b: int) -> int:
        return 4 ** (a * b)

    def _realify(self, f: Mor):
        """View as an F2-matrix on (rank 2a) -> (rank 2b), basis (e, xe)."""
        a, b, rows = f
        out = [[0] * (2 * a) for _ in range(2 * b)]
        for r in range(b):
            for c in range(a):
                u, v = rows[r][c]
                out[2 * r][2 * c] = u
                out[2 * r + 1][2 * c] = v
                out[2 * r + 1][2 * c + 1] = u
        return out

    def _module_basis(self, vectors, a):
        """F2-span structure of an R-submodule of R^a given F2 generators.

        Returns (f2_dim, free_rank_or_None); the module is free iff
        dim = 2 * dim(x . module).
        """
        f2 = FqVect(2)
        if not vectors:
            return 0, 0
        red, piv = f2._rref(vectors)
        dim = len(piv)
        xvecs = []
        for vec in vectors:
            xv = [0] * 2 * a
            for i in range(a):
                xv[2 * i + 1] = vec[2 * i]
            xvecs.append(xv)
        redx, pivx = f2._rref(xvecs)
        xdim = len(pivx)
        if dim == 2 * xdim:
            return dim, xdim
        return dim, None

    def kernel(self, f: Mor):
        a = f[0]
        f2 = FqVect(2)
        real = self._realify(f)
        kdim, mono = f2.kernel((2 * a, 2 * f[1], tuple(tuple(r) for r in real)))
        vectors = [
            [mono[2][r][j] for r in range(2 * a)] for j in range(kdim)
        ]
        dim, free_rank = self._module_basis(vectors, a)
        if free_rank is None:
            return None
        # Free basis = lifts of an F2-basis of M / xM (Nakayama): pick
        # generators whose images stay independent modulo x.M.
        f2v = FqVect(2)
        xspan = []
        for vec in vectors:
            xv = [0] * (2 * a)
            for i in range(a):
                xv[2 * i + 1] = vec[2 * i]
            xspan.append(xv)
        basis = []
        current = list(xspan)
        rank_now = len(f2v._rref(current)[1]) if current else 0
        for vec in vectors:
            trial = current + [vec]
            r2 = len(f2v._rref(trial)[1])
            if r2 > rank_now:
                basis.append(vec)
                current = trial
                rank_now = r2
            if len(basis) == free_rank:
                break
        if len(basis) < free_rank:
            return None
        cols = [[(vec[2 * i], vec[2 * i + 1]) for i in range(a)] for vec in basis]
        mono_r = (
            free_rank,
            a,
            tuple(tuple(cols[j][i] for j in range(free_rank)) for i in range(a)),
        )
        return (free_rank, mono_r)

    def cokernel(self, f: Mor):
        kt = self.kernel(self.transpose(f))
        if kt is None:
            return None
        rank, mono = kt
        return (rank, self.transpose(mono))

    def is_admissible_mono(self, f: Mor) -> bool:
        cok = self.cokernel(f)
        if cok is None:
            return False
        real = self._realify(f)
        f2 = FqVect(2)
        inj = f2.rank((2 * f[0], 2 * f[1], tuple(tuple(r) for r in real))) == 2 * f[0]
        return inj and cok[0] == f[1] - f[0]

    def is_admissible_epi(self, f: Mor) -> bool:
        return self.is_admissible_mono(self.transpose(f))

    def factor_admissible(self, f: Mor):
        ker = self.kernel(f)
        cok = self.cokernel(f)
        if ker is None or cok is None:
            return None
        fac = self.image_factor(f)
        if fac is None:
            return None
        coim_epi, coim_obj, mid, im_obj, im_mono = fac
        if coim_obj != im_obj:
            return None
        # mid must be invertible for an epi-mono factorization.
        real = self._realify(mid)
        f2 = FqVect(2)
        if f2.rank((2 * coim_obj, 2 * im_obj, tuple(tuple(r) for r in real))) != 2 * coim_obj:
            return None
        return (self.compose(mid, coim_epi), im_mono)

    def solve_into_mono(self, m: Mor, h: Mor):
        # Solve over the realification; the solution is R-linear iff it
        # exists uniquely, since m is injective.
        f2 = FqVect(2)
        mr = self._realify(m)
        hr = self._realify(h)
        g = f2.solve_into_mono(
            (2 * m[0], 2 * m[1], tuple(tuple(r) for r in mr)),
            (2 * h[0], 2 * h[1], tuple(tuple(r) for r in hr)),
        )
        if g is None:
            return None
        k = m[0]
        x = h[0]
        rows = []
        for r in range(k):
            row = []
            for c in range(x):
                row.append((g[2][2 * r][2 * c], g[2][2 * r + 1][2 * c]))
            rows.append(tuple(row))
        cand = (x, k, tuple(rows))
        if self.compose(m, cand) != h:
            return None
        return cand

    def solve_through_epi(self, e: Mor, h: Mor):
        gt = self.solve_into_mono(self.transpose(e), self.transpose(h))
        return None if gt is None else self.transpose(gt)

    def _shift_embed(self, size: int, total: int, offset: int) -> Mor:
        rows = tuple(
            tuple(self.ONE if r == offset + c else self.ZERO for c in range(size))
            for r in range(total)
        )
        return (size, total, rows)

    def _add_mor(self, f: Mor, g: Mor) -> Mor:
        rows = tuple(
            tuple(self._eadd(x, y) for x, y in zip(rf, rg)) for rf, rg in zip(f[2], g[2])
        )
        return (f[0], f[1], rows)


# ---------------------------------------------------------------------------
# Section-level checks built from the primitives.
# ---------------------------------------------------------------------------


def stringency_probe(backend: Backend, size_bound: int):
    """First morphism (canonical order) with kernel and cokernel but a
    non-invertible coimage-to-image comparison, or None."""
    for a in backend.objects_upto(size_bound):
        for b in backend.objects_upto(size_bound):
            for f in backend.hom_iter(a, b):
                fac = backend.image_factor(f)
                if fac is None:
                    continue
                _, coim_obj, mid, im_obj, _ = fac
                if coim_obj != im_obj or not backend.is_iso(mid):
                    return {"morphism": f, "coim": coim_obj, "im": im_obj, "mid": mid}
    return None


def nine_lemma_check(backend: Backend, rows, cols):
    """Verify the 3x3 diagram conclusion: given exact rows and exact
    right two columns, the first column is short exact.

    ``rows`` is three (mono, epi) pairs top to bottom; ``cols`` is three
    (upper, lower) vertical pairs left to right.  Returns (ok, report);
    hypothesis violations raise ValueError.
    """
    for i, (m, e) in enumerate(rows):
        w = _check_short_exact(backend, m, e)
        if w is not None:
            raise ValueError(f"row {i} not short exact: {w}")
    for j in (1, 2):
        w = _check_short_exact(backend, cols[j][0], cols[j][1])
        if w is not None:
            raise ValueError(f"column {j} not short exact: {w}")
    # Commutativity of all four squares.
    (mA, eA), (mB, eB), (mC, eC) = rows
    (a1, a2), (b1, b2), (c1, c2) = cols
    squares = [
        (backend.compose(mB, a1), backend.compose(b1, mA)),
        (backend.compose(eB, b1), backend.compose(c1, eA)),
        (backend.compose(mC, a2), backend.compose(b2, mB)),
        (backend.compose(eC, b2), backend.compose(c2, eB)),
    ]
    for i, (lhs, rhs) in enumerate(squares):
        if lhs != rhs:
            raise ValueError(f"square {i} does not commute")
    w = _check_short_exact(backend, a1, a2)
    if w is None:
        return True, None
    return False, w


def mono_pullback_coker(backend: Backend, mono1, mono0, vert_b, vert_a, check_pullback=True, probe_bound=2):
    """Cokernel comparison for a pullback square with monic rows.

    Square: B1 >-> A1 over B0 >-> A0, with verticals vert_b, vert_a.
    Returns (ok, induced C1 -> C0, report).
    """
    if backend.compose(mono0, vert_b) != backend.compose(vert_a, mono1):
        raise ValueError("square does not commute")
    if not (backend.is_admissible_mono(mono1) and backend.is_admissible_mono(mono0)):
        raise ValueError("horizontal maps must be admissible monos")
    if check_pullback and not square_is_pullback(
        backend, mono1, mono0, vert_b, vert_a, probe_bound
    ):
        raise ValueError("square is not a pullback")
    c1, e1 = backend.cokernel(mono1)
    c0, e0 = backend.cokernel(mono0)
    induced = backend.solve_through_epi(e1, backend.compose(e0, vert_a))
    ok = induced is not None and backend.is_admissible_mono(induced)
    return ok, induced, None if ok else {"kind": "induced-not-mono", "map": induced}


def square_is_pullback(backend: Backend, top, bottom, left, right, probe_bound: int) -> bool:
    """Bounded universal-property test for a commuting square.

        P --top--> X
        |          |
      left       right
        v          v
        Q -bottom-> Y
    """
    P = top[0]
    X, Q = top[1], left[1]
    for t in backend.objects_upto(probe_bound):
        for f in backend.hom_iter(t, X):
            rf = backend.compose(right, f)
            for g in backend.hom_iter(t, Q):
                if backend.compose(bottom, g) != rf:
                    continue
                lifts = [
                    u
                    for u in backend.hom_iter(t, P)
                    if backend.compose(top, u) == f and backend.compose(left, u) == g
                ]
                if len(lifts) != 1:
                    return False
    return True


def snake_sequence(backend: Backend, f, g):
    """The six-term kernel-cokernel sequence of a composable pair.

    Requires f, g, and g f admissible.  Returns the five connecting
    maps, ready for sequence classification.
    """
    gf = backend.compose(g, f)
    kf, kf_m = backend.kernel(f)
    kgf, kgf_m = backend.kernel(gf)
    kg, kg_m = backend.kernel(g)
    cf, cf_e = backend.cokernel(f)
    cgf, cgf_e = backend.cokernel(gf)
    cg, cg_e = backend.cokernel(g)
    m1 = backend.solve_into_mono(kgf_m, kf_m)
    m2 = backend.solve_into_mono(kg_m, backend.compose(f, kgf_m))
    conn = backend.compose(cf_e, kg_m)
    m4 = backend.solve_through_epi(cf_e, cgf_e)
    m5 = backend.solve_through_epi(cgf_e, cg_e)
    if None in (m1, m2, m4, m5):
        return None
    return [m1, m2, conn, m4, m5]


@lru_cache(maxsize=None)
def get_backend(spec: str) -> Backend:
    """Backend from a CLI string: f1, fq:2, fq:3, freeab, nil:2."""
    if spec == "f1":
        return F1Vect()
    if spec.startswith("fq:"):
        return FqVect(int(spec.split(":")[1]))
    if spec == "fq":
        return FqVect(2)
    if spec == "freeab":
        return FreeAb()
    if spec == "nil:2":
        return NilMod()
    raise ValueError(f"unknown backend {spec!r}")
