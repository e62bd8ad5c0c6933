"""Exact rational linear algebra for the polytope predicates.

Small dense routines over Fraction/int: integer determinants by
fraction-free Gaussian elimination, affine hyperplanes through point
tuples, and linear feasibility / 1-d projections via Fourier-Motzkin
elimination.  Everything is exact; no floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction


def det_int(rows: list[list[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss, exact)."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for i in range(n - 1):
        if m[i][i] == 0:
            for r in range(i + 1, n):
                if m[r][i] != 0:
                    m[i], m[r] = m[r], m[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
            m[r][i] = 0
        prev = m[i][i]
    return sign * m[n - 1][n - 1]


def hyperplane_through(points: list[tuple[int, ...]]) -> tuple[list[int], int]:
    """Normal and offset of the affine hyperplane through d affinely
    independent points in R^(d-1)... given d points in R^d spanning a
    hyperplane, returns integer (normal, offset) with normal . x = offset
    on the hyperplane.  Raises if the points are affinely dependent.
    """
    d = len(points[0])
    if len(points) != d:
        raise ValueError(f"need exactly {d} points in R^{d}")
    base = points[0]
    diffs = [[p[c] - base[c] for c in range(d)] for p in points[1:]]
    # Cofactor expansion: normal[c] = (-1)^c * minor deleting column c.
    normal = []
    for c in range(d):
        minor = [[row[cc] for cc in range(d) if cc != c] for row in diffs]
        normal.append((-1) ** c * det_int(minor))
    if all(v == 0 for v in normal):
        raise ValueError("points are affinely dependent")
    offset = sum(normal[c] * base[c] for c in range(d))
    return normal, offset


# ---------------------------------------------------------------------------
# Linear feasibility.  Constraints are rows (a_0, ..., a_{m-1}, b) meaning
# a . x <= b;  equalities are entered as two opposite inequalities.
# ---------------------------------------------------------------------------


def _normalize(rows):
    seen = set()
    out = []
    for row in rows:
        row = tuple(Fraction(v) for v in row)
        nz = [v for v in row[:-1] if v != 0]
        if nz:
            scale = abs(nz[0])
            row = tuple(v / scale for v in row)
        if row not in seen:
            seen.add(row)
            out.append(list(row))
    return out


def fm_eliminate(constraints: list[list], var: int) -> list[list]:
    """Eliminate one variable from a list of <= constraints."""
    pos, neg, zero = [], [], []
    for row in constraints:
        coeff = row[var]
        if coeff > 0:
            pos.append(row)
        elif coeff < 0:
            neg.append(row)
        else:
            zero.append([v for i, v in enumerate(row) if i != var])
    out = zero
    for p in pos:
        for q in neg:
            cp, cq = p[var], -q[var]
            combined = [
                cq * pv + cp * qv
                for i, (pv, qv) in enumerate(zip(p, q))
                if i != var
            ]
            out.append(combined)
    return _normalize(out)


def fm_feasible(constraints: list[list], num_vars: int) -> bool:
    """Whether {x : a.x <= b for all rows} is nonempty, exactly."""
    rows = _normalize([list(map(Fraction, r)) for r in constraints])
    for var in range(num_vars - 1, -1, -1):
        rows = fm_eliminate(rows, var)
        if any(all(c == 0 for c in row[:-1]) and row[-1] < 0 for row in rows):
            return False
    return all(row[-1] >= 0 for row in rows)


def fm_project_interval(constraints: list[list], num_vars: int, keep: int):
    """Project a feasible system onto one coordinate.

    Returns (lo, hi) bounds for the kept variable (None for unbounded
    sides), or None when the system is infeasible.
    """
    rows = _normalize([list(map(Fraction, r)) for r in constraints])
    for var in range(num_vars - 1, -1, -1):
        if var == keep:
            continue
        rows = fm_eliminate(rows, var)
    # Remaining rows constrain only the kept variable (now at index 0).
    lo, hi = None, None
    for row in rows:
        coeff, bound = row[0], row[-1]
        if coeff > 0:
            val = bound / coeff
            hi = val if hi is None else min(hi, val)
        elif coeff < 0:
            val = bound / coeff
            lo = val if lo is None else max(lo, val)
        elif bound < 0:
            return None
    if lo is not None and hi is not None and lo > hi:
        return None
    return (lo, hi)


# ---------------------------------------------------------------------------
# Affine systems: equalities solved by substitution, inequalities reduced
# to the free coordinates.  Keeps Fourier-Motzkin inputs tiny.
# ---------------------------------------------------------------------------


class AffineSystem:
    """Equalities eq.x = rhs plus inequalities a.x <= b, handled exactly.

    Equalities are Gauss-eliminated once; points are parametrized as
    x = origin + basis @ t over the free coordinates t, and all
    inequality work happens in t-space.
    """

    def __init__(self, num_vars: int, equalities, inequalities):
        self.num_vars = num_vars
        self.consistent, self.origin, self.basis = _solve_affine(equalities, num_vars)
        self.reduced = []
        if self.consistent:
            for row in inequalities:
                self.reduced.append(self._reduce_row(row))

    def _reduce_row(self, row):
        a, b = row[:-1], Fraction(row[-1])
        const = sum(Fraction(c) * o for c, o in zip(a, self.origin))
        coeffs = [
            sum(Fraction(c) * col[j] for c, col in zip(a, self.basis))
            for j in range(len(self.basis[0]) if self.basis else 0)
        ]
        return coeffs + [b - const]

    def feasible(self) -> bool:
        if not self.consistent:
            return False
        nfree = len(self.basis[0]) if self.basis else 0
        if nfree == 0:
            return all(row[-1] >= 0 for row in self.reduced)
        return fm_feasible(self.reduced, nfree)

    def functional_interval(self, coeffs, const):
        """Exact range of coeffs.x - const over the solution set."""
        if not self.consistent:
            return None
        base = sum(Fraction(c) * o for c, o in zip(coeffs, self.origin)) - Fraction(const)
        nfree = len(self.basis[0]) if self.basis else 0
        tcoeffs = [
            sum(Fraction(c) * col[j] for c, col in zip(coeffs, self.basis))
            for j in range(nfree)
        ]
        if nfree == 0:
            return (base, base) if all(r[-1] >= 0 for r in self.reduced) else None
        ext = [row[:-1] + [0, row[-1]] for row in self.reduced]
        ext.append(tcoeffs + [-1, -base])
        ext.append([-c for c in tcoeffs] + [1, base])
        return fm_project_interval(ext, nfree + 1, nfree)


def _solve_affine(equalities, num_vars: int):
    """Gauss-eliminate eq.x = rhs; return (consistent, origin, basis).

    basis is a list of rows (one per original variable) whose columns
    span the solution space: x = origin + basis @ t.
    """
    rows = [list(map(Fraction, r)) for r in equalities]
    pivots = {}
    r = 0
    for c in range(num_vars):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots[c] = r
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if not any(v != 0 for v in rows[i][:-1]) and rows[i][-1] != 0:
            return False, None, None
    free = [c for c in range(num_vars) if c not in pivots]
    origin = [Fraction(0)] * num_vars
    for c, ri in pivots.items():
        origin[c] = rows[ri][-1]
    basis = [[Fraction(0)] * len(free) for _ in range(num_vars)]
    for j, fc in enumerate(free):
        basis[fc][j] = Fraction(1)
        for c, ri in pivots.items():
            basis[c][j] = -rows[ri][fc]
    return True, origin, basis
