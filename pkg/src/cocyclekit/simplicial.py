"""Graded complexes, explicit Dold-Kan labelings, and total complexes.

A DKSimplex labels every cell (i0 < ... < il) of a standard simplex with an
element of degree -l; the boundary condition ties the alternating face sum of
each cell to the differential of its label. Elements are abstract: any carrier
with add/scale/norm supplied through ElementOps works (exact rational vectors
in the tests, sampled holomorphic forms in the cocycle pipeline).
"""

import itertools
from fractions import Fraction

from .errors import ValidationError


class ElementOps:
    """Pluggable element arithmetic for one complex.

    zero(degree) must produce the additive zero of the given degree's carrier;
    norm is the residual magnitude used by tolerance checks; eq is optional
    exact equality (falls back to norm of the difference being zero).
    """

    def __init__(self, add, scale, norm, zero, eq=None):
        self.add = add
        self.scale = scale
        self.norm = norm
        self.zero = zero
        self._eq = eq

    def sub(self, x, y):
        return self.add(x, self.scale(-1, y))

    def eq(self, x, y):
        if self._eq is not None:
            return self._eq(x, y)
        return self.norm(self.sub(x, y)) == 0


def vector_ops(dims_by_degree):
    """Exact Fraction-vector elements; dims_by_degree maps degree -> dimension."""

    def add(x, y):
        return tuple(a + b for a, b in zip(x, y))

    def scale(a, x):
        a = Fraction(a)
        return tuple(a * v for v in x)

    def norm(x):
        return max((abs(v) for v in x), default=Fraction(0))

    def zero(degree):
        return tuple(Fraction(0) for _ in range(dims_by_degree.get(degree, 0)))

    return ElementOps(add, scale, norm, zero, eq=lambda x, y: x == y)


class GradedComplex:
    """Finite-support Z-graded cochain complex with differential of degree +1."""

    def __init__(self, degrees, diff, ops, membership=None):
        self.degrees = sorted(set(int(d) for d in degrees))
        self._diff = diff
        self.ops = ops
        self.membership = membership or {}

    def d(self, degree, x):
        """Apply the differential to an element of the given degree."""
        return self._diff(degree, x)

    def contains(self, degree, x):
        pred = self.membership.get(degree)
        return True if pred is None else pred(x)

    def check_d_squared(self, degree, samples, tol=1e-10):
        worst = 0.0
        for x in samples:
            ddx = self.d(degree + 1, self.d(degree, x))
            worst = max(worst, float(self.ops.norm(ddx)))
        return worst <= tol, worst


def smart_truncate(C, tol=1e-10):
    """Keep negative degrees, replace degree 0 by the kernel of d, drop the rest.

    Closedness is enforced through the degree-0 membership predicate; elements
    failing it are rejected wherever insertion is validated.
    """
    degrees = [p for p in C.degrees if p <= 0]

    def diff(degree, x):
        if degree >= 0:
            return C.ops.zero(degree + 1)
        return C.d(degree, x)

    membership = dict(C.membership)

    def closed_at_zero(x):
        return float(C.ops.norm(C.d(0, x))) <= tol and C.contains(0, x)

    membership[0] = closed_at_zero
    return GradedComplex(degrees, diff, C.ops, membership)


def _cells(dim, min_len=1):
    for l in range(min_len - 1, dim + 1):
        for c in itertools.combinations(range(dim + 1), l + 1):
            yield c


class DKSimplex:
    """Labels for all cells of a standard `dim`-simplex, cell (i0..il) in degree -l."""

    def __init__(self, dim, labels):
        self.dim = int(dim)
        self.labels = {}
        for cell, value in labels.items():
            cell = tuple(int(i) for i in cell)
            if list(cell) != sorted(set(cell)) or (cell and (cell[0] < 0 or cell[-1] > self.dim)):
                raise ValidationError("bad cell %r for dimension %d" % (cell, self.dim))
            self.labels[cell] = value
        for cell in _cells(self.dim):
            if cell not in self.labels:
                raise ValidationError("missing label for cell %r" % (cell,))

    def label(self, cell):
        return self.labels[tuple(cell)]

    def cells(self, length=None):
        if length is None:
            return list(self.labels)
        return [c for c in self.labels if len(c) == length]

    def to_json(self, encode=lambda v: v):
        return {",".join(map(str, cell)): encode(v) for cell, v in sorted(self.labels.items())}


def dk_validate(s, complex_, tol=1e-10):
    """Residual of the boundary condition on every cell of dimension >= 1.

    Returns a report dict: per-cell residuals, the worst offender, pass flag.
    """
    ops = complex_.ops
    residuals = {}
    for cell in s.cells():
        l = len(cell) - 1
        if l < 1:
            continue
        acc = None
        for j in range(l + 1):
            face = cell[:j] + cell[j + 1:]
            term = ops.scale((-1) ** j, s.label(face))
            acc = term if acc is None else ops.add(acc, term)
        rhs = complex_.d(-l, s.label(cell))
        residuals[cell] = float(ops.norm(ops.sub(acc, rhs)))
    worst_cell = max(residuals, key=residuals.get) if residuals else None
    worst = residuals.get(worst_cell, 0.0)
    return {
        "residuals": {",".join(map(str, c)): r for c, r in sorted(residuals.items())},
        "max_residual": worst,
        "worst_cell": worst_cell,
        "pass": worst <= tol,
        "tolerance": tol,
    }


def dk_face(j, s):
    """j-th simplicial face: reindex labels through the monotone injection skipping j."""
    if not 0 <= j <= s.dim:
        raise ValidationError("face index %d out of range for dim %d" % (j, s.dim))
    if s.dim == 0:
        raise ValidationError("cannot take a face of a 0-simplex")

    def delta(i):
        return i if i < j else i + 1

    labels = {}
    for cell in _cells(s.dim - 1):
        labels[cell] = s.label(tuple(delta(i) for i in cell))
    return DKSimplex(s.dim - 1, labels)


def dk_degeneracy(j, s, ops):
    """j-th degeneracy: reindex through the surjection repeating j; collapsed cells are zero."""
    if not 0 <= j <= s.dim:
        raise ValidationError("degeneracy index %d out of range for dim %d" % (j, s.dim))

    def sigma(i):
        return i if i <= j else i - 1

    labels = {}
    for cell in _cells(s.dim + 1):
        image = tuple(sigma(i) for i in cell)
        if len(set(image)) < len(image):
            labels[cell] = ops.zero(-(len(cell) - 1))
        else:
            labels[cell] = s.label(image)
    return DKSimplex(s.dim + 1, labels)


class DoubleComplex:
    """Bigraded complex with commuting differentials d_cech (first index +1)
    and d_int (second index +1)."""

    def __init__(self, bidegrees, d_cech, d_int, ops):
        self.bidegrees = sorted(set(tuple(b) for b in bidegrees))
        self.d_cech = d_cech
        self.d_int = d_int
        self.ops = ops


def total_complex(D):
    """Collapse a double complex to degree p = sum of bidegrees.

    Elements are dicts {bidegree: element}; the differential is
    d_cech + (-1)^{cech degree} d_int, which squares to zero when the two
    differentials commute.
    """
    degrees = sorted({a + b for a, b in D.bidegrees})
    by_total = {}
    for (a, b) in D.bidegrees:
        by_total.setdefault(a + b, []).append((a, b))

    ops = D.ops

    def add(x, y):
        out = dict(x)
        for key, v in y.items():
            out[key] = ops.add(out[key], v) if key in out else v
        return out

    def scale(a, x):
        return {key: ops.scale(a, v) for key, v in x.items()}

    def norm(x):
        return max((ops.norm(v) for v in x.values()), default=0)

    def zero(degree):
        return {bd: ops.zero(bd) for bd in by_total.get(degree, [])}

    tot_ops = ElementOps(add, scale, norm, zero)

    def diff(degree, x):
        out = {}
        for (a, b), v in x.items():
            for target, piece in (((a + 1, b), D.d_cech((a, b), v)),
                                  ((a, b + 1), ops.scale((-1) ** a, D.d_int((a, b), v)))):
                if target in out:
                    out[target] = ops.add(out[target], piece)
                else:
                    out[target] = piece
        # keep only bidegrees the double complex carries
        return {bd: v for bd, v in out.items() if bd in set(by_total.get(sum(bd), []))}

    return GradedComplex(degrees, diff, tot_ops)
