"""Matrix-valued 1-forms and scalar k-forms as pointwise evaluators.

theta(f) is the connection-style form J^{-1} dJ of a map's Jacobian; the sharp
pullback conjugates the matrix part while pulling back the 1-form part. A
GL-invariant map applied to k such forms wedges the 1-form parts into a scalar
k-form. Everything here evaluates at explicit points; nothing is a global
symbolic object.
"""

import itertools

import numpy as np

from .errors import SingularJacobianError, ValidationError
from .invariants import eval_invariant


class MatrixOneForm:
    """point -> list of n complex (n, n) matrices, one per coordinate differential."""

    def __init__(self, n, eval_fn, provenance="", structurally_zero=False):
        self.n = int(n)
        self._eval = eval_fn
        self.provenance = provenance
        self.structurally_zero = structurally_zero

    def eval(self, point):
        if self.structurally_zero:
            z = np.zeros((self.n, self.n), dtype=complex)
            return [z.copy() for _ in range(self.n)]
        return self._eval(tuple(point))

    @classmethod
    def zero(cls, n, provenance="0"):
        return cls(n, None, provenance=provenance, structurally_zero=True)

    def __add__(self, other):
        if self.n != other.n:
            raise ValidationError("dimension mismatch")
        if self.structurally_zero:
            return other
        if other.structurally_zero:
            return self

        def ev(point):
            a = self.eval(point)
            b = other.eval(point)
            return [x + y for x, y in zip(a, b)]

        return MatrixOneForm(self.n, ev, "(%s + %s)" % (self.provenance, other.provenance))

    def scale(self, a):
        if self.structurally_zero or a == 0:
            return MatrixOneForm.zero(self.n)
        return MatrixOneForm(self.n, lambda p: [a * m for m in self.eval(p)],
                             "%r * %s" % (a, self.provenance))

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def max_norm(self, points):
        """Entrywise max over the coefficient matrices at the given points."""
        worst = 0.0
        for p in points:
            for m in self.eval(p):
                worst = max(worst, float(np.max(np.abs(m))))
        return worst


class ScalarKForm:
    """point -> dict {increasing k-index tuple: coefficient} on C^n."""

    def __init__(self, n, k, eval_fn, provenance="", structurally_zero=False):
        self.n = int(n)
        self.k = int(k)
        self._eval = eval_fn
        self.provenance = provenance
        self.structurally_zero = structurally_zero or self.k > self.n

    def indices(self):
        return list(itertools.combinations(range(1, self.n + 1), self.k))

    def eval(self, point):
        if self.structurally_zero:
            return {idx: 0.0 + 0.0j for idx in self.indices()}
        return self._eval(tuple(point))

    @classmethod
    def zero(cls, n, k, provenance="0"):
        return cls(n, k, None, provenance=provenance, structurally_zero=True)

    def __add__(self, other):
        self._compat(other)
        if self.structurally_zero:
            return other
        if other.structurally_zero:
            return self

        def ev(point):
            a = self.eval(point)
            b = other.eval(point)
            return {idx: a[idx] + b[idx] for idx in a}

        return ScalarKForm(self.n, self.k, ev)

    def scale(self, a):
        if self.structurally_zero:
            return self
        if a == 0:
            return ScalarKForm.zero(self.n, self.k)
        return ScalarKForm(self.n, self.k, lambda p: {i: a * v for i, v in self.eval(p).items()})

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def _compat(self, other):
        if self.n != other.n or self.k != other.k:
            raise ValidationError("form degree/dimension mismatch")

    def max_norm(self, points):
        worst = 0.0
        for p in points:
            for v in self.eval(p).values():
                worst = max(worst, abs(v))
        return worst


def theta(f):
    """J^{-1} dJ of the map f: coefficient of dz^a at z is J(z)^{-1} (dJ/dz^a)(z).

    Affine maps short-circuit to the structural zero form, keeping downstream
    vanishing results exact rather than merely small.
    """
    n = f.n
    if hasattr(f, "is_affine") and f.is_affine():
        return MatrixOneForm.zero(n, provenance="theta(%s)" % getattr(f, "name", "affine"))

    def ev(point):
        Jinv = f.jacobian_inverse(point)
        out = []
        for a in range(1, n + 1):
            dJ = np.empty((n, n), dtype=complex)
            exprs = f.djac_exprs(a)
            for r in range(n):
                for c in range(n):
                    dJ[r, c] = exprs[r][c].eval(point)
            out.append(Jinv @ dJ)
        return out

    return MatrixOneForm(n, ev, provenance="theta(%s)" % (getattr(f, "name", "") or "map"))


def sharp_pullback(phi, omega):
    """phi-sharp: pull the 1-form part back along phi, conjugate matrices by its Jacobian."""
    if phi.n != omega.n:
        raise ValidationError("dimension mismatch")
    if omega.structurally_zero:
        return MatrixOneForm.zero(omega.n,
                                  provenance="%s#(0)" % getattr(phi, "name", "phi"))
    n = omega.n

    def ev(point):
        J = phi.jacobian(point)
        det = np.linalg.det(J)
        if abs(det) < 1e-12:
            raise SingularJacobianError(point)
        Jinv = np.linalg.inv(J)
        mats = omega.eval(phi.eval(point))
        conj = [Jinv @ m @ J for m in mats]
        return [sum(J[a, b] * conj[a] for a in range(n)) for b in range(n)]

    return MatrixOneForm(n, ev, provenance="%s#(%s)" % (getattr(phi, "name", "phi"),
                                                        omega.provenance))


def apply_invariant(T, omegas):
    """Wedge k matrix 1-forms through a GL-invariant map into a scalar k-form."""
    k = T.arity
    if len(omegas) != k:
        raise ValidationError("expected %d forms for arity %d" % (k, k))
    n = omegas[0].n
    for w in omegas:
        if w.n != n:
            raise ValidationError("forms live on different dimensions")
    if k > n or any(w.structurally_zero for w in omegas):
        return ScalarKForm.zero(n, k, provenance="T[...]=0")

    combos = list(itertools.combinations(range(1, n + 1), k))
    perms = [(sig, _perm_sign(sig)) for sig in itertools.permutations(range(k))]

    def ev(point):
        mats = [w.eval(point) for w in omegas]
        out = {}
        for idx in combos:
            total = 0.0 + 0.0j
            for sig, sign in perms:
                # slot r receives the coefficient matrix of dz^{idx[sig[r]]}
                chosen = [mats[r][idx[sig[r]] - 1] for r in range(k)]
                total += sign * eval_invariant(T, chosen)
            out[idx] = total
        return out

    return ScalarKForm(n, k, ev, provenance="T[%s]" % ", ".join(w.provenance for w in omegas))


def _perm_sign(sig):
    sign = 1
    for i in range(len(sig)):
        for j in range(i + 1, len(sig)):
            if sig[i] > sig[j]:
                sign = -sign
    return sign


def pullback_kform(phi, w):
    """Holomorphic pullback of a scalar k-form along phi via Jacobian minors."""
    if phi.n != w.n:
        raise ValidationError("dimension mismatch")
    if w.structurally_zero:
        return ScalarKForm.zero(w.n, w.k)
    n, k = w.n, w.k
    combos = list(itertools.combinations(range(1, n + 1), k))

    def ev(point):
        J = phi.jacobian(point)
        vals = w.eval(phi.eval(point))
        out = {}
        for B in combos:
            cols = [b - 1 for b in B]
            total = 0.0 + 0.0j
            for A in combos:
                rows = [a - 1 for a in A]
                minor = np.linalg.det(J[np.ix_(rows, cols)]) if k > 0 else 1.0
                total += vals[A] * minor
            out[B] = total
        return out

    return ScalarKForm(n, k, ev, provenance="%s*(%s)" % (getattr(phi, "name", "phi"),
                                                         w.provenance))


class SampledForm:
    """A ScalarKForm frozen on a fixed point list; supports exact linear algebra.

    This is the concrete element type for Dold-Kan labels over form complexes.
    """

    def __init__(self, n, k, points, values):
        self.n = int(n)
        self.k = int(k)
        self.points = [tuple(p) for p in points]
        self.indices = list(itertools.combinations(range(1, self.n + 1), self.k))
        self.values = np.asarray(values, dtype=complex)
        expect = (len(self.points), len(self.indices))
        if self.values.shape != expect:
            raise ValidationError("value array shape %r, expected %r"
                                  % (self.values.shape, expect))

    @classmethod
    def sample(cls, form, points):
        idxs = list(itertools.combinations(range(1, form.n + 1), form.k))
        arr = np.zeros((len(points), len(idxs)), dtype=complex)
        for i, p in enumerate(points):
            vals = form.eval(p)
            for j, idx in enumerate(idxs):
                arr[i, j] = vals[idx]
        return cls(form.n, form.k, points, arr)

    @classmethod
    def zeros(cls, n, k, points):
        count = len(list(itertools.combinations(range(1, n + 1), k)))
        return cls(n, k, points, np.zeros((len(points), count), dtype=complex))

    def add(self, other):
        self._compat(other)
        return SampledForm(self.n, self.k, self.points, self.values + other.values)

    def scale(self, a):
        return SampledForm(self.n, self.k, self.points, a * self.values)

    def sub(self, other):
        self._compat(other)
        return SampledForm(self.n, self.k, self.points, self.values - other.values)

    def _compat(self, other):
        if (self.n, self.k) != (other.n, other.k) or self.points != other.points:
            raise ValidationError("sampled forms disagree on degree or points")

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def is_exactly_zero(self):
        return bool(np.all(self.values == 0))

    def to_json(self):
        return [{"point": [[c.real, c.imag] for c in p],
                 "coefficients": {",".join(map(str, idx)): [v.real, v.imag]
                                  for idx, v in zip(self.indices, row)}}
                for p, row in zip(self.points, self.values)]
