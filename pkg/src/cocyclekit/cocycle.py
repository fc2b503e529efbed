"""Chart simplices and their Chern-Weil Dold-Kan labelings.

A level-l chart simplex is l+1 charts off a common source together with the
transition maps between their images. Applying a GL-invariant map of arity k
labels each k-cell with a holomorphic k-form pulled back to the source; the
alternating face sums of those labels telescope to zero, which is what
verify_telescoping and dk_validate measure.
"""

from .errors import ValidationError
from .forms import (SampledForm, ScalarKForm, apply_invariant, pullback_kform,
                    sharp_pullback, theta)
from .holomap import identity_map
from .simplicial import DKSimplex, ElementOps, GradedComplex

MIN_SAMPLE_WARN = 8


class ChartSimplex:
    """Charts rho_0..rho_l on a common source cloud plus transitions phi[p,q].

    Transitions are scenario-supplied maps V_q -> V_p for p < q; coherence
    (phi[p,q] of rho_q = rho_p on the samples) is checked, never derived by
    inversion.
    """

    def __init__(self, charts, transitions, source_points, coherence_tol=1e-9,
                 validate=True):
        self.charts = list(charts)
        self.level = len(self.charts) - 1
        if self.level < 0:
            raise ValidationError("need at least one chart")
        self.n = self.charts[0].n
        self.source_points = [tuple(p) for p in source_points]
        self.transitions = {}
        for (p, q), m in transitions.items():
            if not 0 <= p < q <= self.level:
                raise ValidationError("bad transition key (%d, %d)" % (p, q))
            self.transitions[(p, q)] = m
        for p in range(self.level + 1):
            for q in range(p + 1, self.level + 1):
                if (p, q) not in self.transitions:
                    raise ValidationError("missing transition (%d, %d)" % (p, q))
        self.coherence_tol = coherence_tol
        if validate:
            self.validate()

    def transition(self, p, q):
        """phi[p,q]: V_q -> V_p; the diagonal is the identity."""
        if p == q:
            return identity_map(self.n)
        return self.transitions[(p, q)]

    def validate(self, tol=None):
        """Check every transition reproduces the chart relation on the samples."""
        tol = tol if tol is not None else self.coherence_tol
        worst = 0.0
        for (p, q), phi in self.transitions.items():
            for w in self.source_points:
                lhs = phi.eval(self.charts[q].eval(w))
                rhs = self.charts[p].eval(w)
                worst = max(worst, max(abs(a - b) for a, b in zip(lhs, rhs)))
        if worst > tol:
            raise ValidationError(
                "chart simplex incoherent: max deviation %.3e > %.1e" % (worst, tol))
        return worst

    def sub_simplex(self, indices):
        """Face chart simplex over a strictly increasing index subset."""
        indices = tuple(indices)
        if list(indices) != sorted(set(indices)):
            raise ValidationError("indices must be strictly increasing")
        charts = [self.charts[i] for i in indices]
        trans = {}
        for a in range(len(indices)):
            for b in range(a + 1, len(indices)):
                trans[(a, b)] = self.transition(indices[a], indices[b])
        return ChartSimplex(charts, trans, self.source_points,
                            coherence_tol=self.coherence_tol, validate=False)

    def top_chart_samples(self):
        return [self.charts[-1].eval(w) for w in self.source_points]


def theta_r(s, r):
    """Pull theta of the (r-1, r) transition back to the top image via phi[r, l]."""
    if not 1 <= r <= s.level:
        raise ValidationError("r must be in 1..%d" % s.level)
    base = theta(s.transition(r - 1, r))
    if r == s.level:
        return base
    return sharp_pullback(s.transition(r, s.level), base)


def cf_label_top(s, T):
    """Top-cell label: the invariant applied to theta_1..theta_k, pulled back to the source."""
    k = T.arity
    if s.level != k:
        raise ValidationError("level %d does not match arity %d" % (s.level, k))
    if k > s.n:
        return ScalarKForm.zero(s.n, k)
    thetas = [theta_r(s, r) for r in range(1, k + 1)]
    kform = apply_invariant(T, thetas)
    return pullback_kform(s.charts[-1], kform)


def cf_map(s, T, sample_points=None):
    """Dold-Kan labeling of a chart simplex: k-cells get face labels, the rest zero."""
    k = T.arity
    points = [tuple(p) for p in (sample_points or s.source_points)]
    labels = {}
    for l in range(1, s.level + 1):
        for cell in _increasing_cells(s.level, l):
            if l == k and s.level >= k:
                form = cf_label_top(s.sub_simplex(cell), T)
                labels[cell] = SampledForm.sample(form, points)
            else:
                labels[cell] = SampledForm.zeros(s.n, min(l, s.n), points)
    for i in range(s.level + 1):
        labels[(i,)] = SampledForm.zeros(s.n, 0, points)
    return DKSimplex(s.level, labels)


def _increasing_cells(dim, length_minus_one):
    import itertools
    return list(itertools.combinations(range(dim + 1), length_minus_one + 1))


def shifted_form_complex(n, k, points):
    """The complex holding a single holomorphic k-form degree at -k, zero elsewhere.

    Elements are SampledForms on a fixed cloud; the differential is the zero
    map, so the DK condition reduces to vanishing alternating face sums.
    """
    points = [tuple(p) for p in points]

    def degree_k(degree):
        return min(-degree, n) if degree != -k else k

    ops = ElementOps(
        add=lambda x, y: x.add(y),
        scale=lambda a, x: x.scale(a),
        norm=lambda x: x.max_abs(),
        zero=lambda degree: SampledForm.zeros(n, degree_k(degree), points),
    )

    def diff(degree, x):
        return ops.zero(degree + 1)

    return GradedComplex(range(-max(k, 1), 1), diff, ops)


def verify_telescoping(s, T, points=None, tol=1e-7):
    """Directly evaluate the alternating face sum of cf labels on a level-(k+1) simplex.

    Every face label is built from the supplied transitions, so an incoherent
    transition shows up as a residual above tolerance.
    """
    k = T.arity
    if s.level != k + 1:
        raise ValidationError("need a level-%d simplex for arity %d" % (k + 1, k))
    points = [tuple(p) for p in (points or s.source_points)]
    if len(points) < MIN_SAMPLE_WARN:
        import warnings
        warnings.warn("only %d sample points supplied; pointwise verification is weak"
                      % len(points))
    acc = ScalarKForm.zero(s.n, k)
    for j in range(k + 2):
        cell = tuple(i for i in range(k + 2) if i != j)
        label = cf_label_top(s.sub_simplex(cell), T)
        acc = acc + label.scale((-1) ** j)
    per_point = []
    for p in points:
        vals = acc.eval(p)
        worst_idx = max(vals, key=lambda idx: abs(vals[idx])) if vals else None
        per_point.append({"point": [[c.real, c.imag] for c in p],
                          "residual": max((abs(v) for v in vals.values()), default=0.0),
                          "worst_index": list(worst_idx) if worst_idx else None})
    max_res = max((e["residual"] for e in per_point), default=0.0)
    return {
        "max_residual": max_res,
        "pass": max_res <= tol,
        "tolerance": tol,
        "points": per_point,
    }
