"""Mixed Cech/group cochains of holomorphic forms and the tau invariant.

Cells are pairs (Cech multi-index, tuple of group words); the value on a cell
is a pointwise k-form on the sample cloud of the translated intersection.
Differentials act on formal signed combinations of pulled-back base values, so
the pairwise cancellations behind delta^2 = 0 and the bar identities happen
symbolically before any floating-point addition.

The tau invariant of an equivariant atlas assigns to each total-degree-n cell
a signed sum over the (m,q)-shuffles of grid paths, each path contributing the
top Chern-Weil label of its chart simplex. Pure Cech cells and pure group
cells reduce to the single interleaved simplex.
"""

import itertools

import numpy as np

from .cocycle import ChartSimplex, cf_label_top
from .errors import ValidationError
from .forms import SampledForm, ScalarKForm, pullback_kform
from .holomap import MapChain, compose, identity_map

# ---------------------------------------------------------------------------
# free words over named generators


class Word:
    """Reduced free word; letters are (generator name, +1 or -1)."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        self.letters = self._reduce(tuple(letters))

    @staticmethod
    def _reduce(letters):
        out = []
        for name, sgn in letters:
            if sgn not in (1, -1):
                raise ValidationError("letter sign must be +1 or -1")
            if out and out[-1][0] == name and out[-1][1] == -sgn:
                out.pop()
            else:
                out.append((name, sgn))
        return tuple(out)

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inverse(self):
        return Word(tuple((name, -sgn) for name, sgn in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __lt__(self, other):
        return self.letters < other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        if not self.letters:
            return "e"
        return "*".join(name + ("" if sgn > 0 else "^-1") for name, sgn in self.letters)

    @classmethod
    def gen(cls, name, sgn=1):
        return cls(((name, sgn),))

    @classmethod
    def product(cls, words):
        w = cls()
        for x in words:
            w = w * x
        return w


IDENTITY_WORD = Word()


# ---------------------------------------------------------------------------
# cover, action, atlas


class CoverSpec:
    """Index set plus sample clouds per multi-index set.

    Clouds are keyed by the set of indices; the constructor appends every deep
    intersection's points to all enclosing clouds, so restriction maps are
    literal subset lookups.
    """

    def __init__(self, indices, clouds):
        self.indices = list(indices)
        index_set = set(self.indices)
        self.clouds = {}
        for key, points in clouds.items():
            key = frozenset(key)
            if not key or not key <= index_set:
                raise ValidationError("cloud key %r not within the index set" % (sorted(key),))
            self.clouds[key] = [tuple(complex(c) for c in p) for p in points]
        self._nest()

    def _nest(self):
        for key in sorted(self.clouds, key=len, reverse=True):
            for other in self.clouds:
                if other < key:
                    have = set(self.clouds[other])
                    for p in self.clouds[key]:
                        if p not in have:
                            self.clouds[other].append(p)
                            have.add(p)

    def cloud(self, multi_index):
        """Sample cloud of the intersection over a tuple (repeats collapse)."""
        key = frozenset(multi_index)
        return self.clouds.get(key, [])

    def declared_sets(self):
        return sorted(self.clouds, key=lambda s: (len(s), sorted(map(str, s))))


class GroupActionSpec:
    """Named generators with inverses, plus the right action on cover indices."""

    def __init__(self, generators, index_action, indices, words=()):
        self.generators = dict(generators)  # name -> (forward HoloMap, inverse HoloMap)
        self.indices = list(indices)
        self.n = self.generators[next(iter(self.generators))][0].n if self.generators else None
        self.index_action = {}
        for name in self.generators:
            table = dict(index_action.get(name, {}))
            missing = [i for i in self.indices if i not in table]
            if missing:
                raise ValidationError("index action for %r missing %r" % (name, missing))
            if sorted(map(str, table.values())) != sorted(map(str, self.indices)):
                raise ValidationError("index action for %r is not a bijection" % name)
            self.index_action[name] = table
        self._inverse_action = {
            name: {v: k for k, v in table.items()}
            for name, table in self.index_action.items()
        }
        self.words = [w if isinstance(w, Word) else Word.gen(w) for w in words]
        self._word_maps = {}

    def letter_map(self, name, sgn):
        fwd, inv = self.generators[name]
        return fwd if sgn > 0 else inv

    def act_index(self, index, word):
        for name, sgn in word.letters:
            table = self.index_action[name] if sgn > 0 else self._inverse_action[name]
            index = table[index]
        return index

    def word_map(self, word, n=None):
        """rho(word) as one symbolically composed HoloMap (memoized)."""
        if word not in self._word_maps:
            if word.is_identity():
                m = identity_map(n or self.n)
            else:
                m = self.letter_map(*word.letters[-1])
                for name, sgn in reversed(word.letters[:-1]):
                    m = compose(self.letter_map(name, sgn), m, check=False)
            self._word_maps[word] = m
        return self._word_maps[word]

    def word_chain(self, word, n=None):
        """rho(word) as a pointwise chain (for pullbacks of sampled values)."""
        if word.is_identity():
            return MapChain([identity_map(n or self.n)], name=repr(word))
        return MapChain([self.letter_map(name, sgn) for name, sgn in word.letters],
                        name=repr(word))

    def validate(self, cover, tol=1e-10):
        """Generator/inverse round trips on every base cloud."""
        worst = 0.0
        for name, (fwd, inv) in self.generators.items():
            for key in cover.declared_sets():
                for p in cover.clouds[key]:
                    q = fwd.eval(inv.eval(p))
                    worst = max(worst, max(abs(a - b) for a, b in zip(q, p)))
                    q = inv.eval(fwd.eval(p))
                    worst = max(worst, max(abs(a - b) for a, b in zip(q, p)))
        if worst > tol:
            raise ValidationError(
                "generator/inverse round trip off by %.3e > %.1e" % (worst, tol))
        return worst


def trivial_action(indices, n):
    """Action of the trivial group: no generators, no index motion."""
    spec = GroupActionSpec.__new__(GroupActionSpec)
    spec.generators = {}
    spec.indices = list(indices)
    spec.n = n
    spec.index_action = {}
    spec._inverse_action = {}
    spec.words = []
    spec._word_maps = {}
    return spec


class Atlas:
    """Charts (with explicit inverses) per cover index."""

    def __init__(self, charts):
        self.charts = {}
        for index, pair in charts.items():
            chart, inverse = pair
            self.charts[index] = (chart, inverse)

    def chart(self, index):
        return self.charts[index][0]

    def inverse(self, index):
        return self.charts[index][1]

    def indices(self):
        return list(self.charts)

    def validate(self, cover, tol=1e-9):
        """Chart/inverse round trip on the index's own cloud."""
        worst = 0.0
        for index in self.charts:
            chart, inverse = self.charts[index]
            for p in cover.cloud((index,)):
                q = inverse.eval(chart.eval(p))
                worst = max(worst, max(abs(a - b) for a, b in zip(q, p)))
        if worst > tol:
            raise ValidationError("atlas chart/inverse round trip off by %.3e" % worst)
        return worst


# ---------------------------------------------------------------------------
# cochains as formal combinations of pulled-back base values


def cell_multi_index(action, J, G):
    """Translated index tuple of the cell (J, G): each index moved by the full word."""
    w = Word.product(G)
    return tuple(action.act_index(i, w) for i in J)


class MixedCochain:
    """Base cochain: per-bidegree providers of pointwise k-forms on cells."""

    def __init__(self, cover, action, n, form_degree, components, name="cochain"):
        self.cover = cover
        self.action = action
        self.n = int(n)
        self.form_degree = int(form_degree)
        self.components = {}
        for (m, q), provider in components.items():
            if m < 0 or q < 0:
                raise ValidationError("bad bidegree (%d, %d)" % (m, q))
            self.components[(int(m), int(q))] = provider
        self.name = name
        self._cache = {}

    def bidegrees(self):
        return sorted(self.components)

    def total_degrees(self):
        return sorted({m + q for m, q in self.components})

    def base_value(self, bidegree, J, G):
        key = (bidegree, tuple(J), tuple(G))
        if key not in self._cache:
            provider = self.components.get(bidegree)
            if provider is None:
                raise ValidationError("no component in bidegree %r" % (bidegree,))
            self._cache[key] = _cached_form(provider(tuple(J), tuple(G)))
        return self._cache[key]

    def cell_points(self, J, G):
        return self.cover.cloud(cell_multi_index(self.action, J, G))

    def sample(self, bidegree, J, G):
        return SampledForm.sample(self.base_value(bidegree, J, G),
                                  self.cell_points(J, G))

    def expression(self):
        return CochainExpression(self, {bd: _identity_terms(bd) for bd in self.components})


def _identity_terms(bd):
    def at(J, G):
        return {(bd, tuple(J), tuple(G), IDENTITY_WORD): 1}
    return at


def _cached_form(form):
    if form.structurally_zero:
        return form
    cache = {}

    def ev(point):
        if point not in cache:
            cache[point] = form.eval(point)
        return cache[point]

    return ScalarKForm(form.n, form.k, ev, provenance=form.provenance)


class CochainExpression:
    """Formal integer combination of base-cochain values pulled back along words.

    A term key is (base bidegree, base J, base G, pullback word); differentials
    only rewrite keys, so equal keys with opposite signs cancel exactly and
    never reach floating point.
    """

    def __init__(self, base, comp_terms):
        self.base = base
        self.comp_terms = dict(comp_terms)

    def bidegrees(self):
        return sorted(self.comp_terms)

    def terms(self, bidegree, J, G):
        fn = self.comp_terms.get(bidegree)
        if fn is None:
            return {}
        out = {}
        for key, coeff in fn(tuple(J), tuple(G)).items():
            out[key] = out.get(key, 0) + coeff
        return {k: c for k, c in out.items() if c}

    def value(self, bidegree, J, G):
        """Assemble the pointwise form for one cell."""
        acc = ScalarKForm.zero(self.base.n, self.base.form_degree)
        for (bd, Jb, Gb, pull), coeff in sorted(self.terms(bidegree, J, G).items(),
                                                key=lambda kv: repr(kv[0])):
            val = self.base.base_value(bd, Jb, Gb)
            if not pull.is_identity():
                val = pullback_kform(self.base.action.word_chain(pull, self.base.n), val)
            acc = acc + val.scale(coeff)
        return acc

    def sample(self, bidegree, J, G):
        return SampledForm.sample(self.value(bidegree, J, G),
                                  self.base.cell_points(J, G))

    def max_residual(self, bidegree, J, G):
        points = self.base.cell_points(J, G)
        if not points:
            return None
        return self.sample(bidegree, J, G).max_abs()

    def worst_point(self, bidegree, J, G):
        """(point, residual) where the cell's residual peaks; None when empty."""
        points = self.base.cell_points(J, G)
        if not points:
            return None
        sampled = self.sample(bidegree, J, G)
        per_point = np.max(np.abs(sampled.values), axis=1) if sampled.values.size \
            else np.zeros(len(points))
        i = int(np.argmax(per_point))
        return points[i], float(per_point[i])

    def scale(self, a):
        a = int(a)
        out = {}
        for bd, fn in self.comp_terms.items():
            def scaled(J, G, fn=fn):
                return {k: a * c for k, c in fn(J, G).items()}
            out[bd] = scaled
        return CochainExpression(self.base, out)

    def __add__(self, other):
        if other.base is not self.base:
            raise ValidationError("expressions over different base cochains")
        out = {}
        for bd in set(self.comp_terms) | set(other.comp_terms):
            def summed(J, G, bd=bd):
                merged = dict(self.terms(bd, J, G))
                for k, c in other.terms(bd, J, G).items():
                    merged[k] = merged.get(k, 0) + c
                return merged
            out[bd] = summed
        return CochainExpression(self.base, out)

    def __sub__(self, other):
        return self + other.scale(-1)


def as_expression(c):
    return c.expression() if isinstance(c, MixedCochain) else c


def cech_differential(c):
    """Alternating sum over dropped Cech indices; restrictions are literal."""
    c = as_expression(c)
    out = {}
    for (m, q) in c.bidegrees():
        def face_terms(J, G, m=m, q=q):
            if len(J) != m + 2 or len(G) != q:
                raise ValidationError("cell shape mismatch for bidegree (%d, %d)" % (m + 1, q))
            merged = {}
            for k in range(m + 2):
                sub = J[:k] + J[k + 1:]
                sign = (-1) ** k
                for key, coeff in c.terms((m, q), sub, G).items():
                    merged[key] = merged.get(key, 0) + sign * coeff
            return {k: v for k, v in merged.items() if v}
        out[(m + 1, q)] = _merge_component(out.get((m + 1, q)), face_terms)
    return CochainExpression(c.base, out)


def group_differential(c):
    """Bar differential: drop-and-translate, merge adjacent letters, act on the last."""
    c = as_expression(c)
    action = c.base.action
    out = {}
    for (m, q) in c.bidegrees():
        def face_terms(J, G, m=m, q=q):
            if len(J) != m + 1 or len(G) != q + 1:
                raise ValidationError("cell shape mismatch for bidegree (%d, %d)" % (m, q + 1))
            merged = {}

            def absorb(terms, sign):
                for key, coeff in terms.items():
                    merged[key] = merged.get(key, 0) + sign * coeff

            g1 = G[0]
            J_translated = tuple(action.act_index(i, g1) for i in J)
            absorb(c.terms((m, q), J_translated, G[1:]), 1)
            for k in range(1, q + 1):
                G_merged = G[:k - 1] + (G[k - 1] * G[k],) + G[k + 1:]
                absorb(c.terms((m, q), J, G_merged), (-1) ** k)
            last = G[-1]
            pulled = {}
            for (bd, Jb, Gb, pull), coeff in c.terms((m, q), J, G[:-1]).items():
                key = (bd, Jb, Gb, pull * last)
                pulled[key] = pulled.get(key, 0) + coeff
            absorb(pulled, (-1) ** (q + 1))
            return {k: v for k, v in merged.items() if v}
        out[(m, q + 1)] = _merge_component(out.get((m, q + 1)), face_terms)
    return CochainExpression(c.base, out)


def _merge_component(existing, fn):
    if existing is None:
        return fn

    def merged(J, G):
        a = dict(existing(J, G))
        for k, c in fn(J, G).items():
            a[k] = a.get(k, 0) + c
        return a

    return merged


def mixed_differential(c):
    """Total differential: cech + (-1)^{cech degree} * group."""
    c = as_expression(c)
    out = dict(cech_differential(c).comp_terms)
    grp = group_differential(c)
    for (m, q1) in grp.bidegrees():
        def signed(J, G, m=m, q1=q1):
            sign = (-1) ** m
            return {k: sign * v for k, v in grp.terms((m, q1), J, G).items()}
        out[(m, q1)] = _merge_component(out.get((m, q1)), signed)
    return CochainExpression(c.base, out)


# ---------------------------------------------------------------------------
# the tau invariant and the cohomologous witness


# step kinds, ordered: edge < Cech < group. The order fixes the shuffle signs.
E_STEP, C_STEP, G_STEP = 0, 1, 2


def _shuffles(step_types):
    """Distinct orderings of the step multiset with their inversion signs.

    An inversion is a later-kind step occurring before an earlier-kind one
    under the E < C < G order.
    """
    counts = {}
    for t in step_types:
        counts[t] = counts.get(t, 0) + 1
    kinds = sorted(counts)
    total = sum(counts.values())

    def rec(seq, remaining):
        if len(seq) == total:
            yield tuple(seq)
            return
        for kind in kinds:
            if remaining.get(kind, 0) > 0:
                remaining[kind] -= 1
                seq.append(kind)
                yield from rec(seq, remaining)
                seq.pop()
                remaining[kind] += 1

    for seq in rec([], dict(counts)):
        inv = 0
        for i in range(len(seq)):
            for j in range(i + 1, len(seq)):
                if seq[i] > seq[j]:
                    inv += 1
        yield seq, (-1) ** inv


class PathLabeler:
    """Builds chart simplices for grid paths through a cell and labels them.

    Vertices carry (atlas layer, cover index, remaining word tail); transitions
    between two vertices compose chart, word map and inverse chart
    symbolically, with an identity shortcut when nothing moves.
    """

    def __init__(self, cover, action, atlases, T, coherence_tol=1e-9):
        self.cover = cover
        self.action = action
        self.atlases = list(atlases)
        self.T = T
        self.coherence_tol = coherence_tol
        self.n = atlases[0].chart(atlases[0].indices()[0]).n
        self._transitions = {}
        self._tails = {}

    def _tail_word(self, G, s):
        key = (tuple(G), s)
        if key not in self._tails:
            self._tails[key] = Word.product(G[s:])
        return self._tails[key]

    def vertex(self, layer, J, G, r, s):
        """(atlas layer, translated index, word tail) for grid state (r, s)."""
        head = Word.product(G[:s])
        index = self.action.act_index(J[r], head)
        return (layer, index, self._tail_word(G, s))

    def chart_for(self, vertex):
        layer, index, tail = vertex
        chart = self.atlases[layer].chart(index)
        if tail.is_identity():
            return MapChain([chart], name="%s" % (getattr(chart, "name", "chart"),))
        pieces = [chart] + [self.action.letter_map(name, sgn) for name, sgn in tail.letters]
        return MapChain(pieces)

    def transition(self, va, vb):
        """Map V_b -> V_a between the images of two vertex charts."""
        key = (va, vb)
        if key not in self._transitions:
            layer_a, ia, ta = va
            layer_b, ib, tb = vb
            w = ta * tb.inverse()
            if layer_a == layer_b and ia == ib and w.is_identity():
                self._transitions[key] = identity_map(self.n)
            else:
                inner = self.atlases[layer_b].inverse(ib)
                if not w.is_identity():
                    inner = compose(self.action.word_map(w, self.n), inner, check=False)
                self._transitions[key] = compose(self.atlases[layer_a].chart(ia), inner,
                                                 check=False)
        return self._transitions[key]

    def label_path(self, vertices, points):
        charts = [self.chart_for(v) for v in vertices]
        transitions = {}
        for a in range(len(vertices)):
            for b in range(a + 1, len(vertices)):
                transitions[(a, b)] = self.transition(vertices[a], vertices[b])
        simplex = ChartSimplex(charts, transitions, points,
                               coherence_tol=self.coherence_tol, validate=False)
        return cf_label_top(simplex, self.T)

    def cell_form(self, J, G, step_types):
        """Signed shuffle sum of path labels for one cell."""
        points = self.cover.cloud(cell_multi_index(self.action, J, G))
        acc = ScalarKForm.zero(self.n, self.T.arity)
        for seq, sign in _shuffles(step_types):
            layer, r, s = 0, 0, 0
            vertices = [self.vertex(layer, J, G, r, s)]
            for kind in seq:
                if kind == E_STEP:
                    layer = 1
                elif kind == C_STEP:
                    r += 1
                else:
                    s += 1
                vertices.append(self.vertex(layer, J, G, r, s))
            label = self.label_path(vertices, points)
            acc = acc + label.scale(sign)
        return acc


def tau_invariant(cover, action, atlas, T, coherence_tol=1e-9, verify_tol=None):
    """The total-degree-n cocycle of an equivariant atlas under the invariant T.

    With verify_tol set, the mixed differential is checked over the action's
    declared words before returning; a residual above tolerance raises.
    """
    n_total = T.arity
    labeler = PathLabeler(cover, action, [atlas], T, coherence_tol)
    components = {}
    for m in range(n_total + 1):
        q = n_total - m
        if q > 0 and not action.generators:
            continue

        def provider(J, G, m=m, q=q):
            if len(J) != m + 1 or len(G) != q:
                raise ValidationError("cell shape mismatch in bidegree (%d, %d)" % (m, q))
            return labeler.cell_form(J, G, (C_STEP,) * m + (G_STEP,) * q)

        components[(m, q)] = provider
    tau = MixedCochain(cover, action, labeler.n, n_total, components, name="tau")
    if verify_tol is not None:
        report = closedness_report(tau, tol=verify_tol)
        if not report["pass"]:
            raise ValidationError("tau is not closed: residual %.3e > %.1e"
                                  % (report["max_residual"], verify_tol))
    return tau


def cohomologous_witness(cover, action, atlas_a, atlas_b, T, coherence_tol=1e-9):
    """Degree-(n-1) cochain whose mixed differential is tau(atlas_a) - tau(atlas_b).

    The edge direction enters as one extra step, placed before the Cech and
    group steps in the shuffle ordering; layer 0 holds atlas_b (the vertex
    whose cocycle is subtracted), layer 1 atlas_a.
    """
    n_total = T.arity
    labeler = PathLabeler(cover, action, [atlas_b, atlas_a], T, coherence_tol)
    components = {}
    for m in range(n_total):
        q = n_total - 1 - m
        if q > 0 and not action.generators:
            continue

        def provider(J, G, m=m, q=q):
            if len(J) != m + 1 or len(G) != q:
                raise ValidationError("cell shape mismatch in bidegree (%d, %d)" % (m, q))
            return labeler.cell_form(J, G, (E_STEP,) + (C_STEP,) * m + (G_STEP,) * q)

        components[(m, q)] = provider
    return MixedCochain(cover, action, labeler.n, n_total, components, name="witness")


# ---------------------------------------------------------------------------
# residual reports


def enumerate_cells(cover, action, m, q, words=None, index_tuples=None):
    """All (J, G) cells of a bidegree with a nonempty translated cloud."""
    words = list(words if words is not None else action.words)
    if index_tuples is None:
        index_tuples = itertools.product(cover.indices, repeat=m + 1)
    for J in index_tuples:
        for G in itertools.product(words, repeat=q):
            if cover.cloud(cell_multi_index(action, J, G)):
                yield tuple(J), tuple(G)


def closedness_report(cochain, tol=1e-7, words=None):
    """Max residual of the mixed differential over all next-degree cells."""
    expr = mixed_differential(cochain)
    base = as_expression(cochain).base
    cover, action = base.cover, base.action
    rows = []
    worst = 0.0
    for (m, q) in expr.bidegrees():
        for J, G in enumerate_cells(cover, action, m, q, words=words):
            hit = expr.worst_point((m, q), J, G)
            if hit is None:
                continue
            point, res = hit
            rows.append({"bidegree": [m, q], "indices": list(map(str, J)),
                         "words": [repr(w) for w in G], "residual": res,
                         "worst_point": [[c.real, c.imag] for c in point]})
            worst = max(worst, res)
    rows.sort(key=lambda r: -r["residual"])
    return {
        "max_residual": worst,
        "pass": worst <= tol,
        "tolerance": tol,
        "sign_convention": "cech + (-1)^m group",
        "cells": rows,
    }


def witness_report(witness, tau_a, tau_b, tol=1e-7, words=None):
    """Residual of d(witness) - (tau_a - tau_b) over all degree-n cells."""
    diff = mixed_differential(witness)
    base = as_expression(witness).base
    cover, action = base.cover, base.action
    rows = []
    worst = 0.0
    for (m, q) in sorted(set(diff.bidegrees())
                         | set(tau_a.bidegrees()) | set(tau_b.bidegrees())):
        for J, G in enumerate_cells(cover, action, m, q, words=words):
            points = cover.cloud(cell_multi_index(action, J, G))
            if not points:
                continue
            got = diff.value((m, q), J, G)
            want = tau_a.base_value((m, q), J, G) - tau_b.base_value((m, q), J, G)
            res = SampledForm.sample(got - want, points).max_abs()
            rows.append({"bidegree": [m, q], "indices": list(map(str, J)),
                         "words": [repr(w) for w in G], "residual": res})
            worst = max(worst, res)
    rows.sort(key=lambda r: -r["residual"])
    return {
        "max_residual": worst,
        "pass": worst <= tol,
        "tolerance": tol,
        "sign_convention": "cech + (-1)^m group",
        "cells": rows,
    }
