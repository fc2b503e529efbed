"""Scenario files: JSON descriptions of covers, actions, atlases and checks.

Complex numbers are [re, im] pairs; rationals are decimal strings like "3/10";
every cross-reference (map names, cover indices, generator names) is resolved
at load time with errors naming the offending symbol.
"""

import hashlib
import json
import warnings
from fractions import Fraction

from . import holomap
from .cechgroup import Atlas, CoverSpec, GroupActionSpec, Word, trivial_action
from .cocycle import MIN_SAMPLE_WARN, ChartSimplex
from .errors import DslSyntaxError, ScenarioError, ValidationError
from .expr import CRat

KNOWN_CHECKS = ("affine-vanishing", "tau-closedness", "witness", "telescoping",
                "dk-validate", "theta-composition", "bm-dbar", "bm-reproducing")


def _rational(s, location):
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError):
        raise ScenarioError("bad rational %r" % (s,), location) from None


def _point(obj, n, location):
    if not isinstance(obj, list) or len(obj) != n:
        raise ScenarioError("point must have %d [re, im] coordinates" % n, location)
    out = []
    for c in obj:
        if not isinstance(c, list) or len(c) != 2:
            raise ScenarioError("coordinate must be an [re, im] pair", location)
        out.append(complex(float(c[0]), float(c[1])))
    return tuple(out)


class Scenario:
    """Validated scenario: named maps, cover, action, atlases and a check list."""

    def __init__(self, data, source_bytes=b""):
        self.data = data
        self.hash = hashlib.sha256(source_bytes).hexdigest()
        if "dimension" not in data:
            raise ScenarioError("missing 'dimension'")
        self.n = int(data["dimension"])
        if self.n < 1:
            raise ScenarioError("dimension must be >= 1")
        self.constants = self._load_constants(data.get("constants", {}))
        self.maps = self._load_maps(data.get("maps", {}))
        self.cover = self._load_cover(data.get("cover"))
        self.action = self._load_action(data.get("action"))
        self.atlas = self._load_atlas(data.get("atlas"), "atlas")
        self.atlas_b = self._load_atlas(data.get("atlas_b"), "atlas_b")
        self.checks = self._load_checks(data.get("checks", []))
        self.output = data.get("output")

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            raw = fh.read()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as err:
            raise ScenarioError("not valid JSON: %s" % err, str(path)) from None
        return cls(data, raw)

    def _load_constants(self, section):
        out = {}
        for name, spec in section.items():
            loc = "constants/%s" % name
            if not isinstance(spec, dict) or "re" not in spec:
                raise ScenarioError("constant needs {re, im} rational strings", loc)
            out[name] = CRat(_rational(spec["re"], loc), _rational(spec.get("im", 0), loc))
        return out

    def _load_maps(self, section):
        out = {}
        for name, spec in section.items():
            loc = "maps/%s" % name
            if not isinstance(spec, dict) or "components" not in spec:
                raise ScenarioError("map needs a 'components' string", loc)
            try:
                out[name] = holomap.parse_map(spec["components"], self.n,
                                              constants=self.constants, name=name)
            except DslSyntaxError as err:
                raise ScenarioError("syntax error in components: %s" % err, loc) from None
            except ValidationError as err:
                raise ScenarioError(str(err), loc) from None
        return out

    def map_named(self, name, location):
        if name not in self.maps:
            raise ScenarioError("undefined map %r" % name, location)
        return self.maps[name]

    def _load_cover(self, section):
        if section is None:
            return None
        loc = "cover"
        indices = section.get("indices")
        if not indices:
            raise ScenarioError("cover needs a nonempty 'indices' list", loc)
        clouds = {}
        for entry in section.get("clouds", []):
            on = entry.get("on")
            if not on:
                raise ScenarioError("cloud needs an 'on' index list", loc)
            for i in on:
                if i not in indices:
                    raise ScenarioError("cloud over unknown index %r" % i, loc)
            pts = [_point(p, self.n, loc) for p in entry.get("points", [])]
            clouds[frozenset(on)] = clouds.get(frozenset(on), []) + pts
        cover = CoverSpec(indices, clouds)
        thin = [sorted(map(str, key)) for key, pts in cover.clouds.items()
                if len(pts) < MIN_SAMPLE_WARN]
        if thin:
            warnings.warn("clouds with fewer than %d sample points weaken the "
                          "pointwise checks: %s" % (MIN_SAMPLE_WARN, thin))
        return cover

    def _load_action(self, section):
        if self.cover is None:
            return None
        if section is None or not section.get("generators"):
            return trivial_action(self.cover.indices, self.n)
        loc = "action"
        generators = {}
        index_action = {}
        for gen in section["generators"]:
            name = gen.get("name")
            if not name:
                raise ScenarioError("generator needs a name", loc)
            gloc = "action/%s" % name
            fwd = self.map_named(gen.get("map", ""), gloc)
            inv = self.map_named(gen.get("inverse", ""), gloc)
            table = gen.get("index_action", {})
            generators[name] = (fwd, inv)
            index_action[name] = table
        words = [parse_word(w, generators, loc) for w in section.get("words", [])]
        try:
            action = GroupActionSpec(generators, index_action, self.cover.indices,
                                     words=words)
        except ValidationError as err:
            raise ScenarioError(str(err), loc) from None
        action.validate(self.cover)
        return action

    def _load_atlas(self, section, key):
        if section is None or self.cover is None:
            return None
        charts = {}
        for index in self.cover.indices:
            if index not in section:
                raise ScenarioError("missing chart for index %r" % index, key)
            entry = section[index]
            loc = "%s/%s" % (key, index)
            chart = self.map_named(entry.get("chart", ""), loc)
            inverse = self.map_named(entry.get("inverse", ""), loc)
            charts[index] = (chart, inverse)
        atlas = Atlas(charts)
        atlas.validate(self.cover)
        return atlas

    def _load_checks(self, section):
        checks = []
        seen = set()
        for k, entry in enumerate(section):
            loc = "checks[%d]" % k
            ctype = entry.get("type")
            if ctype not in KNOWN_CHECKS:
                raise ScenarioError("unknown check type %r" % ctype, loc)
            name = entry.get("name", "%s-%d" % (ctype, k))
            if name in seen:
                raise ScenarioError("duplicate check name %r" % name, loc)
            seen.add(name)
            tol = entry.get("tolerance", 1e-7)
            if not (isinstance(tol, (int, float)) and tol > 0):
                raise ScenarioError("tolerance must be positive", loc)
            self._validate_check_refs(ctype, entry, loc)
            checks.append(dict(entry, name=name, tolerance=tol))
        return checks

    def _validate_check_refs(self, ctype, entry, loc):
        if ctype in ("affine-vanishing", "tau-closedness"):
            if self.cover is None or self.atlas is None:
                raise ScenarioError("%s needs cover and atlas sections" % ctype, loc)
        if ctype == "witness":
            if self.atlas is None or self.atlas_b is None:
                raise ScenarioError("witness needs atlas and atlas_b", loc)
        if ctype in ("telescoping", "dk-validate"):
            for chart in entry.get("charts", []):
                self.map_named(chart.get("chart", ""), loc)
                self.map_named(chart.get("inverse", ""), loc)
            corrupt = entry.get("corrupt")
            if corrupt:
                self.map_named(corrupt.get("with_map", ""), loc)
        if ctype == "theta-composition":
            for pair in entry.get("pairs", []):
                for name in pair:
                    self.map_named(name, loc)

    def chart_simplex(self, entry, loc="check"):
        """Build the chart simplex a telescoping/dk check describes."""
        charts = []
        inverses = []
        for spec in entry.get("charts", []):
            charts.append(self.map_named(spec["chart"], loc))
            inverses.append(self.map_named(spec["inverse"], loc))
        if len(charts) < 2:
            raise ScenarioError("need at least two charts", loc)
        points = [_point(p, self.n, loc) for p in entry.get("source_points", [])]
        if not points:
            raise ScenarioError("need source_points", loc)
        transitions = {}
        for p in range(len(charts)):
            for q in range(p + 1, len(charts)):
                transitions[(p, q)] = holomap.compose(charts[p], inverses[q], check=False)
        corrupt = entry.get("corrupt")
        if corrupt:
            pair = tuple(corrupt["replace"])
            transitions[pair] = self.map_named(corrupt["with_map"], loc)
        return ChartSimplex(charts, transitions, points, validate=False)


def parse_word(tokens, generators, location):
    """["h", "h^-1", ...] -> Word."""
    letters = []
    for tok in tokens:
        if tok.endswith("^-1"):
            name, sgn = tok[:-3], -1
        else:
            name, sgn = tok, 1
        if name not in generators:
            raise ScenarioError("word uses unknown generator %r" % name, location)
        letters.append((name, sgn))
    return Word(letters)
