"""Finite metric samples: representation, axiom checks, generators, ingestion."""

from __future__ import annotations

import bisect
import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from fasrecon.errors import MetricError, ParseError
from fasrecon.scalar import TOL, Scalar, fmt_scalar, is_exact, parse_scalar, ties

PointId = int


@dataclass(frozen=True, eq=False)
class MetricSample:
    """A finite metric space on point ids ``0..n-1``.

    Line samples store coordinates and compute ``|a - b|`` on demand; all
    other samples carry a full distance matrix. ``descriptor`` is a JSON-able
    recipe that rebuilds the sample (see :func:`sample_from_descriptor`).
    """

    labels: tuple[str, ...]
    coords: tuple[Scalar, ...] | None = None
    matrix: tuple[tuple[Scalar, ...], ...] | None = None
    exact: bool = True
    name: str = ""
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.coords is None) == (self.matrix is None):
            raise ValueError("exactly one of coords / matrix must be given")
        n = len(self.coords) if self.coords is not None else len(self.matrix)
        if len(self.labels) != n:
            raise ValueError("one label per point required")

    def __len__(self):
        return len(self.labels)

    @property
    def points(self) -> range:
        return range(len(self.labels))

    def d(self, i: PointId, j: PointId) -> Scalar:
        if self.coords is not None:
            return abs(self.coords[i] - self.coords[j])
        return self.matrix[i][j]

    @property
    def is_line(self) -> bool:
        return self.coords is not None

    @cached_property
    def diameter(self) -> Scalar:
        if len(self) < 2:
            return Fraction(0)
        if self.coords is not None:
            return max(self.coords) - min(self.coords)
        return max(max(row) for row in self.matrix)

    @cached_property
    def min_distance(self) -> Scalar:
        """Smallest positive pairwise distance (0 for a one-point sample)."""
        if len(self) < 2:
            return Fraction(0)
        if self.coords is not None:
            cs = sorted(self.coords)
            return min(b - a for a, b in zip(cs, cs[1:]))
        return min(self.matrix[i][j] for i, j in itertools.combinations(self.points, 2))

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def _coord_index(self) -> dict:
        return {c: i for i, c in enumerate(self.coords)} if self.coords is not None else {}

    def lookup(self, key) -> PointId:
        """Resolve a label, an ``id:<k>`` reference, or a line coordinate."""
        if isinstance(key, int) and not isinstance(key, bool):
            if 0 <= key < len(self):
                return key
            raise KeyError(f"point id {key} out of range")
        s = str(key).strip()
        if s in self._label_index:
            return self._label_index[s]
        if s.startswith("id:"):
            return self.lookup(int(s[3:]))
        if self.coords is not None:
            try:
                value = parse_scalar(s)
            except ValueError:
                value = None
            if value is not None:
                if value in self._coord_index:
                    return self._coord_index[value]
                for i, c in enumerate(self.coords):
                    if ties(c, value) or c == value:
                        return i
        raise KeyError(f"no point {key!r} in sample {self.name or ''}".rstrip())

    def locator(self, points: Sequence[PointId]) -> "_Locator":
        key = tuple(points)
        cache = self.__dict__.setdefault("_locators", {})
        loc = cache.get(key)
        if loc is None:
            if len(cache) > 256:
                cache.clear()
            loc = cache[key] = _Locator(self, key)
        return loc


class _Locator:
    """Nearest-point queries against a fixed subset."""

    def __init__(self, sample: MetricSample, points: tuple[PointId, ...]):
        if not points:
            raise ValueError("nearest-point query against an empty set")
        self.sample = sample
        self.points = points
        if sample.coords is not None:
            pairs = sorted((sample.coords[p], p) for p in points)
            self._keys = [c for c, _ in pairs]
            self._ids = [p for _, p in pairs]

    def nearest(self, x: PointId) -> tuple[Scalar, tuple[PointId, ...]]:
        s = self.sample
        if s.coords is not None:
            cx = s.coords[x]
            pos = bisect.bisect_left(self._keys, cx)
            cand = [k for k in (pos - 1, pos, pos + 1) if 0 <= k < len(self._ids)]
            dists = [(abs(self._keys[k] - cx), self._ids[k]) for k in cand]
        else:
            row = s.matrix[x]
            dists = [(row[p], p) for p in self.points]
        best = min(dd for dd, _ in dists)
        arg = sorted({p for dd, p in dists if ties(dd, best)})
        return best, tuple(arg)

    def ball(self, x: PointId, radius: Scalar) -> tuple[PointId, ...]:
        """Members strictly within ``radius`` of ``x``."""
        s = self.sample
        if s.coords is not None:
            cx = s.coords[x]
            lo = bisect.bisect_right(self._keys, cx - radius)
            hi = bisect.bisect_left(self._keys, cx + radius)
            return tuple(sorted(p for c, p in zip(self._keys[lo:hi], self._ids[lo:hi])
                                if abs(c - cx) < radius))
        return tuple(sorted(p for p in self.points if s.d(x, p) < radius))


# --- axiom checks -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # identity | symmetry | positivity | triangle
    witness: tuple


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"valid": self.valid,
                "violations": [{"kind": v.kind, "witness": list(v.witness)} for v in self.violations]}


@dataclass(frozen=True)
class UltraReport:
    is_ultrametric: bool
    witness: tuple[PointId, PointId, PointId] | None = None

    def to_json(self) -> dict:
        return {"is_ultrametric": self.is_ultrametric,
                "witness": list(self.witness) if self.witness else None}


def _gt(a, b) -> bool:
    """a > b, with float slack."""
    if is_exact(a) and is_exact(b):
        return a > b
    return a > b and not math.isclose(float(a), float(b), rel_tol=TOL, abs_tol=TOL)


def validate_metric(sample: MetricSample) -> ValidationReport:
    """Every axiom violation, with witnesses. Cubic in the sample size."""
    report = ValidationReport()
    n = len(sample)
    d = sample.d
    for i in range(n):
        if d(i, i) != 0:
            report.violations.append(Violation("identity", (i,)))
    for i, j in itertools.combinations(range(n), 2):
        if not ties(d(i, j), d(j, i)) and d(i, j) != d(j, i):
            report.violations.append(Violation("symmetry", (i, j)))
        if not (d(i, j) > 0 and d(j, i) > 0):
            report.violations.append(Violation("positivity", (i, j)))
    for a, c in itertools.permutations(range(n), 2):
        dac = d(a, c)
        for b in range(n):
            if b == a or b == c:
                continue
            if _gt(dac, d(a, b) + d(b, c)):
                report.violations.append(Violation("triangle", (a, b, c)))
    return report


def is_ultrametric(sample: MetricSample) -> UltraReport:
    """Strong triangle inequality check; the witness ``(x, y, z)`` has
    ``d(x, y) > max(d(x, z), d(y, z))``."""
    d = sample.d
    for x, y, z in itertools.combinations(sample.points, 3):
        for a, b, c in ((x, y, z), (x, z, y), (y, z, x)):
            if _gt(d(a, b), max(d(a, c), d(b, c))):
                return UltraReport(False, (a, b, c))
    return UltraReport(True)


# --- set distances ------------------------------------------------------------


def dist_to_set(x: PointId, A: Iterable[PointId], sample: MetricSample):
    """``(d(x, A), all points of A attaining it)``."""
    return sample.locator(tuple(sorted(set(A)))).nearest(x)


def hausdorff_distance(S: Iterable[PointId], T: Iterable[PointId], sample: MetricSample) -> Scalar:
    S, T = tuple(sorted(set(S))), tuple(sorted(set(T)))
    if not S or not T:
        raise ValueError("Hausdorff distance needs nonempty sets")
    ls, lt = sample.locator(S), sample.locator(T)
    return max(max(lt.nearest(s)[0] for s in S), max(ls.nearest(t)[0] for t in T))


def set_diameter(members: Sequence[PointId], sample: MetricSample) -> Scalar:
    if len(members) < 2:
        return Fraction(0)
    if sample.coords is not None:
        cs = [sample.coords[m] for m in members]
        return max(cs) - min(cs)
    return max(sample.d(a, b) for a, b in itertools.combinations(members, 2))


# --- generators ---------------------------------------------------------------


def _line_sample(values, name, descriptor) -> MetricSample:
    values = list(values)
    exact = all(is_exact(v) for v in values)
    if not exact:
        values = [float(v) for v in values]
    return MetricSample(labels=tuple(fmt_label(v) for v in values), coords=tuple(values),
                        exact=exact, name=name, descriptor=descriptor)


def fmt_label(v: Scalar) -> str:
    if is_exact(v):
        v = Fraction(v)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def line_sample(values: Iterable[Scalar], name: str = "line", descriptor: dict | None = None) -> MetricSample:
    """Points on the real line, sorted and deduplicated."""
    vals = sorted(set(values))
    return _line_sample(vals, name, descriptor or {"generator": "line", "points": [fmt_scalar(v) for v in vals]})


def gen_interval_grid(m: int) -> MetricSample:
    if m < 1:
        raise ValueError("m must be positive")
    return _line_sample((Fraction(k, m) for k in range(m + 1)), f"grid({m})",
                        {"generator": "grid", "m": m})


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def gen_padic(p: int, k: int) -> MetricSample:
    """Residues mod ``p**k`` with ``d(a, b) = p**-v(a - b)``."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError("k must be positive")
    n = p ** k
    inv = [Fraction(1, p ** v) for v in range(k + 1)]

    def val(a: int) -> int:
        v = 0
        while a % p == 0 and v < k:
            a //= p
            v += 1
        return v

    by_diff = [Fraction(0)] + [inv[val(t)] for t in range(1, n)]
    matrix = tuple(tuple(by_diff[abs(a - b)] for b in range(n)) for a in range(n))
    return MetricSample(labels=tuple(str(a) for a in range(n)), matrix=matrix, exact=True,
                        name=f"padic({p},{k})", descriptor={"generator": "padic", "p": p, "k": k})


def gen_convergent(N: int) -> MetricSample:
    """``{0} ∪ {1/n : n ≤ N}``; id 0 is the limit point, id n is ``1/n``."""
    if N < 1:
        raise ValueError("N must be positive")
    vals = [Fraction(0)] + [Fraction(1, n) for n in range(1, N + 1)]
    return _line_sample(vals, f"convergent({N})", {"generator": "convergent", "N": N})


def gen_circle(m: int, metric: str = "arc") -> MetricSample:
    """``m`` equispaced points on a circle of circumference 1."""
    if m < 1:
        raise ValueError("m must be positive")
    if metric == "arc":
        by_step = [Fraction(min(s, m - s), m) for s in range(m)]
        exact = True
    elif metric == "chord":
        by_step = [math.sin(math.pi * min(s, m - s) / m) / math.pi for s in range(m)]
        exact = False
    else:
        raise ValueError(f"unknown circle metric {metric!r}")
    matrix = tuple(tuple(by_step[(j - i) % m] for j in range(m)) for i in range(m))
    return MetricSample(labels=tuple(f"{k}/{m}" for k in range(m)), matrix=matrix, exact=exact,
                        name=f"circle({m},{metric})",
                        descriptor={"generator": "circle", "m": m, "metric": metric})


def gen_cantor(depth: int, metric: str = "line") -> MetricSample:
    """Left endpoints of the depth-``depth`` Cantor intervals.

    ``metric="line"`` uses ``|a - b|``; ``metric="ultrametric"`` uses
    ``2**-i`` with ``i`` the first (1-based) differing ternary digit.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    words = ["".join("2" if bit == "1" else "0" for bit in format(b, f"0{depth}b"))
             for b in range(2 ** depth)]
    desc = {"generator": "cantor", "depth": depth, "metric": metric}
    if metric == "line":
        vals = [sum(Fraction(int(ch), 3 ** (i + 1)) for i, ch in enumerate(w)) for w in words]
        s = _line_sample(vals, f"cantor({depth})", desc)
        return MetricSample(labels=tuple(words), coords=s.coords, exact=True, name=s.name, descriptor=desc)
    if metric == "ultrametric":
        return _digit_ultrametric(words, 2, f"cantor({depth},ultra)", desc)
    raise ValueError(f"unknown cantor metric {metric!r}")


def _digit_ultrametric(words: Sequence[str], base: int, name: str, desc: dict) -> MetricSample:
    def du(a: str, b: str) -> Fraction:
        if a == b:
            return Fraction(0)
        i = next((k for k, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
        return Fraction(1, base ** (i + 1))

    matrix = tuple(tuple(du(a, b) for b in words) for a in words)
    return MetricSample(labels=tuple(words), matrix=matrix, exact=True, name=name, descriptor=desc)


GENERATORS = {
    "grid": lambda a: gen_interval_grid(int(a["m"])),
    "padic": lambda a: gen_padic(int(a["p"]), int(a["k"])),
    "convergent": lambda a: gen_convergent(int(a["N"])),
    "circle": lambda a: gen_circle(int(a["m"]), a.get("metric", "arc")),
    "cantor": lambda a: gen_cantor(int(a["depth"]), a.get("metric", "line")),
    "line": lambda a: line_sample(parse_scalar(v) for v in a["points"]),
}


def sample_from_descriptor(desc: dict) -> MetricSample:
    """Rebuild a sample from its ``descriptor``."""
    gen = desc.get("generator")
    if gen in GENERATORS:
        return GENERATORS[gen](desc)
    if gen == "file":
        return ingest(desc["path"], desc.get("format"))
    if gen in ("paper-interval", "paper-unnested"):
        from fasrecon.construction import paper_sample

        return paper_sample(gen, int(desc["levels"]), [parse_scalar(v) for v in desc.get("probes", [])])
    raise ValueError(f"unknown generator {gen!r}")


# --- ingestion ------------------------------------------------------------------


def _cell(text: str, line: int, col: int) -> Scalar:
    try:
        v = parse_scalar(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad distance entry {text!r}: {exc}", line, col) from None
    return v


def _read_csv(text: str) -> MetricSample:
    rows = [r for r in csv.reader(io.StringIO(text))]
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("empty input", 1, 1)
    try:
        n = int(rows[0][0].strip())
    except (ValueError, IndexError):
        raise ParseError("first row must hold the point count n", 1, 1) from None
    if n < 1:
        raise ParseError("point count must be positive", 1, 1)
    if len(rows) - 1 != n:
        raise ParseError(f"expected {n} matrix rows, found {len(rows) - 1}", len(rows), 1)
    matrix = []
    for i, row in enumerate(rows[1:]):
        if len(row) != n:
            raise ParseError(f"expected {n} entries, found {len(row)}", i + 2, min(len(row), n) + 1)
        matrix.append([_cell(c, i + 2, j + 1) for j, c in enumerate(row)])
    exact = all(is_exact(v) for row in matrix for v in row)
    if not exact:
        matrix = [[float(v) for v in row] for row in matrix]
    sample = MetricSample(labels=tuple(str(i) for i in range(n)),
                          matrix=tuple(tuple(r) for r in matrix), exact=exact, name="csv")
    return sample


def _read_json(text: str) -> MetricSample:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or "points" not in doc:
        raise ParseError("expected an object with a 'points' list", 1, 1)
    kind = doc.get("kind", "line")
    metric = doc.get("metric", "euclidean")
    pts = doc["points"]
    if metric == "ultrametric-digits":
        words = [str(p) for p in pts]
        return _digit_ultrametric(words, int(doc.get("base", 2)), "json-ultrametric", {})
    if metric != "euclidean":
        raise ParseError(f"unknown metric {metric!r}", 1, 1)
    try:
        if kind == "line":
            vals = [parse_scalar(p) for p in pts]
            exact = all(is_exact(v) for v in vals)
            if not exact:
                vals = [float(v) for v in vals]
            return MetricSample(labels=tuple(fmt_label(v) for v in vals), coords=tuple(vals),
                                exact=exact, name="json-line")
        if kind == "plane":
            xy = [(parse_scalar(p[0]), parse_scalar(p[1])) for p in pts]
        else:
            raise ParseError(f"unknown kind {kind!r}", 1, 1)
    except (ValueError, TypeError, IndexError, ZeroDivisionError) as exc:
        raise ParseError(f"bad point entry: {exc}", 1, 1) from None
    matrix = [[_euclid(a, b) for b in xy] for a in xy]
    exact = all(is_exact(v) for row in matrix for v in row)
    if not exact:
        matrix = [[float(v) for v in row] for row in matrix]
    labels = tuple(f"({fmt_label(a)},{fmt_label(b)})" for a, b in xy)
    return MetricSample(labels=labels, matrix=tuple(tuple(r) for r in matrix), exact=exact, name="json-plane")


def _exact_sqrt(q: Fraction) -> Fraction | None:
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def _euclid(a, b) -> Scalar:
    sq = (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2
    if is_exact(sq):
        root = _exact_sqrt(Fraction(sq))
        if root is not None:
            return root
    return math.sqrt(float(sq))


def ingest(source, format: str | None = None) -> MetricSample:
    """Read a distance-matrix CSV or point-list JSON and validate it.

    ``source`` is a path or raw ``bytes``. Raises :class:`ParseError` on
    malformed input and :class:`MetricError` (carrying the report) when the
    distances violate the metric axioms.
    """
    path = None
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        if format is None:
            format = "json" if path.suffix.lower() == ".json" else "csv"
    if format is None:
        format = "json" if text.lstrip().startswith("{") else "csv"
    if format == "csv":
        sample = _read_csv(text)
    elif format == "json":
        sample = _read_json(text)
    else:
        raise ParseError(f"unknown format {format!r}")
    report = validate_metric(sample)
    if not report.valid:
        first = report.violations[0]
        raise MetricError(f"{first.kind} violation at {first.witness}", report)
    desc = {"generator": "file", "path": str(path.resolve()), "format": format} if path else {}
    return MetricSample(labels=sample.labels, coords=sample.coords, matrix=sample.matrix,
                        exact=sample.exact, name=sample.name, descriptor=desc)
