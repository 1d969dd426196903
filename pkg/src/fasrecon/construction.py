"""Adjusted sequences of finite epsilon-approximations (FAS) and their refinements."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from fasrecon.certificate import Certificate
from fasrecon.errors import FasError, NotUltrametric
from fasrecon.metric import MetricSample, PointId, is_ultrametric, line_sample, sample_from_descriptor
from fasrecon.scalar import Scalar, fmt_scalar, is_exact, parse_scalar

DEFAULT_RATIO = Fraction(9, 10)
INTERVAL_MAX_LEVELS = 5
UNNESTED_MAX_LEVELS = 4
DEFAULT_PROBES = (Fraction(1, 2), Fraction(1, 5))


@dataclass(frozen=True)
class FasLevel:
    eps: Scalar
    gamma: Scalar
    points: tuple[PointId, ...]


@dataclass(frozen=True, eq=False)
class Fas:
    """An adjusted sequence ``(eps_n, gamma_n, A_n)`` over ``sample``.

    Levels are 1-based in every public accessor. ``continuum`` is set for
    families that stand for a whole interval ``[lo, hi]``; their ``gamma``
    is then the interval's exact covering radius rather than the sample one.
    """

    sample: MetricSample
    levels: tuple[FasLevel, ...]
    nested: bool = False
    source: str = "generated"
    continuum: tuple[Fraction, Fraction] | None = None
    truncated: bool = False
    certificate: Certificate | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.levels)

    def level(self, n: int) -> FasLevel:
        if not 1 <= n <= len(self.levels):
            raise IndexError(f"level {n} outside 1..{len(self.levels)}")
        return self.levels[n - 1]

    def eps(self, n: int) -> Scalar:
        return self.level(n).eps

    def gamma(self, n: int) -> Scalar:
        return self.level(n).gamma

    def points(self, n: int) -> tuple[PointId, ...]:
        return self.level(n).points

    def locator(self, n: int):
        return self.sample.locator(self.level(n).points)

    def to_json(self) -> dict:
        doc = {
            "levels": [{"eps": fmt_scalar(L.eps), "gamma": fmt_scalar(L.gamma), "points": list(L.points)}
                       for L in self.levels],
            "nested": self.nested,
            "source": self.source,
        }
        doc["space"] = self.sample.descriptor
        doc["continuum"] = [fmt_scalar(c) for c in self.continuum] if self.continuum else None
        doc["truncated"] = self.truncated
        return doc

    @classmethod
    def from_json(cls, doc: dict, sample: MetricSample | None = None) -> "Fas":
        if sample is None:
            if not doc.get("space"):
                raise FasError("Fas JSON carries no space descriptor; pass the sample explicitly")
            sample = sample_from_descriptor(doc["space"])
        levels = tuple(FasLevel(parse_scalar(L["eps"]), parse_scalar(L["gamma"]), tuple(int(p) for p in L["points"]))
                       for L in doc["levels"])
        cont = doc.get("continuum")
        return cls(sample=sample, levels=levels, nested=bool(doc.get("nested", False)),
                   source=doc.get("source", "generated"),
                   continuum=tuple(parse_scalar(c) for c in cont) if cont else None,
                   truncated=bool(doc.get("truncated", False)))


@dataclass(frozen=True)
class DenseEnumeration:
    """An ordering ``y_1, y_2, ...`` of sample points without repeats."""

    order: tuple[PointId, ...]

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("enumeration repeats a point")

    @classmethod
    def index(cls, sample: MetricSample) -> "DenseEnumeration":
        return cls(tuple(sample.points))

    @classmethod
    def farthest_first(cls, sample: MetricSample, start: PointId = 0) -> "DenseEnumeration":
        """Greedy permutation: each next point is farthest from those chosen (ties to lowest id)."""
        order = [start]
        best = [sample.d(start, x) for x in sample.points]
        for _ in range(len(sample) - 1):
            nxt = max(sample.points, key=lambda x: (best[x], -x))
            order.append(nxt)
            for x in sample.points:
                dx = sample.d(nxt, x)
                if dx < best[x]:
                    best[x] = dx
        return cls(tuple(order))

    def covers(self, sample: MetricSample) -> bool:
        return set(self.order) == set(sample.points)


# --- covering radii -----------------------------------------------------------


def gamma(sample: MetricSample, A: Iterable[PointId]) -> Scalar:
    """``max_x d(x, A)`` over the sample."""
    loc = sample.locator(tuple(sorted(set(A))))
    return max(loc.nearest(x)[0] for x in sample.points)


def continuum_gamma(coords: Sequence[Scalar], lo: Scalar, hi: Scalar) -> Scalar:
    """Exact ``sup_{t in [lo, hi]} d(t, A)`` for a finite ``A`` on the line."""
    cs = sorted(coords)
    gaps = [cs[0] - lo, hi - cs[-1]] + [(b - a) / 2 for a, b in zip(cs, cs[1:])]
    return max(gaps)


def _level_gamma(sample: MetricSample, A: Sequence[PointId], continuum) -> Scalar:
    if continuum is not None:
        return continuum_gamma([sample.coords[p] for p in A], *continuum)
    return gamma(sample, A)


def build_eps_approx(sample: MetricSample, eps: Scalar, enum: DenseEnumeration | None = None) -> tuple[PointId, ...]:
    """Shortest prefix of ``enum`` whose open ``eps``-balls cover the sample."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    enum = enum or DenseEnumeration.index(sample)
    if not enum.covers(sample):
        raise ValueError("enumeration does not cover the sample")
    best: list = [None] * len(sample)
    for r, y in enumerate(enum.order, start=1):
        for x in sample.points:
            dx = sample.d(y, x)
            if best[x] is None or dx < best[x]:
                best[x] = dx
        if max(best) < eps:
            return tuple(enum.order[:r])
    return tuple(enum.order)


def _default_eps1(sample: MetricSample) -> Scalar:
    diam = sample.diameter
    return 2 * diam if diam > 0 else Fraction(1)


def _resolved(sample: MetricSample, eps: Scalar) -> bool:
    """Below half the minimum spacing every further level is the whole sample, as an antichain."""
    return len(sample) == 1 or eps < sample.min_distance / 2


def _next_eps(eps: Scalar, g: Scalar, ratio) -> Scalar:
    if is_exact(eps) and is_exact(g):
        return Fraction(ratio) * (eps - g) / 2
    return float(ratio) * (eps - g) / 2.0


def _is_nested(levels: Sequence[FasLevel]) -> bool:
    return all(set(a.points) <= set(b.points) for a, b in zip(levels, levels[1:]))


def build_fas(sample: MetricSample, eps1: Scalar | None = None, n_levels: int = 4,
              enum: DenseEnumeration | None = None, ratio=DEFAULT_RATIO) -> Fas:
    """Greedy-prefix FAS with ``eps_{n+1} = ratio * (eps_n - gamma_n) / 2``.

    Once ``eps_n`` drops below half the minimum sample spacing, ``A_n`` is the
    whole sample; one more (stationary) level is emitted so that every point
    has a successor level, then the build stops (``truncated`` is set if that
    happens before ``n_levels``).
    """
    if n_levels < 1:
        raise ValueError("n_levels must be positive")
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    enum = enum or DenseEnumeration.index(sample)
    eps = _default_eps1(sample) if eps1 is None else eps1
    levels = []
    truncated = False
    for n in range(1, n_levels + 1):
        A = build_eps_approx(sample, eps, enum)
        g = gamma(sample, A)
        if not g < eps:
            raise FasError(f"level {n}: gamma {fmt_scalar(g)} is not below eps {fmt_scalar(eps)}", level=n)
        levels.append(FasLevel(eps, g, A))
        if len(levels) >= 2 and _resolved(sample, levels[-2].eps):
            truncated = n < n_levels
            break
        eps = _next_eps(eps, g, ratio)
    return Fas(sample, tuple(levels), nested=_is_nested(levels), source="generated", truncated=truncated)


def build_countable_fas(sample: MetricSample, enum: DenseEnumeration | None = None, n_levels: int = 64,
                        eps1: Scalar | None = None, ratio=DEFAULT_RATIO) -> Fas:
    """Nested FAS with ``x_n`` in ``A_n``: ``A_n = {y_1, ..., y_max(n, r(n))}``."""
    if n_levels < 1:
        raise ValueError("n_levels must be positive")
    enum = enum or DenseEnumeration.index(sample)
    eps = _default_eps1(sample) if eps1 is None else eps1
    levels = []
    truncated = False
    for n in range(1, n_levels + 1):
        prefix = build_eps_approx(sample, eps, enum)
        A = enum.order[:max(n, len(prefix))]
        g = gamma(sample, A)
        if not g < eps:
            raise FasError(f"level {n}: gamma {fmt_scalar(g)} is not below eps {fmt_scalar(eps)}", level=n)
        levels.append(FasLevel(eps, g, tuple(A)))
        if len(levels) >= 2 and _resolved(sample, levels[-2].eps):
            truncated = n < n_levels
            break
        eps = _next_eps(eps, g, ratio)
    return Fas(sample, tuple(levels), nested=True, source="dense-enumeration", truncated=truncated)


# --- worked interval families ---------------------------------------------------------


def _interval_level(n: int):
    if n == 1:
        return Fraction(2), [Fraction(0)]
    den = 3 ** (2 * n - 3)
    return Fraction(1, den), [Fraction(k, den) for k in range(den + 1)]


def _unnested_level(n: int):
    den = n ** (2 * n - 1)
    return Fraction(1, den), [Fraction(k, den) for k in range(den + 1)]


_FAMILIES = {
    "paper-interval": (_interval_level, INTERVAL_MAX_LEVELS),
    "paper-unnested": (_unnested_level, UNNESTED_MAX_LEVELS),
}


def paper_sample(family: str, n_levels: int, probes: Iterable[Scalar] = DEFAULT_PROBES) -> MetricSample:
    """Union of the family's grids on ``[0, 1]`` plus extra probe points."""
    level_fn, guard = _FAMILIES[family]
    if not 1 <= n_levels <= guard:
        raise FasError(f"{family} supports 1..{guard} levels (sizes grow too fast), got {n_levels}")
    probes = [Fraction(p) for p in probes]
    values = {Fraction(0), Fraction(1), *probes}
    for n in range(1, n_levels + 1):
        values.update(level_fn(n)[1])
    desc = {"generator": family, "levels": n_levels, "probes": [fmt_scalar(p) for p in probes]}
    return line_sample(values, family, desc)


def _paper_fas(family: str, n_levels: int, probes) -> Fas:
    sample = paper_sample(family, n_levels, probes)
    level_fn, _ = _FAMILIES[family]
    cont = (Fraction(0), Fraction(1))
    levels = []
    for n in range(1, n_levels + 1):
        eps, vals = level_fn(n)
        A = tuple(sorted(sample.lookup(v) for v in vals))
        levels.append(FasLevel(eps, _level_gamma(sample, A, cont), A))
    return Fas(sample, tuple(levels), nested=_is_nested(levels), source=family, continuum=cont)


def paper_interval_fas(n_levels: int, probes: Iterable[Scalar] = DEFAULT_PROBES) -> Fas:
    """Triadic FAS of [0, 1]: ``eps_1 = 2, A_1 = {0}``; ``eps_n = 3**-(2n-3)`` on the matching grid."""
    return _paper_fas("paper-interval", n_levels, probes)


def paper_unnested_fas(n_levels: int, probes: Iterable[Scalar] = DEFAULT_PROBES) -> Fas:
    """Non-nested FAS of [0, 1] on the grids ``k / n**(2n-1)`` with ``eps_n = n**-(2n-1)``."""
    return _paper_fas("paper-unnested", n_levels, probes)


# --- verification and refinements ---------------------------------------------------


def verify_adjusted(fas: Fas) -> Certificate:
    """Check ``gamma_n < eps_n``, covering of the sample, and ``eps_{n+1} < (eps_n - gamma_n)/2``."""
    sample = fas.sample
    entries = []
    witness = None
    for n, L in enumerate(fas.levels, start=1):
        e = {"level": n, "eps": L.eps, "gamma": L.gamma, "size": len(L.points)}
        checks = {}
        checks["points_valid"] = bool(L.points) and all(0 <= p < len(sample) for p in L.points)
        if not checks["points_valid"]:
            e["checks"] = checks
            entries.append(e)
            witness = witness or {"level": n, "check": "points_valid"}
            continue
        sample_gamma = gamma(sample, L.points)
        recomputed = _level_gamma(sample, L.points, fas.continuum)
        e["sample_gamma"] = sample_gamma
        e["gamma_margin"] = L.eps - L.gamma
        e["approx_margin"] = L.eps - sample_gamma
        checks["gamma_below_eps"] = L.gamma < L.eps
        checks["approximation"] = sample_gamma < L.eps
        checks["gamma_consistent"] = recomputed == L.gamma or (
            not is_exact(L.gamma) and abs(recomputed - L.gamma) <= 1e-9 * max(1.0, abs(float(L.gamma))))
        if n < len(fas.levels):
            nxt = fas.levels[n]
            bound = (L.eps - L.gamma) / 2
            e["next_eps"] = nxt.eps
            e["adjust_bound"] = bound
            e["adjust_margin"] = bound - nxt.eps
            checks["decreasing"] = nxt.eps < L.eps
            checks["adjusted"] = nxt.eps < bound
            if fas.nested:
                checks["nested"] = set(L.points) <= set(nxt.points)
        e["checks"] = checks
        entries.append(e)
        failed = [k for k, ok in checks.items() if not ok]
        if failed and witness is None:
            witness = {"level": n, "check": failed[0]}
    notes = []
    if fas.continuum is not None:
        notes.append("gamma is the exact covering radius of the interval, not the sample value")
    else:
        notes.append("gamma computed on the finite sample")
    if fas.truncated:
        notes.append("construction truncated at sample resolution")
    return Certificate("adjusted", witness is None, entries, witness, notes)


def nestify(fas: Fas) -> Fas:
    """``A'_n = A_1 ∪ ... ∪ A_n`` with the same eps sequence and recomputed gamma."""
    acc: set[PointId] = set()
    levels = []
    for L in fas.levels:
        acc |= set(L.points)
        A = tuple(sorted(acc))
        levels.append(FasLevel(L.eps, _level_gamma(fas.sample, A, fas.continuum), A))
    out = replace(fas, levels=tuple(levels), nested=True, certificate=None)
    return replace(out, certificate=verify_adjusted(out))


def ultra_centers(sample: MetricSample, eps: Scalar, order: Sequence[PointId] | None = None) -> tuple[PointId, ...]:
    """Scan points, keeping one whose open ``eps``-ball misses every kept center.

    In an ultrametric space intersecting balls coincide, so the kept balls
    partition the sample.
    """
    kept: list[PointId] = []
    for x in (order if order is not None else sample.points):
        if all(sample.d(c, x) >= eps for c in kept):
            kept.append(x)
    return tuple(kept)


def _min_sep(sample: MetricSample, centers: Sequence[PointId]):
    if len(centers) < 2:
        return None
    return min(sample.d(a, b) for a, b in itertools.combinations(centers, 2))


def build_ultra_fas(sample: MetricSample, n_levels: int | None = None, ratio=DEFAULT_RATIO,
                    antichain: bool = True) -> Fas:
    """FAS of disjoint-ball approximations of an ultrametric sample.

    Each level partitions the sample into the open balls of some realized
    radius, strictly finer than the previous level. ``eps_n`` is capped by
    the adjustedness bound and by the center separation (halved when
    ``antichain`` is set, so no two centers form an element of the level).
    Radii admitting no valid ``eps_n`` are skipped; the last level is always
    the singleton partition.
    """
    report = is_ultrametric(sample)
    if not report.is_ultrametric:
        raise NotUltrametric(report)
    radii = sorted({sample.d(a, b) for a, b in itertools.combinations(sample.points, 2)}, reverse=True)
    partitions = []
    for r in radii:
        centers = ultra_centers(sample, r)
        partitions.append((centers, gamma(sample, centers), _min_sep(sample, centers)))

    A = (0,)
    g = gamma(sample, A)
    eps = _default_eps1(sample)
    levels = [FasLevel(eps, g, A)]
    while len(A) < len(sample) and (n_levels is None or len(levels) < n_levels):
        bound = (eps - g) / 2
        chosen = None
        for centers, cg, sep in partitions:
            if len(centers) <= len(A):
                continue
            cap = sep / 2 if antichain else sep
            e = min(cap, Fraction(ratio) * bound)
            if e > cg:
                chosen = (e, cg, centers)
                break
        if chosen is None:
            raise FasError("no admissible finer partition", level=len(levels) + 1)
        eps, g, A = chosen
        levels.append(FasLevel(eps, g, A))
    return Fas(sample, tuple(levels), nested=_is_nested(levels), source="ultra")
