"""The finite T0 levels: nonempty subsets of ``A_n`` with diameter below ``2 eps_n``,
ordered by inclusion."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from fasrecon.certificate import Certificate
from fasrecon.errors import CapExceeded, DiameterTooLarge, EmptySubset, LevelMismatch, NotInLevel
from fasrecon.metric import MetricSample, PointId, set_diameter
from fasrecon.scalar import Scalar, fmt_scalar, parse_scalar

DEFAULT_CAP = 10 ** 6


@dataclass(frozen=True)
class SpaceElement:
    level: int
    members: tuple[PointId, ...]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def sort_key(C: SpaceElement):
    return (len(C.members), C.members)


def make_element(fas, n: int, subset: Iterable[PointId]) -> SpaceElement:
    """Validated element of level ``n``; each failure mode raises its own error."""
    members = tuple(sorted(set(subset)))
    if not members:
        raise EmptySubset(f"empty subset at level {n}")
    level = fas.level(n)
    missing = set(members) - set(level.points)
    if missing:
        raise NotInLevel(f"points {sorted(missing)} are not in A_{n}")
    diam = set_diameter(members, fas.sample)
    if not diam < 2 * level.eps:
        raise DiameterTooLarge(
            f"diameter {fmt_scalar(diam)} is not below 2*eps_{n} = {fmt_scalar(2 * level.eps)}")
    return SpaceElement(n, members)


def leq(C: SpaceElement, D: SpaceElement) -> bool:
    if C.level != D.level:
        raise LevelMismatch(f"elements of levels {C.level} and {D.level} are incomparable")
    return set(C.members) <= set(D.members)


def min_nbhd(C: SpaceElement) -> list[SpaceElement]:
    """All nonempty subsets of ``C`` (the smallest open set containing it)."""
    out = []
    for k in range(1, len(C.members) + 1):
        out.extend(SpaceElement(C.level, sub) for sub in itertools.combinations(C.members, k))
    return out


def small_cliques(sample: MetricSample, points: Sequence[PointId], threshold: Scalar,
                  cap: int = DEFAULT_CAP, max_size: int | None = None) -> list[tuple[PointId, ...]]:
    """Every nonempty subset of ``points`` with diameter ``< threshold``.

    Depth-first over the graph ``d(a, b) < threshold``: a subset qualifies
    exactly when it is a clique there. Aborts with :class:`CapExceeded`
    once more than ``cap`` subsets have been produced.
    """
    pts = sorted(set(points))
    k = len(pts)
    adj = [0] * k
    if sample.coords is not None:
        loc = sample.locator(tuple(pts))
        pos = {p: i for i, p in enumerate(pts)}
        for i, p in enumerate(pts):
            for q in loc.ball(p, threshold):
                if q != p:
                    adj[i] |= 1 << pos[q]
    else:
        for i, j in itertools.combinations(range(k), 2):
            if sample.d(pts[i], pts[j]) < threshold:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    out: list[tuple[PointId, ...]] = []
    stack = []
    for i in range(k):
        higher = adj[i] & ~((1 << (i + 1)) - 1)
        stack.append(((i,), higher))
        while stack:
            clique, cand = stack.pop()
            out.append(tuple(pts[c] for c in clique))
            if len(out) > cap:
                raise CapExceeded(cap, len(out) - 1)
            if max_size is not None and len(clique) >= max_size:
                continue
            while cand:
                low = cand & -cand
                j = low.bit_length() - 1
                cand ^= low
                stack.append((clique + (j,), cand & adj[j]))
    return out


def enumerate_level(fas, n: int, cap: int = DEFAULT_CAP) -> list[SpaceElement]:
    """The full carrier of level ``n`` in canonical order (by size, then members)."""
    L = fas.level(n)
    subsets = small_cliques(fas.sample, L.points, 2 * L.eps, cap)
    return sorted((SpaceElement(n, s) for s in subsets), key=sort_key)


def check_monotone(f: Callable[[SpaceElement], SpaceElement], source: Iterable[SpaceElement]) -> Certificate:
    """Order preservation of ``f`` on a down-closed family of elements.

    Checking covering pairs ``D - {d} ⊂ D`` suffices by transitivity.
    """
    elements = list(source)
    image = {C: f(C) for C in elements}
    known = set(image)
    checked = 0
    for D in elements:
        if len(D.members) < 2:
            continue
        for drop in D.members:
            C = SpaceElement(D.level, tuple(m for m in D.members if m != drop))
            if C not in known:
                continue
            checked += 1
            if not set(image[C].members) <= set(image[D].members):
                return Certificate("monotone", False, [{"pairs_checked": checked}],
                                   witness={"smaller": C.members, "larger": D.members,
                                            "f_smaller": image[C].members, "f_larger": image[D].members})
    return Certificate("monotone", True, [{"pairs_checked": checked, "elements": len(elements)}])


@dataclass(frozen=True)
class LevelSpace:
    """A materialized level: elements in canonical order."""

    level: int
    eps: Scalar
    elements: tuple[SpaceElement, ...]
    labels: tuple[str, ...] | None = None

    @classmethod
    def build(cls, fas, n: int, cap: int = DEFAULT_CAP) -> "LevelSpace":
        return cls(n, fas.eps(n), tuple(enumerate_level(fas, n, cap)), fas.sample.labels)

    def order_pairs(self) -> list[tuple[int, int]]:
        """All ``(i, j)`` with ``elements[i] ⊆ elements[j]``, reflexive pairs included."""
        sets = [set(e.members) for e in self.elements]
        return [(i, j) for i, a in enumerate(sets) for j, b in enumerate(sets) if a <= b]

    def hasse_edges(self) -> list[tuple[int, int]]:
        # in a down-closed family D covers C iff C = D minus one point
        index = {e.members: i for i, e in enumerate(self.elements)}
        edges = []
        for j, e in enumerate(self.elements):
            if len(e.members) < 2:
                continue
            for drop in e.members:
                sub = tuple(m for m in e.members if m != drop)
                if sub in index:
                    edges.append((index[sub], j))
        return sorted(edges)

    def to_json(self) -> dict:
        return {"level": self.level, "eps": fmt_scalar(self.eps),
                "elements": [list(e.members) for e in self.elements],
                "order": [list(p) for p in self.order_pairs()]}

    @classmethod
    def from_json(cls, doc: dict) -> "LevelSpace":
        n = int(doc["level"])
        return cls(n, parse_scalar(doc["eps"]), tuple(SpaceElement(n, tuple(m)) for m in doc["elements"]))

    def to_dot(self) -> str:
        def name(e: SpaceElement) -> str:
            if self.labels is None:
                return ",".join(str(m) for m in e.members)
            return ",".join(self.labels[m] for m in e.members)

        lines = [f'digraph "U_{self.level}" {{', "  rankdir=BT;"]
        for i, e in enumerate(self.elements):
            lines.append(f'  n{i} [label="{{{name(e)}}}"];')
        for i, j in self.hasse_edges():
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def export_poset(fas, n: int, format: str = "json", cap: int = DEFAULT_CAP) -> str:
    space = LevelSpace.build(fas, n, cap)
    if format == "dot":
        return space.to_dot()
    if format == "json":
        return json.dumps(space.to_json(), sort_keys=True)
    raise ValueError(f"unknown format {format!r}")
