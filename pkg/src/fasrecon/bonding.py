"""Nearest-point bonding maps between consecutive levels and the nearby map."""

from __future__ import annotations

import json
from dataclasses import dataclass

from fasrecon.certificate import Certificate
from fasrecon.errors import CapExceeded, DiameterTooLarge
from fasrecon.finspace import DEFAULT_CAP, SpaceElement, enumerate_level
from fasrecon.metric import PointId, set_diameter
from fasrecon.scalar import fmt_scalar, ties


@dataclass(frozen=True)
class BondingWitness:
    source: SpaceElement
    target: SpaceElement
    nearest: tuple[tuple[PointId, tuple[PointId, ...]], ...]  # (c, argmin of d(., c) over A_n)


def _check_range(fas, n: int, m: int):
    if not (1 <= n <= m <= len(fas)):
        raise IndexError(f"levels ({n}, {m}) outside 1..{len(fas)} or out of order")


def _validated(fas, n: int, members) -> SpaceElement:
    members = tuple(sorted(set(members)))
    diam = set_diameter(members, fas.sample)
    if not diam < 2 * fas.eps(n):
        raise DiameterTooLarge(
            f"image at level {n} has diameter {fmt_scalar(diam)} >= 2*eps_{n}; the FAS is not adjusted")
    return SpaceElement(n, members)


def bond_witness(fas, n: int, C: SpaceElement) -> BondingWitness:
    _check_range(fas, n, n + 1)
    if C.level != n + 1:
        raise IndexError(f"bond to level {n} expects an element of level {n + 1}, got {C.level}")
    loc = fas.locator(n)
    nearest = tuple((c, loc.nearest(c)[1]) for c in C.members)
    target = _validated(fas, n, (a for _, arg in nearest for a in arg))
    return BondingWitness(C, target, nearest)


def bond(fas, n: int, C: SpaceElement) -> SpaceElement:
    """``p_{n,n+1}(C)``: union over ``c`` in ``C`` of the points of ``A_n`` nearest to ``c``."""
    return bond_witness(fas, n, C).target


def bond_chain(fas, n: int, m: int, C: SpaceElement) -> SpaceElement:
    """``p_{n,m} = p_{n,n+1} ∘ ... ∘ p_{m-1,m}``; the identity when ``n == m``."""
    _check_range(fas, n, m)
    if C.level != m:
        raise IndexError(f"expected an element of level {m}, got {C.level}")
    for k in range(m - 1, n - 1, -1):
        C = bond(fas, k, C)
    return C


def nearby(fas, n: int, x: PointId) -> SpaceElement:
    """``q_{A_n}(x)``: all points of ``A_n`` at minimal distance from ``x``.

    Computed by a direct scan (independently of the bisection locator used by
    :func:`bond`), so ``bond_via_nearby`` is a genuine cross-check.
    """
    sample = fas.sample
    A = fas.points(n)
    dists = [(sample.d(a, x), a) for a in A]
    best = min(dd for dd, _ in dists)
    return _validated(fas, n, (a for dd, a in dists if ties(dd, best)))


def bond_via_nearby(fas, n: int, C: SpaceElement) -> SpaceElement:
    _check_range(fas, n, n + 1)
    if C.level != n + 1:
        raise IndexError(f"expected an element of level {n + 1}, got {C.level}")
    return _validated(fas, n, (a for c in C.members for a in nearby(fas, n, c).members))


def check_ultra_commute(fas) -> Certificate:
    """For every sample point and level: ``q_{A_n}(x)`` is a singleton and equals
    ``p_{n,n+1}(q_{A_{n+1}}(x))``."""
    entries = []
    witness = None
    for n in range(1, len(fas) + 1):
        singles = commutes = 0
        for x in fas.sample.points:
            q = nearby(fas, n, x)
            if len(q.members) == 1:
                singles += 1
            elif witness is None:
                witness = {"check": "cardinality", "level": n, "x": x, "q": q.members}
            if n < len(fas):
                deeper = bond(fas, n, nearby(fas, n + 1, x))
                if deeper == q:
                    commutes += 1
                elif witness is None:
                    witness = {"check": "commutation", "level": n, "x": x, "q": q.members,
                               "p_of_q_next": deeper.members}
        entries.append({"level": n, "points": len(fas.sample), "singletons": singles,
                        "commuting": commutes if n < len(fas) else None})
    return Certificate("ultra-commute", witness is None, entries, witness)


def check_bonding(fas, cap: int = DEFAULT_CAP) -> Certificate:
    """Validity and order preservation of every bonding map on enumerable levels."""
    entries = []
    witness = None
    for n in range(1, len(fas)):
        try:
            source = enumerate_level(fas, n + 1, cap)
        except CapExceeded as exc:
            entries.append({"level": n, "skipped": f"cap exceeded after {exc.partial_count}"})
            continue
        image = {}
        for C in source:
            try:
                image[C] = bond(fas, n, C)
            except DiameterTooLarge as exc:
                witness = witness or {"level": n, "source": C.members, "error": str(exc)}
        pairs = 0
        for D in source:
            for drop in D.members if len(D.members) > 1 else ():
                C = SpaceElement(D.level, tuple(m for m in D.members if m != drop))
                if C in image and D in image:
                    pairs += 1
                    if not set(image[C].members) <= set(image[D].members) and witness is None:
                        witness = {"level": n, "smaller": C.members, "larger": D.members}
        entries.append({"level": n, "elements": len(source), "cover_pairs": pairs})
    return Certificate("bonding", witness is None, entries, witness)


def map_dump(fas, n: int, cap: int = DEFAULT_CAP) -> str:
    """JSON listing ``[source, target]`` for every element of level ``n + 1``."""
    pairs = [[list(C.members), list(bond(fas, n, C).members)] for C in enumerate_level(fas, n + 1, cap)]
    return json.dumps({"n": n, "pairs": pairs}, sort_keys=True)
