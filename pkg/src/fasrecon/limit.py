"""Truncated inverse limits: threads, the candidate sets X^n and X_n^*, fibers of
the limit map, and injectivity certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from fasrecon.bonding import bond, bond_chain
from fasrecon.certificate import jsonable
from fasrecon.errors import IncoherentThread, InsufficientDepth
from fasrecon.finspace import DEFAULT_CAP, SpaceElement, enumerate_level, small_cliques, sort_key
from fasrecon.metric import PointId, hausdorff_distance
from fasrecon.scalar import Scalar, is_exact


@dataclass(frozen=True)
class Thread:
    """``(C_1, ..., C_N)`` with ``p_{n,n+1}(C_{n+1}) = C_n``."""

    elements: tuple[SpaceElement, ...]

    @property
    def depth(self) -> int:
        return len(self.elements)

    def __getitem__(self, n: int) -> SpaceElement:
        """1-based level access."""
        return self.elements[n - 1]

    def is_coherent(self, fas) -> bool:
        return all(bond(fas, n, self[n + 1]) == self[n] for n in range(1, self.depth))

    def drift(self, fas) -> list[Scalar]:
        """``d_H(C_n, C_{n+1})`` for consecutive components."""
        return [hausdorff_distance(self[n].members, self[n + 1].members, fas.sample)
                for n in range(1, self.depth)]

    def to_json(self) -> dict:
        return {"depth": self.depth, "levels": [list(C.members) for C in self.elements]}


@dataclass(frozen=True)
class PhiEstimate:
    representative: PointId
    radius: Scalar


@dataclass(frozen=True)
class StarSet:
    level: int
    M: int
    points: tuple[PointId, ...]
    stabilized: bool
    sizes: tuple[int, ...] = ()  # |X_n^{*,m}| for m = n..M

    def to_json(self) -> dict:
        return jsonable({"level": self.level, "M": self.M, "points": self.points,
                         "stabilized": self.stabilized, "sizes": self.sizes})


def _need_levels(fas, m: int):
    if m > len(fas):
        raise InsufficientDepth(m, len(fas))


def xn_candidates(fas, n: int, x: PointId) -> tuple[PointId, ...]:
    """``X^n = A_n ∩ B(x, eps_n)`` (open ball)."""
    return fas.locator(n).ball(x, fas.eps(n))


def _image(fas, n: int, m: int, pts) -> set[PointId]:
    """Set image under ``p_{n,m}``, applied pointwise."""
    cur = set(pts)
    for k in range(m - 1, n - 1, -1):
        loc = fas.locator(k)
        cur = {a for c in cur for a in loc.nearest(c)[1]}
    return cur


def xn_star(fas, n: int, x: PointId, M: int) -> StarSet:
    """``X_n^{*,M} = X^n ∩ ⋂_{n<m≤M} p_{n,m}(X^m)``.

    ``M == n`` gives ``X^n`` itself. Stabilized means the set did not change
    over the last two increments of ``M``.
    """
    if not 1 <= n <= M:
        raise ValueError(f"need 1 <= n <= M, got n={n}, M={M}")
    _need_levels(fas, M)
    cur = set(xn_candidates(fas, n, x))
    history = [frozenset(cur)]
    for m in range(n + 1, M + 1):
        cur &= _image(fas, n, m, xn_candidates(fas, m, x))
        history.append(frozenset(cur))
    stabilized = len(history) >= 3 and history[-3] == history[-1]
    return StarSet(n, M, tuple(sorted(cur)), stabilized, tuple(len(h) for h in history))


def xstar_thread(fas, x: PointId, depth: int, M: int) -> Thread:
    """The maximal thread over ``x`` truncated at ``depth``, each component computed with ``M``."""
    if depth > M:
        raise ValueError("depth must not exceed M")
    _need_levels(fas, M)
    elems = tuple(SpaceElement(n, xn_star(fas, n, x, M).points) for n in range(1, depth + 1))
    for n in range(1, depth):
        if not elems[n].members or bond(fas, n, elems[n]) != elems[n - 1]:
            raise IncoherentThread(n, f"X^* not coherent between levels {n} and {n + 1} at M={M}; increase M")
    return Thread(elems)


def _chain_down(fas, top: SpaceElement) -> Thread:
    elems = [top]
    for k in range(top.level - 1, 0, -1):
        elems.append(bond(fas, k, elems[-1]))
    return Thread(tuple(reversed(elems)))


def enumerate_threads(fas, depth: int, cap: int = DEFAULT_CAP) -> list[Thread]:
    """All coherent threads of length ``depth``.

    Each element of the deepest level determines its whole chain, so the
    threads are in bijection with the carrier of level ``depth``.
    """
    _need_levels(fas, depth)
    seen = {}
    for top in enumerate_level(fas, depth, cap):
        t = _chain_down(fas, top)
        seen.setdefault(tuple(C.members for C in t.elements), t)
    return list(seen.values())


def phi_estimate(fas, thread: Thread) -> PhiEstimate:
    """Any member of ``C_N`` is within ``2 eps_N`` of the limit point of every
    infinite coherent extension: each later step moves by at most ``gamma_m``
    and adjustedness makes those steps sum below ``eps_N``."""
    top = thread[thread.depth]
    return PhiEstimate(top.members[0], 2 * fas.eps(thread.depth))


def fiber(fas, x: PointId, depth: int, M: int | None = None, cap: int = DEFAULT_CAP) -> list[Thread]:
    """Coherent depth-``depth`` threads with ``C_n ⊆ X_n^{*,M}(x)`` at every level."""
    if M is None:
        M = min(depth + 1, len(fas))
    stars = [set(xn_star(fas, n, x, M).points) for n in range(1, depth + 1)]
    out = []
    for members in small_cliques(fas.sample, sorted(stars[-1]), 2 * fas.eps(depth), cap):
        t = _chain_down(fas, SpaceElement(depth, members))
        if all(set(t[n].members) <= stars[n - 1] for n in range(1, depth + 1)):
            out.append(t)
    return sorted(out, key=lambda t: sort_key(t[t.depth]))


# --- injectivity --------------------------------------------------------------------


def elimination_depth(d0: Scalar, eps: Scalar) -> int:
    """Smallest ``i >= 0`` with ``(i + 3) * d0 > 2 * eps``."""
    if not d0 > 0:
        raise ValueError("competitor distance must be positive")
    q = (2 * eps) / d0 if is_exact(d0) and is_exact(eps) else 2 * float(eps) / float(d0)
    # i + 3 > q  <=>  i >= floor(q) - 2
    return max(0, math.floor(q) - 2)


@dataclass
class InjectivityCertificate:
    x: PointId
    n0: int
    verdict: str  # pass | fail | not-applicable
    M: int | None = None
    levels: list[int] = field(default_factory=list)
    traces: list[dict] = field(default_factory=list)
    stars: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return jsonable({"kind": "injectivity", "x": self.x, "n0": self.n0, "verdict": self.verdict,
                         "M": self.M, "levels": self.levels, "traces": self.traces,
                         "stars": {str(k): v for k, v in self.stars.items()}})


def stable_level(fas, x: PointId) -> int | None:
    """Smallest ``n0`` with ``x`` in ``A_n`` for every available ``n >= n0``."""
    n0 = None
    for n in range(len(fas), 0, -1):
        if x in set(fas.points(n)):
            n0 = n
        else:
            break
    return n0


def _observed_elimination(fas, n: int, x: PointId, y: PointId, M: int) -> int | None:
    for m in range(n + 1, M + 1):
        if y not in _image(fas, n, m, xn_candidates(fas, m, x)):
            return m - n
    return None


def injectivity_certificate(fas, x: PointId, n0: int, levels_to_check=None) -> InjectivityCertificate:
    """Certify ``X_n^* = {x}`` for the checked levels at a depth taken from the
    elimination bound ``(i + 3) d_0 > 2 eps_n`` applied to every competitor
    ``y_0`` in ``X^n``."""
    levels = sorted(set(levels_to_check)) if levels_to_check else [n0]
    if min(levels) < n0:
        raise ValueError("checked levels must be >= n0")
    if not 1 <= n0 <= len(fas) or any(x not in set(fas.points(n)) for n in range(n0, len(fas) + 1)):
        return InjectivityCertificate(x, n0, "not-applicable", levels=levels)
    traces = []
    M = 0
    for n in levels:
        depth = 0
        for y in xn_candidates(fas, n, x):
            if y == x:
                continue
            d0 = fas.sample.d(x, y)
            i_star = elimination_depth(d0, fas.eps(n))
            depth = max(depth, i_star)
            traces.append({"level": n, "competitor": y, "d0": d0, "eps": fas.eps(n), "bound_depth": i_star})
        M = max(M, n + depth + 1)
    _need_levels(fas, M)
    for t in traces:
        seen = _observed_elimination(fas, t["level"], x, t["competitor"], M)
        t["observed_depth"] = seen
        t["slack"] = None if seen is None else t["bound_depth"] + 1 - seen
    stars = {n: xn_star(fas, n, x, M).points for n in levels}
    verdict = "pass" if all(s == (x,) for s in stars.values()) else "fail"
    return InjectivityCertificate(x, n0, verdict, M, levels, traces, stars)


def certify_point(fas, x: PointId) -> InjectivityCertificate:
    """Injectivity certificate at the first ``n0`` whose elimination depth fits the FAS."""
    n0 = stable_level(fas, x)
    if n0 is None:
        return InjectivityCertificate(x, len(fas), "not-applicable")
    first_error = None
    for n in range(n0, len(fas) + 1):
        try:
            return injectivity_certificate(fas, x, n)
        except InsufficientDepth as exc:
            first_error = first_error or exc
    raise first_error
