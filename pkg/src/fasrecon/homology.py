"""Mod-2 Betti numbers of the diameter complex of a level.

The order complex of a level is the barycentric subdivision of this
complex, so the two have the same homology.
"""

from __future__ import annotations

from dataclasses import dataclass

from fasrecon.finspace import DEFAULT_CAP, small_cliques
from fasrecon.scalar import Scalar, fmt_scalar

DEFAULT_MAX_DIM = 2


@dataclass(frozen=True)
class DiameterComplex:
    level: int
    eps: Scalar
    max_dim: int
    simplices: tuple[tuple[tuple[int, ...], ...], ...]  # simplices[k] = sorted k-simplices

    def counts(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.counts()))


def build_complex(fas, n: int, max_dim: int = DEFAULT_MAX_DIM, cap: int = DEFAULT_CAP) -> DiameterComplex:
    """Subsets of ``A_n`` with at most ``max_dim + 1`` points and diameter ``< 2 eps_n``."""
    L = fas.level(n)
    faces = small_cliques(fas.sample, L.points, 2 * L.eps, cap, max_size=max_dim + 1)
    by_dim = [[] for _ in range(max_dim + 1)]
    for f in faces:
        by_dim[len(f) - 1].append(f)
    return DiameterComplex(n, L.eps, max_dim, tuple(tuple(sorted(s)) for s in by_dim))


def gf2_rank(columns: list[int]) -> int:
    """Rank over the two-element field of vectors packed into integers."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top in pivots:
                col ^= pivots[top]
            else:
                pivots[top] = col
                rank += 1
                break
    return rank


def _boundary_columns(faces, cofaces) -> list[int]:
    index = {f: i for i, f in enumerate(faces)}
    cols = []
    for s in cofaces:
        v = 0
        for drop in range(len(s)):
            v |= 1 << index[s[:drop] + s[drop + 1:]]
        cols.append(v)
    return cols


def betti(complex: DiameterComplex, max_dim: int | None = None) -> tuple[int, ...]:
    """``(beta_0, ..., beta_max_dim)`` of the complex's ``max_dim``-skeleton."""
    top = complex.max_dim if max_dim is None else min(max_dim, complex.max_dim)
    simp = complex.simplices
    ranks = [0] * (complex.max_dim + 2)  # ranks[k] = rank of boundary from dim k to k-1
    for k in range(1, complex.max_dim + 1):
        ranks[k] = gf2_rank(_boundary_columns(simp[k - 1], simp[k]))
    return tuple(len(simp[k]) - ranks[k] - ranks[k + 1] for k in range(top + 1))


def betti_report(fas, n: int, max_dim: int = DEFAULT_MAX_DIM, cap: int = DEFAULT_CAP) -> dict:
    cx = build_complex(fas, n, max_dim, cap)
    return {"level": n, "eps": fmt_scalar(cx.eps), "betti": list(betti(cx)), "simplices": cx.counts()}

