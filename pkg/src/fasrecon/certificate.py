"""Machine-checkable pass/fail records with witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from fasrecon.scalar import fmt_scalar


def jsonable(obj):
    """Recursively convert scalars to ``"p/q"`` strings and tuples/sets to lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (Fraction, float)):
        return fmt_scalar(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return [jsonable(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Certificate:
    kind: str
    passed: bool
    entries: list[dict] = field(default_factory=list)
    witness: object = None
    notes: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "witness": jsonable(self.witness),
            "notes": list(self.notes),
            "entries": jsonable(self.entries),
        }
