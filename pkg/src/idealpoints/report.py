"""JSON encoding for run reports.

Complex numbers become ``{"re": x, "im": y}``; poles become the string
``"pole"``.  Field names here are a stable interface for downstream tools.
"""
from __future__ import annotations

import cmath
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from .deformation import DegenerationReport, EquationSystem, ShapeAssignment
from .roots import RootOfUnity

__all__ = ["RunReport", "encode_complex", "decode_complex", "encode_shapes", "encode_root", "encode_degeneration"]


def encode_complex(z) -> dict | str:
    z = complex(z)
    if cmath.isnan(z):
        return "indeterminate"
    if not cmath.isfinite(z):
        return "pole"
    return {"re": z.real, "im": z.imag}


def decode_complex(obj) -> complex:
    if obj == "pole":
        return complex("inf")
    if obj == "indeterminate":
        return complex("nan")
    return complex(obj["re"], obj["im"])


def encode_shapes(shapes) -> list:
    if isinstance(shapes, ShapeAssignment):
        shapes = shapes.shapes
    return [encode_complex(z) for z in shapes]


def encode_root(root: RootOfUnity | None) -> dict | None:
    if root is None:
        return None
    return {
        "lambda": encode_complex(root.lam),
        "order": root.order,
        "trace": encode_complex(root.trace),
        "alternate": encode_complex(root.alternate),
        "alternate_order": root.alternate_order,
    }


def encode_degeneration(rep: DegenerationReport, sys: EquationSystem | None = None) -> dict:
    out = {
        "outcome": rep.outcome.value,
        "curve": rep.curve,
        "n": rep.n,
        "t_reached": rep.t_reached,
        "steps_taken": rep.steps_taken,
        "final_shapes": encode_shapes(rep.final_shapes),
        # tet is the 0-based index; tet_label is the 1-based name used in tables
        "collapsed": [{"tet": i, "tet_label": i + 1, "limit": lim} for i, lim in rep.collapsed],
        "holonomy_values": {k: encode_complex(v) for k, v in sorted(rep.holonomy_values.items())},
        "root_of_unity": encode_root(rep.root_of_unity),
        "root_curve": rep.root_curve,
        "volume": rep.volume,
        "reason": rep.reason,
    }
    if sys is not None and sys.slots is not None:
        out["final_shapes_explicit"] = encode_shapes(sys.to_explicit(rep.final_shapes))
    return out


@dataclass
class RunReport:
    command: str
    input: str
    tolerances: dict[str, float]
    result: dict[str, Any] = field(default_factory=dict)
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        data = json.loads(text)
        return cls(
            command=data["command"],
            input=data["input"],
            tolerances=data["tolerances"],
            result=data["result"],
            wall_time_s=data["wall_time_s"],
        )
