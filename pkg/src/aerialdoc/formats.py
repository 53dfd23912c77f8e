"""Versioned document I/O: JSON schemas, loaders, and dumpers.

Every document carries format_version; loaders reject unknown versions and
schema violations with SchemaError. JSON is always written with sorted keys
and a trailing newline so identical content is byte-identical on disk.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import jsonschema

from .errors import SchemaError
from .formation import LightingSpec, SeparationSpec
from .planner import MissionPlanSet
from .techniques import MissionRequest

FORMAT_VERSION = "1"

_SCHEMA_NAMES = (
    "mission_request",
    "plan_set",
    "alignment_result",
    "flight_metrics",
    "validation_report",
    "map_points",
)


def _load_schemas() -> dict:
    out = {}
    for name in _SCHEMA_NAMES:
        ref = resources.files("aerialdoc.schemas").joinpath(f"{name}.schema.json")
        out[name] = json.loads(ref.read_text(encoding="utf-8"))
    return out


SCHEMAS = _load_schemas()


def validate_document(kind: str, doc) -> None:
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown document kind '{kind}'")
    if not isinstance(doc, dict):
        raise SchemaError(f"{kind}: document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"{kind}: format_version {version!r} unsupported (expected '{FORMAT_VERSION}')"
        )
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{kind}: {exc.message} (at /{path})") from exc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def mission_request_to_doc(req: MissionRequest) -> dict:
    return {"format_version": FORMAT_VERSION, **req.to_dict()}


def mission_request_from_doc(doc: dict) -> MissionRequest:
    validate_document("mission_request", doc)
    body = {k: v for k, v in doc.items() if k != "format_version"}
    return MissionRequest.from_dict(body)


def plan_set_to_doc(
    planset: MissionPlanSet,
    followers=None,
    separation: SeparationSpec = None,
) -> dict:
    doc = {"format_version": FORMAT_VERSION, **planset.to_dict()}
    if followers:
        doc["followers"] = [f.to_dict() for f in followers]
    if separation is not None:
        doc["separation"] = {
            "d_min": float(separation.d_min),
            "downwash_radius": float(separation.downwash_radius),
        }
    return doc


def plan_set_from_doc(doc: dict):
    """Returns (MissionPlanSet, followers, separation)."""
    validate_document("plan_set", doc)
    body = {
        k: v
        for k, v in doc.items()
        if k not in ("format_version", "followers", "separation")
    }
    planset = MissionPlanSet.from_dict(body)
    followers = [LightingSpec.from_dict(f) for f in doc.get("followers", [])]
    sep = doc.get("separation")
    separation = (
        SeparationSpec(sep.get("d_min", 2.0), sep.get("downwash_radius", 1.0))
        if sep is not None
        else SeparationSpec()
    )
    return planset, followers, separation


def alignment_result_to_doc(result) -> dict:
    doc = result.to_dict()
    for row in doc["yaw_costs"]:
        if math.isinf(row["cost_m2"]):
            row["cost_m2"] = "inf"
    return {"format_version": FORMAT_VERSION, **doc}


def metrics_to_doc(m, failed: bool, collisions: int, separation_violations: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        **m.to_dict(),
        "failed": bool(failed),
        "collisions": int(collisions),
        "separation_violations": int(separation_violations),
    }


def validation_report_to_doc(report) -> dict:
    return {"format_version": FORMAT_VERSION, **report.to_dict()}
