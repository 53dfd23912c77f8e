"""Documentation technique catalog and mission-request validation.

The catalog records, per technique: which team sizes can realize it, the
equipment it needs, whether ambient light is required/forbidden/arbitrary,
and its typical exposure time. Validation gates mission requests against
those constraints before any planning happens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ParameterError
from .geometry import as_point

# Ambient illuminance below this is treated as darkness (lux).
DARKNESS_LUX = 10.0
# Longest exposure a hovering camera carrier can hold without motion blur (s).
CARRIER_EXPOSURE_LIMIT_S = 2.0
# Hover settle margin added around the exposure at acquisition stops (s).
SETTLE_MARGIN_S = 1.0


class AmbientLight(str, Enum):
    REQUIRED = "required"
    FORBIDDEN = "forbidden"
    ARBITRARY = "arbitrary"


class TechniqueId(str, Enum):
    VIS = "VIS"                  # visible-spectrum photography
    VISTR = "VISTR"              # visible transmitography
    RAK = "RAK"                  # raking light
    TPL = "TPL"                  # three-point lighting
    RTI = "RTI"                  # reflectance transformation imaging
    VIVL = "VIVL"                # visible-induced luminescence
    UVR = "UVR"                  # UV reflectography
    UVF = "UVF"                  # UV fluorescent photography
    UVRFC = "UVRFC"              # UV false-color reflectography
    IRR = "IRR"                  # IR reflectography
    IRRTR = "IRRTR"              # IR transmitography
    IRF = "IRF"                  # IR fluorescent photography
    IRRFC = "IRRFC"              # IR false-color reflectography
    RADIOGRAPHY = "RADIOGRAPHY"
    RECON3D = "RECON3D"          # 3D reconstruction
    PHOTOGRAMMETRY = "PHOTOGRAMMETRY"
    ENVMON = "ENVMON"            # environmental monitoring


@dataclass(frozen=True)
class TechniqueSpec:
    id: TechniqueId
    single_robot: bool
    multi_robot: bool
    needs_onboard_camera: bool
    needs_onboard_light: bool
    ambient_light: AmbientLight
    exposure_s: Optional[float]
    field_applied: bool  # realized in actual building deployments

    def __post_init__(self):
        if not (self.single_robot or self.multi_robot):
            raise ParameterError(f"{self.id}: no realizability flag set")
        if self.exposure_s is not None and self.exposure_s <= 0:
            raise ParameterError(f"{self.id}: exposure must be positive")

    def to_dict(self) -> dict:
        return {
            "id": self.id.value,
            "single_robot": self.single_robot,
            "multi_robot": self.multi_robot,
            "needs_onboard_camera": self.needs_onboard_camera,
            "needs_onboard_light": self.needs_onboard_light,
            "ambient_light": self.ambient_light.value,
            "exposure_s": self.exposure_s,
            "field_applied": self.field_applied,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TechniqueSpec":
        return cls(
            id=TechniqueId(d["id"]),
            single_robot=bool(d["single_robot"]),
            multi_robot=bool(d["multi_robot"]),
            needs_onboard_camera=bool(d["needs_onboard_camera"]),
            needs_onboard_light=bool(d["needs_onboard_light"]),
            ambient_light=AmbientLight(d["ambient_light"]),
            exposure_s=d["exposure_s"],
            field_applied=bool(d["field_applied"]),
        )


def _t(id, single, multi, camera, light, ambient, exposure, applied):
    return TechniqueSpec(
        TechniqueId(id), single, multi, camera, light,
        AmbientLight(ambient), exposure, applied,
    )


_CATALOG = [
    #   id              single multi  camera light  ambient      exp    applied
    _t("VIS",            True, False,  True,  True, "required",   0.2,  True),
    _t("VISTR",         False,  True,  True,  True, "arbitrary",  2.0,  False),
    _t("RAK",            True,  True,  True,  True, "arbitrary",  0.2,  True),
    _t("TPL",           False,  True,  True,  True, "arbitrary",  0.2,  True),
    _t("RTI",            True,  True,  True,  True, "forbidden",  0.2,  True),
    _t("VIVL",           True, False, False,  True, "arbitrary", 25.0,  False),
    _t("UVR",            True, False, False,  True, "forbidden",  2.0,  True),
    _t("UVF",            True,  True,  True,  True, "arbitrary",  2.0,  True),
    _t("UVRFC",          True, False, False,  True, "forbidden",  None, False),
    _t("IRR",            True, False, False,  True, "forbidden",  4.0,  True),
    _t("IRRTR",          True, False, False,  True, "forbidden", 20.0,  False),
    _t("IRF",            True,  True,  True,  True, "arbitrary", 30.0,  True),
    _t("IRRFC",          True, False, False,  True, "forbidden",  None, False),
    _t("RADIOGRAPHY",   False,  True, False, False, "arbitrary", 30.0,  False),
    _t("RECON3D",        True,  True,  True, False, "arbitrary",  None, True),
    _t("PHOTOGRAMMETRY", True,  True,  True, False, "required",   None, False),
    _t("ENVMON",         True,  True, False, False, "arbitrary",  None, False),
]

_BY_ID = {spec.id: spec for spec in _CATALOG}


def technique_catalog() -> list:
    """The full technique catalog, immutable specs in a fresh list."""
    return list(_CATALOG)


def technique(tid) -> TechniqueSpec:
    try:
        tid = TechniqueId(tid)
    except ValueError:
        raise ParameterError(f"unknown technique '{tid}'") from None
    return _BY_ID[tid]


def dwell_time(tid, margin: float = SETTLE_MARGIN_S) -> float:
    """Hover duration at an acquisition pose: exposure plus settle margin.

    Techniques without a tabulated exposure (3D reconstruction and similar)
    dwell for the margin alone.
    """
    spec = technique(tid)
    exposure = spec.exposure_s if spec.exposure_s is not None else 0.0
    return exposure + margin


@dataclass(frozen=True)
class Pose:
    """Camera carrier pose: position, heading about z, gimbal pitch."""

    position: np.ndarray
    heading: float = 0.0
    gimbal_pitch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        if not (np.isfinite(self.heading) and np.isfinite(self.gimbal_pitch)):
            raise ParameterError("pose angles must be finite")

    def to_dict(self) -> dict:
        return {
            "position": [float(v) for v in self.position],
            "heading": float(self.heading),
            "gimbal_pitch": float(self.gimbal_pitch),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(d["position"], d.get("heading", 0.0), d.get("gimbal_pitch", 0.0))


@dataclass(frozen=True)
class Viewpoint:
    """One requested image: camera pose, target point, technique, flags."""

    camera_pose: Pose
    ooi_point: np.ndarray
    technique: TechniqueId
    acquire: bool = True
    camera_onboard: bool = True  # False: MAV only positions light, static camera

    def __post_init__(self):
        object.__setattr__(self, "ooi_point", as_point(self.ooi_point))
        object.__setattr__(self, "technique", TechniqueId(self.technique))
        if self.acquire and np.allclose(self.ooi_point, self.camera_pose.position):
            raise ParameterError("acquisition viewpoint coincides with its target")

    def to_dict(self) -> dict:
        return {
            "camera_pose": self.camera_pose.to_dict(),
            "ooi_point": [float(v) for v in self.ooi_point],
            "technique": self.technique.value,
            "acquire": bool(self.acquire),
            "camera_onboard": bool(self.camera_onboard),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Viewpoint":
        return cls(
            camera_pose=Pose.from_dict(d["camera_pose"]),
            ooi_point=d["ooi_point"],
            technique=TechniqueId(d["technique"]),
            acquire=bool(d.get("acquire", True)),
            camera_onboard=bool(d.get("camera_onboard", True)),
        )


@dataclass(frozen=True)
class MissionRequest:
    viewpoints: tuple
    team_size: int
    ambient_lux: float
    t_max: float  # maximum flight time per sortie, s
    cruise_speed: float
    takeoff: Pose = field(default_factory=lambda: Pose(np.zeros(3)))

    def __post_init__(self):
        object.__setattr__(self, "viewpoints", tuple(self.viewpoints))
        if self.team_size < 1:
            raise ParameterError("team_size must be >= 1")
        if self.t_max <= 0:
            raise ParameterError("t_max must be positive")
        if self.cruise_speed <= 0:
            raise ParameterError("cruise_speed must be positive")
        if self.ambient_lux < 0:
            raise ParameterError("ambient_lux must be non-negative")

    def to_dict(self) -> dict:
        return {
            "viewpoints": [v.to_dict() for v in self.viewpoints],
            "team_size": int(self.team_size),
            "ambient_lux": float(self.ambient_lux),
            "t_max": float(self.t_max),
            "cruise_speed": float(self.cruise_speed),
            "takeoff": self.takeoff.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MissionRequest":
        return cls(
            viewpoints=tuple(Viewpoint.from_dict(v) for v in d["viewpoints"]),
            team_size=int(d["team_size"]),
            ambient_lux=float(d["ambient_lux"]),
            t_max=float(d["t_max"]),
            cruise_speed=float(d["cruise_speed"]),
            takeoff=Pose.from_dict(d["takeoff"]) if "takeoff" in d else Pose(np.zeros(3)),
        )


@dataclass
class ViewpointIssue:
    index: int
    technique: str
    code: str
    message: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "technique": self.technique,
            "code": self.code,
            "message": self.message,
        }


@dataclass
class ValidationReport:
    ok: bool
    issues: list
    checked: int

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "issues": [i.to_dict() for i in self.issues],
        }


def validate_mission(req: MissionRequest) -> ValidationReport:
    """Check every viewpoint against team size, ambient light, and exposure
    constraints. Returns a report; never raises for constraint failures."""
    if not req.viewpoints:
        raise ParameterError("mission has no viewpoints")
    issues = []
    dark = req.ambient_lux < DARKNESS_LUX
    for i, vp in enumerate(req.viewpoints):
        spec = technique(vp.technique)
        realizable = spec.single_robot or (spec.multi_robot and req.team_size >= 2)
        if not realizable:
            issues.append(
                ViewpointIssue(
                    i, spec.id.value, "team_size",
                    f"{spec.id.value} needs a multi-robot team (team_size={req.team_size})",
                )
            )
        if spec.ambient_light is AmbientLight.FORBIDDEN and not dark:
            issues.append(
                ViewpointIssue(
                    i, spec.id.value, "ambient_forbidden",
                    f"{spec.id.value} forbids ambient light; measured "
                    f"{req.ambient_lux:g} lux >= {DARKNESS_LUX:g} lux darkness threshold",
                )
            )
        if spec.ambient_light is AmbientLight.REQUIRED and dark:
            issues.append(
                ViewpointIssue(
                    i, spec.id.value, "ambient_required",
                    f"{spec.id.value} requires ambient light; measured "
                    f"{req.ambient_lux:g} lux below {DARKNESS_LUX:g} lux",
                )
            )
        if (
            vp.camera_onboard
            and spec.exposure_s is not None
            and spec.exposure_s > CARRIER_EXPOSURE_LIMIT_S
        ):
            issues.append(
                ViewpointIssue(
                    i, spec.id.value, "exposure",
                    f"{spec.id.value} exposure {spec.exposure_s:g} s exceeds the "
                    f"{CARRIER_EXPOSURE_LIMIT_S:g} s camera-carrier limit; use a "
                    "static ground camera with aerial lighting",
                )
            )
    return ValidationReport(ok=not issues, issues=issues, checked=len(req.viewpoints))
