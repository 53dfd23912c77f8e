import json

import numpy as np
import pytest

from aerialdoc.errors import ParameterError
from aerialdoc.techniques import (
    AmbientLight,
    MissionRequest,
    Pose,
    TechniqueId,
    TechniqueSpec,
    Viewpoint,
    dwell_time,
    technique,
    technique_catalog,
    validate_mission,
)


def vp(tid, onboard=True, pos=(0, 0, 2.0), ooi=(0, 5.0, 3.0)):
    return Viewpoint(Pose(np.array(pos)), np.array(ooi), TechniqueId(tid), True, onboard)


def request(techniques, team_size=1, ambient_lux=0.0, onboard=True):
    return MissionRequest(
        viewpoints=tuple(vp(t, onboard) for t in techniques),
        team_size=team_size,
        ambient_lux=ambient_lux,
        t_max=600.0,
        cruise_speed=1.0,
    )


class TestCatalog:
    def test_vis_row(self):
        spec = technique("VIS")
        assert spec.exposure_s == 0.2
        assert spec.single_robot and not spec.multi_robot
        assert spec.ambient_light is AmbientLight.REQUIRED

    def test_rti_row(self):
        spec = technique("RTI")
        assert spec.ambient_light is AmbientLight.FORBIDDEN
        assert spec.single_robot and spec.multi_robot

    def test_irf_exposure(self):
        assert technique("IRF").exposure_s == 30.0

    def test_exposure_table(self):
        expected = {
            "VIS": 0.2, "RAK": 0.2, "TPL": 0.2, "RTI": 0.2,
            "UVF": 2.0, "UVR": 2.0, "VISTR": 2.0, "IRR": 4.0,
            "IRRTR": 20.0, "VIVL": 25.0, "IRF": 30.0, "RADIOGRAPHY": 30.0,
        }
        for tid, exp in expected.items():
            assert technique(tid).exposure_s == exp, tid

    def test_every_technique_realizable(self):
        for spec in technique_catalog():
            assert spec.single_robot or spec.multi_robot

    def test_catalog_roundtrip_bit_exact(self):
        once = json.dumps([s.to_dict() for s in technique_catalog()], sort_keys=True)
        back = [TechniqueSpec.from_dict(d) for d in json.loads(once)]
        again = json.dumps([s.to_dict() for s in back], sort_keys=True)
        assert once == again
        assert back == technique_catalog()

    def test_unknown_technique_rejected(self):
        with pytest.raises(ParameterError):
            technique("XRAYVISION")


class TestDwellTime:
    def test_vis(self):
        assert dwell_time("VIS") == pytest.approx(1.2)

    def test_uvr(self):
        assert dwell_time("UVR") == pytest.approx(3.0)

    def test_zero_margin_equals_exposure(self):
        for tid in ("VIS", "IRR", "IRF"):
            assert dwell_time(tid, margin=0.0) == technique(tid).exposure_s

    def test_no_exposure_technique_margin_only(self):
        assert dwell_time("RECON3D") == pytest.approx(1.0)


class TestValidateMission:
    def test_rti_with_ambient_rejected(self):
        report = validate_mission(request(["RTI"], ambient_lux=500.0))
        assert not report.ok
        assert report.issues[0].code == "ambient_forbidden"

    def test_tpl_single_robot_rejected(self):
        report = validate_mission(request(["TPL"], team_size=1))
        assert not report.ok
        assert report.issues[0].code == "team_size"

    def test_irf_onboard_camera_rejected_with_suggestion(self):
        report = validate_mission(request(["IRF"], team_size=2))
        assert not report.ok
        assert report.issues[0].code == "exposure"
        assert "static" in report.issues[0].message

    def test_irf_static_camera_accepted(self):
        report = validate_mission(request(["IRF"], team_size=2, onboard=False))
        assert report.ok

    def test_vis_single_robot_accepted(self):
        report = validate_mission(request(["VIS"], ambient_lux=300.0))
        assert report.ok

    def test_vis_in_darkness_rejected(self):
        report = validate_mission(request(["VIS"], ambient_lux=0.0))
        assert not report.ok
        assert report.issues[0].code == "ambient_required"

    def test_monotone_in_team_size(self):
        for tid in TechniqueId:
            spec = technique(tid)
            lux = 0.0 if spec.ambient_light is not AmbientLight.REQUIRED else 300.0
            accepted_at = None
            for n in (1, 2, 3, 4):
                report = validate_mission(
                    request([tid.value], team_size=n, ambient_lux=lux, onboard=False)
                )
                if report.ok and accepted_at is None:
                    accepted_at = n
                if accepted_at is not None:
                    assert report.ok, f"{tid} accepted at {accepted_at} but not {n}"

    def test_empty_viewpoints_raise(self):
        req = MissionRequest(
            viewpoints=(), team_size=1, ambient_lux=0.0, t_max=100.0, cruise_speed=1.0
        )
        with pytest.raises(ParameterError):
            validate_mission(req)

    def test_issue_indexes_point_at_offenders(self):
        req = request(["VIS", "RTI", "VIS"], ambient_lux=500.0)
        report = validate_mission(req)
        assert [i.index for i in report.issues] == [1]


class TestTypes:
    def test_mission_request_roundtrip(self):
        req = request(["VIS", "RAK"], team_size=2, ambient_lux=50.0)
        back = MissionRequest.from_dict(req.to_dict())
        assert back.to_dict() == req.to_dict()

    def test_viewpoint_coincident_target_rejected(self):
        with pytest.raises(ParameterError):
            Viewpoint(Pose(np.zeros(3)), np.zeros(3), TechniqueId.VIS)

    def test_request_invariants(self):
        with pytest.raises(ParameterError):
            MissionRequest((), 0, 0.0, 10.0, 1.0)
        with pytest.raises(ParameterError):
            MissionRequest((), 1, 0.0, -1.0, 1.0)
