import json

import pytest
from fastapi.testclient import TestClient

from cvcodec.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield test_client


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_levels(client):
    levels = client.get("/levels").json()
    assert [lv["level"] for lv in levels] == [0, 1, 2, 3]
    assert levels[0]["n_contours"] is None
    assert levels[3] == {
        "level": 3,
        "n_contours": 30,
        "pose_area_threshold": 0.1,
        "flow_stride": 64,
    }
    assert client.get("/levels/2").json()["flow_stride"] == 96


def test_rate_endpoint_worked_example(client):
    response = client.post(
        "/rate",
        json=dict(
            q_kb=20, clip_frames=81, fps=16, people=1, height=480, width=832,
            flow_stride=128, n_contours=10, curve_order=8,
        ),
    )
    body = response.json()
    assert response.status_code == 200
    assert body["numbers_per_frame"] == 258
    assert abs(body["kbps"] - 12.0131) < 1e-4
    assert abs(body["bpp"] - 0.01540) < 1e-5


def test_rate_endpoint_rejects_bad_stride(client):
    response = client.post(
        "/rate",
        json=dict(q_kb=1, clip_frames=10, fps=10, people=0, height=64, width=64,
                  flow_stride=100, n_contours=0),
    )
    assert response.status_code == 400
    assert response.json()["code"] == "E_ARG"


def test_rate_endpoint_validates_types(client):
    response = client.post("/rate", json=dict(q_kb=-1, clip_frames=10, fps=10, people=0,
                                              height=64, width=64, flow_stride=8, n_contours=0))
    assert response.status_code == 422  # pydantic bound


def test_encode_decode_inspect_render_flow(client, tmp_path, corpus_manifest_path):
    out_path = tmp_path / "video.cvc"
    response = client.post(
        "/encode", json={"manifest_path": str(corpus_manifest_path), "out_path": str(out_path)}
    )
    assert response.status_code == 200, response.text
    body = response.json()
    assert out_path.exists()
    assert body["clip_count"] == 2
    assert all(clip["audit_match"] for clip in body["clips"])
    report = json.loads((tmp_path / "video.cvc.report.json").read_text())
    assert report["clip_count"] == 2

    inspect = client.post("/inspect", json={"cvc_path": str(out_path)}).json()
    assert inspect["clip_count"] == 2
    assert inspect["packages"][0]["roles"] == {"seg": "present", "motion": "present", "flow": "present"}

    decode = client.post(
        "/decode",
        json={"cvc_path": str(out_path), "out_dir": str(tmp_path / "frames"), "image_format": "png"},
    )
    assert decode.status_code == 200
    assert (tmp_path / "frames" / "manifest.json").exists()
    assert len(decode.json()["clips"]) == 2

    render = client.post(
        "/render",
        json={
            "kind": "flow",
            "input_path": str(corpus_manifest_path.parent / "flow" / "frame_0001.flo"),
            "out_path": str(tmp_path / "arrows.png"),
            "level": 3,
        },
    )
    assert render.status_code == 200
    assert render.json()["nonzero_pixels"] > 0
    assert (tmp_path / "arrows.png").exists()


def test_encode_requires_a_manifest(client, tmp_path):
    response = client.post("/encode", json={"out_path": str(tmp_path / "x.cvc")})
    assert response.status_code == 400
    assert response.json()["code"] == "E_INPUT"


def test_decode_bad_stream_reports_format_error(client, tmp_path):
    bad = tmp_path / "bad.cvc"
    bad.write_bytes(b"CVCS\x01\x00garbage")
    response = client.post("/decode", json={"cvc_path": str(bad), "out_dir": str(tmp_path / "d")})
    assert response.status_code == 400
    body = response.json()
    assert body["code"] == "E_FORMAT"
    assert body["offset"] is not None


def test_encode_with_overrides(client, tmp_path, corpus_manifest_path):
    out_path = tmp_path / "l0.cvc"
    response = client.post(
        "/encode",
        json={
            "manifest_path": str(corpus_manifest_path),
            "out_path": str(out_path),
            "level": 0,
            "interval": 4,
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["clip_count"] == 4  # w=4 with the shot at 7: [0,4],[4,7],[8,11],[11,12]
    for clip in body["clips"]:
        assert set(clip["roles"].values()) == {"absent"}


def test_encode_with_inline_manifest(client, tmp_path, corpus_manifest_path):
    manifest = json.loads(corpus_manifest_path.read_text())
    out_path = tmp_path / "inline.cvc"
    response = client.post(
        "/encode",
        json={
            "manifest": manifest,
            "base_dir": str(corpus_manifest_path.parent),
            "out_path": str(out_path),
        },
    )
    assert response.status_code == 200, response.text
    assert out_path.exists()
    assert response.json()["clip_count"] == 2


def test_fixture_endpoint(client, tmp_path):
    response = client.post(
        "/fixtures",
        json={"out_dir": str(tmp_path / "gen"), "width": 160, "height": 128, "frame_count": 4},
    )
    assert response.status_code == 200
    manifest_path = response.json()["manifest_path"]
    assert json.loads(open(manifest_path).read())["video"]["frame_count"] == 4
