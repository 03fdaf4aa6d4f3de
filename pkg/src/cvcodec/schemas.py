"""Pydantic request/response models for the HTTP service and the CLI client."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class LevelInfo(BaseModel):
    level: int
    n_contours: Optional[int] = None
    pose_area_threshold: Optional[float] = None
    flow_stride: Optional[int] = None


class RateRequest(BaseModel):
    q_kb: float = Field(ge=0)
    clip_frames: int = Field(ge=2)
    fps: int = Field(ge=1)
    people: int = Field(ge=0)
    height: int = Field(ge=1)
    width: int = Field(ge=1)
    flow_stride: int = Field(ge=1)
    n_contours: int = Field(ge=0)
    curve_order: int = Field(default=8, ge=1)


class RateResponse(BaseModel):
    kbps: float
    bpp: float
    numbers_per_frame: int
    condition_bytes_per_frame: int


class EncodeRequest(BaseModel):
    manifest_path: Optional[str] = None
    manifest: Optional[dict] = None
    base_dir: str = "."
    out_path: str
    level: Optional[int] = Field(default=None, ge=0, le=3)
    interval: Optional[int] = Field(default=None, ge=1)
    dropout_seed: Optional[int] = None
    dropout_ratio: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class ClipReport(BaseModel):
    index: int
    start: int
    end: int
    frames: int
    roles: dict[str, str]
    q_kb: float
    people: int
    rate_formula_kbps: float
    rate_measured_kbps: float
    audit_match: bool
    bpp: float
    condition_payload_bytes: int
    container_overhead_bytes: int


class EncodeResponse(BaseModel):
    out_path: str
    report_path: str
    stream_bytes: int
    clip_count: int
    keyframe_count: int
    intermediate_frames: int
    skipped_frames: int
    stream_kbps: float
    stream_bpp: float
    clips: list[ClipReport]


class DecodeRequest(BaseModel):
    cvc_path: str
    out_dir: str
    image_format: Literal["png", "ppm"] = "png"


class DecodeResponse(BaseModel):
    out_dir: str
    manifest_path: str
    clip_count: int
    clips: list[dict]


class InspectRequest(BaseModel):
    cvc_path: str


class PackageInfo(BaseModel):
    index: int
    offset: int
    start: int
    end: int
    level: int
    roles: dict[str, str]
    flow_stride: int
    n_contours: int
    curve_order: int
    first_kf_bytes: int
    last_kf_bytes: int
    caption_bytes: int
    condition_payload_bytes: int
    rate_formula_kbps: float
    rate_measured_kbps: float
    audit_match: bool


class InspectResponse(BaseModel):
    clip_count: int
    width: int
    height: int
    fps: int
    stream_bytes: int
    packages: list[PackageInfo]


class RenderRequest(BaseModel):
    kind: Literal["seg", "motion", "flow"]
    input_path: str
    out_path: str
    image_format: Literal["png", "ppm"] = "png"
    level: int = Field(default=1, ge=0, le=3)
    curve_order: int = Field(default=8, ge=1)
    stride: Optional[int] = Field(default=None, ge=1)
    width: Optional[int] = Field(default=None, ge=1)
    height: Optional[int] = Field(default=None, ge=1)
    frame_index: int = Field(default=0, ge=0)


class RenderResponse(BaseModel):
    out_path: str
    nonzero_pixels: int


class FixtureRequest(BaseModel):
    out_dir: str
    width: int = Field(default=384, ge=16)
    height: int = Field(default=256, ge=16)
    fps: int = Field(default=8, ge=1)
    frame_count: int = Field(default=12, ge=2)


class FixtureResponse(BaseModel):
    manifest_path: str


class ErrorBody(BaseModel):
    code: str
    message: str
    offset: Optional[int] = None
