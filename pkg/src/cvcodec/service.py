"""HTTP service wrapping the codec pipeline.

File-producing endpoints (encode, decode, render) operate on paths visible
to the service process; the bundled CLI runs the app in-process by default,
so those paths are simply local files.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__, bitstream, pipeline, schemas
from .core import VideoMeta, level_preset
from .errors import CodecError, FormatError, InputError
from .fixtures import generate_fixture_corpus
from .imageio import write_frame

app = FastAPI(title="cvcodec", version=__version__)


@app.exception_handler(CodecError)
def _codec_error(request, exc: CodecError):
    body = schemas.ErrorBody(
        code=exc.code,
        message=exc.args[0] if exc.args else str(exc),
        offset=exc.offset if isinstance(exc, FormatError) else None,
    )
    return JSONResponse(status_code=400, content=body.model_dump())


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.get("/levels", response_model=list[schemas.LevelInfo])
def levels() -> list[schemas.LevelInfo]:
    return [level(level_id) for level_id in range(4)]


@app.get("/levels/{level_id}", response_model=schemas.LevelInfo)
def level(level_id: int) -> schemas.LevelInfo:
    preset = level_preset(level_id)
    return schemas.LevelInfo(
        level=preset.level_id,
        n_contours=preset.n_contours,
        pose_area_threshold=preset.pose_area_threshold,
        flow_stride=preset.flow_stride,
    )


@app.post("/rate", response_model=schemas.RateResponse)
def rate(req: schemas.RateRequest) -> schemas.RateResponse:
    params = bitstream.RateParams(
        q_kb=req.q_kb,
        clip_frames=req.clip_frames,
        fps=req.fps,
        people=req.people,
        height=req.height,
        width=req.width,
        flow_stride=req.flow_stride,
        n_contours=req.n_contours,
        curve_order=req.curve_order,
    )
    kbps = bitstream.compute_rate(params)
    meta = VideoMeta(req.width, req.height, req.fps, req.clip_frames)
    numbers = bitstream.condition_numbers_per_frame(
        req.people, req.height, req.width, req.flow_stride, req.n_contours, req.curve_order
    )
    return schemas.RateResponse(
        kbps=kbps,
        bpp=bitstream.compute_bpp(kbps, meta),
        numbers_per_frame=numbers,
        condition_bytes_per_frame=2 * numbers,
    )


@app.post("/encode", response_model=schemas.EncodeResponse)
def encode(req: schemas.EncodeRequest) -> schemas.EncodeResponse:
    if req.manifest_path is not None:
        manifest = pipeline.EncodeManifest.from_file(req.manifest_path)
    elif req.manifest is not None:
        manifest = pipeline.EncodeManifest.from_dict(req.manifest, req.base_dir)
    else:
        raise InputError("encode needs manifest_path or an inline manifest")
    if req.level is not None:
        manifest.level_id = req.level
    if req.interval is not None:
        manifest.interval = req.interval
    if req.dropout_seed is not None:
        manifest.dropout_seed = req.dropout_seed
    if req.dropout_ratio is not None:
        manifest.dropout_ratio = req.dropout_ratio

    stream, report = pipeline.encode_video(manifest)
    out_path = Path(req.out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(stream)
    report_path = out_path.with_suffix(out_path.suffix + ".report.json")
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return schemas.EncodeResponse(
        out_path=str(out_path),
        report_path=str(report_path),
        stream_bytes=report["stream_bytes"],
        clip_count=report["clip_count"],
        keyframe_count=report["keyframe_count"],
        intermediate_frames=report["intermediate_frames"],
        skipped_frames=report["skipped_frames"],
        stream_kbps=report["stream_kbps"],
        stream_bpp=report["stream_bpp"],
        clips=[schemas.ClipReport(**clip) for clip in report["clips"]],
    )


@app.post("/decode", response_model=schemas.DecodeResponse)
def decode(req: schemas.DecodeRequest) -> schemas.DecodeResponse:
    try:
        stream = Path(req.cvc_path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read stream: {exc}") from None
    decoded = pipeline.decode_video(stream)
    manifest = pipeline.dump_decoded(decoded, req.out_dir, req.image_format)
    return schemas.DecodeResponse(
        out_dir=req.out_dir,
        manifest_path=str(Path(req.out_dir) / "manifest.json"),
        clip_count=len(manifest["clips"]),
        clips=manifest["clips"],
    )


@app.post("/inspect", response_model=schemas.InspectResponse)
def inspect(req: schemas.InspectRequest) -> schemas.InspectResponse:
    try:
        stream = Path(req.cvc_path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read stream: {exc}") from None
    summary = pipeline.inspect_stream(stream)
    return schemas.InspectResponse(
        clip_count=summary["clip_count"],
        width=summary["width"],
        height=summary["height"],
        fps=summary["fps"],
        stream_bytes=summary["stream_bytes"],
        packages=[schemas.PackageInfo(**entry) for entry in summary["packages"]],
    )


@app.post("/render", response_model=schemas.RenderResponse)
def render(req: schemas.RenderRequest) -> schemas.RenderResponse:
    image = pipeline.render_condition_file(
        req.kind,
        req.input_path,
        level_id=req.level,
        curve_order=req.curve_order,
        stride=req.stride,
        width=req.width,
        height=req.height,
        frame_index=req.frame_index,
    )
    out = Path(req.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    final = write_frame(out, image, req.image_format)
    return schemas.RenderResponse(
        out_path=str(final), nonzero_pixels=int(np.count_nonzero(image.any(axis=2)))
    )


@app.post("/fixtures", response_model=schemas.FixtureResponse)
def fixtures(req: schemas.FixtureRequest) -> schemas.FixtureResponse:
    manifest_path = generate_fixture_corpus(
        req.out_dir,
        width=req.width,
        height=req.height,
        fps=req.fps,
        frame_count=req.frame_count,
    )
    return schemas.FixtureResponse(manifest_path=str(manifest_path))
