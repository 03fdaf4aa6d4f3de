"""End-to-end orchestration: manifest in, .cvc stream out, and back to
rendered modality videos plus a reconstruction manifest.

The decode side stops exactly where a downstream generative model would take
over: it emits the keyframe blobs, the caption, and the three dense modality
videos (all-black for dropped-out or absent conditions, with the role
preserved so the consumer can tell the two apart).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bitstream
from .clips import Clip, segment_clips, select_keyframes, read_shot_probs
from .core import (
    MODALITIES,
    ConditionFlags,
    ModalityRole,
    VideoMeta,
    level_preset,
    make_dropout_plan,
)
from .errors import InputError, InvalidArgument
from .flow import FlowGrid, read_flo, render_flow_arrows, sample_flow_grid
from .imageio import read_label_map, write_frame
from .motion import MAX_PEOPLE, PoseFrame, filter_poses, read_joint_frames, render_motion_frame
from .raster import blank
from .segmentation import DEFAULT_CURVE_ORDER, encode_seg_frame, render_seg_frame

DEFAULT_INTERVAL = 32
DEFAULT_LEVEL = 1


def _resolve_sequence(source, base_dir: Path, count: int, name: str) -> list[Path] | None:
    """Turn a path list or an index pattern into ``count`` concrete paths."""
    if source is None:
        return None
    if isinstance(source, str):
        if "{" not in source and "%" not in source:
            raise InputError(f"{name}: pattern {source!r} has no {{index}} or %d placeholder")
        try:
            if "{" in source:
                paths = [base_dir / source.format(index=i) for i in range(count)]
            else:
                paths = [base_dir / (source % i) for i in range(count)]
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise InputError(f"{name}: bad pattern {source!r}: {exc}") from None
    else:
        paths = [base_dir / p for p in source]
        if len(paths) != count:
            raise InputError(f"{name}: got {len(paths)} entries, expected {count}")
    return paths


@dataclass
class EncodeManifest:
    """Everything the encoder needs, with paths resolved against base_dir."""

    meta: VideoMeta
    keyframes: list[Path]
    level_id: int = DEFAULT_LEVEL
    interval: int = DEFAULT_INTERVAL
    shot_threshold: float = 0.5
    curve_order: int = DEFAULT_CURVE_ORDER
    shot_probs: list[float] | None = None
    label_maps: list[Path] | None = None
    flows: list[Path] | None = None
    joints_path: Path | None = None
    clip_caption_paths: list[Path] | None = None
    clip_caption_texts: list[str] | None = None
    video_caption: str = ""
    dropout_seed: int | None = None
    dropout_ratio: float = 0.0

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path = ".") -> "EncodeManifest":
        base_dir = Path(base_dir)
        try:
            video = data["video"]
            meta = VideoMeta(
                width=int(video["width"]),
                height=int(video["height"]),
                fps=int(video["fps"]),
                frame_count=int(video["frame_count"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"manifest video block is invalid: {exc}") from None
        frames = meta.total_frames

        if "keyframes" not in data:
            raise InputError("manifest is missing the keyframes sequence")
        keyframes = _resolve_sequence(data["keyframes"], base_dir, frames, "keyframes")

        probs = None
        if data.get("shot_probs_inline") is not None:
            probs = [float(p) for p in data["shot_probs_inline"]]
        elif data.get("shot_probs"):
            probs = read_shot_probs(base_dir / data["shot_probs"])

        caption_paths = None
        caption_texts = None
        video_caption = ""
        if data.get("captions") is not None:
            caption_paths = [base_dir / p for p in data["captions"]]
        elif data.get("captions_inline") is not None:
            caption_texts = [str(t) for t in data["captions_inline"]]
        elif data.get("caption"):
            video_caption = (base_dir / data["caption"]).read_text()
        elif data.get("caption_text") is not None:
            video_caption = str(data["caption_text"])

        dropout = data.get("dropout") or {}
        return cls(
            meta=meta,
            keyframes=keyframes,
            level_id=int(data.get("level", DEFAULT_LEVEL)),
            interval=int(data.get("interval", DEFAULT_INTERVAL)),
            shot_threshold=float(data.get("shot_threshold", 0.5)),
            curve_order=int(data.get("curve_order", DEFAULT_CURVE_ORDER)),
            shot_probs=probs,
            label_maps=_resolve_sequence(data.get("label_maps"), base_dir, frames, "label_maps"),
            flows=_resolve_sequence(data.get("flows"), base_dir, frames, "flows"),
            joints_path=base_dir / data["joints"] if data.get("joints") else None,
            clip_caption_paths=caption_paths,
            clip_caption_texts=caption_texts,
            video_caption=video_caption,
            dropout_seed=int(dropout["seed"]) if "seed" in dropout else None,
            dropout_ratio=float(dropout.get("ratio", 0.0)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "EncodeManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read manifest {path}: {exc}") from None
        return cls.from_dict(data, path.parent)


def _clip_captions(manifest: EncodeManifest, clip_count: int) -> list[str]:
    if manifest.clip_caption_paths is not None:
        if len(manifest.clip_caption_paths) != clip_count:
            raise InputError(
                f"captions: got {len(manifest.clip_caption_paths)} files for {clip_count} clips"
            )
        return [p.read_text() for p in manifest.clip_caption_paths]
    if manifest.clip_caption_texts is not None:
        if len(manifest.clip_caption_texts) != clip_count:
            raise InputError(
                f"captions_inline: got {len(manifest.clip_caption_texts)} for {clip_count} clips"
            )
        return list(manifest.clip_caption_texts)
    return [manifest.video_caption] * clip_count


def _role(level_param, input_available: bool, planned: ModalityRole) -> ModalityRole:
    if level_param is None or not input_available:
        return ModalityRole.ABSENT
    return planned


def _read_labels(path: Path, meta: VideoMeta, frame: int) -> np.ndarray:
    labels = read_label_map(path)
    if labels.shape != (meta.height, meta.width):
        raise InputError(
            f"label_maps: frame {frame} is {labels.shape[1]}x{labels.shape[0]}, "
            f"expected {meta.width}x{meta.height}"
        )
    return labels


def _read_flow(path: Path, meta: VideoMeta, frame: int) -> np.ndarray:
    fieldarr = read_flo(path)
    if fieldarr.shape[:2] != (meta.height, meta.width):
        raise InputError(
            f"flows: frame {frame} is {fieldarr.shape[1]}x{fieldarr.shape[0]}, "
            f"expected {meta.width}x{meta.height}"
        )
    return fieldarr


def plan_clips(manifest: EncodeManifest) -> list[Clip]:
    """Keyframe selection and clip segmentation for a manifest."""
    probs = manifest.shot_probs
    if probs is None:
        probs = [0.0] * manifest.meta.frame_count
    if len(probs) != manifest.meta.frame_count:
        raise InputError(
            f"shot_probs: got {len(probs)} values, expected frame_count = "
            f"{manifest.meta.frame_count}"
        )
    marks = select_keyframes(probs, manifest.interval, manifest.shot_threshold)
    return segment_clips(marks)


def encode_video(manifest: EncodeManifest) -> tuple[bytes, dict]:
    """Encode a manifest into a .cvc stream plus a rate report."""
    meta = manifest.meta
    clips = plan_clips(manifest)
    level = level_preset(manifest.level_id)
    captions = _clip_captions(manifest, len(clips))

    if manifest.dropout_ratio > 0.0:
        seed = manifest.dropout_seed if manifest.dropout_seed is not None else 0
        plan = make_dropout_plan(seed, manifest.dropout_ratio, len(clips))
    else:
        plan = [ConditionFlags.all_of(ModalityRole.PRESENT)] * len(clips)

    joint_frames = None
    if manifest.joints_path is not None:
        joint_frames = read_joint_frames(manifest.joints_path)
        if len(joint_frames) != meta.total_frames:
            raise InputError(
                f"joints: got {len(joint_frames)} frames, expected {meta.total_frames}"
            )

    packages = []
    clip_reports = []
    for index, clip in enumerate(clips):
        flags = ConditionFlags(
            seg=_role(level.n_contours, manifest.label_maps is not None, plan[index].seg),
            motion=_role(level.pose_area_threshold, joint_frames is not None, plan[index].motion),
            flow=_role(level.flow_stride, manifest.flows is not None, plan[index].flow),
        )
        seg_codes = []
        motion_codes = []
        flow_codes = []
        for frame in clip.intermediate_indices():
            if flags.seg is ModalityRole.PRESENT:
                labels = _read_labels(manifest.label_maps[frame], meta, frame)
                seg_codes.append(encode_seg_frame(labels, level, manifest.curve_order))
            if flags.motion is ModalityRole.PRESENT:
                kept = filter_poses(
                    joint_frames[frame], level.pose_area_threshold, meta.height, meta.width
                )
                if kept.people > MAX_PEOPLE:
                    raise InputError(f"joints: frame {frame} has more than {MAX_PEOPLE} people")
                motion_codes.append(
                    PoseFrame([bitstream.bf16_round_array(p) for p in kept.poses], kept.threshold)
                )
            if flags.flow is ModalityRole.PRESENT:
                grid = sample_flow_grid(_read_flow(manifest.flows[frame], meta, frame), level.flow_stride)
                flow_codes.append(FlowGrid(grid.stride, bitstream.bf16_round_array(grid.vectors)))

        try:
            first_kf = manifest.keyframes[clip.start].read_bytes()
            last_kf = manifest.keyframes[clip.end].read_bytes()
        except OSError as exc:
            raise InputError(f"keyframes: {exc}") from None

        pkg = bitstream.ClipPackage(
            width=meta.width,
            height=meta.height,
            fps=meta.fps,
            clip=clip,
            level_id=manifest.level_id,
            flags=flags,
            first_kf=first_kf,
            last_kf=last_kf,
            caption=captions[index],
            flow_stride=level.flow_stride or 0,
            n_contours=level.n_contours or 0,
            curve_order=manifest.curve_order if level.n_contours else 0,
            seg_codes=seg_codes,
            motion_codes=motion_codes,
            flow_codes=flow_codes,
        )
        packages.append(pkg)
        audit = bitstream.audit_rate(pkg)
        clip_reports.append(
            {
                "index": index,
                "start": clip.start,
                "end": clip.end,
                "frames": clip.frames,
                "roles": {m: flags.role(m).wire_name for m in MODALITIES},
                "q_kb": audit.q_kb,
                "people": audit.people,
                "rate_formula_kbps": audit.r_formula,
                "rate_measured_kbps": audit.r_measured,
                "audit_match": audit.match,
                "bpp": bitstream.compute_bpp(audit.r_measured, meta),
                "condition_payload_bytes": audit.condition_payload_bytes,
                "container_overhead_bytes": audit.count_bytes + audit.header_bytes,
            }
        )

    stream = bitstream.write_stream(packages)
    covered: set[int] = set()
    endpoints: set[int] = set()
    for clip in clips:
        covered.update(range(clip.start, clip.end + 1))
        endpoints.update((clip.start, clip.end))
    payload_kb = sum(r["q_kb"] + r["condition_payload_bytes"] / 1024.0 for r in clip_reports)
    duration = meta.total_frames / meta.fps
    stream_kbps = payload_kb / duration
    report = {
        "video": {
            "width": meta.width,
            "height": meta.height,
            "fps": meta.fps,
            "frame_count": meta.frame_count,
        },
        "level": manifest.level_id,
        "interval": manifest.interval,
        "curve_order": manifest.curve_order,
        "clip_count": len(clips),
        "clips": clip_reports,
        "keyframe_count": len(endpoints),
        "intermediate_frames": sum(c.intermediate_count for c in clips),
        "skipped_frames": meta.total_frames - len(covered),
        "stream_bytes": len(stream),
        "stream_kbps": stream_kbps,
        "stream_bpp": bitstream.compute_bpp(stream_kbps, meta),
    }
    return stream, report


@dataclass
class ModalityVideo:
    """Rendered frames of one condition modality for one clip."""

    modality: str
    role: ModalityRole
    frames: list[np.ndarray] = field(default_factory=list)


@dataclass
class DecodedClip:
    index: int
    clip: Clip
    level_id: int
    flags: ConditionFlags
    caption: str
    first_kf: bytes
    last_kf: bytes
    seg: ModalityVideo
    motion: ModalityVideo
    flow: ModalityVideo
    audit: bitstream.RateAudit

    def modality_video(self, modality: str) -> ModalityVideo:
        return {"seg": self.seg, "motion": self.motion, "flow": self.flow}[modality]


@dataclass
class DecodedVideo:
    width: int
    height: int
    fps: int
    clips: list[DecodedClip]


def decode_video(stream: bytes) -> DecodedVideo:
    """Decode a .cvc stream into per-clip keyframes, captions, and rendered
    modality videos (all-black frames for non-present roles)."""
    packages, _ = bitstream.read_stream(stream)
    if not packages:
        raise InvalidArgument("stream contains no clips")
    width, height, fps = packages[0].width, packages[0].height, packages[0].fps
    decoded = []
    for index, pkg in enumerate(packages):
        n_frames = pkg.clip.intermediate_count
        black = blank(pkg.height, pkg.width)
        videos = {}
        for modality, codes, render in (
            ("seg", pkg.seg_codes, lambda c: render_seg_frame(c, pkg.height, pkg.width)),
            ("motion", pkg.motion_codes, lambda c: render_motion_frame(c, pkg.height, pkg.width)),
            ("flow", pkg.flow_codes, lambda c: render_flow_arrows(c, pkg.height, pkg.width)),
        ):
            role = pkg.flags.role(modality)
            if role is ModalityRole.PRESENT:
                frames = [render(code) for code in codes]
            else:
                frames = [black.copy() for _ in range(n_frames)]
            videos[modality] = ModalityVideo(modality, role, frames)
        decoded.append(
            DecodedClip(
                index=index,
                clip=pkg.clip,
                level_id=pkg.level_id,
                flags=pkg.flags,
                caption=pkg.caption,
                first_kf=pkg.first_kf,
                last_kf=pkg.last_kf,
                seg=videos["seg"],
                motion=videos["motion"],
                flow=videos["flow"],
                audit=bitstream.audit_rate(pkg),
            )
        )
    return DecodedVideo(width=width, height=height, fps=fps, clips=decoded)


def dump_decoded(decoded: DecodedVideo, out_dir: str | Path, image_format: str = "png") -> dict:
    """Write keyframes, captions, and modality frames under out_dir and
    return the reconstruction manifest (also written as manifest.json)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "width": decoded.width,
        "height": decoded.height,
        "fps": decoded.fps,
        "image_format": image_format,
        "clips": [],
    }
    for clip in decoded.clips:
        clip_dir = out_dir / f"clip_{clip.index:04d}"
        clip_dir.mkdir(parents=True, exist_ok=True)
        (clip_dir / "first_keyframe.bin").write_bytes(clip.first_kf)
        (clip_dir / "last_keyframe.bin").write_bytes(clip.last_kf)
        (clip_dir / "caption.txt").write_text(clip.caption)
        frame_paths: dict[str, list[str]] = {}
        for modality in MODALITIES:
            video = clip.modality_video(modality)
            mod_dir = clip_dir / modality
            mod_dir.mkdir(parents=True, exist_ok=True)
            paths = []
            for offset, frame in enumerate(video.frames):
                frame_index = clip.clip.start + 1 + offset
                path = write_frame(mod_dir / f"frame_{frame_index:06d}", frame, image_format)
                paths.append(str(path.relative_to(out_dir)))
            frame_paths[modality] = paths
        manifest["clips"].append(
            {
                "index": clip.index,
                "start": clip.clip.start,
                "end": clip.clip.end,
                "level": clip.level_id,
                "roles": {m: clip.flags.role(m).wire_name for m in MODALITIES},
                "caption": clip.caption,
                "keyframe_bytes": {"first": len(clip.first_kf), "last": len(clip.last_kf)},
                "audit": {
                    "rate_formula_kbps": clip.audit.r_formula,
                    "rate_measured_kbps": clip.audit.r_measured,
                    "match": clip.audit.match,
                },
                "frames": frame_paths,
            }
        )
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def inspect_stream(stream: bytes) -> dict:
    """Summarize package headers, roles, and sizes without rendering."""
    packages, offsets = bitstream.read_stream(stream)
    entries = []
    for index, (pkg, offset) in enumerate(zip(packages, offsets)):
        audit = bitstream.audit_rate(pkg)
        entries.append(
            {
                "index": index,
                "offset": offset,
                "start": pkg.clip.start,
                "end": pkg.clip.end,
                "level": pkg.level_id,
                "roles": {m: pkg.flags.role(m).wire_name for m in MODALITIES},
                "flow_stride": pkg.flow_stride,
                "n_contours": pkg.n_contours,
                "curve_order": pkg.curve_order,
                "first_kf_bytes": len(pkg.first_kf),
                "last_kf_bytes": len(pkg.last_kf),
                "caption_bytes": len(pkg.caption.encode()),
                "condition_payload_bytes": audit.condition_payload_bytes,
                "rate_formula_kbps": audit.r_formula,
                "rate_measured_kbps": audit.r_measured,
                "audit_match": audit.match,
            }
        )
    return {
        "clip_count": len(packages),
        "width": packages[0].width if packages else 0,
        "height": packages[0].height if packages else 0,
        "fps": packages[0].fps if packages else 0,
        "stream_bytes": len(stream),
        "packages": entries,
    }


def render_condition_file(
    kind: str,
    input_path: str | Path,
    *,
    level_id: int = DEFAULT_LEVEL,
    curve_order: int = DEFAULT_CURVE_ORDER,
    stride: int | None = None,
    width: int | None = None,
    height: int | None = None,
    frame_index: int = 0,
) -> np.ndarray:
    """Rasterize a single condition file for visual checking."""
    level = level_preset(level_id)
    if kind == "seg":
        labels = read_label_map(input_path)
        if level.n_contours is None:
            raise InvalidArgument("level 0 has no segmentation parameters; use level 1..3")
        code = encode_seg_frame(labels, level, curve_order)
        return render_seg_frame(code, labels.shape[0], labels.shape[1])
    if kind == "flow":
        fieldarr = read_flo(input_path)
        use_stride = stride if stride is not None else level.flow_stride
        if use_stride is None:
            raise InvalidArgument("level 0 has no flow stride; pass one explicitly")
        grid = sample_flow_grid(fieldarr, use_stride)
        return render_flow_arrows(grid, fieldarr.shape[0], fieldarr.shape[1])
    if kind == "motion":
        if not width or not height:
            raise InvalidArgument("motion rendering needs explicit width and height")
        frames = read_joint_frames(input_path)
        if not 0 <= frame_index < len(frames):
            raise InvalidArgument(f"frame_index {frame_index} outside 0..{len(frames) - 1}")
        return render_motion_frame(frames[frame_index], height, width)
    raise InvalidArgument(f"unknown condition kind {kind!r}")
