"""Command-line front end; a thin client over the codec service.

All subcommands talk to the service API. By default the service runs
in-process; point --server (or CVCODEC_SERVER) at a deployed instance to go
remote. Exit status is 0 on success and 1 on any codec error, which is
printed to stderr as one "CODE: message" line.
"""
from __future__ import annotations

import logging
import os
import sys

import click

from . import __version__, schemas
from .client import CodecClient, ServiceError
from .errors import CodecError

_LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warning": logging.WARNING}


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("CVCODEC_LOG", "warning").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _fail(code: str, message: str) -> None:
    click.echo(f"{code}: {message}", err=True)
    sys.exit(1)


def _client(ctx: click.Context) -> CodecClient:
    return CodecClient(base_url=ctx.obj.get("server"))


def _run(ctx: click.Context, call):
    client = _client(ctx)
    try:
        return call(client)
    except ServiceError as exc:
        _fail(exc.code, str(exc))
    except CodecError as exc:
        _fail(exc.code, str(exc))
    finally:
        client.close()


@click.group()
@click.version_option(__version__)
@click.option("--server", default=None, envvar="CVCODEC_SERVER", help="Base URL of a running service; default is in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Condition codec for generative video compression."""
    _configure_logging()
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--q", "q_kb", type=float, required=True, help="Keyframes + text size in KB.")
@click.option("--clip-frames", type=int, required=True, help="Clip length in frames.")
@click.option("--fps", type=int, required=True)
@click.option("--people", type=int, required=True, help="Retained person count.")
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--stride", "flow_stride", type=int, required=True, help="Flow sampling stride.")
@click.option("--contours", "n_contours", type=int, required=True, help="Contour budget per frame.")
@click.option("--order", "curve_order", type=int, default=8, show_default=True, help="Curve order.")
@click.pass_context
def rate(ctx, **kwargs) -> None:
    """Evaluate the bitrate formula and BPP without encoding anything."""
    response = _run(ctx, lambda c: c.rate(schemas.RateRequest(**kwargs)))
    click.echo(f"numbers_per_frame={response.numbers_per_frame}")
    click.echo(f"condition_bytes_per_frame={response.condition_bytes_per_frame}")
    click.echo(f"rate_kbps={response.kbps:.4f}")
    click.echo(f"bpp={response.bpp:.6f}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(), help="Encode manifest JSON.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output .cvc path.")
@click.option("--level", type=click.IntRange(0, 3), default=None, help="Override the manifest's level.")
@click.option("--interval", type=click.IntRange(min=1), default=None, help="Override the keyframe interval w.")
@click.option("--dropout-seed", type=int, default=None)
@click.option("--dropout-ratio", type=click.FloatRange(0.0, 1.0), default=None)
@click.pass_context
def encode(ctx, manifest_path, out_path, level, interval, dropout_seed, dropout_ratio) -> None:
    """Encode extractor outputs into a .cvc stream plus a rate report."""
    request = schemas.EncodeRequest(
        manifest_path=manifest_path,
        out_path=out_path,
        level=level,
        interval=interval,
        dropout_seed=dropout_seed,
        dropout_ratio=dropout_ratio,
    )
    response = _run(ctx, lambda c: c.encode(request))
    for clip in response.clips:
        roles = ",".join(f"{m}={r}" for m, r in sorted(clip.roles.items()))
        click.echo(
            f"clip {clip.index}: frames [{clip.start},{clip.end}] {roles} "
            f"rate_kbps={clip.rate_formula_kbps:.4f} bpp={clip.bpp:.6f} "
            f"audit_match={str(clip.audit_match).lower()}"
        )
    click.echo(f"clips={response.clip_count}")
    click.echo(f"keyframes={response.keyframe_count}")
    click.echo(f"skipped_frames={response.skipped_frames}")
    click.echo(f"stream_bytes={response.stream_bytes}")
    click.echo(f"stream_kbps={response.stream_kbps:.4f}")
    click.echo(f"stream_bpp={response.stream_bpp:.6f}")
    click.echo(f"wrote {response.out_path}")
    click.echo(f"report {response.report_path}")


@main.command()
@click.option("--in", "cvc_path", required=True, type=click.Path(), help="Input .cvc stream.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--format", "image_format", type=click.Choice(["png", "ppm"]), default="png", show_default=True)
@click.pass_context
def decode(ctx, cvc_path, out_dir, image_format) -> None:
    """Decode a stream into keyframes, captions, and modality frame dumps."""
    request = schemas.DecodeRequest(cvc_path=cvc_path, out_dir=out_dir, image_format=image_format)
    response = _run(ctx, lambda c: c.decode(request))
    for clip in response.clips:
        roles = ",".join(f"{m}={r}" for m, r in sorted(clip["roles"].items()))
        click.echo(f"clip {clip['index']}: frames [{clip['start']},{clip['end']}] {roles}")
    click.echo(f"clips={response.clip_count}")
    click.echo(f"manifest {response.manifest_path}")


@main.command()
@click.option("--in", "cvc_path", required=True, type=click.Path(), help="Input .cvc stream.")
@click.pass_context
def inspect(ctx, cvc_path) -> None:
    """Dump package headers, roles, and sizes of a stream."""
    response = _run(ctx, lambda c: c.inspect(schemas.InspectRequest(cvc_path=cvc_path)))
    click.echo(
        f"stream: clips={response.clip_count} {response.width}x{response.height}"
        f"@{response.fps}fps bytes={response.stream_bytes}"
    )
    for pkg in response.packages:
        roles = ",".join(f"{m}={r}" for m, r in sorted(pkg.roles.items()))
        click.echo(
            f"clip {pkg.index}: offset={pkg.offset} frames [{pkg.start},{pkg.end}] "
            f"level={pkg.level} {roles} stride={pkg.flow_stride} contours={pkg.n_contours} "
            f"order={pkg.curve_order} kf_bytes={pkg.first_kf_bytes}+{pkg.last_kf_bytes} "
            f"caption_bytes={pkg.caption_bytes} payload_bytes={pkg.condition_payload_bytes} "
            f"rate_kbps={pkg.rate_formula_kbps:.4f} audit_match={str(pkg.audit_match).lower()}"
        )


@main.command()
@click.option("--kind", type=click.Choice(["seg", "motion", "flow"]), required=True)
@click.option("--in", "input_path", required=True, type=click.Path(), help="Condition file (.pgm/.png, .jsonl, .flo).")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "image_format", type=click.Choice(["png", "ppm"]), default="png", show_default=True)
@click.option("--level", type=click.IntRange(0, 3), default=1, show_default=True)
@click.option("--order", "curve_order", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--stride", type=click.IntRange(min=1), default=None, help="Flow stride override.")
@click.option("--width", type=click.IntRange(min=1), default=None, help="Canvas width (motion).")
@click.option("--height", type=click.IntRange(min=1), default=None, help="Canvas height (motion).")
@click.option("--frame", "frame_index", type=click.IntRange(min=0), default=0, show_default=True, help="Frame index within a joint stream.")
@click.pass_context
def render(ctx, **kwargs) -> None:
    """Rasterize a single condition file for visual checking."""
    response = _run(ctx, lambda c: c.render(schemas.RenderRequest(**kwargs)))
    click.echo(f"nonzero_pixels={response.nonzero_pixels}")
    click.echo(f"wrote {response.out_path}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Directory for the synthetic corpus.")
@click.option("--width", type=click.IntRange(min=16), default=384, show_default=True)
@click.option("--height", type=click.IntRange(min=16), default=256, show_default=True)
@click.option("--fps", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--frames", "frame_count", type=click.IntRange(min=2), default=12, show_default=True)
@click.pass_context
def fixtures(ctx, **kwargs) -> None:
    """Generate a deterministic synthetic input corpus for testing."""
    response = _run(ctx, lambda c: c.fixtures(schemas.FixtureRequest(**kwargs)))
    click.echo(f"manifest {response.manifest_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the codec service with uvicorn."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
