"""Command-line entry point.

Subcommands: ``anchors``, ``match-stats``, ``rf``, ``flops``, ``nms``,
``shift``.  Exit codes: 0 success, 1 usage error, 2 data error.  Output
goes to ``--output`` (written atomically) or standard output.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import reports
from .coco import AnnotationCorpus, CorpusError, RunConfig, load_corpus, \
    run_match_stats
from .encoder import EncoderSpec, rf_profile, scale_coverage
from .flops import DecoderSpec, EncoderTopology, encoder_decoder_flops
from .geometry import ImageSize, apply_shift, generate_anchors
from .postprocess import Detection, nms

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _parse_image(text: str) -> ImageSize:
    try:
        w, h = text.lower().split("x")
        return ImageSize(int(w), int(h))
    except ValueError:
        raise CorpusError(f"bad --image value {text!r}; expected WxH")


def _emit(text: str, output: str | None) -> None:
    if output:
        reports.write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _cmd_anchors(args) -> None:
    config = RunConfig.load(args.config)
    image = _parse_image(args.image)
    grid = generate_anchors(config.anchors, image)
    doc = {
        "image": {"width": image.width, "height": image.height},
        "stride": config.anchors.stride,
        "grid_h": grid.grid_h,
        "grid_w": grid.grid_w,
        "anchors_per_position": config.anchors.anchors_per_position,
        "count": len(grid),
    }
    _emit(reports.to_json(doc), args.output)


def _cmd_match_stats(args) -> None:
    config = RunConfig.load(args.config)
    if args.seed is not None:
        config = RunConfig(matcher=config.matcher,
                           matcher_params=config.matcher_params,
                           anchors=config.anchors, buckets=config.buckets,
                           shift_max=config.shift_max, seed=args.seed)
    corpus = load_corpus(args.input)
    dist, per_image, extras = run_match_stats(corpus, config)
    if args.format == "csv":
        _emit(reports.distribution_to_csv(dist), args.output)
    else:
        doc = reports.distribution_to_dict(dist, extras=extras,
                                           per_image=per_image)
        doc["seed"] = config.seed
        doc["dropped_annotations"] = corpus.dropped
        _emit(reports.to_json(doc), args.output)


def _cmd_rf(args) -> None:
    dilations = tuple(int(d) for d in args.dilations.split(",")) \
        if args.dilations else ()
    spec = EncoderSpec(num_blocks=len(dilations), dilations=dilations,
                       shortcuts=not args.no_shortcuts)
    profile = rf_profile(spec)
    bands, union, gaps = scale_coverage(profile, args.stride)
    doc = {
        "dilations": list(dilations),
        "shortcuts": spec.shortcuts,
        "extents": list(profile.extents),
        "max_extent": profile.max_extent,
        "pixel_coverage": profile.pixel_coverage(args.stride),
        "scale_bands": [list(b) for b in bands],
        "scale_union": [list(b) for b in union],
        "scale_gaps": [list(g) for g in gaps],
    }
    _emit(reports.to_json(doc), args.output)


def _cmd_flops(args) -> None:
    image = _parse_image(args.image)
    if args.topology.lower() == "yolof":
        topology = EncoderTopology.from_encoder_spec(EncoderSpec())
        decoder = DecoderSpec(cls_convs=2, reg_convs=4, channels=512,
                              anchors_per_position=5, objectness=True)
    else:
        topology = EncoderTopology.by_name(args.topology, args.channels)
        decoder = DecoderSpec(cls_convs=args.head_convs,
                              reg_convs=args.head_convs,
                              channels=args.channels,
                              anchors_per_position=args.anchors_per_position)
    report = encoder_decoder_flops(topology, decoder, image)
    doc = {
        "topology": report.topology,
        "image": {"width": image.width, "height": image.height},
        "encoder_macs": report.encoder_total,
        "decoder_macs": report.decoder_total,
        "total_macs": report.total,
        "per_level": report.per_level(),
        "encoder_layers": [
            {"name": n, "level": l, "macs": m}
            for n, l, m in report.encoder_layers],
        "decoder_layers": [
            {"name": n, "level": l, "macs": m}
            for n, l, m in report.decoder_layers],
        "notes": report.notes,
    }
    _emit(reports.to_json(doc), args.output)


def _load_detections(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: parse error at line {exc.lineno}: "
                              f"{exc.msg}") from exc
    if not isinstance(doc, list):
        raise CorpusError(f"{path}: expected an array of detections")
    dets = []
    for i, row in enumerate(doc):
        try:
            dets.append(Detection(box=tuple(float(v) for v in row["bbox"]),
                                  score=float(row["score"]),
                                  class_id=int(row["category_id"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{path}: bad detection #{i}: {exc}") from exc
    return dets


def _cmd_nms(args) -> None:
    dets = _load_detections(args.input)
    kept = nms(dets, iou_threshold=args.iou)
    doc = [{"bbox": list(dets[i].box), "score": dets[i].score,
            "category_id": dets[i].class_id} for i in kept]
    _emit(reports.to_json(doc), args.output)


def _cmd_shift(args) -> None:
    corpus = load_corpus(args.input)
    import numpy as np
    shifted = []
    for image_id, size in corpus.images:
        anns = [a for a in corpus.annotations if a.image_id == image_id]
        if not anns:
            continue
        rng = np.random.default_rng((args.seed, image_id))
        dx = int(rng.integers(-args.max_shift, args.max_shift + 1))
        dy = int(rng.integers(-args.max_shift, args.max_shift + 1))
        boxes, kept = apply_shift([a.box for a in anns], size, dx, dy)
        for b, k in zip(boxes, kept):
            a = anns[int(k)]
            shifted.append(
                type(a)(id=a.id, image_id=a.image_id,
                        box=tuple(float(v) for v in b),
                        category_id=a.category_id))
    out = AnnotationCorpus(images=corpus.images, annotations=shifted,
                           categories=corpus.categories,
                           dropped=corpus.dropped)
    _emit(reports.to_json(out.to_dict()), args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="yolof-assign",
                     description="Label assignment, receptive field, and "
                                 "FLOPs analysis for single-level detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anchors", help="count and describe the anchor grid")
    p.add_argument("--config", default="default")
    p.add_argument("--image", required=True, help="image size as WxH")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_anchors)

    p = sub.add_parser("match-stats",
                       help="run a matcher over a COCO-format corpus")
    p.add_argument("--config", default="default")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_match_stats)

    p = sub.add_parser("rf", help="analytic receptive-field profile")
    p.add_argument("--dilations", default="2,4,6,8",
                   help="comma-separated block dilations")
    p.add_argument("--no-shortcuts", action="store_true")
    p.add_argument("--stride", type=int, default=32)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_rf)

    p = sub.add_parser("flops", help="encoder+decoder MAC accounting")
    p.add_argument("--topology", default="siso",
                   help="mimo | simo | miso | siso | yolof")
    p.add_argument("--image", default="800x1280", help="image size as WxH")
    p.add_argument("--channels", type=int, default=256)
    p.add_argument("--head-convs", type=int, default=4)
    p.add_argument("--anchors-per-position", type=int, default=9)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_flops)

    p = sub.add_parser("nms", help="greedy NMS over a detection list")
    p.add_argument("--input", required=True)
    p.add_argument("--iou", type=float, default=0.6)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_nms)

    p = sub.add_parser("shift", help="random-shift corpus annotations")
    p.add_argument("--input", required=True)
    p.add_argument("--max-shift", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_shift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CorpusError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
