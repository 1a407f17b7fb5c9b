"""Command-line driver tying the pipeline together.

Exit codes: 0 success, 1 validation/usage error, 2 IO or format error.
Progress notes go to stderr (suppressed by --quiet); results and CSV go
to stdout unless an --out path is given.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import math
import os
import sys

from . import io as fileio
from .attribution import agg_mean, sea_attribute, sea_pipeline, top_p_select
from .baselines import BASELINE_METHODS, baseline_heatmap
from .classifier import make_planted_dataset, train_classifier
from .errors import FormatError, SeannError
from .evaluation import aupc, format_results_csv, jaccard_topk, robustness_iou
from .trainer import TrainingSet, train

log = logging.getLogger("seann")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--quiet", action="store_true", help="suppress progress notes")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="seann", description=__doc__)
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train-dsf", help="learn a scoring network from heatmap files")
    p.add_argument("--heatmaps", nargs="+", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="objective CSV (default <out>.report.csv)")
    _add_common(p)

    p = sub.add_parser("attribute", help="marginal-gain attribution from a scoring network")
    p.add_argument("--dsf", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--shape", default=None, help="HxW of the output map (default: square)")
    _add_common(p)

    p = sub.add_parser("pipeline", help="end-to-end attribution for one image")
    p.add_argument("--classifier", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--methods", default="vg,ig,sg")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("baseline", help="run one baseline attribution method")
    p.add_argument("--classifier", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--method", required=True, choices=[*BASELINE_METHODS, "aggmean"])
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("eval", help="evaluation metrics, emitted as CSV")
    esub = p.add_subparsers(dest="metric", required=True, parser_class=_Parser)

    e = esub.add_parser("aupc")
    e.add_argument("--classifier", required=True)
    e.add_argument("--image", required=True)
    e.add_argument("--map", required=True)
    e.add_argument("--mode", choices=["patch", "topk"], default="patch")
    e.add_argument("--patch-side", type=int, default=8)
    e.add_argument("--steps", type=int, default=8)
    e.add_argument("--pixels-per-step", type=int, default=None)
    e.add_argument("--fill", type=float, default=0.0)
    e.add_argument("--out", default=None)
    e.add_argument("--image-id", default="0")
    e.add_argument("--method-name", default="map")
    _add_common(e)

    e = esub.add_parser("jaccard")
    e.add_argument("--map-a", required=True)
    e.add_argument("--map-b", required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--out", default=None)
    e.add_argument("--image-id", default="0")
    _add_common(e)

    e = esub.add_parser("robustness")
    e.add_argument("--classifier", required=True)
    e.add_argument("--image", required=True)
    e.add_argument("--method", required=True, choices=[*BASELINE_METHODS, "aggmean", "sea"])
    e.add_argument("--noise", type=float, default=0.02)
    e.add_argument("--top", type=int, default=None)
    e.add_argument("--config", default=None)
    e.add_argument("--out", default=None)
    e.add_argument("--image-id", default="0")
    _add_common(e)

    p = sub.add_parser("topk", help="top-p non-redundant feature set of a scoring network")
    p.add_argument("--dsf", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("render", help="render a heatmap to PGM (PPM with --overlay)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overlay", default=None)
    _add_common(p)

    p = sub.add_parser("make-dataset", help="emit the synthetic planted-patch dataset")
    p.add_argument("--synthetic", choices=["planted"], default="planted")
    p.add_argument("--out", required=True)
    p.add_argument("--n-images", type=int, default=40)
    p.add_argument("--side", type=int, default=16)
    p.add_argument("--patch-side", type=int, default=3)
    p.add_argument("--train-classifier", action="store_true",
                   help="also train and store a classifier on the dataset")
    _add_common(p)

    return root


def _note(args, msg: str):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _method_map(method, clf, image, args, run_cfg):
    if method == "aggmean":
        parts = [
            baseline_heatmap(m, clf, image, seed=args.seed) for m in ("vg", "ig", "sg")
        ]
        return agg_mean(parts)
    if method == "sea":
        cfg = run_cfg.train
        cfg.seed = args.seed
        return sea_pipeline(
            clf, image, run_cfg.methods, cfg,
            grid=run_cfg.grid, hidden_dims=run_cfg.hidden_dims,
            ig_steps=run_cfg.ig_steps, sg_samples=run_cfg.sg_samples,
            sg_sigma=run_cfg.sg_sigma,
        )
    return baseline_heatmap(method, clf, image, seed=args.seed)


def _emit(args, text: str):
    if getattr(args, "out", None):
        fileio.atomic_write(args.out, text.encode())
    else:
        sys.stdout.write(text)


def _cmd_train_dsf(args) -> int:
    run_cfg = fileio.load_run_config(args.config)
    cfg = run_cfg.train
    cfg.seed = args.seed
    maps = [fileio.read_heatmap(p) for p in args.heatmaps]
    data = TrainingSet.from_heatmaps(maps, cfg.thresholds)
    _note(args, f"training on {len(maps)} maps ({data.n} pixels), "
                f"{len(data.binary_maps)} binarizations")
    net, report = train(data, cfg, None if run_cfg.hidden_dims is None else
                        _arch_for(data.n, run_cfg.hidden_dims))
    fileio.write_dsf(args.out, net)
    report_path = args.report or args.out + ".report.csv"
    buf = _io.StringIO()
    w = csv.writer(buf)
    w.writerow(["epoch", "objective", "hinge_active"])
    for i, (obj, act) in enumerate(zip(report.objectives, report.hinge_active)):
        w.writerow([i, f"{obj:.10g}", act])
    w.writerow(["final", f"{report.final_objective:.10g}", ""])
    fileio.atomic_write(report_path, buf.getvalue().encode())
    _note(args, f"objective {report.objectives[0]:.6g} -> {report.final_objective:.6g}, "
                f"wall {report.wall_time:.2f}s")
    return 0


def _arch_for(n, hidden_dims):
    from .dsf import DsfArchitecture

    return DsfArchitecture((n, *hidden_dims, 1))


def _cmd_attribute(args) -> int:
    net = fileio.read_dsf(args.dsf)
    n = net.input_dim
    if args.shape:
        try:
            h, w = (int(t) for t in args.shape.lower().split("x"))
        except ValueError:
            raise _UsageError(f"bad --shape {args.shape!r}, expected HxW")
    else:
        root = math.isqrt(n)
        h, w = (root, root) if root * root == n else (1, n)
    amap = sea_attribute(net, height=h, width=w)
    fileio.write_heatmap(args.out, amap.as_heatmap())
    _note(args, f"attributed {n} features -> {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    run_cfg = fileio.load_run_config(args.config)
    clf = fileio.read_classifier(args.classifier)
    image = fileio.read_heatmap(args.image)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    cfg = run_cfg.train
    cfg.seed = args.seed
    amap = sea_pipeline(
        clf, image, methods, cfg,
        grid=run_cfg.grid, hidden_dims=run_cfg.hidden_dims,
        ig_steps=run_cfg.ig_steps, sg_samples=run_cfg.sg_samples,
        sg_sigma=run_cfg.sg_sigma,
    )
    fileio.write_heatmap(args.out, amap.as_heatmap())
    _note(args, f"pipeline map ({amap.height}x{amap.width}) -> {args.out}")
    return 0


def _cmd_baseline(args) -> int:
    clf = fileio.read_classifier(args.classifier)
    image = fileio.read_heatmap(args.image)
    out = _method_map(args.method, clf, image, args, fileio.load_run_config(None))
    fileio.write_heatmap(args.out, out)
    _note(args, f"{args.method} map -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    if args.metric == "aupc":
        clf = fileio.read_classifier(args.classifier)
        image = fileio.read_heatmap(args.image)
        amap = fileio.read_heatmap(args.map)
        curve = aupc(
            clf, image, amap, mode=args.mode, patch_side=args.patch_side,
            steps=args.steps, pixels_per_step=args.pixels_per_step,
            perturb_value=args.fill,
        )
        _emit(args, format_results_csv(
            [(args.image_id, args.method_name, "aupc", curve.aupc)]
        ))
        return 0
    if args.metric == "jaccard":
        a = fileio.read_heatmap(args.map_a)
        b = fileio.read_heatmap(args.map_b)
        val = jaccard_topk(a, b, args.k)
        _emit(args, format_results_csv(
            [(args.image_id, "pair", f"jaccard_top{args.k}", val)]
        ))
        return 0
    clf = fileio.read_classifier(args.classifier)
    image = fileio.read_heatmap(args.image)
    run_cfg = fileio.load_run_config(args.config)

    def attribute_fn(c, im):
        return _method_map(args.method, c, im, args, run_cfg)

    val = robustness_iou(
        attribute_fn, clf, image, noise_amp=args.noise, top=args.top, seed=args.seed
    )
    _emit(args, format_results_csv(
        [(args.image_id, args.method, "robustness_iou", val)]
    ))
    return 0


def _cmd_topk(args) -> int:
    net = fileio.read_dsf(args.dsf)
    chosen = top_p_select(net, args.k)
    print(" ".join(str(i) for i in sorted(chosen)))
    return 0


def _cmd_render(args) -> int:
    amap = fileio.read_heatmap(args.infile)
    overlay = fileio.read_heatmap(args.overlay) if args.overlay else None
    fileio.render_pgm(amap, args.out, overlay=overlay)
    _note(args, f"rendered -> {args.out}")
    return 0


def _cmd_make_dataset(args) -> int:
    dataset = make_planted_dataset(
        args.n_images, args.side, args.patch_side, seed=args.seed
    )
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for i, (img, label) in enumerate(zip(dataset.images, dataset.labels)):
        name = f"img_{i:04d}.hm"
        fileio.write_heatmap(os.path.join(args.out, name), img)
        rows.append((name, int(label)))
    buf = _io.StringIO()
    w = csv.writer(buf)
    w.writerow(["image", "label"])
    w.writerows(rows)
    fileio.atomic_write(os.path.join(args.out, "labels.csv"), buf.getvalue().encode())
    masks = {str(c): sorted(m) for c, m in enumerate(dataset.planted_masks)}
    fileio.atomic_write(
        os.path.join(args.out, "masks.json"),
        json.dumps(masks, indent=1).encode(),
    )
    if args.train_classifier:
        clf = train_classifier(dataset, seed=args.seed)
        fileio.write_classifier(os.path.join(args.out, "classifier.bin"), clf)
        _note(args, f"classifier train accuracy {clf.train_accuracy:.3f}")
    _note(args, f"wrote {len(rows)} images to {args.out}")
    return 0


_COMMANDS = {
    "train-dsf": _cmd_train_dsf,
    "attribute": _cmd_attribute,
    "pipeline": _cmd_pipeline,
    "baseline": _cmd_baseline,
    "eval": _cmd_eval,
    "topk": _cmd_topk,
    "render": _cmd_render,
    "make-dataset": _cmd_make_dataset,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not getattr(args, "quiet", False):
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SeannError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
