"""Command-line interface.

Subcommands: aggregate, ftest, decide, metrics, consequences, gen, serve.
Results go to stdout as JSON (or to --out); every randomized command takes
--seed. Exit codes: 0 success, 1 data/runtime error (single-line diagnostic
on stderr), 2 usage error.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import published
from .anova import GroupedAnswers, bootstrap_p
from .birdseye import birdseye_export
from .consequence import DEFAULT_ZONES, ZoneConfig, consequences
from .costmatrix import MeanLogCostMatrix, aggregate_answers, to_linear
from .decision import decide_map
from .errors import CostsightError
from .ingest import (
    FixtureSpec,
    formats,
    generate_answers,
    generate_fixture,
)
from .ingest.manifest import DatasetManifest
from .metrics import compute_metrics, confusion_counts
from .service import ENV_FIXTURES, ENV_PORT, ENV_STORE, create_app
from .taxonomy import COARSE_NAMES, ClassTaxonomy, DEFAULT_TAXONOMY


def _emit(args, payload):
    text = json.dumps(payload, indent=2)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load_costs(spec):
    """Preset name or matrix JSON path -> linear CostMatrix."""
    if spec in published.PRESET_NAMES:
        return published.preset(spec)
    m = formats.read_matrix(spec)
    if isinstance(m, MeanLogCostMatrix):
        return to_linear(m)
    return m


def _read_label_file(path):
    path = str(path)
    if path.endswith(".png"):
        return formats.read_label_png(path)
    return formats.read_lmap(path)


def _write_label_file(path, labels):
    path = str(path)
    if path.endswith(".png"):
        formats.write_label_png(path, labels)
    else:
        formats.write_lmap(path, labels)


def cmd_aggregate(args):
    answers = formats.read_answers(args.answers)
    group = {}
    if args.perspective:
        group["perspective"] = args.perspective
    if args.gender:
        group["gender"] = args.gender
    m = aggregate_answers(answers, group=group or None, mode=args.mode)
    if args.space == "linear":
        payload = to_linear(m, class_names=COARSE_NAMES).to_dict()
    else:
        payload = m.to_dict()
        payload["class_names"] = list(COARSE_NAMES)
    # every answer fills one column of n-1 cells
    payload["n_answers_selected"] = int(m.counts.sum()) // (m.n_classes - 1)
    _emit(args, payload)


def cmd_ftest(args):
    answers = formats.read_answers(args.answers)
    labels = tuple(args.labels.split(",")) if args.labels else None
    g = GroupedAnswers.from_answers(answers, args.split, labels=labels)
    result = bootstrap_p(g, shuffles=args.shuffles, seed=args.seed,
                         mode=args.mode)
    _emit(args, result.to_dict())


def _taxonomy_from(arg):
    if arg is None or arg == "default":
        return DEFAULT_TAXONOMY
    return ClassTaxonomy.from_json(arg)


def cmd_decide(args):
    cost = _load_costs(args.costs)
    pm = formats.read_pmap(args.pmap)
    ignore_mask = None
    if pm.shape[-1] != cost.n_classes:
        taxonomy = _taxonomy_from(args.taxonomy)
        coarse, dropped = taxonomy.aggregate_probabilities(pm)
        if coarse.shape[-1] != cost.n_classes:
            raise CostsightError(
                f"cannot reconcile {pm.shape[-1]} map channels with a "
                f"{cost.n_classes}-class matrix"
            )
        pm, ignore_mask = coarse, dropped
    labels = decide_map(pm, cost, ignore_mask=ignore_mask)
    _write_label_file(args.out, labels)
    hist = {str(k): int(v) for k, v in zip(*np.unique(labels,
                                                      return_counts=True))}
    print(json.dumps({
        "out": args.out,
        "height": labels.shape[0],
        "width": labels.shape[1],
        "label_histogram": hist,
    }, indent=2))


def _paired_label_files(pred, gt):
    pred, gt = Path(pred), Path(gt)
    if pred.is_dir() != gt.is_dir():
        raise CostsightError("--pred and --gt must both be files or both dirs")
    if not pred.is_dir():
        return [(pred, gt)]
    pairs = []
    for p in sorted(pred.iterdir()):
        if p.suffix not in (".lmap", ".png"):
            continue
        q = gt / p.name
        if not q.exists():
            raise CostsightError(f"no ground-truth file for {p.name}")
        pairs.append((p, q))
    if not pairs:
        raise CostsightError(f"no label maps under {pred}")
    return pairs


def cmd_metrics(args):
    counts = None
    for p, q in _paired_label_files(args.pred, args.gt):
        c = confusion_counts(_read_label_file(p), _read_label_file(q),
                             args.classes)
        counts = c if counts is None else counts + c
    names = COARSE_NAMES if args.classes == len(COARSE_NAMES) else None
    report = compute_metrics(counts, class_names=names)
    if args.table:
        print(report.to_table())
    else:
        _emit(args, report.to_dict())


def _labels_for_rule(arg_dir, arg_costs, manifest):
    if arg_dir:
        folder = Path(arg_dir)
        out = {}
        for image_id in manifest.image_ids:
            for ext in (".lmap", ".png"):
                path = folder / f"{image_id}{ext}"
                if path.exists():
                    out[image_id] = _read_label_file(path)
                    break
            else:
                raise CostsightError(
                    f"no prediction for image {image_id!r} under {folder}"
                )
        return out
    cost = _load_costs(arg_costs)
    return {
        image_id: decide_map(manifest.load_pmap(image_id), cost)
        for image_id in manifest.image_ids
    }


def cmd_consequences(args):
    manifest = DatasetManifest.load(args.manifest)
    if bool(args.pred_a) == bool(args.costs_a):
        raise CostsightError("give exactly one of --pred-a / --costs-a")
    if bool(args.pred_b) == bool(args.costs_b):
        raise CostsightError("give exactly one of --pred-b / --costs-b")
    pred_a = _labels_for_rule(args.pred_a, args.costs_a, manifest)
    pred_b = _labels_for_rule(args.pred_b, args.costs_b, manifest)
    gt = {i: manifest.load_gt(i) for i in manifest.image_ids}
    rasters = {i: manifest.load_instance_raster(i)
               for i in manifest.image_ids}
    records = manifest.load_instance_records()
    if args.zones:
        bounds = [float(x) for x in args.zones.split(",")]
        zones = ZoneConfig(tuple((f"within_{b:g}m", b) for b in bounds))
    else:
        zones = ZoneConfig(DEFAULT_ZONES)
    names = (args.costs_a or "a", args.costs_b or "b")
    report = consequences(pred_a, pred_b, gt, rasters, records, zones=zones,
                          threshold=args.threshold, rule_names=names)
    payload = report.to_dict()
    if args.svg:
        svg, points = birdseye_export(report)
        Path(args.svg).write_text(svg, encoding="utf-8")
        payload["birdseye"] = points
        payload["svg"] = args.svg
    _emit(args, payload)


def cmd_gen(args):
    spec = FixtureSpec(
        images=args.images,
        height=args.height,
        width=args.width,
        humans_per_image=args.humans,
        vehicles_per_image=args.vehicles,
        label_noise=args.noise,
    )
    manifest = generate_fixture(spec, seed=args.seed, out_dir=args.out_dir)
    payload = {"manifest": str(Path(args.out_dir) / "manifest.json"),
               "images": list(manifest.image_ids)}
    if args.answers:
        n = args.answers
        answers = generate_answers(
            {"passenger": (n + 1) // 2, "external": n // 2}, seed=args.seed
        )
        path = Path(args.out_dir) / "answers.jsonl"
        formats.write_answers(path, answers)
        payload["answers"] = str(path)
        payload["n_answers"] = n
    print(json.dumps(payload, indent=2))


def cmd_serve(args):
    import uvicorn

    app = create_app(store_path=args.store, fixtures_dir=args.fixtures,
                     ui_dir=args.ui)
    port = args.port or int(os.environ.get(ENV_PORT, "8099"))
    uvicorn.run(app, host=args.host, port=port)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="costsight",
        description="confusion-cost elicitation, cost-based decisions and "
                    "safety evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="average an answer corpus into a "
                                         "mean-log cost matrix")
    p.add_argument("--answers", required=True)
    p.add_argument("--perspective", choices=("passenger", "external"))
    p.add_argument("--gender")
    p.add_argument("--mode", choices=("exponent", "linear"),
                   default="exponent")
    p.add_argument("--space", choices=("log10", "linear"), default="log10")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("ftest", help="two-group bootstrap F-test")
    p.add_argument("--answers", required=True)
    p.add_argument("--split", default="perspective")
    p.add_argument("--labels", help="comma-separated pair for custom splits")
    p.add_argument("--shuffles", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("pooled", "per_target"),
                   default="pooled")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ftest)

    p = sub.add_parser("decide", help="apply a cost-based decision rule to "
                                      "a probability map")
    p.add_argument("--pmap", required=True)
    p.add_argument("--costs", required=True,
                   help="preset name (robot, passenger, external, female, "
                        "male) or matrix JSON path")
    p.add_argument("--taxonomy", help="taxonomy JSON for fine-to-coarse "
                                      "reduction (default: built-in)")
    p.add_argument("--out", required=True,
                   help="output label map (.lmap or .png)")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("metrics", help="IoU/recall/precision of predictions "
                                       "against ground truth")
    p.add_argument("--pred", required=True, help="label map file or directory")
    p.add_argument("--gt", required=True)
    p.add_argument("--classes", type=int, default=len(COARSE_NAMES))
    p.add_argument("--table", action="store_true",
                   help="aligned text table instead of JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("consequences", help="compare two rules on human "
                                            "instances in braking zones")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred-a", dest="pred_a")
    p.add_argument("--costs-a", dest="costs_a")
    p.add_argument("--pred-b", dest="pred_b")
    p.add_argument("--costs-b", dest="costs_b")
    p.add_argument("--zones", help="comma-separated max distances in meters")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--svg", help="also write a bird's-eye SVG here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_consequences)

    p = sub.add_parser("gen", help="generate a synthetic fixture dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--images", type=int, default=8)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--humans", type=int, default=3)
    p.add_argument("--vehicles", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--answers", type=int, default=0,
                   help="also generate a synthetic answer corpus this large")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--store", help=f"answer store path (${ENV_STORE})")
    p.add_argument("--fixtures", help=f"fixture dataset dir (${ENV_FIXTURES})")
    p.add_argument("--ui", help="static frontend bundle to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CostsightError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
