"""Command-line interface: ``hsaliency {detect,batch,eval,synth}``.

Exit status is 0 on success, 1 when some inputs failed and 2 on usage,
configuration or input errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import evaluation, synth
from .imgproc import ImageFormatError, load_image, load_mask, write_saliency_map
from .inference import DegenerateInputError
from .pipeline import RunConfig, detect, dump_debug

log = logging.getLogger("hsaliency")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
IMAGE_EXTS = (".png", ".ppm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_from_args(args) -> RunConfig:
    if args.config:
        config = RunConfig.load(args.config)
    elif args.layers:
        config = RunConfig.for_layers(args.layers)
    else:
        config = RunConfig()
    d = config.to_dict()
    if args.layers and args.config and args.layers != len(d["thresholds"]):
        raise ValueError("--layers disagrees with the thresholds in --config")
    if args.mode:
        d["mode"] = args.mode
    if args.scale_measure:
        d["scaleMeasure"] = args.scale_measure
    if args.dump_layers:
        d["dumpLayers"] = True
    if args.dump_cues:
        d["dumpCues"] = True
    return RunConfig.from_dict(d)


def _list_images(directory: str) -> list[str]:
    return sorted(f for f in os.listdir(directory) if f.lower().endswith(IMAGE_EXTS))


def _stem(name: str) -> str:
    return os.path.splitext(name)[0]


def _run_one(image_path: str, out_path: str, config: RunConfig, verbose: bool = False) -> float:
    start = time.perf_counter()
    image = load_image(image_path)
    result = detect(image, config)
    write_saliency_map(result.saliency, out_path)
    if config.dump_layers or config.dump_cues:
        dump_debug(result, os.path.splitext(out_path)[0], config.dump_layers, config.dump_cues)
    if verbose and result.assignment.report is not None:
        print(result.assignment.report.to_json())
    return time.perf_counter() - start


def cmd_detect(args) -> int:
    config = _config_from_args(args)
    if args.dump_config:
        with open(args.dump_config, "w") as fh:
            fh.write(config.to_json())
    try:
        _run_one(args.image, args.output, config, verbose=args.verbose)
    except (OSError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _batch_task(task):
    name, image_path, out_path, config = task
    try:
        return name, _run_one(image_path, out_path, config), ""
    except Exception as exc:  # one bad image must not stop the batch
        return name, float("nan"), f"{type(exc).__name__}: {exc}"


def cmd_batch(args) -> int:
    config = _config_from_args(args)
    if args.dump_config:
        with open(args.dump_config, "w") as fh:
            fh.write(config.to_json())
    if not os.path.isdir(args.image_dir):
        print(f"error: {args.image_dir} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(args.output_dir, exist_ok=True)
    names = _list_images(args.image_dir)
    if not names:
        log.warning("no images found in %s", args.image_dir)
    tasks = [
        (name, os.path.join(args.image_dir, name), os.path.join(args.output_dir, _stem(name) + ".png"), config)
        for name in names
    ]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_task, tasks))
    else:
        results = [_batch_task(t) for t in tasks]

    failed = 0
    with open(os.path.join(args.output_dir, "timing.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["imageId", "seconds", "status"])
        for name, seconds, err in results:
            w.writerow([_stem(name), f"{seconds:.4f}", err or "ok"])
            if err:
                failed += 1
                log.error("%s: %s", name, err)
    if failed:
        log.warning("%d of %d images failed", failed, len(results))
        return EXIT_PARTIAL
    return EXIT_OK


def _by_stem(directory: str) -> dict[str, str]:
    return {_stem(f): os.path.join(directory, f) for f in _list_images(directory)}


def cmd_eval(args) -> int:
    for d in (args.map_dir, args.gt_dir):
        if not os.path.isdir(d):
            print(f"error: {d} is not a directory", file=sys.stderr)
            return EXIT_USAGE
    maps, gts = _by_stem(args.map_dir), _by_stem(args.gt_dir)
    unmatched = sorted(set(maps) ^ set(gts))
    if unmatched:
        log.warning("skipping %d unmatched basenames: %s", len(unmatched), ", ".join(unmatched))
    common = sorted(set(maps) & set(gts))
    if not common:
        log.warning("no image/mask pairs to evaluate")
        return EXIT_OK

    records, complexity, failed = [], [], 0
    for stem in common:
        try:
            sal = load_image(maps[stem]).mean(axis=2) / 255.0
            gt = load_mask(gts[stem])
            records.append(evaluation.pr_sweep(sal, gt, image_id=stem))
            if args.images:
                img_path = _by_stem(args.images).get(stem)
                if img_path:
                    complexity.append(evaluation.dataset_complexity(load_image(img_path), gt))
        except (OSError, ValueError) as exc:
            failed += 1
            log.error("%s: %s", stem, exc)
    if not records:
        return EXIT_PARTIAL
    summary = evaluation.aggregate(records, complexity or None)
    parent = os.path.dirname(os.path.abspath(args.output_prefix))
    os.makedirs(parent, exist_ok=True)
    evaluation.write_outputs(records, summary, args.output_prefix)
    if args.verbose:
        print(f"images={summary.n_images} bestF={summary.best_f:.4f} MAE={summary.mean_mae:.4f}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_synth(args) -> int:
    try:
        specs = synth.load_specs(args.spec_file)
        count = args.count if args.count is not None else len(specs)
        if count < 0:
            raise ValueError("count must be non-negative")
        synth.write_dataset(specs, args.output_dir, count)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="print convergence reports / summaries")

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--config", help="JSON run configuration")
    pipe.add_argument("--mode", choices=["chs", "hs"])
    pipe.add_argument("--scale-measure", choices=["encompass", "pixels"])
    pipe.add_argument("--layers", type=int, choices=[2, 3, 4, 5])
    pipe.add_argument("--dump-layers", action="store_true", help="write per-layer label maps")
    pipe.add_argument("--dump-cues", action="store_true", help="write per-layer cue maps")
    pipe.add_argument("--dump-config", metavar="PATH", help="write the effective configuration")

    parser = _Parser(prog="hsaliency", description="Hierarchical salient object detection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", parents=[common, pipe], help="saliency map for one image")
    p.add_argument("image")
    p.add_argument("output")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("batch", parents=[common, pipe], help="saliency maps for a directory")
    p.add_argument("image_dir")
    p.add_argument("output_dir")
    p.add_argument("--jobs", "-j", type=int, default=1)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("eval", parents=[common], help="benchmark maps against masks")
    p.add_argument("map_dir")
    p.add_argument("gt_dir")
    p.add_argument("output_prefix")
    p.add_argument("--images", help="source images, for the complexity histogram")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("spec_file")
    p.add_argument("output_dir")
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        # configuration problems surface here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
