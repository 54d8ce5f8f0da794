"""``edibench`` command line: fetch, run, montage, plot.

A config file holds ``key = value`` lines (``#`` comments allowed); any
command-line flag overrides the file.  Keys match the long flag names with
underscores, plus every interpolation and Canny setting::

    input_dir = data/natural
    methods = bilinear,bicubic,dcci
    factor_exp = 1
    roi = monarch:200,150,32,32; sail:40,40,32,32
    nedi_window = 8
    canny_sigma = 1.4142
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
from pathlib import Path

from .bench import METRIC_NAMES, BenchConfig, run_benchmark
from .edges import CannyParams
from .fetch import FetchError, fetch_dataset
from .interp import ALL_METHODS, BACKEND, InterpConfig, MethodId
from .raster import PixelRect

_SECTION = "edibench"
_INTERP_KEYS = {f.name: f.type for f in dataclasses.fields(InterpConfig)}
_CANNY_KEYS = {"canny_sigma": "sigma", "canny_high_percentile": "high_percentile", "canny_low_ratio": "low_ratio"}
_PLAIN_KEYS = {"input_dir", "output_dir", "methods", "factor_exp", "metrics", "roi", "jobs",
               "timing_repeats", "edge_tolerance", "plots"}


def read_config(path) -> dict[str, str]:
    """Parse a sectionless key-value file into a dict of raw strings."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from None
    values = dict(parser[_SECTION])
    unknown = set(values) - _PLAIN_KEYS - set(_INTERP_KEYS) - set(_CANNY_KEYS)
    if unknown:
        raise ValueError(f"{path}: unknown key(s) {', '.join(sorted(unknown))}")
    return values


def _methods(text: str) -> tuple:
    return tuple(MethodId.parse(t) for t in text.split(",") if t.strip())


def _rois(items) -> tuple:
    out = []
    for item in items:
        for part in item.split(";"):
            part = part.strip()
            if not part:
                continue
            image_id, sep, rect = part.rpartition(":")
            if not sep or not image_id:
                raise ValueError(f"ROI {part!r} must look like image_id:x0,y0,w,h")
            out.append((image_id, PixelRect.parse(rect)))
    return tuple(out)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _typed(value: str, kind):
    kind = {"int": int, "float": float}.get(kind, kind)
    return kind(value)


def build_bench_config(args, file_values: dict[str, str]) -> BenchConfig:
    v = dict(file_values)
    for key in ("input_dir", "output_dir", "methods", "factor_exp", "metrics", "jobs", "timing_repeats",
                "edge_tolerance"):
        flag = getattr(args, key, None)
        if flag is not None:
            v[key] = str(flag)
    roi = getattr(args, "roi", None)
    if isinstance(roi, list):  # run's repeatable flag; montage's single --roi is not a bench setting
        v["roi"] = ";".join(roi)
    if getattr(args, "no_plots", False):
        v["plots"] = "false"
    for key in ("input_dir", "output_dir"):
        if key not in v:
            raise ValueError(f"missing required setting {key.replace('_', '-')}")
    interp = InterpConfig(**{k: _typed(v[k], t) for k, t in _INTERP_KEYS.items() if k in v})
    canny = CannyParams(**{attr: float(v[k]) for k, attr in _CANNY_KEYS.items() if k in v})
    return BenchConfig(
        input_dir=Path(v["input_dir"]),
        output_dir=Path(v["output_dir"]),
        methods=_methods(v["methods"]) if "methods" in v else ALL_METHODS,
        factor_exp=int(v.get("factor_exp", 1)),
        metrics=tuple(t.strip() for t in v["metrics"].split(",")) if "metrics" in v else METRIC_NAMES,
        canny=canny,
        interp=interp,
        roi_list=_rois([v["roi"]]) if v.get("roi") else (),
        jobs=int(v.get("jobs", 1)),
        timing_repeats=int(v.get("timing_repeats", 3)),
        edge_tolerance=int(v.get("edge_tolerance", 0)),
        plots=_bool(v.get("plots", "true")),
    )


def _add_bench_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--input-dir", dest="input_dir")
    p.add_argument("--methods", help="comma-separated: " + ",".join(m.value for m in MethodId))
    p.add_argument("--factor-exp", dest="factor_exp", type=int, help="enlarge by 2**n (1..4)")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edibench", description="Interpolation quality benchmark.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fetch", help="download a dataset from a URL manifest")
    f.add_argument("--manifest", required=True)
    f.add_argument("--dest", required=True)

    r = sub.add_parser("run", help="score every image in a directory")
    _add_bench_flags(r)
    r.add_argument("--out", dest="output_dir")
    r.add_argument("--metrics", help="comma-separated subset of " + ",".join(METRIC_NAMES))
    r.add_argument("--roi", action="append", help="image_id:x0,y0,w,h (repeatable)")
    r.add_argument("--jobs", type=int, help="worker processes for the scoring phase")
    r.add_argument("--timing-repeats", dest="timing_repeats", type=int)
    r.add_argument("--edge-tolerance", dest="edge_tolerance", type=int)
    r.add_argument("--no-plots", action="store_true")

    m = sub.add_parser("montage", help="ROI strip: truth then each method, 4x magnified")
    _add_bench_flags(m)
    m.add_argument("--image", required=True, help="image id (file name without extension)")
    m.add_argument("--roi", required=True, help="x0,y0,w,h in ground-truth pixels (1-indexed)")
    m.add_argument("--out", required=True, help="output PNG path")
    m.add_argument("--colour", action="store_true", help="upscale R, G, B separately")

    p = sub.add_parser("plot", help="SVG chart(s) from a records CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--metric", default="all", help="metric name or 'all'")
    p.add_argument("--out", required=True, help="output directory")
    return ap


def _cmd_fetch(args) -> int:
    rep = fetch_dataset(args.manifest, args.dest)
    print(f"downloaded {len(rep.downloaded)}, skipped {len(rep.skipped)}, failed {len(rep.failed)}")
    for url, reason in rep.failed:
        print(f"  failed: {url}: {reason}", file=sys.stderr)
    return 0


def _cmd_run(args) -> int:
    values = read_config(args.config) if args.config else {}
    cfg = build_bench_config(args, values)
    res = run_benchmark(cfg)
    print(f"backend {BACKEND}; {len(res.records)} records from {res.summary.n_images} image(s)")
    for label, path in res.outputs.items():
        print(f"  {label}: {path}")
    for path, reason in res.skipped:
        print(f"  skipped {path}: {reason}", file=sys.stderr)
    return 0


def _cmd_montage(args) -> int:
    from .report import render_roi_montage

    values = read_config(args.config) if args.config else {}
    values.setdefault("output_dir", str(Path(args.out).parent))
    cfg = build_bench_config(args, values)
    path = render_roi_montage(cfg, args.image, PixelRect.parse(args.roi), colour=args.colour, path=args.out)
    print(path)
    return 0


def _cmd_plot(args) -> int:
    from .report import read_csv, render_metric_plot

    records = read_csv(args.csv)
    names = METRIC_NAMES if args.metric == "all" else (args.metric,)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        target = out / f"{name}.svg"
        render_metric_plot(records, name, target)
        print(target)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"fetch": _cmd_fetch, "run": _cmd_run, "montage": _cmd_montage, "plot": _cmd_plot}[args.command]
    try:
        return handler(args)
    except (ValueError, FileNotFoundError, FetchError, OSError) as exc:
        print(f"edibench {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
