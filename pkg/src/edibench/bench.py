"""Downsample, upscale, score: the benchmark protocol and its aggregation.

For each image: luminance, ``n`` corner-sampling halvings, a ``2**n``
upscale with every configured method, then all metrics on the top-left
region both images share (the ``2**n * (h - 1) + 1`` rows/cols the upscaler
actually interpolated).  Scores are computed first, optionally in parallel;
timings are taken afterwards in a serial phase so no worker competes with
the clock.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import metrics as M
from .edges import CannyParams, EdgeMap, canny, epr_accuracy, epr_robustness
from .interp import ALL_METHODS, InterpConfig, MethodId, _upscale_array, time_upscale
from .raster import ImageFormatError, PixelRect, RasterImage, downsample_dyadic, is_image_file, load_image, to_luminance

log = logging.getLogger(__name__)

__all__ = [
    "METRIC_NAMES",
    "RECORD_FIELDS",
    "BenchConfig",
    "MetricRecord",
    "SummaryTable",
    "BenchResult",
    "run_benchmark",
    "prepare_image",
    "summarize",
]

METRIC_NAMES = ("snr", "psnr", "ssim", "fsim", "mi", "time_cost_s", "epra", "eprr")
RECORD_FIELDS = ("image_id", "method") + METRIC_NAMES
MAX_FACTOR_EXP = 4

FLAG_NO_REF_EDGES = "reference-has-no-edges"


@dataclass(frozen=True)
class BenchConfig:
    input_dir: Path
    output_dir: Path
    methods: tuple = ALL_METHODS
    factor_exp: int = 1
    metrics: tuple = METRIC_NAMES
    canny: CannyParams = CannyParams()
    interp: InterpConfig = InterpConfig()
    roi_list: tuple = ()  # (image_id, PixelRect) pairs
    jobs: int = 1
    timing_repeats: int = 3
    edge_tolerance: int = 0
    plots: bool = True

    def __post_init__(self):
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "methods", tuple(MethodId.parse(m) for m in self.methods))
        if not self.methods:
            raise ValueError("at least one method is required")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods")
        bad = [m for m in self.metrics if m not in METRIC_NAMES]
        if bad:
            raise ValueError(f"unknown metric(s) {bad}; choose from {', '.join(METRIC_NAMES)}")
        object.__setattr__(self, "metrics", tuple(m for m in METRIC_NAMES if m in self.metrics))
        if not 1 <= self.factor_exp <= MAX_FACTOR_EXP:
            raise ValueError(f"factor exponent must be in 1..{MAX_FACTOR_EXP}, got {self.factor_exp}")
        if self.jobs < 1 or self.timing_repeats < 1:
            raise ValueError("jobs and timing_repeats must be >= 1")

    def digest(self) -> str:
        """sha256 of every setting that can change a score."""
        payload = {
            "methods": [m.value for m in self.methods],
            "factor_exp": self.factor_exp,
            "metrics": list(self.metrics),
            "canny": asdict(self.canny),
            "interp": asdict(self.interp),
            "roi_list": [[i, [r.x0, r.y0, r.w, r.h]] for i, r in self.roi_list],
            "timing_repeats": self.timing_repeats,
            "edge_tolerance": self.edge_tolerance,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


@dataclass
class MetricRecord:
    image_id: str
    method: MethodId
    snr: float = math.nan
    psnr: float = math.nan
    ssim: float = math.nan
    fsim: float = math.nan
    mi: float = math.nan
    time_cost_s: float = math.nan
    epra: float = math.nan
    eprr: float = math.nan
    flags: tuple = ()

    def value(self, name: str) -> float:
        return getattr(self, name)


@dataclass
class SummaryTable:
    methods: list
    means: dict  # MethodId -> {metric: mean}
    n_images: int
    tc_ratio: dict = field(default_factory=dict)  # MethodId -> TC / TC(bilinear)

    def mean(self, method, metric: str) -> float:
        return self.means[MethodId.parse(method)][metric]


@dataclass
class BenchResult:
    records: list
    summary: SummaryTable
    skipped: list  # (path, reason)
    outputs: dict  # label -> path


# ------------------------------------------------------------------ protocol

def prepare_image(hr: RasterImage, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Luminance ground truth and its ``n``-times corner-sampled LR plane."""
    y = to_luminance(hr)
    lr = y
    for _ in range(n):
        lr = downsample_dyadic(lr)
    return y.data, lr.data


def common_size(lr_shape, n: int) -> tuple[int, int]:
    h, w = lr_shape
    return (2 ** n) * (h - 1) + 1, (2 ** n) * (w - 1) + 1


def _score_image(path: str, cfg: BenchConfig) -> list[MetricRecord]:
    hr = load_image(path)
    image_id = Path(path).stem
    truth, lr = prepare_image(hr, cfg.factor_exp)
    rows, cols = common_size(lr.shape, cfg.factor_exp)
    ref = truth[:rows, :cols]
    want = set(cfg.metrics)
    need_edges = bool(want & {"epra", "eprr"})
    ems = canny(ref, cfg.canny) if need_edges else None
    records = []
    for method in cfg.methods:
        out = _upscale_array(lr, method, cfg.factor_exp, cfg.interp)[:rows, :cols]
        rec = MetricRecord(image_id, method)
        if "snr" in want:
            rec.snr = M.snr(ref, out)
        if "psnr" in want:
            rec.psnr = M.psnr(ref, out)
        if "ssim" in want:
            rec.ssim = M.ssim(ref, out)
        if "fsim" in want:
            rec.fsim = M.fsim(ref, out)
        if "mi" in want:
            rec.mi = M.mutual_information(ref, out)
        if need_edges:
            emi = canny(out, cfg.canny)
            rec.eprr = epr_robustness(ems, emi, cfg.edge_tolerance)
            if ems.count == 0:
                rec.flags = (FLAG_NO_REF_EDGES,)
            else:
                rec.epra = epr_accuracy(ems, emi, cfg.edge_tolerance)
            if "eprr" not in want:
                rec.eprr = math.nan
        records.append(rec)
    return records


def list_inputs(input_dir: Path) -> list[Path]:
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory {input_dir} does not exist")
    return sorted(p for p in input_dir.iterdir() if p.is_file() and is_image_file(p))


def _usable(path: Path, n: int) -> str | None:
    """Reason the image cannot enter the protocol, or None."""
    try:
        hr = load_image(path)
        prepare_image(hr, n)
    except (ImageFormatError, ValueError) as exc:
        return str(exc)
    return None


def summarize(records, methods) -> SummaryTable:
    methods = [MethodId.parse(m) for m in methods]
    means = {}
    for m in methods:
        rows = [r for r in records if r.method == m]
        means[m] = {}
        for name in METRIC_NAMES:
            vals = np.array([r.value(name) for r in rows], dtype=float)
            finite = vals[~np.isnan(vals)]
            means[m][name] = float(np.mean(finite)) if finite.size else math.nan
    n_images = len({r.image_id for r in records})
    ratio = {}
    base = means.get(MethodId.BILINEAR, {}).get("time_cost_s", math.nan)
    if base and not math.isnan(base):
        ratio = {m: means[m]["time_cost_s"] / base for m in methods}
    return SummaryTable(methods, means, n_images, ratio)


def _time_all(paths, cfg, records) -> None:
    by_key = {(r.image_id, r.method): r for r in records}
    for path in paths:
        _, lr = prepare_image(load_image(path), cfg.factor_exp)
        lr_img = RasterImage(lr)
        for method in cfg.methods:
            res = time_upscale(lr_img, method, cfg.factor_exp, cfg.interp, repeats=cfg.timing_repeats)
            by_key[(Path(path).stem, method)].time_cost_s = res.elapsed_seconds


def run_benchmark(cfg: BenchConfig) -> BenchResult:
    """Score every image under ``cfg.input_dir`` and write all reports to ``cfg.output_dir``."""
    from . import report

    candidates = list_inputs(cfg.input_dir)
    skipped, paths = [], []
    for p in candidates:
        reason = _usable(p, cfg.factor_exp)
        if reason is None:
            paths.append(p)
        else:
            log.warning("skipping %s: %s", p, reason)
            skipped.append((str(p), reason))
    if not paths:
        raise ValueError(f"no usable images in {cfg.input_dir}")

    if cfg.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(paths))) as pool:
            chunks = list(pool.map(_score_image, [str(p) for p in paths], [cfg] * len(paths)))
    else:
        chunks = [_score_image(str(p), cfg) for p in paths]
    records = [r for chunk in chunks for r in chunk]
    if "time_cost_s" in cfg.metrics:
        _time_all(paths, cfg, records)
    summary = summarize(records, cfg.methods)

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    outputs = {
        "csv": out / "records.csv",
        "summary": out / "summary.md",
        "manifest": out / "manifest.txt",
    }
    report.render_csv(records, outputs["csv"])
    report.render_summary_markdown(summary, outputs["summary"])
    if cfg.plots:
        plot_dir = out / "plots"
        plot_dir.mkdir(exist_ok=True)
        for name in cfg.metrics:
            target = plot_dir / f"{name}.svg"
            report.render_metric_plot(records, name, target)
            outputs[f"plot:{name}"] = target
    for image_id, roi in cfg.roi_list:
        outputs[f"montage:{image_id}"] = report.render_roi_montage(cfg, image_id, roi)
    _write_manifest(outputs["manifest"], cfg, paths, skipped, records)
    return BenchResult(records, summary, skipped, outputs)


def _write_manifest(path: Path, cfg: BenchConfig, paths, skipped, records) -> None:
    lines = [
        "# edibench run manifest",
        f"config_sha256 {cfg.digest()}",
        f"factor_exp {cfg.factor_exp}",
        f"methods {','.join(m.value for m in cfg.methods)}",
        f"metrics {','.join(cfg.metrics)}",
        f"images {len(paths)}",
    ]
    for p in paths:
        digest = hashlib.sha256(Path(p).read_bytes()).hexdigest()
        lines.append(f"input {digest} {Path(p).name}")
    for p, reason in skipped:
        lines.append(f"skipped {Path(p).name} {reason}")
    for r in records:
        for f in r.flags:
            lines.append(f"flag {r.image_id} {r.method.value} {f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def with_overrides(cfg: BenchConfig, **kw) -> BenchConfig:
    return replace(cfg, **kw)


def default_jobs() -> int:
    return max(1, (os.cpu_count() or 1))
