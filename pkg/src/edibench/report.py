"""CSV, Markdown, SVG and PNG outputs of a benchmark run."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .bench import METRIC_NAMES, RECORD_FIELDS, BenchConfig, MetricRecord, SummaryTable, common_size, prepare_image
from .interp import MethodId, upscale_channels, _upscale_array
from .metrics import CAP
from .raster import PixelRect, RasterImage, crop, is_image_file, load_image

__all__ = [
    "render_csv",
    "read_csv",
    "render_summary_markdown",
    "render_metric_plot",
    "render_roi_montage",
    "SERIES_STYLE",
    "MONTAGE_ZOOM",
]

# ------------------------------------------------------------------------ CSV

_CAPPED = ("snr", "psnr")


def _cell(name: str, v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "NA"
    if name in _CAPPED and v == CAP:
        return "CAP"
    return f"{v:.6f}"


def render_csv(records, path) -> None:
    """One row per record, fixed column order, 6 decimals; CAP and NA are literal cells."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([r.image_id, r.method.value] + [_cell(n, r.value(n)) for n in METRIC_NAMES])


def _parse(cell: str) -> float:
    if cell == "CAP":
        return CAP
    if cell == "NA":
        return math.nan
    return float(cell)


def read_csv(path) -> list[MetricRecord]:
    with open(Path(path), encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != RECORD_FIELDS:
        raise ValueError(f"{path}: not an edibench records file")
    out = []
    for row in rows[1:]:
        vals = {n: _parse(c) for n, c in zip(METRIC_NAMES, row[2:])}
        out.append(MetricRecord(row[0], MethodId.parse(row[1]), **vals))
    return out


# ------------------------------------------------------------------- Markdown

_ROW_LABELS = {
    "snr": "SNR (dB)",
    "psnr": "PSNR (dB)",
    "ssim": "SSIM",
    "fsim": "FSIM",
    "mi": "MI (bits)",
    "time_cost_s": "TC (s)",
    "epra": "EPRa",
    "eprr": "EPRr",
}
_METHOD_LABELS = {
    MethodId.BILINEAR: "Bilinear",
    MethodId.BICUBIC: "Bicubic",
    MethodId.NEDI: "NEDI",
    MethodId.EGII: "EGII",
    MethodId.ICBI: "ICBI",
    MethodId.DCCI: "DCCI",
}


def _fmt(name: str, v: float) -> str:
    if math.isnan(v):
        return "NA"
    if name in _CAPPED and v == CAP:
        return "CAP"
    return f"{v:.6f}" if name == "time_cost_s" else f"{v:.4f}"


def _bold_row(name, values):
    finite = [v for v in values if not math.isnan(v)]
    best = None
    if finite:
        best = min(finite) if name == "time_cost_s" else max(finite)
    return [f"**{_fmt(name, v)}**" if best is not None and v == best else _fmt(name, v) for v in values]


def render_summary_markdown(table: SummaryTable, path) -> None:
    """Metrics as rows, methods as columns; the best cell of each row is bold.

    Best means largest, except for time cost where the smallest wins.
    """
    methods = table.methods
    lines = [
        f"Mean over {table.n_images} image(s).",
        "",
        "| Metric | " + " | ".join(_METHOD_LABELS[m] for m in methods) + " |",
        "|---|" + "---:|" * len(methods),
    ]
    for name in METRIC_NAMES:
        vals = [table.means[m][name] for m in methods]
        lines.append(f"| {_ROW_LABELS[name]} | " + " | ".join(_bold_row(name, vals)) + " |")
    if table.tc_ratio:
        cells = [f"{table.tc_ratio[m]:.1f}x" for m in methods]
        lines.append("| TC / bilinear | " + " | ".join(cells) + " |")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ------------------------------------------------------------------------ SVG

# colour and marker per method, as in the usual legend of these comparisons
SERIES_STYLE = {
    MethodId.BILINEAR: ("#000000", "star"),
    MethodId.BICUBIC: ("#0000ff", "triangle-right"),
    MethodId.NEDI: ("#008000", "diamond"),
    MethodId.EGII: ("#ff0000", "dot"),
    MethodId.ICBI: ("#00bfff", "plus"),
    MethodId.DCCI: ("#ff69b4", "circle"),
}

_W, _H = 720, 420
_L, _R, _T, _B = 70, 150, 40, 50


def _marker(kind: str, x: float, y: float, colour: str) -> str:
    if kind == "circle":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="none" stroke="{colour}"/>'
    if kind == "dot":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="{colour}"/>'
    if kind == "plus":
        return (f'<path d="M{x - 4:.2f},{y:.2f}H{x + 4:.2f}M{x:.2f},{y - 4:.2f}V{y + 4:.2f}" '
                f'stroke="{colour}"/>')
    if kind == "diamond":
        return (f'<path d="M{x:.2f},{y - 5:.2f}L{x + 4:.2f},{y:.2f}L{x:.2f},{y + 5:.2f}L{x - 4:.2f},{y:.2f}Z" '
                f'fill="none" stroke="{colour}"/>')
    if kind == "triangle-right":
        return (f'<path d="M{x - 4:.2f},{y - 4:.2f}L{x + 4:.2f},{y:.2f}L{x - 4:.2f},{y + 4:.2f}Z" '
                f'fill="none" stroke="{colour}"/>')
    # star: three crossing strokes
    return (f'<path d="M{x - 4:.2f},{y:.2f}H{x + 4:.2f}M{x - 2.5:.2f},{y - 3.5:.2f}L{x + 2.5:.2f},{y + 3.5:.2f}'
            f'M{x - 2.5:.2f},{y + 3.5:.2f}L{x + 2.5:.2f},{y - 3.5:.2f}" stroke="{colour}"/>')


def render_metric_plot(records, metric: str, path) -> None:
    """Line-and-marker SVG: x = image index, one series per method present."""
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRIC_NAMES)}")
    image_ids = sorted({r.image_id for r in records})
    methods = [m for m in MethodId if any(r.method == m for r in records)]
    table = {(r.image_id, r.method): r.value(metric) for r in records}
    vals = np.array([v for v in table.values() if not math.isnan(v)], dtype=float)
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    pw, ph = _W - _L - _R, _H - _T - _B
    nx = max(1, len(image_ids) - 1)

    def sx(i):
        return _L + pw * (i / nx if len(image_ids) > 1 else 0.5)

    def sy(v):
        return _T + ph * (1 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">'
        f'{escape(_ROW_LABELS[metric])}</text>',
        f'<line x1="{_L}" y1="{_T + ph}" x2="{_L + pw}" y2="{_T + ph}" stroke="black"/>',
        f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_T + ph}" stroke="black"/>',
    ]
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        parts.append(f'<text x="{_L - 6}" y="{sy(v) + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{v:.4g}</text>')
    for i, _ in enumerate(image_ids):
        parts.append(f'<text x="{sx(i):.2f}" y="{_T + ph + 16}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{i + 1}</text>')
    parts.append(f'<text x="{_L + pw / 2}" y="{_H - 10}" text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12">image index</text>')
    for j, m in enumerate(methods):
        colour, kind = SERIES_STYLE[m]
        pts = [(sx(i), sy(table[(iid, m)])) for i, iid in enumerate(image_ids)
               if (iid, m) in table and not math.isnan(table[(iid, m)])]
        parts.append(f'<g class="series" data-method="{m.value}" data-marker="{kind}" stroke="{colour}">')
        parts.append(f'<polyline fill="none" stroke="{colour}" points="'
                     + " ".join(f"{x:.2f},{y:.2f}" for x, y in pts) + '"/>')
        parts.extend(_marker(kind, x, y, colour) for x, y in pts)
        parts.append("</g>")
        ly = _T + 10 + 20 * j
        lx = _L + pw + 20
        parts.append(f'<g class="legend" data-method="{m.value}">'
                     f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{colour}"/>'
                     + _marker(kind, lx + 12, ly, colour)
                     + f'<text x="{lx + 30}" y="{ly + 4}" font-family="sans-serif" font-size="12">'
                     f'{_METHOD_LABELS[m]}</text></g>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------- montage

MONTAGE_ZOOM = 4
LABEL_HEIGHT = 16
GAP = 4


def _find_image(input_dir: Path, image_id: str) -> Path:
    for p in sorted(Path(input_dir).iterdir()):
        if p.stem == image_id and is_image_file(p):
            return p
    raise FileNotFoundError(f"no image with id {image_id!r} in {input_dir}")


def montage_panels(truth: RasterImage, outputs, roi: PixelRect) -> list[np.ndarray]:
    """Cropped and magnified panels: truth first, then one per method output."""
    panels = []
    for img in [truth, *outputs]:
        sub = crop(img, roi).data
        u8 = np.clip(np.floor(sub + 0.5), 0, 255).astype(np.uint8)
        panels.append(np.repeat(np.repeat(u8, MONTAGE_ZOOM, axis=0), MONTAGE_ZOOM, axis=1))
    return panels


def render_roi_montage(cfg: BenchConfig, image_id: str, roi: PixelRect, *, colour: bool = False, path=None) -> Path:
    """Horizontal strip: truth crop, then each method's crop, magnified 4x and labelled.

    ``roi`` is in ground-truth pixel coordinates and must lie inside the region
    the upscalers interpolate.  Returns the PNG path.
    """
    src = load_image(_find_image(cfg.input_dir, image_id))
    n = cfg.factor_exp
    truth_y, lr_y = prepare_image(src, n)
    rows, cols = common_size(lr_y.shape, n)
    roi.check_inside(RasterImage(np.zeros((rows, cols))))
    if colour and src.channels == 3:
        lr = src
        for _ in range(n):
            lr = RasterImage(lr.data[::2, ::2])
        truth = RasterImage(src.data[:rows, :cols])
        outs = [RasterImage(upscale_channels(lr, m, n, cfg.interp).data[:rows, :cols]) for m in cfg.methods]
    else:
        truth = RasterImage(truth_y[:rows, :cols])
        outs = [RasterImage(_upscale_array(lr_y, m, n, cfg.interp)[:rows, :cols]) for m in cfg.methods]
    panels = montage_panels(truth, outs, roi)
    labels = ["Truth"] + [_METHOD_LABELS[m] for m in cfg.methods]
    pw, ph = roi.w * MONTAGE_ZOOM, roi.h * MONTAGE_ZOOM
    mode = "RGB" if panels[0].ndim == 3 else "L"
    width = len(panels) * pw + (len(panels) - 1) * GAP
    strip = Image.new(mode, (width, ph + LABEL_HEIGHT), color=(255, 255, 255) if mode == "RGB" else 255)
    draw = ImageDraw.Draw(strip)
    font = ImageFont.load_default()
    for k, (panel, label) in enumerate(zip(panels, labels)):
        x = k * (pw + GAP)
        strip.paste(Image.fromarray(panel), (x, LABEL_HEIGHT))
        draw.text((x + 2, 2), label, fill=0 if mode == "L" else (0, 0, 0), font=font)
    if path is None:
        target = cfg.output_dir / "montages"
        target.mkdir(parents=True, exist_ok=True)
        path = target / f"{image_id}_{roi.x0}_{roi.y0}_{roi.w}x{roi.h}.png"
    strip.save(Path(path), format="PNG")
    return Path(path)
