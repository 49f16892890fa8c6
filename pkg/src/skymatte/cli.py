"""Command-line driver: refine, upsample, grade, eval, bench, synth."""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import effects as fx
from .confidence import inference_confidence
from .density import Trimap, TrimapLabel
from .errors import ConfigError, SkymatteError
from .guided_filter import GuidedFilterParams, guided_filter_coefficients, \
    modified_guided_filter, tent_upsample
from .image import Colorspace, PlanarImage, rgb_to_yuv
from .io import read_matte, read_png, read_trimap, write_matte, write_png, write_trimap
from .metrics import MetricsReport, evaluate_pair
from .presets import PRESET_NAMES, RunConfig, apply_overrides, load_preset
from .refine import refine_annotation
from .synth import make_synthetic_scene

log = logging.getLogger("skymatte")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

_OVERRIDE_KEYS = (
    "gf.s", "gf.eps_l", "gf.eps_c",
    "density.sigma", "density.n_samples", "density.p_c",
    "conf.c_det", "conf.c_inpaint", "conf.c_undet",
    "confidence.l", "confidence.h", "confidence.b", "confidence.eps",
    "refine.dilation_radius", "refine.t_s",
)
_FLAG_KEYS = ("refine.sharpen", "refine.inpaint", "refine.uniform_confidence")


def build_config(args) -> RunConfig:
    """Preset -> config file -> CLI flags, later sources winning."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            file_cfg = json.load(f)
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must contain a JSON object")
    preset = args.preset or file_cfg.pop("preset", None) or args.default_preset
    config = load_preset(preset)
    config = apply_overrides(config, file_cfg)

    cli_over = {}
    for key in _OVERRIDE_KEYS + _FLAG_KEYS + ("seed", "threads"):
        attr = key.replace(".", "_")
        value = getattr(args, attr, None)
        if value is not None:
            cli_over[key] = value
    return apply_overrides(config, cli_over)


def _add_common_params(p: argparse.ArgumentParser, default_preset: str) -> None:
    p.set_defaults(default_preset=default_preset)
    p.add_argument("--preset", choices=PRESET_NAMES, help="named parameter bundle")
    p.add_argument("--config", help="JSON config file with dotted parameter keys")
    p.add_argument("--seed", type=int, help="sampling seed (default 0)")
    p.add_argument("--threads", type=int, help="corpus-level worker count")
    for key in _OVERRIDE_KEYS:
        p.add_argument("--" + key.replace(".", "-"), dest=key.replace(".", "_"),
                       type=float, help=argparse.SUPPRESS)
    for key in _FLAG_KEYS:
        name = key.replace(".", "-")
        dest = key.replace(".", "_")
        p.add_argument("--" + name, dest=dest, action="store_const", const=True,
                       help=argparse.SUPPRESS)
        p.add_argument("--no-" + name, dest=dest, action="store_const", const=False,
                       help=argparse.SUPPRESS)


# ---------------------------------------------------------------------------
# refine
# ---------------------------------------------------------------------------

def _read_annotation(path: str) -> PlanarImage | Trimap:
    """Binary masks stay masks; files with undetermined pixels become trimaps."""
    t = read_trimap(path)
    if t.count(TrimapLabel.UNDETERMINED) > 0:
        return t
    mask = (t.labels == TrimapLabel.SKY).astype(float)
    return PlanarImage(mask[np.newaxis], Colorspace.MASK)


def _refine_one(entry: dict, config: RunConfig) -> None:
    params = config.refine
    if entry.get("params"):
        params = apply_overrides(config, entry["params"]).refine
    img = read_png(entry["image_path"])
    annotation = _read_annotation(entry["annotation_path"])
    alpha = refine_annotation(img, annotation, params)
    out = Path(entry["output_path"])
    out.parent.mkdir(parents=True, exist_ok=True)
    write_matte(out, alpha)


def cmd_refine(args) -> int:
    config = build_config(args)
    with open(args.manifest) as f:
        manifest = json.load(f)
    if not isinstance(manifest, list):
        raise ConfigError("manifest must be a JSON array of job objects")
    for i, entry in enumerate(manifest):
        for key in ("image_path", "annotation_path", "output_path"):
            if key not in entry:
                raise ConfigError(f"manifest entry {i} is missing {key!r}")

    failures = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, config.threads)) as ex:
        futures = {ex.submit(_refine_one, entry, config): entry for entry in manifest}
        for fut in concurrent.futures.as_completed(futures):
            entry = futures[fut]
            try:
                fut.result()
                log.info("refined %s -> %s", entry["image_path"], entry["output_path"])
            except Exception as e:
                failures += 1
                log.error("FAILED %s: %s", entry["image_path"], e)
    log.info("refine: %d ok, %d failed", len(manifest) - failures, failures)
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# upsample
# ---------------------------------------------------------------------------

def upsample_pipeline(prob: PlanarImage, ref: PlanarImage, config: RunConfig,
                      stats: dict | None = None) -> PlanarImage:
    """Probability map -> confidence -> weighted guided upsampling."""
    conf = inference_confidence(prob, config.inference_conf)
    return modified_guided_filter(rgb_to_yuv(ref), prob, conf,
                                  config.refine.gf, stats=stats)


def cmd_upsample(args) -> int:
    config = build_config(args)
    prob = read_matte(args.probability)
    ref = read_png(args.reference, to_linear=args.linearize)
    matte = upsample_pipeline(prob, ref, config)
    write_matte(args.output, matte)
    log.info("upsampled %s -> %s (%dx%d, s=%d)", args.probability, args.output,
             matte.width, matte.height, config.refine.gf.s)
    return EXIT_OK


# ---------------------------------------------------------------------------
# grade
# ---------------------------------------------------------------------------

def _resolve_bias_shape(entry: dict, name: str, base: Path) -> float:
    """Scalar shape parameter, optionally looked up from a 2-D LUT."""
    lut_source = entry.get(f"{name}_lut")
    if lut_source is None:
        return float(entry[name])
    if isinstance(lut_source, str):
        with open(base / lut_source) as f:
            lut_source = json.load(f)
    lut = fx.Lut2d.from_dict(lut_source)
    return fx.lut2d_lookup(lut, float(entry["x"]), float(entry["y"]))


def load_effect_chain(grading: dict, base: Path) -> list[dict]:
    """Resolve a grading config into executable effect steps.

    Omitted scalar fields fall back to the EffectParams defaults; LUT
    references are resolved to scalars here.
    """
    if "effects" not in grading or not isinstance(grading["effects"], list):
        raise ConfigError("grading config must contain an 'effects' array")
    defaults = fx.EffectParams()
    steps = []
    for entry in grading["effects"]:
        kind = entry.get("effect")
        try:
            if kind == "darken":
                steps.append({"effect": kind,
                              "b_d": _resolve_bias_shape(entry, "b_d", base)})
            elif kind == "contrast":
                steps.append({"effect": kind,
                              "b_c": _resolve_bias_shape(entry, "b_c", base),
                              "t_c": float(entry.get("t_c", defaults.t_c))})
            elif kind == "denoise_composite":
                steps.append({"effect": kind,
                              "sky": read_png(base / entry["sky_image"]),
                              "t_d": float(entry.get("t_d", defaults.t_d))})
            elif kind == "dual_wb":
                steps.append({"effect": kind,
                              "gains_fg": [float(v) for v in entry["gains_fg"]],
                              "gains_sky": [float(v) for v in entry["gains_sky"]]})
            else:
                raise ConfigError(f"unknown effect {kind!r}")
        except KeyError as e:
            raise ConfigError(f"effect {kind!r} is missing field {e.args[0]!r}") from None
    return steps


def apply_effect_chain(img: PlanarImage, alpha: PlanarImage,
                       steps: list[dict]) -> PlanarImage:
    """Run resolved effect steps in order."""
    for step in steps:
        kind = step["effect"]
        if kind == "darken":
            img = fx.darken_sky(img, alpha, step["b_d"])
        elif kind == "contrast":
            img = fx.enhance_contrast(img, alpha, step["b_c"], step["t_c"])
        elif kind == "denoise_composite":
            img = fx.composite_denoised(img, step["sky"], alpha, step["t_d"])
        elif kind == "dual_wb":
            img = fx.apply_dual_wb(img, alpha, step["gains_fg"], step["gains_sky"])
    return img


def cmd_grade(args) -> int:
    img = read_png(args.image, to_linear=args.linearize)
    alpha = read_matte(args.matte)
    with open(args.grading) as f:
        grading = json.load(f)
    steps = load_effect_chain(grading, Path(args.grading).parent)
    out = apply_effect_chain(img, alpha, steps)
    write_png(args.output, out, bit_depth=args.bit_depth, from_linear=args.linearize)
    log.info("graded %s with %d effect(s) -> %s", args.image, len(steps), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _aggregate(reports: list[MetricsReport]) -> dict:
    agg = {name: statistics.fmean(getattr(r, name) for r in reports)
           for name in MetricsReport.FIELDS}
    agg["pixel_count"] = sum(r.pixel_count for r in reports)
    return agg


def cmd_eval(args) -> int:
    pred_dir, gt_dir = Path(args.pred_dir), Path(args.gt_dir)
    names = sorted(p.name for p in pred_dir.iterdir()
                   if p.suffix.lower() in (".png", ".pfm"))
    if not names:
        raise ConfigError(f"no .png/.pfm mattes found in {pred_dir}")

    rows, reports, failures = [], [], 0
    for name in names:
        gt_path = gt_dir / name
        try:
            if not gt_path.exists():
                raise ConfigError(f"no ground-truth file for {name}")
            report = evaluate_pair(read_matte(pred_dir / name), read_matte(gt_path))
            reports.append(report)
            rows.append({"image": name, **report.as_dict()})
            log.info("evaluated %s", name)
        except (SkymatteError, OSError) as e:
            failures += 1
            rows.append({"image": name, "error": str(e)})
            log.error("FAILED %s: %s", name, e)

    result = {"images": rows,
              "aggregate": _aggregate(reports) if reports else None}
    if args.json:
        with open(args.json, "w") as f:
            json.dump(result, f, indent=2, sort_keys=True)
            f.write("\n")
    if args.csv:
        fields = ["image", *MetricsReport.FIELDS, "pixel_count", "error"]
        with open(args.csv, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
            if reports:
                writer.writerow({"image": "aggregate", **_aggregate(reports)})
    log.info("eval: %d ok, %d failed", len(reports), failures)
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _bench_case(width: int, height: int, s: int, reps: int, seed: int) -> dict:
    scene = make_synthetic_scene(width, height, seed=seed)
    rng = np.random.default_rng(seed)
    prob_small = np.clip(
        scene.alpha.data[:, ::4, ::4] + rng.normal(0, 0.02, scene.alpha.data[:, ::4, ::4].shape),
        0.0, 1.0)
    prob = PlanarImage(prob_small, Colorspace.MASK)
    params = GuidedFilterParams(s=s)
    config = load_preset("pipeline-s64")

    stage_times: dict[str, list[float]] = {k: [] for k in
                                           ("confidence", "filter", "upsample", "effects")}
    stats: dict = {}
    for _ in range(reps):
        t0 = time.perf_counter()
        conf = inference_confidence(prob, config.inference_conf)
        t1 = time.perf_counter()
        ref = rgb_to_yuv(scene.rgb)
        a_lo, b_lo = guided_filter_coefficients(ref, prob, conf, params)
        stats["systems_solved"] = a_lo.shape[1] * a_lo.shape[2]
        t2 = time.perf_counter()
        a_full = tent_upsample(a_lo, s)[:, :height, :width]
        b_full = tent_upsample(b_lo, s)[:, :height, :width]
        y = (a_full * ref.data).sum(axis=0, keepdims=True) + b_full
        matte = PlanarImage(np.clip(y, 0.0, 1.0), Colorspace.MASK)
        t3 = time.perf_counter()
        img = fx.darken_sky(scene.rgb, matte, 0.3)
        img = fx.enhance_contrast(img, matte, 0.3)
        fx.apply_dual_wb(img, matte, (1.0, 1.0, 1.0), (1.1, 1.0, 0.9))
        t4 = time.perf_counter()
        stage_times["confidence"].append(t1 - t0)
        stage_times["filter"].append(t2 - t1)
        stage_times["upsample"].append(t3 - t2)
        stage_times["effects"].append(t4 - t3)

    row = {"width": width, "height": height, "s": s, "reps": reps,
           "systems_solved": stats["systems_solved"],
           "max_systems": -(-width // s) * -(-height // s)}
    for stage, times in stage_times.items():
        row[f"{stage}_ms"] = round(statistics.median(times) * 1e3, 3)
    row["total_ms"] = round(sum(statistics.median(v) for v in stage_times.values()) * 1e3, 3)
    return row


def cmd_bench(args) -> int:
    sizes = []
    for token in args.sizes.split(","):
        w, _, h = token.partition("x")
        sizes.append((int(w), int(h)))
    s_values = [int(v) for v in args.s_values.split(",")]
    rows = [_bench_case(w, h, s, args.reps, args.seed or 0)
            for w, h in sizes for s in s_values]

    out = sys.stdout if args.csv in (None, "-") else open(args.csv, "w", newline="")
    try:
        writer = csv.DictWriter(out, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scene = make_synthetic_scene(args.width, args.height, seed=args.seed or 0)
    write_png(outdir / "rgb.png", scene.rgb, bit_depth=16)
    write_matte(outdir / "alpha.pfm", scene.alpha)
    write_png(outdir / "coarse.png", scene.coarse)
    write_trimap(outdir / "trimap.png", scene.trimap)
    log.info("wrote synthetic scene (%dx%d, seed %d) to %s",
             args.width, args.height, args.seed or 0, outdir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skymatte",
        description="Sky alpha-matte refinement, upsampling, grading, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="refine coarse annotations from a manifest")
    p.add_argument("--manifest", required=True, help="JSON array of "
                   "{image_path, annotation_path, output_path[, params]}")
    _add_common_params(p, default_preset="ade20k-de-gf")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("upsample", help="upsample a low-resolution probability map")
    p.add_argument("--probability", required=True, help="probability map (PNG/PFM)")
    p.add_argument("--reference", required=True, help="full-resolution RGB PNG")
    p.add_argument("--output", required=True, help="output matte (PFM or 16-bit PNG)")
    p.add_argument("--linearize", action="store_true",
                   help="convert the reference from sRGB to linear before filtering")
    _add_common_params(p, default_preset="pipeline-s64")
    p.set_defaults(func=cmd_upsample)

    p = sub.add_parser("grade", help="apply a grading effect chain")
    p.add_argument("--image", required=True)
    p.add_argument("--matte", required=True)
    p.add_argument("--grading", required=True, help="JSON effect chain")
    p.add_argument("--output", required=True)
    p.add_argument("--bit-depth", type=int, default=8, choices=(8, 16))
    p.add_argument("--linearize", action="store_true",
                   help="grade in linear light (decode sRGB in, encode out)")
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("eval", help="score predicted mattes against ground truth")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--csv", help="per-image and aggregate scores as CSV")
    p.add_argument("--json", help="per-image and aggregate scores as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time the pipeline stages")
    p.add_argument("--sizes", default="1024x768", help="comma-separated WxH list")
    p.add_argument("--s-values", default="64", help="comma-separated factors")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write the built-in synthetic test scene")
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=768)
    p.add_argument("--seed", type=int)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s", stream=sys.stderr,
                        level=logging.INFO)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as e:
        log.error("%s", e)
        return EXIT_CONFIG
    except SkymatteError as e:
        log.error("%s", e)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
