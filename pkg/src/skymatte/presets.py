"""Named parameter bundles for the refinement and upsampling pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .confidence import InferenceConfidenceParams, TrimapConfidenceParams
from .density import DensityParams
from .errors import ConfigError
from .guided_filter import GuidedFilterParams
from .refine import RefinePipelineParams


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs besides its input images."""

    preset: str
    refine: RefinePipelineParams
    inference_conf: InferenceConfidenceParams = field(
        default_factory=InferenceConfidenceParams)
    seed: int = 0
    threads: int = 1


def _internal() -> RunConfig:
    # Full-resolution annotated data: small spatial support, color-density
    # inpainting at a permissive threshold, no sharpening. The inpainting
    # thresholds here are calibrated against the raw Gaussian density (the
    # kernel keeps its normalization constant).
    return RunConfig(
        preset="paper-internal",
        refine=RefinePipelineParams(
            dilation_radius=4,
            gf=GuidedFilterParams(s=8, eps_l=0.01, eps_c=0.01),
            density=DensityParams(sigma=0.01, n_samples=1024, p_c=0.6,
                                  normalize_kernel=False),
            conf=TrimapConfidenceParams(c_det=0.8, c_inpaint=0.6, c_undet=0.4),
            sharpen=False,
        ),
    )


def _ade20k_gf() -> RunConfig:
    # Guided filter only: uniform confidence, wide support, no inpainting.
    return RunConfig(
        preset="ade20k-gf",
        refine=RefinePipelineParams(
            dilation_radius=0,
            gf=GuidedFilterParams(s=48, eps_l=0.01, eps_c=0.01),
            inpaint=False,
            uniform_confidence=True,
            sharpen=False,
        ),
    )


def _ade20k_de_gf() -> RunConfig:
    # Boundary band + density inpainting at a strict threshold, then the
    # weighted filter and sigmoid sharpening.
    return RunConfig(
        preset="ade20k-de-gf",
        refine=RefinePipelineParams(
            dilation_radius=4,
            gf=GuidedFilterParams(s=16, eps_l=0.01, eps_c=0.01),
            density=DensityParams(sigma=0.01, n_samples=1024, p_c=0.97,
                                  normalize_kernel=False),
            conf=TrimapConfidenceParams(c_det=0.8, c_inpaint=0.6, c_undet=0.4),
            t_s=15.0,
            sharpen=True,
        ),
    )


def _pipeline_s64() -> RunConfig:
    # Camera-pipeline upsampling of a low-resolution probability map.
    return RunConfig(
        preset="pipeline-s64",
        refine=RefinePipelineParams(
            gf=GuidedFilterParams(s=64, eps_l=0.01, eps_c=0.01),
            sharpen=False,
        ),
        inference_conf=InferenceConfidenceParams(l=0.3, h=0.5, b=0.8, eps=0.01),
    )


_PRESETS = {
    "paper-internal": _internal,
    "ade20k-gf": _ade20k_gf,
    "ade20k-de-gf": _ade20k_de_gf,
    "pipeline-s64": _pipeline_s64,
}

PRESET_NAMES = tuple(_PRESETS)


def load_preset(name: str) -> RunConfig:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}") from None


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Override nested parameters from a flat {dotted.key: value} mapping.

    Recognized keys: seed, threads, gf.s, gf.eps_l, gf.eps_c, density.sigma,
    density.n_samples, density.p_c, density.normalize_kernel, conf.c_det,
    conf.c_inpaint, conf.c_undet, refine.dilation_radius, refine.t_s,
    refine.sharpen, refine.inpaint, refine.uniform_confidence, and
    confidence.{l,h,b,eps}.
    """
    refine = config.refine
    gf, density, conf = refine.gf, refine.density, refine.conf
    inf = config.inference_conf
    seed, threads = config.seed, config.threads

    for key, value in overrides.items():
        if value is None:
            continue
        group, _, name = key.partition(".")
        try:
            if key == "seed":
                seed = int(value)
            elif key == "threads":
                threads = int(value)
            elif group == "gf":
                value = int(value) if name == "s" else float(value)
                gf = replace(gf, **{name: value})
            elif group == "density":
                if name == "n_samples":
                    value = int(value)
                elif name == "normalize_kernel":
                    value = bool(value)
                else:
                    value = float(value)
                density = replace(density, **{name: value})
            elif group == "conf":
                conf = replace(conf, **{name: float(value)})
            elif group == "confidence":
                inf = replace(inf, **{name: float(value)})
            elif group == "refine":
                if name in ("sharpen", "inpaint", "uniform_confidence"):
                    value = bool(value)
                elif name == "dilation_radius":
                    value = int(value)
                else:
                    value = float(value)
                refine = replace(refine, **{name: value})
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except TypeError:
            raise ConfigError(f"unknown config key {key!r}") from None

    density = replace(density, seed=seed)
    refine = replace(refine, gf=gf, density=density, conf=conf)
    return RunConfig(preset=config.preset, refine=refine, inference_conf=inf,
                     seed=seed, threads=threads)
