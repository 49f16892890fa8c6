"""Sky alpha-matte toolkit: refinement, edge-aware upsampling, grading, metrics."""

from .confidence import (InferenceConfidenceParams, TrimapConfidenceParams,
                         bias, inference_confidence, trimap_confidence)
from .density import DensityParams, Trimap, TrimapLabel, inpaint, sky_probability
from .effects import (EffectParams, Lut2d, apply_dual_wb, composite_denoised,
                      darken_sky, enhance_contrast, lut2d_lookup)
from .errors import (ConfigError, EmptyReferenceError, InvalidInputError,
                     InvalidParameterError, SingularSystemError, SkymatteError)
from .guided_filter import (GuidedFilterParams, modified_guided_filter,
                            smooth_upsample, solve_image_ldl3, weighted_downsample)
from .image import (Colorspace, PlanarImage, dot3, hadamard, hsv_to_rgb, outer3,
                    rgb_to_hsv, rgb_to_yuv, yuv_to_rgb)
from .metrics import (MetricsReport, binarized_metrics, boundary_loss,
                      continuous_metrics, evaluate_pair, jsd)
from .presets import PRESET_NAMES, RunConfig, load_preset
from .refine import (RefinePipelineParams, boundary_band, build_trimap,
                     refine_annotation, sharpen_mask)
from .synth import SyntheticScene, make_synthetic_scene

__version__ = "0.1.0"
