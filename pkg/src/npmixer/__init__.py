"""NPMixer: learnable stationary wavelets, neighbouring-patch mixing and
channel attention for multivariate forecasting, on a small numpy autodiff core."""
from .model import ModelConfig, NPMixer, build_variant, count_params_flops, create_model
from .tensor import Tensor, backward, no_grad

__all__ = ["ModelConfig", "NPMixer", "Tensor", "backward", "build_variant",
           "count_params_flops", "create_model", "no_grad"]
__version__ = "0.1.0"
