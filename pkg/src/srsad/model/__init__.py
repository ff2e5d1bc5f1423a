from .config import (ARCH_FULL, ARCH_LC, ConvSpec, LcResampleConfig,
                     ModelConfig, SrSadConfig, default_lc_resampler,
                     full_model, lc_model)
from .layers import (GruDirectionParams, GruLayerParams, MacCounter,
                     bigru_forward, gru_cell_step)
from .network import (backward_batch, forward_batch, forward_probs,
                      graph_dims, init_weights, parameter_plan, srsad_forward,
                      srsad_lc_forward)
from .weights import FORMAT_VERSION, WeightStore, load_weights, save_weights

__all__ = [
    "ARCH_FULL", "ARCH_LC", "ConvSpec", "LcResampleConfig", "ModelConfig",
    "SrSadConfig", "default_lc_resampler", "full_model", "lc_model",
    "GruDirectionParams", "GruLayerParams", "MacCounter", "bigru_forward",
    "gru_cell_step", "backward_batch", "forward_batch", "forward_probs",
    "graph_dims", "init_weights", "parameter_plan", "srsad_forward",
    "srsad_lc_forward", "FORMAT_VERSION", "WeightStore", "load_weights",
    "save_weights",
]
