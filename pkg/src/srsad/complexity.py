"""Analytic complexity accounting and wall-clock throughput.

Parameter and MAC counts are closed-form walks over the architecture,
independent of the instrumented counters in the layer code; the test suite
pins the two routes against each other. Conventions: one MAC per
multiply-add inside matmuls and convolutions; bias adds and element-wise
gates free; a transposed conv costs kernel*c_in*c_out per input frame
(scatter form); MACs are per single forward over one chunk.

RTF is audio seconds per wall second, median over repeated timed runs
after a warm-up pass.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .audio import SAMPLE_RATE
from .dsp import FeatureConfig, MelSpectrogram, StftConfig
from .errors import InvalidConfig, InvalidInput
from .model.config import ARCH_LC, ModelConfig
from .model.network import forward_probs, graph_dims
from .model.weights import WeightStore

# figures reported for the original full-scale systems, for the
# side-by-side table only; nothing is validated against them
REFERENCE_FULL_SCALE = {
    "sr-sad": {"macs_per_2s": 82.9e6, "rtf": 32.0, "params": 870e3},
    "sr-sad-lc": {"macs_per_2s": 15.6e6, "rtf": 275.0, "params": 335e3},
}


def _linear_params(c_in: int, c_out: int) -> int:
    return c_in * c_out + c_out


def _gru_direction_params(c_in: int, hidden: int) -> int:
    return 3 * (c_in * hidden + hidden * hidden + 2 * hidden)


def _conv_params(kernel: int, c_in: int, c_out: int) -> int:
    return kernel * c_in * c_out + c_out


def count_params(config: ModelConfig) -> int:
    """Exact trainable parameter count."""
    dims = graph_dims(config)
    s = config.srsad
    total = 0
    if config.architecture == ARCH_LC:
        for (c_in, c_out), spec in zip(dims["down_channels"],
                                       config.resampler.down):
            total += _conv_params(spec.kernel, c_in, c_out)
    total += _linear_params(dims["mel_inner"], s.front_out)
    for k in range(3):
        hidden = dims["block_hidden"][k]
        for i in range(s.gru_layers_per_block):
            c_in = dims["block_in"][k] if i == 0 else 2 * hidden
            total += 2 * _gru_direction_params(c_in, hidden)
    if config.architecture == ARCH_LC:
        for (c_in, c_out), spec in zip(dims["up_channels"],
                                       config.resampler.up):
            total += _conv_params(spec.kernel, c_in, c_out)
    total += _linear_params(dims["head_in"], s.head_hidden)
    total += _linear_params(s.head_hidden, 1)
    return total


def frames_for_chunk(chunk_len_s: float) -> int:
    if chunk_len_s <= 0.0:
        raise InvalidConfig("chunk_len_s must be positive")
    return int(round(chunk_len_s * SAMPLE_RATE)) // StftConfig().hop_len + 1


def count_macs(config: ModelConfig, chunk_len_s: float = 2.0) -> int:
    """Exact MAC count for one forward pass over one chunk."""
    t_full = frames_for_chunk(chunk_len_s)
    dims = graph_dims(config)
    s = config.srsad
    total = 0
    t = t_full
    if config.architecture == ARCH_LC:
        for (c_in, c_out), spec in zip(dims["down_channels"],
                                       config.resampler.down):
            t_out = -(-t // spec.stride)
            total += spec.kernel * c_in * c_out * t_out
            t = t_out
    t_inner = t
    total += dims["mel_inner"] * s.front_out * t_inner
    for k in range(3):
        hidden = dims["block_hidden"][k]
        for i in range(s.gru_layers_per_block):
            c_in = dims["block_in"][k] if i == 0 else 2 * hidden
            total += 2 * 3 * (c_in * hidden + hidden * hidden) * t_inner
    if config.architecture == ARCH_LC:
        # transposed convs: scatter cost per input frame, frame count grows
        # back toward the full rate stage by stage
        lengths = [t_full]
        for spec in config.resampler.down:
            lengths.append(-(-lengths[-1] // spec.stride))
        up_inputs = lengths[:0:-1]          # reversed, excluding t_full
        for (c_in, c_out), spec, t_in in zip(dims["up_channels"],
                                             config.resampler.up, up_inputs):
            total += spec.kernel * c_in * c_out * t_in
    total += dims["head_in"] * s.head_hidden * t_full
    total += s.head_hidden * 1 * t_full
    return total


@dataclass
class ComplexityReport:
    architecture: str
    params: int
    macs: int
    chunk_len_s: float
    rtf: float | None = None

    def to_dict(self) -> dict:
        return {"schema_version": 1, "architecture": self.architecture,
                "params": self.params, "macs": self.macs,
                "chunk_len_s": self.chunk_len_s, "rtf": self.rtf}


def profile(config: ModelConfig, chunk_len_s: float = 2.0) -> ComplexityReport:
    return ComplexityReport(architecture=config.architecture,
                            params=count_params(config),
                            macs=count_macs(config, chunk_len_s),
                            chunk_len_s=chunk_len_s)


def measure_rtf(store: WeightStore, chunk_len_s: float = 2.0,
                repetitions: int = 10, runs: int = 3,
                forward_fn=None) -> float:
    """Real-time factor: audio seconds scored per wall-clock second.

    Runs a warm-up pass, then `runs` timed loops of `repetitions` forwards
    over one synthetic chunk; returns the median loop's RTF.
    """
    if repetitions < 3:
        raise InvalidInput("need at least 3 repetitions per timed run")
    if runs < 1:
        raise InvalidInput("need at least one timed run")
    if forward_fn is None:
        cfg = FeatureConfig(n_mels=store.config.srsad.c)
        t_frames = frames_for_chunk(chunk_len_s)
        rng = np.random.Generator(np.random.Philox(key=[17, 0]))
        mel = MelSpectrogram(
            values=rng.normal(-8.0, 2.0, size=(cfg.n_mels, t_frames)),
            frame_period_s=cfg.stft.frame_period_s)

        def forward_fn():
            forward_probs(mel, store)

    forward_fn()                                    # warm-up
    rates = []
    for _ in range(runs):
        t0 = time.perf_counter()
        for _ in range(repetitions):
            forward_fn()
        elapsed = time.perf_counter() - t0
        rates.append(repetitions * chunk_len_s / max(elapsed, 1e-12))
    return float(np.median(rates))


def comparison_table(reports: list[ComplexityReport]) -> str:
    """Fixed-width table of measured/counted figures next to the full-scale
    reference numbers (informative; scaled-down configs are not expected to
    match)."""
    lines = [f"{'model':<12} {'params':>10} {'MACs/chunk':>12} {'RTF':>8}   "
             f"{'ref params':>10} {'ref MACs/2s':>12} {'ref RTF':>8}"]
    for report in reports:
        ref = REFERENCE_FULL_SCALE.get(report.architecture)
        rtf = f"{report.rtf:8.1f}" if report.rtf is not None else f"{'-':>8}"
        if ref is None:
            tail = f"{'-':>10} {'-':>12} {'-':>8}"
        else:
            tail = (f"{ref['params']:10.3g} {ref['macs_per_2s']:12.3g} "
                    f"{ref['rtf']:8.1f}")
        lines.append(f"{report.architecture:<12} {report.params:>10} "
                     f"{report.macs:>12} {rtf}   {tail}")
    return "\n".join(lines)
