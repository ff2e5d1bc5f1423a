"""Model architecture configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidConfig

ARCH_FULL = "sr-sad"
ARCH_LC = "sr-sad-lc"


@dataclass(frozen=True)
class SrSadConfig:
    """Dimensions of the recurrent detector.

    c is the mel band count and the master width; the None'd fields default
    to the standard ratios (front c/2, per-direction hiddens c/2, c/2, c,
    head c/2). Hidden sizes are per direction, so block outputs are twice
    the hidden size.
    """

    c: int = 80
    front_out: int | None = None
    gru1_hidden: int | None = None
    gru2_hidden: int | None = None
    gru3_hidden: int | None = None
    head_hidden: int | None = None
    gru_layers_per_block: int = 2

    def __post_init__(self):
        if self.c < 2 or self.c % 2:
            raise InvalidConfig(f"c must be even and >= 2, got {self.c}")
        defaults = {
            "front_out": self.c // 2,
            "gru1_hidden": self.c // 2,
            "gru2_hidden": self.c // 2,
            "gru3_hidden": self.c,
            "head_hidden": self.c // 2,
        }
        for name, default in defaults.items():
            value = getattr(self, name)
            if value is None:
                object.__setattr__(self, name, default)
            elif value < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {value}")
        if self.gru_layers_per_block < 1:
            raise InvalidConfig("gru_layers_per_block must be >= 1")

    def to_dict(self) -> dict:
        return {
            "c": self.c, "front_out": self.front_out,
            "gru1_hidden": self.gru1_hidden, "gru2_hidden": self.gru2_hidden,
            "gru3_hidden": self.gru3_hidden, "head_hidden": self.head_hidden,
            "gru_layers_per_block": self.gru_layers_per_block,
        }


@dataclass(frozen=True)
class ConvSpec:
    kernel: int = 5
    stride: int = 2
    channels: int = 80

    def __post_init__(self):
        if self.kernel < 1 or self.stride < 1 or self.channels < 1:
            raise InvalidConfig(f"bad conv spec {self}")
        if self.kernel < self.stride:
            raise InvalidConfig(
                f"kernel {self.kernel} < stride {self.stride} skips input frames")

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "stride": self.stride,
                "channels": self.channels}


@dataclass(frozen=True)
class LcResampleConfig:
    """Strided time-resampling stages wrapped around the recurrent core.

    down stages shrink the frame rate (ceil division per stride), up stages
    are transposed convs that mirror them; total stride must match so the
    output frame count can be restored exactly.
    """

    down: tuple[ConvSpec, ...] = (ConvSpec(), ConvSpec())
    up: tuple[ConvSpec, ...] = (ConvSpec(), ConvSpec())

    def __post_init__(self):
        object.__setattr__(self, "down", tuple(self.down))
        object.__setattr__(self, "up", tuple(self.up))
        if not self.down or not self.up:
            raise InvalidConfig("resampler needs at least one down and one up stage")
        down_stride = 1
        for s in self.down:
            down_stride *= s.stride
        up_stride = 1
        for s in self.up:
            up_stride *= s.stride
        if down_stride != up_stride:
            raise InvalidConfig(
                f"down stride {down_stride} != up stride {up_stride}")

    @property
    def total_stride(self) -> int:
        out = 1
        for s in self.down:
            out *= s.stride
        return out

    def to_dict(self) -> dict:
        return {"down": [s.to_dict() for s in self.down],
                "up": [s.to_dict() for s in self.up]}


def default_lc_resampler(c: int) -> LcResampleConfig:
    return LcResampleConfig(down=(ConvSpec(channels=c), ConvSpec(channels=c)),
                            up=(ConvSpec(channels=c), ConvSpec(channels=c)))


@dataclass(frozen=True)
class ModelConfig:
    architecture: str = ARCH_FULL
    srsad: SrSadConfig = field(default_factory=SrSadConfig)
    resampler: LcResampleConfig | None = None

    def __post_init__(self):
        if self.architecture not in (ARCH_FULL, ARCH_LC):
            raise InvalidConfig(f"unknown architecture {self.architecture!r}")
        if self.architecture == ARCH_LC and self.resampler is None:
            object.__setattr__(
                self, "resampler", default_lc_resampler(self.srsad.c))
        if self.architecture == ARCH_FULL and self.resampler is not None:
            raise InvalidConfig(f"{ARCH_FULL} takes no resampler")

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "srsad": self.srsad.to_dict(),
            "resampler": None if self.resampler is None
            else self.resampler.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        srsad = SrSadConfig(**d["srsad"])
        resampler = None
        if d.get("resampler") is not None:
            resampler = LcResampleConfig(
                down=tuple(ConvSpec(**s) for s in d["resampler"]["down"]),
                up=tuple(ConvSpec(**s) for s in d["resampler"]["up"]))
        return cls(architecture=d["architecture"], srsad=srsad,
                   resampler=resampler)


def full_model(c: int = 80) -> ModelConfig:
    """Standard detector: 2-layer bidirectional GRU blocks, no resampling."""
    return ModelConfig(architecture=ARCH_FULL,
                       srsad=SrSadConfig(c=c, gru_layers_per_block=2))


def lc_model(c: int = 80) -> ModelConfig:
    """Reduced detector: strided resampling, 1-layer bidirectional GRU blocks."""
    return ModelConfig(architecture=ARCH_LC,
                       srsad=SrSadConfig(c=c, gru_layers_per_block=1),
                       resampler=default_lc_resampler(c))
