"""Model specifications with the tuned defaults for each architecture.

A spec is a frozen dataclass; ``kind`` is the tag of the union. Defaults are
the best values reported for the groundwater study (MLP: two hidden layers of
100; LSTM: 2 x 128 tanh; TCN: 3 blocks of 64 filters, kernel 3, dropout 0.2;
ANN: 100/100/50).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, ClassVar, Union

from ..core_math import ActivationKind
from ..errors import ConfigError

N_CLASSES = 5
N_FEATURES = 12


def _check_common(spec) -> None:
    if spec.classes != N_CLASSES:
        raise ConfigError(f"classes is fixed at {N_CLASSES}, got {spec.classes}")
    if spec.input_dim < 1:
        raise ConfigError("input_dim must be >= 1")
    if not spec.learning_rate > 0:
        raise ConfigError("learning_rate must be > 0")


def _check_hidden_activation(name: str) -> None:
    kind = ActivationKind.parse(name)
    if kind is ActivationKind.SOFTMAX:
        raise ConfigError("softmax is only allowed on the output layer")


@dataclass(frozen=True)
class MlpSpec:
    hidden: tuple[int, ...] = (100, 100)
    activation: str = "relu"
    alpha: float = 0.001
    learning_rate: float = 0.001
    input_dim: int = N_FEATURES
    classes: int = N_CLASSES
    kind: ClassVar[str] = "mlp"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        _check_common(self)
        _check_hidden_activation(self.activation)
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError("hidden layer sizes must be positive")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.hidden


@dataclass(frozen=True)
class AnnSpec:
    layers: int = 3
    neurons: tuple[int, ...] = (100, 100, 50)
    activation: str = "relu"
    learning_rate: float = 0.001
    alpha: float = 0.001
    input_dim: int = N_FEATURES
    classes: int = N_CLASSES
    kind: ClassVar[str] = "ann"

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(int(n) for n in self.neurons))
        _check_common(self)
        _check_hidden_activation(self.activation)
        if len(self.neurons) != self.layers:
            raise ConfigError(f"ANN declares {self.layers} layers but {len(self.neurons)} widths")
        if min(self.neurons) < 1:
            raise ConfigError("neuron counts must be positive")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.neurons


@dataclass(frozen=True)
class LstmSpec:
    layers: int = 2
    units: int = 128
    activation: str = "tanh"
    learning_rate: float = 0.001
    forget_bias: float = 1.0
    input_dim: int = N_FEATURES
    channels: int = 1
    classes: int = N_CLASSES
    kind: ClassVar[str] = "lstm"

    def __post_init__(self):
        _check_common(self)
        if ActivationKind.parse(self.activation) is not ActivationKind.TANH:
            raise ConfigError("the LSTM cell supports only the tanh activation")
        if self.layers < 1 or self.units < 1 or self.channels < 1:
            raise ConfigError("layers, units and channels must be >= 1")

    @property
    def seq_len(self) -> int:
        return self.input_dim // self.channels


@dataclass(frozen=True)
class TcnSpec:
    layers: int = 3
    filters: int = 64
    kernel_size: int = 3
    dropout: float = 0.2
    dilations: tuple[int, ...] | None = None
    pooling: str = "avg"
    learning_rate: float = 0.001
    input_dim: int = N_FEATURES
    channels: int = 1
    classes: int = N_CLASSES
    kind: ClassVar[str] = "tcn"

    def __post_init__(self):
        if self.dilations is None:
            object.__setattr__(self, "dilations", tuple(2 ** i for i in range(self.layers)))
        else:
            object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        _check_common(self)
        if len(self.dilations) != self.layers:
            raise ConfigError("one dilation per TCN layer is required")
        if min(self.dilations) < 1 or self.kernel_size < 1 or self.filters < 1:
            raise ConfigError("dilation, kernel_size and filters must be >= 1")
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.pooling not in ("avg", "max"):
            raise ConfigError("pooling must be 'avg' or 'max'")

    @property
    def seq_len(self) -> int:
        return self.input_dim // self.channels

    @property
    def receptive_field(self) -> int:
        return 1 + (self.kernel_size - 1) * sum(self.dilations)


ModelSpec = Union[MlpSpec, AnnSpec, LstmSpec, TcnSpec]

SPEC_TYPES: dict[str, type] = {"mlp": MlpSpec, "lstm": LstmSpec, "tcn": TcnSpec, "ann": AnnSpec}
MODEL_NAMES = {"mlp": "MLP", "lstm": "LSTM", "tcn": "TCN", "ann": "ANN"}


def default_spec(kind: str) -> ModelSpec:
    try:
        return SPEC_TYPES[kind.lower()]()
    except KeyError:
        raise ConfigError(f"unknown model kind {kind!r}; choose from {sorted(SPEC_TYPES)}") from None


def tunable_fields(kind: str) -> tuple[str, ...]:
    cls = SPEC_TYPES[kind]
    return tuple(f.name for f in dataclasses.fields(cls) if f.name not in ("classes",))


def with_overrides(spec: ModelSpec, **overrides: Any) -> ModelSpec:
    allowed = set(tunable_fields(spec.kind))
    unknown = set(overrides) - allowed
    if unknown:
        raise ConfigError(f"{spec.kind} has no tunable field(s) {sorted(unknown)}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    if spec.kind == "tcn" and "layers" in clean and "dilations" not in clean:
        clean["dilations"] = None
    if spec.kind == "ann" and "neurons" in clean and "layers" not in clean:
        clean["layers"] = len(clean["neurons"])
    try:
        return dataclasses.replace(spec, **clean)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def spec_to_dict(spec: ModelSpec) -> dict[str, Any]:
    d = {"kind": spec.kind}
    for f in dataclasses.fields(spec):
        v = getattr(spec, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d


def spec_from_dict(d: dict[str, Any]) -> ModelSpec:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is None:
        raise ConfigError("model spec lacks a 'kind' tag")
    base = default_spec(kind)
    d.pop("classes", None)
    return with_overrides(base, **d)
