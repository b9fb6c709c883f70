"""MLP, ANN, LSTM and TCN classifiers with hand-written backward passes."""

from .layers import (
    DenseLayer,
    LstmCell,
    TcnLayer,
    dense_stack_backward,
    dense_stack_forward,
    dilated_causal_conv,
    lstm_step,
    residual_add,
    temporal_pool,
)
from .network import (
    ForwardTrace,
    TrainedModel,
    build_model,
    forward,
    init_params,
    lstm_forward,
    mlp_forward,
    model_backward,
    param_shapes,
    predict_proba,
    tcn_forward,
    zero_params,
)
from .serialize import FORMAT_VERSION, dumps, load_model, loads, save_model
from .spec import (
    MODEL_NAMES,
    AnnSpec,
    LstmSpec,
    MlpSpec,
    ModelSpec,
    TcnSpec,
    default_spec,
    spec_from_dict,
    spec_to_dict,
    with_overrides,
)

__all__ = [
    "AnnSpec", "DenseLayer", "FORMAT_VERSION", "ForwardTrace", "LstmCell", "LstmSpec",
    "MODEL_NAMES", "MlpSpec", "ModelSpec", "TcnLayer", "TcnSpec", "TrainedModel",
    "build_model", "default_spec", "dense_stack_backward", "dense_stack_forward",
    "dilated_causal_conv", "dumps", "forward", "init_params", "load_model", "loads",
    "lstm_forward", "lstm_step", "mlp_forward", "model_backward", "param_shapes",
    "predict_proba", "residual_add", "save_model", "spec_from_dict", "spec_to_dict",
    "tcn_forward", "temporal_pool", "with_overrides", "zero_params",
]
