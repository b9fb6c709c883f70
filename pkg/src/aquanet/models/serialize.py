"""JSON round-trip for trained models.

Arrays are stored as base64 of little-endian float64 bytes, so a load
returns exactly the bits that were saved.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from ..errors import AquanetError, FileError, ModelFormatError
from .network import TrainedModel
from .spec import spec_from_dict, spec_to_dict

FORMAT_VERSION = 1


def encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_array(d: dict) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in d["shape"])
        raw = base64.b64decode(d["data"], validate=True)
        a = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        return a.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed array entry: {exc}") from None


def model_to_dict(model: TrainedModel) -> dict:
    norm = model.normalizer
    return {
        "format_version": FORMAT_VERSION,
        "spec": spec_to_dict(model.spec),
        "normalizer": None if norm is None else {
            "mean": encode_array(norm.mean),
            "std": encode_array(norm.std),
        },
        "params": [{"name": k, **encode_array(v)} for k, v in model.params.items()],
    }


def model_from_dict(d: dict) -> TrainedModel:
    from ..data.normalize import NormalizerStats

    if not isinstance(d, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {version!r} (expected {FORMAT_VERSION})")
    try:
        spec = spec_from_dict(d["spec"])
        params = {p["name"]: decode_array(p) for p in d["params"]}
        norm = d.get("normalizer")
        stats = None if norm is None else NormalizerStats(decode_array(norm["mean"]), decode_array(norm["std"]))
        return TrainedModel(spec, params, stats)
    except ModelFormatError:
        raise
    except (AquanetError, KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model document: {exc}") from None


def dumps(model: TrainedModel) -> str:
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def loads(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from None
    return model_from_dict(doc)


def save_model(model: TrainedModel, path) -> Path:
    path = Path(path)
    try:
        path.write_text(dumps(model), encoding="utf-8")
    except OSError as exc:
        raise FileError(path, exc.strerror or str(exc)) from None
    return path


def load_model(path) -> TrainedModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: cannot read model file ({exc})") from None
    return loads(text)
