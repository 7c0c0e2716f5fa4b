"""Versioned textual checkpoint container for the full model state.

Layout (UTF-8, LF line endings):

    qembed-checkpoint v1
    meta <key> <value>          # model structure, one per line
    param <name> <d0> [<d1>]    # then one line of row-major float64 values
    <v0> <v1> ...

Floats are written with repr(), which round-trips float64 exactly, so a
save/load cycle is lossless and identical runs produce identical files.
"""
from __future__ import annotations

import numpy as np

from .autodiff import ReductionLayer
from .circuits import AnsatzSpec, FeatureMapSpec
from .encoder import EncoderConfig, EncoderWeights, LayerWeights, _LAYER_FIELDS
from .model import HybridModel, named_parameters

MAGIC = "qembed-checkpoint v1"


def _format_meta(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_checkpoint(path, model: HybridModel) -> None:
    lines = [MAGIC]
    meta = {
        "readout_qubit": model.readout_qubit,
        "fm.n_qubits": model.feature_map.n_qubits,
        "fm.reps": model.feature_map.repetitions,
        "fm.scale": float(model.feature_map.scale),
        "ansatz.layers": model.ansatz.layers,
        "reduction.in_dim": model.reduction.in_dim,
        "reduction.n_out": model.reduction.n_out,
        "encoder.present": not model.bypass,
    }
    if not model.bypass:
        cfg = model.encoder_config
        meta.update(
            {
                "encoder.patch": cfg.patch_size,
                "encoder.dim": cfg.embed_dim,
                "encoder.depth": cfg.layers,
                "encoder.heads": cfg.heads,
                "encoder.ffn_hidden": cfg.ffn_hidden,
                "encoder.out_dim": cfg.out_dim,
                "encoder.class_token": cfg.use_class_token,
            }
        )
    for key, value in meta.items():
        lines.append(f"meta {key} {_format_meta(value)}")
    for name, array in named_parameters(model).items():
        dims = " ".join(str(d) for d in array.shape)
        lines.append(f"param {name} {dims}")
        lines.append(" ".join(repr(float(v)) for v in array.reshape(-1)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse(path) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not a {MAGIC!r} file")
    meta: dict[str, str] = {}
    params: dict[str, np.ndarray] = {}
    i = 1
    while i < len(lines):
        line = lines[i]
        if not line:
            i += 1
            continue
        if line.startswith("meta "):
            _, key, value = line.split(" ", 2)
            meta[key] = value
            i += 1
        elif line.startswith("param "):
            fields = line.split(" ")
            name = fields[1]
            shape = tuple(int(d) for d in fields[2:])
            if i + 1 >= len(lines):
                raise ValueError(f"{path}: missing values for parameter {name!r}")
            values = np.array([float(v) for v in lines[i + 1].split(" ")], dtype=float)
            if values.size != int(np.prod(shape)):
                raise ValueError(
                    f"{path}: parameter {name!r} expects {np.prod(shape)} values, "
                    f"got {values.size}"
                )
            params[name] = values.reshape(shape)
            i += 2
        else:
            raise ValueError(f"{path}: unrecognized line {line!r}")
    return meta, params


def load_checkpoint(path) -> HybridModel:
    meta, params = _parse(path)

    def meta_int(key: str) -> int:
        return int(meta[key])

    def meta_bool(key: str) -> bool:
        return meta[key] == "true"

    fm = FeatureMapSpec(
        n_qubits=meta_int("fm.n_qubits"),
        repetitions=meta_int("fm.reps"),
        scale=float(meta["fm.scale"]),
    )
    an = AnsatzSpec(n_qubits=fm.n_qubits, layers=meta_int("ansatz.layers"))
    reduction = ReductionLayer(w=params["reduction.w"], b=params["reduction.b"])

    encoder_config = None
    encoder_weights = None
    if meta_bool("encoder.present"):
        encoder_config = EncoderConfig(
            patch_size=meta_int("encoder.patch"),
            embed_dim=meta_int("encoder.dim"),
            layers=meta_int("encoder.depth"),
            heads=meta_int("encoder.heads"),
            ffn_hidden=meta_int("encoder.ffn_hidden"),
            out_dim=meta_int("encoder.out_dim"),
            use_class_token=meta_bool("encoder.class_token"),
        )
        layers = []
        for i in range(encoder_config.layers):
            kwargs = {
                attr: params[f"encoder.layer.{i}.{suffix}"]
                for suffix, attr in _LAYER_FIELDS
            }
            layers.append(LayerWeights(**kwargs))
        encoder_weights = EncoderWeights(
            patch_projection=params["encoder.patch_projection"],
            positional=params["encoder.positional"],
            class_token=params.get("encoder.class_token"),
            layers=layers,
            head_w=params["encoder.head.w"],
            head_b=params["encoder.head.b"],
        )
    return HybridModel(
        reduction=reduction,
        theta=params["ansatz.theta"],
        feature_map=fm,
        ansatz=an,
        encoder_config=encoder_config,
        encoder_weights=encoder_weights,
        readout_qubit=meta_int("readout_qubit"),
    )
