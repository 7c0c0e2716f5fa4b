"""The full trainable hybrid state and its forward evaluation.

A HybridModel is either an encoder model (images -> transformer features)
or a bypass model (inputs are already feature vectors, the practical
stand-in for a frozen pre-trained embedding). Both feed the reduction
layer, whose outputs parameterize the feature map, followed by the ansatz
and a single-qubit readout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import ReductionLayer, init_reduction, reduce
from .circuits import AnsatzSpec, FeatureMapSpec, QuantumForwardResult, quantum_forward
from .encoder import (
    EncodeCache,
    EncoderConfig,
    EncoderWeights,
    encode_with_cache,
    init_encoder_weights,
)
from .encoder import named_parameters as encoder_named_parameters


@dataclass
class HybridModel:
    reduction: ReductionLayer
    theta: np.ndarray
    feature_map: FeatureMapSpec
    ansatz: AnsatzSpec
    encoder_config: EncoderConfig | None = None
    encoder_weights: EncoderWeights | None = None
    readout_qubit: int = 0

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=float)
        if self.feature_map.n_qubits != self.ansatz.n_qubits:
            raise ValueError(
                f"feature map has {self.feature_map.n_qubits} qubit(s), "
                f"ansatz has {self.ansatz.n_qubits}"
            )
        if self.reduction.n_out != self.feature_map.n_qubits:
            raise ValueError(
                f"reduction emits {self.reduction.n_out} value(s) but the "
                f"feature map expects {self.feature_map.n_qubits}"
            )
        expected = self.ansatz.parameter_count()
        if self.theta.shape != (expected,):
            raise ValueError(
                f"theta must have {expected} entries, got shape {self.theta.shape}"
            )
        if (self.encoder_config is None) != (self.encoder_weights is None):
            raise ValueError("encoder config and weights must be provided together")
        if self.encoder_config is not None:
            if self.encoder_config.out_dim != self.reduction.in_dim:
                raise ValueError(
                    f"encoder out_dim {self.encoder_config.out_dim} does not match "
                    f"reduction in_dim {self.reduction.in_dim}"
                )
        if not 0 <= self.readout_qubit < self.feature_map.n_qubits:
            raise IndexError(f"readout qubit {self.readout_qubit} out of range")

    @property
    def bypass(self) -> bool:
        return self.encoder_config is None


@dataclass
class ForwardCache:
    """Everything backward() needs from one sample's forward pass."""

    x_input: np.ndarray
    feat: np.ndarray
    y_vec: np.ndarray
    result: QuantumForwardResult
    encoder_cache: EncodeCache | None = None

    @property
    def p0(self) -> float:
        return self.result.p0

    @property
    def p1(self) -> float:
        return self.result.p1


def model_forward(model: HybridModel, x) -> ForwardCache:
    """Embed (optional) -> reduce -> quantum circuit -> readout marginal."""
    x = np.asarray(x, dtype=float)
    encoder_cache = None
    if model.bypass:
        feat = x
    else:
        feat, encoder_cache = encode_with_cache(x, model.encoder_weights, model.encoder_config)
    y_vec = reduce(feat, model.reduction)
    result = quantum_forward(
        y_vec, model.theta, model.feature_map, model.ansatz, model.readout_qubit
    )
    return ForwardCache(
        x_input=x, feat=feat, y_vec=y_vec, result=result, encoder_cache=encoder_cache
    )


def named_parameters(model: HybridModel) -> dict[str, np.ndarray]:
    """Live references to every trainable array, keyed by canonical name."""
    params: dict[str, np.ndarray] = {
        "reduction.w": model.reduction.w,
        "reduction.b": model.reduction.b,
        "ansatz.theta": model.theta,
    }
    if model.encoder_weights is not None:
        for name, array in encoder_named_parameters(model.encoder_weights).items():
            params[f"encoder.{name}"] = array
    return params


def snapshot_parameters(model: HybridModel) -> dict[str, np.ndarray]:
    return {name: array.copy() for name, array in named_parameters(model).items()}


def set_parameters(model: HybridModel, values: dict[str, np.ndarray]) -> None:
    """Copy values into the model's live arrays (shapes must match)."""
    params = named_parameters(model)
    for name, value in values.items():
        if name not in params:
            raise KeyError(f"unknown parameter {name!r}")
        np.copyto(params[name], value)


def _neutral_bias(fm: FeatureMapSpec) -> float:
    # Angle where the readout sits at p0 = 0.5, the steepest point of the
    # cos^2 curve; starting there avoids the clamped-log gradient blowup at
    # p0 near 0 or 1.
    return math.pi / (2.0 * fm.scale)


def make_bypass_model(
    in_dim: int,
    n_qubits: int = 1,
    fm_repetitions: int = 2,
    fm_scale: float = 2.0,
    ansatz_layers: int = 1,
    seed: int = 0,
) -> HybridModel:
    """Bypass-encoder model for precomputed feature vectors.

    Reduction weights start small (see init_reduction) with the bias at the
    neutral readout angle; ansatz angles start as normal(0, 0.1) rotations.
    """
    rng = np.random.default_rng(seed)
    fm = FeatureMapSpec(n_qubits=n_qubits, repetitions=fm_repetitions, scale=fm_scale)
    an = AnsatzSpec(n_qubits=n_qubits, layers=ansatz_layers)
    reduction = init_reduction(in_dim, n_qubits, rng)
    reduction.b[:] = _neutral_bias(fm)
    theta = rng.normal(0.0, 0.1, size=an.parameter_count())
    return HybridModel(reduction=reduction, theta=theta, feature_map=fm, ansatz=an)


def make_encoder_model(
    encoder_config: EncoderConfig,
    image_shape: tuple[int, int, int],
    n_qubits: int = 1,
    fm_repetitions: int = 2,
    fm_scale: float = 2.0,
    ansatz_layers: int = 1,
    seed: int = 0,
) -> HybridModel:
    """Full stack: trainable encoder feeding the reduction layer and circuit."""
    rng = np.random.default_rng(seed)
    weights = init_encoder_weights(encoder_config, image_shape, rng)
    fm = FeatureMapSpec(n_qubits=n_qubits, repetitions=fm_repetitions, scale=fm_scale)
    an = AnsatzSpec(n_qubits=n_qubits, layers=ansatz_layers)
    reduction = init_reduction(encoder_config.out_dim, n_qubits, rng)
    reduction.b[:] = _neutral_bias(fm)
    theta = rng.normal(0.0, 0.1, size=an.parameter_count())
    return HybridModel(
        reduction=reduction,
        theta=theta,
        feature_map=fm,
        ansatz=an,
        encoder_config=encoder_config,
        encoder_weights=weights,
    )
