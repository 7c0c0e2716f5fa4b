"""Exact gradients across the classical/quantum boundary.

The circuit side uses the two-point parameter-shift rule, applied to each
gate angle individually: for any one U1 or RY angle the readout probability
is a degree-1 trigonometric polynomial, so
[p0(a + pi/2) - p0(a - pi/2)] / 2 is the exact derivative. A classical
feature that enters several phase gates through a scale factor gets the
chain-rule sum of per-gate shifts. The classical side (reduction layer,
encoder) is analytic reverse mode. A central finite-difference oracle backs
every gradient in the test suite and in the `gradcheck` CLI command.

Label convention (kept deliberately): P(0) is the probability assigned to
label 1, i.e. loss = -[y*log P(0) + (1-y)*log P(1)].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from .circuits import AnsatzSpec, FeatureMapSpec, build_real_amplitudes, build_z_feature_map
from .encoder import encode_backward
from .statevector import marginal_zero_probability, new_zero_state, run_circuit

if TYPE_CHECKING:
    from .model import ForwardCache, HybridModel

PROB_EPS = 1e-12


@dataclass
class ReductionLayer:
    """Trainable linear map from feature vectors to qubit-sized outputs."""

    w: np.ndarray  # (in_dim, n_out)
    b: np.ndarray  # (n_out,)

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.w.ndim != 2:
            raise ValueError(f"w must be a 2-D matrix, got shape {self.w.shape}")
        if self.b.shape != (self.w.shape[1],):
            raise ValueError(
                f"b shape {self.b.shape} does not match w columns {self.w.shape[1]}"
            )
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.b))):
            raise ValueError("reduction parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.w.shape[0]

    @property
    def n_out(self) -> int:
        return self.w.shape[1]


def init_reduction(in_dim: int, n_out: int, seed_or_rng) -> ReductionLayer:
    """Uniform init at a tenth of the fan-in/fan-out limit, zero bias.

    The outputs are circuit angles with a pi-periodic readout, so initial
    values must stay well inside one period; the plain limit would scatter
    them across several.
    """
    rng = np.random.default_rng(seed_or_rng)
    limit = 0.1 * math.sqrt(6.0 / (in_dim + n_out))
    return ReductionLayer(w=rng.uniform(-limit, limit, size=(in_dim, n_out)), b=np.zeros(n_out))


def reduce(x, layer: ReductionLayer) -> np.ndarray:
    """y = w^T x + b per output column."""
    x = np.asarray(x, dtype=float)
    if x.shape != (layer.in_dim,):
        raise ValueError(
            f"input of shape {x.shape} does not match reduction in_dim {layer.in_dim}"
        )
    return x @ layer.w + layer.b


def _clamp(p: float) -> float:
    return min(max(p, PROB_EPS), 1.0 - PROB_EPS)


def bce_loss(p0: float, p1: float, y_true: int) -> float:
    """Binary cross-entropy on measurement probabilities, clamped before logs."""
    if y_true not in (0, 1):
        raise ValueError(f"y_true must be 0 or 1, got {y_true!r}")
    if not (-1e-9 <= p0 <= 1.0 + 1e-9 and -1e-9 <= p1 <= 1.0 + 1e-9):
        raise ValueError(f"probabilities out of range: p0={p0}, p1={p1}")
    if abs(p0 + p1 - 1.0) > 1e-9:
        raise ValueError(f"p0 + p1 must be 1, got {p0 + p1}")
    return -(y_true * math.log(_clamp(p0)) + (1 - y_true) * math.log(_clamp(p1)))


def bce_grad_p0(p0: float, y_true: int) -> float:
    """dL/dp0 using the p1 = 1 - p0 substitution."""
    if y_true not in (0, 1):
        raise ValueError(f"y_true must be 0 or 1, got {y_true!r}")
    return -y_true / _clamp(p0) + (1 - y_true) / _clamp(1.0 - p0)


def param_shift_grad(circuit_eval: Callable, theta, index: int) -> float:
    """Two-point parameter-shift derivative at +-pi/2.

    Exact whenever theta[index] is the angle of a single RY or U1 gate.
    """
    theta = np.asarray(theta, dtype=float)
    up = theta.copy()
    up[index] += math.pi / 2.0
    down = theta.copy()
    down[index] -= math.pi / 2.0
    grad = (float(circuit_eval(up)) - float(circuit_eval(down))) / 2.0
    if not math.isfinite(grad):
        raise FloatingPointError(f"parameter-shift evaluation at index {index} is not finite")
    return grad


def finite_diff_grad(f: Callable, theta, index: int, h: float = 1e-5) -> float:
    """Central difference [f(t+h) - f(t-h)] / 2h on one coordinate."""
    theta = np.asarray(theta, dtype=float)
    up = theta.copy()
    up[index] += h
    down = theta.copy()
    down[index] -= h
    grad = (float(f(up)) - float(f(down))) / (2.0 * h)
    if not math.isfinite(grad):
        raise FloatingPointError(f"finite-difference evaluation at index {index} is not finite")
    return grad


def circuit_angle_gradients(
    features,
    theta,
    fm: FeatureMapSpec,
    an: AnsatzSpec,
    readout_qubit: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """(dp0/dfeatures, dp0/dtheta) via per-gate parameter shifts.

    Each U1 and RY angle is shifted on its own; feature gradients chain the
    per-gate results with the feature-map scale, summing over repetitions.
    """
    gates = build_z_feature_map(features, fm) + build_real_amplitudes(theta, an)
    param_positions = [i for i, g in enumerate(gates) if g.kind in ("U1", "RY")]
    zero = new_zero_state(fm.n_qubits)

    def p0_with_angle(position: int, angle: float) -> float:
        shifted = list(gates)
        shifted[position] = replace(gates[position], angle=angle)
        return marginal_zero_probability(run_circuit(zero, shifted), readout_qubit)

    d_features = np.zeros(fm.n_qubits)
    d_theta = np.zeros(len(theta))
    ry_seen = 0
    for pos in param_positions:
        gate = gates[pos]
        shift = (
            p0_with_angle(pos, gate.angle + math.pi / 2.0)
            - p0_with_angle(pos, gate.angle - math.pi / 2.0)
        ) / 2.0
        if gate.kind == "U1":
            d_features[gate.target] += fm.scale * shift
        else:
            d_theta[ry_seen] = shift
            ry_seen += 1
    return d_features, d_theta


def backward(model: "HybridModel", cache: "ForwardCache", y_true: int) -> dict[str, np.ndarray]:
    """Gradients of the BCE loss for every trainable parameter.

    Requires the cache produced by model_forward for the same sample;
    returns a mapping from parameter name to a gradient array of matching
    shape (one record per parameter).
    """
    if cache is None:
        raise RuntimeError("no cached forward pass; call model_forward first")
    g_p0 = bce_grad_p0(cache.p0, y_true)
    d_feat_angles, d_theta_angles = circuit_angle_gradients(
        cache.y_vec, model.theta, model.feature_map, model.ansatz, model.readout_qubit
    )
    g_y = g_p0 * d_feat_angles
    grads: dict[str, np.ndarray] = {
        "reduction.w": np.outer(cache.feat, g_y),
        "reduction.b": g_y.copy(),
        "ansatz.theta": g_p0 * d_theta_angles,
    }
    if model.encoder_weights is not None:
        g_feat = model.reduction.w @ g_y
        encoder_grads = encode_backward(
            g_feat, cache.encoder_cache, model.encoder_weights, model.encoder_config
        )
        for name, g in encoder_grads.items():
            grads[f"encoder.{name}"] = g
    return grads
