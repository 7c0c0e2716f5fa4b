"""Toy-scale vision-transformer encoder on plain numpy.

Pipeline: patch tokenization -> positional add -> L post-norm encoder
layers (self-attention + ReLU feed-forward, each with a skip connection
followed by layer normalization) -> linear head on token 0.

Array conventions: images are (H, W, C) float64 arrays in row-major
(row, column, channel) order; token sequences are (T, D) float64 matrices.
Forward passes are pure given the weights. `encode_with_cache` records the
intermediates needed by `encode_backward`, which returns analytic gradients
for every weight under the canonical parameter names used in checkpoints
(`patch_projection`, `positional`, `class_token`, `layer.{i}.attn.wq`, ...,
`head.w`, `head.b`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LAYER_NORM_EPS = 1e-5


@dataclass(frozen=True)
class EncoderConfig:
    patch_size: int
    embed_dim: int
    layers: int
    heads: int
    ffn_hidden: int
    out_dim: int = 16
    use_class_token: bool = True

    def __post_init__(self) -> None:
        for name in ("patch_size", "embed_dim", "layers", "heads", "ffn_hidden", "out_dim"):
            value = getattr(self, name)
            if name == "layers":
                if value < 0:
                    raise ValueError(f"{name} must be >= 0, got {value}")
            elif value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.embed_dim % self.heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} must be divisible by heads {self.heads}"
            )


@dataclass
class LayerWeights:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray


@dataclass
class EncoderWeights:
    patch_projection: np.ndarray          # (N*N*C, D)
    positional: np.ndarray                # (T, D), T includes the class token slot
    class_token: np.ndarray | None        # (D,) when enabled
    layers: list[LayerWeights]
    head_w: np.ndarray                    # (D, out_dim)
    head_b: np.ndarray                    # (out_dim,)


_LAYER_FIELDS = (
    ("attn.wq", "wq"),
    ("attn.wk", "wk"),
    ("attn.wv", "wv"),
    ("attn.wo", "wo"),
    ("ffn.w1", "w1"),
    ("ffn.b1", "b1"),
    ("ffn.w2", "w2"),
    ("ffn.b2", "b2"),
    ("ln1.gain", "ln1_gain"),
    ("ln1.bias", "ln1_bias"),
    ("ln2.gain", "ln2_gain"),
    ("ln2.bias", "ln2_bias"),
)


def named_parameters(weights: EncoderWeights) -> dict[str, np.ndarray]:
    """Live views of every trainable array, keyed by canonical name."""
    params: dict[str, np.ndarray] = {"patch_projection": weights.patch_projection}
    params["positional"] = weights.positional
    if weights.class_token is not None:
        params["class_token"] = weights.class_token
    for i, lw in enumerate(weights.layers):
        for suffix, attr in _LAYER_FIELDS:
            params[f"layer.{i}.{suffix}"] = getattr(lw, attr)
    params["head.w"] = weights.head_w
    params["head.b"] = weights.head_b
    return params


def _glorot(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    limit = math.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


def init_encoder_weights(
    config: EncoderConfig,
    image_shape: tuple[int, int, int],
    seed_or_rng,
) -> EncoderWeights:
    """Fresh weights for images of the given (H, W, C) shape.

    Projection matrices use uniform(+-sqrt(6/(fan_in+fan_out))), biases are
    zero, layer-norm gain/bias are 1/0, positional rows and the class token
    are normal(0, 0.02).
    """
    rng = np.random.default_rng(seed_or_rng)
    img_h, img_w, channels = image_shape
    n = config.patch_size
    if img_h % n != 0 or img_w % n != 0:
        raise ValueError(
            f"image {img_h}x{img_w} not divisible by patch size {n}"
        )
    num_patches = (img_h // n) * (img_w // n)
    t = num_patches + (1 if config.use_class_token else 0)
    d = config.embed_dim
    flat = n * n * channels

    layers = []
    for _ in range(config.layers):
        layers.append(
            LayerWeights(
                wq=_glorot(rng, (d, d)),
                wk=_glorot(rng, (d, d)),
                wv=_glorot(rng, (d, d)),
                wo=_glorot(rng, (d, d)),
                w1=_glorot(rng, (d, config.ffn_hidden)),
                b1=np.zeros(config.ffn_hidden),
                w2=_glorot(rng, (config.ffn_hidden, d)),
                b2=np.zeros(d),
                ln1_gain=np.ones(d),
                ln1_bias=np.zeros(d),
                ln2_gain=np.ones(d),
                ln2_bias=np.zeros(d),
            )
        )
    return EncoderWeights(
        patch_projection=_glorot(rng, (flat, d)),
        positional=rng.normal(0.0, 0.02, size=(t, d)),
        class_token=rng.normal(0.0, 0.02, size=d) if config.use_class_token else None,
        layers=layers,
        head_w=_glorot(rng, (d, config.out_dim)),
        head_b=np.zeros(config.out_dim),
    )


def extract_patches(image: np.ndarray, patch_size: int) -> np.ndarray:
    """Non-overlapping patches in row-major grid order, each flattened row-major."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 3:
        raise ValueError(f"image must be (H, W, C), got shape {image.shape}")
    img_h, img_w, channels = image.shape
    n = patch_size
    if img_h % n != 0 or img_w % n != 0:
        raise ValueError(f"image {img_h}x{img_w} not divisible by patch size {n}")
    grid = image.reshape(img_h // n, n, img_w // n, n, channels)
    return grid.transpose(0, 2, 1, 3, 4).reshape(-1, n * n * channels)


def tokenize(image: np.ndarray, weights: EncoderWeights, config: EncoderConfig) -> np.ndarray:
    """Project flattened patches to embeddings; prepend the class token if enabled."""
    patches = extract_patches(image, config.patch_size)
    if patches.shape[1] != weights.patch_projection.shape[0]:
        raise ValueError(
            f"patch length {patches.shape[1]} does not match projection rows "
            f"{weights.patch_projection.shape[0]}"
        )
    tokens = patches @ weights.patch_projection
    if config.use_class_token:
        tokens = np.vstack([weights.class_token, tokens])
    return tokens


def add_positional(tokens: np.ndarray, weights: EncoderWeights) -> np.ndarray:
    if tokens.shape != weights.positional.shape:
        raise ValueError(
            f"token matrix {tokens.shape} does not match positional matrix "
            f"{weights.positional.shape}"
        )
    return tokens + weights.positional


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    out, _, _ = _layer_norm_fwd(x, gain, bias)
    return out


def self_attention(
    x: np.ndarray,
    lw: LayerWeights,
    heads: int,
    return_weights: bool = False,
):
    """Multi-head scaled dot-product attention; heads=1 is the plain form."""
    t, d = x.shape
    dk = d // heads
    q = x @ lw.wq
    k = x @ lw.wk
    v = x @ lw.wv
    concat = np.empty_like(x)
    attn_weights = []
    for hh in range(heads):
        sl = slice(hh * dk, (hh + 1) * dk)
        attn = softmax_rows(q[:, sl] @ k[:, sl].T / math.sqrt(dk))
        concat[:, sl] = attn @ v[:, sl]
        attn_weights.append(attn)
    out = concat @ lw.wo
    if return_weights:
        return out, attn_weights
    return out


def ffn(x: np.ndarray, lw: LayerWeights) -> np.ndarray:
    """max(0, x @ w1 + b1) @ w2 + b2, elementwise ReLU."""
    return np.maximum(0.0, x @ lw.w1 + lw.b1) @ lw.w2 + lw.b2


def encoder_layer(x: np.ndarray, lw: LayerWeights, heads: int) -> np.ndarray:
    u = layer_norm(x + self_attention(x, lw, heads), lw.ln1_gain, lw.ln1_bias)
    return layer_norm(u + ffn(u, lw), lw.ln2_gain, lw.ln2_bias)


def run_layers(tokens: np.ndarray, weights: EncoderWeights, config: EncoderConfig) -> np.ndarray:
    for lw in weights.layers:
        tokens = encoder_layer(tokens, lw, config.heads)
    return tokens


def encode(image: np.ndarray, weights: EncoderWeights, config: EncoderConfig) -> np.ndarray:
    """Image -> feature vector (out_dim): full stack, head applied to token 0."""
    x = add_positional(tokenize(image, weights, config), weights)
    x = run_layers(x, weights, config)
    return x[0] @ weights.head_w + weights.head_b


# ---------------------------------------------------------------------------
# Forward with cache + analytic reverse mode
# ---------------------------------------------------------------------------

@dataclass
class _LayerCache:
    x: np.ndarray                 # layer input (T, D)
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    attn: list[np.ndarray]        # per-head (T, T) softmax weights
    concat: np.ndarray            # heads concatenated, pre-output-projection
    xhat1: np.ndarray             # normalized (x + attention) pre gain/bias
    istd1: np.ndarray             # (T, 1) inverse std of the first norm
    u: np.ndarray                 # output of the first norm
    hpre: np.ndarray              # u @ w1 + b1, pre-ReLU
    relu: np.ndarray
    xhat2: np.ndarray
    istd2: np.ndarray


@dataclass
class EncodeCache:
    patches: np.ndarray
    x0: np.ndarray                # tokens + positional
    layer_caches: list[_LayerCache] = field(default_factory=list)
    top: np.ndarray | None = None # final token matrix


def _layer_norm_fwd(x: np.ndarray, gain: np.ndarray, bias: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    istd = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = (x - mu) * istd
    return gain * xhat + bias, xhat, istd


def _layer_norm_bwd(g_out: np.ndarray, xhat: np.ndarray, istd: np.ndarray, gain: np.ndarray):
    g_gain = (g_out * xhat).sum(axis=0)
    g_bias = g_out.sum(axis=0)
    g_xhat = g_out * gain
    g_x = istd * (
        g_xhat
        - g_xhat.mean(axis=-1, keepdims=True)
        - xhat * (g_xhat * xhat).mean(axis=-1, keepdims=True)
    )
    return g_x, g_gain, g_bias


def encode_with_cache(
    image: np.ndarray, weights: EncoderWeights, config: EncoderConfig
) -> tuple[np.ndarray, EncodeCache]:
    """Forward pass recording every intermediate needed for encode_backward."""
    patches = extract_patches(image, config.patch_size)
    tokens = patches @ weights.patch_projection
    if config.use_class_token:
        tokens = np.vstack([weights.class_token, tokens])
    x = add_positional(tokens, weights)
    cache = EncodeCache(patches=patches, x0=x)

    heads = config.heads
    for lw in weights.layers:
        t, d = x.shape
        dk = d // heads
        q = x @ lw.wq
        k = x @ lw.wk
        v = x @ lw.wv
        concat = np.empty_like(x)
        attn_list = []
        for hh in range(heads):
            sl = slice(hh * dk, (hh + 1) * dk)
            attn = softmax_rows(q[:, sl] @ k[:, sl].T / math.sqrt(dk))
            concat[:, sl] = attn @ v[:, sl]
            attn_list.append(attn)
        u, xhat1, istd1 = _layer_norm_fwd(x + concat @ lw.wo, lw.ln1_gain, lw.ln1_bias)
        hpre = u @ lw.w1 + lw.b1
        relu = np.maximum(0.0, hpre)
        y, xhat2, istd2 = _layer_norm_fwd(u + relu @ lw.w2 + lw.b2, lw.ln2_gain, lw.ln2_bias)
        cache.layer_caches.append(
            _LayerCache(
                x=x, q=q, k=k, v=v, attn=attn_list, concat=concat,
                xhat1=xhat1, istd1=istd1, u=u, hpre=hpre, relu=relu,
                xhat2=xhat2, istd2=istd2,
            )
        )
        x = y
    cache.top = x
    return x[0] @ weights.head_w + weights.head_b, cache


def _attention_backward(
    g_attn_out: np.ndarray, lc: _LayerCache, lw: LayerWeights, heads: int
):
    t, d = lc.x.shape
    dk = d // heads
    g_concat = g_attn_out @ lw.wo.T
    g_wo = lc.concat.T @ g_attn_out
    g_q = np.empty_like(lc.q)
    g_k = np.empty_like(lc.k)
    g_v = np.empty_like(lc.v)
    scale = 1.0 / math.sqrt(dk)
    for hh in range(heads):
        sl = slice(hh * dk, (hh + 1) * dk)
        attn = lc.attn[hh]
        g_head = g_concat[:, sl]
        g_attn = g_head @ lc.v[:, sl].T
        g_v[:, sl] = attn.T @ g_head
        # softmax rows: g_s = attn * (g_attn - sum(g_attn * attn, row))
        g_scores = attn * (g_attn - (g_attn * attn).sum(axis=-1, keepdims=True))
        g_q[:, sl] = g_scores @ lc.k[:, sl] * scale
        g_k[:, sl] = g_scores.T @ lc.q[:, sl] * scale
    g_x = g_q @ lw.wq.T + g_k @ lw.wk.T + g_v @ lw.wv.T
    grads = {
        "attn.wq": lc.x.T @ g_q,
        "attn.wk": lc.x.T @ g_k,
        "attn.wv": lc.x.T @ g_v,
        "attn.wo": g_wo,
    }
    return g_x, grads


def _layer_backward(g_y: np.ndarray, lc: _LayerCache, lw: LayerWeights, heads: int):
    g_s2, g_ln2_gain, g_ln2_bias = _layer_norm_bwd(g_y, lc.xhat2, lc.istd2, lw.ln2_gain)
    g_f = g_s2
    g_w2 = lc.relu.T @ g_f
    g_b2 = g_f.sum(axis=0)
    g_h = (g_f @ lw.w2.T) * (lc.hpre > 0)
    g_w1 = lc.u.T @ g_h
    g_b1 = g_h.sum(axis=0)
    g_u = g_s2 + g_h @ lw.w1.T
    g_s1, g_ln1_gain, g_ln1_bias = _layer_norm_bwd(g_u, lc.xhat1, lc.istd1, lw.ln1_gain)
    g_x_attn, attn_grads = _attention_backward(g_s1, lc, lw, heads)
    g_x = g_s1 + g_x_attn
    grads = dict(attn_grads)
    grads.update(
        {
            "ffn.w1": g_w1,
            "ffn.b1": g_b1,
            "ffn.w2": g_w2,
            "ffn.b2": g_b2,
            "ln1.gain": g_ln1_gain,
            "ln1.bias": g_ln1_bias,
            "ln2.gain": g_ln2_gain,
            "ln2.bias": g_ln2_bias,
        }
    )
    return g_x, grads


def encode_backward(
    g_feature: np.ndarray,
    cache: EncodeCache,
    weights: EncoderWeights,
    config: EncoderConfig,
) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss for every encoder weight.

    `g_feature` is the upstream gradient with respect to encode()'s output.
    """
    if cache.top is None:
        raise RuntimeError("cache is incomplete; run encode_with_cache first")
    g_feature = np.asarray(g_feature, dtype=float)
    grads: dict[str, np.ndarray] = {
        "head.w": np.outer(cache.top[0], g_feature),
        "head.b": g_feature.copy(),
    }
    g_x = np.zeros_like(cache.top)
    g_x[0] = weights.head_w @ g_feature
    for i in range(len(weights.layers) - 1, -1, -1):
        g_x, layer_grads = _layer_backward(g_x, cache.layer_caches[i], weights.layers[i], config.heads)
        for suffix, g in layer_grads.items():
            grads[f"layer.{i}.{suffix}"] = g
    grads["positional"] = g_x.copy()
    if config.use_class_token:
        grads["class_token"] = g_x[0].copy()
        g_patch_tokens = g_x[1:]
    else:
        g_patch_tokens = g_x
    grads["patch_projection"] = cache.patches.T @ g_patch_tokens
    return grads
