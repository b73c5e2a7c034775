"""
Polarization Prompt Fusion Block.

Both inputs are ``[C, H, W]`` rasters treated as ``H * W`` tokens of
dimension ``C``. The block has two branches:

* feature update: ``[k; q; v] = W_kqv [M; X]``,
  ``a = lambda * softmax(FC_attn [q; k])`` over channels, and
  ``[X*; M^x] = dropout(FC_d(a * v))`` split into two halves;
* prompt update (channel fovea): ``[s_q; s_k]`` is the spatial mean of
  ``FC_stats(M + X)`` and ``M* = M^x + FC_out((s_q * M + s_k * X) * k)``.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.constants import DEFAULT_DROPOUT_P, DEFAULT_LAMBDA_INIT
from src.errors import DimensionMismatchError, DomainError, MissingCacheError
from src.numerics.layers import (
    LinearLayer,
    Seed,
    dropout_mask,
    global_avg_pool,
    global_avg_pool_backward,
    linear,
    linear_backward,
    softmax,
    softmax_backward,
)
from src.numerics.params import ParamStore
from src.numerics.tensor import Tensor, check_finite

LAYER_NAMES = ("w_kqv", "fc_attn", "fc_d", "fc_stats", "fc_out")


@dataclass(frozen=True)
class FusionState:
    """Polarization prompt ``M`` and encoder feature ``X``, both ``[C, H, W]``."""

    prompt: Tensor
    feature: Tensor

    def __post_init__(self):
        if self.prompt.shape != self.feature.shape or self.feature.ndim != 3:
            raise DimensionMismatchError(
                f"FusionState: prompt {self.prompt.shape} vs feature "
                f"{self.feature.shape}"
            )

    @property
    def channels(self) -> int:
        return self.feature.shape[0]


@dataclass(frozen=True)
class PpfbParams:
    """Weights of one block, named ``<prefix>.<layer>.{weight,bias}``."""

    w_kqv: LinearLayer
    fc_attn: LinearLayer
    fc_d: LinearLayer
    fc_stats: LinearLayer
    fc_out: LinearLayer
    lam: float = DEFAULT_LAMBDA_INIT
    dropout_p: float = DEFAULT_DROPOUT_P
    prefix: str = "ppfb.0"

    def __post_init__(self):
        c = self.channels
        expected = {
            "w_kqv": (3 * c, 2 * c),
            "fc_attn": (c, 2 * c),
            "fc_d": (2 * c, c),
            "fc_stats": (2 * c, c),
            "fc_out": (c, c),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).weight.shape
            if actual != shape:
                raise DimensionMismatchError(
                    f"{self.prefix}.{name}: expected {shape}, got {actual}"
                )
        if not self.lam > 0:
            raise DomainError(f"{self.prefix}.lambda must be positive, got {self.lam}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise DomainError(f"{self.prefix}: dropout must be in [0, 1)")

    @property
    def channels(self) -> int:
        return self.fc_out.out_features

    @classmethod
    def initialize(
        cls,
        channels: int,
        rng: np.random.Generator,
        prefix: str = "ppfb.0",
        dropout_p: float = DEFAULT_DROPOUT_P,
        lambda_init: float = DEFAULT_LAMBDA_INIT,
    ) -> "PpfbParams":
        c = channels
        return cls(
            w_kqv=LinearLayer.initialize(2 * c, 3 * c, rng),
            fc_attn=LinearLayer.initialize(2 * c, c, rng),
            fc_d=LinearLayer.initialize(c, 2 * c, rng),
            fc_stats=LinearLayer.initialize(c, 2 * c, rng),
            fc_out=LinearLayer.initialize(c, c, rng),
            lam=lambda_init,
            dropout_p=dropout_p,
            prefix=prefix,
        )

    @classmethod
    def pass_through(
        cls,
        channels: int,
        rng: np.random.Generator,
        prefix: str = "ppfb.0",
        dropout_p: float = DEFAULT_DROPOUT_P,
        lambda_init: float = DEFAULT_LAMBDA_INIT,
    ) -> "PpfbParams":
        """
        Random block whose feature branch starts as the identity.

        ``v`` copies ``X``, the attention logits are zero (uniform weights
        ``1 / C``) and the ``X*`` half of ``FC_d`` undoes the ``lambda / C``
        scale, so ``X* = X`` until training moves the weights. The prompt
        branch keeps its random initialization.
        """
        block = cls.initialize(channels, rng, prefix, dropout_p, lambda_init)
        c = channels
        eye = np.eye(c)
        block.w_kqv.weight[2 * c :] = 0.0
        block.w_kqv.weight[2 * c :, c:] = eye
        block.w_kqv.bias[2 * c :] = 0.0
        block.fc_attn.weight[:] = 0.0
        block.fc_attn.bias[:] = 0.0
        block.fc_d.weight[:c] = (c / lambda_init) * eye
        block.fc_d.bias[:c] = 0.0
        return block

    @classmethod
    def from_store(
        cls, store: ParamStore, prefix: str, dropout_p: float = DEFAULT_DROPOUT_P
    ) -> "PpfbParams":
        layers = {name: store.layer(f"{prefix}.{name}") for name in LAYER_NAMES}
        lam = float(store[f"{prefix}.lambda"][0])
        return cls(lam=lam, dropout_p=dropout_p, prefix=prefix, **layers)

    def add_to_store(self, store: ParamStore) -> None:
        for name in LAYER_NAMES:
            store.add_layer(f"{self.prefix}.{name}", getattr(self, name))
        store.add(f"{self.prefix}.lambda", np.array([self.lam]))


@dataclass
class PpfbCache:
    """Forward intermediates, token layout ``[H*W, C]``."""

    params: PpfbParams
    shape: Tuple[int, int, int]
    prompt: Tensor
    feature: Tensor
    joint: Tensor
    k: Tensor
    v: Tensor
    qk: Tensor
    attn: Tensor
    fused: Tensor
    mask: Optional[Tensor]
    summed: Tensor
    s_q: Tensor
    s_k: Tensor
    mix: Tensor
    gated: Tensor


def _tokens(x: Tensor) -> Tensor:
    return x.reshape(x.shape[0], -1).T


def _raster(tokens: Tensor, shape: Tuple[int, int, int]) -> Tensor:
    return tokens.T.reshape(shape)


def ppfb_forward_with_cache(
    state: FusionState,
    params: PpfbParams,
    dropout_seed: Seed = 0,
    training: bool = False,
) -> Tuple[FusionState, PpfbCache]:
    if state.channels != params.channels:
        raise DimensionMismatchError(
            f"{params.prefix}: block has {params.channels} channels, "
            f"state has {state.channels}"
        )
    c, h, w = state.feature.shape
    m = _tokens(state.prompt)
    x = _tokens(state.feature)

    joint = np.concatenate([m, x], axis=1)
    kqv = linear(params.w_kqv, joint)
    k, q, v = kqv[:, :c], kqv[:, c : 2 * c], kqv[:, 2 * c :]
    qk = np.concatenate([q, k], axis=1)
    attn = softmax(linear(params.fc_attn, qk), axis=-1)
    fused = params.lam * attn * v

    projected = linear(params.fc_d, fused)
    mask = None
    if training and params.dropout_p > 0.0:
        mask = dropout_mask(projected.shape, params.dropout_p, dropout_seed)
        projected = projected * mask
    check_finite(projected, f"{params.prefix}.feature_update")
    x_star, m_x = projected[:, :c], projected[:, c:]

    summed = m + x
    stats = linear(params.fc_stats, summed)
    pooled = global_avg_pool(_raster(stats, (2 * c, h, w)))
    s_q, s_k = pooled[:c], pooled[c:]
    mix = s_q * m + s_k * x
    gated = mix * k
    m_star = m_x + linear(params.fc_out, gated)
    check_finite(m_star, f"{params.prefix}.prompt_update")

    out = FusionState(
        prompt=_raster(m_star, (c, h, w)), feature=_raster(x_star, (c, h, w))
    )
    cache = PpfbCache(
        params=params,
        shape=(c, h, w),
        prompt=m,
        feature=x,
        joint=joint,
        k=k,
        v=v,
        qk=qk,
        attn=attn,
        fused=fused,
        mask=mask,
        summed=summed,
        s_q=s_q,
        s_k=s_k,
        mix=mix,
        gated=gated,
    )
    return out, cache


def ppfb_forward(
    state: FusionState,
    params: PpfbParams,
    dropout_seed: Seed = 0,
    training: bool = False,
) -> FusionState:
    """Apply one block; returns ``FusionState(prompt=M*, feature=X*)``."""
    out, _ = ppfb_forward_with_cache(state, params, dropout_seed, training)
    return out


def ppfb_backward(
    cache: Optional[PpfbCache], upstream: FusionState
) -> Tuple[FusionState, Dict[str, Tensor]]:
    """
    Gradients of a scalar loss through one block.

    Args:
        cache: Intermediates from the paired ``ppfb_forward_with_cache``.
        upstream: Loss gradients w.r.t. ``M*`` (prompt) and ``X*`` (feature).

    Returns:
        Gradients w.r.t. the input state, and parameter gradients keyed by
        full store name.
    """
    if cache is None:
        raise MissingCacheError("ppfb_backward called without a forward cache")
    p = cache.params
    c, h, w = cache.shape
    g_xstar = _tokens(upstream.feature)
    g_mstar = _tokens(upstream.prompt)
    grads: Dict[str, Tensor] = {}

    def record(name: str, gw: Tensor, gb: Tensor) -> None:
        grads[f"{p.prefix}.{name}.weight"] = gw
        grads[f"{p.prefix}.{name}.bias"] = gb

    # prompt update branch
    g_gated, gw, gb = linear_backward(p.fc_out, cache.gated, g_mstar)
    record("fc_out", gw, gb)
    g_mix = g_gated * cache.k
    g_k = g_gated * cache.mix
    g_sq = np.sum(g_mix * cache.prompt, axis=0)
    g_sk = np.sum(g_mix * cache.feature, axis=0)
    g_m = g_mix * cache.s_q
    g_x = g_mix * cache.s_k
    g_pooled = np.concatenate([g_sq, g_sk])
    g_stats = _tokens(global_avg_pool_backward(g_pooled, h, w))
    g_summed, gw, gb = linear_backward(p.fc_stats, cache.summed, g_stats)
    record("fc_stats", gw, gb)
    g_m = g_m + g_summed
    g_x = g_x + g_summed

    # feature update branch; M^x passes g_mstar straight through
    g_projected = np.concatenate([g_xstar, g_mstar], axis=1)
    if cache.mask is not None:
        g_projected = g_projected * cache.mask
    g_fused, gw, gb = linear_backward(p.fc_d, cache.fused, g_projected)
    record("fc_d", gw, gb)
    g_v = g_fused * (p.lam * cache.attn)
    g_weights = g_fused * cache.v
    grads[f"{p.prefix}.lambda"] = np.array([np.sum(g_weights * cache.attn)])
    g_logits = softmax_backward(cache.attn, p.lam * g_weights)
    g_qk, gw, gb = linear_backward(p.fc_attn, cache.qk, g_logits)
    record("fc_attn", gw, gb)
    g_q = g_qk[:, :c]
    g_k = g_k + g_qk[:, c:]
    g_kqv = np.concatenate([g_k, g_q, g_v], axis=1)
    g_joint, gw, gb = linear_backward(p.w_kqv, cache.joint, g_kqv)
    record("w_kqv", gw, gb)
    g_m = g_m + g_joint[:, :c]
    g_x = g_x + g_joint[:, c:]

    g_state = FusionState(
        prompt=_raster(g_m, (c, h, w)), feature=_raster(g_x, (c, h, w))
    )
    return g_state, grads
