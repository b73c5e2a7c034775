"""
Prompt chaining across encoder stages.

Stage ``i`` fuses ``(M_i, X_i)`` with a PPFB, hands ``X_i*`` to encoder
``i`` and resamples the updated prompt to the next stage's shape:

    (M_{i+1}', X_i*) = ppfb_i(M_i, X_i)
    X_{i+1} = encoder_i(X_i*)
    M_{i+1} = resampler_i(M_{i+1}')

A ``None`` block is a pass-through stage (``X_i* = X_i``). Blocks must form
a prefix of the stage list: once a stage has no block, no later stage may
have one.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from src.errors import DimensionMismatchError
from src.fusion.ppfb import (
    FusionState,
    PpfbCache,
    PpfbParams,
    ppfb_backward,
    ppfb_forward_with_cache,
)
from src.numerics.layers import Seed
from src.numerics.tensor import Tensor

Grads = Dict[str, Tensor]


class StageTransform(Protocol):
    """A differentiable map between stage rasters."""

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]: ...

    def backward(self, cache: Any, grad_y: Tensor) -> Tuple[Tensor, Grads]: ...


class IdentityStage:
    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        return x, None

    def backward(self, cache: Any, grad_y: Tensor) -> Tuple[Tensor, Grads]:
        return grad_y, {}


@dataclass
class ChainCache:
    blocks: List[Optional[PpfbParams]]
    encoders: List[StageTransform]
    resamplers: List[StageTransform]
    ppfb_caches: List[Optional[PpfbCache]] = field(default_factory=list)
    encoder_caches: List[Any] = field(default_factory=list)
    resampler_caches: List[Any] = field(default_factory=list)


def _stage_seed(seed: Seed, i: int) -> List[int]:
    base = [seed] if isinstance(seed, int) else list(seed)
    return [*base, i]


def _check_blocks(
    blocks: Sequence[Optional[PpfbParams]], encoders, resamplers
) -> None:
    if not blocks:
        raise DimensionMismatchError("chain needs at least one stage")
    if len(encoders) != len(blocks):
        raise DimensionMismatchError(
            f"chain: {len(blocks)} stages but {len(encoders)} encoders"
        )
    seen_gap = False
    for i, block in enumerate(blocks):
        if block is None:
            seen_gap = True
        elif seen_gap:
            raise DimensionMismatchError(f"chain: stage {i} has a block after a gap")
    needed = sum(1 for b in blocks[1:] if b is not None)
    if len(resamplers) < needed:
        raise DimensionMismatchError(
            f"chain: {needed} prompt resamplers needed, {len(resamplers)} given"
        )


def chain_forward_with_cache(
    initial: FusionState,
    blocks: Sequence[Optional[PpfbParams]],
    encoders: Sequence[StageTransform],
    resamplers: Sequence[StageTransform] = (),
    dropout_seed: Seed = 0,
    training: bool = False,
) -> Tuple[Tensor, List[FusionState], ChainCache]:
    _check_blocks(blocks, encoders, resamplers)
    cache = ChainCache(list(blocks), list(encoders), list(resamplers))
    outputs: List[FusionState] = []
    state = initial
    for i, block in enumerate(blocks):
        if block is None:
            fused, pcache = state, None
        else:
            fused, pcache = ppfb_forward_with_cache(
                state,
                block,
                dropout_seed=_stage_seed(dropout_seed, i),
                training=training,
            )
        outputs.append(fused)
        cache.ppfb_caches.append(pcache)

        x_next, ecache = encoders[i].forward(fused.feature)
        cache.encoder_caches.append(ecache)
        if i + 1 == len(blocks):
            feature = x_next
            break
        if blocks[i + 1] is not None:
            m_next, rcache = resamplers[i].forward(fused.prompt)
        else:
            m_next, rcache = np.zeros_like(x_next), None
        cache.resampler_caches.append(rcache)
        if m_next.shape != x_next.shape:
            raise DimensionMismatchError(
                f"chain stage {i + 1}: prompt {m_next.shape} vs feature {x_next.shape}"
            )
        state = FusionState(prompt=m_next, feature=x_next)
    return feature, outputs, cache


def chain_forward(
    initial: FusionState,
    blocks: Sequence[Optional[PpfbParams]],
    encoders: Sequence[StageTransform],
    resamplers: Sequence[StageTransform] = (),
    dropout_seed: Seed = 0,
    training: bool = False,
) -> Tuple[Tensor, List[FusionState]]:
    """Run the whole chain; returns the final feature and every stage output."""
    feature, outputs, _ = chain_forward_with_cache(
        initial, blocks, encoders, resamplers, dropout_seed, training
    )
    return feature, outputs


def chain_backward(
    cache: ChainCache,
    grad_feature: Tensor,
    grad_skips: Optional[Sequence[Optional[Tensor]]] = None,
) -> Tuple[FusionState, Grads]:
    """
    Backpropagate through the chain.

    Args:
        cache: From ``chain_forward_with_cache``.
        grad_feature: Gradient w.r.t. the final feature.
        grad_skips: Optional gradient w.r.t. each stage output feature
            (the skip connections), ``None`` entries meaning zero.

    Returns:
        Gradient w.r.t. the initial state and all parameter gradients.
    """
    grads: Grads = {}
    n = len(cache.blocks)
    skips = list(grad_skips) if grad_skips is not None else [None] * n
    g_x_next = grad_feature
    g_m_next: Optional[Tensor] = None
    for i in reversed(range(n)):
        g_feature, enc_grads = cache.encoders[i].backward(
            cache.encoder_caches[i], g_x_next
        )
        grads.update(enc_grads)
        if skips[i] is not None:
            g_feature = g_feature + skips[i]

        g_prompt = np.zeros_like(g_feature)
        resampled = i + 1 < n and cache.resampler_caches[i] is not None
        if resampled and g_m_next is not None:
            g_prompt, res_grads = cache.resamplers[i].backward(
                cache.resampler_caches[i], g_m_next
            )
            grads.update(res_grads)

        upstream = FusionState(prompt=g_prompt, feature=g_feature)
        if cache.blocks[i] is None:
            g_state = upstream
        else:
            g_state, block_grads = ppfb_backward(cache.ppfb_caches[i], upstream)
            grads.update(block_grads)
        g_x_next = g_state.feature
        g_m_next = g_state.prompt
    return FusionState(prompt=g_m_next, feature=g_x_next), grads
