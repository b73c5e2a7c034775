"""
Depth enhancement network.

Stem encoders embed the guidance (prompt ``M_0``) and the sensor depth
(feature ``X_0``) at half resolution; the PPFB chain and the stage encoders
descend to ``1 / 2**S`` resolution; a skip-connected decoder climbs back and
a linear head predicts, in units of ``depth_scale``, either a correction to
the hole-filled sensor depth (``residual`` output) or the depth itself
(``absolute`` output).

Parameter names:

* ``enc.guidance``, ``enc.depth``, ``enc.joint``: stem convolutions
* ``enc.stage.<i>``: stage encoders (last one is a 1x1 bottleneck)
* ``ppfb.<i>.*``: fusion blocks, ``ppfb.<i>.resample`` for ``i >= 1``
* ``dec.<i>``: decoder projections, ``head``: output layer
"""

import logging
import zlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.constants import (
    GUIDANCE_AOLP,
    GUIDANCE_CHANNELS,
    GUIDANCE_DOLP,
    GUIDANCE_INTENSITY,
    INPUT_MODE_PROMPT,
    OUTPUT_RESIDUAL,
)
from src.core.guidance import GuidanceTensor
from src.errors import DimensionMismatchError, IncompleteParamsError
from src.fusion.chain import ChainCache, chain_backward, chain_forward_with_cache
from src.fusion.ppfb import LAYER_NAMES, FusionState, PpfbParams
from src.model.config import GUIDANCE_INTENSITY_ONLY, ModelConfig
from src.model.depth_map import DepthMap
from src.model.stages import ConvStage, PointwiseStage, PromptResampler
from src.numerics.layers import (
    LinearLayer,
    Seed,
    pointwise_linear,
    pointwise_linear_backward,
    relu,
    relu_backward,
    upsample_nearest2,
    upsample_nearest2_backward,
)
from src.numerics.params import ParamStore
from src.numerics.tensor import Tensor, check_finite

logger = logging.getLogger(__name__)

Grads = Dict[str, Tensor]

STEM_GUIDANCE = "enc.guidance"
STEM_DEPTH = "enc.depth"
STEM_JOINT = "enc.joint"
HEAD = "head"


def stage_name(i: int) -> str:
    return f"enc.stage.{i}"


def decoder_name(i: int) -> str:
    return f"dec.{i}"


def block_prefix(i: int) -> str:
    return f"ppfb.{i}"


def resampler_name(i: int) -> str:
    """Resampler feeding the prompt into stage ``i`` (``i >= 1``)."""
    return f"ppfb.{i}.resample"


def _stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode("utf-8"))])


def layer_shapes(config: ModelConfig) -> List[Tuple[str, int, int]]:
    """``(name, in_features, out_features)`` of every non-PPFB linear layer."""
    widths = config.widths
    c0 = widths[0]
    shapes = [
        (STEM_GUIDANCE, 9 * GUIDANCE_CHANNELS, c0),
        (STEM_DEPTH, 9, c0),
        (STEM_JOINT, 9 * (GUIDANCE_CHANNELS + 1), c0),
    ]
    for i in range(config.stages):
        if i + 1 < config.stages:
            shapes.append((stage_name(i), 9 * widths[i], widths[i + 1]))
        else:
            shapes.append((stage_name(i), widths[i], widths[i]))
    for i in range(1, config.n_ppfb):
        shapes.append((resampler_name(i), widths[i - 1], widths[i]))
    for i in range(config.stages - 1):
        shapes.append((decoder_name(i), widths[i + 1], widths[i]))
    shapes.append((HEAD, c0, 1))
    return shapes


def required_names(config: ModelConfig) -> List[str]:
    """Names a parameter store must hold to run ``config``."""
    names = []
    for name, _, _ in layer_shapes(config):
        names += [f"{name}.weight", f"{name}.bias"]
    for i in range(config.n_ppfb):
        prefix = block_prefix(i)
        for layer in LAYER_NAMES:
            names += [f"{prefix}.{layer}.weight", f"{prefix}.{layer}.bias"]
        names.append(f"{prefix}.lambda")
    return sorted(names)


def init_params(config: ModelConfig, seed: int = 0) -> ParamStore:
    """
    Fresh parameters for ``config``.

    Every layer draws from its own stream keyed by ``(seed, name)``, so
    configurations that share a layer name also share its initial value.
    The head weight starts at zero and its bias at ``head_bias``. Fusion
    blocks start with an identity feature branch: at inference, backbone
    weights give the same depth (up to rounding) with or without them.
    """
    store = ParamStore()
    for name, in_features, out_features in layer_shapes(config):
        if name == HEAD:
            layer = LinearLayer.zeros(in_features, out_features)
            layer.bias[:] = config.head_bias
        else:
            rng = _stream(seed, name)
            layer = LinearLayer.initialize(in_features, out_features, rng)
        store.add_layer(name, layer)
    for i in range(config.n_ppfb):
        prefix = block_prefix(i)
        PpfbParams.pass_through(
            config.widths[i],
            _stream(seed, prefix),
            prefix=prefix,
            dropout_p=config.dropout_p,
            lambda_init=config.lambda_init,
        ).add_to_store(store)
    logger.debug("initialized %d tensors (seed %d)", len(store), seed)
    return store


def guidance_input(guidance: GuidanceTensor, config: ModelConfig) -> Tensor:
    """Guidance channels fed to the network, with the intensity-only swap."""
    data = guidance.data.copy()
    if config.guidance_source == GUIDANCE_INTENSITY_ONLY:
        data[GUIDANCE_AOLP] = data[GUIDANCE_INTENSITY]
        data[GUIDANCE_DOLP] = data[GUIDANCE_INTENSITY]
    return data


def sensor_input(sensor: DepthMap, config: ModelConfig) -> Tensor:
    """Sensor depth in network units, zero where invalid, as ``[1, H, W]``."""
    return (sensor.to_raster() / config.depth_scale)[None]


def residual_base(sensor: DepthMap, config: ModelConfig) -> Tensor:
    """
    Depth the head output is added to, in millimetres.

    Valid sensor pixels keep their reading; the others take the mean valid
    reading (``depth_scale`` when there is none). Zero in absolute mode.
    """
    if config.output_mode != OUTPUT_RESIDUAL:
        return np.zeros(sensor.shape)
    if sensor.n_valid == 0:
        return np.full(sensor.shape, config.depth_scale)
    fill = float(sensor.depth[sensor.valid].mean())
    return np.where(sensor.valid, sensor.depth, fill)


@dataclass
class NetworkCache:
    """Everything ``EnhancementNetwork.backward`` needs from a forward pass."""

    stem_caches: Dict[str, Tuple[Tensor, Tensor]]
    chain: ChainCache
    decoder: List[Tuple[Tensor, Tensor]]
    head_in: Tensor
    raw: Tensor


class EnhancementNetwork:
    """
    The enhancement model bound to one parameter store.

    Raises ``IncompleteParamsError`` at construction if any tensor the
    configuration needs is missing.
    """

    def __init__(self, params: ParamStore, config: ModelConfig):
        missing = [n for n in required_names(config) if n not in params]
        if missing:
            raise IncompleteParamsError(
                f"{len(missing)} parameters missing, e.g. {missing[:3]}"
            )
        self._params = params
        self._config = config
        self._stems = {
            name: ConvStage.from_store(params, name)
            for name in (STEM_GUIDANCE, STEM_DEPTH, STEM_JOINT)
        }
        self._encoders = [
            (ConvStage if i + 1 < config.stages else PointwiseStage).from_store(
                params, stage_name(i)
            )
            for i in range(config.stages)
        ]
        self._blocks: List[Optional[PpfbParams]] = [
            PpfbParams.from_store(params, block_prefix(i), config.dropout_p)
            if i < config.n_ppfb
            else None
            for i in range(config.stages)
        ]
        self._resamplers = [
            PromptResampler.from_store(params, resampler_name(i + 1))
            for i in range(config.n_ppfb - 1)
        ]
        self._decoder = [
            params.layer(decoder_name(i)) for i in range(config.stages - 1)
        ]
        self._head = params.layer(HEAD)

    @property
    def config(self) -> ModelConfig:
        return self._config

    @property
    def params(self) -> ParamStore:
        return self._params

    def _check_size(self, height: int, width: int) -> None:
        step = self._config.downsampling
        if height % step or width % step:
            raise DimensionMismatchError(
                f"image size {height}x{width} must be divisible by {step}"
            )

    def forward(
        self,
        guidance: GuidanceTensor,
        sensor: DepthMap,
        training: bool = False,
        seed: Seed = 0,
    ) -> Tuple[DepthMap, NetworkCache]:
        """Predict a dense depth map; also returns the backward cache."""
        config = self._config
        if sensor.shape != (guidance.height, guidance.width):
            raise DimensionMismatchError(
                f"guidance {(guidance.height, guidance.width)} vs sensor "
                f"{sensor.shape}"
            )
        self._check_size(*sensor.shape)

        g_in = guidance_input(guidance, config)
        d_in = sensor_input(sensor, config)
        joint_in = np.concatenate([g_in, d_in])
        stem_caches: Dict[str, Tuple[Tensor, Tensor]] = {}

        x0, stem_caches[STEM_JOINT] = self._stems[STEM_JOINT].forward(joint_in)
        if config.input_mode == INPUT_MODE_PROMPT:
            x_depth, stem_caches[STEM_DEPTH] = self._stems[STEM_DEPTH].forward(d_in)
            x0 = x0 + x_depth
        if config.n_ppfb:
            m0, stem_caches[STEM_GUIDANCE] = self._stems[STEM_GUIDANCE].forward(g_in)
        else:
            m0 = np.zeros_like(x0)

        feature, outputs, chain = chain_forward_with_cache(
            FusionState(prompt=m0, feature=x0),
            self._blocks,
            self._encoders,
            self._resamplers,
            dropout_seed=seed,
            training=training,
        )

        decoder: List[Tuple[Tensor, Tensor]] = []
        f = feature
        for i in reversed(range(config.stages - 1)):
            up = upsample_nearest2(f)
            pre = pointwise_linear(self._decoder[i], up)
            f = relu(pre) + outputs[i].feature
            decoder.append((up, pre))
        head_in = upsample_nearest2(f)
        head = pointwise_linear(self._head, head_in)[0]
        raw = residual_base(sensor, config) + config.depth_scale * head
        check_finite(raw, "network.head")

        depth = np.clip(raw, config.d_min, config.d_max)
        cache = NetworkCache(
            stem_caches=stem_caches,
            chain=chain,
            decoder=decoder,
            head_in=head_in,
            raw=raw,
        )
        return DepthMap.dense(depth), cache

    def backward(self, cache: NetworkCache, grad_depth: Tensor) -> Grads:
        """Parameter gradients given ``dL/d depth`` as an ``[H, W]`` raster.

        The output clamp passes gradient only where it was inactive.
        Parameters the configuration does not use get zero gradients.
        """
        config = self._config
        grads: Grads = {}
        inside = (cache.raw >= config.d_min) & (cache.raw <= config.d_max)
        g_out = (config.depth_scale * grad_depth * inside)[None]
        g_up, gw, gb = pointwise_linear_backward(self._head, cache.head_in, g_out)
        grads[f"{HEAD}.weight"], grads[f"{HEAD}.bias"] = gw, gb
        g_f = upsample_nearest2_backward(g_up)

        skips: List[Optional[Tensor]] = [None] * config.stages
        # decoder entries were appended deepest first
        for i, (up, pre) in zip(range(config.stages - 1), reversed(cache.decoder)):
            skips[i] = g_f
            g_up, gw, gb = pointwise_linear_backward(
                self._decoder[i], up, relu_backward(pre, g_f)
            )
            name = decoder_name(i)
            grads[f"{name}.weight"], grads[f"{name}.bias"] = gw, gb
            g_f = upsample_nearest2_backward(g_up)

        g_state, chain_grads = chain_backward(cache.chain, g_f, skips)
        grads.update(chain_grads)

        stem_grads = {STEM_JOINT: g_state.feature}
        if config.input_mode == INPUT_MODE_PROMPT:
            stem_grads[STEM_DEPTH] = g_state.feature
        if config.n_ppfb:
            stem_grads[STEM_GUIDANCE] = g_state.prompt
        for name, g in stem_grads.items():
            _, layer_grads = self._stems[name].backward(cache.stem_caches[name], g)
            grads.update(layer_grads)

        for name, tensor in self._params.items():
            if name not in grads:
                grads[name] = np.zeros_like(tensor)
        return grads


def enhance(
    guidance: GuidanceTensor,
    sensor: DepthMap,
    params: ParamStore,
    config: ModelConfig,
    training: bool = False,
    seed: Seed = 0,
) -> DepthMap:
    """Dense depth in millimetres, clamped to ``[d_min, d_max]``."""
    depth, _ = EnhancementNetwork(params, config).forward(
        guidance, sensor, training=training, seed=seed
    )
    return depth
