"""Structural model of the dilated single-level encoder.

Covers three views of the same structure: analytic receptive-field
enumeration over shortcut paths, a scale-coverage interval model, and a
naive numeric forward pass for impulse-response checks.  No training is
involved; batch norm runs in inference form only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

BN_EPS = 1e-5

FEATURE_LEVEL_STRIDES = {
    "C3": 8, "C4": 16, "C5": 32, "DC5": 16,
    "P3": 8, "P4": 16, "P5": 32, "P6": 64, "P7": 128,
}


@dataclass(frozen=True)
class FeatureLevel:
    """Named backbone/pyramid level with its downsample rate."""

    name: str
    channels: int = 2048

    def __post_init__(self):
        if self.name not in FEATURE_LEVEL_STRIDES:
            raise ValueError(f"unknown feature level {self.name!r}")

    @property
    def stride(self) -> int:
        return FEATURE_LEVEL_STRIDES[self.name]


@dataclass(frozen=True)
class EncoderSpec:
    """Projector (1x1 then 3x3 conv) followed by dilated residual blocks.

    Each block is 1x1 reduce (rate 4), 3x3 dilated, 1x1 expand, with an
    identity shortcut that can be disabled.
    """

    in_channels: int = 2048
    mid_channels: int = 512
    num_blocks: int = 4
    dilations: tuple = (2, 4, 6, 8)
    shortcuts: bool = True

    def __post_init__(self):
        if len(self.dilations) != self.num_blocks:
            raise ValueError(f"{len(self.dilations)} dilations for "
                             f"{self.num_blocks} blocks")
        if any(d < 1 for d in self.dilations):
            raise ValueError("dilations must be positive integers")
        if self.mid_channels % 4:
            raise ValueError("mid_channels must be divisible by 4")

    @property
    def block_channels(self) -> int:
        return self.mid_channels // 4


@dataclass(frozen=True)
class RFProfile:
    """Receptive-field extents (feature-grid cells), one per shortcut path."""

    extents: tuple

    @property
    def max_extent(self) -> int:
        return max(self.extents)

    def pixel_coverage(self, stride: int) -> int:
        """Approximate input-pixel span of the widest path."""
        return self.max_extent * stride


def rf_profile(spec: EncoderSpec) -> RFProfile:
    """Enumerate receptive-field extents over all shortcut path subsets.

    The projector's 3x3 contributes extent 3; a traversed block's dilated
    3x3 adds ``2 * d``; 1x1 layers add nothing.  Without shortcuts only
    the all-through path exists.
    """
    if spec.shortcuts:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(spec.dilations, r)
            for r in range(spec.num_blocks + 1))
        extents = {3 + 2 * sum(s) for s in subsets}
    else:
        extents = {3 + 2 * sum(spec.dilations)}
    return RFProfile(extents=tuple(sorted(extents)))


def scale_coverage(profile: RFProfile, stride: int):
    """Heuristic object-scale bands covered by each extent.

    Each extent ``e`` maps to the pixel-scale interval
    ``[e * stride / 2, e * stride]``.  Returns ``(bands, union, gaps)``;
    this is a model of coverage, not a measured quantity.
    """
    if not profile.extents:
        raise ValueError("empty receptive-field profile")
    bands = [(e * stride / 2.0, float(e * stride)) for e in profile.extents]
    union = []
    for lo, hi in sorted(bands):
        if union and lo <= union[-1][1]:
            union[-1] = (union[-1][0], max(union[-1][1], hi))
        else:
            union.append((lo, hi))
    gaps = [(union[i][1], union[i + 1][0]) for i in range(len(union) - 1)]
    return bands, union, gaps


@dataclass
class ConvBN:
    """One convolution with inference-mode batch-norm parameters."""

    weight: np.ndarray  # (out, in, k, k)
    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def identity_bn(cls, weight: np.ndarray) -> "ConvBN":
        out = weight.shape[0]
        return cls(weight=weight, gamma=np.ones(out), beta=np.zeros(out),
                   mean=np.zeros(out), var=np.ones(out))


@dataclass
class WeightSet:
    """All encoder weights: projector pair plus per-block conv triples."""

    proj_reduce: ConvBN
    proj_refine: ConvBN
    blocks: list  # [(reduce, dilated, expand), ...]

    @classmethod
    def identity(cls, spec: EncoderSpec) -> "WeightSet":
        """Channel-slice 1x1 convs, center-tap 3x3 convs, identity BN."""
        def eye(out, inp, k):
            w = np.zeros((out, inp, k, k))
            for c in range(min(out, inp)):
                w[c, c, k // 2, k // 2] = 1.0
            return ConvBN.identity_bn(w)

        b = spec.block_channels
        m = spec.mid_channels
        return cls(
            proj_reduce=eye(m, spec.in_channels, 1),
            proj_refine=eye(m, m, 3),
            blocks=[(eye(b, m, 1), eye(b, b, 3), eye(m, b, 1))
                    for _ in range(spec.num_blocks)],
        )

    @classmethod
    def constant(cls, spec: EncoderSpec, value: float = 0.05) -> "WeightSet":
        """All-positive constant conv weights with identity BN."""
        def full(out, inp, k):
            return ConvBN.identity_bn(np.full((out, inp, k, k), value))

        b = spec.block_channels
        m = spec.mid_channels
        return cls(
            proj_reduce=full(m, spec.in_channels, 1),
            proj_refine=full(m, m, 3),
            blocks=[(full(b, m, 1), full(b, b, 3), full(m, b, 1))
                    for _ in range(spec.num_blocks)],
        )

    @classmethod
    def seeded(cls, spec: EncoderSpec, seed: int,
               scale: float = 0.1) -> "WeightSet":
        """Deterministic random weights, uniform in ``[-scale, scale]``."""
        rng = np.random.default_rng(seed)

        def rand(out, inp, k):
            return ConvBN.identity_bn(
                rng.uniform(-scale, scale, size=(out, inp, k, k)))

        b = spec.block_channels
        m = spec.mid_channels
        return cls(
            proj_reduce=rand(m, spec.in_channels, 1),
            proj_refine=rand(m, m, 3),
            blocks=[(rand(b, m, 1), rand(b, b, 3), rand(m, b, 1))
                    for _ in range(spec.num_blocks)],
        )


def conv2d(x: np.ndarray, weight: np.ndarray, dilation: int = 1) -> np.ndarray:
    """Direct 2-D convolution, zero padded to preserve H x W.

    ``x`` is ``(C, H, W)``; ``weight`` is ``(O, C, k, k)`` with odd ``k``.
    Padding equals ``dilation * (k // 2)``.
    """
    out_ch, in_ch, k, _ = weight.shape
    if x.shape[0] != in_ch:
        raise ValueError(f"input has {x.shape[0]} channels, weight expects "
                         f"{in_ch}")
    _, h, w = x.shape
    pad = dilation * (k // 2)
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    out = np.zeros((out_ch, h, w))
    for ky in range(k):
        for kx in range(k):
            patch = xp[:, ky * dilation:ky * dilation + h,
                       kx * dilation:kx * dilation + w]
            out += np.tensordot(weight[:, :, ky, kx], patch, axes=1)
    return out


def batchnorm(x: np.ndarray, layer: ConvBN) -> np.ndarray:
    scale = layer.gamma / np.sqrt(layer.var + BN_EPS)
    shift = layer.beta - layer.mean * scale
    return x * scale[:, None, None] + shift[:, None, None]


def forward(spec: EncoderSpec, x: np.ndarray,
            weights: WeightSet) -> np.ndarray:
    """Numeric forward pass: projector (conv+BN only) then residual blocks
    (every conv followed by BN and ReLU, shortcut added after the block)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != spec.in_channels:
        raise ValueError(f"expected ({spec.in_channels}, H, W) input, got "
                         f"shape {x.shape}")
    x = batchnorm(conv2d(x, weights.proj_reduce.weight), weights.proj_reduce)
    x = batchnorm(conv2d(x, weights.proj_refine.weight), weights.proj_refine)
    for i, (reduce_w, dilated_w, expand_w) in enumerate(weights.blocks):
        y = np.maximum(batchnorm(conv2d(x, reduce_w.weight), reduce_w), 0.0)
        y = np.maximum(batchnorm(
            conv2d(y, dilated_w.weight, dilation=spec.dilations[i]),
            dilated_w), 0.0)
        y = np.maximum(batchnorm(conv2d(y, expand_w.weight), expand_w), 0.0)
        x = x + y if spec.shortcuts else y
    return x


def impulse_footprint(spec: EncoderSpec, grid: int) -> int:
    """Side of the nonzero output square for a centered unit impulse.

    Runs the numeric forward with all-positive constant weights; the
    result should equal the analytic max receptive-field extent when the
    grid is large enough to contain it.
    """
    x = np.zeros((spec.in_channels, grid, grid))
    x[0, grid // 2, grid // 2] = 1.0
    out = forward(spec, x, WeightSet.constant(spec))
    hot = np.abs(out).sum(axis=0) > 0
    ys, xs = np.nonzero(hot)
    if len(ys) == 0:
        return 0
    return int(max(ys.max() - ys.min(), xs.max() - xs.min()) + 1)
