# conv_gemm/layers.py
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.exceptions import LayerConfigError

SUPPORTED_ELEM_BYTES = (2, 4, 8)


@dataclass(frozen=True)
class ConvLayerConfig:
    """BCHW 텐서 하나에 대한 컨볼루션 레이어 차원. 패딩은 메모리에 실제로 존재한다고 봅니다."""
    name: str
    batch: int
    in_channels: int
    in_height: int
    in_width: int
    out_channels: int
    filter_height: int
    filter_width: int
    stride: int = 1
    pad: int = 0
    elem_bytes: int = 4

    def __post_init__(self):
        for field_name in ('batch', 'in_channels', 'in_height', 'in_width', 'out_channels',
                           'filter_height', 'filter_width', 'stride'):
            value = getattr(self, field_name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise LayerConfigError(f"[{self.name}] {field_name} 는 1 이상의 정수여야 합니다: {value!r}")
        if not isinstance(self.pad, (int, np.integer)) or self.pad < 0:
            raise LayerConfigError(f"[{self.name}] pad 는 0 이상의 정수여야 합니다: {self.pad!r}")
        if self.elem_bytes not in SUPPORTED_ELEM_BYTES:
            raise LayerConfigError(f"[{self.name}] elem_bytes 는 {SUPPORTED_ELEM_BYTES} 중 하나여야 합니다: {self.elem_bytes}")
        if self.padded_height < self.filter_height or self.padded_width < self.filter_width:
            raise LayerConfigError(
                f"[{self.name}] 필터({self.filter_height}x{self.filter_width})가 패딩된 입력"
                f"({self.padded_height}x{self.padded_width})보다 큽니다."
            )

    @property
    def padded_height(self) -> int:
        return self.in_height + 2 * self.pad

    @property
    def padded_width(self) -> int:
        return self.in_width + 2 * self.pad

    @property
    def is_pointwise(self) -> bool:
        """1x1 컨볼루션 및 FC 레이어."""
        return self.filter_height == 1 and self.filter_width == 1

    @property
    def ifmap_elements(self) -> int:
        return self.batch * self.in_channels * self.padded_height * self.padded_width

    @property
    def filter_elements(self) -> int:
        return self.in_channels * self.filter_height * self.filter_width * self.out_channels


@dataclass(frozen=True)
class GemmShape:
    m: int
    n: int
    k: int
    out_height: int
    out_width: int


def fc_layer(name: str, batch: int, in_features: int, out_features: int, elem_bytes: int = 4) -> ConvLayerConfig:
    """FC 레이어를 1x1 입력 위의 1x1 컨볼루션으로 표현합니다."""
    return ConvLayerConfig(
        name=name, batch=batch, in_channels=in_features, in_height=1, in_width=1,
        out_channels=out_features, filter_height=1, filter_width=1, stride=1, pad=0,
        elem_bytes=elem_bytes,
    )


def output_dims(cfg: ConvLayerConfig) -> Tuple[int, int]:
    if cfg.padded_height < cfg.filter_height or cfg.padded_width < cfg.filter_width:
        raise LayerConfigError(f"[{cfg.name}] 유효한 출력 위치가 없습니다.")
    out_height = (cfg.padded_height - cfg.filter_height) // cfg.stride + 1
    out_width = (cfg.padded_width - cfg.filter_width) // cfg.stride + 1
    return out_height, out_width


def im2col_shape(cfg: ConvLayerConfig) -> GemmShape:
    out_height, out_width = output_dims(cfg)
    return GemmShape(
        m=cfg.batch * out_height * out_width,
        n=cfg.out_channels,
        k=cfg.in_channels * cfg.filter_height * cfg.filter_width,
        out_height=out_height,
        out_width=out_width,
    )


# --- 주소 계산 ---
# address(row, col) = row_offset(row) + col_offset(col) 로 분리됩니다.
#   row -> (b, y, x):  b*C_i*Hp*Wp + y*Strd*Wp + x*Strd
#   col -> (c, r, s):  c*Hp*Wp + r*Wp + s

def row_offsets(cfg: ConvLayerConfig, rows) -> np.ndarray:
    """GEMM 행 인덱스 배열을 원소 단위 행 오프셋으로 변환합니다."""
    out_height, out_width = output_dims(cfg)
    rows = np.asarray(rows, dtype=np.int64)
    plane = cfg.padded_height * cfg.padded_width
    b, rem = np.divmod(rows, out_height * out_width)
    y, x = np.divmod(rem, out_width)
    return b * cfg.in_channels * plane + y * cfg.stride * cfg.padded_width + x * cfg.stride


def col_offsets(cfg: ConvLayerConfig, cols) -> np.ndarray:
    """GEMM 열 인덱스 배열을 원소 단위 열 오프셋으로 변환합니다."""
    cols = np.asarray(cols, dtype=np.int64)
    c, rem = np.divmod(cols, cfg.filter_height * cfg.filter_width)
    r, s = np.divmod(rem, cfg.filter_width)
    return c * cfg.padded_height * cfg.padded_width + r * cfg.padded_width + s


def im2col_address(cfg: ConvLayerConfig, row: int, col: int) -> int:
    shape = im2col_shape(cfg)
    if not 0 <= row < shape.m:
        raise LayerConfigError(f"[{cfg.name}] 행 인덱스 {row} 가 범위 [0, {shape.m}) 밖입니다.")
    if not 0 <= col < shape.k:
        raise LayerConfigError(f"[{cfg.name}] 열 인덱스 {col} 가 범위 [0, {shape.k}) 밖입니다.")
    return int(row_offsets(cfg, [row])[0] + col_offsets(cfg, [col])[0])
