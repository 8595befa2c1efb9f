# conv_gemm/tiling.py
import math
import re
from dataclasses import dataclass, field

from core.exceptions import TilingError
from .layers import GemmShape

WARP_SIZE = 32
DEFAULT_WARP_TILE = (64, 32)  # (blk_WM, blk_WN)
SUPPORTED_TILE_HW = (128, 256)

# C_o 상한 -> (blk_N, blk_K). 마지막 항목은 상한 없음.
TILING_LOOKUP = (
    (32, 32, 4),
    (64, 64, 4),
    (None, 128, 8),
)


@dataclass(frozen=True)
class Tiling:
    blk_m: int
    blk_n: int
    blk_k: int
    blk_wm: int = DEFAULT_WARP_TILE[0]
    blk_wn: int = DEFAULT_WARP_TILE[1]
    num_warps: int = field(default=0)

    def __post_init__(self):
        for name in ('blk_m', 'blk_n', 'blk_k', 'blk_wm', 'blk_wn'):
            if getattr(self, name) < 1:
                raise TilingError(f"{name} 는 1 이상이어야 합니다: {getattr(self, name)}")
        if self.num_warps == 0:
            warps, rem = divmod(self.blk_m * self.blk_n, self.blk_wm * self.blk_wn)
            if rem or warps < 1:
                raise TilingError(
                    f"워프 타일 {self.blk_wm}x{self.blk_wn} 로 CTA 타일 {self.blk_m}x{self.blk_n} 을 덮을 수 없습니다."
                )
            object.__setattr__(self, 'num_warps', warps)
        self.validate()

    def validate(self):
        if self.blk_m * self.blk_n != self.blk_wm * self.blk_wn * self.num_warps:
            raise TilingError(
                f"워프 커버리지 불일치: {self.blk_m}x{self.blk_n} != "
                f"{self.blk_wm}x{self.blk_wn} x {self.num_warps} warps"
            )

    @property
    def threads(self) -> int:
        return self.num_warps * WARP_SIZE

    @property
    def label(self) -> str:
        return f"({self.blk_m}x{self.blk_n})x{self.blk_k}"


@dataclass(frozen=True)
class TileGrid:
    grid_rows: int
    grid_cols: int
    num_loops: int

    @property
    def num_cta(self) -> int:
        return self.grid_rows * self.grid_cols


def tile_grid(shape: GemmShape, tiling: Tiling) -> TileGrid:
    """가장자리의 부분 타일도 완전한 타일로 셉니다."""
    return TileGrid(
        grid_rows=math.ceil(shape.m / tiling.blk_m),
        grid_cols=math.ceil(shape.n / tiling.blk_n),
        num_loops=math.ceil(shape.k / tiling.blk_k),
    )


def select_tiling(out_channels: int, override: Tiling | None = None, tile_hw: int = 128) -> Tiling:
    if override is not None:
        override.validate()
        return override
    if out_channels < 1:
        raise TilingError(f"C_o 는 1 이상이어야 합니다: {out_channels}")
    if tile_hw not in SUPPORTED_TILE_HW:
        raise TilingError(f"CTA 타일 크기는 {SUPPORTED_TILE_HW} 중 하나여야 합니다: {tile_hw}")

    for upper, blk_n, blk_k in TILING_LOOKUP:
        if upper is None or out_channels <= upper:
            break
    # 256 타일 설계에서는 넓은 GEMM 에 256 열 타일을 씁니다.
    if tile_hw == 256 and out_channels > 128:
        blk_n = 256
    return Tiling(blk_m=tile_hw, blk_n=blk_n, blk_k=blk_k)


_TILE_SPEC = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def parse_tile_spec(text: str) -> Tiling:
    """'MxNxK' 형식 문자열을 기본 워프 타일을 가진 Tiling 으로 변환합니다."""
    match = _TILE_SPEC.match(text or '')
    if not match:
        raise TilingError(f"타일 형식은 MxNxK 여야 합니다: {text!r}")
    blk_m, blk_n, blk_k = (int(group) for group in match.groups())
    return Tiling(blk_m=blk_m, blk_n=blk_n, blk_k=blk_k)
