# traffic_model/equations.py
"""L1/L2/DRAM 트래픽 닫힌 식. 모든 값은 sympy.Rational 로 정확하게 계산합니다."""
from sympy import Rational, ceiling

from conv_gemm.layers import ConvLayerConfig, GemmShape
from conv_gemm.tiling import WARP_SIZE, Tiling, tile_grid
from core.exceptions import MliUnavailableError
from oracle_sim.coalescing import filter_mli as oracle_filter_mli
from .granularity import L1Granularity

# 128B 요청 기준, 모든 캐시 라인 정렬을 평균한 필터 MLI
MLI_FILTER_TABLE = {
    8: Rational(2),
    4: Rational(11, 4),
}
MLI_FILTER_TABLE_COALESCE = 128


# --- L1 ---

def access_ratio(cfg: ConvLayerConfig) -> Rational:
    """요청된 원소 수 / 사용된 원소 수."""
    width = cfg.padded_width
    return Rational(width * cfg.stride, width - cfg.filter_width + 1)


def mli_ifmap(cfg: ConvLayerConfig, gran: L1Granularity) -> Rational:
    """워프당 요청 바이트 / 사용 바이트. 워프가 요청 하나보다 작으면 1 보다 커집니다."""
    bytes_per_warp = WARP_SIZE * cfg.elem_bytes
    requests_made = ceiling(access_ratio(cfg) * Rational(bytes_per_warp, gran.coalesce_bytes))
    return requests_made * Rational(gran.coalesce_bytes, bytes_per_warp)


def mli_filter(tiling: Tiling, gran: L1Granularity | None = None, elem_bytes: int = 4,
               override=None) -> Rational:
    gran = gran or L1Granularity()
    if override is not None:
        value = Rational(str(override))
        if value < 1:
            raise MliUnavailableError(f"MLI_Filter 값은 1 이상이어야 합니다: {override}")
        return value
    if gran.coalesce_bytes == MLI_FILTER_TABLE_COALESCE:
        try:
            return MLI_FILTER_TABLE[tiling.blk_k]
        except KeyError:
            raise MliUnavailableError(
                f"blk_K={tiling.blk_k} 에 대한 MLI_Filter 상수가 없습니다 (지원: {sorted(MLI_FILTER_TABLE)}). "
                f"값을 직접 지정하세요."
            ) from None
    return oracle_filter_mli(tiling.blk_k, elem_bytes, gran.sector_bytes)


def l1_traffic(shape: GemmShape, mli_if, mli_fil, elem_bytes: int) -> Rational:
    return elem_bytes * (shape.m * shape.k * Rational(mli_if) + shape.n * shape.k * Rational(mli_fil))


# --- L2 ---

def dist_v(cfg: ConvLayerConfig, tiling: Tiling) -> Rational:
    if cfg.is_pointwise:
        # 1x1/FC: 타일 높이 그대로
        return Rational(tiling.blk_m)
    return tiling.blk_m * access_ratio(cfg)


def a_dist_v(cfg: ConvLayerConfig, tiling: Tiling) -> Rational:
    return dist_v(cfg, tiling) * Rational(tiling.blk_k, cfg.filter_height * cfg.filter_width)


def dist_h_terms(cfg: ConvLayerConfig, tiling: Tiling) -> tuple[Rational, bool]:
    """(DIST_H, 클램프 적용 여부). 폭은 패딩된 폭을 사용합니다."""
    if cfg.is_pointwise:
        return Rational(0), False
    blk_k, w_f, strd = tiling.blk_k, cfg.filter_width, cfg.stride
    width = cfg.padded_width

    clamped = False
    stride_span = strd * (w_f - blk_k + 1)
    if stride_span < 0:
        stride_span, clamped = 0, True
    first = Rational(blk_k - 1, w_f) * ((width - w_f + 1) + stride_span)
    second = Rational(w_f - blk_k + 1, w_f) * (strd * (blk_k - 1))
    if second < 0:
        second, clamped = Rational(0), True
    return first + second, clamped


def dist_h(cfg: ConvLayerConfig, tiling: Tiling) -> Rational:
    return dist_h_terms(cfg, tiling)[0]


def a_dist_h(cfg: ConvLayerConfig, tiling: Tiling) -> Rational:
    if cfg.is_pointwise:
        return Rational(0)
    feature = Rational(cfg.padded_height - cfg.filter_height + 1, cfg.stride)
    return dist_h(cfg, tiling) * (1 + tiling.blk_m / feature ** 2)


def dist_filter(tiling: Tiling) -> Rational:
    return Rational(tiling.blk_n * tiling.blk_k)


def l2_tile_elements(cfg: ConvLayerConfig, tiling: Tiling) -> Rational:
    """메인 루프 한 번에 CTA 가 L2 로 요청하는 고유 원소 수."""
    return a_dist_v(cfg, tiling) + a_dist_h(cfg, tiling) + dist_filter(tiling)


def l2_traffic(cfg: ConvLayerConfig, shape: GemmShape, tiling: Tiling) -> Rational:
    grid = tile_grid(shape, tiling)
    return cfg.elem_bytes * l2_tile_elements(cfg, tiling) * grid.num_loops * grid.num_cta


# --- DRAM ---

def dram_ifmap_traffic(cfg: ConvLayerConfig, shape: GemmShape, tiling: Tiling) -> Rational:
    grid = tile_grid(shape, tiling)
    if cfg.is_pointwise and cfg.stride > 1:
        # 건너뛴 원소는 읽지 않습니다.
        footprint = cfg.batch * shape.out_height * shape.out_width * cfg.in_channels
    else:
        footprint = cfg.ifmap_elements
    return Rational(cfg.elem_bytes * footprint * grid.grid_cols)


def dram_filter_traffic(cfg: ConvLayerConfig) -> Rational:
    return Rational(cfg.elem_bytes * cfg.filter_elements)


def dram_traffic(cfg: ConvLayerConfig, shape: GemmShape, tiling: Tiling) -> Rational:
    return dram_ifmap_traffic(cfg, shape, tiling) + dram_filter_traffic(cfg)
