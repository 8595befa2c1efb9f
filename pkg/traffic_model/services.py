# traffic_model/services.py
from dataclasses import dataclass

from sympy import Rational

from conv_gemm.layers import ConvLayerConfig, GemmShape, im2col_shape
from conv_gemm.tiling import TileGrid, Tiling, select_tiling, tile_grid
from core.exceptions import LayerConfigError
from core.logs import log_with_time
from . import equations
from .granularity import L1Granularity

LOGGER_NAME = 'traffic_model'


@dataclass(frozen=True)
class TrafficEstimate:
    """레이어 하나의 계층별 트래픽(바이트)과 CTA 메인 루프당 트래픽."""
    name: str
    elem_bytes: int
    shape: GemmShape
    tiling: Tiling
    grid: TileGrid
    t_l1_bytes: float
    t_l2_bytes: float
    t_dram_bytes: float
    t_dram_write_bytes: float
    tpl_l1: float
    tpl_l2: float
    tpl_dram: float
    mli_ifmap: float
    mli_filter: float
    a_dist_v: float
    a_dist_h: float
    dist_filter: float
    dist_h_clamped: bool = False
    fixed_miss_rate: float | None = None
    fits_in_l2: bool | None = None

    @property
    def l1_miss_rate(self) -> float:
        return self.t_l2_bytes / self.t_l1_bytes if self.t_l1_bytes else 0.0

    @property
    def l2_miss_rate(self) -> float:
        return self.t_dram_bytes / self.t_l2_bytes if self.t_l2_bytes else 0.0


def footprint_bytes(cfg: ConvLayerConfig) -> int:
    """패딩된 IFmap 과 필터가 차지하는 바이트."""
    return cfg.elem_bytes * (cfg.ifmap_elements + cfg.filter_elements)


def estimate_traffic(cfg: ConvLayerConfig, gran: L1Granularity | None = None, tiling: Tiling | None = None,
                     fixed_miss_rate: float | None = None, mli_filter_override=None,
                     l2_size_bytes: int | None = None) -> TrafficEstimate:
    gran = gran or L1Granularity()
    shape = im2col_shape(cfg)
    tiling = select_tiling(cfg.out_channels, override=tiling)
    grid = tile_grid(shape, tiling)
    elem = cfg.elem_bytes
    log_prefix = f"[TRAFFIC|{cfg.name}]"

    fits_in_l2 = None
    if l2_size_bytes is not None:
        fits_in_l2 = footprint_bytes(cfg) <= l2_size_bytes
        if fits_in_l2:
            log_with_time(f"[WARN] {log_prefix} 작업 집합이 L2({l2_size_bytes:,}B)에 들어갑니다. "
                          f"DRAM 추정치는 상한으로 보십시오.", level="WARN", name=LOGGER_NAME)

    t_dram_write = elem * shape.m * shape.n

    if fixed_miss_rate is not None:
        return _fixed_miss_rate_estimate(cfg, shape, tiling, grid, fixed_miss_rate, t_dram_write, fits_in_l2)

    mli_if = equations.mli_ifmap(cfg, gran)
    mli_fil = equations.mli_filter(tiling, gran, elem_bytes=elem, override=mli_filter_override)
    t_l1 = equations.l1_traffic(shape, mli_if, mli_fil, elem)

    a_dist_v = equations.a_dist_v(cfg, tiling)
    a_dist_h = equations.a_dist_h(cfg, tiling)
    dist_fil = equations.dist_filter(tiling)
    _, clamped = equations.dist_h_terms(cfg, tiling)
    if clamped:
        log_with_time(f"[WARN] {log_prefix} DIST_H 의 음수 항을 0 으로 클램프했습니다 "
                      f"(blk_K={tiling.blk_k}, W_f={cfg.filter_width}, Strd={cfg.stride}).",
                      level="WARN", name=LOGGER_NAME)
    tile_elements = a_dist_v + a_dist_h + dist_fil
    t_l2 = elem * tile_elements * grid.num_loops * grid.num_cta
    t_dram = equations.dram_traffic(cfg, shape, tiling)

    tpl_l1 = elem * (tiling.blk_m * tiling.blk_k * mli_if + tiling.blk_n * tiling.blk_k * mli_fil)
    tpl_l2 = elem * tile_elements
    # 메인 루프마다 균등하게 나눕니다.
    tpl_dram = t_dram / (grid.num_cta * grid.num_loops)

    log_with_time(f"{log_prefix} └─ L1 {float(t_l1):,.0f}B, L2 {float(t_l2):,.0f}B, DRAM {float(t_dram):,.0f}B "
                  f"(tile {tiling.label})", level="DEBUG", name=LOGGER_NAME)
    return TrafficEstimate(
        name=cfg.name, elem_bytes=elem, shape=shape, tiling=tiling, grid=grid,
        t_l1_bytes=float(t_l1), t_l2_bytes=float(t_l2), t_dram_bytes=float(t_dram),
        t_dram_write_bytes=float(t_dram_write),
        tpl_l1=float(tpl_l1), tpl_l2=float(tpl_l2), tpl_dram=float(tpl_dram),
        mli_ifmap=float(mli_if), mli_filter=float(mli_fil),
        a_dist_v=float(a_dist_v), a_dist_h=float(a_dist_h), dist_filter=float(dist_fil),
        dist_h_clamped=clamped, fits_in_l2=fits_in_l2,
    )


def _fixed_miss_rate_estimate(cfg: ConvLayerConfig, shape: GemmShape, tiling: Tiling, grid: TileGrid,
                              miss_rate: float, t_dram_write: int, fits_in_l2: bool | None) -> TrafficEstimate:
    """고정 미스율 모드: L1 = GEMM 입력 크기, 아래 계층은 미스율을 곱합니다."""
    if not 0 <= miss_rate <= 1:
        raise LayerConfigError(f"미스율은 0 과 1 사이여야 합니다: {miss_rate}")
    elem = cfg.elem_bytes
    rate = Rational(str(miss_rate))
    t_l1 = Rational(elem * (shape.m + shape.n) * shape.k)
    tpl_l1 = Rational(elem * (tiling.blk_m + tiling.blk_n) * tiling.blk_k)
    return TrafficEstimate(
        name=cfg.name, elem_bytes=elem, shape=shape, tiling=tiling, grid=grid,
        t_l1_bytes=float(t_l1), t_l2_bytes=float(t_l1 * rate), t_dram_bytes=float(t_l1 * rate * rate),
        t_dram_write_bytes=float(t_dram_write),
        tpl_l1=float(tpl_l1), tpl_l2=float(tpl_l1 * rate), tpl_dram=float(tpl_l1 * rate * rate),
        mli_ifmap=1.0, mli_filter=1.0, a_dist_v=0.0, a_dist_h=0.0, dist_filter=0.0,
        fixed_miss_rate=float(miss_rate), fits_in_l2=fits_in_l2,
    )
