# oracle_sim/services.py
"""im2col 주소 스트림을 직접 열거하는 검증용 오라클."""
import math
from dataclasses import dataclass, field

import numpy as np
from sympy import Rational

from conv_gemm.layers import ConvLayerConfig, GemmShape, col_offsets, im2col_shape, output_dims, row_offsets
from conv_gemm.tiling import Tiling, select_tiling, tile_grid
from core.exceptions import OracleCapExceeded
from core.logs import log_with_time
from traffic_model.granularity import L1Granularity
from .coalescing import CHUNK_ELEMENTS, filter_transactions, ifmap_transactions

LOGGER_NAME = 'oracle_sim'
DEFAULT_ENUMERATION_CAP = 100_000_000


def check_enumeration_cap(shape: GemmShape, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    requested = shape.m * shape.k + shape.n * shape.k
    if requested > cap:
        log_with_time(f"[WARN] [ORACLE] 열거 거부: {requested:,} > {cap:,}", level="WARN", name=LOGGER_NAME)
        raise OracleCapExceeded(cap=cap, requested=requested)
    return requested


@dataclass(frozen=True)
class L1TransactionCount:
    """IFmap/필터 행렬을 한 번씩 읽을 때의 L1 트랜잭션 수 (위상 평균)."""
    ifmap_made: Rational
    ifmap_ideal: int
    filter_made: Rational
    filter_ideal: int

    @property
    def made(self) -> Rational:
        return self.ifmap_made + self.filter_made

    @property
    def ideal(self) -> int:
        return self.ifmap_ideal + self.filter_ideal

    @property
    def ifmap_mli(self) -> Rational:
        return self.ifmap_made / self.ifmap_ideal

    @property
    def filter_mli(self) -> Rational:
        return self.filter_made / self.filter_ideal


def l1_transactions(cfg: ConvLayerConfig, tiling: Tiling, gran: L1Granularity, phases: str = 'all',
                    cap: int = DEFAULT_ENUMERATION_CAP) -> L1TransactionCount:
    """IFmap 은 요청(coalesce) 단위, 필터는 sector 단위로 셉니다."""
    shape = im2col_shape(cfg)
    check_enumeration_cap(shape, cap)
    ifmap_made, ifmap_ideal = ifmap_transactions(cfg, gran.coalesce_bytes, phases)
    filter_made, filter_ideal = filter_transactions(shape.n, shape.k, tiling.blk_k, cfg.elem_bytes,
                                                    gran.sector_bytes, phases)
    return L1TransactionCount(ifmap_made, ifmap_ideal, filter_made, filter_ideal)


def _ifmap_tile_counts(cfg: ConvLayerConfig, shape: GemmShape, tiling: Tiling,
                       cta_rows: np.ndarray, loop_index: int) -> np.ndarray:
    """주어진 CTA 행들의 blk_M x blk_K IFmap 부분 타일별 고유 주소 수."""
    k0 = loop_index * tiling.blk_k
    cols = np.arange(k0, min(k0 + tiling.blk_k, shape.k))
    col_part = col_offsets(cfg, cols)

    lane_rows = cta_rows[:, None] * tiling.blk_m + np.arange(tiling.blk_m)[None, :]
    valid = lane_rows < shape.m
    # 범위 밖 행은 타일 첫 행으로 대체합니다 (고유 개수 불변).
    lane_rows = np.where(valid, lane_rows, lane_rows[:, :1])
    row_part = row_offsets(cfg, lane_rows.ravel()).reshape(lane_rows.shape)

    addresses = (row_part[:, :, None] + col_part[None, None, :]).reshape(len(cta_rows), -1)
    addresses = np.sort(addresses, axis=1)
    return 1 + np.count_nonzero(addresses[:, 1:] != addresses[:, :-1], axis=1)


def _filter_tile_count(shape: GemmShape, tiling: Tiling, loop_index: int, cta_col: int = 0) -> int:
    # 필터 원소 n*K + k 는 서로 모두 다릅니다.
    n_valid = min(tiling.blk_n, shape.n - cta_col * tiling.blk_n)
    k_valid = min(tiling.blk_k, shape.k - loop_index * tiling.blk_k)
    return n_valid * k_valid


def l2_unique_per_tile(cfg: ConvLayerConfig, tiling: Tiling, cta_row: int, loop_index: int,
                       cap: int = DEFAULT_ENUMERATION_CAP, cta_col: int = 0) -> int:
    shape = im2col_shape(cfg)
    check_enumeration_cap(shape, cap)
    grid = tile_grid(shape, tiling)
    if not (0 <= cta_row < grid.grid_rows and 0 <= loop_index < grid.num_loops and 0 <= cta_col < grid.grid_cols):
        raise IndexError(f"타일 인덱스가 범위 밖입니다: row={cta_row}, loop={loop_index}, col={cta_col}")
    ifmap = _ifmap_tile_counts(cfg, shape, tiling, np.asarray([cta_row]), loop_index)[0]
    return int(ifmap) + _filter_tile_count(shape, tiling, loop_index, cta_col)


def l2_unique_counts(cfg: ConvLayerConfig, tiling: Tiling, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """첫 CTA 열에 대해 (CTA 행, 루프) 별 고유 원소 수 배열."""
    shape = im2col_shape(cfg)
    check_enumeration_cap(shape, cap)
    grid = tile_grid(shape, tiling)
    counts = np.empty((grid.grid_rows, grid.num_loops), dtype=np.int64)
    rows_per_chunk = max(1, CHUNK_ELEMENTS // (tiling.blk_m * tiling.blk_k))
    for loop in range(grid.num_loops):
        filter_count = _filter_tile_count(shape, tiling, loop)
        for start in range(0, grid.grid_rows, rows_per_chunk):
            cta_rows = np.arange(start, min(start + rows_per_chunk, grid.grid_rows))
            counts[start:start + len(cta_rows), loop] = (
                _ifmap_tile_counts(cfg, shape, tiling, cta_rows, loop) + filter_count
            )
    return counts


def visited_ifmap_mask(cfg: ConvLayerConfig, shape: GemmShape) -> np.ndarray:
    """im2col 행렬이 참조하는 패딩된 IFmap 원소 표시."""
    mask = np.zeros(cfg.ifmap_elements, dtype=bool)
    rows = row_offsets(cfg, np.arange(shape.m))
    cols_per_chunk = max(1, CHUNK_ELEMENTS // shape.m)
    for start in range(0, shape.k, cols_per_chunk):
        cols = col_offsets(cfg, np.arange(start, min(start + cols_per_chunk, shape.k)))
        mask[(cols[:, None] + rows[None, :]).ravel()] = True
    return mask


def visited_extent(out: int, filt: int, stride: int) -> int:
    """한 축에서 im2col 이 참조하는 패딩된 입력 좌표 수. stride 가 필터보다 크면 틈이 생깁니다."""
    return (out - 1) * min(stride, filt) + filt


def visited_ifmap_elements(cfg: ConvLayerConfig) -> int:
    out_h, out_w = output_dims(cfg)
    return (cfg.batch * cfg.in_channels * visited_extent(out_h, cfg.filter_height, cfg.stride)
            * visited_extent(out_w, cfg.filter_width, cfg.stride))


def dram_unique(cfg: ConvLayerConfig, tiling: Tiling, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """열 단위 CTA 스케줄에서 DRAM 이 읽는 고유 바이트.

    각 CTA 열은 im2col 의 모든 행과 열을 지나므로 열마다 같은 IFmap 풋프린트를 다시 읽고,
    필터는 한 번만 읽습니다.
    """
    shape = im2col_shape(cfg)
    check_enumeration_cap(shape, cap)
    grid = tile_grid(shape, tiling)
    ifmap_unique = int(np.count_nonzero(visited_ifmap_mask(cfg, shape)))
    filter_unique = shape.n * shape.k
    return cfg.elem_bytes * (ifmap_unique * grid.grid_cols + filter_unique)


@dataclass(frozen=True, eq=False)
class OracleReport:
    cfg: ConvLayerConfig
    tiling: Tiling
    gran: L1Granularity
    phases: str
    l1: L1TransactionCount
    l2_unique_elements_per_tile: np.ndarray = field(repr=False)
    dram_unique_bytes: int

    @property
    def l1_transactions(self) -> Rational:
        return self.l1.made

    @property
    def l1_ideal_transactions(self) -> int:
        return self.l1.ideal

    @property
    def l1_bytes(self) -> float:
        """해석 모델과 같은 방식으로 정규화한 L1 바이트: elem*(MK*MLI_if + NK*MLI_fil)."""
        shape = im2col_shape(self.cfg)
        return float(self.cfg.elem_bytes * (shape.m * shape.k * self.l1.ifmap_mli
                                            + shape.n * shape.k * self.l1.filter_mli))

    @property
    def l2_mean_tile_elements(self) -> float:
        return float(np.mean(self.l2_unique_elements_per_tile))

    @property
    def l2_full_tiles(self) -> np.ndarray:
        """가장자리에서 잘리지 않은 타일들의 고유 원소 수. 완전한 타일이 없으면 빈 배열입니다."""
        shape = im2col_shape(self.cfg)
        if shape.n < self.tiling.blk_n:
            return self.l2_unique_elements_per_tile[:0, :0]
        return self.l2_unique_elements_per_tile[:shape.m // self.tiling.blk_m, :shape.k // self.tiling.blk_k]

    @property
    def l2_mean_full_tile_elements(self) -> float:
        full = self.l2_full_tiles
        if full.size == 0:
            return self.l2_mean_tile_elements
        return float(np.mean(full))


def run_oracle(cfg: ConvLayerConfig, tiling: Tiling | None = None, gran: L1Granularity | None = None,
               phases: str = 'all', cap: int = DEFAULT_ENUMERATION_CAP) -> OracleReport:
    gran = gran or L1Granularity()
    tiling = select_tiling(cfg.out_channels, override=tiling)
    shape = im2col_shape(cfg)
    log_prefix = f"[ORACLE|{cfg.name}]"
    requested = check_enumeration_cap(shape, cap)
    log_with_time(f">> {log_prefix} 주소 {requested:,}개 열거 시작 (tile {tiling.label}, {gran.coalesce_bytes}B)",
                  name=LOGGER_NAME)

    l1 = l1_transactions(cfg, tiling, gran, phases, cap)
    log_with_time(f"{log_prefix} ├─ L1: {float(l1.made):,.2f} / 이상적 {l1.ideal:,}", name=LOGGER_NAME)
    l2_counts = l2_unique_counts(cfg, tiling, cap)
    log_with_time(f"{log_prefix} ├─ L2: 타일 {l2_counts.size:,}개, 평균 {float(np.mean(l2_counts)):,.2f}원소",
                  name=LOGGER_NAME)
    dram = dram_unique(cfg, tiling, cap)
    unvisited = cfg.ifmap_elements - visited_ifmap_elements(cfg)
    if unvisited:
        log_with_time(f"{log_prefix} ├─ 참조되지 않는 패딩 IFmap 원소 {unvisited:,}개", name=LOGGER_NAME)
    log_with_time(f"{log_prefix} └─ DRAM: {dram:,}B", name=LOGGER_NAME)
    log_with_time(f"<< {log_prefix} 열거 완료", name=LOGGER_NAME)
    return OracleReport(cfg=cfg, tiling=tiling, gran=gran, phases=phases, l1=l1,
                        l2_unique_elements_per_tile=l2_counts, dram_unique_bytes=dram)
