# oracle_sim/coalescing.py
"""워프 단위 L1 요청 병합(coalescing) 계수기.

IFmap 워프는 한 GEMM 열의 연속된 32 행을, 필터 워프는 (32/blk_K) 개 열의
blk_K 연속 원소를 읽습니다. 주소는 모두 바이트 단위로 다룹니다.
"""
import math

import numpy as np
from sympy import Rational

from conv_gemm.layers import ConvLayerConfig, col_offsets, im2col_shape, row_offsets

WARP_SIZE = 32
PHASE_MODES = ('all', 'aligned')
CHUNK_ELEMENTS = 1 << 22


def phase_offsets(unit_bytes: int, elem_bytes: int, phases: str) -> list[int]:
    """'all' 은 요청 경계 안의 모든 원소 위상, 'aligned' 는 워프 시작을 경계에 맞춥니다."""
    if phases == 'aligned':
        return [0]
    if phases == 'all':
        return list(range(0, unit_bytes, elem_bytes))
    raise ValueError(f"phases 는 {PHASE_MODES} 중 하나여야 합니다: {phases!r}")


def ideal_transactions(valid_counts: np.ndarray, elem_bytes: int, unit_bytes: int) -> int:
    return int(np.sum(-(-(valid_counts * elem_bytes) // unit_bytes)))


def _count_sorted_rows(blocks: np.ndarray) -> int:
    """행마다 (이미 정렬된) 블록 번호의 서로 다른 개수를 더합니다."""
    if blocks.shape[1] == 0:
        return 0
    return int(blocks.shape[0] + np.count_nonzero(blocks[:, 1:] != blocks[:, :-1]))


def ifmap_transactions(cfg: ConvLayerConfig, unit_bytes: int, phases: str = 'all') -> tuple[Rational, int]:
    """IFmap 행렬 전체(M x K)를 한 번 읽을 때의 (평균 요청 수, 이상적 요청 수)."""
    shape = im2col_shape(cfg)
    elem = cfg.elem_bytes
    rows = row_offsets(cfg, np.arange(shape.m)) * elem
    positions = np.arange(shape.m)
    warp_first = (positions // WARP_SIZE) * WARP_SIZE
    continues_warp = (positions[1:] % WARP_SIZE) != 0
    warps_per_col = math.ceil(shape.m / WARP_SIZE)

    valid = np.full(warps_per_col, WARP_SIZE, dtype=np.int64)
    valid[-1] = shape.m - WARP_SIZE * (warps_per_col - 1)
    ideal = ideal_transactions(valid, elem, unit_bytes) * shape.k

    offsets = phase_offsets(unit_bytes, elem, phases)
    cols_per_chunk = max(1, CHUNK_ELEMENTS // shape.m)
    made_total = 0
    for start in range(0, shape.k, cols_per_chunk):
        cols = col_offsets(cfg, np.arange(start, min(start + cols_per_chunk, shape.k))) * elem
        addresses = cols[:, None] + rows[None, :]
        if phases == 'aligned':
            # 각 워프의 첫 주소를 요청 경계로 옮깁니다.
            addresses = addresses - addresses[:, warp_first]
        for offset in offsets:
            blocks = (addresses + offset) // unit_bytes
            changes = (blocks[:, 1:] != blocks[:, :-1]) & continues_warp
            made_total += addresses.shape[0] * warps_per_col + int(np.count_nonzero(changes))
    return Rational(made_total, len(offsets)), ideal


def _filter_warp_layout(blk_k: int) -> tuple[int, int]:
    """(워프당 열 수, 열당 연속 원소 수)."""
    segment = min(blk_k, WARP_SIZE)
    return max(1, WARP_SIZE // segment), segment


def filter_transactions(n_cols: int, k_depth: int, blk_k: int, elem_bytes: int, unit_bytes: int,
                        phases: str = 'all') -> tuple[Rational, int]:
    """필터 행렬(주소 n*K + k) 전체를 한 번 읽을 때의 (평균 트랜잭션 수, 이상적 트랜잭션 수)."""
    cols_per_warp, segment = _filter_warp_layout(blk_k)
    num_loops = math.ceil(k_depth / blk_k)

    k_starts = []
    k_limits = []
    for loop in range(num_loops):
        loop_end = min((loop + 1) * blk_k, k_depth)
        for start in range(loop * blk_k, loop_end, segment):
            k_starts.append(start)
            k_limits.append(loop_end)
    k_starts = np.asarray(k_starts, dtype=np.int64)
    k_limits = np.asarray(k_limits, dtype=np.int64)
    n_starts = np.arange(0, n_cols, cols_per_warp, dtype=np.int64)

    lane_n = np.repeat(np.arange(cols_per_warp), segment)
    lane_k = np.tile(np.arange(segment), cols_per_warp)

    # 워프 = (열 그룹, k 시작) 조합
    warp_n0 = np.repeat(n_starts, len(k_starts))
    warp_k0 = np.tile(k_starts, len(n_starts))
    warp_klim = np.tile(k_limits, len(n_starts))

    n_idx = warp_n0[:, None] + lane_n[None, :]
    k_idx = warp_k0[:, None] + lane_k[None, :]
    valid = (n_idx < n_cols) & (k_idx < warp_klim[:, None])
    addresses = (n_idx * k_depth + k_idx) * elem_bytes
    # 비활성 레인은 워프 첫 원소의 주소를 복사해 개수에 영향을 주지 않게 합니다.
    addresses = np.where(valid, addresses, addresses[:, :1])

    ideal = ideal_transactions(valid.sum(axis=1), elem_bytes, unit_bytes)
    if phases == 'aligned':
        addresses = addresses - addresses[:, :1]
    offsets = phase_offsets(unit_bytes, elem_bytes, phases)
    made_total = 0
    for offset in offsets:
        blocks = np.sort((addresses + offset) // unit_bytes, axis=1)
        made_total += _count_sorted_rows(blocks)
    return Rational(made_total, len(offsets)), ideal


def filter_mli(blk_k: int, elem_bytes: int, unit_bytes: int, phases: str = 'all') -> Rational:
    """모든 정렬 위상에 대한 필터 워프의 평균 트랜잭션 수 / 이상적 수.

    K*elem_bytes 가 unit_bytes 의 배수인 기준 깊이를 사용하므로 모든 열이 같은 위상을 가집니다.
    """
    cols_per_warp, _ = _filter_warp_layout(blk_k)
    k_depth = blk_k * max(1, unit_bytes // elem_bytes)
    made, ideal = filter_transactions(cols_per_warp, k_depth, blk_k, elem_bytes, unit_bytes, phases)
    return made / ideal
