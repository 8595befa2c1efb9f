# oracle_sim/comparison.py
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from conv_gemm.layers import ConvLayerConfig, output_dims
from conv_gemm.tiling import Tiling
from core.exceptions import EstimatorError
from core.logs import log_with_time
from traffic_model.granularity import L1Granularity
from traffic_model.services import estimate_traffic
from .services import DEFAULT_ENUMERATION_CAP, LOGGER_NAME, run_oracle

LEVELS = ('L1_IFMAP_MLI', 'L1', 'L2_TILE', 'DRAM')

# 검증용 기본 격자
GRID_WIDTHS = (4, 7, 13, 28, 56)
GRID_FILTERS = (1, 3, 5, 7, 11)
GRID_STRIDES = (1, 2, 4)
GRID_PADS = (0, 1, 2, 3)
GRID_OUT_CHANNELS = (32, 64, 128)
GRID_IN_CHANNELS = 16
GRID_MIN_ROWS = 256

# 워프가 출력 행을 두 개 이하로 걸치는 영역에서만 허용 오차를 강제합니다.
REGIME_MIN_OUT_WIDTH = 16
GMAE_LIMITS = {'L1_IFMAP_MLI': 0.15, 'L2_TILE': 0.25}


@dataclass(frozen=True)
class LevelComparison:
    level: str
    analytical: float
    oracle: float

    @property
    def rel_error(self) -> float:
        if self.oracle == 0:
            return 0.0 if self.analytical == 0 else math.inf
        return (self.analytical - self.oracle) / self.oracle


@dataclass(frozen=True)
class OracleComparison:
    cfg: ConvLayerConfig
    tiling: Tiling
    levels: tuple[LevelComparison, ...]

    def level(self, name: str) -> LevelComparison:
        for item in self.levels:
            if item.level == name:
                return item
        raise KeyError(name)


def compare_layer(cfg: ConvLayerConfig, tiling: Tiling | None = None, gran: L1Granularity | None = None,
                  phases: str = 'all', cap: int = DEFAULT_ENUMERATION_CAP) -> OracleComparison:
    """같은 입력으로 해석 모델과 오라클을 실행해 계층별 값을 나란히 놓습니다."""
    gran = gran or L1Granularity()
    est = estimate_traffic(cfg, gran, tiling)
    report = run_oracle(cfg, est.tiling, gran, phases, cap)
    levels = (
        LevelComparison('L1_IFMAP_MLI', est.mli_ifmap, float(report.l1.ifmap_mli)),
        LevelComparison('L1', est.t_l1_bytes, report.l1_bytes),
        LevelComparison('L2_TILE', est.tpl_l2, cfg.elem_bytes * report.l2_mean_full_tile_elements),
        LevelComparison('DRAM', est.t_dram_bytes, float(report.dram_unique_bytes)),
    )
    return OracleComparison(cfg=cfg, tiling=est.tiling, levels=levels)


def gmae(errors: Iterable[float]) -> float:
    """기하 평균 절대 오차. 0 오차를 허용하도록 (1+|e|) 의 기하 평균에서 1 을 뺍니다."""
    errors = [abs(e) for e in errors]
    if not errors:
        return 0.0
    return math.exp(sum(math.log1p(e) for e in errors) / len(errors)) - 1


def default_grid(in_channels: int = GRID_IN_CHANNELS, min_rows: int = GRID_MIN_ROWS) -> list[ConvLayerConfig]:
    """정사각 입력 격자. 배치는 im2col 행이 min_rows 이상이 되는 가장 작은 값입니다."""
    configs = []
    for index, (width, w_f, stride, pad) in enumerate(product(GRID_WIDTHS, GRID_FILTERS, GRID_STRIDES, GRID_PADS)):
        if width + 2 * pad < w_f:
            continue
        out_width = (width + 2 * pad - w_f) // stride + 1
        batch = max(1, math.ceil(min_rows / (out_width * out_width)))
        configs.append(ConvLayerConfig(
            name=f"grid_w{width}_f{w_f}_s{stride}_p{pad}", batch=batch, in_channels=in_channels,
            in_height=width, in_width=width, out_channels=GRID_OUT_CHANNELS[index % len(GRID_OUT_CHANNELS)],
            filter_height=w_f, filter_width=w_f, stride=stride, pad=pad,
        ))
    return configs


def in_regime(cfg: ConvLayerConfig) -> bool:
    return output_dims(cfg)[1] >= REGIME_MIN_OUT_WIDTH


@dataclass(frozen=True)
class GridReport:
    comparisons: tuple[OracleComparison, ...]
    skipped: tuple[str, ...]

    def gmae(self, level: str, in_regime_only: bool = False) -> float:
        return gmae(c.level(level).rel_error for c in self.comparisons if not in_regime_only or in_regime(c.cfg))

    @property
    def regime_count(self) -> int:
        return sum(1 for c in self.comparisons if in_regime(c.cfg))

    def exceeded_limits(self) -> dict[str, float]:
        """허용 오차를 넘은 계층과 그 영역 GMAE."""
        return {level: value for level, limit in GMAE_LIMITS.items()
                if (value := self.gmae(level, in_regime_only=True)) > limit}


def compare_grid(configs: list[ConvLayerConfig], gran: L1Granularity | None = None, phases: str = 'aligned',
                 cap: int = DEFAULT_ENUMERATION_CAP, workers: int = 4) -> GridReport:
    log_prefix = "[ORACLE-GRID]"
    log_with_time(f">> {log_prefix} {len(configs)}개 설정 비교 시작", name=LOGGER_NAME)
    results: list[OracleComparison | None] = [None] * len(configs)
    skipped = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {
            executor.submit(compare_layer, cfg, None, gran, phases, cap): index
            for index, cfg in enumerate(configs)
        }
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except EstimatorError as e:
                log_with_time(f"[WARN] {log_prefix} {configs[index].name} 건너뜀: {e}", level="WARN",
                              name=LOGGER_NAME)
                skipped.append(configs[index].name)

    report = GridReport(comparisons=tuple(r for r in results if r is not None), skipped=tuple(sorted(skipped)))
    for level in LEVELS:
        log_with_time(f"{log_prefix} ├─ {level} GMAE: {report.gmae(level) * 100:.2f}% "
                      f"(W_o>={REGIME_MIN_OUT_WIDTH}: {report.gmae(level, in_regime_only=True) * 100:.2f}%)",
                      name=LOGGER_NAME)
    for level, value in report.exceeded_limits().items():
        log_with_time(f"[WARN] {log_prefix} {level} GMAE {value * 100:.2f}% > {GMAE_LIMITS[level] * 100:.0f}%",
                      level="WARN", name=LOGGER_NAME)
    log_with_time(f"<< {log_prefix} 비교 완료 (성공 {len(report.comparisons)}, 건너뜀 {len(skipped)})",
                  name=LOGGER_NAME)
    return report
