# cli/services.py
"""명령들이 공유하는 레이어/네트워크 추정, 스윕, 스케일링 연구와 CSV 출력."""
import csv
import io
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import yaml
from django.conf import settings

from conv_gemm.layers import ConvLayerConfig
from conv_gemm.tiling import SUPPORTED_TILE_HW, Tiling, select_tiling
from core.exceptions import DesignOptionError, LayerConfigError
from core.logs import log_with_time
from oracle_sim.comparison import OracleComparison, compare_layer
from oracle_sim.services import DEFAULT_ENUMERATION_CAP
from perf_model.devices import GpuSpec
from perf_model.models import Bottleneck
from perf_model.services import PerfEstimate, build_kernel_spec, estimate_time
from traffic_model.services import TrafficEstimate, estimate_traffic

LOGGER_NAME = 'cli'

CSV_COLUMNS = (
    'name', 'M', 'N', 'K', 'blk_M', 'blk_N', 'blk_K', 'mli_ifmap', 'mli_filter',
    't_l1_bytes', 't_l2_bytes', 't_dram_bytes', 'cycles', 'time_s', 'bottleneck', 'case',
)
ORACLE_COLUMNS = ('oracle_l1_bytes', 'oracle_l2_tile_bytes', 'oracle_dram_bytes')


@dataclass(frozen=True)
class EstimateOptions:
    """명령행 재정의 값. None 이면 기본 규칙을 따릅니다."""
    tiling: Tiling | None = None
    num_act_cta: int | None = None
    fixed_miss_rate: float | None = None
    tile_hw: int = 128
    regs_per_thread: int | None = None


@dataclass(frozen=True)
class LayerReport:
    cfg: ConvLayerConfig
    traffic: TrafficEstimate
    perf: PerfEstimate


def estimate_layer(cfg: ConvLayerConfig, gpu: GpuSpec, options: EstimateOptions | None = None) -> LayerReport:
    options = options or EstimateOptions()
    tiling = select_tiling(cfg.out_channels, override=options.tiling, tile_hw=options.tile_hw)
    traffic = estimate_traffic(cfg, gpu.l1_granularity, tiling, fixed_miss_rate=options.fixed_miss_rate,
                               l2_size_bytes=gpu.size_l2)
    kernel = build_kernel_spec(tiling, cfg.elem_bytes, options.regs_per_thread, options.num_act_cta)
    return LayerReport(cfg=cfg, traffic=traffic, perf=estimate_time(cfg, traffic, gpu, kernel))


def estimate_network(configs: Sequence[ConvLayerConfig], gpu: GpuSpec, options: EstimateOptions | None = None,
                     workers: int | None = None) -> list[LayerReport]:
    """레이어별 추정을 병렬로 실행하고 입력 순서대로 돌려줍니다."""
    workers = workers or settings.ESTIMATOR_WORKERS
    log_prefix = f"[NETWORK|{gpu.name}]"
    log_with_time(f">> {log_prefix} 레이어 {len(configs)}개 추정 시작 (workers={workers})", name=LOGGER_NAME)
    results: list[LayerReport | None] = [None] * len(configs)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {
            executor.submit(estimate_layer, cfg, gpu, options): index
            for index, cfg in enumerate(configs)
        }
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()

    total = sum(report.perf.t_total for report in results)
    log_with_time(f"<< {log_prefix} 추정 완료: 합계 {total * 1e3:.3f}ms", name=LOGGER_NAME)
    return results


# --- 출력 ---

def _fmt(value) -> str:
    return format(float(value), '.6g')


def csv_row(report: LayerReport) -> list[str]:
    traffic, perf = report.traffic, report.perf
    shape, tiling = traffic.shape, traffic.tiling
    return [
        report.cfg.name, str(shape.m), str(shape.n), str(shape.k),
        str(tiling.blk_m), str(tiling.blk_n), str(tiling.blk_k),
        _fmt(traffic.mli_ifmap), _fmt(traffic.mli_filter),
        _fmt(traffic.t_l1_bytes), _fmt(traffic.t_l2_bytes), _fmt(traffic.t_dram_bytes),
        _fmt(perf.cycles), _fmt(perf.t_total), perf.bottleneck.value, str(perf.case),
    ]


def write_report_csv(reports: Iterable[LayerReport], stream: TextIO):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerow(csv_row(report))


def render_report_csv(reports: Iterable[LayerReport]) -> str:
    buffer = io.StringIO()
    write_report_csv(reports, buffer)
    return buffer.getvalue()


def summary_lines(report: LayerReport) -> list[str]:
    traffic, perf = report.traffic, report.perf
    shape = traffic.shape
    lines = [
        f"[{report.cfg.name}] GEMM {shape.m}x{shape.n}x{shape.k}, tile {traffic.tiling.label}, "
        f"grid {traffic.grid.grid_rows}x{traffic.grid.grid_cols}, loops {traffic.grid.num_loops}",
        f"├─ MLI: IFmap {traffic.mli_ifmap:.4g}, Filter {traffic.mli_filter:.4g}",
        f"├─ 트래픽: L1 {traffic.t_l1_bytes:,.0f}B, L2 {traffic.t_l2_bytes:,.0f}B, DRAM {traffic.t_dram_bytes:,.0f}B "
        f"(쓰기 {traffic.t_dram_write_bytes:,.0f}B)",
        f"├─ 미스율: L1 {traffic.l1_miss_rate:.4f}, L2 {traffic.l2_miss_rate:.4f}",
        f"├─ 스트림(루프당): GLS {perf.t_gls * 1e9:.2f}ns, SAS {perf.t_sas * 1e9:.2f}ns, CS {perf.t_cs * 1e9:.2f}ns",
        f"└─ 시간 {perf.t_total * 1e3:.4f}ms ({perf.cycles:,.0f} cycles), 병목 {perf.bottleneck.label}, "
        f"case {perf.case}{' (동률)' if perf.tie else ''}",
    ]
    if traffic.fits_in_l2:
        lines.insert(-1, "├─ 작업 집합이 L2 에 들어가므로 DRAM 값은 상한입니다.")
    return lines


# --- 스윕 ---

SWEEP_PARAMETERS = ('C_o', 'C_i', 'HW', 'B', 'filter', 'stride', 'coalesce')
DEFAULT_SWEEP_VALUES = {
    'C_o': (32, 64, 128, 256, 512),
    'C_i': (16, 32, 64, 128, 256, 512),
    'HW': (7, 13, 14, 28, 56),
    'B': (16, 32, 64, 128, 256, 512),
    'filter': (1, 3, 5, 7, 11),
    'stride': (1, 2, 4),
    'coalesce': (32, 64, 128),
}


def sweep_baseline(batch: int = 256, elem_bytes: int = 4) -> ConvLayerConfig:
    """자주 쓰이는 기준 레이어: 256 입력 채널, 13x13, 128 출력 채널, 3x3, stride 1."""
    return ConvLayerConfig(name='baseline', batch=batch, in_channels=256, in_height=13, in_width=13,
                           out_channels=128, filter_height=3, filter_width=3, stride=1, pad=1,
                           elem_bytes=elem_bytes)


def _swept(base: ConvLayerConfig, gpu: GpuSpec, parameter: str, value: int) -> tuple[ConvLayerConfig, GpuSpec]:
    name = f"{base.name}_{parameter}{value}"
    if parameter == 'C_o':
        return replace(base, name=name, out_channels=value), gpu
    if parameter == 'C_i':
        return replace(base, name=name, in_channels=value), gpu
    if parameter == 'HW':
        return replace(base, name=name, in_height=value, in_width=value), gpu
    if parameter == 'B':
        return replace(base, name=name, batch=value), gpu
    if parameter == 'filter':
        # 출력 크기를 유지하는 same 패딩
        return replace(base, name=name, filter_height=value, filter_width=value, pad=value // 2), gpu
    if parameter == 'stride':
        return replace(base, name=name, stride=value), gpu
    if parameter == 'coalesce':
        return replace(base, name=name), gpu.with_l1_coalesce(value)
    raise LayerConfigError(f"지원하지 않는 스윕 파라미터: {parameter!r} (지원: {', '.join(SWEEP_PARAMETERS)})")


@dataclass(frozen=True)
class SweepPoint:
    parameter: str
    value: int
    report: LayerReport
    oracle: OracleComparison | None = None


def run_sweep(parameter: str, gpu: GpuSpec, values: Sequence[int] | None = None,
              base: ConvLayerConfig | None = None, options: EstimateOptions | None = None,
              with_oracle: bool = False, oracle_cap: int = DEFAULT_ENUMERATION_CAP,
              workers: int | None = None) -> list[SweepPoint]:
    if parameter not in SWEEP_PARAMETERS:
        raise LayerConfigError(f"지원하지 않는 스윕 파라미터: {parameter!r} (지원: {', '.join(SWEEP_PARAMETERS)})")
    base = base or sweep_baseline()
    values = tuple(values or DEFAULT_SWEEP_VALUES[parameter])
    points = [_swept(base, gpu, parameter, value) for value in values]
    workers = workers or settings.ESTIMATOR_WORKERS
    log_prefix = f"[SWEEP|{parameter}]"
    log_with_time(f">> {log_prefix} {len(values)}개 값 스윕 시작: {list(values)}", name=LOGGER_NAME)

    def evaluate(index: int) -> SweepPoint:
        cfg, device = points[index]
        report = estimate_layer(cfg, device, options)
        oracle = None
        if with_oracle:
            oracle = compare_layer(cfg, report.traffic.tiling, device.l1_granularity, cap=oracle_cap)
        return SweepPoint(parameter=parameter, value=values[index], report=report, oracle=oracle)

    results: list[SweepPoint | None] = [None] * len(values)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {executor.submit(evaluate, index): index for index in range(len(values))}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    log_with_time(f"<< {log_prefix} 스윕 완료", name=LOGGER_NAME)
    return results


def write_sweep_csv(points: Sequence[SweepPoint], stream: TextIO):
    with_oracle = any(point.oracle is not None for point in points)
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('parameter', 'value', *CSV_COLUMNS, 'tpl_l1', 'tpl_l2', 'tpl_dram',
                     *(ORACLE_COLUMNS if with_oracle else ())))
    for point in points:
        traffic = point.report.traffic
        row = [point.parameter, str(point.value), *csv_row(point.report),
               _fmt(traffic.tpl_l1), _fmt(traffic.tpl_l2), _fmt(traffic.tpl_dram)]
        if with_oracle:
            row += ['', '', ''] if point.oracle is None else [
                _fmt(point.oracle.level(level).oracle) for level in ('L1', 'L2_TILE', 'DRAM')
            ]
        writer.writerow(row)


# --- 설계 옵션 스케일링 ---

OPTION_MULTIPLIERS = ('n_sm', 'mac_bw_per_sm', 'regs', 'smem_size', 'smem_bw', 'l1_bw', 'l2_bw', 'dram_bw')


@dataclass(frozen=True)
class DesignOption:
    name: str
    n_sm: float = 1
    mac_bw_per_sm: float = 1
    regs: float = 1
    smem_size: float = 1
    smem_bw: float = 1
    l1_bw: float = 1
    l2_bw: float = 1
    dram_bw: float = 1
    cta_tile_hw: int = 128

    def __post_init__(self):
        for name in OPTION_MULTIPLIERS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise DesignOptionError(f"[{self.name}] {name} 배수는 양수여야 합니다: {value!r}")
        if self.cta_tile_hw not in SUPPORTED_TILE_HW:
            raise DesignOptionError(f"[{self.name}] cta_tile_hw 는 {SUPPORTED_TILE_HW} 중 하나여야 합니다: "
                                    f"{self.cta_tile_hw!r}")
        if int(self.n_sm) != self.n_sm:
            raise DesignOptionError(f"[{self.name}] n_sm 배수는 정수여야 합니다: {self.n_sm}")

    def apply(self, gpu: GpuSpec) -> GpuSpec:
        return gpu.replace(
            name=f"{gpu.name}+{self.name}",
            num_sm=int(gpu.num_sm * self.n_sm),
            bw_mac=gpu.bw_mac * self.mac_bw_per_sm,
            size_reg=int(gpu.size_reg * self.regs),
            size_smem=int(gpu.size_smem * self.smem_size),
            bw_smem_ld=gpu.bw_smem_ld * self.smem_bw,
            bw_smem_st=gpu.bw_smem_st * self.smem_bw,
            bw_l1=gpu.bw_l1 * self.l1_bw,
            bw_l2=gpu.bw_l2 * self.l2_bw,
            bw_dram=gpu.bw_dram * self.dram_bw,
        )


@dataclass(frozen=True)
class DesignOptionSet:
    options: tuple[DesignOption, ...]
    informational_speedups: dict = field(default_factory=dict)


def parse_design_options(data, source: str = '<mapping>') -> DesignOptionSet:
    if not isinstance(data, dict) or not isinstance(data.get('options'), dict):
        raise DesignOptionError(f"[{source}] 'options' 매핑이 필요합니다.")
    allowed = set(OPTION_MULTIPLIERS) | {'cta_tile_hw'}
    options = []
    for name, values in data['options'].items():
        if not isinstance(values, dict):
            raise DesignOptionError(f"[{source}] 옵션 {name!r} 은 key: value 매핑이어야 합니다.")
        unknown = set(values) - allowed
        if unknown:
            raise DesignOptionError(f"[{source}] 옵션 {name!r} 에 알 수 없는 키: {sorted(unknown)}")
        options.append(DesignOption(name=str(name), **values))
    informational = data.get('informational_speedups') or {}
    return DesignOptionSet(options=tuple(options), informational_speedups=dict(informational))


def load_design_options(path=None) -> DesignOptionSet:
    path = path or settings.DESIGN_OPTIONS_PATH
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise DesignOptionError(f"설계 옵션 파일을 찾을 수 없습니다: {path}") from None
    except yaml.YAMLError as e:
        raise DesignOptionError(f"설계 옵션 YAML 파싱 실패: {e}") from e
    return parse_design_options(data, source=str(path))


@dataclass(frozen=True)
class ScalingResult:
    option: str
    total_time: float
    speedup: float
    bottlenecks: Counter

    def histogram(self) -> list[tuple[str, int]]:
        return [(label.value, self.bottlenecks.get(label, 0)) for label in Bottleneck]


def run_scaling_study(configs: Sequence[ConvLayerConfig], gpu: GpuSpec, option_set: DesignOptionSet,
                      options: EstimateOptions | None = None, workers: int | None = None) -> list[ScalingResult]:
    """기준 장치 결과가 첫 행(speedup 1)이고, 이어서 옵션별 결과가 옵니다."""
    options = options or EstimateOptions()
    log_prefix = f"[SCALE|{gpu.name}]"
    log_with_time(f">> {log_prefix} 옵션 {len(option_set.options)}개, 레이어 {len(configs)}개 스케일링 연구 시작",
                  name=LOGGER_NAME)

    def study(device: GpuSpec, tile_hw: int) -> tuple[float, Counter]:
        reports = estimate_network(configs, device, replace(options, tile_hw=tile_hw), workers)
        return sum(r.perf.t_total for r in reports), Counter(r.perf.bottleneck for r in reports)

    base_time, base_hist = study(gpu, options.tile_hw)
    results = [ScalingResult('baseline', base_time, 1.0, base_hist)]
    for option in option_set.options:
        total, hist = study(option.apply(gpu), option.cta_tile_hw)
        results.append(ScalingResult(option.name, total, base_time / total, hist))
        target = option_set.informational_speedups.get(option.name)
        target_note = f" (참고값 {target}x)" if target is not None else ''
        log_with_time(f"{log_prefix} ├─ {option.name}: {base_time / total:.3f}x{target_note}", name=LOGGER_NAME)
    log_with_time(f"<< {log_prefix} 스케일링 연구 완료", name=LOGGER_NAME)
    return results


def write_scaling_csv(results: Sequence[ScalingResult], stream: TextIO):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('option', 'total_time_s', 'speedup', *(label.value for label in Bottleneck)))
    for result in results:
        writer.writerow([result.option, _fmt(result.total_time), _fmt(result.speedup),
                         *(str(count) for _, count in result.histogram())])
