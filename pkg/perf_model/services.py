# perf_model/services.py
"""메인 루프 스트림 시간(GLS/SAS/CS), 단계 시간, 레이어 전체 시간과 병목 판정."""
import math
from dataclasses import dataclass

from django.conf import settings

from conv_gemm.layers import ConvLayerConfig
from conv_gemm.tiling import Tiling
from core.exceptions import ResourceError
from core.logs import log_with_time
from traffic_model.services import TrafficEstimate
from .devices import GpuSpec
from .models import BOTTLENECK_PRIORITY, Bottleneck

LOGGER_NAME = 'perf_model'
REGISTER_BYTES = 4


@dataclass(frozen=True)
class KernelSpec:
    tiling: Tiling
    regs_per_cta: int
    smem_per_cta: int
    num_act_cta: int | None = None


def default_smem_per_cta(tiling: Tiling, elem_bytes: int = 4) -> int:
    """입력 이중 버퍼링: IFmap/필터 타일 두 벌."""
    return 2 * elem_bytes * (tiling.blk_m + tiling.blk_n) * tiling.blk_k


def default_regs_per_cta(tiling: Tiling, regs_per_thread: int) -> int:
    return tiling.threads * regs_per_thread * REGISTER_BYTES


def build_kernel_spec(tiling: Tiling, elem_bytes: int = 4, regs_per_thread: int | None = None,
                      num_act_cta: int | None = None) -> KernelSpec:
    if regs_per_thread is None:
        regs_per_thread = settings.DEFAULT_REGS_PER_THREAD
    return KernelSpec(
        tiling=tiling,
        regs_per_cta=default_regs_per_cta(tiling, regs_per_thread),
        smem_per_cta=default_smem_per_cta(tiling, elem_bytes),
        num_act_cta=num_act_cta,
    )


def active_ctas(gpu: GpuSpec, kernel: KernelSpec) -> int:
    if kernel.smem_per_cta > gpu.size_smem:
        raise ResourceError(
            f"CTA 당 SMEM {kernel.smem_per_cta:,}B 가 SM 의 SMEM {gpu.size_smem:,}B 보다 큽니다 "
            f"(tile {kernel.tiling.label}, {gpu.name})."
        )
    if kernel.num_act_cta is not None:
        if kernel.num_act_cta < 1:
            raise ResourceError(f"활성 CTA 수는 1 이상이어야 합니다: {kernel.num_act_cta}")
        return kernel.num_act_cta
    count = min(gpu.size_reg // kernel.regs_per_cta, gpu.size_smem // kernel.smem_per_cta)
    if count < 1:
        raise ResourceError(
            f"레지스터 부족으로 활성 CTA 가 0 개입니다: CTA 당 {kernel.regs_per_cta:,}B > "
            f"SM 당 {gpu.size_reg:,}B (tile {kernel.tiling.label}, {gpu.name})."
        )
    return count


# --- 스트림 시간 (메인 루프 1회) ---

def t_gls(traffic: TrafficEstimate, gpu: GpuSpec) -> float:
    return max(
        gpu.lat_l1 + traffic.tpl_l1 / gpu.bw_l1,
        gpu.lat_l2 + traffic.tpl_l2 / gpu.bw_l2_per_sm,
        gpu.lat_dram + traffic.tpl_dram / gpu.bw_dram_per_sm,
    )


def _warp_operand_bytes(tiling: Tiling, elem_bytes: int) -> int:
    return elem_bytes * (tiling.blk_wm + tiling.blk_wn) * tiling.blk_k * tiling.num_warps


def t_sas(tiling: Tiling, gpu: GpuSpec, elem_bytes: int = 4) -> float:
    store_bytes = elem_bytes * (tiling.blk_m + tiling.blk_n) * tiling.blk_k
    return store_bytes / gpu.bw_smem_st + _warp_operand_bytes(tiling, elem_bytes) / gpu.bw_smem_ld


def t_cs(tiling: Tiling, gpu: GpuSpec) -> float:
    return tiling.blk_m * tiling.blk_n * tiling.blk_k / gpu.bw_mac


# --- 단계 시간 ---

def t_prologue(tiling: Tiling, gpu: GpuSpec, elem_bytes: int = 4) -> float:
    """첫 CTA 만 계산합니다. 나머지 CTA 의 프롤로그는 가려진다고 봅니다."""
    tile_bytes = elem_bytes * tiling.blk_m * tiling.blk_n
    return ((gpu.lat_dram + tile_bytes / gpu.bw_dram_per_sm)
            + (gpu.lat_smem + tile_bytes / gpu.bw_smem_st)
            + _warp_operand_bytes(tiling, elem_bytes) / gpu.bw_smem_ld)


def t_epilogue(tiling: Tiling, gpu: GpuSpec, elem_bytes: int = 4, bottleneck_bw: float | None = None) -> float:
    return elem_bytes * tiling.blk_n * tiling.blk_m / (bottleneck_bw or gpu.bw_dram)


@dataclass(frozen=True)
class PerfEstimate:
    name: str
    t_gls: float
    t_sas: float
    t_cs: float
    t_prologue: float
    t_epilogue: float
    t_total: float
    cycles: float
    bottleneck: Bottleneck
    case: int
    tie: bool
    num_act_cta: int
    ctas_per_sm: int
    candidates: tuple[tuple[Bottleneck, float], ...]

    def candidate(self, label: Bottleneck) -> float:
        return dict(self.candidates)[label]


def _select_bottleneck(candidates: dict[Bottleneck, float]) -> tuple[Bottleneck, float, bool]:
    t_max = max(candidates.values())
    winners = [label for label in BOTTLENECK_PRIORITY
               if math.isclose(candidates[label], t_max, rel_tol=1e-12, abs_tol=0.0)]
    return winners[0], t_max, len(winners) > 1


def estimate_time(cfg: ConvLayerConfig, traffic: TrafficEstimate, gpu: GpuSpec,
                  kernel: KernelSpec | None = None) -> PerfEstimate:
    """세 후보 시간(연산/지연/대역폭 한계) 중 가장 긴 값을 SM 실행 시간으로 봅니다."""
    tiling = traffic.tiling
    elem = cfg.elem_bytes
    kernel = kernel or build_kernel_spec(tiling, elem)
    num_act = active_ctas(gpu, kernel)
    loops = traffic.grid.num_loops
    # 라운드 로빈 배치에서 CTA 가 가장 많은 SM 기준
    ctas_per_sm = math.ceil(traffic.grid.num_cta / gpu.num_sm)

    gls = t_gls(traffic, gpu)
    sas = t_sas(tiling, gpu, elem)
    cs = t_cs(tiling, gpu)
    prologue = t_prologue(tiling, gpu, elem)
    epilogue = t_epilogue(tiling, gpu, elem)
    compute = max(cs, sas)

    def bandwidth_bound(per_loop: float, level_bw: float) -> float:
        return prologue + (per_loop * loops + t_epilogue(tiling, gpu, elem, level_bw)) * ctas_per_sm

    candidates = {
        Bottleneck.MAC: prologue + (cs * loops + epilogue) * ctas_per_sm,
        Bottleneck.SMEM: prologue + (sas * loops + epilogue) * ctas_per_sm,
        Bottleneck.L1_BW: bandwidth_bound(traffic.tpl_l1 / gpu.bw_l1, gpu.bw_l1),
        Bottleneck.L2_BW: bandwidth_bound(traffic.tpl_l2 / gpu.bw_l2_per_sm, gpu.bw_l2),
        Bottleneck.DRAM_BW: bandwidth_bound(traffic.tpl_dram / gpu.bw_dram_per_sm, gpu.bw_dram),
        Bottleneck.DRAM_LAT: prologue + ((gls + compute / tiling.blk_k) * loops + epilogue) * ctas_per_sm / num_act,
    }
    bottleneck, t_total, tie = _select_bottleneck(candidates)

    if bottleneck in (Bottleneck.L1_BW, Bottleneck.L2_BW, Bottleneck.DRAM_BW):
        case = 4
    elif bottleneck == Bottleneck.DRAM_LAT:
        case = 2
    else:
        case = 1 if compute >= gls else 3

    log_with_time(f"[PERF|{cfg.name}] {t_total * 1e3:.4f}ms, 병목 {bottleneck.value} (case {case}"
                  f"{', 동률' if tie else ''}), 활성 CTA {num_act}", level="DEBUG", name=LOGGER_NAME)
    return PerfEstimate(
        name=cfg.name, t_gls=gls, t_sas=sas, t_cs=cs, t_prologue=prologue, t_epilogue=epilogue,
        t_total=t_total, cycles=t_total * gpu.core_clock, bottleneck=bottleneck, case=case, tie=tie,
        num_act_cta=num_act, ctas_per_sm=ctas_per_sm,
        candidates=tuple((label, candidates[label]) for label in BOTTLENECK_PRIORITY),
    )
