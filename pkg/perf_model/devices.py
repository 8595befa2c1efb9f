# perf_model/devices.py
"""GPU 장치 사양과 YAML 프리셋 로더.

프리셋 파일은 사람이 읽는 단위(GHz, GB/s, KB, ns)를 쓰고, GpuSpec 은 SI 단위
(Hz, bytes/s, bytes, 초)로 보관합니다.
"""
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml
from django.conf import settings

from core.exceptions import DeviceSpecError
from core.logs import log_with_time
from traffic_model.granularity import L1Granularity

LOGGER_NAME = 'perf_model'

KB = 1024
MB = 1024 * 1024
GB_PER_S = 1e9
NS = 1e-9
SMEM_BANKS = 32
SMEM_BANK_BYTES = 4

REQUIRED_KEYS = (
    'num_sm', 'core_clock_ghz', 'fp32_gflops', 'reg_kb_per_sm', 'smem_kb_per_sm', 'l2_mb',
    'l1_gbps_per_sm', 'l2_gbps', 'dram_gbps', 'lat_l1_ns', 'lat_l2_ns', 'lat_dram_ns', 'lat_smem_ns',
)
OPTIONAL_KEYS = (
    'name', 'description', 'smem_ld_gbps_per_sm', 'smem_st_gbps_per_sm',
    'l1_coalesce_bytes', 'l1_sector_bytes', 'estimate_fields',
)


@dataclass(frozen=True)
class GpuSpec:
    name: str
    num_sm: int
    core_clock: float      # Hz
    bw_mac: float          # SM 당 MAC/s
    size_reg: int          # SM 당 bytes
    size_smem: int         # SM 당 bytes
    size_l2: int
    bw_l1: float           # SM 당 bytes/s
    bw_l2: float           # 전체 bytes/s
    bw_dram: float         # 전체 bytes/s
    bw_smem_ld: float      # SM 당 bytes/s
    bw_smem_st: float      # SM 당 bytes/s
    lat_l1: float          # 초
    lat_l2: float
    lat_dram: float
    lat_smem: float
    l1_granularity: L1Granularity = field(default_factory=L1Granularity)
    estimated_fields: frozenset = frozenset()

    def __post_init__(self):
        if self.num_sm < 1:
            raise DeviceSpecError(f"[{self.name}] num_sm 은 1 이상이어야 합니다: {self.num_sm}")
        for name in ('core_clock', 'bw_mac', 'size_reg', 'size_smem', 'size_l2', 'bw_l1', 'bw_l2',
                     'bw_dram', 'bw_smem_ld', 'bw_smem_st'):
            value = getattr(self, name)
            if math.isnan(value) or value <= 0:
                raise DeviceSpecError(f"[{self.name}] {name} 는 양수여야 합니다: {value}")
        for name in ('lat_l1', 'lat_l2', 'lat_dram', 'lat_smem'):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise DeviceSpecError(f"[{self.name}] {name} 는 0 이상이어야 합니다: {value}")
        if not self.lat_l1 <= self.lat_l2 <= self.lat_dram:
            raise DeviceSpecError(
                f"[{self.name}] 지연 순서는 lat_l1 <= lat_l2 <= lat_dram 이어야 합니다: "
                f"{self.lat_l1}, {self.lat_l2}, {self.lat_dram}"
            )
        unknown = set(self.estimated_fields) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise DeviceSpecError(f"[{self.name}] 알 수 없는 추정 필드: {sorted(unknown)}")

    @property
    def bw_l2_per_sm(self) -> float:
        return self.bw_l2 / self.num_sm

    @property
    def bw_dram_per_sm(self) -> float:
        return self.bw_dram / self.num_sm

    def replace(self, **changes) -> 'GpuSpec':
        return dataclasses.replace(self, **changes)

    def with_l1_coalesce(self, coalesce_bytes: int) -> 'GpuSpec':
        gran = L1Granularity(coalesce_bytes=coalesce_bytes, sector_bytes=min(self.l1_granularity.sector_bytes,
                                                                            coalesce_bytes))
        return self.replace(l1_granularity=gran)


def _number(data: dict, key: str, source: str) -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DeviceSpecError(f"[{source}] {key} 는 숫자여야 합니다: {value!r}")
    return value


def device_from_mapping(data: dict, source: str = '<mapping>') -> GpuSpec:
    """YAML 문서(사람 단위)를 GpuSpec 으로 변환합니다."""
    if not isinstance(data, dict):
        raise DeviceSpecError(f"[{source}] 장치 파일은 key: value 매핑이어야 합니다.")
    unknown = set(data) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        raise DeviceSpecError(f"[{source}] 알 수 없는 키: {sorted(unknown)}")
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise DeviceSpecError(f"[{source}] 필수 키 누락: {missing}")

    name = str(data.get('name', source))
    clock = _number(data, 'core_clock_ghz', name) * 1e9
    num_sm = _number(data, 'num_sm', name)
    if int(num_sm) != num_sm:
        raise DeviceSpecError(f"[{name}] num_sm 은 정수여야 합니다: {num_sm}")
    num_sm = int(num_sm)

    estimated = set(data.get('estimate_fields') or ())
    # SMEM 대역폭 기본값: 32 뱅크 x 4B x 클럭
    smem_default = SMEM_BANKS * SMEM_BANK_BYTES * clock
    smem_bw = {}
    for field_name, key in (('bw_smem_ld', 'smem_ld_gbps_per_sm'), ('bw_smem_st', 'smem_st_gbps_per_sm')):
        if key in data:
            smem_bw[field_name] = _number(data, key, name) * GB_PER_S
        else:
            smem_bw[field_name] = smem_default
            estimated.add(field_name)

    gran = L1Granularity(
        coalesce_bytes=int(data.get('l1_coalesce_bytes', 128)),
        sector_bytes=int(data.get('l1_sector_bytes', 32)),
    )
    return GpuSpec(
        name=name,
        num_sm=num_sm,
        core_clock=clock,
        # FP32 FLOPS 의 절반이 MAC, SM 수로 나눈 값
        bw_mac=_number(data, 'fp32_gflops', name) * 1e9 / 2 / num_sm,
        size_reg=int(_number(data, 'reg_kb_per_sm', name) * KB),
        size_smem=int(_number(data, 'smem_kb_per_sm', name) * KB),
        size_l2=int(_number(data, 'l2_mb', name) * MB),
        bw_l1=_number(data, 'l1_gbps_per_sm', name) * GB_PER_S,
        bw_l2=_number(data, 'l2_gbps', name) * GB_PER_S,
        bw_dram=_number(data, 'dram_gbps', name) * GB_PER_S,
        lat_l1=_number(data, 'lat_l1_ns', name) * NS,
        lat_l2=_number(data, 'lat_l2_ns', name) * NS,
        lat_dram=_number(data, 'lat_dram_ns', name) * NS,
        lat_smem=_number(data, 'lat_smem_ns', name) * NS,
        l1_granularity=gran,
        estimated_fields=frozenset(estimated),
        **smem_bw,
    )


def list_presets() -> list[str]:
    presets_dir = Path(settings.DEVICE_PRESETS_DIR)
    return sorted(path.stem for path in presets_dir.glob('*.yaml'))


def _resolve_device_path(name_or_path: str) -> Path:
    candidate = Path(name_or_path)
    if candidate.suffix in ('.yaml', '.yml') or candidate.is_file():
        if not candidate.is_file():
            raise DeviceSpecError(f"장치 파일을 찾을 수 없습니다: {candidate}")
        return candidate
    preset = Path(settings.DEVICE_PRESETS_DIR) / f"{name_or_path}.yaml"
    if not preset.is_file():
        raise DeviceSpecError(f"알 수 없는 장치 프리셋: {name_or_path!r} (사용 가능: {', '.join(list_presets())})")
    return preset


def load_device(name_or_path: str) -> GpuSpec:
    """프리셋 이름 또는 YAML 파일 경로로 장치를 읽습니다."""
    path = _resolve_device_path(name_or_path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise DeviceSpecError(f"[{path.name}] YAML 파싱 실패: {e}") from e

    if isinstance(data, dict):
        data.setdefault('name', path.stem)
    gpu = device_from_mapping(data, source=path.name)
    log_with_time(f"[DEVICE|{gpu.name}] SM {gpu.num_sm}개, {gpu.core_clock / 1e9:.2f}GHz, "
                  f"L1 요청 {gpu.l1_granularity.coalesce_bytes}B", level="DEBUG", name=LOGGER_NAME)
    if gpu.estimated_fields:
        log_with_time(f"[WARN] [DEVICE|{gpu.name}] 추정값 사용 필드: {', '.join(sorted(gpu.estimated_fields))}",
                      level="WARN", name=LOGGER_NAME)
    return gpu
