# traffic_model/granularity.py
from dataclasses import dataclass

from core.exceptions import DeviceSpecError

SUPPORTED_COALESCE_BYTES = (32, 64, 128)
DEFAULT_SECTOR_BYTES = 32


@dataclass(frozen=True)
class L1Granularity:
    """L1 요청 크기(coalesce)와 최소 트랜잭션 크기(sector), 단위는 바이트."""
    coalesce_bytes: int = 128
    sector_bytes: int = DEFAULT_SECTOR_BYTES

    def __post_init__(self):
        if self.coalesce_bytes not in SUPPORTED_COALESCE_BYTES:
            raise DeviceSpecError(f"L1 요청 크기는 {SUPPORTED_COALESCE_BYTES} 중 하나여야 합니다: {self.coalesce_bytes}")
        if self.sector_bytes < 1 or self.coalesce_bytes % self.sector_bytes:
            raise DeviceSpecError(
                f"sector({self.sector_bytes}B)가 요청 크기({self.coalesce_bytes}B)를 나누지 못합니다."
            )
