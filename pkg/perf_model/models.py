# perf_model/models.py
# 데이터베이스 모델은 없고, 병목 라벨 선택지만 정의합니다.
from django.db import models


class Bottleneck(models.TextChoices):
    MAC = 'MAC', '연산 (MAC)'
    SMEM = 'SMEM', '공유 메모리 (SMEM)'
    L1_BW = 'L1_BW', 'L1 대역폭 (L1_BW)'
    L2_BW = 'L2_BW', 'L2 대역폭 (L2_BW)'
    DRAM_BW = 'DRAM_BW', 'DRAM 대역폭 (DRAM_BW)'
    DRAM_LAT = 'DRAM_LAT', 'DRAM 지연 (DRAM_LAT)'


# 동률일 때 앞선 항목이 이깁니다.
BOTTLENECK_PRIORITY = (
    Bottleneck.MAC,
    Bottleneck.SMEM,
    Bottleneck.L1_BW,
    Bottleneck.L2_BW,
    Bottleneck.DRAM_BW,
    Bottleneck.DRAM_LAT,
)
