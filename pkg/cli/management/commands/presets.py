# cli/management/commands/presets.py
from cli.management.base import EstimatorCommand
from perf_model.devices import list_presets, load_device


class Command(EstimatorCommand):
    help = '번들 장치 프리셋을 나열합니다.'

    def run(self, **options):
        for name in list_presets():
            gpu = load_device(name)
            estimated = ', '.join(sorted(gpu.estimated_fields)) or '-'
            self.stdout.write(
                f"{name}: SM {gpu.num_sm}, {gpu.core_clock / 1e9:.2f}GHz, "
                f"MAC {gpu.bw_mac * gpu.num_sm * 2 / 1e9:.0f}GFLOPS, L1 {gpu.bw_l1 / 1e9:g}GB/s/SM, "
                f"L2 {gpu.bw_l2 / 1e9:g}GB/s, DRAM {gpu.bw_dram / 1e9:g}GB/s, "
                f"L1 요청 {gpu.l1_granularity.coalesce_bytes}B (추정값: {estimated})"
            )
