# cli/management/base.py
"""추정기 명령들이 공유하는 플래그, 장치/레이어 해석과 오류 → 종료 코드 변환."""
import sys
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from conv_gemm.layers import ConvLayerConfig
from conv_gemm.tiling import parse_tile_spec
from core.exceptions import EstimatorError, LayerConfigError, OracleCapExceeded
from perf_model.devices import GpuSpec, load_device
from cli.layer_files import read_layer_file
from cli.services import EstimateOptions

EXIT_VALIDATION = 1
EXIT_ORACLE_CAP = 2
DEFAULT_BATCH = 256


class EstimatorCommand(BaseCommand):
    """하위 클래스는 add_command_arguments 와 run 을 구현합니다."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # argparse 기본 종료 코드 2 는 오라클 한도 거부에 예약되어 있습니다.
        parser.error = lambda message: _argument_error(parser, message)
        return parser

    def add_arguments(self, parser):
        parser.add_argument('--device', default=settings.DEFAULT_DEVICE,
                            help='장치 프리셋 이름 또는 YAML 파일 경로')
        parser.add_argument('--batch', type=int, default=None, help='미니배치 크기 (레이어 파일의 B 를 덮어씀)')
        parser.add_argument('--elem-bytes', type=int, default=settings.DEFAULT_ELEM_BYTES)
        parser.add_argument('--l1-coalesce', type=int, choices=(32, 64, 128), default=None,
                            help='L1 요청 크기(바이트), 장치 값을 덮어씀')
        parser.add_argument('--tile', default=None, help='CTA 타일 MxNxK (기본: C_o 기준 자동 선택)')
        parser.add_argument('--act-cta', type=int, default=None, help='SM 당 활성 CTA 수')
        parser.add_argument('--fixed-miss-rate', type=float, default=None,
                            help='고정 미스율 모드 (L2 = r*L1, DRAM = r*L2)')
        parser.add_argument('--out', default=None, help='CSV 출력 경로 (기본: 표준 출력)')
        parser.add_argument('--oracle-cap', type=int, default=settings.ORACLE_ENUMERATION_CAP,
                            help='오라클이 열거할 최대 주소 수')
        parser.add_argument('--workers', type=int, default=settings.ESTIMATOR_WORKERS)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except OracleCapExceeded as e:
            raise CommandError(str(e), returncode=EXIT_ORACLE_CAP) from e
        except EstimatorError as e:
            raise CommandError(str(e), returncode=EXIT_VALIDATION) from e

    def run(self, **options):
        raise NotImplementedError

    # --- 공용 도우미 ---

    def load_gpu(self, options) -> GpuSpec:
        gpu = load_device(options['device'])
        if options.get('l1_coalesce'):
            gpu = gpu.with_l1_coalesce(options['l1_coalesce'])
        return gpu

    def estimate_options(self, options, tile_hw: int = 128) -> EstimateOptions:
        return EstimateOptions(
            tiling=parse_tile_spec(options['tile']) if options.get('tile') else None,
            num_act_cta=options.get('act_cta'),
            fixed_miss_rate=options.get('fixed_miss_rate'),
            tile_hw=tile_hw,
        )

    def emit(self, text: str, out_path: str | None):
        if out_path:
            Path(out_path).write_text(text, encoding='utf-8')
            self.stderr.write(f"CSV 저장: {out_path}")
        else:
            self.stdout.write(text, ending='')


def _argument_error(parser, message: str):
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(EXIT_VALIDATION, f"{parser.prog}: error: {message}\n")
    raise CommandError(f"Error: {message}", returncode=EXIT_VALIDATION)


def add_layer_arguments(parser):
    """단일 레이어: 파일의 한 행(--layer-file, --layer) 또는 개별 차원 플래그."""
    parser.add_argument('--layer-file', default=None, help='레이어 파일 또는 번들 네트워크 이름')
    parser.add_argument('--layer', default=None, help='--layer-file 안의 레이어 이름')
    parser.add_argument('--name', default='layer')
    parser.add_argument('--in-channels', type=int)
    parser.add_argument('--in-height', type=int)
    parser.add_argument('--in-width', type=int)
    parser.add_argument('--out-channels', type=int)
    parser.add_argument('--filter-height', type=int)
    parser.add_argument('--filter-width', type=int)
    parser.add_argument('--stride', type=int, default=1)
    parser.add_argument('--pad', type=int, default=0)


_DIMENSION_FLAGS = ('in_channels', 'in_height', 'in_width', 'out_channels', 'filter_height', 'filter_width')


def layer_from_options(options) -> ConvLayerConfig:
    elem_bytes = options['elem_bytes']
    if options.get('layer_file'):
        configs = read_layer_file(options['layer_file'], batch=options.get('batch'), elem_bytes=elem_bytes)
        if not options.get('layer'):
            if len(configs) == 1:
                return configs[0]
            raise LayerConfigError("--layer 로 레이어 이름을 지정하세요: " + ', '.join(c.name for c in configs))
        for cfg in configs:
            if cfg.name == options['layer']:
                return cfg
        raise LayerConfigError(f"레이어 {options['layer']!r} 가 파일에 없습니다.")

    missing = [flag for flag in _DIMENSION_FLAGS if options.get(flag) is None]
    if missing:
        flags = ', '.join('--' + flag.replace('_', '-') for flag in missing)
        raise LayerConfigError(f"레이어 차원이 부족합니다: {flags}")
    return ConvLayerConfig(
        name=options['name'], batch=options.get('batch') or DEFAULT_BATCH,
        in_channels=options['in_channels'], in_height=options['in_height'], in_width=options['in_width'],
        out_channels=options['out_channels'], filter_height=options['filter_height'],
        filter_width=options['filter_width'], stride=options['stride'], pad=options['pad'],
        elem_bytes=elem_bytes,
    )
