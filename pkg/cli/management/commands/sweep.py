# cli/management/commands/sweep.py
import io

from core.exceptions import LayerConfigError
from cli.management.base import EstimatorCommand, add_layer_arguments, layer_from_options
from cli.services import SWEEP_PARAMETERS, run_sweep, sweep_baseline, write_sweep_csv


class Command(EstimatorCommand):
    help = '기준 레이어에서 파라미터 하나를 바꿔 가며 트래픽과 시간을 추정합니다.'

    def add_command_arguments(self, parser):
        parser.add_argument('parameter', help=f"스윕할 파라미터: {', '.join(SWEEP_PARAMETERS)}")
        parser.add_argument('--values', default=None, help='쉼표로 구분한 값 목록 (기본: 파라미터별 기본 범위)')
        parser.add_argument('--with-oracle', action='store_true', help='오라클 값을 함께 계산')
        add_layer_arguments(parser)

    def run(self, **options):
        values = None
        if options['values']:
            try:
                values = [int(v) for v in options['values'].split(',') if v.strip()]
            except ValueError:
                raise LayerConfigError(f"--values 는 정수 목록이어야 합니다: {options['values']!r}") from None

        if options.get('layer_file') or options.get('in_channels') is not None:
            base = layer_from_options(options)
        else:
            base = sweep_baseline(batch=options['batch'] or 256, elem_bytes=options['elem_bytes'])

        points = run_sweep(options['parameter'], self.load_gpu(options), values, base=base,
                           options=self.estimate_options(options), with_oracle=options['with_oracle'],
                           oracle_cap=options['oracle_cap'], workers=options['workers'])
        buffer = io.StringIO()
        write_sweep_csv(points, buffer)
        self.emit(buffer.getvalue(), options['out'])
