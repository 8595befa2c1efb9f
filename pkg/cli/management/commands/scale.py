# cli/management/commands/scale.py
import io

from cli.layer_files import read_layer_file
from cli.management.base import EstimatorCommand
from cli.services import load_design_options, run_scaling_study, write_scaling_csv


class Command(EstimatorCommand):
    help = 'GPU 설계 옵션별 속도 향상과 병목 분포를 계산합니다.'

    def add_command_arguments(self, parser):
        parser.add_argument('--layers', default='resnet152_full', help='레이어 파일 또는 번들 이름')
        parser.add_argument('--options', default=None, help='설계 옵션 YAML (기본: 번들 옵션)')

    def run(self, **options):
        configs = read_layer_file(options['layers'], batch=options['batch'], elem_bytes=options['elem_bytes'])
        option_set = load_design_options(options['options'])
        results = run_scaling_study(configs, self.load_gpu(options), option_set,
                                    self.estimate_options(options), workers=options['workers'])
        for result in results[1:]:
            target = option_set.informational_speedups.get(result.option)
            note = f" (참고값 {target}x)" if target is not None else ''
            self.stderr.write(f"{result.option}: {result.speedup:.3f}x{note}")
        buffer = io.StringIO()
        write_scaling_csv(results, buffer)
        self.emit(buffer.getvalue(), options['out'])
