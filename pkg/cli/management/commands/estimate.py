# cli/management/commands/estimate.py
from cli.management.base import EstimatorCommand, add_layer_arguments, layer_from_options
from cli.services import estimate_layer, render_report_csv, summary_lines


class Command(EstimatorCommand):
    help = '레이어 하나의 L1/L2/DRAM 트래픽, 실행 시간, 병목을 추정합니다.'

    def add_command_arguments(self, parser):
        add_layer_arguments(parser)
        parser.add_argument('--quiet', action='store_true', help='요약 없이 CSV 만 출력')

    def run(self, **options):
        cfg = layer_from_options(options)
        report = estimate_layer(cfg, self.load_gpu(options), self.estimate_options(options))
        if not options['quiet']:
            for line in summary_lines(report):
                self.stderr.write(line)
        self.emit(render_report_csv([report]), options['out'])
