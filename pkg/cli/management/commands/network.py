# cli/management/commands/network.py
from cli.layer_files import read_layer_file
from cli.management.base import EstimatorCommand
from cli.services import estimate_network, render_report_csv, summary_lines


class Command(EstimatorCommand):
    help = '레이어 파일(또는 번들 네트워크)의 모든 레이어를 추정해 CSV 로 출력합니다.'

    def add_command_arguments(self, parser):
        parser.add_argument('layers', help='레이어 파일 경로 또는 번들 이름 (alexnet, vgg16, googlenet, resnet152, ...)')
        parser.add_argument('--summary', action='store_true', help='레이어별 요약을 표준 오류로 출력')

    def run(self, **options):
        configs = read_layer_file(options['layers'], batch=options['batch'], elem_bytes=options['elem_bytes'])
        reports = estimate_network(configs, self.load_gpu(options), self.estimate_options(options),
                                   workers=options['workers'])
        if options['summary']:
            for report in reports:
                for line in summary_lines(report):
                    self.stderr.write(line)
        self.emit(render_report_csv(reports), options['out'])
