# cli/management/commands/oracle.py
import csv
import io

from cli.management.base import EstimatorCommand, add_layer_arguments, layer_from_options
from oracle_sim.coalescing import PHASE_MODES
from oracle_sim.comparison import GMAE_LIMITS, LEVELS, compare_grid, compare_layer, default_grid


class Command(EstimatorCommand):
    help = '같은 입력에 대해 해석 모델과 주소 열거 오라클을 비교합니다.'

    def add_command_arguments(self, parser):
        add_layer_arguments(parser)
        parser.add_argument('--phases', choices=PHASE_MODES, default=None,
                            help='워프 시작 주소 정렬 위상 (기본: --grid 는 aligned, 단일 레이어는 all)')
        parser.add_argument('--grid', action='store_true', help='기본 검증 격자 전체를 비교하고 GMAE 를 출력')

    def run(self, **options):
        gpu = self.load_gpu(options)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')

        if options['grid']:
            report = compare_grid(default_grid(), gpu.l1_granularity, options['phases'] or 'aligned',
                                  options['oracle_cap'], workers=options['workers'])
            writer.writerow(('level', 'gmae', 'regime_gmae', 'limit', 'configs', 'regime_configs', 'skipped'))
            for level in LEVELS:
                limit = GMAE_LIMITS.get(level)
                writer.writerow((level, format(report.gmae(level), '.6g'),
                                 format(report.gmae(level, in_regime_only=True), '.6g'),
                                 '' if limit is None else limit, len(report.comparisons), report.regime_count,
                                 len(report.skipped)))
        else:
            cfg = layer_from_options(options)
            tiling = self.estimate_options(options).tiling
            comparison = compare_layer(cfg, tiling, gpu.l1_granularity, options['phases'] or 'all',
                                       options['oracle_cap'])
            writer.writerow(('name', 'level', 'analytical', 'oracle', 'rel_error'))
            for item in comparison.levels:
                writer.writerow((cfg.name, item.level, format(item.analytical, '.6g'), format(item.oracle, '.6g'),
                                 format(item.rel_error, '.6g')))
        self.emit(buffer.getvalue(), options['out'])
