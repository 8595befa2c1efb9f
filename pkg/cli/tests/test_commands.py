# cli/tests/test_commands.py
import contextlib
import io
import tempfile
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from cli.management.commands.estimate import Command as EstimateCommand
from cli.services import CSV_COLUMNS
from conv_gemm.layers import ConvLayerConfig

SMALL_POINTWISE = dict(name='pw', batch=2, in_channels=16, in_height=8, in_width=8, out_channels=32,
                       filter_height=1, filter_width=1)


def run(*args, **kwargs) -> str:
    out = io.StringIO()
    call_command(*args, stdout=out, stderr=io.StringIO(), **kwargs)
    return out.getvalue()


class EstimateCommandTests(SimpleTestCase):

    def test_single_layer(self):
        output = run('estimate', in_channels=256, in_height=13, in_width=13, out_channels=128,
                     filter_height=3, filter_width=3, pad=1, name='baseline')
        lines = output.splitlines()
        self.assertEqual(lines[0], ','.join(CSV_COLUMNS))
        self.assertTrue(lines[1].startswith('baseline,43264,128,2304,128,128,8,'))
        self.assertTrue(lines[1].endswith(',MAC,1'))

    def test_layer_from_bundled_file(self):
        output = run('estimate', layer_file='alexnet', layer='conv3', quiet=True)
        self.assertTrue(output.splitlines()[1].startswith('conv3,43264,384,2304,'))

    def test_l1_coalesce_flag(self):
        output = run('estimate', '--device', 'v100', '--l1-coalesce', '32', '--in-channels', '256',
                     '--in-height', '13', '--in-width', '13', '--out-channels', '128', '--filter-height', '3',
                     '--filter-width', '3', '--pad', '1')
        row = dict(zip(CSV_COLUMNS, output.splitlines()[1].split(',')))
        self.assertEqual(row['mli_ifmap'], '1.25')

    def test_invalid_layer_exits_with_validation_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', in_channels=3, in_height=3, in_width=3, out_channels=8, filter_height=7,
                filter_width=7)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_dimensions(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', in_channels=3)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_unknown_device(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', device='h100', **SMALL_POINTWISE)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_bad_tile(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', tile='128x128', **SMALL_POINTWISE)
        self.assertEqual(ctx.exception.returncode, 1)


class NetworkCommandTests(SimpleTestCase):

    def test_googlenet_output_is_byte_identical(self):
        first = run('network', 'googlenet')
        second = run('network', 'googlenet', workers=1)
        self.assertEqual(first, second)
        self.assertEqual(len(first.splitlines()), 1 + 49)

    def test_out_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'alexnet.csv'
            self.assertEqual(run('network', 'alexnet', out=str(path)), '')
            self.assertEqual(len(path.read_text(encoding='utf-8').splitlines()), 6)

    def test_malformed_layer_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.csv'
            path.write_text('name,B,C_i,H_i,W_i,C_o,H_f,W_f,Strd,Pad\nconv1,1,3,8,8\n', encoding='utf-8')
            with self.assertRaises(CommandError) as ctx:
                run('network', str(path))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('2번째 줄', str(ctx.exception))


class SweepCommandTests(SimpleTestCase):

    def test_batch_sweep(self):
        lines = run('sweep', 'B', values='16,32,64').splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[0].startswith('parameter,value,name,M,N,K'))
        self.assertEqual([line.split(',')[1] for line in lines[1:]], ['16', '32', '64'])

    def test_unknown_parameter(self):
        with self.assertRaises(CommandError) as ctx:
            run('sweep', 'dilation')
        self.assertEqual(ctx.exception.returncode, 1)


class OracleCommandTests(SimpleTestCase):

    def test_pointwise_dram_matches(self):
        lines = run('oracle', phases='aligned', **SMALL_POINTWISE).splitlines()
        rows = {line.split(',')[1]: line.split(',') for line in lines[1:]}
        self.assertEqual(rows['DRAM'][4], '0')
        self.assertEqual(rows['L2_TILE'][4], '0')

    def test_cap_refusal_has_distinct_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('oracle', oracle_cap=1000, **SMALL_POINTWISE)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('--oracle-cap', str(ctx.exception))

    def test_grid_reports_regime_gmae(self):
        grid = [ConvLayerConfig(**SMALL_POINTWISE),
                ConvLayerConfig(**dict(SMALL_POINTWISE, name='pw16', batch=1, in_height=16, in_width=16))]
        with mock.patch('cli.management.commands.oracle.default_grid', return_value=grid):
            lines = run('oracle', grid=True, workers=1).splitlines()
        self.assertEqual(lines[0], 'level,gmae,regime_gmae,limit,configs,regime_configs,skipped')
        rows = {line.split(',')[0]: line.split(',') for line in lines[1:]}
        self.assertEqual(rows['L1_IFMAP_MLI'][1:], ['0', '0', '0.15', '2', '1', '0'])
        self.assertEqual(rows['L2_TILE'][1:4], ['0', '0', '0.25'])
        self.assertEqual(rows['DRAM'][3], '')


class ScaleCommandTests(SimpleTestCase):

    def test_identity_option(self):
        with tempfile.TemporaryDirectory() as tmp:
            options_path = Path(tmp) / 'options.yaml'
            options_path.write_text('options:\n  same: {n_sm: 1, cta_tile_hw: 128}\n', encoding='utf-8')
            lines = run('scale', layers='alexnet', options=str(options_path)).splitlines()
        self.assertEqual(lines[0].split(',')[:3], ['option', 'total_time_s', 'speedup'])
        self.assertEqual(lines[1].split(',')[2], '1')
        self.assertEqual(lines[2].split(',')[2], '1')

    def test_malformed_option(self):
        with tempfile.TemporaryDirectory() as tmp:
            options_path = Path(tmp) / 'options.yaml'
            options_path.write_text('options:\n  broken: {n_sm: -1}\n', encoding='utf-8')
            with self.assertRaises(CommandError) as ctx:
                run('scale', layers='alexnet', options=str(options_path))
        self.assertEqual(ctx.exception.returncode, 1)


class PresetsCommandTests(SimpleTestCase):

    def test_lists_presets(self):
        lines = run('presets').splitlines()
        self.assertEqual([line.split(':')[0] for line in lines], ['p100', 'titan-xp', 'v100'])


class ArgumentErrorTests(SimpleTestCase):
    """인자 파싱 오류는 검증 오류와 같은 종료 코드 1 을 씁니다 (2 는 오라클 한도 전용)."""

    def test_rejected_choice_via_call_command(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', '--l1-coalesce', '48', '--in-channels', '16', '--in-height', '8', '--in-width', '8',
                '--out-channels', '32', '--filter-height', '1', '--filter-width', '1')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_non_integer_dimension_via_call_command(self):
        with self.assertRaises(CommandError) as ctx:
            run('estimate', '--in-channels', 'x')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_command_line_exit_status(self):
        command = EstimateCommand()
        command._called_from_command_line = True
        parser = command.create_parser('manage.py', 'estimate')
        for argv in (['--l1-coalesce', '48'], ['--in-channels', 'x']):
            with self.subTest(argv=argv), contextlib.redirect_stderr(io.StringIO()) as err:
                with self.assertRaises(SystemExit) as ctx:
                    parser.parse_args(argv)
                self.assertEqual(ctx.exception.code, 1)
                self.assertIn('error:', err.getvalue())
