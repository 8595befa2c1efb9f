# cli/tests/test_services.py
import io
import math

from django.test import SimpleTestCase

from cli.layer_files import read_layer_file
from conv_gemm.layers import ConvLayerConfig
from cli.services import (
    CSV_COLUMNS, DesignOption, DesignOptionSet, EstimateOptions, csv_row, estimate_layer, estimate_network,
    load_design_options, parse_design_options, render_report_csv, run_scaling_study, run_sweep, sweep_baseline,
    write_scaling_csv,
)
from core.exceptions import DesignOptionError, LayerConfigError
from perf_model.devices import load_device
from perf_model.models import Bottleneck


class EstimateLayerTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.titan = load_device('titan-xp')

    def test_baseline_row(self):
        report = estimate_layer(sweep_baseline(), self.titan)
        row = dict(zip(CSV_COLUMNS, csv_row(report)))
        self.assertEqual((row['M'], row['N'], row['K']), ('43264', '128', '2304'))
        self.assertEqual((row['blk_M'], row['blk_N'], row['blk_K']), ('128', '128', '8'))
        self.assertEqual((row['mli_ifmap'], row['mli_filter']), ('2', '2'))
        self.assertEqual(row['bottleneck'], 'MAC')
        self.assertEqual(row['case'], '1')

    def test_fixed_miss_rate_option(self):
        report = estimate_layer(sweep_baseline(), self.titan, EstimateOptions(fixed_miss_rate=1.0))
        self.assertEqual(report.traffic.t_l1_bytes, report.traffic.t_dram_bytes)

    def test_large_tile_option(self):
        cfg = ConvLayerConfig(name='wide', batch=256, in_channels=256, in_height=13, in_width=13,
                              out_channels=256, filter_height=3, filter_width=3, stride=1, pad=1)
        report = estimate_layer(cfg, self.titan.replace(size_reg=3 * self.titan.size_reg,
                                                        size_smem=3 * self.titan.size_smem),
                                EstimateOptions(tile_hw=256))
        self.assertEqual((report.traffic.tiling.blk_m, report.traffic.tiling.blk_n), (256, 256))


class NetworkTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.titan = load_device('titan-xp')

    def test_googlenet_csv_is_deterministic(self):
        configs = read_layer_file('googlenet')
        first = render_report_csv(estimate_network(configs, self.titan, workers=4))
        second = render_report_csv(estimate_network(configs, self.titan, workers=2))
        self.assertEqual(first, second)
        lines = first.splitlines()
        self.assertEqual(lines[0], ','.join(CSV_COLUMNS))
        self.assertEqual([line.split(',')[0] for line in lines[1:]], [cfg.name for cfg in configs])

    def test_labels_are_known(self):
        reports = estimate_network(read_layer_file('alexnet'), self.titan)
        self.assertTrue(all(r.perf.bottleneck in Bottleneck.values for r in reports))

    def test_resnet152_unbounded_memory_is_compute_bound(self):
        gpu = self.titan.replace(bw_l1=math.inf, bw_l2=math.inf, bw_dram=math.inf,
                                 lat_l1=0.0, lat_l2=0.0, lat_dram=0.0, lat_smem=0.0)
        reports = estimate_network(read_layer_file('resnet152'), gpu)
        self.assertEqual({r.perf.bottleneck for r in reports}, {Bottleneck.MAC})

    def test_slow_dram_flips_a_layer(self):
        configs = read_layer_file('resnet152')
        base = estimate_network(configs, self.titan)
        slow = estimate_network(configs, self.titan.replace(bw_dram=self.titan.bw_dram / 8))
        self.assertNotIn(Bottleneck.DRAM_BW, {r.perf.bottleneck for r in base})
        self.assertGreaterEqual(sum(r.perf.bottleneck == Bottleneck.DRAM_BW for r in slow), 1)


class SweepTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.titan = load_device('titan-xp')

    def test_batch_leaves_per_cta_traffic_unchanged(self):
        points = run_sweep('B', self.titan, values=[16, 32, 64, 128, 256, 512])
        self.assertEqual(len({p.report.traffic.tpl_l1 for p in points}), 1)
        self.assertEqual(len({p.report.traffic.tpl_l2 for p in points}), 1)

    def test_output_channels_pick_tile_width(self):
        points = run_sweep('C_o', self.titan, values=[32, 64, 128])
        self.assertEqual([p.report.traffic.tiling.blk_n for p in points], [32, 64, 128])

    def test_input_channels_scale_k(self):
        points = run_sweep('C_i', self.titan, values=[16, 32, 64])
        self.assertEqual([p.report.traffic.shape.k for p in points], [144, 288, 576])

    def test_coalesce(self):
        points = run_sweep('coalesce', self.titan, values=[32, 128])
        self.assertEqual([p.report.traffic.mli_ifmap for p in points], [1.25, 2.0])

    def test_filter_keeps_output_size(self):
        points = run_sweep('filter', self.titan, values=[1, 5])
        self.assertEqual({p.report.traffic.shape.m for p in points}, {256 * 13 * 13})

    def test_unsupported_parameter(self):
        with self.assertRaises(LayerConfigError):
            run_sweep('dilation', self.titan)

    def test_with_oracle(self):
        base = ConvLayerConfig(name='small', batch=1, in_channels=4, in_height=8, in_width=8,
                               out_channels=32, filter_height=1, filter_width=1)
        points = run_sweep('B', self.titan, values=[1, 2], base=base, with_oracle=True)
        for point in points:
            self.assertEqual(point.oracle.level('DRAM').rel_error, 0.0)


class DesignOptionTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.titan = load_device('titan-xp')

    def test_bundled_options(self):
        option_set = load_design_options()
        self.assertEqual([o.name for o in option_set.options], [f'opt{i}' for i in range(1, 10)])
        self.assertEqual(option_set.informational_speedups['opt2'], 3.4)
        self.assertEqual(option_set.options[6].cta_tile_hw, 256)

    def test_apply(self):
        gpu = DesignOption('x', n_sm=2, mac_bw_per_sm=4, dram_bw=1.5).apply(self.titan)
        self.assertEqual(gpu.num_sm, 60)
        self.assertAlmostEqual(gpu.bw_mac, 4 * self.titan.bw_mac)
        self.assertAlmostEqual(gpu.bw_dram, 1.5 * self.titan.bw_dram)
        self.assertEqual(gpu.bw_l1, self.titan.bw_l1)

    def test_invalid_rows(self):
        with self.assertRaises(DesignOptionError):
            DesignOption('x', dram_bw=0)
        with self.assertRaises(DesignOptionError):
            DesignOption('x', cta_tile_hw=192)
        with self.assertRaises(DesignOptionError):
            parse_design_options({'options': {'x': {'hbm': 2}}})
        with self.assertRaises(DesignOptionError):
            parse_design_options({'opts': {}})

    def test_identity_option(self):
        configs = read_layer_file('alexnet')
        results = run_scaling_study(configs, self.titan, DesignOptionSet(options=(DesignOption('same'),)))
        self.assertEqual([r.option for r in results], ['baseline', 'same'])
        self.assertEqual(results[1].speedup, 1.0)
        self.assertEqual(sum(results[1].bottlenecks.values()), len(configs))

    def test_more_sms_speed_up_resnet152(self):
        option_set = load_design_options()
        subset = DesignOptionSet(options=option_set.options[:2])
        results = run_scaling_study(read_layer_file('resnet152'), self.titan, subset)
        speedups = {r.option: r.speedup for r in results}
        self.assertGreater(speedups['opt2'], speedups['opt1'])
        self.assertGreater(speedups['opt1'], 1.0)

        buffer = io.StringIO()
        write_scaling_csv(results, buffer)
        self.assertTrue(buffer.getvalue().startswith('option,total_time_s,speedup,MAC,SMEM,'))
