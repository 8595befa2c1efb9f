# traffic_model/tests/test_services.py
from django.test import SimpleTestCase

from conv_gemm.layers import ConvLayerConfig, fc_layer
from conv_gemm.tiling import Tiling
from core.exceptions import LayerConfigError
from traffic_model.granularity import L1Granularity
from traffic_model.services import estimate_traffic, footprint_bytes


def baseline_layer(batch: int = 256, **overrides) -> ConvLayerConfig:
    """256 입력 채널, 13x13, 128 출력 채널, 3x3, stride 1."""
    fields = dict(name='baseline', batch=batch, in_channels=256, in_height=13, in_width=13,
                  out_channels=128, filter_height=3, filter_width=3, stride=1, pad=1)
    fields.update(overrides)
    return ConvLayerConfig(**fields)


class EstimateTrafficTests(SimpleTestCase):

    def setUp(self):
        self.estimate = estimate_traffic(baseline_layer())

    def test_per_loop_identity(self):
        est = self.estimate
        self.assertAlmostEqual(est.tpl_l2 * est.grid.num_loops * est.grid.num_cta, est.t_l2_bytes,
                               delta=est.t_l2_bytes * 1e-12)
        self.assertAlmostEqual(est.tpl_dram * est.grid.num_loops * est.grid.num_cta, est.t_dram_bytes,
                               delta=est.t_dram_bytes * 1e-12)

    def test_mli_fields_echo_equations(self):
        self.assertEqual(self.estimate.mli_ifmap, 2.0)
        self.assertEqual(self.estimate.mli_filter, 2.0)

    def test_invariants(self):
        est = self.estimate
        shape = est.shape
        self.assertGreaterEqual(est.t_l1_bytes, 4 * (shape.m + shape.n) * shape.k)
        self.assertGreaterEqual(est.t_dram_bytes, 4 * baseline_layer().filter_elements)
        self.assertGreaterEqual(est.t_dram_bytes, 4 * baseline_layer().ifmap_elements)
        self.assertEqual(est.t_dram_write_bytes, 4 * shape.m * shape.n)

    def test_clamp_flag_is_reported_and_logged(self):
        with self.assertLogs('traffic_model', level='WARNING') as captured:
            est = estimate_traffic(baseline_layer())
        self.assertTrue(est.dist_h_clamped)
        self.assertIn('DIST_H', captured.output[0])

    def test_mini_batch_invariance(self):
        reference = estimate_traffic(baseline_layer(batch=16))
        for batch in range(32, 513, 16):
            est = estimate_traffic(baseline_layer(batch=batch))
            self.assertEqual(est.tpl_l1, reference.tpl_l1)
            self.assertEqual(est.tpl_l2, reference.tpl_l2)

    def test_miss_rates(self):
        est = self.estimate
        self.assertAlmostEqual(est.l1_miss_rate, est.t_l2_bytes / est.t_l1_bytes)
        self.assertAlmostEqual(est.l2_miss_rate, est.t_dram_bytes / est.t_l2_bytes)

    def test_tiling_override(self):
        est = estimate_traffic(baseline_layer(), tiling=Tiling(128, 64, 4))
        self.assertEqual(est.grid.grid_cols, 2)
        self.assertEqual(est.mli_filter, 2.75)


class SpecialLayerTests(SimpleTestCase):

    def test_fc_layer(self):
        est = estimate_traffic(fc_layer('fc7', batch=256, in_features=4096, out_features=4096))
        self.assertEqual(est.a_dist_h, 0.0)
        self.assertEqual(est.a_dist_v, 128 * 8)
        self.assertEqual(est.mli_ifmap, 1.0)

    def test_sector_requests(self):
        est = estimate_traffic(baseline_layer(), gran=L1Granularity(32))
        self.assertEqual(est.mli_ifmap, 1.25)
        self.assertEqual(est.mli_filter, 1.875)

    def test_l2_resident_footprint_flag(self):
        small = baseline_layer(batch=1, in_channels=16, out_channels=32)
        with self.assertLogs('traffic_model', level='WARNING'):
            est = estimate_traffic(small, l2_size_bytes=3 * 1024 * 1024)
        self.assertTrue(est.fits_in_l2)
        self.assertLessEqual(footprint_bytes(small), 3 * 1024 * 1024)
        self.assertIsNone(estimate_traffic(small).fits_in_l2)


class FixedMissRateTests(SimpleTestCase):

    def test_levels_scale_by_rate(self):
        est = estimate_traffic(baseline_layer(), fixed_miss_rate=0.5)
        shape = est.shape
        self.assertEqual(est.t_l1_bytes, 4 * (shape.m + shape.n) * shape.k)
        self.assertEqual(est.t_l2_bytes, est.t_l1_bytes * 0.5)
        self.assertEqual(est.t_dram_bytes, est.t_l1_bytes * 0.25)
        self.assertEqual(est.tpl_l2, est.tpl_l1 * 0.5)
        self.assertEqual(est.mli_ifmap, 1.0)

    def test_rate_of_one_passes_everything_through(self):
        est = estimate_traffic(baseline_layer(), fixed_miss_rate=1)
        self.assertEqual(est.t_dram_bytes, est.t_l1_bytes)

    def test_invalid_rate(self):
        with self.assertRaises(LayerConfigError):
            estimate_traffic(baseline_layer(), fixed_miss_rate=1.5)
