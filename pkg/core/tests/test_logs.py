# core/tests/test_logs.py
import importlib
import os
import re
from unittest import mock

from django.conf import settings
from django.test import SimpleTestCase

from core.exceptions import LayerFileError, OracleCapExceeded
from core.logs import format_with_time, log_with_time, set_logger_levels


class LogWithTimeTests(SimpleTestCase):

    def test_format_has_millisecond_timestamp(self):
        self.assertRegex(format_with_time("hello"), r"^\[\d{2}:\d{2}:\d{2}\.\d{3}\] hello$")

    def test_warning_level_routes_to_named_logger(self):
        with self.assertLogs('traffic_model', level='WARNING') as captured:
            log_with_time("[WARN] 클램프 적용", level="WARN", name='traffic_model')
        self.assertEqual(len(captured.records), 1)
        self.assertTrue(re.search(r"클램프 적용$", captured.records[0].getMessage()))


class LoggerLevelTests(SimpleTestCase):

    def test_set_logger_levels(self):
        config = {'loggers': {'cli': {'level': 'INFO'}, 'oracle_sim': {'level': 'INFO'}}}
        set_logger_levels(config, 'DEBUG')
        self.assertEqual({c['level'] for c in config['loggers'].values()}, {'DEBUG'})
        self.assertEqual(set_logger_levels({}, 'DEBUG'), {})

    def test_local_settings_follow_env_log_level(self):
        if settings.SETTINGS_MODULE != 'ConvPerfModel.settings.local':
            self.skipTest('로컬 설정에서만 확인합니다.')
        local = importlib.import_module('ConvPerfModel.settings.local')
        try:
            with mock.patch.dict(os.environ, {'LOG_LEVEL': 'DEBUG'}):
                importlib.reload(local)
            self.assertEqual(local.LOG_LEVEL, 'DEBUG')
            self.assertEqual({c['level'] for c in local.LOGGING['loggers'].values()}, {'DEBUG'})
        finally:
            importlib.reload(local)


class ExceptionTests(SimpleTestCase):

    def test_layer_file_error_carries_line_number(self):
        error = LayerFileError("필드 수가 맞지 않습니다", line_number=7)
        self.assertEqual(error.line_number, 7)
        self.assertIn("7번째 줄", str(error))

    def test_cap_refusal_names_the_flag(self):
        error = OracleCapExceeded(cap=100, requested=250)
        self.assertEqual((error.cap, error.requested), (100, 250))
        self.assertIn("--oracle-cap", str(error))
