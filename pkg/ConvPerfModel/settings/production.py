# ConvPerfModel/settings/production.py
from .base import *
from core.logs import set_logger_levels

environ.Env.read_env(str(BASE_DIR / '.env'))

DEBUG = False
SECRET_KEY = env('SECRET_KEY')  # .env 또는 환경변수에서 로드 (필수)

# 배치 실행에서는 경고 이상만 출력합니다.
LOG_LEVEL = env('LOG_LEVEL', default='WARNING')
set_logger_levels(LOGGING, LOG_LEVEL)

ESTIMATOR_WORKERS = env.int('ESTIMATOR_WORKERS', default=8)
