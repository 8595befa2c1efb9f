# ConvPerfModel/settings/local.py
from .base import *
from core.logs import set_logger_levels

# 로컬 .env 파일 로드 (BASE_DIR의 .env)
ENV_FILE_PATH = BASE_DIR / '.env'
if ENV_FILE_PATH.exists():
    environ.Env.read_env(str(ENV_FILE_PATH))

DEBUG = True
ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=['127.0.0.1', 'localhost'])

# .env 값이 base 단계 이후에 로드되므로 다시 읽습니다.
DEFAULT_DEVICE = env('DEFAULT_DEVICE')
ORACLE_ENUMERATION_CAP = env.int('ORACLE_ENUMERATION_CAP')
ESTIMATOR_WORKERS = env.int('ESTIMATOR_WORKERS')
DEFAULT_ELEM_BYTES = env.int('DEFAULT_ELEM_BYTES')
DEFAULT_REGS_PER_THREAD = env.int('DEFAULT_REGS_PER_THREAD')
LOG_LEVEL = env('LOG_LEVEL')
set_logger_levels(LOGGING, LOG_LEVEL)
